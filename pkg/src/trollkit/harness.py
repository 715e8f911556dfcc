"""The arms race: classify, rewrite what was flagged, classify again.

Stage 1 runs the detector over a labelled corpus.  Stage 2 rewrites exactly
the tweets that were flagged as trolling, working on the raw token stream
and re-deriving the hashtag column from the rewritten text (a recycled tweet
is a *new* post; the platform re-extracts its hashtags).  Stage 3 pushes the
rewrites through the unchanged feature space and detector, and the report
quantifies how much ground the detector lost.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Label, TweetRecord, tokenize
from .detector import LinearModel, Metrics, classify, compute_metrics
from .errors import FingerprintMismatchError
from .pipeline import Featurizer
from .rewrite import MarkovChain, RewriteTrace, rewrite
from .serialize import derive_seed, read_artifact, write_artifact
from .targets import TargetWordList

REPORT_KIND = "arms-race-report"


@dataclass(frozen=True)
class ArmsRaceReport:
    pre: Metrics
    post: Metrics
    evasion_rate: float  # flagged true trolls that came back clean
    counts: dict
    fingerprints: dict
    seed: int

    def to_payload(self) -> dict:
        return {
            "pre": self.pre.to_payload(),
            "post": self.post.to_payload(),
            "evasion_rate": self.evasion_rate,
            "counts": dict(self.counts),
            "fingerprints": dict(self.fingerprints),
            "seed": self.seed,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "ArmsRaceReport":
        return cls(
            pre=Metrics.from_payload(payload["pre"]),
            post=Metrics.from_payload(payload["post"]),
            evasion_rate=payload["evasion_rate"],
            counts=payload["counts"],
            fingerprints=payload["fingerprints"],
            seed=payload["seed"],
        )


def rewrite_record(
    record: TweetRecord,
    targets: TargetWordList,
    chain: MarkovChain,
    seed: int,
) -> tuple[TweetRecord, RewriteTrace]:
    """Rewrite one tweet's text and rebuild the record from the new text.

    The structured hashtag column is re-derived from the rewritten text's
    inline hashtags: the rewriter only manipulates text, and a reposted
    tweet's metadata follows its text.
    """
    new_tokens, trace = rewrite(record.text.split(), targets, chain, seed)
    new_text = " ".join(new_tokens)
    inline = tokenize(
        TweetRecord(id=record.id, text=new_text, kind=record.kind), frozenset()
    ).hashtag_tokens
    return (
        TweetRecord(
            id=record.id,
            text=new_text,
            kind=record.kind,
            hashtags=inline,
            label=record.label,
        ),
        trace,
    )


def run_arms_race(
    model: LinearModel,
    featurizer: Featurizer,
    targets: TargetWordList,
    chain: MarkovChain,
    records,
    seed: int,
) -> ArmsRaceReport:
    """Run both classification passes and measure the detector's degradation.

    ``evasion_rate`` is the fraction of *true troll* tweets flagged in stage
    1 that are classified non-troll after rewriting; flipped false positives
    are reported separately in the counts.
    """
    records = list(records)
    if any(r.label is None for r in records):
        raise ValueError("the arms race needs a fully labelled corpus")
    model.require_space(featurizer.space.fingerprint)

    pre_preds = [classify(model, featurizer.vector(r)) for r in records]
    labels = [r.label for r in records]
    pre = compute_metrics(pre_preds, labels)

    final_records = []
    n_rewritten = 0
    for record, pred in zip(records, pre_preds):
        if pred is Label.TROLL:
            rewritten, _ = rewrite_record(
                record, targets, chain, derive_seed(seed, "rewrite", record.id)
            )
            final_records.append(rewritten)
            n_rewritten += 1
        else:
            final_records.append(record)

    post_preds = [
        classify(model, featurizer.vector(r)) if pred is Label.TROLL else pred
        for r, pred in zip(final_records, pre_preds)
    ]
    post = compute_metrics(post_preds, labels)

    troll_flagged = sum(
        1 for p, y in zip(pre_preds, labels) if p is Label.TROLL and y is Label.TROLL
    )
    evaded = sum(
        1
        for p1, p2, y in zip(pre_preds, post_preds, labels)
        if p1 is Label.TROLL and y is Label.TROLL and p2 is Label.NONTROLL
    )
    fp_flagged = sum(
        1 for p, y in zip(pre_preds, labels) if p is Label.TROLL and y is Label.NONTROLL
    )
    fp_flipped = sum(
        1
        for p1, p2, y in zip(pre_preds, post_preds, labels)
        if p1 is Label.TROLL and y is Label.NONTROLL and p2 is Label.NONTROLL
    )
    return ArmsRaceReport(
        pre=pre,
        post=post,
        evasion_rate=evaded / troll_flagged if troll_flagged else 0.0,
        counts={
            "corpus": len(records),
            "flagged": troll_flagged + fp_flagged,
            "true_troll_flagged": troll_flagged,
            "rewritten": n_rewritten,
            "evaded": evaded,
            "false_positives_flagged": fp_flagged,
            "false_positives_flipped": fp_flipped,
        },
        fingerprints={
            "feature_space": featurizer.space.fingerprint,
            "model": model.fingerprint,
            "targets": targets.fingerprint,
            "chain": chain.fingerprint,
        },
        seed=seed,
    )


def render_text(report: ArmsRaceReport) -> str:
    """Metric / before / after / change table, absolute and relative."""
    lines = [
        f"{'Metric':<10} {'Before':>8} {'After':>8} {'Change':>8} {'Change%':>9}",
    ]
    for name in ("accuracy", "precision", "recall", "f1"):
        before = getattr(report.pre, name)
        after = getattr(report.post, name)
        change = after - before
        rel = (change / before * 100.0) if before else 0.0
        label = "F1" if name == "f1" else name.capitalize()
        lines.append(f"{label:<10} {before:>8.3f} {after:>8.3f} {change:>+8.3f} {rel:>+8.1f}%")
    c = report.counts
    lines.append("")
    lines.append(f"Evasion rate: {report.evasion_rate:.3f} "
                 f"({c['evaded']}/{c['true_troll_flagged']} flagged trolls came back clean)")
    lines.append(f"Rewritten: {c['rewritten']} of {c['corpus']} tweets; "
                 f"false positives flipped: {c['false_positives_flipped']}/{c['false_positives_flagged']}")
    return "\n".join(lines) + "\n"


def emit_report(report: ArmsRaceReport, path, format: str = "json") -> None:
    """Write the report as a versioned JSON artifact or a plain-text table."""
    format = format.lower()
    if format == "json":
        write_artifact(path, REPORT_KIND, report.to_payload())
    elif format == "text":
        from pathlib import Path

        Path(path).write_text(render_text(report), encoding="utf-8")
    else:
        raise ValueError(f"unknown report format {format!r}")


def load_report(path, verify: bool = False) -> ArmsRaceReport:
    body = read_artifact(path, REPORT_KIND, verify=verify)
    return ArmsRaceReport.from_payload(body)
