"""Versioned JSON artifacts with content hashes and seed derivation.

Every artifact this package writes (models, chains, target lists, reports,
feature spaces) is a JSON object carrying ``format_version``, ``kind``,
``tool_version`` and a ``content_hash`` over the canonical serialization of
the rest of the payload.  Writing is deterministic: the same payload always
produces the same bytes, which is what makes seeded end-to-end runs
byte-reproducible.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .errors import CorruptFileError, VersionMismatchError

TOOL_VERSION = "0.1.0"
FORMAT_VERSION = 1


def canonical_json(payload) -> str:
    """Key-sorted, whitespace-free JSON used for hashing."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def content_hash(payload) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def derive_seed(master_seed: int, *labels) -> int:
    """Derive a per-stage seed from one master seed by labelled hashing.

    Stable across processes and platforms (unlike ``hash()``), so any stage
    can be re-run in isolation and reproduce the run it was part of.
    """
    tag = ":".join([str(master_seed)] + [str(l) for l in labels])
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1  # non-negative 63-bit


def write_artifact(path, kind: str, payload: dict) -> None:
    """Write ``payload`` as a versioned artifact of the given kind."""
    body = dict(payload)
    body["kind"] = kind
    body["format_version"] = FORMAT_VERSION
    body["tool_version"] = TOOL_VERSION
    body["content_hash"] = content_hash(body)
    text = json.dumps(body, sort_keys=True, indent=2, ensure_ascii=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def read_artifact(path, kind: str, verify: bool = False) -> dict:
    """Read an artifact, checking kind and format version.

    With ``verify=True`` the embedded content hash is recomputed and a
    mismatch raises :class:`CorruptFileError`.
    """
    try:
        raw = Path(path).read_text(encoding="utf-8")
        body = json.loads(raw)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFileError(f"{path}: {exc}") from exc
    if not isinstance(body, dict) or "format_version" not in body:
        raise CorruptFileError(f"{path}: not an artifact file")
    if body.get("kind") != kind:
        raise CorruptFileError(f"{path}: expected {kind!r} artifact, found {body.get('kind')!r}")
    if body["format_version"] != FORMAT_VERSION:
        raise VersionMismatchError(
            f"{path}: format version {body['format_version']} (supported: {FORMAT_VERSION})"
        )
    if verify:
        recorded = body.get("content_hash")
        stripped = {k: v for k, v in body.items() if k != "content_hash"}
        if recorded != content_hash(stripped):
            raise CorruptFileError(f"{path}: content hash mismatch")
    return body
