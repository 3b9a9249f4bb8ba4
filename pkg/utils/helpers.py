import hashlib
import json
import os
import sys

_QUIET = False


def set_quiet(quiet):
    """Silence or re-enable status lines on the diagnostic stream."""
    global _QUIET
    _QUIET = bool(quiet)


def status(message, icon="ℹ️"):
    """
    Print a status line to stderr so that stdout carries only reports.

    Args:
        message: Human-readable text
        icon: Leading emoji, following the ✅ / ⚠️ / ❌ / 🔄 convention
    """
    if _QUIET:
        return
    print(f"{icon} {message}", file=sys.stderr)


def sha256_hex(payload):
    """SHA-256 of bytes or text."""
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def dumps_json(data):
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def ensure_parent_dir(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(parent):
        os.makedirs(parent)


def write_text(path, text, announce=True):
    """
    Write a text artifact, creating parent directories.

    Args:
        path: Destination file
        text: File content
        announce: Print a ✅ status line on success

    Returns:
        The path written
    """
    ensure_parent_dir(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    if announce:
        status(f"Created {path}", "✅")
    return path


def write_bytes(path, payload, announce=True):
    ensure_parent_dir(path)
    with open(path, "wb") as f:
        f.write(payload)
    if announce:
        status(f"Created {path}", "✅")
    return path


def load_json(path):
    """Read a JSON document, reporting a missing file as FileNotFoundError."""
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
