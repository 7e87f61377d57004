# Small output helpers shared by every export path.
#
# All writers funnel through atomic_write_text so a crashed run never leaves a
# half-written table behind, and all floats funnel through fmt so output bytes
# are reproducible run to run.

from __future__ import annotations

import hashlib
import os
import tempfile


def fmt(x) -> str:
    # repr() of a float is the shortest decimal string that round-trips the
    # exact double: that covers the >= 15 significant digit requirement on
    # numeric exports and keeps bytes stable across runs and platforms.
    if isinstance(x, float):
        return repr(x)
    return str(x)


def atomic_write_text(path, text: str) -> None:
    # Write a sibling temp file, then rename over the target; rename within a
    # directory is atomic on POSIX.
    path = os.fspath(path)
    parent = os.path.dirname(path) or "."
    os.makedirs(parent, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=".tmp-nearlink-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
