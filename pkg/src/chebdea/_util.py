"""Small internal helpers: atomic file writes and CSV cell formatting."""

import os
import tempfile
from contextlib import contextmanager


@contextmanager
def atomic_write(path, newline=""):
    """Open a temporary file and rename it over `path` on success.

    A failed write leaves no partial file behind; the temporary is removed.
    """
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline=newline) as handle:
            yield handle
        os.replace(tmp_path, path)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise


def fmt_float(value) -> str:
    """Shortest round-trip decimal form; deterministic across runs."""
    return repr(float(value))
