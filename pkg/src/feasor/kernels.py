"""Backend selection for the segment projectors.

The compiled extension ``feasor._kernels`` is used when it imports;
otherwise, or when the environment variable ``FEASOR_PURE_PYTHON`` is set
to a non-empty value other than ``0``, the numpy fallback is used.  Both
backends return bit-identical results, so a solve follows the same
trajectory under either.
"""

from __future__ import annotations

import os

import numpy as np

from . import _fallback

__all__ = ["BACKEND", "SegmentLayout", "segment_sums", "segment_binary",
           "use_backend"]


def _load_compiled():
    if os.environ.get("FEASOR_PURE_PYTHON", "0") not in ("", "0"):
        return None
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()
BACKEND = "compiled" if _compiled is not None else "python"


class SegmentLayout:
    """Disjoint index segments of a flat vector.

    Parameters
    ----------
    segments : sequence of sequences of int
        Each segment lists positions in the order that defines "later
        position" for tie-breaking.
    """

    __slots__ = ("idx", "offsets", "groups", "lengths")

    def __init__(self, segments):
        segs = [np.asarray(s, dtype=np.intp) for s in segments]
        if any(s.size == 0 for s in segs):
            raise ValueError("empty segment")
        self.lengths = np.array([s.size for s in segs], dtype=np.intp)
        self.idx = (np.concatenate(segs) if segs
                    else np.empty(0, dtype=np.intp))
        if np.unique(self.idx).size != self.idx.size:
            raise ValueError("segments must be disjoint")
        self.offsets = np.zeros(len(segs) + 1, dtype=np.intp)
        np.cumsum(self.lengths, out=self.offsets[1:])
        by_len = {}
        for s in segs:
            by_len.setdefault(s.size, []).append(s)
        self.groups = [np.vstack(v) for _, v in sorted(by_len.items())]

    @property
    def n_segments(self) -> int:
        return int(self.lengths.size)

    def __len__(self):
        return self.n_segments


def segment_sums(x, layout: SegmentLayout, m: float, at_most: bool,
                 backend: str | None = None) -> np.ndarray:
    """Shift each segment equally onto ``sum = m`` (``sum <= m`` if `at_most`)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if (backend or BACKEND) == "compiled":
        return _compiled_module().segment_sums(x, layout.idx, layout.offsets,
                                               float(m), bool(at_most))
    return _fallback.segment_sums(x, layout.groups, float(m), bool(at_most))


def segment_binary(x, layout: SegmentLayout, m: int, at_most: bool,
                   backend: str | None = None) -> np.ndarray:
    """0/1 projection of each segment onto "exactly/at most m ones"."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if (backend or BACKEND) == "compiled":
        return _compiled_module().segment_binary(x, layout.idx, layout.offsets,
                                                 int(m), bool(at_most))
    return _fallback.segment_binary(x, layout.groups, int(m), bool(at_most))


def compiled_available() -> bool:
    return _try_import_compiled() is not None


def _compiled_module():
    mod = _compiled if _compiled is not None else _try_import_compiled()
    if mod is None:
        raise ImportError("compiled kernels are not built")
    return mod


def _try_import_compiled():
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


def use_backend(name: str) -> None:
    """Switch the process-wide backend (``"compiled"`` or ``"python"``)."""
    global BACKEND, _compiled
    if name == "compiled":
        mod = _try_import_compiled()
        if mod is None:
            raise ImportError("compiled kernels are not built")
        _compiled = mod
    elif name != "python":
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
