"""Hot inner loops, each in a numba and a pure-numpy flavour.

``one_pole`` and ``vote_activity`` resolve to the numba implementation when
numba is importable and the environment variable ``EVACOUSTIC_DISABLE_NUMBA``
is unset or ``"0"``; otherwise they resolve to the numpy implementation.
``fir_valid``, ``block_mean_square`` and ``true_runs`` use numpy under both
backends because it measured faster (see benchmarks/bench_kernels.py). Both
flavours are always importable under their ``_nb`` / ``_np`` suffixed names
so tests and the benchmark can compare them.
"""
from __future__ import annotations

import os

import numpy as np
from scipy import signal

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("EVACOUSTIC_DISABLE_NUMBA", "0") in ("", "0")


def _jit(func):
    if not HAS_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


# ---------------------------------------------------------------------------
# segment power: mean of squares over consecutive non-overlapping blocks


def _block_mean_square_np(x: np.ndarray, n: int) -> np.ndarray:
    n_blocks = x.shape[0] // n
    blocks = x[: n_blocks * n].reshape(n_blocks, n)
    return np.einsum("ij,ij->i", blocks, blocks) / n


@_jit
def _block_mean_square_nb(x, n):
    n_blocks = x.shape[0] // n
    out = np.empty(n_blocks)
    for b in range(n_blocks):
        acc = 0.0
        base = b * n
        for i in range(n):
            v = x[base + i]
            acc += v * v
        out[b] = acc / n
    return out


# ---------------------------------------------------------------------------
# FIR filtering, "valid" part of the linear convolution.
# Overlap-add FFT convolution beats the direct-form loop by ~25x at 513 taps
# even under numba (see benchmarks/), so both backends use it. The direct
# form is kept for the benchmark and as a cross-check in the tests.

_FIR_BLOCK = 4096


def _fir_valid_np(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    return signal.oaconvolve(x, h, mode="valid")


@_jit
def _fir_direct_nb(x, h):
    n_taps = h.shape[0]
    n_out = x.shape[0] - n_taps + 1
    out = np.zeros(n_out)
    hr = h[::-1].copy()
    # blocked so the accumulator stays in cache while taps stream past
    for start in range(0, n_out, _FIR_BLOCK):
        stop = min(start + _FIR_BLOCK, n_out)
        for k in range(n_taps):
            c = hr[k]
            if c == 0.0:
                continue
            for j in range(start, stop):
                out[j] += c * x[j + k]
    return out


# ---------------------------------------------------------------------------
# recursive one-pole low-pass y[n] = a*y[n-1] + (1-a)*x[n]


def _one_pole_np(x: np.ndarray, a: float) -> np.ndarray:
    return signal.lfilter([1.0 - a], [1.0, -a], x)


@_jit
def _one_pole_nb(x, a):
    out = np.empty_like(x)
    y = 0.0
    g = 1.0 - a
    for i in range(x.shape[0]):
        y = a * y + g * x[i]
        out[i] = y
    return out


# ---------------------------------------------------------------------------
# k-of-W sliding vote: segment i is active iff some W-long window that
# contains it holds >= k true decisions. Windows are clipped to the sequence,
# which only matters when the sequence is shorter than W.


def _vote_activity_np(decisions: np.ndarray, k: int, w: int) -> np.ndarray:
    n = decisions.shape[0]
    d = decisions.astype(np.int64)
    if n <= w:
        return np.full(n, d.sum() >= k)
    csum = np.concatenate(([0], np.cumsum(d)))
    counts = csum[w:] - csum[:-w]  # counts[s] = trues in [s, s + w)
    good = np.concatenate(([0], np.cumsum(counts >= k)))
    idx = np.arange(n)
    hi = np.minimum(idx, n - w)
    lo = np.maximum(idx - w + 1, 0)
    valid = lo <= hi
    active = np.zeros(n, dtype=bool)
    active[valid] = good[hi[valid] + 1] - good[lo[valid]] > 0
    return active


@_jit
def _vote_activity_nb(decisions, k, w):
    n = decisions.shape[0]
    active = np.zeros(n, dtype=np.bool_)
    if n <= w:
        total = 0
        for i in range(n):
            total += decisions[i]
        if total >= k:
            active[:] = True
        return active
    count = 0
    for i in range(w):
        count += decisions[i]
    covered_to = -1
    for s in range(n - w + 1):
        if s > 0:
            count += decisions[s + w - 1]
            count -= decisions[s - 1]
        if count >= k:
            for i in range(max(s, covered_to + 1), s + w):
                active[i] = True
            covered_to = s + w - 1
    return active


# ---------------------------------------------------------------------------
# maximal runs of True in a boolean mask -> (first index, last index) pairs


def _true_runs_np(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    padded = np.concatenate(([False], mask.astype(bool), [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return edges[0::2], edges[1::2] - 1


@_jit
def _true_runs_nb(mask):
    n = mask.shape[0]
    starts = np.empty(n, dtype=np.int64)
    ends = np.empty(n, dtype=np.int64)
    m = 0
    inside = False
    for i in range(n):
        if mask[i] and not inside:
            starts[m] = i
            inside = True
        elif not mask[i] and inside:
            ends[m] = i - 1
            m += 1
            inside = False
    if inside:
        ends[m] = n - 1
        m += 1
    return starts[:m], ends[:m]


# einsum and flatnonzero already run at memory speed, and the FFT FIR wins by
# far, so these three stay on numpy whichever backend is selected.
fir_valid = _fir_valid_np
block_mean_square = _block_mean_square_np
true_runs = _true_runs_np

if USE_NUMBA:
    one_pole = _one_pole_nb
    vote_activity = _vote_activity_nb
else:
    one_pole = _one_pole_np
    vote_activity = _vote_activity_np


def backend() -> str:
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"
