"""Bilinear resampling: compiled hot loop with a vectorized numpy twin.

The scalar loop below is compiled on first use; setting the environment
variable ``CXRBOARD_NO_NUMBA=1`` (or running without the compiler
installed) selects the numpy implementation instead.  Both paths use an
identical expression tree per output pixel, default IEEE semantics, no
fused ops, so their outputs are bitwise equal.  Sampling is
align-corners: output corner pixels land exactly on source corner
pixels, and a 1-wide output axis samples the source center.
"""

from __future__ import annotations

import math
import os

import numpy as np

ENV_DISABLE = "CXRBOARD_NO_NUMBA"


def _bilinear_loop(src, out_h, out_w):  # pragma: no cover - compiled
    sh, sw = src.shape
    out = np.empty((out_h, out_w), dtype=np.float64)
    y_hi = sh - 2 if sh >= 2 else 0
    x_hi = sw - 2 if sw >= 2 else 0
    for i in range(out_h):
        if out_h == 1:
            y = (sh - 1) / 2.0
        else:
            y = (i * (sh - 1)) / (out_h - 1)
        y0 = int(math.floor(y))
        if y0 < 0:
            y0 = 0
        if y0 > y_hi:
            y0 = y_hi
        y1 = y0 + 1
        if y1 > sh - 1:
            y1 = sh - 1
        fy = y - y0
        for j in range(out_w):
            if out_w == 1:
                x = (sw - 1) / 2.0
            else:
                x = (j * (sw - 1)) / (out_w - 1)
            x0 = int(math.floor(x))
            if x0 < 0:
                x0 = 0
            if x0 > x_hi:
                x0 = x_hi
            x1 = x0 + 1
            if x1 > sw - 1:
                x1 = sw - 1
            fx = x - x0
            top = src[y0, x0] * (1.0 - fx) + src[y0, x1] * fx
            bot = src[y1, x0] * (1.0 - fx) + src[y1, x1] * fx
            out[i, j] = top * (1.0 - fy) + bot * fy
    return out


def _coords(src_len: int, out_len: int) -> np.ndarray:
    if out_len == 1:
        return np.asarray([(src_len - 1) / 2.0], dtype=np.float64)
    # exact integer numerator, one rounding at the division
    return (np.arange(out_len, dtype=np.int64) * (src_len - 1)) / (out_len - 1)


def _bilinear_numpy(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    sh, sw = src.shape
    ys = _coords(sh, out_h)
    xs = _coords(sw, out_w)
    y0 = np.clip(np.floor(ys).astype(np.int64), 0, sh - 2 if sh >= 2 else 0)
    x0 = np.clip(np.floor(xs).astype(np.int64), 0, sw - 2 if sw >= 2 else 0)
    y1 = np.minimum(y0 + 1, sh - 1)
    x1 = np.minimum(x0 + 1, sw - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    s00 = src[np.ix_(y0, x0)]
    s01 = src[np.ix_(y0, x1)]
    s10 = src[np.ix_(y1, x0)]
    s11 = src[np.ix_(y1, x1)]
    top = s00 * (1.0 - fx) + s01 * fx
    bot = s10 * (1.0 - fx) + s11 * fx
    return top * (1.0 - fy) + bot * fy


_compiled = None


def _get_compiled():
    global _compiled
    if _compiled is None:
        from numba import njit

        _compiled = njit(cache=True, nogil=True)(_bilinear_loop)
    return _compiled


def numba_disabled() -> bool:
    return os.environ.get(ENV_DISABLE, "") not in ("", "0")


def resample_bilinear(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resample a 2D buffer to (out_h, out_w); returns float64."""
    if out_h <= 0 or out_w <= 0:
        raise ValueError(f"output dims {out_h}x{out_w}")
    if src.ndim != 2 or src.size == 0:
        raise ValueError(f"source shape {src.shape}")
    srcf = np.ascontiguousarray(src, dtype=np.float64)
    if not numba_disabled():
        try:
            return _get_compiled()(srcf, out_h, out_w)
        except ImportError:
            pass
    return _bilinear_numpy(srcf, out_h, out_w)
