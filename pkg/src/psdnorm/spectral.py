"""Signal-processing substrate: Fourier basis, windows, segmentation,
Welch PSD estimation, circular convolution, and per-channel centering.

Conventions
-----------
Signals are real arrays of shape ``(c, l)`` (channels x samples).  PSDs are
strictly positive arrays of shape ``(c, f)``.  The Welch estimate is scaled so
that unit-variance white noise yields bins close to 1 for any filter size:
with a unit-norm window ``w`` the bin value is ``mean_l |DFT(w * seg_l)|^2``
using the unnormalized DFT.  All downstream mapping filters depend only on
PSD ratios, which are invariant to this global scale choice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (
    ChannelMismatchError,
    FilterLongerThanSignalError,
    LengthTooShortError,
    NonFiniteInputError,
    ParameterOutOfRangeError,
)

WINDOW_KINDS = ("hann", "boxcar")


def as_signal(x) -> np.ndarray:
    """Coerce to a float (c, l) array, accepting 1-D input as one channel."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[np.newaxis, :]
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ParameterOutOfRangeError(
            f"signal must be a (channels, length) array, got shape {x.shape}"
        )
    return x


def check_finite(x: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise NonFiniteInputError("input contains NaN or Inf")
    return x


@dataclass(frozen=True)
class WelchConfig:
    """Parameters of the Welch PSD estimator.

    ``filter_size`` is both the segment length and the number of frequency
    bins.  ``stride`` defaults to 50% overlap.  ``window_kind`` is ``hann``
    (periodic taper, renormalized to unit l2 norm) or ``boxcar``.
    """

    filter_size: int
    stride: int = 0  # 0 means "default": max(1, filter_size // 2)
    window_kind: str = "hann"

    def __post_init__(self):
        if self.filter_size < 1:
            raise ParameterOutOfRangeError("filter_size must be >= 1")
        if self.stride == 0:
            object.__setattr__(self, "stride", max(1, self.filter_size // 2))
        if not 1 <= self.stride <= self.filter_size:
            raise ParameterOutOfRangeError(
                f"stride must be in [1, {self.filter_size}], got {self.stride}"
            )
        if self.window_kind not in WINDOW_KINDS:
            raise ParameterOutOfRangeError(
                f"window_kind must be one of {WINDOW_KINDS}, got {self.window_kind!r}"
            )


def fourier_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix of size n: entry (l, l') = exp(-2i*pi*l*l'/n)/sqrt(n)."""
    if n < 1:
        raise ParameterOutOfRangeError("fourier_matrix requires n >= 1")
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


def make_window(kind: str, f: int) -> np.ndarray:
    """Unit-l2-norm window of length f.

    ``boxcar`` is the constant vector 1/sqrt(f).  ``hann`` is the periodic
    Hann taper 0.5*(1 - cos(2*pi*k/f)) renormalized; for f = 1 it degenerates
    to [1.0].
    """
    if f < 1:
        raise ParameterOutOfRangeError("window length must be >= 1")
    if kind == "boxcar":
        return np.full(f, 1.0 / np.sqrt(f))
    if kind == "hann":
        if f == 1:
            return np.array([1.0])
        taps = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(f) / f))
        return taps / np.linalg.norm(taps)
    raise ParameterOutOfRangeError(f"unknown window kind {kind!r}")


def segment(x, cfg: WelchConfig) -> list[np.ndarray]:
    """Split x into overlapping (c, f) segments; trailing samples are dropped.

    Segment k covers columns [k*stride, k*stride + f).  The number of
    segments is floor((l - f) / stride) + 1.
    """
    x = as_signal(x)
    f, stride = cfg.filter_size, cfg.stride
    if x.shape[1] < f:
        raise LengthTooShortError(
            f"signal length {x.shape[1]} < filter size {f}"
        )
    views = sliding_window_view(x, f, axis=1)[:, ::stride, :]
    return [np.array(views[:, k, :]) for k in range(views.shape[1])]


def psd_floor(p: np.ndarray) -> float:
    """Positivity floor applied to Welch estimates: 1e-10 * max(1, max(p))."""
    return 1e-10 * max(1.0, float(np.max(p)) if p.size else 1.0)


def welch_psd_raw(x, cfg: WelchConfig) -> np.ndarray:
    """Welch PSD without the positivity floor (may contain zeros)."""
    x = check_finite(as_signal(x))
    f, stride = cfg.filter_size, cfg.stride
    if x.shape[1] < f:
        raise LengthTooShortError(
            f"signal length {x.shape[1]} < filter size {f}"
        )
    w = make_window(cfg.window_kind, f)
    segs = sliding_window_view(x, f, axis=1)[:, ::stride, :]  # (c, L, f)
    spec = np.fft.fft(segs * w, axis=-1)
    return np.mean(np.abs(spec) ** 2, axis=1)


def welch_psd(x, cfg: WelchConfig) -> np.ndarray:
    """Welch PSD estimate, floor-clamped to be strictly positive.

    Returns a (c, f) array.  For real input the bins are conjugate
    symmetric: p[:, k] == p[:, f - k] for k >= 1 up to roundoff.
    """
    p = welch_psd_raw(x, cfg)
    return np.maximum(p, psd_floor(p))


def n_segments(length: int, cfg: WelchConfig) -> int:
    if length < cfg.filter_size:
        raise LengthTooShortError(
            f"signal length {length} < filter size {cfg.filter_size}"
        )
    return (length - cfg.filter_size) // cfg.stride + 1


def circular_convolve(x, h) -> np.ndarray:
    """Row-wise circular convolution of a (c, l) signal with a (c, f) filter.

    out[m, n] = sum_k h[m, k] * x[m, (n - k) mod l].  Implemented with
    length-l FFTs of the signal and the zero-padded filter.
    """
    x = as_signal(x)
    h = np.asarray(h, dtype=float)
    if h.ndim == 1:
        h = h[np.newaxis, :]
    if h.shape[0] != x.shape[0]:
        raise ChannelMismatchError(
            f"filter has {h.shape[0]} channels, signal has {x.shape[0]}"
        )
    c, l = x.shape
    f = h.shape[1]
    if f > l:
        raise FilterLongerThanSignalError(f"filter taps {f} > signal length {l}")
    h_pad = np.zeros((c, l))
    h_pad[:, :f] = h
    return np.fft.ifft(np.fft.fft(x, axis=1) * np.fft.fft(h_pad, axis=1), axis=1).real


def channel_mean(x) -> np.ndarray:
    """Per-channel temporal mean, shape (c,)."""
    return as_signal(x).mean(axis=1)


def center(x) -> np.ndarray:
    """Subtract the per-channel mean; each output row sums to ~0."""
    x = as_signal(x)
    return x - x.mean(axis=1, keepdims=True)
