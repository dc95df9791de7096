"""Stateful normalization layers over batches of multichannel signals.

A batch is an array of shape (N, c, l).  Forward passes are functional:
layers are frozen dataclasses and train-mode calls return an updated copy
alongside the normalized batch.  Eval-mode calls are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    EmptyInputError,
    EvalWithoutBarycenterError,
    EvalWithoutStatsError,
    ParameterOutOfRangeError,
    ShapeMismatchError,
)
from .geometry import BarycenterState, running_update, wasserstein_barycenter
from .monge import apply_mapping, monge_filter
from .spectral import WelchConfig, welch_psd

MODES = ("train", "eval")


def as_batch(batch) -> np.ndarray:
    """Coerce to a float (N, c, l) array; a single (c, l) signal becomes N=1."""
    b = np.asarray(batch, dtype=float)
    if b.ndim == 2:
        b = b[np.newaxis]
    if b.ndim != 3 or b.shape[0] < 1:
        raise ShapeMismatchError(
            f"batch must have shape (N, channels, length), got {b.shape}"
        )
    return b


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ParameterOutOfRangeError(f"mode must be one of {MODES}, got {mode!r}")


# ---------------------------------------------------------------------------
# PSD normalization layer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PsdNormLayer:
    """Layer aligning each sample's PSD to a running Bures barycenter.

    ``filter_size`` is the number of mapping-filter taps and PSD bins
    (default 5).  ``momentum`` is the geodesic step of the running barycenter
    update (default 1e-2).  In train mode each forward pass updates the
    running barycenter once from the batch barycenter, then maps every
    centered sample toward the updated value; eval mode maps toward the
    stored value without updating it.
    """

    filter_size: int = 5
    momentum: float = 1e-2
    welch: WelchConfig | None = None
    barycenter: BarycenterState | None = None
    mode: str = "train"

    def __post_init__(self):
        if self.filter_size < 1:
            raise ParameterOutOfRangeError("filter_size must be >= 1")
        _check_mode(self.mode)
        if self.welch is None:
            object.__setattr__(self, "welch", WelchConfig(self.filter_size))
        if self.welch.filter_size != self.filter_size:
            raise ShapeMismatchError(
                "welch.filter_size must equal the layer filter_size"
            )
        if self.barycenter is None:
            object.__setattr__(
                self, "barycenter", BarycenterState(momentum=self.momentum)
            )

    def train(self) -> "PsdNormLayer":
        return replace(self, mode="train")

    def eval(self) -> "PsdNormLayer":
        return replace(self, mode="eval")

    def with_barycenter(self, value) -> "PsdNormLayer":
        """Force the running barycenter (e.g. all-ones for whitening)."""
        state = BarycenterState(
            momentum=self.momentum,
            value=np.asarray(value, dtype=float),
            update_count=max(1, self.barycenter.update_count),
        )
        return replace(self, barycenter=state)


def psdnorm_forward(layer: PsdNormLayer, batch):
    """One forward pass; returns (normalized batch, updated layer)."""
    b = as_batch(batch)
    if layer.mode == "eval" and layer.barycenter.is_empty:
        raise EvalWithoutBarycenterError(
            "eval-mode forward requires an accumulated barycenter"
        )

    means = b.mean(axis=2, keepdims=True)  # (N, c, 1)
    centered = b - means
    psds = [welch_psd(g, layer.welch) for g in centered]

    state = layer.barycenter
    if layer.mode == "train":
        batch_bary = wasserstein_barycenter(psds)
        state = running_update(state, batch_bary)
    target = state.value

    out = np.empty_like(b)
    for j, g in enumerate(centered):
        filt = monge_filter(psds[j], target)
        out[j] = apply_mapping(b[j], filt, means[j, :, 0])
    return out, replace(layer, barycenter=state)


def halved_filter_sizes(f: int, n_layers: int) -> list[int]:
    """Filter-size schedule for a layer stack: floor-halved, minimum 1."""
    sizes = []
    for _ in range(n_layers):
        sizes.append(max(1, f))
        f = f // 2
    return sizes


def psdnorm_stack_forward(fs, batch, momentum: float = 1e-2,
                          window_kind: str = "hann", mode: str = "train",
                          layers=None):
    """Sequential forward through a stack of PSD normalization layers.

    ``fs`` must be a non-increasing list of filter sizes (e.g. the
    floor-halving schedule 5 -> 2 -> 1).  Existing layers may be passed to
    continue training or to run in eval mode.  Returns
    (normalized batch, updated layers, per-stage barycenter snapshots).
    """
    fs = [int(f) for f in fs]
    if not fs:
        raise EmptyInputError("stack needs at least one filter size")
    if any(f < 1 for f in fs):
        raise ParameterOutOfRangeError("filter sizes must be >= 1")
    if any(a < b for a, b in zip(fs, fs[1:])):
        raise ParameterOutOfRangeError("filter sizes must be non-increasing")
    if layers is None:
        layers = [
            PsdNormLayer(
                filter_size=f,
                momentum=momentum,
                welch=WelchConfig(f, window_kind=window_kind),
                mode=mode,
            )
            for f in fs
        ]
    out = as_batch(batch)
    new_layers, snapshots = [], []
    for layer in layers:
        out, layer = psdnorm_forward(replace(layer, mode=mode), out)
        new_layers.append(layer)
        value = layer.barycenter.value
        snapshots.append(None if value is None else value.copy())
    return out, new_layers, snapshots


# ---------------------------------------------------------------------------
# Temporal Monge alignment preprocessor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TmaAligner:
    """Fixed-barycenter preprocessor: maps any signal's PSD onto the
    barycenter of a reference corpus."""

    barycenter: np.ndarray
    welch: WelchConfig


def tma_fit(domains, welch: WelchConfig) -> TmaAligner:
    """Estimate every signal's PSD across all domains and store their
    barycenter as the alignment target."""
    psds = []
    for batch in domains:
        b = as_batch(batch)
        for g in b:
            psds.append(welch_psd(g - g.mean(axis=1, keepdims=True), welch))
    if not psds:
        raise EmptyInputError("tma_fit needs at least one signal")
    return TmaAligner(barycenter=wasserstein_barycenter(psds), welch=welch)


def tma_transform(aligner: TmaAligner, x) -> np.ndarray:
    """Center x and apply the Monge mapping from its own PSD to the stored
    barycenter."""
    x = np.asarray(x, dtype=float)
    mean = x.mean(axis=-1)
    p_src = welch_psd(x - x.mean(axis=-1, keepdims=True), aligner.welch)
    filt = monge_filter(p_src, aligner.barycenter)
    return apply_mapping(x, filt, mean)


# ---------------------------------------------------------------------------
# Baseline normalizers
# ---------------------------------------------------------------------------

def instancenorm_forward(batch, eps: float = 1e-5) -> np.ndarray:
    """Per-sample, per-channel standardization with biased variance."""
    b = as_batch(batch)
    mu = b.mean(axis=2, keepdims=True)
    var = b.var(axis=2, keepdims=True)
    return (b - mu) / np.sqrt(var + eps)


def layernorm_forward(batch, eps: float = 1e-5) -> np.ndarray:
    """Per-sample standardization over all channels and time steps."""
    b = as_batch(batch)
    mu = b.mean(axis=(1, 2), keepdims=True)
    var = b.var(axis=(1, 2), keepdims=True)
    return (b - mu) / np.sqrt(var + eps)


@dataclass(frozen=True)
class BatchNormLayer:
    """Channel-wise batch normalization with fixed affine parameters.

    Statistics are pooled over batch and time per channel, with biased
    variance.  Running statistics follow the exponential moving average
    new = (1 - m) * old + m * batch with ``stat_momentum`` m, starting from
    mean 0 / variance 1.  ``gamma`` and ``beta`` default to 1 and 0 and are
    never trained here.
    """

    gamma: np.ndarray | float = 1.0
    beta: np.ndarray | float = 0.0
    eps: float = 1e-5
    stat_momentum: float = 0.1
    running_mean: np.ndarray | None = None
    running_var: np.ndarray | None = None
    num_batches_tracked: int = 0
    mode: str = "train"

    def __post_init__(self):
        if self.eps <= 0:
            raise ParameterOutOfRangeError("eps must be > 0")
        if not 0.0 <= self.stat_momentum <= 1.0:
            raise ParameterOutOfRangeError("stat_momentum must be in [0, 1]")
        _check_mode(self.mode)

    def train(self) -> "BatchNormLayer":
        return replace(self, mode="train")

    def eval(self) -> "BatchNormLayer":
        return replace(self, mode="eval")


def batchnorm_forward(layer: BatchNormLayer, batch):
    """One forward pass; returns (normalized batch, updated layer)."""
    b = as_batch(batch)
    n, c, l = b.shape
    gamma = np.broadcast_to(np.asarray(layer.gamma, dtype=float), (c,))
    beta = np.broadcast_to(np.asarray(layer.beta, dtype=float), (c,))

    if layer.mode == "train":
        if n * l < 2:
            raise ParameterOutOfRangeError(
                "train-mode batchnorm needs at least 2 pooled samples"
            )
        mu = b.mean(axis=(0, 2))
        var = b.var(axis=(0, 2))
        m = layer.stat_momentum
        r_mean = layer.running_mean if layer.running_mean is not None else np.zeros(c)
        r_var = layer.running_var if layer.running_var is not None else np.ones(c)
        layer = replace(
            layer,
            running_mean=(1.0 - m) * r_mean + m * mu,
            running_var=(1.0 - m) * r_var + m * var,
            num_batches_tracked=layer.num_batches_tracked + 1,
        )
    else:
        if layer.num_batches_tracked == 0:
            raise EvalWithoutStatsError(
                "eval-mode batchnorm requires trained running statistics"
            )
        mu = layer.running_mean
        var = layer.running_var

    out = gamma[:, None] * (b - mu[None, :, None]) / np.sqrt(
        var[None, :, None] + layer.eps
    ) + beta[:, None]
    return out, layer
