"""Minimal float64 tensor network: forward pass and input-batch Jacobian.

Tensors are C-contiguous float64 numpy arrays.  A Network is instantiated
from a genotype plus an outer skeleton, its convolution weights drawn once
at construction and never updated; the only gradient ever computed is the
gradient of the total logit sum with respect to the input batch, via
hand-written reverse-mode rules for each layer (including the cross-sample
coupling introduced by batch-statistics normalization).

Layer protocol: ``forward(x, margins) -> (y, cache)`` and
``backward(cache, gy) -> gx``.  ``margins``, when given, collects the
minimum |preactivation| seen by each ReLU, used to detect near-kink inputs
before comparing against finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .cellspace import EDGES, ArchEncoding, OpKind
from .rng import RngStream

__all__ = [
    "SkeletonConfig",
    "Network",
    "JacobianBatch",
    "Cell",
    "build_network",
    "forward",
    "input_jacobian",
    "finite_diff_jacobian",
    "relu_kink_margin",
]


@dataclass(frozen=True)
class SkeletonConfig:
    """Outer network skeleton around the searched cell.

    Defaults are desk-scale (one Jacobian evaluation runs in milliseconds);
    benchmark-scale values (16 stem channels, 5 cells per stage, 32x32
    inputs) are plain field overrides.
    """

    input_channels: int = 3
    input_hw: int = 16
    stem_channels: int = 8
    cells_per_stage: int = 1
    num_stages: int = 3
    num_classes: int = 10
    bn_eps: float = 1e-5

    def __post_init__(self):
        counts = (
            self.input_channels,
            self.input_hw,
            self.stem_channels,
            self.cells_per_stage,
            self.num_stages,
            self.num_classes,
        )
        if any(c < 1 for c in counts):
            raise ValueError(f"all skeleton counts must be >= 1, got {self}")
        if self.input_hw % 2 ** (self.num_stages - 1) != 0:
            raise ValueError(
                f"input_hw={self.input_hw} must be divisible by "
                f"2**(num_stages-1)={2 ** (self.num_stages - 1)}"
            )

    @property
    def input_dim(self) -> int:
        return self.input_channels * self.input_hw * self.input_hw


@dataclass
class JacobianBatch:
    """N x D Jacobian of the total logit sum, one row per input sample."""

    J: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.J = np.asarray(self.J, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.J.ndim != 2:
            raise ValueError(f"J must be 2-D, got shape {self.J.shape}")
        if self.J.shape[0] < 2:
            raise ValueError("Jacobian batch needs at least 2 samples")
        if self.labels.shape != (self.J.shape[0],):
            raise ValueError(
                f"labels shape {self.labels.shape} does not match {self.J.shape[0]} rows"
            )


# ---------------------------------------------------------------------------
# convolution primitives


def _conv_forward(x, w, stride, pad):
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    kh, kw = w.shape[2:]
    win = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    return np.einsum("nchwij,ocij->nohw", win, w, optimize=True)


def _conv_backward_input(gy, w, x_shape, stride, pad):
    n, c, h, width = x_shape
    kh, kw = w.shape[2:]
    ho, wo = gy.shape[2:]
    gxp = np.zeros((n, c, h + 2 * pad, width + 2 * pad))
    # tap (i, j) of the kernel scatters gy onto a strided slice of the input
    g_all = np.tensordot(gy, w, axes=(1, 0))  # (n, ho, wo, c, kh, kw)
    for i in range(kh):
        for j in range(kw):
            gxp[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride] += (
                g_all[..., i, j].transpose(0, 3, 1, 2)
            )
    if pad:
        return gxp[:, :, pad : pad + h, pad : pad + width]
    return gxp


# ---------------------------------------------------------------------------
# layers


class _Conv:
    def __init__(self, weight, stride, pad):
        self.w = weight
        self.stride = stride
        self.pad = pad

    def forward(self, x, margins=None):
        return _conv_forward(x, self.w, self.stride, self.pad), x.shape

    def backward(self, cache, gy):
        return _conv_backward_input(gy, self.w, cache, self.stride, self.pad)


class _BatchNorm:
    """Batch-statistics normalization: no affine, no running stats."""

    def __init__(self, eps):
        self.eps = eps

    def forward(self, x, margins=None):
        mu = x.mean(axis=(0, 2, 3), keepdims=True)
        var = x.var(axis=(0, 2, 3), keepdims=True)
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mu) * inv
        return xhat, (xhat, inv)

    def backward(self, cache, gy):
        xhat, inv = cache
        m1 = gy.mean(axis=(0, 2, 3), keepdims=True)
        m2 = (gy * xhat).mean(axis=(0, 2, 3), keepdims=True)
        return inv * (gy - m1 - xhat * m2)


class _ReLU:
    def forward(self, x, margins=None):
        if margins is not None:
            margins.append(float(np.min(np.abs(x))))
        mask = x > 0
        return np.where(mask, x, 0.0), mask

    def backward(self, cache, gy):
        return np.where(cache, gy, 0.0)


class _AvgPool3x3:
    """3x3 average pooling, stride 1, pad 1, always dividing by 9."""

    def forward(self, x, margins=None):
        xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
        win = sliding_window_view(xp, (3, 3), axis=(2, 3))
        return win.mean(axis=(4, 5)), x.shape

    def backward(self, cache, gy):
        n, c, h, w = cache
        gxp = np.zeros((n, c, h + 2, w + 2))
        for i in range(3):
            for j in range(3):
                gxp[:, :, i : i + h, j : j + w] += gy
        return gxp[:, :, 1 : 1 + h, 1 : 1 + w] / 9.0


class _Zero:
    def forward(self, x, margins=None):
        return np.zeros_like(x), None

    def backward(self, cache, gy):
        return np.zeros_like(gy)


class _Identity:
    def forward(self, x, margins=None):
        return x, None

    def backward(self, cache, gy):
        return gy


class _Chain:
    """Sequential composition of layers sharing the layer protocol."""

    def __init__(self, layers):
        self.layers = layers

    def forward(self, x, margins=None):
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x, margins)
            caches.append(cache)
        return x, caches

    def backward(self, caches, gy):
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            gy = layer.backward(cache, gy)
        return gy


class _GlobalAvgPool:
    def forward(self, x, margins=None):
        return x.mean(axis=(2, 3)), x.shape

    def backward(self, cache, gy):
        n, c, h, w = cache
        return np.broadcast_to(gy[:, :, None, None], (n, c, h, w)) / (h * w)


class _Linear:
    def __init__(self, weight):
        self.w = weight  # (num_classes, channels)

    def forward(self, x, margins=None):
        return x @ self.w.T, None

    def backward(self, cache, gy):
        return gy @ self.w


class Cell:
    """DAG of 6 edge operations over 4 nodes; node j sums its incoming edges."""

    def __init__(self, edge_modules):
        self.ops = list(edge_modules)

    def forward(self, x, margins=None):
        nodes = [x, None, None, None]
        caches = []
        for k, (src, dest) in enumerate(EDGES):
            y, cache = self.ops[k].forward(nodes[src], margins)
            caches.append(cache)
            nodes[dest] = y if nodes[dest] is None else nodes[dest] + y
        return nodes[3], caches

    def backward(self, caches, gy):
        gnodes = [None, None, None, gy]
        # EDGES is topologically sorted by (dest, src): reversed order has
        # every node's outgoing gradients complete before it propagates.
        for k in reversed(range(len(EDGES))):
            src, dest = EDGES[k]
            g = self.ops[k].backward(caches[k], gnodes[dest])
            gnodes[src] = g if gnodes[src] is None else gnodes[src] + g
        return gnodes[0]


def _he_conv(rng, c_out, c_in, k):
    std = math.sqrt(2.0 / (c_in * k * k))
    return rng.normal(0.0, std, size=(c_out, c_in, k, k))


def _edge_module(op: OpKind, channels: int, eps: float, rng: RngStream):
    if op == OpKind.ZEROIZE:
        return _Zero()
    if op == OpKind.SKIP_CONNECT:
        return _Identity()
    if op == OpKind.AVGPOOL3X3:
        return _AvgPool3x3()
    k = 1 if op == OpKind.CONV1X1 else 3
    conv = _Conv(_he_conv(rng, channels, channels, k), stride=1, pad=(k - 1) // 2)
    return _Chain([_ReLU(), conv, _BatchNorm(eps)])


@dataclass
class Network:
    """Immutable stack of blocks built from (arch, cfg, init stream)."""

    arch: ArchEncoding
    cfg: SkeletonConfig
    blocks: list = field(repr=False)

    def _check_batch(self, batch: np.ndarray) -> np.ndarray:
        batch = np.asarray(batch, dtype=np.float64)
        expected = (self.cfg.input_channels, self.cfg.input_hw, self.cfg.input_hw)
        if batch.ndim != 4 or batch.shape[1:] != expected:
            raise ValueError(f"batch shape {batch.shape} incompatible with (N, {expected})")
        if batch.shape[0] < 2:
            raise ValueError("batch-statistics normalization needs N >= 2")
        return batch

    def _run(self, x, tape=None, margins=None):
        for block in self.blocks:
            x, cache = block.forward(x, margins)
            if tape is not None:
                tape.append(cache)
        return x

    def _backprop(self, tape, gy):
        for block, cache in zip(reversed(self.blocks), reversed(tape)):
            gy = block.backward(cache, gy)
        return gy


def build_network(arch: ArchEncoding, cfg: SkeletonConfig, rng: RngStream) -> Network:
    """Instantiate the skeleton with `arch` in every cell slot.

    Layout: stem (3x3 conv + batch norm), `num_stages` stages of
    `cells_per_stage` cells, a reduction block (ReLU, stride-2 3x3 conv
    doubling channels, batch norm) between stages, then ReLU, global average
    pooling and a dense classifier.  Weights are zero-mean normal with
    std sqrt(2 / fan_in), no biases.
    """
    eps = cfg.bn_eps
    blocks: list = []
    channels = cfg.stem_channels
    stem_conv = _Conv(_he_conv(rng, channels, cfg.input_channels, 3), stride=1, pad=1)
    blocks.append(_Chain([stem_conv, _BatchNorm(eps)]))
    for stage in range(cfg.num_stages):
        for _ in range(cfg.cells_per_stage):
            blocks.append(
                Cell([_edge_module(op, channels, eps, rng) for op in arch.edge_ops])
            )
        if stage < cfg.num_stages - 1:
            red_conv = _Conv(_he_conv(rng, 2 * channels, channels, 3), stride=2, pad=1)
            blocks.append(_Chain([_ReLU(), red_conv, _BatchNorm(eps)]))
            channels *= 2
    std = math.sqrt(2.0 / channels)
    classifier = _Linear(rng.normal(0.0, std, size=(cfg.num_classes, channels)))
    blocks.append(_Chain([_ReLU(), _GlobalAvgPool(), classifier]))
    return Network(arch=arch, cfg=cfg, blocks=blocks)


def forward(net: Network, batch: np.ndarray) -> np.ndarray:
    """Logits (N, num_classes); batch statistics come from `batch` itself."""
    return net._run(net._check_batch(batch))


def input_jacobian(net: Network, batch: np.ndarray, labels) -> JacobianBatch:
    """Row i is d(total logit sum)/d(sample i), flattened to length D.

    The total sum runs over all samples and classes, so each row includes
    the coupling through batch statistics.  Non-finite values are passed
    through for the consumer to detect.
    """
    batch = net._check_batch(batch)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (batch.shape[0],):
        raise ValueError(f"labels shape {labels.shape} does not match batch of {batch.shape[0]}")
    if labels.size and (labels.min() < 0 or labels.max() >= net.cfg.num_classes):
        raise ValueError("labels must lie in [0, num_classes)")
    tape: list = []
    logits = net._run(batch, tape=tape)
    gx = net._backprop(tape, np.ones_like(logits))
    return JacobianBatch(J=gx.reshape(batch.shape[0], -1), labels=labels)


def finite_diff_jacobian(net: Network, batch: np.ndarray, step: float) -> np.ndarray:
    """Central-difference estimate of the same N x D matrix, entry by entry."""
    if step <= 0:
        raise ValueError("step must be positive")
    batch = net._check_batch(batch)
    n = batch.shape[0]
    flat = batch.reshape(n, -1)
    out = np.empty_like(flat)
    work = flat.copy()
    for i in range(n):
        for d in range(flat.shape[1]):
            orig = work[i, d]
            work[i, d] = orig + step
            s_plus = net._run(work.reshape(batch.shape)).sum()
            work[i, d] = orig - step
            s_minus = net._run(work.reshape(batch.shape)).sum()
            work[i, d] = orig
            out[i, d] = (s_plus - s_minus) / (2.0 * step)
    return out


def relu_kink_margin(net: Network, batch: np.ndarray, positive_only: bool = False) -> float:
    """Smallest |preactivation| reaching any ReLU; guards finite-difference checks.

    `positive_only` skips exact zeros: genotypes with zeroized node paths
    feed constant-zero activations into some ReLUs no matter the batch, and
    those kinks never move under input perturbation, so they cannot disturb
    a finite-difference comparison.
    """
    margins: list = []
    net._run(net._check_batch(batch), margins=margins)
    if positive_only:
        margins = [m for m in margins if m > 0.0]
    return min(margins) if margins else math.inf
