"""Hand-crafted trend/peak convolution kernels and the feature-bank transform.

Trend kernels alternate +-1 taps so strictly monotone windows drive the
raw output strictly positive (increasing kind) or strictly negative,
while constant windows cancel to zero.  The peak kernel is a three-part
parabola template; only the 12-tap instance is prescribed, longer ones
sample it by nearest index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import TimeSeries

__all__ = ["Kernel", "make_filter", "convolve1d", "handcrafted_bank", "PEAK_TEMPLATE_12"]

PEAK_TEMPLATE_12 = np.array(
    [-0.25, -1.0, -1.0, -0.25, 0.5, 2.0, 2.0, 0.5, -0.25, -1.0, -1.0, -0.25]
)

_KINDS = ("increasing", "decreasing", "peak", "custom")


@dataclass(frozen=True)
class Kernel:
    taps: np.ndarray
    dilation: int = 1
    kind: str = "custom"

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim != 1 or taps.size < 1:
            raise ValueError("kernel taps must be a nonempty 1-D array")
        if self.dilation < 1:
            raise ValueError("dilation must be a positive integer")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        taps.flags.writeable = False
        object.__setattr__(self, "taps", taps)

    def __len__(self) -> int:
        return len(self.taps)


def make_filter(kind: str, length: int, dilation: int = 1) -> Kernel:
    """Build a trend or peak kernel of the requested length.

    Trend kernels need an even length; the peak kernel a multiple of 4.
    The 12-tap peak kernel reproduces the reference template exactly.
    """
    if kind in ("increasing", "decreasing"):
        if length < 2 or length % 2 != 0:
            raise ValueError(f"{kind} filter length must be even and >= 2, got {length}")
        k = np.arange(1, length + 1)
        taps = (-1.0) ** k if kind == "increasing" else (-1.0) ** (k + 1)
        return Kernel(taps, dilation, kind)
    if kind == "peak":
        if length < 4 or length % 4 != 0:
            raise ValueError(f"peak filter length must be a positive multiple of 4, got {length}")
        idx = (np.arange(length) * len(PEAK_TEMPLATE_12)) // length
        return Kernel(PEAK_TEMPLATE_12[idx], dilation, "peak")
    raise ValueError(f"unknown filter kind {kind!r}")


def _univariate(x) -> np.ndarray:
    ts = x if isinstance(x, TimeSeries) else TimeSeries(x)
    if ts.channels != 1:
        raise ValueError("convolution filters operate on univariate series")
    return ts.values[:, 0]


def convolve1d(x, kernel: Kernel) -> TimeSeries:
    """Valid (no padding) 1-D convolution with stride 1 and dilation d.

    Output value t is sum_k x[t + (k-1)*d] * w[k]; output length is
    L - (K-1)*d.
    """
    values = _univariate(x)
    K, d = len(kernel), kernel.dilation
    out_len = len(values) - (K - 1) * d
    if out_len < 1:
        raise ValueError(
            f"series of length {len(values)} too short for kernel K={K} at dilation {d}"
        )
    windows = np.stack([values[k * d : k * d + out_len] for k in range(K)], axis=1)
    return TimeSeries(windows @ kernel.taps)


def handcrafted_bank(x, lengths, dilation: int = 1) -> tuple[TimeSeries, list[tuple[str, int]]]:
    """Apply all three kernel kinds at each length, rectify, and stack.

    Peak lengths are rounded up to the next multiple of 4.  Valid
    convolutions of different lengths start at the same timestamp, so the
    longer outputs are truncated to the shortest one and stacked as
    channels; the returned metadata lists (kind, K) per channel.
    """
    values = _univariate(x)
    lengths = list(lengths)
    if not lengths:
        raise ValueError("need at least one kernel length")
    kernels = []
    for K in lengths:
        kernels.append(make_filter("increasing", K, dilation))
        kernels.append(make_filter("decreasing", K, dilation))
        kernels.append(make_filter("peak", K + (-K) % 4, dilation))
    out_len = len(values) - (max(len(k) for k in kernels) - 1) * dilation
    if out_len < 1:
        raise ValueError("series shorter than the largest kernel in the bank")
    channels = []
    meta = []
    for kern in kernels:
        o = convolve1d(TimeSeries(values), kern).values[:out_len, 0]
        channels.append(np.maximum(o, 0.0))
        meta.append((kern.kind, len(kern)))
    return TimeSeries(np.stack(channels, axis=1)), meta
