"""Periodized filter-bank analysis and synthesis on the torus.

Detail coefficients are sup-normalized: c[(i, j, k)] is 2**(j d / 2) times
the orthonormal (L2) pyramid output, which for piecewise-constant inputs and
the Haar family agrees exactly with 2**(j d) * integral(f * psi(2**j x - k)).
The single level-0 scaling coefficient is the mean of the signal.
"""

from __future__ import annotations

import numpy as np

from .fields import CoefficientField, SampledSignal
from .wavelets import WaveletFamily

__all__ = ["forward_transform", "inverse_transform"]


def _correlate_down(x: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    """out[m] = sum_n taps[n] x[(2m + n) mod len] along the given axis."""
    acc = taps[0] * x
    for n in range(1, taps.size):
        acc = acc + taps[n] * np.roll(x, -n, axis=axis)
    return acc[(slice(None),) * axis + (slice(None, None, 2),)]


def _upsample_conv(x: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    """Zero-stuff along axis then circularly convolve with the taps."""
    shape = list(x.shape)
    shape[axis] *= 2
    up = np.zeros(shape, dtype=x.dtype)
    up[(slice(None),) * axis + (slice(None, None, 2),)] = x
    acc = taps[0] * up
    for n in range(1, taps.size):
        acc = acc + taps[n] * np.roll(up, n, axis=axis)
    return acc


def _split_level(a: np.ndarray, family: WaveletFamily, d: int) -> tuple[np.ndarray, np.ndarray]:
    """One analysis level; returns (approx, details stacked by orientation).

    Orientations in dimension 2: 1 = oscillation along axis 0 only,
    2 = along axis 1 only, 3 = along both.
    """
    lo, hi = family.dec_lo, family.dec_hi
    if d == 1:
        return _correlate_down(a, lo, 0), _correlate_down(a, hi, 0)[None, :]
    l0 = _correlate_down(a, lo, 0)
    h0 = _correlate_down(a, hi, 0)
    ll = _correlate_down(l0, lo, 1)
    lh = _correlate_down(l0, hi, 1)
    hl = _correlate_down(h0, lo, 1)
    hh = _correlate_down(h0, hi, 1)
    return ll, np.stack([hl, lh, hh])


def _merge_level(a: np.ndarray, det: np.ndarray, family: WaveletFamily, d: int) -> np.ndarray:
    lo, hi = family.dec_lo, family.dec_hi
    if d == 1:
        return _upsample_conv(a, lo, 0) + _upsample_conv(det[0], hi, 0)
    hl, lh, hh = det
    l0 = _upsample_conv(a, lo, 1) + _upsample_conv(lh, hi, 1)
    h0 = _upsample_conv(hl, lo, 1) + _upsample_conv(hh, hi, 1)
    return _upsample_conv(l0, lo, 0) + _upsample_conv(h0, hi, 0)


def forward_transform(
    signal: SampledSignal, family: WaveletFamily, Jmax: int | None = None
) -> CoefficientField:
    """Full pyramid decomposition, keeping detail scales j < Jmax.

    Jmax defaults to the signal's grid scale; a larger value cannot be
    resolved from the samples and is rejected.
    """
    if Jmax is None:
        Jmax = signal.J
    if Jmax > signal.J:
        raise ValueError(f"Jmax={Jmax} exceeds grid resolution J={signal.J}")
    if Jmax < 0:
        raise ValueError("Jmax must be nonnegative")
    d = signal.d
    a = signal.values.astype(complex) * 2.0 ** (-signal.J * d / 2.0)
    out = CoefficientField(d, Jmax, family)
    for level in range(signal.J, 0, -1):
        a, det = _split_level(a, family, d)
        j = level - 1
        if j < Jmax:
            out.detail[j] = det * 2.0 ** (j * d / 2.0)
    out.scaling = a.reshape((1,) * d)
    return out


def inverse_transform(field: CoefficientField, Jgrid: int) -> SampledSignal:
    """Synthesize the expansion on the 2**Jgrid grid (adjoint of forward)."""
    if Jgrid < field.J:
        raise ValueError(f"Jgrid={Jgrid} below the field's grid scale {field.J}")
    d = field.d
    a = field.scaling.astype(complex)
    for j in range(Jgrid):
        det = field.detail.get(j)
        if det is None:
            det = np.zeros((2**d - 1,) + (2**j,) * d, dtype=complex)
        else:
            det = det * 2.0 ** (-j * d / 2.0)
        a = _merge_level(a.reshape((2**j,) * d), det, field.family, d)
    values = a * 2.0 ** (Jgrid * d / 2.0)
    return SampledSignal(d, Jgrid, values.reshape((2**Jgrid,) * d))
