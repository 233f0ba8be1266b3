"""Compactly supported orthonormal wavelet families (Haar, Daubechies).

Filter taps are stored in the usual L2 normalization (low-pass sums to
sqrt(2), unit energy).  The Daubechies taps are computed by spectral
factorization of the binomial half-band polynomial rather than copied from
a table, and the orthonormality identities are enforced at construction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = ["WaveletFamily", "haar", "daubechies", "get_family"]

_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class WaveletFamily:
    """An orthonormal filter pair generating a compactly supported basis.

    ``dec_lo`` holds the L2-normalized low-pass analysis taps; the high-pass
    taps follow from the quadrature-mirror relation and are causal, so the
    mother wavelet generated by the filter bank is supported on
    ``[0, support_width]``.
    """

    name: str
    dec_lo: np.ndarray
    vanishing_moments: int

    def __post_init__(self):
        taps = np.asarray(self.dec_lo, dtype=float)
        object.__setattr__(self, "dec_lo", taps)
        if taps.ndim != 1 or taps.size < 2 or taps.size % 2 != 0:
            raise ValueError("filter must be a flat, even-length tap sequence")
        if abs(taps.sum() - math.sqrt(2.0)) > _TOL:
            raise ValueError("low-pass taps must sum to sqrt(2)")
        if abs(np.dot(taps, taps) - 1.0) > _TOL:
            raise ValueError("low-pass taps must have unit energy")
        # double-shift orthogonality, the actual orthonormality condition
        for s in range(2, taps.size, 2):
            if abs(np.dot(taps[s:], taps[:-s])) > _TOL:
                raise ValueError("taps violate double-shift orthogonality")
        taps.setflags(write=False)

    @property
    def support_width(self) -> int:
        """Support width of the generated wavelet in units of 2**-j."""
        return self.dec_lo.size - 1

    @property
    def dec_hi(self) -> np.ndarray:
        """Causal high-pass analysis taps g[n] = (-1)**n h[L-1-n]."""
        taps = self.dec_lo[::-1].copy()
        taps[1::2] *= -1.0
        return taps

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"WaveletFamily({self.name!r}, taps={self.dec_lo.size})"


def haar() -> WaveletFamily:
    """The Haar family; the filter bank is exact for step functions."""
    s = math.sqrt(0.5)
    return WaveletFamily("haar", np.array([s, s]), 1)


def daubechies(n: int) -> WaveletFamily:
    """Daubechies family with ``n`` vanishing moments (2n taps).

    The taps are the minimum-phase spectral factor of the degree-(n-1)
    binomial half-band polynomial; float64 factorization is accurate to
    well below 1e-10 for n <= 10.
    """
    if n == 1:
        return haar()
    if not 2 <= n <= 10:
        raise ValueError("vanishing-moment count must be in [1, 10]")
    # P(y) = sum_k C(n-1+k, k) y^k evaluated at y = (2 - z - 1/z)/4,
    # expanded as a symmetric Laurent polynomial and shifted by z^(n-1).
    base = np.array([-0.25, 0.5, -0.25])
    q = np.zeros(2 * n - 1)
    term = np.array([1.0])
    for k in range(n):
        pad = (n - 1) - k
        q[pad : pad + term.size] += math.comb(n - 1 + k, k) * term
        term = np.convolve(term, base)
    roots = np.roots(q[::-1])
    inside = roots[np.abs(roots) < 1.0]
    if inside.size != n - 1:
        raise RuntimeError("spectral factorization failed to split roots")
    b = np.atleast_1d(np.poly(inside))[::-1].real
    spectral = np.convolve(
        np.array([math.comb(n, k) for k in range(n + 1)], dtype=float), b
    )
    taps = math.sqrt(2.0) * spectral / spectral.sum()
    # pin the minimum-phase (energy-front-loaded) orientation
    half = taps.size // 2
    if np.sum(taps[:half] ** 2) < np.sum(taps[half:] ** 2):
        taps = taps[::-1]
    return WaveletFamily(f"db{n}", taps, n)


def get_family(name: str) -> WaveletFamily:
    """Resolve a family by name: "haar" or "dbN" with N vanishing moments."""
    key = name.strip().lower()
    if key == "haar":
        return haar()
    m = re.fullmatch(r"db(\d+)", key)
    if m:
        return daubechies(int(m.group(1)))
    raise ValueError(f"unknown wavelet family: {name!r}")
