"""Coefficient fields, sampled signals and dyadic geometry on the torus.

A ``CoefficientField`` stores sup-normalized detail coefficients c[(i, j, k)]
for orientations 1 <= i < 2**d, scales j and positions k in {0, ..., 2**j-1}^d,
as flat per-scale arrays with an implicit zero default (a scale without an
array reads as all-zero).  ``J`` is the grid scale: detail scales live
strictly below ``J`` and a 2**J grid per axis is the coarsest grid on which
the field can be synthesized exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .wavelets import WaveletFamily, get_family, haar

__all__ = [
    "SampledSignal",
    "DyadicIndex",
    "CoefficientField",
    "DyadicCube",
    "dyadic_cubes",
    "restrict_indices",
    "sup_norm_per_scale",
    "load_signal_csv",
    "save_signal_csv",
    "load_coefficients_csv",
    "save_coefficients_csv",
]


@dataclass(frozen=True)
class SampledSignal:
    """Samples of a 1-periodic function on the uniform 2**J grid.

    ``values[m]`` (or ``values[m1, m2]`` in dimension 2) is the sample at
    x = m / 2**J; values are complex.
    """

    d: int
    J: int
    values: np.ndarray

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (2**self.J,) * self.d:
            raise ValueError(
                f"expected grid shape {(2**self.J,) * self.d}, got {vals.shape}"
            )
        object.__setattr__(self, "values", vals)

    @property
    def grid_step(self) -> float:
        return 2.0**-self.J


@dataclass(frozen=True)
class DyadicIndex:
    """A detail-coefficient index (i, j, k) with k a d-tuple."""

    i: int
    j: int
    k: tuple[int, ...]

    def validate(self, d: int) -> "DyadicIndex":
        if not 1 <= self.i < 2**d:
            raise ValueError(f"orientation {self.i} out of range for d={d}")
        if self.j < 0:
            raise ValueError("scale must be nonnegative")
        if len(self.k) != d or any(not 0 <= kl < 2**self.j for kl in self.k):
            raise ValueError(f"position {self.k} outside {{0..2^{self.j}-1}}^{d}")
        return self


class CoefficientField:
    """Sup-normalized wavelet coefficients up to (excluded) grid scale J."""

    def __init__(
        self,
        d: int,
        J: int,
        family: WaveletFamily | None = None,
        scaling: np.ndarray | complex | None = None,
        detail: dict[int, np.ndarray] | None = None,
    ):
        if d not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if J < 0:
            raise ValueError("grid scale must be nonnegative")
        self.d = d
        self.J = J
        self.family = family if family is not None else haar()
        if scaling is None:
            scaling = np.zeros((1,) * d, dtype=complex)
        elif np.isscalar(scaling):
            scaling = np.full((1,) * d, scaling, dtype=complex)
        else:
            scaling = np.asarray(scaling, dtype=complex).reshape((1,) * d)
        self.scaling = scaling
        self.detail: dict[int, np.ndarray] = {}
        for j, arr in (detail or {}).items():
            self.set_detail(j, arr)

    # -- storage ---------------------------------------------------------

    def scale_shape(self, j: int) -> tuple[int, ...]:
        return (2**self.d - 1,) + (2**j,) * self.d

    def set_detail(self, j: int, arr: np.ndarray) -> None:
        if not 0 <= j < self.J:
            raise ValueError(f"scale {j} not representable below grid scale {self.J}")
        arr = np.asarray(arr, dtype=complex)
        if arr.shape != self.scale_shape(j):
            raise ValueError(
                f"scale {j} expects shape {self.scale_shape(j)}, got {arr.shape}"
            )
        self.detail[j] = arr

    def detail_at(self, j: int) -> np.ndarray | None:
        """Stored array at scale j, or None when the scale is implicit zero."""
        return self.detail.get(j)

    @property
    def max_scale(self) -> int:
        """Finest scale holding a stored array (-1 when none)."""
        return max(self.detail, default=-1)

    def get(self, index: DyadicIndex) -> complex:
        index.validate(self.d)
        arr = self.detail.get(index.j)
        if arr is None:
            return 0.0 + 0.0j
        return complex(arr[(index.i - 1,) + index.k])

    def put(self, index: DyadicIndex, value: complex) -> None:
        index.validate(self.d)
        if index.j not in self.detail:
            if not 0 <= index.j < self.J:
                raise ValueError(
                    f"scale {index.j} not representable below grid scale {self.J}"
                )
            self.detail[index.j] = np.zeros(self.scale_shape(index.j), dtype=complex)
        self.detail[index.j][(index.i - 1,) + index.k] = value

    # -- linear structure --------------------------------------------------

    def __add__(self, other: "CoefficientField") -> "CoefficientField":
        if not isinstance(other, CoefficientField):
            return NotImplemented
        if self.d != other.d:
            raise ValueError("cannot add fields of different dimension")
        out = CoefficientField(
            self.d, max(self.J, other.J), self.family, self.scaling + other.scaling
        )
        for j in sorted(set(self.detail) | set(other.detail)):
            a, b = self.detail.get(j), other.detail.get(j)
            if a is None:
                out.detail[j] = b.copy()
            elif b is None:
                out.detail[j] = a.copy()
            else:
                out.detail[j] = a + b
        return out

    def __mul__(self, scalar: complex) -> "CoefficientField":
        out = CoefficientField(self.d, self.J, self.family, self.scaling * scalar)
        for j, arr in self.detail.items():
            out.detail[j] = arr * scalar
        return out

    __rmul__ = __mul__

    def iter_nonzero(self) -> Iterator[tuple[DyadicIndex, complex]]:
        for j in sorted(self.detail):
            arr = self.detail[j]
            for flat in np.flatnonzero(arr):
                pos = np.unravel_index(flat, arr.shape)
                yield DyadicIndex(int(pos[0]) + 1, j, tuple(int(p) for p in pos[1:])), complex(
                    arr[pos]
                )

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return (
            f"CoefficientField(d={self.d}, J={self.J}, family={self.family.name}, "
            f"scales={sorted(self.detail)})"
        )


@dataclass(frozen=True)
class DyadicCube:
    """Generation-m dyadic tile prod_l (r_l/2^m, (r_l+1)/2^m) of the torus."""

    m: int
    r: tuple[int, ...]

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("generation must be nonnegative")
        r = tuple(int(x) for x in self.r)
        if len(r) not in (1, 2):
            raise ValueError("cube dimension must be 1 or 2")
        if any(not 0 <= rl < 2**self.m for rl in r):
            raise ValueError(f"cube index {r} outside generation {self.m}")
        object.__setattr__(self, "r", r)

    @property
    def d(self) -> int:
        return len(self.r)

    @property
    def side(self) -> float:
        return 2.0**-self.m

    def interval(self, axis: int) -> tuple[float, float]:
        return self.r[axis] * self.side, (self.r[axis] + 1) * self.side

    def center(self) -> tuple[float, ...]:
        return tuple((rl + 0.5) * self.side for rl in self.r)

    def contains(self, x: tuple[float, ...]) -> bool:
        """Open-cube membership."""
        return all(lo < xl < hi for xl, (lo, hi) in zip(x, map(self.interval, range(self.d))))

    def is_subcube_of(self, other: "DyadicCube") -> bool:
        if self.m < other.m or self.d != other.d:
            return False
        shift = self.m - other.m
        return all(rl >> shift == ol for rl, ol in zip(self.r, other.r))

    @staticmethod
    def containing(x: tuple[float, ...] | float, m: int, d: int) -> "DyadicCube":
        """The generation-m cube whose closure contains the point x."""
        pt = (float(x),) if np.isscalar(x) else tuple(float(v) for v in x)
        if len(pt) != d:
            raise ValueError("point dimension mismatch")
        r = tuple(min(int((v % 1.0) * 2**m), 2**m - 1) for v in pt)
        return DyadicCube(m, r)


def dyadic_cubes(m: int, d: int) -> list[DyadicCube]:
    """All 2**(m d) generation-m cubes; closures tile the torus."""
    if m < 0:
        raise ValueError("generation must be nonnegative")
    if d == 1:
        return [DyadicCube(m, (r,)) for r in range(2**m)]
    if d == 2:
        return [DyadicCube(m, (r1, r2)) for r1 in range(2**m) for r2 in range(2**m)]
    raise ValueError("dimension must be 1 or 2")


def _k_ranges(cube: DyadicCube, j: int, support_width: int) -> list[tuple[int, int]] | None:
    """Inclusive per-axis k ranges of wavelets supported inside the cube.

    A scale-j wavelet at position k occupies [k, k + support_width] / 2**j per
    axis; it fits in the cube iff r_l 2**(j-m) <= k_l <= (r_l+1) 2**(j-m) - M.
    Returns None when the range is empty on some axis (including j < m).
    """
    if j < cube.m:
        return None
    span = 1 << (j - cube.m)
    if span < support_width:
        return None
    return [(rl * span, (rl + 1) * span - support_width) for rl in cube.r]


def restrict_indices(field: CoefficientField, cube: DyadicCube, j: int) -> set[tuple[int, tuple[int, ...]]]:
    """Index set of scale-j coefficients whose wavelet support lies in the cube."""
    if cube.d != field.d:
        raise ValueError("cube dimension mismatch")
    if j > field.J:
        raise ValueError(f"scale {j} exceeds grid scale {field.J}")
    ranges = _k_ranges(cube, j, field.family.support_width)
    if ranges is None:
        return set()
    axes = [range(lo, hi + 1) for lo, hi in ranges]
    out: set[tuple[int, tuple[int, ...]]] = set()
    for i in range(1, 2**field.d):
        if field.d == 1:
            out.update((i, (k,)) for k in axes[0])
        else:
            out.update((i, (k1, k2)) for k1 in axes[0] for k2 in axes[1])
    return out


def sup_norm_per_scale(field: CoefficientField, cube: DyadicCube) -> np.ndarray:
    """Max coefficient modulus over the cube-restricted index set, per scale.

    Entry j covers scales 0 .. J-1; scales whose restricted index set is
    empty are NaN (absent), while an all-zero scale over a nonempty index
    set is genuinely 0.
    """
    if cube.d != field.d:
        raise ValueError("cube dimension mismatch")
    sup = np.full(max(field.J, field.max_scale + 1), np.nan)
    for j in range(sup.size):
        ranges = _k_ranges(cube, j, field.family.support_width)
        if ranges is None:
            continue
        arr = field.detail.get(j)
        if arr is None:
            sup[j] = 0.0
            continue
        sl = (slice(None),) + tuple(slice(lo, hi + 1) for lo, hi in ranges)
        sup[j] = np.abs(arr[sl]).max()
    return sup


# -- CSV formats -----------------------------------------------------------


def save_signal_csv(signal: SampledSignal, path) -> None:
    """Write "d=<d>,J=<J>" then one "re,im" row per sample (row-major)."""
    with open(path, "w") as fh:
        fh.write(f"d={signal.d},J={signal.J}\n")
        for v in signal.values.ravel():
            fh.write(f"{v.real:.17g},{v.imag:.17g}\n")


def load_signal_csv(path) -> SampledSignal:
    with open(path) as fh:
        header = fh.readline().strip()
        try:
            parts = dict(kv.split("=") for kv in header.split(","))
            d, J = int(parts["d"]), int(parts["J"])
        except Exception as exc:
            raise ValueError(f"malformed signal header: {header!r}") from exc
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            re_s, im_s = line.split(",")
            rows.append(complex(float(re_s), float(im_s)))
    vals = np.array(rows, dtype=complex)
    if vals.size != 2 ** (J * d):
        raise ValueError(f"expected {2 ** (J * d)} samples, found {vals.size}")
    return SampledSignal(d, J, vals.reshape((2**J,) * d))


def save_coefficients_csv(field: CoefficientField, path) -> None:
    """Write rows "i,j,k1[,k2],re,im"; scaling entries use i=0, j=0.

    Exact zeros are omitted (the storage contract reads them back as zero).
    """
    with open(path, "w") as fh:
        for pos in np.ndindex(field.scaling.shape):
            v = field.scaling[pos]
            if v != 0:
                ks = ",".join(str(p) for p in pos)
                fh.write(f"0,0,{ks},{v.real:.17g},{v.imag:.17g}\n")
        for idx, v in field.iter_nonzero():
            ks = ",".join(str(p) for p in idx.k)
            fh.write(f"{idx.i},{idx.j},{ks},{v.real:.17g},{v.imag:.17g}\n")


def load_coefficients_csv(path, family: WaveletFamily | str | None = None, J: int | None = None) -> CoefficientField:
    """Read a coefficient dump; d is inferred from the column count."""
    if isinstance(family, str):
        family = get_family(family)
    entries: list[tuple[int, int, tuple[int, ...], complex]] = []
    d = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            cols = line.split(",")
            if len(cols) == 5:
                row_d = 1
            elif len(cols) == 6:
                row_d = 2
            else:
                raise ValueError(f"malformed coefficient row: {line!r}")
            if d is None:
                d = row_d
            elif d != row_d:
                raise ValueError("inconsistent column counts in coefficient file")
            i, j = int(cols[0]), int(cols[1])
            k = tuple(int(c) for c in cols[2 : 2 + d])
            value = complex(float(cols[2 + d]), float(cols[3 + d]))
            entries.append((i, j, k, value))
    if d is None:
        raise ValueError("empty coefficient file")
    max_j = max((j for i, j, _, _ in entries if i > 0), default=-1)
    grid_J = J if J is not None else max_j + 1
    out = CoefficientField(d, grid_J, family)
    for i, j, k, value in entries:
        if i == 0:
            out.scaling[k] = value
        else:
            out.put(DyadicIndex(i, j, k), value)
    return out
