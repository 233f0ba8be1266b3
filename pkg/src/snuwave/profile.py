"""Admissible profiles, coefficient counting and the associated spectrum.

The central object is ``NuProfile``: a non-decreasing, right-continuous map
from exponents alpha to log2-count rates in {-inf} U [0, d], stored as a
piecewise-linear breakpoint list.  Left of the first breakpoint the value is
-inf; right of the last it is constant.  Genuine steps inside the domain are
encoded with two breakpoints 1e-9 apart so that every piece is invertible in
closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fields import CoefficientField

__all__ = [
    "NuProfile",
    "ProfileEstimate",
    "MembershipReport",
    "count_large",
    "wavelet_profile",
    "check_membership",
    "alpha_min",
    "alpha_max",
    "spectrum_dnu",
    "ancillary_distance",
    "pool_adjacent_violators",
    "load_nu_profile",
    "save_nu_profile",
]


@dataclass(frozen=True)
class NuProfile:
    """Piecewise-linear admissible profile on [alpha_min, infinity)."""

    d: int
    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        bps = tuple((float(a), float(v)) for a, v in self.breakpoints)
        if not bps:
            raise ValueError("profile needs at least one breakpoint")
        alphas = [a for a, _ in bps]
        values = [v for _, v in bps]
        if any(a2 <= a1 for a1, a2 in zip(alphas, alphas[1:])):
            raise ValueError("breakpoint abscissae must be strictly increasing")
        if any(v2 < v1 for v1, v2 in zip(values, values[1:])):
            raise ValueError("profile values must be non-decreasing")
        if any(not 0.0 <= v <= self.d for v in values):
            raise ValueError(f"profile values must lie in [0, {self.d}]")
        object.__setattr__(self, "breakpoints", bps)

    @property
    def alpha_min(self) -> float:
        """Smallest exponent where the profile is >= 0."""
        return self.breakpoints[0][0]

    @property
    def nu_max(self) -> float:
        return self.breakpoints[-1][1]

    def __call__(self, alpha):
        """Evaluate the profile; -inf left of alpha_min, constant right."""
        a = np.asarray(alpha, dtype=float)
        xs = np.array([b[0] for b in self.breakpoints])
        ys = np.array([b[1] for b in self.breakpoints])
        out = np.interp(a, xs, ys)
        out = np.where(a < self.alpha_min, -np.inf, out)
        if np.isscalar(alpha):
            return float(out)
        return out

    def first_alpha_reaching(self, w):
        """Generalized inverse inf{a : nu(a) >= w} for nu(alpha_min) < w <= nu_max.

        Vectorized; values outside that range raise (the caller is expected
        to have peeled off the atom and the residual mass).
        """
        wv = np.asarray(w, dtype=float)
        xs = np.array([b[0] for b in self.breakpoints])
        ys = np.array([b[1] for b in self.breakpoints])
        if np.any(wv <= ys[0]) or np.any(wv > ys[-1]):
            raise ValueError("target value outside the invertible range")
        idx = np.searchsorted(ys, wv, side="left")
        lo, hi = idx - 1, idx
        alpha = xs[lo] + (wv - ys[lo]) * (xs[hi] - xs[lo]) / (ys[hi] - ys[lo])
        if np.isscalar(w):
            return float(alpha)
        return alpha


def alpha_min(nu: NuProfile) -> float:
    """First exponent with nonnegative profile value (the stored breakpoint)."""
    a0, v0 = nu.breakpoints[0]
    if v0 < 0:  # unreachable through the validated constructor
        raise ValueError("profile is nowhere nonnegative")
    return a0


def alpha_max(nu: NuProfile) -> float:
    """inf of h / nu(h) over h >= alpha_min with nu(h) > 0.

    On each linear piece the ratio is monotone, so the infimum is attained
    at a breakpoint; the constant tail only increases the ratio.
    """
    candidates = [a / v for a, v in nu.breakpoints if v > 0]
    if not candidates:
        warnings.warn("profile is 0 on its whole support; alpha_max is infinite")
        return math.inf
    return min(candidates)


def spectrum_dnu(nu: NuProfile, h: float) -> float:
    """h * sup of nu(h')/h' over (0, h] for h <= alpha_max, else the dimension d.

    -inf contributions are ignored; if the profile is -inf throughout (0, h]
    the result is -inf.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if h < nu.alpha_min:
        return -math.inf
    if h > alpha_max(nu):
        return float(nu.d)
    candidates = [v / a for a, v in nu.breakpoints if 0 < a <= h]
    candidates.append(nu(h) / h)
    return h * max(candidates)


def count_large(field: CoefficientField, C: float, alpha: float, j: int) -> int:
    """Number of scale-j coefficients with modulus >= C * 2**(-j alpha).

    Ties count as members.  Scales with no stored array hold only zeros and
    therefore contribute nothing (the threshold is strictly positive).
    """
    if C <= 0:
        raise ValueError("threshold constant must be positive")
    if j > field.J:
        raise ValueError(f"scale {j} exceeds grid scale {field.J}")
    arr = field.detail.get(j)
    if arr is None:
        return 0
    threshold = C * 2.0 ** (-j * alpha)
    if threshold == 0.0:  # underflow guard: 2**(-j alpha) > 0 mathematically
        return int(np.count_nonzero(np.abs(arr) > 0))
    return int(np.count_nonzero(np.abs(arr) >= threshold))


def pool_adjacent_violators(y: np.ndarray) -> np.ndarray:
    """Least-squares isotonic (non-decreasing) regression, -inf aware."""
    values = [float(v) for v in y]
    blocks: list[list[float]] = []  # [mean, weight]
    for v in values:
        blocks.append([v, 1.0])
        while len(blocks) > 1 and blocks[-2][0] > blocks[-1][0]:
            m2, w2 = blocks.pop()
            m1, w1 = blocks.pop()
            if math.isinf(m1) or math.isinf(m2):
                merged = min(m1, m2)
            else:
                merged = (m1 * w1 + m2 * w2) / (w1 + w2)
            blocks.append([merged, w1 + w2])
    out = np.empty(len(values))
    pos = 0
    for mean, weight in blocks:
        out[pos : pos + int(weight)] = mean
        pos += int(weight)
    return out


@dataclass(frozen=True)
class ProfileEstimate:
    """Finite-scale wavelet-profile estimate on an exponent grid."""

    alpha_grid: np.ndarray
    nu_hat: np.ndarray
    per_scale_counts: np.ndarray  # shape (len(alpha_grid), n_scales): log2(count)/j
    epsilon_schedule: tuple[float, ...]
    j_range: tuple[int, int]

    def save_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("alpha,nu_hat\n")
            for a, v in zip(self.alpha_grid, self.nu_hat):
                fh.write(f"{a:.12g},{v:.12g}\n")


def wavelet_profile(
    field: CoefficientField,
    alpha_grid: np.ndarray | None = None,
    j_min: int = 2,
    j_max: int | None = None,
    epsilon_schedule: tuple[float, ...] = (0.5, 0.2, 0.1, 0.05),
) -> ProfileEstimate:
    """Estimate the wavelet profile by its finite-scale surrogate.

    For each alpha: take the best (max) of log2(#E_j(1, alpha + eps_last))/j
    over j in [j_min, j_max], with empty counts contributing -inf, then apply
    isotonic regularization.  Earlier entries of the epsilon schedule are the
    widened thresholds the estimate was stabilized against; only the last one
    enters the reported value.
    """
    if j_max is None:
        j_max = field.max_scale
    if j_min < 2:
        raise ValueError("j_min must be at least 2")
    if j_max > field.J:
        raise ValueError(f"j_max={j_max} exceeds grid scale {field.J}")
    if j_max < j_min:
        raise ValueError("empty scale range")
    eps = tuple(float(e) for e in epsilon_schedule)
    if not eps or any(e <= 0 for e in eps) or any(b <= a for a, b in zip(eps[1:], eps[:-1])):
        raise ValueError("epsilon schedule must be positive and decreasing")
    if alpha_grid is None:
        alpha_grid = np.arange(0.0, 3.0 + 1e-12, 0.05)
    alpha_grid = np.asarray(alpha_grid, dtype=float)

    scales = np.arange(j_min, j_max + 1)
    rates = np.full((alpha_grid.size, scales.size), -np.inf)
    for col, j in enumerate(scales):
        arr = field.detail.get(int(j))
        if arr is None:
            continue
        moduli = np.sort(np.abs(arr).ravel())
        thresholds = 2.0 ** (-j * (alpha_grid + eps[-1]))
        # a mathematically positive threshold can underflow; zeros never count
        thresholds = np.maximum(thresholds, 5e-324)
        counts = moduli.size - np.searchsorted(moduli, thresholds, side="left")
        positive = counts > 0
        rates[positive, col] = np.log2(counts[positive]) / j
    nu_hat = rates.max(axis=1)
    nu_hat = pool_adjacent_violators(nu_hat)
    return ProfileEstimate(alpha_grid, nu_hat, rates, eps, (j_min, j_max))


@dataclass(frozen=True)
class MembershipReport:
    passed: bool
    violations: tuple[tuple[int, float, int, float], ...]  # (j, alpha, count, bound)
    j_range: tuple[int, int]
    epsilon: float
    C: float


def check_membership(
    field: CoefficientField,
    nu: NuProfile,
    epsilon: float,
    C: float,
    J_start: int,
    alpha_grid: np.ndarray | None = None,
) -> MembershipReport:
    """Check #E_j(C, alpha) <= 2**((nu(alpha)+eps) j) on all scales from J_start.

    The exponent set is the profile's breakpoints plus an optional user grid;
    where the profile is -inf the bound is zero, so any large coefficient is
    a violation.
    """
    if epsilon <= 0 or C <= 0:
        raise ValueError("epsilon and C must be positive")
    if J_start > field.J:
        raise ValueError(f"J_start={J_start} exceeds grid scale {field.J}")
    alphas = [a for a, _ in nu.breakpoints]
    if alpha_grid is not None:
        alphas = sorted(set(alphas) | {float(a) for a in alpha_grid})
    violations = []
    for j in range(J_start, field.J + 1):
        for a in alphas:
            cnt = count_large(field, C, a, j)
            bound = 2.0 ** ((nu(a) + epsilon) * j)
            if cnt > bound:
                violations.append((j, a, cnt, bound))
    return MembershipReport(
        passed=not violations,
        violations=tuple(violations),
        j_range=(J_start, field.J),
        epsilon=epsilon,
        C=C,
    )


def ancillary_distance(
    field: CoefficientField, nu: NuProfile, alpha_m: float, epsilon_n: float
) -> float:
    """Smallest C with #E_j(C, alpha_m) <= C 2**((nu(alpha_m)+eps_n) j) for all j.

    The feasible set of C is upward closed (raising C shrinks the count and
    raises the bound), so a bisection converges to the infimum.  The zero
    field gives 0.
    """
    if epsilon_n <= 0:
        raise ValueError("epsilon must be positive")
    rate = nu(alpha_m) + epsilon_n
    scales = sorted(field.detail)
    moduli = {j: np.sort(np.abs(field.detail[j]).ravel()) for j in scales}
    if not scales or all(m[-1] == 0 for m in moduli.values()):
        return 0.0

    def feasible(C: float) -> bool:
        for j in scales:
            thr = C * 2.0 ** (-j * alpha_m)
            m = moduli[j]
            cnt = m.size - np.searchsorted(m, thr, side="left")
            if cnt > C * 2.0 ** (rate * j):
                return False
        return True

    hi = max(m[-1] * 2.0 ** (j * alpha_m) for j, m in moduli.items()) * (1 + 1e-9) + 1e-300
    if not feasible(hi):  # pragma: no cover - defensive
        raise RuntimeError("no feasible constant found")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    return hi


# -- profile file format -----------------------------------------------------


def save_nu_profile(nu: NuProfile, path) -> None:
    """Write "d=<d>" then "alpha<TAB>nu" rows in ascending order."""
    with open(path, "w") as fh:
        fh.write(f"d={nu.d}\n")
        for a, v in nu.breakpoints:
            fh.write(f"{a:.12g}\t{v:.12g}\n")


def load_nu_profile(path) -> NuProfile:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("d="):
            raise ValueError(f"profile file must start with 'd=<int>', got {header!r}")
        d = int(header[2:])
        bps = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"malformed profile row: {line!r}")
            bps.append((float(parts[0]), float(parts[1])))
    return NuProfile(d, tuple(bps))
