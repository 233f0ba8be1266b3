"""Irregularity exponents: finite-difference oracles and wavelet estimators.

Two independent routes to the same quantity live here.  The space-domain
route measures sup-norms of iterated finite differences over shrinking
offsets (``holder_modulus``).  The wavelet route forms, per scale j, the
larger of two windowed statistics of cube-restricted coefficient sup-norms

    K_j = max(  sup_{j <= l <= j+floor(log2 j)}           s_l,
                2**(-jM) sup_{j-floor(log2 j) <= l <= j}  2**(lM) s_l )

whose log2 decay rate against j estimates the uniform irregularity exponent
of the function on the cube; the local exponent at a point is the supremum
of the per-cube estimates over a shrinking family of dyadic cubes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fields import CoefficientField, DyadicCube, SampledSignal, sup_norm_per_scale

__all__ = [
    "DegenerateEstimateError",
    "HolderModulus",
    "WindowedStatistic",
    "IrregularityEstimate",
    "finite_difference",
    "holder_modulus",
    "fit_modulus_exponent",
    "windowed_statistic",
    "uniform_irregularity_exponent",
    "local_irregularity_exponent",
    "uniform_holder_check",
    "difference_order_for",
]


class DegenerateEstimateError(RuntimeError):
    """Raised when too few usable scales remain to fit an exponent."""


def difference_order_for(alpha: float) -> int:
    """Difference order [alpha] + 1 with [.] the greatest integer below alpha."""
    if alpha <= 0:
        return 1
    return int(alpha) if float(alpha).is_integer() else math.floor(alpha) + 1


def _offset_steps(signal: SampledSignal, h) -> tuple[int, ...]:
    """Convert a grid offset (float vector or int steps) to integer steps."""
    if np.isscalar(h):
        h = (h,)
    h = tuple(h)
    if len(h) != signal.d:
        raise ValueError("offset dimension mismatch")
    steps = []
    for component in h:
        if isinstance(component, (int, np.integer)):
            steps.append(int(component))
            continue
        scaled = float(component) * 2**signal.J
        if abs(scaled - round(scaled)) > 1e-9:
            raise ValueError(f"offset {component} is not grid-representable at J={signal.J}")
        steps.append(int(round(scaled)))
    return tuple(steps)


def finite_difference(signal: SampledSignal, h, n: int) -> SampledSignal:
    """n-fold iterated difference with periodic wrap-around.

    The first-order difference is f(x+h) - f(x); higher orders iterate it,
    which expands to the usual alternating binomial sum.
    """
    if n < 1:
        raise ValueError("difference order must be at least 1")
    steps = _offset_steps(signal, h)
    out = np.zeros_like(signal.values)
    for t in range(n + 1):
        shift = tuple(-t * s for s in steps)
        out = out + ((-1) ** (n - t)) * math.comb(n, t) * np.roll(
            signal.values, shift, axis=tuple(range(signal.d))
        )
    return SampledSignal(signal.d, signal.J, out)


@dataclass(frozen=True)
class HolderModulus:
    """S(r) = sup over grid offsets |h| <= r of the sup-norm of the M-th difference."""

    r: np.ndarray
    S: np.ndarray
    M: int
    cube: DyadicCube
    dropped: tuple[float, ...]  # radii with an empty evaluation domain


def _axis_bounds(cube: DyadicCube, J: int) -> list[tuple[int, int]]:
    """Inclusive index bounds of grid points strictly inside the open cube."""
    span = 1 << (J - cube.m)
    return [(rl * span + 1, (rl + 1) * span - 1) for rl in cube.r]


def _per_offset_sup_1d(values: np.ndarray, lo: int, hi: int, t: int, M: int) -> float:
    """Sup of |M-th difference at offset t| over x-indices with the whole
    segment [x, x + M t] inside [lo, hi]."""
    top = hi - M * t
    if top < lo:
        return math.nan
    window = np.zeros(top - lo + 1, dtype=values.dtype)
    for s in range(M + 1):
        window = window + ((-1) ** (M - s)) * math.comb(M, s) * values[lo + s * t : top + s * t + 1]
    return float(np.abs(window).max())


def holder_modulus(
    signal: SampledSignal, cube: DyadicCube, M: int, r_grid
) -> HolderModulus:
    """Exact discrete modulus S(r) over a decreasing radius grid.

    Offsets run over all nonzero grid vectors with |h| <= r; by the exact
    symmetry |D_{-h} f| = |D_h f| composed with a translation only one sign
    per direction is enumerated.  Radii whose admissible domain is empty are
    dropped and reported.
    """
    if cube.d != signal.d:
        raise ValueError("cube dimension mismatch")
    if M < 1:
        raise ValueError("difference order must be at least 1")
    r_grid = [float(r) for r in r_grid]
    if any(r2 >= r1 for r1, r2 in zip(r_grid, r_grid[1:])):
        raise ValueError("radius grid must be strictly decreasing")
    if any(r <= 0 or r > cube.side for r in r_grid):
        raise ValueError("radii must lie in (0, cube side]")
    N = 2**signal.J
    t_max = int(math.floor(r_grid[0] * N))

    if signal.d == 1:
        (lo, hi), = _axis_bounds(cube, signal.J)
        sups = np.full(t_max + 1, math.nan)
        for t in range(1, t_max + 1):
            sups[t] = _per_offset_sup_1d(signal.values, lo, hi, t, M)
        offset_norms = None
    else:
        (lo0, hi0), (lo1, hi1) = _axis_bounds(cube, signal.J)
        offsets = []
        for t0 in range(-t_max, t_max + 1):
            for t1 in range(0, t_max + 1):
                if t1 == 0 and t0 <= 0:
                    continue
                if t0 * t0 + t1 * t1 <= t_max * t_max:
                    offsets.append((t0, t1))
        sup_list, norm_list = [], []
        for t0, t1 in offsets:
            a0, b0 = (lo0, hi0 - M * t0) if t0 >= 0 else (lo0 - M * t0, hi0)
            a1, b1 = (lo1, hi1 - M * t1) if t1 >= 0 else (lo1 - M * t1, hi1)
            if b0 < a0 or b1 < a1:
                continue
            window = np.zeros((b0 - a0 + 1, b1 - a1 + 1), dtype=signal.values.dtype)
            for s in range(M + 1):
                window = window + ((-1) ** (M - s)) * math.comb(M, s) * signal.values[
                    a0 + s * t0 : b0 + s * t0 + 1, a1 + s * t1 : b1 + s * t1 + 1
                ]
            sup_list.append(float(np.abs(window).max()))
            norm_list.append(math.hypot(t0, t1) / N)
        order = np.argsort(norm_list)
        offset_norms = np.asarray(norm_list)[order]
        sups = np.asarray(sup_list)[order]

    kept_r, kept_S, dropped = [], [], []
    for r in r_grid:
        if signal.d == 1:
            usable = sups[1 : int(math.floor(r * N)) + 1]
            usable = usable[~np.isnan(usable)]
        else:
            usable = sups[offset_norms <= r + 1e-15]
        if usable.size == 0:
            dropped.append(r)
            continue
        kept_r.append(r)
        kept_S.append(float(usable.max()))
    return HolderModulus(np.asarray(kept_r), np.asarray(kept_S), M, cube, tuple(dropped))


def fit_modulus_exponent(hm: HolderModulus) -> tuple[float, float]:
    """Least-squares slope of log2 S against log2 r, with its R^2."""
    mask = hm.S > 0
    if mask.sum() < 3:
        raise DegenerateEstimateError("fewer than 3 positive modulus values")
    x = np.log2(hm.r[mask])
    y = np.log2(hm.S[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = y - y.mean()
    r2 = 1.0 if np.allclose(total, 0) else 1.0 - float(resid @ resid) / float(total @ total)
    return float(slope), r2


@dataclass(frozen=True)
class WindowedStatistic:
    """Per-scale two-branch windowed coefficient statistic on a cube."""

    j: np.ndarray
    K: np.ndarray
    M: int
    cube: DyadicCube
    branch: np.ndarray  # 1 = plain sup window above j, 2 = attenuated window below
    l_at: np.ndarray  # scale attaining the max
    clipped: np.ndarray  # upper window lost more than half its scales


def windowed_statistic(
    field: CoefficientField, cube: DyadicCube, M: int, j_range: tuple[int, int] | None = None
) -> WindowedStatistic:
    """Compute K_j over j_range (defaults to every usable scale >= 1)."""
    if M < 1:
        raise ValueError("difference order must be at least 1")
    sup = sup_norm_per_scale(field, cube)
    usable = np.flatnonzero(~np.isnan(sup))
    if usable.size == 0:
        raise DegenerateEstimateError("all windows empty on this cube")
    first, last = int(usable[0]), int(usable[-1])
    if j_range is None:
        j_range = (max(1, first), last)
    j_lo, j_hi = int(j_range[0]), int(j_range[1])
    if j_lo < 1 or j_lo < first or j_hi > last or j_hi < j_lo:
        raise ValueError(
            f"j_range {j_range} outside usable scales [{max(1, first)}, {last}]"
        )
    js = np.arange(j_lo, j_hi + 1)
    K = np.empty(js.size)
    branch = np.empty(js.size, dtype=int)
    l_at = np.empty(js.size, dtype=int)
    clipped = np.zeros(js.size, dtype=bool)
    for row, j in enumerate(js):
        w = int(math.floor(math.log2(j)))
        up_hi = min(j + w, last)
        clipped[row] = (j + w) - up_hi > w / 2
        best1, arg1 = -math.inf, j
        for l in range(j, up_hi + 1):
            if not math.isnan(sup[l]) and sup[l] > best1:
                best1, arg1 = sup[l], l
        best2, arg2 = -math.inf, j
        for l in range(max(j - w, first), j + 1):
            if math.isnan(sup[l]):
                continue
            val = 2.0 ** ((l - j) * M) * sup[l]
            if val > best2:
                best2, arg2 = val, l
        if best1 >= best2:
            K[row], branch[row], l_at[row] = best1, 1, arg1
        else:
            K[row], branch[row], l_at[row] = best2, 2, arg2
    if clipped.any():
        warnings.warn(
            "upper window clipped by more than half of its scales for some j; "
            "estimates near the finest scale carry extra bias",
            UserWarning,
        )
    return WindowedStatistic(js, K, M, cube, branch, l_at, clipped)


@dataclass(frozen=True)
class IrregularityEstimate:
    """Fitted decay exponent of the windowed statistic on a cube."""

    exponent_hat: float
    r_squared: float
    fit_j: tuple[int, ...]
    K: tuple[float, ...]
    cube: DyadicCube
    M: int
    per_set: tuple[tuple[int, float], ...] | None = None  # (generation, exponent)

    def to_dict(self) -> dict:
        out = {
            "cube": {"m": self.cube.m, "r": list(self.cube.r)},
            "M": self.M,
            "fit_range": [self.fit_j[0], self.fit_j[-1]],
            "K": list(self.K),
            "exponent_hat": self.exponent_hat,
            "r_squared": self.r_squared,
        }
        if self.per_set is not None:
            out["per_set"] = [[m, e] for m, e in self.per_set]
        return out


def _fit_exponent(js: np.ndarray, K: np.ndarray) -> tuple[float, float]:
    """Slope of log2 K_j against -j; zero K values are excluded."""
    mask = K > 0
    if mask.sum() < 3:
        raise DegenerateEstimateError("fewer than 3 scales with positive statistic")
    x = js[mask].astype(float)
    y = np.log2(K[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = y - y.mean()
    r2 = 1.0 if np.allclose(total, 0) else 1.0 - float(resid @ resid) / float(total @ total)
    return float(-slope), r2


def uniform_irregularity_exponent(
    field: CoefficientField,
    cube: DyadicCube,
    M: int = 1,
    fit_range: tuple[int, int] | None = None,
    two_pass: bool = False,
) -> IrregularityEstimate:
    """Estimate the uniform irregularity exponent on a cube by regression.

    The fit range defaults to the upper half of the usable scales, trading a
    little resolution for lower variance.  With ``two_pass`` the difference
    order is re-derived from the first-pass exponent and the estimate is
    recomputed once when it differs.
    """
    ws = windowed_statistic(field, cube, M)
    if fit_range is None:
        mid = ws.j[0] + (ws.j[-1] - ws.j[0]) // 2
        fit_range = (int(mid), int(ws.j[-1]))
    lo, hi = int(fit_range[0]), int(fit_range[1])
    sel = (ws.j >= lo) & (ws.j <= hi)
    if not sel.any():
        raise DegenerateEstimateError(f"fit range {fit_range} holds no scales")
    exponent, r2 = _fit_exponent(ws.j[sel], ws.K[sel])
    if two_pass:
        M2 = difference_order_for(exponent)
        if M2 != M:
            return uniform_irregularity_exponent(field, cube, M2, fit_range, False)
    kept = ws.K[sel] > 0
    return IrregularityEstimate(
        exponent_hat=exponent,
        r_squared=r2,
        fit_j=tuple(int(v) for v in ws.j[sel][kept]),
        K=tuple(float(v) for v in ws.K[sel][kept]),
        cube=cube,
        M=ws.M if not two_pass else M,
    )


def local_irregularity_exponent(
    field: CoefficientField,
    x0,
    m_range,
    M: int = 1,
    fit_range: tuple[int, int] | None = None,
) -> IrregularityEstimate:
    """Supremum of per-cube estimates over dyadic cubes shrinking to x0.

    Which shrinking family is used does not matter for the supremum, so the
    generation-m dyadic cube containing x0 stands in for balls around it.
    """
    m_list = [int(m) for m in m_range]
    if not m_list:
        raise ValueError("m_range must be nonempty")
    per_set: list[tuple[int, float]] = []
    best: IrregularityEstimate | None = None
    for m in m_list:
        cube = DyadicCube.containing(x0, m, field.d)
        est = uniform_irregularity_exponent(field, cube, M, fit_range)
        per_set.append((m, est.exponent_hat))
        if best is None or est.exponent_hat > best.exponent_hat:
            best = est
    return IrregularityEstimate(
        exponent_hat=best.exponent_hat,
        r_squared=best.r_squared,
        fit_j=best.fit_j,
        K=best.K,
        cube=best.cube,
        M=best.M,
        per_set=tuple(per_set),
    )


def uniform_holder_check(field: CoefficientField, alpha: float, cube: DyadicCube) -> float:
    """Smallest C with cube-restricted sup-norms <= C 2**(-alpha j) at every scale."""
    if not 0 < alpha < 1:
        raise ValueError("the sup-norm criterion applies for alpha in (0, 1)")
    sup = sup_norm_per_scale(field, cube)
    best = 0.0
    for j, s in enumerate(sup):
        if not math.isnan(s):
            best = max(best, s * 2.0 ** (alpha * j))
    return best
