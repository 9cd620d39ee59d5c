"""
Generalized ageing orderings between two lifetime laws.

Every ordering compares X with Y through the map

    alpha_s(x) = T_{Y,s}^{-1}(T_{X,s}(x))

which is tested for one shape per relation:

    s-IFR    alpha_s convex
    s-IFRA   alpha_s star-shaped
    s-NBU    alpha_s super-additive
    s-NBUFR  alpha_s'(x) >= alpha_s'(0)
    s-NBAFR  alpha_s(x) >= x * alpha_s'(0)

The shape of alpha_s decides the relation (primary form). Equivalent
characterizations through hazard ratios, mean residual lives, TTT, R and
Lorenz transforms and sign-change counts are evaluated on the same grid as
consistency checks (secondary forms) and only feed the agreement flag.

A single law is classified by comparing it with an exponential reference and,
independently, by testing its own failure rate and survival directly.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.distributions import make_exponential
from app.core.equilibrium import (
    EquilibriumChain,
    build_chain,
    cumulative_hazard,
    failure_rate,
    mrl,
)
from app.core.exceptions import AgeingOrderError, DomainError, LevelError
from app.core.logger import logger
from app.core.shapes import (
    ShapeVerdict,
    SignPattern,
    Verdict,
    additivity_pairs,
    dominates,
    is_antistar_shaped,
    is_concave,
    is_convex,
    is_monotone,
    is_star_shaped,
    is_superadditive,
    pairwise_verdict,
    sign_pattern,
)
from app.core.transforms import lorenz, r_transform, r_transform_inv, ttt_inverse


class Relation(Enum):
    """Generalized ageing orderings, strongest first."""

    S_IFR = "s-IFR"
    S_IFRA = "s-IFRA"
    S_NBU = "s-NBU"
    S_NBUFR = "s-NBUFR"
    S_NBAFR = "s-NBAFR"

    @property
    def suffix(self) -> str:
        return self.value[2:]


# Classical names of (relation, s) cells; other cells are labeled "<s>-<class>"
CLASSICAL_NAMES: Dict[Tuple[Relation, int], str] = {
    (Relation.S_IFR, 1): "IFR",
    (Relation.S_IFR, 2): "DMRL",
    (Relation.S_IFR, 3): "DVRL",
    (Relation.S_IFRA, 1): "IFRA",
    (Relation.S_IFRA, 2): "DMRLHA",
    (Relation.S_NBU, 1): "NBU",
    (Relation.S_NBUFR, 1): "NBUFR",
    (Relation.S_NBUFR, 2): "NBUE",
    (Relation.S_NBUFR, 3): "NDVRL",
    (Relation.S_NBAFR, 1): "NBAFR",
    (Relation.S_NBAFR, 2): "HNBUE",
}

# Patterns allowed for T_{X,s}(x) - T_{Y,s}(a x + b)
IFR_SIGN_ORDER = ("-", "+", "-")
IFRA_SIGN_ORDER = ("+", "-")

# Grid fractions used for chord (s-IFR) and ray (s-IFRA) sign-change spot checks
_CHORD_FRACTIONS = ((0.1, 0.4), (0.3, 0.7), (0.6, 0.9))
_RAY_FRACTIONS = (0.25, 0.5, 0.75)

# (slope, intercept, witness x, stretch low, stretch high)
FocusedLine = Tuple[float, float, float, float, float]

# Left-edge knots and exponent dead zone for the power-law read of alpha_1'(0)
_POWER_FIT_KNOTS = 8
_POWER_FIT_FLAT = 0.05

INTERPRETATION_NOTES = (
    "Sign-change forms are evaluated only where a*x + b stays inside the support (a > 0).",
    "The exponential bridge for the star-shaped class is read as s-IFRA at every level.",
    "The average failure rate is read as (1/x) * integral of r_s(t) over [0, x].",
    "Shapes are certified on the quantile window only; no claim is made outside it.",
)


def classical_name(relation: Relation, s: int) -> str:
    """Classical class name of a cell, e.g. (s-NBUFR, 2) -> NBUE."""
    return CLASSICAL_NAMES.get((relation, s), f"{s}-{relation.suffix}")


@dataclass
class AlphaMap:
    """
    The comparison map alpha_s = T_{Y,s}^{-1} o T_{X,s} on the quantile window.

    Attributes:
        chain_x: Chain of X
        chain_y: Chain of Y
        level: Level s
        u: Quantile coordinates (increasing)
        q: Survival levels 1 - u (decreasing)
        x: T_{X,s}^{-1}(q), increasing
        a: T_{Y,s}^{-1}(q) = alpha_s(x)
    """

    chain_x: EquilibriumChain
    chain_y: EquilibriumChain
    level: int
    u: np.ndarray
    q: np.ndarray
    x: np.ndarray
    a: np.ndarray

    @property
    def window(self) -> Tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    def eval(self, x: Any) -> np.ndarray:
        """alpha_s at arbitrary points; 0 where T_{X,s} = 1."""
        x = np.asarray(x, dtype=float)
        q = np.asarray(self.chain_x.survival(self.level, x), dtype=float)
        out = np.where(q >= 1.0, 0.0, np.inf)
        inside = (q > 0.0) & (q < 1.0)
        if np.any(inside):
            out[inside] = self.chain_y.inverse(self.level, q[inside])
        return out

    def inverse(self, a: Any) -> np.ndarray:
        """alpha_s^{-1} = T_{X,s}^{-1} o T_{Y,s}."""
        a = np.asarray(a, dtype=float)
        q = np.asarray(self.chain_y.survival(self.level, a), dtype=float)
        out = np.where(q >= 1.0, 0.0, np.inf)
        inside = (q > 0.0) & (q < 1.0)
        if np.any(inside):
            out[inside] = self.chain_x.inverse(self.level, q[inside])
        return out

    @property
    def mean_ratio(self) -> float:
        """mu_{Y,s-1} / mu_{X,s-1}."""
        s = self.level - 1
        return self.chain_y.mean(s) / self.chain_x.mean(s)

    def deriv(self, x: Any) -> np.ndarray:
        """alpha_s'(x) = (mu_{Y,s-1}/mu_{X,s-1}) T_{X,s-1}(x) / T_{Y,s-1}(alpha_s(x))."""
        x = np.asarray(x, dtype=float)
        s = self.level - 1
        num = np.asarray(self.chain_x.survival(s, x), dtype=float)
        den = np.asarray(self.chain_y.survival(s, self.eval(x)), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.mean_ratio * num / den

    @cached_property
    def prime_at_zero(self) -> Optional[float]:
        """
        alpha_s'(0), or None when it cannot be determined.

        For s >= 2 both level s-1 survivals equal 1 at the origin, so the value
        is the mean ratio. For s = 1 it is the density ratio at 0 when that
        ratio is determinate. When both densities vanish (or both blow up) at
        the origin, alpha' is read as a power law c * x**b over the first window
        knots: b > 0 sends it to 0, b < 0 to infinity (None), and b near 0
        falls back to a linear extrapolation.
        """
        if self.level >= 2:
            return self.mean_ratio
        fx = self.chain_x.base.density
        fy = self.chain_y.base.density
        if fx is not None and fy is not None:
            fx0, fy0 = float(fx(0.0)), float(fy(0.0))
            if np.isfinite(fx0) and np.isfinite(fy0) and fy0 > 0:
                return fx0 / fy0
            if np.isfinite(fx0) and np.isinf(fy0):
                return 0.0
            if (np.isinf(fx0) and np.isfinite(fy0)) or (fx0 > 0 and fy0 == 0):
                return None
        return self._extrapolated_prime()

    def _extrapolated_prime(self) -> Optional[float]:
        xs = self.x[:_POWER_FIT_KNOTS]
        try:
            d = np.asarray(self.deriv(xs), dtype=float)
        except AgeingOrderError as e:
            logger.debug(f"alpha'(0) extrapolation failed: {e}")
            return None
        ok = (xs > 0) & np.isfinite(d) & (d > 0)
        if np.sum(ok) < 2:
            return None
        slope, _ = np.polyfit(np.log(xs[ok]), np.log(d[ok]), 1)
        if slope > _POWER_FIT_FLAT:
            return 0.0
        if slope < -_POWER_FIT_FLAT:
            return None
        x0, x1 = xs[ok][:2]
        d0, d1 = d[ok][:2]
        value = float(d0 - (d1 - d0) / (x1 - x0) * x0)
        return value if np.isfinite(value) else None


def alpha_map(chain_x: EquilibriumChain, chain_y: EquilibriumChain, s: int) -> AlphaMap:
    """
    Sample alpha_s on the common quantile window of two chains.

    Raises:
        LevelError: If either chain lacks level s, or s < 1
        DomainError: If the two quantile windows do not overlap
    """
    if s < 1:
        raise LevelError(f"alpha map needs s >= 1, got {s}")
    chain_x.level(s)
    chain_y.level(s)
    low = max(chain_x.settings.window[0], chain_y.settings.window[0])
    high = min(chain_x.settings.window[1], chain_y.settings.window[1])
    if not low < high:
        raise DomainError(
            f"Quantile windows of {chain_x.name} and {chain_y.name} do not overlap"
        )
    if (low, high) == chain_x.settings.window:
        u = chain_x.u_grid
    else:
        u = np.linspace(low, high, chain_x.settings.grid_points)
    q = 1.0 - u
    x = np.asarray(chain_x.inverse(s, q), dtype=float)
    a = np.asarray(chain_y.inverse(s, q), dtype=float)

    # Step laws give repeated abscissae; keep the first of each run
    keep = np.concatenate(([True], np.diff(x) > 0))
    return AlphaMap(chain_x, chain_y, s, u[keep], q[keep], x[keep], a[keep])


@dataclass
class OrderingVerdict:
    """
    Verdict for one relation at one level.

    Attributes:
        relation: Ordering tested
        level: Level s
        primary_form: Shape verdict of alpha_s (decides the relation)
        secondary_forms: Equivalent characterizations, by name
        window: x-window of the alpha grid
        best_effort: True when an input is an empirical step law
    """

    relation: Relation
    level: int
    primary_form: ShapeVerdict
    secondary_forms: Dict[str, ShapeVerdict] = field(default_factory=dict)
    window: Tuple[float, float] = (float("nan"), float("nan"))
    best_effort: bool = False

    @property
    def holds(self) -> Verdict:
        return self.primary_form.holds

    @property
    def label(self) -> str:
        return classical_name(self.relation, self.level)

    def disagreements(self) -> List[str]:
        """Names of conclusive forms that contradict another conclusive form."""
        forms = {"primary": self.primary_form, **self.secondary_forms}
        outcomes = {f.holds for f in forms.values() if f.conclusive}
        if len(outcomes) <= 1:
            return []
        reference = self.primary_form.holds if self.primary_form.conclusive else None
        return [
            name
            for name, f in forms.items()
            if f.conclusive and (reference is None or f.holds is not reference)
        ]

    @property
    def agreement(self) -> bool:
        """All conclusive forms agree."""
        return len({f.holds for f in self.all_forms() if f.conclusive}) <= 1

    def all_forms(self) -> List[ShapeVerdict]:
        return [self.primary_form, *self.secondary_forms.values()]

    def to_dict(self) -> Dict[str, Any]:
        result = {
            "relation": self.relation.value,
            "s": self.level,
            "label": self.label,
            "holds": self.holds.value,
            "agreement": self.agreement,
            "window": list(self.window),
            "best_effort": self.best_effort,
            "primary": self.primary_form.to_dict(),
            "secondary": {k: v.to_dict() for k, v in self.secondary_forms.items()},
        }
        if self.holds is Verdict.INCONCLUSIVE and self.primary_form.reason is None:
            result["note"] = "equivalence candidate"
        return result


def _form(name: str, fn: Callable[[], ShapeVerdict]) -> ShapeVerdict:
    """Run one form; errors make it inconclusive with the message as reason."""
    try:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return fn()
    except AgeingOrderError as e:
        logger.debug(f"Form {name} inconclusive: {e}")
        return ShapeVerdict.unavailable(name, str(e))


def _finite(*arrays: np.ndarray) -> np.ndarray:
    mask = np.ones_like(np.asarray(arrays[0], dtype=float), dtype=bool)
    for arr in arrays:
        mask &= np.isfinite(np.asarray(arr, dtype=float))
    return mask


def _strict(x: np.ndarray, *arrays: np.ndarray) -> Tuple[np.ndarray, ...]:
    """Drop non-finite entries and repeated abscissae."""
    mask = _finite(x, *arrays)
    x = x[mask]
    arrays = tuple(np.asarray(a)[mask] for a in arrays)
    keep = np.concatenate(([True], np.diff(x) > 0)) if x.size else np.zeros(0, dtype=bool)
    return (x[keep], *(a[keep] for a in arrays))


def _hazard_ratio(alpha: AlphaMap) -> np.ndarray:
    rx = failure_rate(alpha.chain_x, alpha.level, alpha.x)
    ry = failure_rate(alpha.chain_y, alpha.level, alpha.a)
    return rx / ry


def _mrl_ratio(alpha: AlphaMap) -> np.ndarray:
    """mu_{Y,s-1}(alpha(x)) / mu_{X,s-1}(x)."""
    s = alpha.level - 1
    return mrl(alpha.chain_y, s, alpha.a) / mrl(alpha.chain_x, s, alpha.x)


def _best_effort(chain_x: EquilibriumChain, chain_y: EquilibriumChain) -> bool:
    return chain_x.base.is_empirical or chain_y.base.is_empirical


def _verdict(
    relation: Relation,
    alpha: AlphaMap,
    primary: ShapeVerdict,
    forms: Dict[str, ShapeVerdict],
) -> OrderingVerdict:
    verdict = OrderingVerdict(
        relation,
        alpha.level,
        primary,
        forms,
        alpha.window,
        _best_effort(alpha.chain_x, alpha.chain_y),
    )
    if not verdict.agreement:
        logger.warning(
            f"{relation.value} at s={alpha.level} for ({alpha.chain_x.name}, "
            f"{alpha.chain_y.name}): forms disagree ({', '.join(verdict.disagreements())})"
        )
    return verdict


def sign_change_form(
    chain_x: EquilibriumChain,
    chain_y: EquilibriumChain,
    s: int,
    a: float,
    b: float,
    dead_band: Optional[float] = None,
) -> SignPattern:
    """
    Sign pattern of T_{X,s}(x) - T_{Y,s}(a x + b) over the level-s window of X.

    Only points with a x + b inside the support of Y are used.

    Raises:
        DomainError: If a <= 0 or no point has an in-support argument
    """
    if not a > 0:
        raise DomainError(f"Sign-change slope must be positive, got {a}")
    xs = chain_x.x_grid(s)
    args = a * xs + b
    inside = (args >= 0.0) & (args <= chain_y.base.support.upper)
    if not np.any(inside):
        raise DomainError(f"No in-support arguments for a={a:g}, b={b:g}")
    diff = np.asarray(chain_x.survival(s, xs[inside])) - np.asarray(
        chain_y.survival(s, args[inside])
    )
    band = chain_x.settings.dead_band if dead_band is None else dead_band
    return sign_pattern(diff, band, scale=1.0)


def _focused_pattern(alpha: AlphaMap, line: FocusedLine, tol: float) -> SignPattern:
    """
    Sign pattern along a line aimed at a short stretch [lo, hi] of the window.

    The dead band is relative to the largest difference inside the stretch, so
    a shallow dip is resolved as well as a deep one.
    """
    a, b, _, lo, hi = line
    xs = alpha.x
    args = a * xs + b
    inside = (args >= 0.0) & (args <= alpha.chain_y.base.support.upper)
    xs, args = xs[inside], args[inside]
    diff = np.asarray(alpha.chain_x.survival(alpha.level, xs)) - np.asarray(
        alpha.chain_y.survival(alpha.level, args)
    )
    span = (xs >= lo) & (xs <= hi)
    if not np.any(span):
        raise DomainError(f"No grid point inside [{lo:g}, {hi:g}]")
    return sign_pattern(diff, tol, scale=float(np.max(np.abs(diff[span]))))


def _spot_check(
    alpha: AlphaMap,
    lines: Sequence[Tuple[float, float, float]],
    allowed: Sequence[str],
    predicate: str,
    focused: Sequence[FocusedLine] = (),
    focused_tol: float = 1e-6,
) -> ShapeVerdict:
    """
    Verdict from sign patterns along a few lines (a, b, witness x).

    Fixed lines use an absolute dead band; focused lines, aimed at a stretch
    where the primary form saw a violation, use a band relative to that
    stretch. Fails when a pattern leaves the allowed order; holds when all
    patterns fit and at least one changes sign.
    """
    band = alpha.chain_x.settings.convexity_tol
    patterns = [
        (sign_change_form(alpha.chain_x, alpha.chain_y, alpha.level, a, b, band), at)
        for a, b, at in lines
    ]
    patterns += [(_focused_pattern(alpha, line, focused_tol), line[2]) for line in focused]
    bad = [at for p, at in patterns if not p.allows(allowed)]
    window = alpha.window
    if bad:
        return ShapeVerdict(Verdict.FAILS, -len(bad) / len(patterns), tuple(bad[:3]), window, predicate)
    changing = [at for p, at in patterns if p.change_count > 0]
    if changing:
        return ShapeVerdict(Verdict.HOLDS, len(changing) / len(patterns), tuple(changing[:3]), window, predicate)
    return ShapeVerdict(Verdict.INCONCLUSIVE, 0.0, (), window, predicate)


def _chord_lines(alpha: AlphaMap) -> List[Tuple[float, float, float]]:
    n = alpha.x.size
    lines = []
    for lo, hi in _CHORD_FRACTIONS:
        i, j = int(lo * (n - 1)), int(hi * (n - 1))
        slope = (alpha.a[j] - alpha.a[i]) / (alpha.x[j] - alpha.x[i])
        lines.append((float(slope), float(alpha.a[i] - slope * alpha.x[i]), float(alpha.x[i])))
    return lines


def _ray_lines(alpha: AlphaMap) -> List[Tuple[float, float, float]]:
    n = alpha.x.size
    lines = []
    for frac in _RAY_FRACTIONS:
        i = int(frac * (n - 1))
        lines.append((float(alpha.a[i] / alpha.x[i]), 0.0, float(alpha.x[i])))
    return lines


def _violation(primary: ShapeVerdict) -> Optional[Tuple[float, float]]:
    if primary.holds is not Verdict.FAILS or len(primary.witnesses) < 2:
        return None
    return primary.witnesses[0], primary.witnesses[1]


def _focused_chords(alpha: AlphaMap, primary: ShapeVerdict) -> List[FocusedLine]:
    """
    Chord across a failed convexity run.

    The run climbs to its steepest secant at the first witness and falls to
    the flattest at the second; the chord joins the knots bounding them, so
    alpha sits above it inside and below it just outside.
    """
    found = _violation(primary)
    if found is None:
        return []
    x, a = alpha.x, alpha.a
    i = max(int(np.searchsorted(x, found[0])) - 1, 0)
    j = min(int(np.searchsorted(x, found[1])), x.size - 1)
    if j - i < 2:
        return []
    slope = (a[j] - a[i]) / (x[j] - x[i])
    return [(float(slope), float(a[i] - slope * x[i]), float(x[i]), float(x[i]), float(x[j]))]


def _focused_rays(alpha: AlphaMap, primary: ShapeVerdict) -> List[FocusedLine]:
    """Ray through the middle of a failed star-shape run, between its two ratios."""
    found = _violation(primary)
    if found is None:
        return []
    x, a = alpha.x, alpha.a
    i = int(np.clip(np.searchsorted(x, found[0]), 0, x.size - 1))
    j = int(np.clip(np.searchsorted(x, found[1]), 0, x.size - 1))
    if j <= i:
        return []
    slope = 0.5 * (a[i] / x[i] + a[j] / x[j])
    return [(float(slope), 0.0, float(x[i]), float(x[i]), float(x[j]))]


def check_s_ifr(
    chain_x: EquilibriumChain,
    chain_y: EquilibriumChain,
    s: int,
    alpha: Optional[AlphaMap] = None,
) -> OrderingVerdict:
    """
    s-IFR ordering: alpha_s convex.

    Secondary forms: alpha_s^{-1} concave; hazard-quantile ratio increasing in
    u; for s >= 2 the mean-residual-life ratio decreasing and the TTT ratio
    (1 - H_{X,s-1})/(1 - H_{Y,s-1}) increasing; R_{Y,s}^{-1} o R_{X,s} concave
    (needs level s + 1); chord sign-change spot checks.
    """
    alpha = alpha or alpha_map(chain_x, chain_y, s)
    st = chain_x.settings
    x, a, u = alpha.x, alpha.a, alpha.u

    primary = _form("alpha_convex", lambda: is_convex(x, a, st.convexity_tol))
    forms: Dict[str, ShapeVerdict] = {}
    forms["inverse_concave"] = _form("inverse_concave", lambda: is_concave(*_strict(a, x), st.convexity_tol))
    forms["hazard_ratio_increasing"] = _form(
        "hazard_ratio_increasing",
        lambda: is_monotone(*_strict(u, _hazard_ratio(alpha)), True, st.ratio_tol),
    )
    if s >= 2:
        forms["mrl_ratio_decreasing"] = _form(
            "mrl_ratio_decreasing",
            lambda: is_monotone(*_strict(u, 1.0 / _mrl_ratio(alpha)), False, st.ratio_tol),
        )

        def ttt_ratio() -> ShapeVerdict:
            hx = ttt_inverse(chain_x, s - 1, u)
            hy = ttt_inverse(chain_y, s - 1, u)
            return is_monotone(*_strict(u, (1.0 - hx) / (1.0 - hy)), True, st.ratio_tol)

        forms["ttt_ratio_increasing"] = _form("ttt_ratio_increasing", ttt_ratio)

    def r_composition() -> ShapeVerdict:
        levels = np.asarray(chain_x.survival(s + 1, x), dtype=float)[::-1]
        inside = (levels > 0.0) & (levels < 1.0)
        uu = levels[inside]
        g = r_transform_inv(chain_y, s, r_transform(chain_x, s, uu))
        return is_concave(*_strict(uu, g), st.convexity_tol)

    forms["r_composition_concave"] = _form("r_composition_concave", r_composition)
    forms["sign_change_chords"] = _form(
        "sign_change_chords",
        lambda: _spot_check(
            alpha,
            _chord_lines(alpha),
            IFR_SIGN_ORDER,
            "chord sign changes",
            _focused_chords(alpha, primary),
            st.convexity_tol,
        ),
    )
    return _verdict(Relation.S_IFR, alpha, primary, forms)


def check_s_ifra(
    chain_x: EquilibriumChain,
    chain_y: EquilibriumChain,
    s: int,
    alpha: Optional[AlphaMap] = None,
) -> OrderingVerdict:
    """
    s-IFRA ordering: alpha_s star-shaped.

    Secondary forms: alpha_s^{-1} antistar-shaped; quantile ratio
    T_{Y,s}^{-1}(q)/T_{X,s}^{-1}(q) decreasing in q; for s >= 2 the hazard
    ratio and the mean-residual-life ratio dominate the quantile ratio; ray
    sign-change spot checks.
    """
    alpha = alpha or alpha_map(chain_x, chain_y, s)
    st = chain_x.settings
    x, a, u, q = alpha.x, alpha.a, alpha.u, alpha.q

    primary = _form("alpha_star_shaped", lambda: is_star_shaped(x, a, st.ratio_tol))
    forms: Dict[str, ShapeVerdict] = {}
    forms["inverse_antistar"] = _form(
        "inverse_antistar", lambda: is_antistar_shaped(*_strict(a, x), st.ratio_tol)
    )
    forms["quantile_ratio_decreasing"] = _form(
        "quantile_ratio_decreasing",
        lambda: is_monotone(*_strict(q[::-1], (a / x)[::-1]), False, st.ratio_tol),
    )
    if s >= 2:
        forms["hazard_ratio_dominates"] = _form(
            "hazard_ratio_dominates",
            lambda: dominates(*_strict(u, _hazard_ratio(alpha), a / x), st.ratio_tol, "hazard ratio >= quantile ratio"),
        )
        forms["mrl_ratio_dominates"] = _form(
            "mrl_ratio_dominates",
            lambda: dominates(*_strict(u, _mrl_ratio(alpha), a / x), st.ratio_tol, "mrl ratio >= quantile ratio"),
        )
    forms["sign_change_rays"] = _form(
        "sign_change_rays",
        lambda: _spot_check(
            alpha,
            _ray_lines(alpha),
            IFRA_SIGN_ORDER,
            "ray sign changes",
            _focused_rays(alpha, primary),
            st.ratio_tol,
        ),
    )
    return _verdict(Relation.S_IFRA, alpha, primary, forms)


def check_s_nbu(
    chain_x: EquilibriumChain,
    chain_y: EquilibriumChain,
    s: int,
    alpha: Optional[AlphaMap] = None,
) -> OrderingVerdict:
    """
    s-NBU ordering: alpha_s super-additive.

    Secondary form: T_{X,s}(T_{X,s}^{-1}(u) + T_{X,s}^{-1}(v)) is at most
    T_{Y,s}(T_{Y,s}^{-1}(u) + T_{Y,s}^{-1}(v)) on the same pairs, mapped
    through u = T_{X,s}(x).
    """
    alpha = alpha or alpha_map(chain_x, chain_y, s)
    st = chain_x.settings
    lower, upper = alpha.window

    primary = _form(
        "alpha_superadditive",
        lambda: is_superadditive(alpha.eval, lower, upper, st.pair_budget, st.superadditivity_tol),
    )

    def quantile_sum() -> ShapeVerdict:
        pairs = additivity_pairs(lower, upper, st.pair_budget)
        px, py = pairs[:, 0], pairs[:, 1]
        uu = np.asarray(chain_x.survival(s, px), dtype=float)
        vv = np.asarray(chain_x.survival(s, py), dtype=float)
        inside = (uu > 0) & (uu < 1) & (vv > 0) & (vv < 1)
        uu, vv, px, py = uu[inside], vv[inside], px[inside], py[inside]
        lhs = chain_x.survival(s, chain_x.inverse(s, uu) + chain_x.inverse(s, vv))
        rhs = chain_y.survival(s, chain_y.inverse(s, uu) + chain_y.inverse(s, vv))
        return pairwise_verdict(
            px,
            py,
            np.asarray(rhs) - np.asarray(lhs),
            1.0,
            st.superadditivity_tol,
            "quantile-sum survival",
            (lower, upper),
        )

    forms = {"quantile_sum_survival": _form("quantile_sum_survival", quantile_sum)}
    return _verdict(Relation.S_NBU, alpha, primary, forms)


def check_s_nbufr(
    chain_x: EquilibriumChain,
    chain_y: EquilibriumChain,
    s: int,
    alpha: Optional[AlphaMap] = None,
) -> OrderingVerdict:
    """
    s-NBUFR ordering: alpha_s'(x) >= alpha_s'(0) on the window.

    Secondary forms (s >= 2): alpha_s >= alpha_{s-1}; hazard ratio and
    mean-residual-life ratio at least mu_{Y,s-1}/mu_{X,s-1};
    R_{X,s-1} >= R_{Y,s-1}; H_{X,s-1} <= H_{Y,s-1}.
    """
    alpha = alpha or alpha_map(chain_x, chain_y, s)
    st = chain_x.settings
    x, a, u, q = alpha.x, alpha.a, alpha.u, alpha.q

    def primary_form() -> ShapeVerdict:
        d0 = alpha.prime_at_zero
        if d0 is None:
            return ShapeVerdict.unavailable("alpha' >= alpha'(0)", "alpha'(0) is unstable at the origin")
        xs, deriv = _strict(x, alpha.deriv(x))
        return dominates(xs, deriv, np.full_like(deriv, d0), st.ratio_tol, "alpha' >= alpha'(0)")

    primary = _form("alpha_prime_floor", primary_form)
    forms: Dict[str, ShapeVerdict] = {}
    if s >= 2:
        c = alpha.mean_ratio

        def previous_level() -> ShapeVerdict:
            # alpha_s >= alpha_{s-1} iff T_{Y,s-1}(alpha_{s-1}) >= T_{Y,s-1}(alpha_s)
            prev = alpha_map(chain_x, chain_y, s - 1).eval(x)
            xs, at_prev, at_alpha = _strict(
                x, chain_y.survival(s - 1, prev), chain_y.survival(s - 1, a)
            )
            return dominates(xs, at_prev, at_alpha, st.ratio_tol, "alpha_s >= alpha_{s-1}")

        forms["alpha_dominates_previous"] = _form("alpha_dominates_previous", previous_level)
        forms["hazard_ratio_floor"] = _form(
            "hazard_ratio_floor",
            lambda: dominates(*_strict(u, _hazard_ratio(alpha), np.full_like(u, c)), st.ratio_tol, "hazard ratio floor"),
        )
        forms["mrl_ratio_floor"] = _form(
            "mrl_ratio_floor",
            lambda: dominates(*_strict(u, _mrl_ratio(alpha), np.full_like(u, c)), st.ratio_tol, "mrl ratio floor"),
        )
        forms["r_transform_dominance"] = _form(
            "r_transform_dominance",
            lambda: dominates(
                *_strict(q[::-1], r_transform(chain_x, s - 1, q[::-1]), r_transform(chain_y, s - 1, q[::-1])),
                st.ratio_tol,
                "R_X >= R_Y",
            ),
        )
        forms["ttt_inverse_order"] = _form(
            "ttt_inverse_order",
            lambda: dominates(
                *_strict(u, ttt_inverse(chain_y, s - 1, u), ttt_inverse(chain_x, s - 1, u)),
                st.ratio_tol,
                "H_X <= H_Y",
            ),
        )
    return _verdict(Relation.S_NBUFR, alpha, primary, forms)


def check_s_nbafr(
    chain_x: EquilibriumChain,
    chain_y: EquilibriumChain,
    s: int,
    alpha: Optional[AlphaMap] = None,
) -> OrderingVerdict:
    """
    s-NBAFR ordering: alpha_s(x) >= x alpha_s'(0) on the window.

    Secondary forms (s >= 2): T_{X,s}(z mu_{X,s-1}) <= T_{Y,s}(z mu_{Y,s-1});
    Lorenz dominance L_{X,s-1} >= L_{Y,s-1}; and the R^{-1} form
    R_{X,s-1}^{-1}(w) <= R_{Y,s-1}^{-1}(T_{Y,s-1}(c T_{X,s-1}^{-1}(w))) with
    c = mu_{Y,s-1}/mu_{X,s-1}, all in the survival convention.
    """
    alpha = alpha or alpha_map(chain_x, chain_y, s)
    st = chain_x.settings
    x, a, u = alpha.x, alpha.a, alpha.u

    def primary_form() -> ShapeVerdict:
        d0 = alpha.prime_at_zero
        if d0 is None:
            return ShapeVerdict.unavailable("alpha >= x alpha'(0)", "alpha'(0) is unstable at the origin")
        return dominates(x, a, d0 * x, st.ratio_tol, "alpha >= x alpha'(0)")

    primary = _form("alpha_chord_floor", primary_form)
    forms: Dict[str, ShapeVerdict] = {}
    if s >= 2:
        c = alpha.mean_ratio
        mean_x = chain_x.mean(s - 1)

        def scaled_survival() -> ShapeVerdict:
            lhs = np.asarray(chain_x.survival(s, x), dtype=float)
            rhs = np.asarray(chain_y.survival(s, c * x), dtype=float)
            return dominates(x / mean_x, rhs, lhs, st.ratio_tol, "scaled survival")

        def lorenz_dominance() -> ShapeVerdict:
            return dominates(u, lorenz(chain_x, s - 1, u), lorenz(chain_y, s - 1, u), st.ratio_tol, "L_X >= L_Y")

        def r_inverse_form() -> ShapeVerdict:
            w = np.asarray(chain_x.survival(s - 1, x), dtype=float)[::-1]
            w = w[(w > 0.0) & (w < 1.0)]
            lhs = r_transform_inv(chain_x, s - 1, w)
            w2 = np.asarray(chain_y.survival(s - 1, c * np.asarray(chain_x.inverse(s - 1, w))), dtype=float)
            rhs = r_transform_inv(chain_y, s - 1, np.clip(w2, 0.0, 1.0))
            return dominates(*_strict(w, rhs, lhs), st.ratio_tol, "R^-1 form")

        forms["scaled_survival"] = _form("scaled_survival", scaled_survival)
        forms["lorenz_dominance"] = _form("lorenz_dominance", lorenz_dominance)
        forms["r_inverse_form"] = _form("r_inverse_form", r_inverse_form)
    return _verdict(Relation.S_NBAFR, alpha, primary, forms)


CHECKS: Dict[Relation, Callable[..., OrderingVerdict]] = {
    Relation.S_IFR: check_s_ifr,
    Relation.S_IFRA: check_s_ifra,
    Relation.S_NBU: check_s_nbu,
    Relation.S_NBUFR: check_s_nbufr,
    Relation.S_NBAFR: check_s_nbafr,
}


def scale_equivalence(
    chain_x: EquilibriumChain, chain_y: EquilibriumChain, tol: float = 1e-6
) -> Optional[float]:
    """
    theta with F_X(x) = F_Y(theta x), or None.

    The candidate is mean_Y / mean_X; it is accepted when the survival gap is
    at most tol on the level-1 grids of both laws.
    """
    theta = chain_y.base.mean / chain_x.base.mean
    xs = np.concatenate(([0.0], chain_x.x_grid(1), chain_y.x_grid(1) / theta))
    gap = np.abs(
        np.asarray(chain_x.base.survival(xs)) - np.asarray(chain_y.base.survival(theta * xs))
    )
    worst = float(np.max(gap))
    logger.debug(
        f"Scale equivalence {chain_x.name} vs {chain_y.name}: "
        f"theta={theta:.10g}, gap={worst:.3g}"
    )
    return float(theta) if worst <= tol else None


@dataclass
class OrderingReport:
    """
    Matrix of ordering verdicts for a pair of laws.

    Attributes:
        x_name: Label of X
        y_name: Label of Y
        max_level: Highest level tested
        verdicts: Verdicts keyed by (relation, s)
        chain_consistency: Violations of the implication chain
        equivalence: Scale-equivalence factor theta, if any
    """

    x_name: str
    y_name: str
    max_level: int
    verdicts: Dict[Tuple[Relation, int], OrderingVerdict]
    chain_consistency: List[Dict[str, Any]] = field(default_factory=list)
    equivalence: Optional[float] = None

    def verdict(self, relation: Relation, s: int) -> OrderingVerdict:
        return self.verdicts[(relation, s)]

    @property
    def best_effort(self) -> bool:
        return any(v.best_effort for v in self.verdicts.values())

    def warnings(self) -> List[str]:
        """Flat list of inconclusive forms, disagreements and violations."""
        notes: List[str] = []
        for (relation, s), v in self.verdicts.items():
            for name, form in {"primary": v.primary_form, **v.secondary_forms}.items():
                if not form.conclusive:
                    detail = form.reason or f"margin {form.margin:.3g} within tolerance"
                    notes.append(f"{relation.value} s={s} {name} inconclusive: {detail}")
            if not v.agreement:
                notes.append(f"{relation.value} s={s} forms disagree: {', '.join(v.disagreements())}")
        for item in self.chain_consistency:
            notes.append(
                f"implication violated at s={item['s']}: {item['stronger']} holds but {item['weaker']} fails"
            )
        if self.best_effort:
            notes.append("Empirical input: ordering decisions are best-effort")
        return notes

    def to_rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "x": self.x_name,
                "y": self.y_name,
                "relation": relation.value,
                "s": s,
                "label": v.label,
                "holds": v.holds.value,
                "margin": v.primary_form.margin,
                "agreement": v.agreement,
            }
            for (relation, s), v in self.verdicts.items()
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x": self.x_name,
            "y": self.y_name,
            "max_level": self.max_level,
            "verdicts": [v.to_dict() for v in self.verdicts.values()],
            "chain_consistency": list(self.chain_consistency),
            "equivalence": self.equivalence,
            "best_effort": self.best_effort,
        }


def implication_violations(
    verdicts: Dict[Tuple[Relation, int], Any], levels: Sequence[int]
) -> List[Dict[str, Any]]:
    """
    Cells where a stronger relation holds but a weaker one fails.

    Args:
        verdicts: Objects with a ``holds`` Verdict, keyed by (relation, s)
        levels: Levels to scan
    """
    order = list(Relation)
    violations = []
    for s in levels:
        for i, stronger in enumerate(order):
            for weaker in order[i + 1 :]:
                hi = verdicts.get((stronger, s))
                lo = verdicts.get((weaker, s))
                if hi is None or lo is None:
                    continue
                if hi.holds is Verdict.HOLDS and lo.holds is Verdict.FAILS:
                    violations.append({"s": s, "stronger": stronger.value, "weaker": weaker.value})
    return violations


def ordering_report(chain_x: EquilibriumChain, chain_y: EquilibriumChain, S: int) -> OrderingReport:
    """
    Every relation at every level 1..S, with implication and equivalence checks.

    The R-transform forms at level s read level s + 1, so chains built to
    S + 1 give complete secondary coverage.

    Raises:
        LevelError: If either chain stops below S
    """
    if S < 1:
        raise LevelError(f"Report depth must be >= 1, got {S}")
    for chain in (chain_x, chain_y):
        if chain.max_level < S:
            raise LevelError(f"Chain for {chain.name} stops at {chain.max_level} < {S}")

    verdicts: Dict[Tuple[Relation, int], OrderingVerdict] = {}
    for s in range(1, S + 1):
        alpha = alpha_map(chain_x, chain_y, s)
        for relation, check in CHECKS.items():
            verdicts[(relation, s)] = check(chain_x, chain_y, s, alpha=alpha)

    report = OrderingReport(
        chain_x.name,
        chain_y.name,
        S,
        verdicts,
        implication_violations(verdicts, range(1, S + 1)),
        scale_equivalence(chain_x, chain_y),
    )
    for item in report.chain_consistency:
        logger.warning(
            f"Implication chain violated for ({chain_x.name}, {chain_y.name}) at "
            f"s={item['s']}: {item['stronger']} holds, {item['weaker']} fails"
        )
    logger.info(
        f"Ordering report ({chain_x.name}, {chain_y.name}) to level {S}: "
        f"{sum(v.holds is Verdict.HOLDS for v in verdicts.values())} hold, "
        f"{sum(v.holds is Verdict.FAILS for v in verdicts.values())} fail"
    )
    return report


@dataclass
class ClassVerdict:
    """
    Ageing class verdict of one law at one level.

    Attributes:
        relation: Class tested (e.g. s-IFR)
        level: Level s
        direct: Test of the class definition on r_s or T_s
        bridge: Ordering of the law against the exponential reference
    """

    relation: Relation
    level: int
    direct: ShapeVerdict
    bridge: OrderingVerdict

    @property
    def label(self) -> str:
        return classical_name(self.relation, self.level)

    @property
    def holds(self) -> Verdict:
        """Direct verdict, or the bridge verdict when the direct test is inconclusive."""
        return self.direct.holds if self.direct.conclusive else self.bridge.holds

    @property
    def agreement(self) -> bool:
        if self.direct.conclusive and self.bridge.primary_form.conclusive:
            return self.direct.holds is self.bridge.holds
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "relation": self.relation.value,
            "s": self.level,
            "label": self.label,
            "holds": self.holds.value,
            "agreement": self.agreement,
            "direct": self.direct.to_dict(),
            "bridge": self.bridge.to_dict(),
        }


@dataclass
class AgeingClassification:
    """
    Ageing classes of one law.

    Attributes:
        name: Label of the law
        reference_rate: Rate of the exponential reference
        entries: Class verdicts keyed by (relation, s)
    """

    name: str
    reference_rate: float
    entries: Dict[Tuple[Relation, int], ClassVerdict] = field(default_factory=dict)

    @property
    def borderline(self) -> bool:
        """Every direct and bridge verdict is inconclusive."""
        return bool(self.entries) and all(
            not e.direct.conclusive and not e.bridge.primary_form.conclusive
            for e in self.entries.values()
        )

    @property
    def summary(self) -> str:
        if self.borderline:
            return "exponential-borderline"
        held = [e.label for e in self.entries.values() if e.holds is Verdict.HOLDS]
        return ", ".join(held) if held else "none"

    def merge(self, other: "AgeingClassification") -> "AgeingClassification":
        merged = {**self.entries, **other.entries}
        return AgeingClassification(self.name, self.reference_rate, merged)

    def warnings(self) -> List[str]:
        notes = [
            f"{e.relation.value} s={e.level}: direct and bridge verdicts disagree"
            for e in self.entries.values()
            if not e.agreement
        ]
        return notes

    def to_rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "name": self.name,
                "relation": e.relation.value,
                "s": e.level,
                "label": e.label,
                "holds": e.holds.value,
                "direct": e.direct.holds.value,
                "bridge": e.bridge.holds.value,
                "agreement": e.agreement,
            }
            for e in self.entries.values()
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "reference_rate": self.reference_rate,
            "summary": self.summary,
            "entries": [e.to_dict() for e in self.entries.values()],
        }


def _origin_rate(chain: EquilibriumChain, s: int, x: np.ndarray, r: np.ndarray) -> Optional[float]:
    """r_s(0): 1/mu_{s-1} for s >= 2, the density at 0 for s = 1."""
    if s >= 2:
        return 1.0 / chain.mean(s - 1)
    density = chain.base.density
    if density is not None:
        r0 = float(density(0.0))
        if np.isfinite(r0):
            return r0
    value = float(r[0] - (r[1] - r[0]) / (x[1] - x[0]) * x[0])
    return value if np.isfinite(value) else None


def _direct_checks(chain: EquilibriumChain, s: int) -> Dict[Relation, ShapeVerdict]:
    st = chain.settings
    x = chain.x_grid(s)
    keep = np.concatenate(([True], np.diff(x) > 0))
    x = x[keep]
    x = x[x > 0]

    def hazard() -> Tuple[np.ndarray, np.ndarray]:
        return _strict(x, failure_rate(chain, s, x))

    def ifr() -> ShapeVerdict:
        return is_monotone(*hazard(), True, st.ratio_tol)

    def ifra() -> ShapeVerdict:
        return is_star_shaped(*_strict(x, cumulative_hazard(chain, s, x)), st.ratio_tol)

    def nbu() -> ShapeVerdict:
        pairs = additivity_pairs(float(x[0]), float(x[-1]), st.pair_budget)
        px, py = pairs[:, 0], pairs[:, 1]
        slack = (
            np.asarray(chain.survival(s, px)) * np.asarray(chain.survival(s, py))
            - np.asarray(chain.survival(s, px + py))
        )
        return pairwise_verdict(
            px,
            py,
            slack,
            1.0,
            st.superadditivity_tol,
            "T(x)T(y) >= T(x+y)",
            (float(x[0]), float(x[-1])),
        )

    def origin_floor() -> Tuple[np.ndarray, np.ndarray, float]:
        xs, r = hazard()
        r0 = _origin_rate(chain, s, xs, r)
        if r0 is None:
            raise DomainError("r(0) is unstable at the origin")
        return xs, r, r0

    def nbufr() -> ShapeVerdict:
        xs, r, r0 = origin_floor()
        return dominates(xs, r, np.full_like(r, r0), st.ratio_tol, "r(x) >= r(0)")

    def nbafr() -> ShapeVerdict:
        xs, _, r0 = origin_floor()
        average = np.asarray(cumulative_hazard(chain, s, xs)) / xs
        return dominates(xs, average, np.full_like(average, r0), st.ratio_tol, "average r >= r(0)")

    return {
        Relation.S_IFR: _form("increasing_failure_rate", ifr),
        Relation.S_IFRA: _form("star_shaped_hazard", ifra),
        Relation.S_NBU: _form("survival_product", nbu),
        Relation.S_NBUFR: _form("failure_rate_floor", nbufr),
        Relation.S_NBAFR: _form("average_failure_rate_floor", nbafr),
    }


def classify_ageing(
    chain: EquilibriumChain,
    s: int,
    reference_rate: Optional[float] = None,
    reference: Optional[EquilibriumChain] = None,
) -> AgeingClassification:
    """
    Ageing classes of one law at level s.

    Each class gets a direct test of its definition and the ordering of the
    law against an exponential reference (rate 1/mean by default).

    Args:
        chain: Chain of the law, built to at least s + 1 for full coverage
        s: Level to classify
        reference_rate: Rate of the exponential reference
        reference: Prebuilt reference chain (overrides reference_rate)

    Raises:
        LevelError: If the chain lacks level s
    """
    chain.level(s)
    if reference is None:
        rate = reference_rate if reference_rate is not None else 1.0 / chain.base.mean
        reference = build_chain(make_exponential(rate), max(s + 1, 2), chain.settings)
    else:
        rate = float(reference.base.params.get("rate", 1.0 / reference.base.mean))

    direct = _direct_checks(chain, s)
    alpha = alpha_map(chain, reference, s)
    result = AgeingClassification(chain.name, rate)
    for relation, check in CHECKS.items():
        bridge = check(chain, reference, s, alpha=alpha)
        entry = ClassVerdict(relation, s, direct[relation], bridge)
        if not entry.agreement:
            logger.warning(
                f"{chain.name}: {relation.value} at s={s} direct verdict "
                f"{entry.direct.holds.value} but bridge verdict {bridge.holds.value}"
            )
        result.entries[(relation, s)] = entry
    return result


def classify_chain(
    chain: EquilibriumChain, S: int, reference_rate: Optional[float] = None
) -> AgeingClassification:
    """classify_ageing at every level 1..S with one shared reference chain."""
    rate = reference_rate if reference_rate is not None else 1.0 / chain.base.mean
    reference = build_chain(make_exponential(rate), S + 1, chain.settings)
    result = AgeingClassification(chain.name, rate)
    for s in range(1, S + 1):
        result = result.merge(classify_ageing(chain, s, reference=reference))
    logger.info(f"Classified {chain.name} to level {S}: {result.summary}")
    return result
