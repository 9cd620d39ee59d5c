"""
Iterated equilibrium ladder of a lifetime law.

Level 0 is the density, level 1 the survival function, and each further level
is the normalized tail integral of the previous one::

    T_s(x) = int_x^inf T_{s-1}(t) dt / mu_{s-1}

Laws with an analytic ladder (exponential, uniform, integer gamma, empirical)
are evaluated exactly. Everything else goes through the numeric path: level 2
is integrated from the base survival with vector quadrature, and higher levels
integrate the monotone piecewise-cubic interpolant of the level below exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import quad_vec
from scipy.interpolate import PchipInterpolator
from scipy.optimize import elementwise

from app.core.config import Config, get_config
from app.core.distributions import ClosedFormChain, DistributionModel
from app.core.exceptions import (
    DomainError,
    LevelError,
    NumericError,
    ParameterError,
    TailError,
)
from app.core.logger import logger

# Growth factor and step cap when searching for the deep-tail cutoff
_TAIL_GROWTH = 1.5
_MAX_TAIL_STEPS = 200


@dataclass(frozen=True)
class NumericSettings:
    """
    Numeric tolerances shared by chain construction, inversion and shape tests.

    Attributes:
        quad_abs_tol: Absolute tolerance of tail quadrature
        tail_survival_cut: Survival below this value is deep tail
        invert_tol: Bound on |T(x) - u| for inverses of continuous levels
        grid_points: Points of the quantile-coordinate grid
        window: (low, high) quantile window tested by shape deciders
        convexity_tol: Convexity/concavity tolerance
        ratio_tol: Monotone-ratio tolerance
        superadditivity_tol: Super-additivity tolerance
        dead_band: Relative dead band for sign patterns
        pair_budget: Number of low-discrepancy pairs per additivity test
    """

    quad_abs_tol: float = 1e-9
    tail_survival_cut: float = 1e-12
    invert_tol: float = 1e-10
    grid_points: int = 512
    window: Tuple[float, float] = (1e-4, 1.0 - 1e-4)
    convexity_tol: float = 1e-6
    ratio_tol: float = 1e-7
    superadditivity_tol: float = 1e-7
    dead_band: float = 1e-9
    pair_budget: int = 4096

    def __post_init__(self):
        for name in (
            "quad_abs_tol",
            "tail_survival_cut",
            "invert_tol",
            "convexity_tol",
            "ratio_tol",
            "superadditivity_tol",
            "dead_band",
        ):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if self.grid_points < 16:
            raise ParameterError(f"grid_points must be at least 16, got {self.grid_points}")
        low, high = self.window
        if not 0.0 < low < high < 1.0:
            raise ParameterError(
                f"Quantile window must satisfy 0 < low < high < 1, got {self.window}"
            )
        if self.pair_budget < 1:
            raise ParameterError(f"pair_budget must be positive, got {self.pair_budget}")

    @property
    def knot_count(self) -> int:
        """Intervals of the numeric knot grid."""
        return 4 * self.grid_points

    @classmethod
    def from_config(cls, cfg: Optional[Config] = None, **overrides: Any) -> "NumericSettings":
        """
        Build settings from a Config, applying keyword overrides.

        Args:
            cfg: Configuration (defaults to the global config)
            **overrides: Field values taking precedence over cfg

        Returns:
            NumericSettings instance
        """
        cfg = cfg or get_config()
        values: Dict[str, Any] = dict(
            quad_abs_tol=cfg.quad_abs_tol,
            tail_survival_cut=cfg.tail_survival_cut,
            invert_tol=cfg.invert_tol,
            grid_points=cfg.grid_points,
            window=(cfg.window_low, cfg.window_high),
            convexity_tol=cfg.convexity_tol,
            ratio_tol=cfg.ratio_tol,
            superadditivity_tol=cfg.superadditivity_tol,
            dead_band=cfg.dead_band,
            pair_budget=cfg.pair_budget,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for report echo."""
        return {
            "quad_abs_tol": self.quad_abs_tol,
            "tail_survival_cut": self.tail_survival_cut,
            "invert_tol": self.invert_tol,
            "grid_points": self.grid_points,
            "window": list(self.window),
            "convexity_tol": self.convexity_tol,
            "ratio_tol": self.ratio_tol,
            "superadditivity_tol": self.superadditivity_tol,
            "dead_band": self.dead_band,
            "pair_budget": self.pair_budget,
        }


def _knot_grid(x_max: float, intervals: int) -> np.ndarray:
    # Cubic spacing: dense near the origin where densities may be singular
    t = np.linspace(0.0, 1.0, intervals + 1)
    return x_max * t**3


def _quad_tails(
    survival, x: Any, upper: float, settings: NumericSettings, level: int
) -> np.ndarray:
    """
    Integrate survival from every point of x to the end of the support.

    The gaps between sorted points and the final tail are integrated in one
    vector quadrature and combined by a reverse cumulative sum, so the result
    does not depend on how the work is split.
    """
    x = np.asarray(x, dtype=float)
    flat = np.clip(x.ravel(), 0.0, upper)
    order = np.argsort(flat, kind="stable")
    pts = flat[order]
    widths = np.diff(pts)
    last = pts[-1]
    bounded = math.isfinite(upper)

    def integrand(v: float) -> np.ndarray:
        body = np.asarray(survival(pts[:-1] + v * widths)) * widths
        if bounded:
            tail = survival(last + v * (upper - last)) * (upper - last)
        elif v >= 1.0:
            tail = 0.0
        else:
            tail = survival(last + v / (1.0 - v)) / (1.0 - v) ** 2
        return np.append(body, tail)

    try:
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            pieces, err, info = quad_vec(
                integrand,
                0.0,
                1.0,
                epsabs=settings.quad_abs_tol,
                epsrel=1e-10,
                norm="max",
                full_output=True,
            )
    except (ArithmeticError, ValueError) as e:
        raise NumericError(f"Tail quadrature for level {level} failed: {e}") from e
    if not info.success or not np.all(np.isfinite(pieces)):
        raise NumericError(
            f"Tail quadrature for level {level} did not converge (error estimate {err:.3g})"
        )

    tails = np.cumsum(pieces[::-1])[::-1]
    out = np.empty_like(flat)
    out[order] = tails
    return out.reshape(x.shape)


class ChainLevel:
    """
    One rung T_s of the ladder.

    Subclasses provide survival, tail_integral and the deep-tail cutoff
    x_max; inversion defaults to a bracketed vector root search.
    """

    level: int
    mean: float
    x_max: float
    bounded: bool
    continuous: bool = True

    def __init__(self, settings: NumericSettings):
        self.settings = settings

    def survival(self, x: Any) -> np.ndarray:
        raise NotImplementedError

    def tail_integral(self, x: Any) -> np.ndarray:
        raise NotImplementedError

    def inverse(self, u: np.ndarray) -> np.ndarray:
        return self._bracketed_inverse(u)

    @cached_property
    def bracket_knots(self) -> Tuple[np.ndarray, np.ndarray]:
        """Monotone table (x, T_s(x)) used to bracket inverses."""
        xk = _knot_grid(self.x_max, self.settings.knot_count)
        vk = np.minimum.accumulate(np.clip(self.survival(xk), 0.0, 1.0))
        return xk, vk

    def _deep_tail_bracket(self, u: np.ndarray) -> np.ndarray:
        hi = np.full_like(u, max(self.x_max, 1e-300) * 2.0)
        for _ in range(_MAX_TAIL_STEPS):
            pending = self.survival(hi) >= u
            if not np.any(pending):
                return hi
            hi = np.where(pending, hi * 2.0, hi)
        raise NumericError(f"Could not bracket the inverse of level {self.level} in the deep tail")

    def _bracketed_inverse(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        xk, vk = self.bracket_knots
        n = xk.size
        j = np.searchsorted(vk[::-1], u, side="left")
        i = n - 1 - j
        in_table = j > 0

        lo = xk[np.clip(i, 0, n - 1)]
        hi = np.where(in_table, xk[np.clip(i + 1, 0, n - 1)], 0.0)
        if not np.all(in_table):
            hi = np.where(in_table, hi, self._deep_tail_bracket(u))

        exact = in_table & (vk[np.clip(i, 0, n - 1)] == u)
        result = np.where(exact, lo, np.nan)
        todo = ~exact
        if np.any(todo):
            res = elementwise.find_root(
                lambda x, target: self.survival(x) - target,
                (lo[todo], hi[todo]),
                args=(u[todo],),
                tolerances=dict(fatol=self.settings.invert_tol * 1e-2, frtol=0.0),
            )
            if not np.all(res.success):
                logger.debug(
                    f"Root search for level {self.level} stopped early on "
                    f"{int(np.sum(~res.success))} point(s)"
                )
            result[todo] = res.x
        return result


class DensityLevel(ChainLevel):
    """Level 0: the density f. Never inverted."""

    level = 0
    mean = 1.0

    def __init__(self, base: DistributionModel, settings: NumericSettings):
        super().__init__(settings)
        self.base = base
        self.bounded = base.support.bounded
        self.x_max = base.support.upper

    def survival(self, x: Any) -> np.ndarray:
        if self.base.density is None:
            raise NumericError(f"{self.base.name} has no density; level 0 is undefined")
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, self.base.density(x))

    def tail_integral(self, x: Any) -> np.ndarray:
        return np.asarray(self.base.survival(np.asarray(x, dtype=float)))

    def inverse(self, u: np.ndarray) -> np.ndarray:
        raise LevelError("Level 0 is a density and has no inverse")


class ClosedFormLevel(ChainLevel):
    """Level s >= 1 read from an analytic ladder."""

    def __init__(
        self,
        s: int,
        base: DistributionModel,
        chain: ClosedFormChain,
        settings: NumericSettings,
    ):
        super().__init__(settings)
        self.level = s
        self.base = base
        self.chain = chain
        self.mean = float(chain.mean(s))
        self.bounded = base.support.bounded
        self.continuous = not (base.is_empirical and s == 1)
        self.x_max = self._find_x_max()

    def _find_x_max(self) -> float:
        if self.bounded:
            return self.base.support.upper
        x = float(self.base.inverse_survival(self.settings.tail_survival_cut))
        for _ in range(_MAX_TAIL_STEPS):
            if self.survival(x) < self.settings.tail_survival_cut:
                return x
            x *= _TAIL_GROWTH
        raise NumericError(f"Level {self.level} of {self.base.name} never reaches the tail cut")

    def survival(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 1.0, self.chain.survival(self.level, x))

    def tail_integral(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        head = np.maximum(-x, 0.0)
        return head + self.mean * np.asarray(self.chain.survival(self.level + 1, np.maximum(x, 0.0)))

    def inverse(self, u: np.ndarray) -> np.ndarray:
        if self.chain.inverse is not None:
            result = self.chain.inverse(self.level, u)
            if result is not None:
                return np.asarray(result, dtype=float)
        return self._bracketed_inverse(u)


class BaseSurvivalLevel(ChainLevel):
    """Level 1 of the numeric path: the base survival function itself."""

    level = 1

    def __init__(self, base: DistributionModel, settings: NumericSettings):
        super().__init__(settings)
        self.base = base
        self.mean = base.mean
        self.bounded = base.support.bounded
        self.x_max = (
            base.support.upper
            if self.bounded
            else float(base.inverse_survival(settings.tail_survival_cut))
        )

    def survival(self, x: Any) -> np.ndarray:
        return np.asarray(self.base.survival(np.asarray(x, dtype=float)))

    def tail_integral(self, x: Any) -> np.ndarray:
        return _quad_tails(self.survival, x, self.base.support.upper, self.settings, self.level)

    def inverse(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(self.base.inverse_survival(u), dtype=float)


class GridLevel(ChainLevel):
    """
    Numeric level s >= 2 stored as monotone knots.

    Between knots the survival is a PCHIP interpolant; beyond the last knot it
    continues as an exponential tail with the hazard of the last knot (or is
    zero on bounded supports).
    """

    def __init__(
        self,
        s: int,
        knots: np.ndarray,
        values: np.ndarray,
        tail_rate: float,
        bounded: bool,
        settings: NumericSettings,
    ):
        super().__init__(settings)
        self.level = s
        self.knots = knots
        self.values = values
        self.bounded = bounded
        self.tail_rate = tail_rate
        self.x_max = float(knots[-1])
        self._interp = PchipInterpolator(knots, values, extrapolate=False)
        self._antiderivative = self._interp.antiderivative()
        self._end_area = float(self._antiderivative(self.x_max))
        last = float(values[-1])
        self._beyond = 0.0 if bounded or last == 0.0 or tail_rate <= 0 else last / tail_rate
        self.mean = self._end_area + self._beyond

    @property
    def bracket_knots(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.knots, self.values

    def _tail_survival(self, x: np.ndarray) -> np.ndarray:
        if self.bounded or self.tail_rate <= 0:
            return np.zeros_like(x)
        return self.values[-1] * np.exp(-self.tail_rate * (x - self.x_max))

    def survival(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.clip(x, 0.0, self.x_max)
        body = np.clip(self._interp(inside), 0.0, 1.0)
        out = np.where(x > self.x_max, self._tail_survival(x), body)
        return np.where(x < 0, 1.0, out)

    def tail_integral(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.clip(x, 0.0, self.x_max)
        body = self._end_area - self._antiderivative(inside) + self._beyond
        rate = self.tail_rate if self.tail_rate > 0 else np.inf
        beyond = self._tail_survival(x) / rate
        out = np.where(x > self.x_max, beyond, np.maximum(body, 0.0))
        return out + np.maximum(-x, 0.0)

    def inverse(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        last = self.values[-1]
        deep = u < last
        if not np.any(deep) or self.bounded or self.tail_rate <= 0:
            return self._bracketed_inverse(u)
        result = np.empty_like(u)
        result[deep] = self.x_max + np.log(last / u[deep]) / self.tail_rate
        if np.any(~deep):
            result[~deep] = self._bracketed_inverse(u[~deep])
        return result


def _next_x_max(prev: ChainLevel, s: int, settings: NumericSettings) -> float:
    if prev.bounded:
        return prev.x_max
    x = prev.x_max
    for _ in range(_MAX_TAIL_STEPS):
        if float(prev.tail_integral(np.array([x]))[0]) / prev.mean < settings.tail_survival_cut:
            return x
        x *= _TAIL_GROWTH
    raise NumericError(
        f"Tail integral of level {s - 1} does not fall below "
        f"{settings.tail_survival_cut:g} (divergent tail for level {s})"
    )


def _quantile_knots(
    cubic: np.ndarray, level: ChainLevel, settings: NumericSettings
) -> np.ndarray:
    """Cubic knots merged with the level's own quantiles 1 - u over the window."""
    x_max = float(cubic[-1])
    low, high = settings.window
    quantiles = level.inverse(1.0 - np.linspace(low, high, settings.grid_points))
    inside = np.isfinite(quantiles) & (quantiles > 0.0) & (quantiles < x_max * (1.0 - 1e-9))
    merged = np.union1d(cubic, quantiles[inside])
    return merged[np.concatenate(([True], np.diff(merged) > 1e-12 * x_max))]


def _integrate_level(prev: ChainLevel, s: int, settings: NumericSettings) -> GridLevel:
    """
    Tabulate level s from the tail integrals of level s-1.

    A first pass on cubic knots locates the level's quantiles; the second pass
    adds them as knots so the window is resolved in the quantile coordinate.
    """
    x_max = _next_x_max(prev, s, settings)
    cubic = _knot_grid(x_max, settings.knot_count)
    draft = _tabulate_level(prev, s, cubic, settings)
    return _tabulate_level(prev, s, _quantile_knots(cubic, draft, settings), settings)


def _tabulate_level(
    prev: ChainLevel, s: int, knots: np.ndarray, settings: NumericSettings
) -> GridLevel:
    x_max = float(knots[-1])
    tails = prev.tail_integral(knots)
    total = float(tails[0])
    if not (math.isfinite(total) and total > 0):
        raise NumericError(f"Generalized mean of level {s - 1} is not finite and positive: {total}")
    values = np.minimum.accumulate(np.clip(tails / total, 0.0, 1.0))
    values[0] = 1.0

    tail_rate = 0.0
    if not prev.bounded and values[-1] > 0:
        tail_rate = float(prev.survival(x_max)) / (total * float(values[-1]))
    return GridLevel(s, knots, values, tail_rate, prev.bounded, settings)


class EquilibriumChain:
    """
    The ladder T_0..T_S of one lifetime law.

    Attributes:
        base: Distribution the ladder was built from
        max_level: Highest level S
        levels: ChainLevel objects for 0..S
        settings: Numeric settings used for the build
        closed_form: True when the analytic ladder was used
    """

    def __init__(
        self,
        base: DistributionModel,
        levels: List[ChainLevel],
        settings: NumericSettings,
        closed_form: bool,
    ):
        self.base = base
        self.levels = tuple(levels)
        self.max_level = len(levels) - 1
        self.settings = settings
        self.closed_form = closed_form
        self._x_grids: Dict[int, np.ndarray] = {}

    @property
    def name(self) -> str:
        return self.base.name

    def level(self, s: int) -> ChainLevel:
        """Return level s, raising LevelError outside 0..S."""
        if not (isinstance(s, (int, np.integer)) and 0 <= s <= self.max_level):
            raise LevelError(f"Level {s} is outside the built range 0..{self.max_level}")
        return self.levels[s]

    def mean(self, s: int) -> float:
        return self.level(s).mean

    @property
    def means(self) -> List[float]:
        """Generalized means of levels 1..S."""
        return [lvl.mean for lvl in self.levels[1:]]

    def survival(self, s: int, x: Any) -> Any:
        level = self.level(s)
        arr = np.asarray(x, dtype=float)
        out = level.survival(arr)
        return float(out) if arr.ndim == 0 else np.asarray(out, dtype=float)

    def tail_integral(self, s: int, x: Any) -> Any:
        """int_x^inf T_s(t) dt, read from level s + 1 when it exists."""
        level = self.level(s)
        arr = np.asarray(x, dtype=float)
        if s + 1 <= self.max_level:
            out = level.mean * np.asarray(self.levels[s + 1].survival(arr))
            out = out + np.maximum(-arr, 0.0) * (s > 0)
        else:
            out = level.tail_integral(arr)
        return float(out) if arr.ndim == 0 else np.asarray(out, dtype=float)

    def inverse(self, s: int, u: Any) -> Any:
        """
        Generalized inverse inf{x: T_s(x) <= u} for s >= 1 and u in (0, 1).

        Raises:
            LevelError: If s is 0 or above S
            DomainError: If some u lies outside (0, 1)
            NumericError: If a continuous level misses invert_tol
        """
        level = self.level(s)
        if s == 0:
            raise LevelError("Level 0 is a density and has no inverse")
        arr = np.asarray(u, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        if np.any(~((flat > 0.0) & (flat < 1.0))):
            bad = flat[~((flat > 0.0) & (flat < 1.0))][0]
            raise DomainError(f"Survival level must lie in (0, 1), got {bad}")

        result = np.asarray(level.inverse(flat), dtype=float)
        if level.continuous:
            residual = np.abs(np.asarray(level.survival(result)) - flat)
            worst = float(np.max(residual)) if residual.size else 0.0
            if not worst <= self.settings.invert_tol:
                raise NumericError(
                    f"Inverse of level {s} for {self.name} missed tolerance: "
                    f"|T(x) - u| = {worst:.3g} > {self.settings.invert_tol:g}"
                )
        result = result.reshape(arr.shape)
        return float(result) if arr.ndim == 0 else result

    @cached_property
    def u_grid(self) -> np.ndarray:
        """Equispaced quantile coordinates over the window."""
        low, high = self.settings.window
        return np.linspace(low, high, self.settings.grid_points)

    def x_grid(self, s: int) -> np.ndarray:
        """Level-s image of the u-grid: x = T_s^{-1}(1 - u)."""
        if s not in self._x_grids:
            self._x_grids[s] = np.asarray(self.inverse(s, 1.0 - self.u_grid))
        return self._x_grids[s]

    def summary(self) -> Dict[str, Any]:
        """Per-level generalized means and window bounds."""
        levels = []
        for s in range(1, self.max_level + 1):
            xs = self.x_grid(s)
            levels.append(
                {
                    "s": s,
                    "mean": self.mean(s),
                    "x_window": [float(xs[0]), float(xs[-1])],
                    "x_max": float(self.levels[s].x_max),
                }
            )
        return {
            "distribution": self.base.to_dict(),
            "max_level": self.max_level,
            "closed_form": self.closed_form,
            "window": list(self.settings.window),
            "levels": levels,
        }


def build_chain(
    d: DistributionModel,
    S: int,
    settings: Optional[NumericSettings] = None,
    use_closed_form: bool = True,
) -> EquilibriumChain:
    """
    Build the equilibrium ladder of d up to level S.

    Args:
        d: Base distribution
        S: Highest level, at least 1
        settings: Numeric settings (defaults from the global config)
        use_closed_form: Use the analytic ladder when d carries one

    Returns:
        EquilibriumChain with levels 0..S

    Raises:
        LevelError: If S < 1
        NumericError: If a tail integral diverges or quadrature fails

    Example:
        >>> chain = build_chain(make_uniform(1.0), 3)
        >>> chain.mean(2)
        0.3333333333333333
    """
    if not (isinstance(S, (int, np.integer)) and S >= 1):
        raise LevelError(f"Chain depth must be an integer >= 1, got {S}")
    settings = settings or NumericSettings.from_config()

    levels: List[ChainLevel] = [DensityLevel(d, settings)]
    chain = d.closed_form_chain
    if chain is not None and not use_closed_form and d.is_empirical:
        logger.debug(f"{d.name}: empirical ladders are exact, keeping the closed form")
        use_closed_form = True
    closed_form = chain is not None and use_closed_form

    if closed_form:
        for s in range(1, S + 1):
            levels.append(ClosedFormLevel(s, d, chain, settings))
    else:
        levels.append(BaseSurvivalLevel(d, settings))
        for s in range(2, S + 1):
            levels.append(_integrate_level(levels[-1], s, settings))
            logger.debug(
                f"{d.name}: level {s} integrated on [0, {levels[-1].x_max:.4g}], "
                f"mean {levels[-1].mean:.10g}"
            )

    for lvl in levels[1:]:
        if not (math.isfinite(lvl.mean) and lvl.mean > 0):
            raise NumericError(f"Generalized mean of level {lvl.level} is not finite: {lvl.mean}")

    result = EquilibriumChain(d, levels, settings, closed_form)
    logger.info(
        f"Built chain for {d.name} to level {S} "
        f"({'closed form' if closed_form else 'numeric'}); means "
        f"{[round(m, 10) for m in result.means]}"
    )
    return result


def t_bar(chain: EquilibriumChain, s: int, x: Any) -> Any:
    """T_s(x); level 0 returns the density."""
    return chain.survival(s, x)


def t_bar_inverse(chain: EquilibriumChain, s: int, u: Any) -> Any:
    """Generalized inverse of T_s at u in (0, 1)."""
    return chain.inverse(s, u)


def tail_integral(chain: EquilibriumChain, s: int, x: Any) -> Any:
    """int_x^inf T_s(t) dt."""
    return chain.tail_integral(s, x)


def _check_tail(chain: EquilibriumChain, s: int, x: np.ndarray, survival: np.ndarray) -> None:
    cut = chain.settings.tail_survival_cut
    below = survival <= cut
    if np.any(below):
        where = float(np.atleast_1d(x)[np.atleast_1d(below)][0])
        raise TailError(
            f"T_{s}({where:g}) of {chain.name} is below the tail cut {cut:g}"
        )


def failure_rate(chain: EquilibriumChain, s: int, x: Any) -> Any:
    """
    Generalized failure rate r_s(x) = T_{s-1}(x) / (mu_{s-1} T_s(x)).

    Raises:
        LevelError: If s is outside 1..S
        TailError: If T_s(x) is below the tail cut
        NumericError: If s = 1 and the base law has no density
    """
    if s < 1:
        raise LevelError(f"Failure rate needs s >= 1, got {s}")
    arr = np.asarray(x, dtype=float)
    upper = np.asarray(chain.survival(s, arr), dtype=float)
    _check_tail(chain, s, arr, upper)
    lower = np.asarray(chain.survival(s - 1, arr), dtype=float)
    out = lower / (chain.mean(s - 1) * upper)
    return float(out) if arr.ndim == 0 else out


def mrl(chain: EquilibriumChain, s: int, x: Any) -> Any:
    """
    Mean residual life of level s: int_x^inf T_s / T_s(x).

    Raises:
        LevelError: If s is outside 1..S
        TailError: If T_s(x) is below the tail cut
    """
    if s < 1:
        raise LevelError(f"Mean residual life needs s >= 1, got {s}")
    arr = np.asarray(x, dtype=float)
    surv = np.asarray(chain.survival(s, arr), dtype=float)
    _check_tail(chain, s, arr, surv)
    out = np.asarray(chain.tail_integral(s, arr), dtype=float) / surv
    return float(out) if arr.ndim == 0 else out


def cumulative_hazard(chain: EquilibriumChain, s: int, x: Any) -> Any:
    """Cumulative hazard -ln T_s(x); infinite where T_s vanishes."""
    if s < 1:
        raise LevelError(f"Cumulative hazard needs s >= 1, got {s}")
    arr = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = -np.log(np.asarray(chain.survival(s, arr), dtype=float))
    return float(out) if arr.ndim == 0 else out
