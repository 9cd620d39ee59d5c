"""
Grid-based shape deciders.

Every test returns a three-valued ShapeVerdict. Margins are normalized by the
sampled amplitude of the tested function (max |f|, floored at 1e-300), so a
verdict does not change when the input is multiplied by a positive constant.

Monotonicity is decided by the running-extremum drawdown: a sample that drops
more than tol below an earlier maximum fails; otherwise the net rise decides
between holds (rise > tol) and inconclusive. Convexity tests the secant slopes
this way and star-shape tests f(x)/x.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from app.core.exceptions import GridError

MIN_SAMPLES = 16
SCALE_FLOOR = 1e-300
PAIR_SEED = 20240611

PLUS = "+"
MINUS = "-"


class Verdict(Enum):
    """Three-valued outcome of a shape test."""

    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"

    def flipped(self) -> "Verdict":
        if self is Verdict.HOLDS:
            return Verdict.FAILS
        if self is Verdict.FAILS:
            return Verdict.HOLDS
        return self


@dataclass
class ShapeVerdict:
    """
    Result of one shape test.

    Attributes:
        holds: Three-valued outcome
        margin: Signed slack normalized by the function scale
        witnesses: Up to three abscissae where the test is tightest or violated
        window: (low, high) range actually tested
        predicate: Name of the tested property
        reason: Why the test is inconclusive, when it could not run
        curvature: Smallest second difference (slope step) over the slope scale
            (convexity tests only)
    """

    holds: Verdict
    margin: float
    witnesses: Tuple[float, ...] = ()
    window: Tuple[float, float] = (float("nan"), float("nan"))
    predicate: str = ""
    reason: Optional[str] = None
    curvature: Optional[float] = None

    @property
    def conclusive(self) -> bool:
        return self.holds is not Verdict.INCONCLUSIVE

    @classmethod
    def unavailable(cls, predicate: str, reason: str) -> "ShapeVerdict":
        """Inconclusive verdict for a test that could not be evaluated."""
        return cls(Verdict.INCONCLUSIVE, float("nan"), (), (float("nan"), float("nan")), predicate, reason)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "predicate": self.predicate,
            "holds": self.holds.value,
            "margin": self.margin,
            "witnesses": list(self.witnesses),
            "window": list(self.window),
            "reason": self.reason,
            "curvature": self.curvature,
        }


def _classify(margin: float, tol: float) -> Verdict:
    if margin < -tol:
        return Verdict.FAILS
    if margin > tol:
        return Verdict.HOLDS
    return Verdict.INCONCLUSIVE


def _scale(*arrays: np.ndarray) -> float:
    amplitude = max(float(np.max(np.abs(a))) if a.size else 0.0 for a in arrays)
    return max(amplitude, SCALE_FLOOR)


def _samples(
    x: Sequence[float], f: Sequence[float], minimum: int = MIN_SAMPLES
) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    if x.ndim != 1 or x.shape != f.shape:
        raise GridError("Abscissae and values must be 1-d arrays of equal length")
    if x.size < minimum:
        raise GridError(f"Shape test needs at least {minimum} samples, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(f))):
        raise GridError("Shape test received non-finite samples")
    if np.any(np.diff(x) <= 0):
        raise GridError("Abscissae must be strictly increasing")
    return x, f


def _drawdown(
    x: np.ndarray,
    g: np.ndarray,
    scale: float,
    tol: float,
    predicate: str,
    window: Tuple[float, float],
) -> ShapeVerdict:
    """Decide whether g is nondecreasing along x."""
    peak = np.maximum.accumulate(g)
    drop = (peak - g) / scale
    worst = int(np.argmax(drop))
    if drop[worst] > tol:
        peak_at = int(np.argmax(g[: worst + 1]))
        return ShapeVerdict(
            Verdict.FAILS,
            -float(drop[worst]),
            (float(x[peak_at]), float(x[worst])),
            window,
            predicate,
        )
    rise = float(g[-1] - g[0]) / scale
    tightest = int(np.argmin(np.diff(g))) if g.size > 1 else 0
    return ShapeVerdict(_classify(rise, tol), rise, (float(x[tightest]),), window, predicate)


def is_monotone(
    x: Sequence[float],
    f: Sequence[float],
    increasing: bool = True,
    tol: float = 1e-7,
    scale: Optional[float] = None,
) -> ShapeVerdict:
    """
    Test whether sampled f is increasing (or decreasing) along x.

    Args:
        x: Strictly increasing abscissae (at least 16)
        f: Function values
        increasing: Direction to test
        tol: Tolerance on normalized drops and rise
        scale: Normalizer (defaults to max |f|)

    Returns:
        ShapeVerdict

    Raises:
        GridError: If there are too few or invalid samples
    """
    x, f = _samples(x, f)
    norm = scale if scale is not None else _scale(f)
    g = f if increasing else -f
    return _drawdown(
        x, g, max(norm, SCALE_FLOOR), tol, "increasing" if increasing else "decreasing", (float(x[0]), float(x[-1]))
    )


def _slope_test(x: np.ndarray, f: np.ndarray, convex: bool, tol: float) -> ShapeVerdict:
    x, f = _samples(x, f)
    slopes = np.diff(f) / np.diff(x)
    mid = 0.5 * (x[1:] + x[:-1])
    slope_scale = _scale(f) / (x[-1] - x[0])
    g = slopes if convex else -slopes
    verdict = _drawdown(mid, g, slope_scale, tol, "convex" if convex else "concave", (float(x[0]), float(x[-1])))
    # Worst single slope step; never below minus the drawdown
    verdict.curvature = float(np.min(np.diff(g))) / slope_scale
    return verdict


def is_convex(x: Sequence[float], f: Sequence[float], tol: float = 1e-6) -> ShapeVerdict:
    """
    Convexity of sampled f: secant slopes must not decrease.

    Example:
        >>> x = np.linspace(0, 4, 64)
        >>> is_convex(x, x**2).holds
        <Verdict.HOLDS: 'holds'>
    """
    return _slope_test(np.asarray(x, dtype=float), np.asarray(f, dtype=float), True, tol)


def is_concave(x: Sequence[float], f: Sequence[float], tol: float = 1e-6) -> ShapeVerdict:
    """Concavity of sampled f: secant slopes must not increase."""
    return _slope_test(np.asarray(x, dtype=float), np.asarray(f, dtype=float), False, tol)


def _ratio_test(x: Sequence[float], f: Sequence[float], star: bool, tol: float) -> ShapeVerdict:
    x, f = _samples(x, f)
    if np.any(x <= 0):
        raise GridError("Star-shape tests need strictly positive abscissae")
    ratio = f / x
    g = ratio if star else -ratio
    return _drawdown(
        x, g, _scale(ratio), tol, "star-shaped" if star else "antistar-shaped", (float(x[0]), float(x[-1]))
    )


def is_star_shaped(x: Sequence[float], f: Sequence[float], tol: float = 1e-7) -> ShapeVerdict:
    """Star shape of sampled f: f(x)/x must not decrease."""
    return _ratio_test(x, f, True, tol)


def is_antistar_shaped(x: Sequence[float], f: Sequence[float], tol: float = 1e-7) -> ShapeVerdict:
    """Antistar shape of sampled f: f(x)/x must not increase."""
    return _ratio_test(x, f, False, tol)


def low_discrepancy_pairs(n: int, seed: int = PAIR_SEED) -> np.ndarray:
    """
    Deterministic scrambled Sobol points in the unit square.

    Args:
        n: Number of pairs
        seed: Scrambling seed

    Returns:
        Array of shape (n, 2)
    """
    if n < 1:
        raise GridError(f"Pair budget must be positive, got {n}")
    sampler = qmc.Sobol(d=2, scramble=True, rng=np.random.default_rng(seed))
    m = int(np.ceil(np.log2(n)))
    return sampler.random_base2(m)[:n]


def additivity_pairs(
    lower: float, upper: float, pair_budget: int, seed: int = PAIR_SEED
) -> np.ndarray:
    """
    Pairs (x, y) with lower <= x, y <= upper / 2, so x + y stays in [0, upper].

    Raises:
        GridError: If the domain holds no such pair
    """
    half = 0.5 * upper
    if not (np.isfinite(half) and half > lower >= 0.0):
        raise GridError(f"Domain [{lower:g}, {upper:g}] is too small for additivity pairs")
    return lower + (half - lower) * low_discrepancy_pairs(pair_budget, seed)


def _additivity(
    f: Callable[[np.ndarray], np.ndarray],
    lower: float,
    upper: float,
    super_: bool,
    pair_budget: int,
    tol: float,
    seed: int,
) -> ShapeVerdict:
    pairs = additivity_pairs(lower, upper, pair_budget, seed)
    x, y = pairs[:, 0], pairs[:, 1]
    fx = np.asarray(f(x), dtype=float)
    fy = np.asarray(f(y), dtype=float)
    fxy = np.asarray(f(x + y), dtype=float)
    if not (np.all(np.isfinite(fx)) and np.all(np.isfinite(fy)) and np.all(np.isfinite(fxy))):
        raise GridError("Additivity test received non-finite samples")
    slack = fxy - fx - fy
    if not super_:
        slack = -slack
    return pairwise_verdict(
        x,
        y,
        slack,
        _scale(fx, fy, fxy),
        tol,
        "superadditive" if super_ else "subadditive",
        (lower, upper),
    )


def pairwise_verdict(
    x: np.ndarray,
    y: np.ndarray,
    slack: np.ndarray,
    scale: float,
    tol: float,
    predicate: str,
    window: Tuple[float, float],
) -> ShapeVerdict:
    """
    Verdict for a family of pairwise slacks that should be nonnegative.

    Fails when the worst slack is below -tol; holds when no slack is and the
    largest exceeds tol. Witnesses are x, y and x + y of the deciding pair.
    """
    norm = slack / max(scale, SCALE_FLOOR)
    worst = int(np.argmin(norm))
    if norm[worst] < -tol:
        return ShapeVerdict(
            Verdict.FAILS,
            float(norm[worst]),
            (float(x[worst]), float(y[worst]), float(x[worst] + y[worst])),
            window,
            predicate,
        )
    best = int(np.argmax(norm))
    margin = float(norm[best])
    return ShapeVerdict(
        _classify(margin, tol),
        margin,
        (float(x[worst]), float(y[worst]), float(x[worst] + y[worst])),
        window,
        predicate,
    )


def is_superadditive(
    f: Callable[[np.ndarray], np.ndarray],
    lower: float,
    upper: float,
    pair_budget: int = 4096,
    tol: float = 1e-7,
    seed: int = PAIR_SEED,
) -> ShapeVerdict:
    """
    Super-additivity f(x + y) >= f(x) + f(y) over low-discrepancy pairs.

    Args:
        f: Vectorized function on [0, upper]
        lower: Smallest pair coordinate
        upper: Largest sum x + y
        pair_budget: Number of pairs
        tol: Tolerance on normalized slack
        seed: Pair scrambling seed

    Raises:
        GridError: If the domain is too small for any pair
    """
    return _additivity(f, lower, upper, True, pair_budget, tol, seed)


def is_subadditive(
    f: Callable[[np.ndarray], np.ndarray],
    lower: float,
    upper: float,
    pair_budget: int = 4096,
    tol: float = 1e-7,
    seed: int = PAIR_SEED,
) -> ShapeVerdict:
    """Sub-additivity f(x + y) <= f(x) + f(y) over low-discrepancy pairs."""
    return _additivity(f, lower, upper, False, pair_budget, tol, seed)


def dominates(
    x: Sequence[float],
    lhs: Sequence[float],
    rhs: Sequence[float],
    tol: float = 1e-7,
    predicate: str = "dominates",
) -> ShapeVerdict:
    """
    Pointwise inequality lhs >= rhs on a grid.

    Normalized by the larger amplitude of the two sides.

    Raises:
        GridError: If the inputs are empty, mismatched or non-finite
    """
    x = np.asarray(x, dtype=float)
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if x.size == 0 or x.shape != lhs.shape or x.shape != rhs.shape:
        raise GridError("Dominance test needs nonempty arrays of equal length")
    if not (np.all(np.isfinite(lhs)) and np.all(np.isfinite(rhs))):
        raise GridError("Dominance test received non-finite samples")
    slack = (lhs - rhs) / _scale(lhs, rhs)
    worst = int(np.argmin(slack))
    window = (float(np.min(x)), float(np.max(x)))
    if slack[worst] < -tol:
        return ShapeVerdict(Verdict.FAILS, float(slack[worst]), (float(x[worst]),), window, predicate)
    margin = float(np.max(slack))
    return ShapeVerdict(_classify(margin, tol), margin, (float(x[worst]),), window, predicate)


@dataclass(frozen=True)
class SignPattern:
    """
    Compressed sign sequence of sampled differences.

    Attributes:
        signs: Alternating "+" / "-" symbols, one per run
    """

    signs: Tuple[str, ...] = ()

    @property
    def change_count(self) -> int:
        return max(len(self.signs) - 1, 0)

    def flipped(self) -> "SignPattern":
        return SignPattern(tuple(MINUS if s == PLUS else PLUS for s in self.signs))

    def allows(self, pattern: Sequence[str]) -> bool:
        """True when these signs occur as a contiguous run of pattern."""
        allowed = tuple(pattern)
        k = len(self.signs)
        if k == 0:
            return True
        return any(allowed[i : i + k] == self.signs for i in range(len(allowed) - k + 1))

    def to_dict(self) -> Dict[str, Any]:
        return {"signs": "".join(self.signs), "change_count": self.change_count}


def sign_pattern(
    values: Sequence[float], dead_band: float = 1e-9, scale: Optional[float] = None
) -> SignPattern:
    """
    Sign pattern of sampled values.

    Values with |v| <= dead_band * scale are dropped (scale defaults to the
    largest |v|); consecutive equal signs are merged.

    Raises:
        GridError: If values is empty or non-finite
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise GridError("Sign pattern needs at least one value")
    if not np.all(np.isfinite(v)):
        raise GridError("Sign pattern received non-finite values")
    norm = scale if scale is not None else _scale(v)
    kept = v[np.abs(v) > dead_band * norm]
    signs = []
    for value in kept:
        symbol = PLUS if value > 0 else MINUS
        if not signs or signs[-1] != symbol:
            signs.append(symbol)
    return SignPattern(tuple(signs))
