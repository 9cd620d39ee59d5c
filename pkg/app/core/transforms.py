"""
Unit-interval transforms of an equilibrium ladder.

All transforms are compositions of two adjacent levels, so a level-s curve
needs level s + 1 of the chain:

- scaled TTT transform      H_s^{-1}(u) = 1 - T_{s+1}(T_s^{-1}(1 - u))
- R-transform pair          R_s^{-1}(u) = T_{s+1}(T_s^{-1}(u)),  R_s(u) = T_s(T_{s+1}^{-1}(u))
- Lorenz curve              L_s(u) = 1 - (J_s(x_u) + x_u (1 - u)) / mu_s,  x_u = T_s^{-1}(1 - u)

where J_s is the tail integral of level s. The Lorenz identity avoids
integrating a quantile function that diverges at u = 1.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from app.core.distributions import make_empirical
from app.core.equilibrium import EquilibriumChain
from app.core.exceptions import DomainError, LevelError
from app.core.logger import logger

CURVE_COLUMNS = ["u", "value", "kind", "s"]


class CurveKind(Enum):
    """Transforms emitted as unit curves."""

    TTT = "TTT"
    R_INV = "R_inv"
    R = "R"
    LORENZ = "Lorenz"


@dataclass
class UnitCurve:
    """
    A sampled function on [0, 1].

    Attributes:
        u_knots: Increasing abscissae in [0, 1]
        values: Curve values at the knots
        kind: Which transform the curve samples
        s: Chain level the curve was computed at
        name: Label of the source distribution
    """

    u_knots: np.ndarray
    values: np.ndarray
    kind: CurveKind
    s: int
    name: str = ""

    def __post_init__(self):
        self.u_knots = np.asarray(self.u_knots, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.u_knots.shape != self.values.shape:
            raise DomainError("Curve knots and values differ in length")
        if np.any(np.diff(self.u_knots) <= 0):
            raise DomainError("Curve knots must be strictly increasing")

    def evaluate(self, u: Any) -> Any:
        """Linear interpolation between knots."""
        return np.interp(u, self.u_knots, self.values)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "u": self.u_knots,
                "value": self.values,
                "kind": self.kind.value,
                "s": self.s,
            },
            columns=CURVE_COLUMNS,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "s": self.s,
            "name": self.name,
            "u": self.u_knots.tolist(),
            "value": self.values.tolist(),
        }


def _unit_points(u: Any) -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    outside = ~((arr >= 0.0) & (arr <= 1.0))
    if np.any(outside):
        raise DomainError(f"Curve argument must lie in [0, 1], got {np.atleast_1d(arr)[np.atleast_1d(outside)][0]}")
    return arr


def _require_pair(chain: EquilibriumChain, s: int) -> None:
    if not (isinstance(s, (int, np.integer)) and s >= 1):
        raise LevelError(f"Transforms are defined for s >= 1, got {s}")
    if s + 1 > chain.max_level:
        raise LevelError(
            f"Level {s} transform needs level {s + 1}; chain for {chain.name} "
            f"stops at {chain.max_level}"
        )


def _compose(chain: EquilibriumChain, outer: int, inner: int, u: Any) -> Any:
    """T_outer(T_inner^{-1}(u)) with the endpoints 0 -> 0 and 1 -> 1 fixed."""
    arr = _unit_points(u)
    flat = np.atleast_1d(arr).ravel()
    out = flat.copy()
    interior = (flat > 0.0) & (flat < 1.0)
    if np.any(interior):
        x = chain.inverse(inner, flat[interior])
        out[interior] = chain.survival(outer, x)
    out = np.clip(out, 0.0, 1.0).reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out


def ttt(chain: EquilibriumChain, s: int, u: Any) -> Any:
    """
    Scaled total-time-on-test transform of level s.

    Computed as 1 - T_{s+1}(T_s^{-1}(1 - u)); the endpoints are exact.

    Raises:
        LevelError: If the chain lacks level s + 1
        DomainError: If u is outside [0, 1]

    Example:
        >>> ttt(build_chain(make_uniform(1.0), 2), 1, 0.5)
        0.75
    """
    _require_pair(chain, s)
    arr = _unit_points(u)
    out = 1.0 - np.asarray(_compose(chain, s + 1, s, 1.0 - arr), dtype=float)
    return float(out) if arr.ndim == 0 else out


def r_transform_inv(chain: EquilibriumChain, s: int, u: Any) -> Any:
    """R_s^{-1}(u) = T_{s+1}(T_s^{-1}(u))."""
    _require_pair(chain, s)
    return _compose(chain, s + 1, s, u)


def r_transform(chain: EquilibriumChain, s: int, u: Any) -> Any:
    """R_s(u) = T_s(T_{s+1}^{-1}(u)), the inverse of r_transform_inv."""
    _require_pair(chain, s)
    return _compose(chain, s, s + 1, u)


def ttt_inverse(chain: EquilibriumChain, s: int, v: Any) -> Any:
    """Inverse of the scaled TTT transform: H_s(v) = 1 - T_s(T_{s+1}^{-1}(1 - v))."""
    _require_pair(chain, s)
    arr = _unit_points(v)
    out = 1.0 - np.asarray(_compose(chain, s, s + 1, 1.0 - arr), dtype=float)
    return float(out) if arr.ndim == 0 else out


def lorenz(chain: EquilibriumChain, s: int, u: Any) -> Any:
    """
    Lorenz curve of the level-s law.

    Raises:
        LevelError: If s is outside 1..S
        DomainError: If u is outside [0, 1]
        NumericError: If the tail integral or inversion fails

    Example:
        >>> round(lorenz(build_chain(make_exponential(1.0), 1), 1, 0.5), 6)
        0.153426
    """
    if not (isinstance(s, (int, np.integer)) and 1 <= s <= chain.max_level):
        raise LevelError(f"Lorenz curve needs 1 <= s <= {chain.max_level}, got {s}")
    arr = _unit_points(u)
    flat = np.atleast_1d(arr).ravel()
    out = flat.copy()
    interior = (flat > 0.0) & (flat < 1.0)
    if np.any(interior):
        q = flat[interior]
        x = np.asarray(chain.inverse(s, 1.0 - q), dtype=float)
        tail = np.asarray(chain.tail_integral(s, x), dtype=float)
        out[interior] = 1.0 - (tail + x * (1.0 - q)) / chain.mean(s)
    out = np.clip(out, 0.0, 1.0).reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out


_CURVE_FUNCTIONS = {
    CurveKind.TTT: ttt,
    CurveKind.R_INV: r_transform_inv,
    CurveKind.R: r_transform,
    CurveKind.LORENZ: lorenz,
}


def level_curve(chain: EquilibriumChain, s: int, kind: CurveKind) -> UnitCurve:
    """Sample one transform of level s on {0} + the chain's u-grid + {1}."""
    u = np.concatenate(([0.0], chain.u_grid, [1.0]))
    values = np.asarray(_CURVE_FUNCTIONS[kind](chain, s, u), dtype=float)
    logger.debug(f"{chain.name}: sampled {kind.value} curve at level {s}")
    return UnitCurve(u, values, kind, s, chain.name)


def empirical_ttt(sample: Iterable[float]) -> UnitCurve:
    """
    Scaled TTT statistic of a lifetime sample.

    Knot i/n carries (sum of the i smallest + (n - i) * x_(i)) / total, with
    (0, 0) prepended; the curve is linear between knots.

    Raises:
        DataError: If the sample is empty or has a nonpositive value
    """
    model = make_empirical(sample)
    xs = np.asarray(model.sample, dtype=float)
    n = xs.size
    i = np.arange(1, n + 1)
    partial = np.cumsum(xs)
    values = (partial + (n - i) * xs) / partial[-1]
    return UnitCurve(
        np.concatenate(([0.0], i / n)),
        np.concatenate(([0.0], values)),
        CurveKind.TTT,
        1,
        model.name,
    )


def curves_frame(curves: Iterable[UnitCurve]) -> pd.DataFrame:
    """Stack curves into one table with columns u, value, kind, s."""
    frames: List[pd.DataFrame] = [c.to_frame() for c in curves]
    if not frames:
        return pd.DataFrame(columns=CURVE_COLUMNS)
    return pd.concat(frames, ignore_index=True)


def write_curves_csv(curves: Iterable[UnitCurve], path: str) -> Path:
    """
    Write curves as CSV with 15 significant digits.

    Args:
        curves: Curves to write
        path: Output file path (parent directories are created)

    Returns:
        Path of the written file
    """
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    curves_frame(curves).to_csv(out, index=False, float_format="%.15g")
    logger.info(f"Wrote curves to {out}")
    return out


def all_curves(
    chain: EquilibriumChain,
    levels: Optional[Iterable[int]] = None,
    kinds: Optional[Iterable[CurveKind]] = None,
) -> List[UnitCurve]:
    """Every requested transform at every requested level (default 1..S-1)."""
    levels = list(levels) if levels is not None else list(range(1, chain.max_level))
    kinds = list(kinds) if kinds is not None else list(CurveKind)
    return [level_curve(chain, s, kind) for s in levels for kind in kinds]
