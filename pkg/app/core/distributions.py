"""
Lifetime distribution models.

A DistributionModel bundles the survival, density and quantile evaluators of
one lifetime law on [0, inf) together with its support and finite mean.
Parametric families are backed by frozen ``scipy.stats`` distributions; the
exponential, uniform, integer-shape gamma and empirical laws also carry an
analytic equilibrium ladder (ClosedFormChain).

Distribution specs used by the command line look like::

    family=weibull param.shape=2 param.scale=1
    data=samples.csv
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import stats
from scipy.special import gammaln, logsumexp, xlogy

from app.core.exceptions import DataError, ParameterError, SpecParseError
from app.core.logger import logger

ArrayFn = Callable[[Any], Any]

# Parameter names accepted in distribution specs, per family
FAMILY_PARAMS: Dict[str, Tuple[str, ...]] = {
    "exponential": ("rate",),
    "weibull": ("shape", "scale"),
    "gamma": ("shape", "rate"),
    "uniform": ("upper",),
}

# Rows per chunk when evaluating empirical ladders (bounds n x m temporaries)
_EMPIRICAL_CHUNK_CELLS = 2_000_000


def vectorized(fn: Callable[[np.ndarray], np.ndarray]) -> ArrayFn:
    """
    Wrap an array function so scalars in give floats out.

    Args:
        fn: Function mapping a float ndarray to an ndarray of the same shape

    Returns:
        Evaluator accepting scalars or array-likes
    """

    def evaluate(x: Any) -> Any:
        arr = np.asarray(x, dtype=float)
        out = np.asarray(fn(arr), dtype=float)
        if arr.ndim == 0:
            return float(out)
        return out

    return evaluate


@dataclass(frozen=True)
class SupportInterval:
    """Support [lower, upper) of a lifetime law; upper may be infinite."""

    lower: float = 0.0
    upper: float = math.inf

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ParameterError(
                f"Support lower bound {self.lower} must be below upper bound {self.upper}"
            )

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.upper)


@dataclass(frozen=True)
class ClosedFormChain:
    """
    Analytic equilibrium ladder of a lifetime law.

    Attributes:
        survival: (s, x) -> T_s(x) for s >= 1
        mean: s -> generalized mean of level s (level 0 is the density, mean 1)
        inverse: optional (s, u) -> T_s^{-1}(u); may return None for levels
            without an analytic inverse
    """

    survival: Callable[[int, np.ndarray], np.ndarray]
    mean: Callable[[int], float]
    inverse: Optional[Callable[[int, np.ndarray], Optional[np.ndarray]]] = None


@dataclass(frozen=True, eq=False)
class DistributionModel:
    """
    Survival, density and quantile evaluators for one lifetime law.

    Attributes:
        name: Human-readable label, e.g. "weibull(shape=2, scale=1)"
        family: Family key ("exponential", "weibull", "gamma", "uniform", "empirical")
        params: Family parameters as given
        survival: x -> P(X > x)
        density: x -> f(x); None for the empirical step law
        quantile: u -> inf{x: F(x) >= u}
        inverse_survival: u -> inf{x: survival(x) <= u}, accurate in the upper tail
        support: Support interval
        mean: Finite mean
        closed_form_chain: Optional analytic equilibrium ladder
        sample: Sorted observations for empirical laws
    """

    name: str
    family: str
    params: Dict[str, float]
    survival: ArrayFn
    density: Optional[ArrayFn]
    quantile: ArrayFn
    inverse_survival: ArrayFn
    support: SupportInterval
    mean: float
    closed_form_chain: Optional[ClosedFormChain] = None
    sample: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if not (math.isfinite(self.mean) and self.mean > 0):
            raise ParameterError(
                f"{self.name}: mean must be finite and positive, got {self.mean}"
            )

    @property
    def support_upper(self) -> float:
        return self.support.upper

    @property
    def is_empirical(self) -> bool:
        return self.family == "empirical"

    def scaled(self, theta: float) -> "DistributionModel":
        """
        Return the law of X / theta, i.e. survival(x) = self.survival(theta * x).

        Args:
            theta: Positive scale factor

        Returns:
            New DistributionModel with every ladder level rescaled

        Raises:
            ParameterError: If theta is not positive
        """
        if not theta > 0:
            raise ParameterError(f"Scale factor must be positive, got {theta}")
        base = self

        chain = None
        if base.closed_form_chain is not None:
            cf = base.closed_form_chain

            def cf_inverse(s: int, u: np.ndarray) -> Optional[np.ndarray]:
                if cf.inverse is None:
                    return None
                result = cf.inverse(s, u)
                return None if result is None else np.asarray(result) / theta

            chain = ClosedFormChain(
                survival=lambda s, x: cf.survival(s, theta * np.asarray(x, dtype=float)),
                mean=lambda s: cf.mean(s) if s == 0 else cf.mean(s) / theta,
                inverse=cf_inverse,
            )

        density = None
        if base.density is not None:
            density = vectorized(lambda x: theta * np.asarray(base.density(theta * x)))

        return DistributionModel(
            name=f"{base.name} scaled by {theta:g}",
            family=base.family,
            params={**base.params, "theta": theta},
            survival=vectorized(lambda x: base.survival(theta * x)),
            density=density,
            quantile=vectorized(lambda u: np.asarray(base.quantile(u)) / theta),
            inverse_survival=vectorized(
                lambda u: np.asarray(base.inverse_survival(u)) / theta
            ),
            support=SupportInterval(0.0, base.support.upper / theta),
            mean=base.mean / theta,
            closed_form_chain=chain,
            sample=None
            if base.sample is None
            else tuple(v / theta for v in base.sample),
        )

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for report echo."""
        result: Dict[str, Any] = {
            "name": self.name,
            "family": self.family,
            "params": dict(self.params),
            "mean": self.mean,
            "support_upper": self.support.upper if self.support.bounded else None,
            "closed_form_chain": self.closed_form_chain is not None,
        }
        if self.sample is not None:
            result["sample_size"] = len(self.sample)
        return result


def _require_positive(family: str, **params: float) -> None:
    for key, value in params.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise ParameterError(f"{family}: parameter '{key}' must be positive, got {value}")


def _from_frozen(
    name: str,
    family: str,
    params: Dict[str, float],
    frozen: Any,
    upper: float = math.inf,
    chain: Optional[ClosedFormChain] = None,
) -> DistributionModel:
    return DistributionModel(
        name=name,
        family=family,
        params=params,
        survival=vectorized(frozen.sf),
        density=vectorized(frozen.pdf),
        quantile=vectorized(frozen.ppf),
        inverse_survival=vectorized(frozen.isf),
        support=SupportInterval(0.0, upper),
        mean=float(frozen.mean()),
        closed_form_chain=chain,
    )


def make_exponential(rate: float) -> DistributionModel:
    """
    Exponential law with survival exp(-rate * x).

    Every equilibrium level equals the base law, so the closed-form ladder
    is T_s(x) = exp(-rate * x) with generalized mean 1 / rate.

    Args:
        rate: Positive failure rate

    Returns:
        DistributionModel with a closed-form chain

    Raises:
        ParameterError: If rate is not positive

    Example:
        >>> make_exponential(1.0).survival(math.log(2))
        0.5
    """
    _require_positive("exponential", rate=rate)

    def survival(s: int, x: np.ndarray) -> np.ndarray:
        return np.exp(-rate * np.maximum(np.asarray(x, dtype=float), 0.0))

    def mean(s: int) -> float:
        return 1.0 if s == 0 else 1.0 / rate

    def inverse(s: int, u: np.ndarray) -> np.ndarray:
        return -np.log(np.asarray(u, dtype=float)) / rate

    return _from_frozen(
        f"exponential(rate={rate:g})",
        "exponential",
        {"rate": float(rate)},
        stats.expon(scale=1.0 / rate),
        chain=ClosedFormChain(survival=survival, mean=mean, inverse=inverse),
    )


def make_weibull(shape: float, scale: float) -> DistributionModel:
    """
    Weibull law with survival exp(-(x / scale) ** shape).

    Args:
        shape: Positive shape parameter
        scale: Positive scale parameter

    Returns:
        DistributionModel evaluated through the numeric ladder

    Raises:
        ParameterError: If a parameter is not positive
    """
    _require_positive("weibull", shape=shape, scale=scale)
    return _from_frozen(
        f"weibull(shape={shape:g}, scale={scale:g})",
        "weibull",
        {"shape": float(shape), "scale": float(scale)},
        stats.weibull_min(c=shape, scale=scale),
    )


def make_uniform(upper: float) -> DistributionModel:
    """
    Uniform law on [0, upper]; level s of its ladder is (1 - x / upper) ** s.

    Raises:
        ParameterError: If upper is not positive
    """
    _require_positive("uniform", upper=upper)

    def survival(s: int, x: np.ndarray) -> np.ndarray:
        return np.clip(1.0 - np.asarray(x, dtype=float) / upper, 0.0, 1.0) ** s

    def mean(s: int) -> float:
        return 1.0 if s == 0 else upper / (s + 1.0)

    def inverse(s: int, u: np.ndarray) -> np.ndarray:
        return upper * (1.0 - np.asarray(u, dtype=float) ** (1.0 / s))

    return _from_frozen(
        f"uniform(upper={upper:g})",
        "uniform",
        {"upper": float(upper)},
        stats.uniform(loc=0.0, scale=upper),
        upper=float(upper),
        chain=ClosedFormChain(survival=survival, mean=mean, inverse=inverse),
    )


def _gamma_ladder(shape: int, rate: float) -> ClosedFormChain:
    """
    Closed-form ladder of an integer-shape gamma law.

    Level s is exp(-y) * sum_j c_j y**j / j! with y = rate * x. Integrating from
    x to infinity replaces c by its reverse cumulative sum, scaled by 1 / rate.
    The sum is taken in log space so large shapes neither overflow j! nor y**j.
    """
    powers = np.arange(shape, dtype=float)
    log_factorials = gammaln(powers + 1.0)

    def coefficients(s: int) -> np.ndarray:
        coeffs = np.zeros(shape)
        coeffs[shape - 1] = rate
        for _ in range(s):
            tail = np.cumsum(coeffs[::-1])[::-1]
            coeffs = tail / tail[0]
        return coeffs

    def survival(s: int, x: np.ndarray) -> np.ndarray:
        y = rate * np.maximum(np.asarray(x, dtype=float), 0.0)
        with np.errstate(divide="ignore"):
            log_coeffs = np.log(coefficients(s)) - log_factorials
        terms = log_coeffs + xlogy(powers, y[..., np.newaxis])
        return np.exp(logsumexp(terms, axis=-1) - y)

    def mean(s: int) -> float:
        return float(np.sum(coefficients(s)) / rate)

    return ClosedFormChain(survival=survival, mean=mean)


def make_gamma(
    shape: float, rate: float, closed_form: Optional[bool] = None
) -> DistributionModel:
    """
    Gamma law with the given shape and rate.

    Args:
        shape: Positive shape parameter
        rate: Positive rate parameter
        closed_form: Attach the analytic ladder. None attaches it whenever the
            shape is a positive integer.

    Returns:
        DistributionModel

    Raises:
        ParameterError: If a parameter is not positive, or closed_form is True
            for a non-integer shape

    Example:
        >>> round(make_gamma(2, 1).survival(1.0), 6)
        0.735759
    """
    _require_positive("gamma", shape=shape, rate=rate)
    integer_shape = float(shape).is_integer()
    if closed_form and not integer_shape:
        raise ParameterError(
            f"gamma: closed-form chain needs an integer shape, got {shape}"
        )
    use_chain = integer_shape if closed_form is None else bool(closed_form)
    chain = _gamma_ladder(int(shape), rate) if use_chain else None
    return _from_frozen(
        f"gamma(shape={shape:g}, rate={rate:g})",
        "gamma",
        {"shape": float(shape), "rate": float(rate)},
        stats.gamma(a=shape, scale=1.0 / rate),
        chain=chain,
    )


def _empirical_ladder(xs: np.ndarray) -> ClosedFormChain:
    n = xs.size
    chunk = max(1, _EMPIRICAL_CHUNK_CELLS // n)

    def survival(s: int, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if s == 1:
            return (n - np.searchsorted(xs, x, side="right")) / n
        flat = x.ravel()
        out = np.empty_like(flat)
        norm = np.sum(xs ** (s - 1))
        for start in range(0, flat.size, chunk):
            block = flat[start : start + chunk]
            gaps = np.maximum(xs[None, :] - block[:, None], 0.0)
            out[start : start + chunk] = np.sum(gaps ** (s - 1), axis=1) / norm
        return out.reshape(x.shape)

    def mean(s: int) -> float:
        if s == 0:
            return 1.0
        return float(np.sum(xs**s) / (s * np.sum(xs ** (s - 1))))

    def inverse(s: int, u: np.ndarray) -> Optional[np.ndarray]:
        if s != 1:
            return None
        return _step_inverse_survival(xs, u)

    return ClosedFormChain(survival=survival, mean=mean, inverse=inverse)


def _step_inverse_survival(xs: np.ndarray, u: Any) -> np.ndarray:
    # inf{x: #(xs > x) / n <= u} is the order statistic of rank ceil(n (1 - u))
    n = xs.size
    u = np.asarray(u, dtype=float)
    rank = np.ceil(n * (1.0 - u) - n * 1e-12).astype(int)
    rank = np.clip(rank, 0, n)
    return np.where(rank == 0, 0.0, xs[np.maximum(rank - 1, 0)])


def make_empirical(sample: Iterable[float], name: str = "empirical") -> DistributionModel:
    """
    Empirical step law of a lifetime sample.

    The survival is right-continuous, survival(x) = #(x_j > x) / n, and the
    quantile is the generalized inverse inf{x: F(x) >= u}.

    Args:
        sample: Positive observations
        name: Label used in reports

    Returns:
        DistributionModel with an exact (piecewise polynomial) ladder

    Raises:
        DataError: If the sample is empty or holds a nonpositive value
    """
    try:
        xs = np.sort(np.asarray(list(sample), dtype=float).ravel())
    except (TypeError, ValueError) as e:
        raise DataError(f"Sample is not numeric: {e}")
    if xs.size == 0:
        raise DataError("Sample is empty")
    if not np.all(np.isfinite(xs)) or np.any(xs <= 0):
        raise DataError("Sample values must be finite and positive")

    n = xs.size

    def survival(x: np.ndarray) -> np.ndarray:
        return (n - np.searchsorted(xs, x, side="right")) / n

    def quantile(u: np.ndarray) -> np.ndarray:
        rank = np.clip(np.ceil(n * u - n * 1e-12).astype(int), 0, n)
        return np.where(rank == 0, 0.0, xs[np.maximum(rank - 1, 0)])

    return DistributionModel(
        name=f"{name}(n={n})",
        family="empirical",
        params={"n": float(n)},
        survival=vectorized(survival),
        density=None,
        quantile=vectorized(quantile),
        inverse_survival=vectorized(lambda u: _step_inverse_survival(xs, u)),
        support=SupportInterval(0.0, float(xs[-1])),
        mean=float(np.mean(xs)),
        closed_form_chain=_empirical_ladder(xs),
        sample=tuple(float(v) for v in xs),
    )


def load_sample(path: str) -> list:
    """
    Read one positive real per line from a CSV file.

    A non-numeric first row is treated as a header; blank lines are skipped.

    Args:
        path: CSV file path

    Returns:
        List of observations

    Raises:
        DataError: If the file is missing, empty or holds invalid values
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise DataError(f"Data file not found: {path}")
    try:
        frame = pd.read_csv(
            file_path, header=None, usecols=[0], skip_blank_lines=True, dtype=str
        )
    except pd.errors.EmptyDataError:
        raise DataError(f"Data file is empty: {path}")
    except (pd.errors.ParserError, ValueError, UnicodeDecodeError) as e:
        raise DataError(f"Could not read data file {path}: {e}")

    column = frame.iloc[:, 0].str.strip()
    values = pd.to_numeric(column, errors="coerce")
    if len(values) and np.isnan(values.iloc[0]):
        logger.debug(f"Treating first row of {path} as header: {column.iloc[0]!r}")
        values = values.iloc[1:]
    if values.empty:
        raise DataError(f"Data file has no observations: {path}")
    if values.isna().any():
        bad = column[values.index[values.isna()]].iloc[0]
        raise DataError(f"Non-numeric value {bad!r} in {path}")
    sample = values.astype(float).tolist()
    if any(v <= 0 for v in sample):
        raise DataError(f"Data file {path} holds nonpositive values")
    return sample


_FACTORIES: Dict[str, Callable[..., DistributionModel]] = {
    "exponential": make_exponential,
    "weibull": make_weibull,
    "gamma": make_gamma,
    "uniform": make_uniform,
}


def parse_distribution_spec(text: str) -> DistributionModel:
    """
    Build a DistributionModel from a spec string.

    Accepted forms:
        ``family=<exponential|weibull|gamma|uniform> param.<name>=<value> ...``
        ``family=empirical data=<path>`` or ``data=<path>``
        a bare path to an existing data file

    Args:
        text: Spec string; tokens separated by whitespace or commas

    Returns:
        DistributionModel

    Raises:
        SpecParseError: If the spec is malformed
        ParameterError: If a family parameter is invalid
        DataError: If a data file is invalid
    """
    tokens = [t for t in re.split(r"[\s,]+", text.strip()) if t]
    if not tokens:
        raise SpecParseError("Empty distribution spec")

    if len(tokens) == 1 and "=" not in tokens[0]:
        if Path(tokens[0]).is_file():
            tokens = [f"data={tokens[0]}"]
        else:
            raise SpecParseError(f"Expected key=value tokens, got {tokens[0]!r}")

    fields: Dict[str, str] = {}
    for token in tokens:
        key, sep, value = token.partition("=")
        if not sep or not key or not value:
            raise SpecParseError(f"Malformed token {token!r} (expected key=value)")
        if key in fields:
            raise SpecParseError(f"Duplicate key {key!r}")
        fields[key] = value

    family = fields.pop("family", None)
    data = fields.pop("data", None)

    if data is not None:
        if family not in (None, "empirical"):
            raise SpecParseError(f"data= cannot be combined with family={family}")
        if fields:
            raise SpecParseError(f"Unexpected keys for empirical spec: {sorted(fields)}")
        return make_empirical(load_sample(data), name=Path(data).stem)

    if family is None:
        raise SpecParseError("Spec needs family=<name> or data=<path>")
    if family == "empirical":
        raise SpecParseError("family=empirical needs data=<path>")
    if family not in FAMILY_PARAMS:
        raise SpecParseError(
            f"Unknown family {family!r}; expected one of "
            f"{', '.join(list(FAMILY_PARAMS) + ['empirical'])}"
        )

    params: Dict[str, float] = {}
    for key, value in fields.items():
        if not key.startswith("param."):
            raise SpecParseError(f"Unknown key {key!r}")
        name = key[len("param.") :]
        if name not in FAMILY_PARAMS[family]:
            raise SpecParseError(
                f"{family} has no parameter {name!r}; expected {FAMILY_PARAMS[family]}"
            )
        try:
            params[name] = float(value)
        except ValueError:
            raise SpecParseError(f"Parameter {name!r} is not a number: {value!r}")

    missing = [p for p in FAMILY_PARAMS[family] if p not in params]
    if missing:
        raise SpecParseError(f"{family} is missing parameter(s): {', '.join(missing)}")

    return _FACTORIES[family](**params)
