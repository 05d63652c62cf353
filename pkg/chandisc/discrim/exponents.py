"""Strong converse and error exponents from divergence curves.

Both exponents are suprema of ((alpha - 1)/alpha)(r - curve(alpha)), over
alpha > 1 for the strong converse exponent and over 0 < alpha < 1 for the error
exponent. A curve is any callable alpha -> value; `CurveCache` turns a channel
pair and a Renyi family into one, warm-starting each channel optimization from
the witness found at the previous order.
"""

from collections.abc import Callable
from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.optimize import minimize_scalar

from chandisc.chandiv.divergence import channel_divergence, check_channel_pair, regularized_estimate
from chandisc.chandiv.optimizer import OptimizerConfig
from chandisc.errors import DomainError
from chandisc.qmat.channels import QuantumChannel
from chandisc.qmat.states import PureStateVector
from chandisc.statediv.kinds import PetzRenyi, SandwichedRenyi

logger = logging.getLogger(__name__)

Curve = Callable[[float], float]

# closest approach to alpha = 1 on the grids, as alpha - 1 or 1 - alpha
GRID_FLOOR = 1e-4
SC_TAIL_DOUBLINGS = 20
ERR_TAIL_HALVINGS = 30
# error exponent values beyond this while alpha -> 0 mean the supremum is +inf
DIVERGENCE_CUTOFF = 1e6


@dataclass(frozen=True)
class ExponentQuery:
    rate: float
    curve: Curve
    alpha_min: float = 1.0 / 64.0
    alpha_max: float = 64.0
    points_per_decade: int = 64

    def __post_init__(self):
        if not self.rate > 0.0:
            raise DomainError(f"rate must be positive, got {self.rate}")
        if not 0.0 < self.alpha_min < 1.0 < self.alpha_max:
            raise DomainError(f"need 0 < alpha_min < 1 < alpha_max, got {self.alpha_min}, {self.alpha_max}")
        if self.points_per_decade < 1:
            raise DomainError(f"points_per_decade must be positive, got {self.points_per_decade}")

    def objective(self, alpha: float) -> float:
        value = self.curve(alpha)
        factor = (alpha - 1.0) / alpha
        if math.isinf(value):
            # the bracket is -inf; its sign flips with the factor
            return -math.inf if factor > 0.0 else math.inf
        return factor * (self.rate - value)


@dataclass(frozen=True)
class ExponentPoint:
    """An exponent value and the order attaining it; alpha = 1 marks the trivial endpoint."""

    value: float
    alpha: float


def _log_grid(lo: float, hi: float, per_decade: int) -> np.ndarray:
    count = max(2, int(math.ceil(per_decade * math.log10(hi / lo))) + 1)
    return np.logspace(math.log10(lo), math.log10(hi), count)


def _refine(q: ExponentQuery, alphas: np.ndarray, values: np.ndarray) -> ExponentPoint:
    """Golden-section polish in u = 1 - 1/alpha around the best grid point."""
    i = int(np.argmax(values))
    best = ExponentPoint(float(values[i]), float(alphas[i]))
    if not math.isfinite(best.value) or i == 0 or i == alphas.size - 1:
        return best
    u = 1.0 - 1.0 / alphas[i - 1 : i + 2]
    if not (values[i] > values[i - 1] and values[i] > values[i + 1]):
        return best

    def negated(t: float) -> float:
        return -q.objective(1.0 / (1.0 - t))

    result = minimize_scalar(negated, bracket=tuple(u), method="golden", options={"xtol": 1e-10})
    if -result.fun > best.value and u[0] < result.x < u[2]:
        return ExponentPoint(float(-result.fun), float(1.0 / (1.0 - result.x)))
    return best


def sc_exponent_point(q: ExponentQuery) -> ExponentPoint:
    alphas = 1.0 + _log_grid(GRID_FLOOR, q.alpha_max - 1.0, q.points_per_decade)
    values = np.array([q.objective(a) for a in alphas])
    best = _refine(q, alphas, values)
    # the supremum may sit at alpha -> inf
    for j in range(1, SC_TAIL_DOUBLINGS + 1):
        alpha = q.alpha_max * 2.0**j
        value = q.objective(alpha)
        if value > best.value:
            best = ExponentPoint(value, alpha)
    if not best.value > 0.0:
        return ExponentPoint(0.0, 1.0)
    return best


def sc_exponent(q: ExponentQuery) -> float:
    """sup_{alpha > 1} ((alpha - 1)/alpha)(r - curve(alpha)), never negative."""
    return sc_exponent_point(q).value


def err_exponent_point(q: ExponentQuery) -> ExponentPoint:
    near_one = 1.0 - _log_grid(GRID_FLOOR, 1.0 - q.alpha_min, q.points_per_decade)
    near_zero = _log_grid(q.alpha_min, 1.0 - GRID_FLOOR, q.points_per_decade)
    alphas = np.unique(np.concatenate([near_one, near_zero]))
    values = np.array([q.objective(a) for a in alphas])
    if np.any(values > DIVERGENCE_CUTOFF):
        return ExponentPoint(math.inf, float(alphas[int(np.argmax(values))]))
    best = _refine(q, alphas, values)
    for j in range(1, ERR_TAIL_HALVINGS + 1):
        alpha = q.alpha_min * 2.0**-j
        value = q.objective(alpha)
        if value > DIVERGENCE_CUTOFF:
            return ExponentPoint(math.inf, alpha)
        if value > best.value:
            best = ExponentPoint(value, alpha)
    if not best.value > 0.0:
        return ExponentPoint(0.0, 1.0)
    return best


def err_exponent(q: ExponentQuery) -> float:
    """sup_{0 < alpha < 1} ((alpha - 1)/alpha)(r - curve(alpha)); +inf when it diverges as alpha -> 0."""
    return err_exponent_point(q).value


class CurveCache:
    """alpha -> one-shot channel divergence of a Renyi family, memoized per order.

    Only the first order runs random restarts; every later order starts from the
    witness of the order evaluated just before it.
    """

    def __init__(
        self,
        n: QuantumChannel,
        m: QuantumChannel,
        family: Callable[[float], PetzRenyi | SandwichedRenyi],
        cfg: OptimizerConfig | None = None,
    ):
        check_channel_pair(n, m)
        self.n = n
        self.m = m
        self.family = family
        self.cfg = cfg or OptimizerConfig()
        self._values: dict[float, float] = {}
        self._witnesses: dict[float, PureStateVector] = {}
        self._last: PureStateVector | None = None

    def __call__(self, alpha: float) -> float:
        alpha = float(alpha)
        if alpha not in self._values:
            seeds = [self._last] if self._last is not None else []
            result = channel_divergence(
                self.n,
                self.m,
                self.family(alpha),
                self.cfg,
                seeds=seeds,
                restarts=0 if seeds else None,
            )
            self._values[alpha] = result.value.value
            self._witnesses[alpha] = self._last = result.witness
        return self._values[alpha]

    def witness(self, alpha: float) -> PureStateVector | None:
        return self._witnesses.get(float(alpha))

    def points(self) -> tuple[tuple[float, float], ...]:
        """Every evaluated (alpha, value) pair, by ascending alpha."""
        return tuple(sorted(self._values.items()))

    @property
    def evaluations(self) -> int:
        return len(self._values)


def regularized_curve(
    n: QuantumChannel,
    m: QuantumChannel,
    family: Callable[[float], PetzRenyi | SandwichedRenyi],
    copies: int,
    cfg: OptimizerConfig | None = None,
) -> Curve:
    """alpha -> a_copies, the regularized estimate at a fixed copy count."""
    values: dict[float, float] = {}

    def curve(alpha: float) -> float:
        alpha = float(alpha)
        if alpha not in values:
            values[alpha] = regularized_estimate(n, m, family(alpha), copies, cfg)[-1].value
        return values[alpha]

    return curve


@dataclass(frozen=True)
class ExponentReport:
    rate: float
    strong_converse: ExponentPoint
    error: ExponentPoint
    strong_converse_witness: PureStateVector | None
    error_witness: PureStateVector | None
    copies: int = 1
    regularized_strong_converse: ExponentPoint | None = None
    regularized_error: ExponentPoint | None = None
    # (alpha, value) pairs of the one-shot curves the exponents were read from
    sandwiched_curve: tuple[tuple[float, float], ...] = ()
    petz_curve: tuple[tuple[float, float], ...] = ()


def exponent_report(
    n: QuantumChannel,
    m: QuantumChannel,
    r: float,
    cfg: OptimizerConfig | None = None,
    copies: int = 1,
    points_per_decade: int = 64,
) -> ExponentReport:
    """Strong converse exponent over the sandwiched curve and error exponent over the Petz curve.

    With copies > 1 both are also evaluated on the regularized estimate at that
    copy count.
    """
    cfg = cfg or OptimizerConfig()
    sandwiched = CurveCache(n, m, SandwichedRenyi, cfg)
    petz = CurveCache(n, m, PetzRenyi, cfg)
    sc = sc_exponent_point(ExponentQuery(r, sandwiched, points_per_decade=points_per_decade))
    err = err_exponent_point(ExponentQuery(r, petz, points_per_decade=points_per_decade))
    logger.info(
        "exponents at r=%g: strong converse %.12g, error %.12g (%d + %d curve evaluations)",
        r,
        sc.value,
        err.value,
        sandwiched.evaluations,
        petz.evaluations,
    )
    regularized_sc = regularized_err = None
    if copies > 1:
        regularized_sc = sc_exponent_point(
            ExponentQuery(r, regularized_curve(n, m, SandwichedRenyi, copies, cfg), points_per_decade=points_per_decade)
        )
        regularized_err = err_exponent_point(
            ExponentQuery(r, regularized_curve(n, m, PetzRenyi, copies, cfg), points_per_decade=points_per_decade)
        )
    return ExponentReport(
        r,
        sc,
        err,
        sandwiched.witness(sc.alpha),
        petz.witness(err.alpha),
        copies,
        regularized_sc,
        regularized_err,
        sandwiched.points(),
        petz.points(),
    )
