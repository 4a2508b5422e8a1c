"""Regularization schedules: per-row contour lambdas and the multilevel staircase.

The (input frequency x, output frequency y) plane carries two families of
power-law level curves:

  variance contour:  x^((beta'+max{alpha-beta, p})/p) * y^((1-gamma')/q) = C
  bias contour:      x^((beta-beta')/p)               * y^((gamma'-gamma)/q) = C'

Learning all spectral cells under a contour with the matching per-row ridge
coefficient equalizes that error source across rows. The multilevel staircase
covers the region under the bias contour at level N^eta1 with rectangles that
never cross the variance contour at level N^eta2, giving a schedule of
(x_i, y_i) corners whose x-sequence contracts double-exponentially (u != 1,
at a pace set by |log u|) or halves (u = 1).

Every lambda is floored at c0 * (N / ln N)^(-1/alpha), the resolution limit
below which the empirical input covariance is not trustworthy. Natural
logarithms are used wherever a rate formula says log.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ProblemConfig, theoretical_rate

__all__ = [
    "LambdaSchedule",
    "Level",
    "LevelSchedule",
    "lambda_floor",
    "variance_lambdas",
    "bias_lambdas",
    "contour_points",
    "multilevel_schedule",
    "level_count_bound",
]

# Branch tolerance for detecting the equal-rates special case u = 1; the
# contraction parameter is a float combination of config exponents, so exact
# equality is meaningless.
U_EQUAL_TOL = 1e-9

# The staircase provably terminates (contraction for u != 1, halving for
# u = 1); this cap only guards against a regression turning it into a hang.
_MAX_LEVELS = 100_000


def _ceil_snapped(y: float) -> int:
    """Ceiling with a relative downward snap.

    Row boundaries are exact integers for round configs; float noise must not
    be able to push such a boundary up by a whole row.
    """
    return int(math.ceil(y * (1.0 - 1e-9)))


# exp() saturation bound; doubles overflow just past exp(709).
_LOG_HUGE = 709.0


def _exp_saturated(lv: float) -> float:
    return math.exp(min(lv, _LOG_HUGE))


def _contour_exponents(cfg: ProblemConfig, kind: str) -> tuple[float, float]:
    if kind == "variance":
        mx = max(cfg.alpha - cfg.beta, cfg.p)
        return (cfg.beta_prime + mx) / cfg.p, (1.0 - cfg.gamma_prime) / cfg.q
    if kind == "bias":
        return (
            (cfg.beta - cfg.beta_prime) / cfg.p,
            (cfg.gamma_prime - cfg.gamma) / cfg.q,
        )
    raise ValueError(f"contour kind must be 'bias' or 'variance', got {kind!r}")


def lambda_floor(cfg: ProblemConfig, n: int) -> float:
    """Smallest trustworthy regularization, c0 * (n / ln n)^(-1/alpha)."""
    if n < 2:
        raise ValueError(f"sample count must be >= 2, got {n}")
    return cfg.c0 * (n / math.log(n)) ** (-1.0 / cfg.alpha)


@dataclass(frozen=True)
class LambdaSchedule:
    """Per-row ridge coefficients for one contour estimator.

    Attributes:
        y_max: number of learned output rows; rows with 0-based index >=
            y_max are not learned.
        lambdas: tuple of length y_max, lambdas[j-1] is the coefficient of
            1-based row j; positive and nondecreasing in j.
        clamped: True when the contour's learned-row count exceeded d_out and
            was cut to it.
    """

    y_max: int
    lambdas: tuple[float, ...]
    clamped: bool

    def __post_init__(self) -> None:
        if self.y_max != len(self.lambdas):
            raise ValueError("lambda count must equal y_max")
        if any(lam <= 0.0 for lam in self.lambdas):
            raise ValueError("lambdas must be positive")


def _learned_row_count(cfg: ProblemConfig, n: int) -> tuple[int, bool]:
    eta1, eta2, _ = theoretical_rate(cfg)
    y_raw = _exp_saturated((cfg.q / (1.0 - cfg.gamma_prime)) * eta2 * math.log(n))
    if y_raw >= cfg.d_out + 1.0:
        return cfg.d_out, True
    y_max = _ceil_snapped(y_raw)
    if y_max > cfg.d_out:
        return cfg.d_out, True
    return y_max, False


def variance_lambdas(cfg: ProblemConfig, n: int) -> LambdaSchedule:
    """Ridge coefficients equalizing estimation variance across learned rows.

    Row j (1-based) receives
        max{ (j^(-(1-gamma')/q) * n^eta2)^(-1/(beta'+max{alpha-beta, p})),
             lambda_floor }
    for j = 1..y_max with y_max = ceil(n^((q/(1-gamma'))*eta2)) clamped to
    d_out.
    """
    eta1, eta2, _ = theoretical_rate(cfg)
    y_max, clamped = _learned_row_count(cfg, n)
    floor = lambda_floor(cfg, n)
    expo = -1.0 / (cfg.beta_prime + max(cfg.alpha - cfg.beta, cfg.p))
    lams = []
    for j in range(1, y_max + 1):
        contour = (j ** (-(1.0 - cfg.gamma_prime) / cfg.q) * n**eta2) ** expo
        lams.append(max(contour, floor))
    return LambdaSchedule(y_max=y_max, lambdas=tuple(lams), clamped=clamped)


def bias_lambdas(cfg: ProblemConfig, n: int) -> LambdaSchedule:
    """Ridge coefficients equalizing regularization bias across learned rows.

    Row j receives
        max{ (j^(-(gamma'-gamma)/q) * n^eta1)^(-1/(beta-beta')), lambda_floor }
    with the same learned-row count as variance_lambdas.
    """
    eta1, eta2, _ = theoretical_rate(cfg)
    y_max, clamped = _learned_row_count(cfg, n)
    floor = lambda_floor(cfg, n)
    expo = -1.0 / (cfg.beta - cfg.beta_prime)
    lams = []
    for j in range(1, y_max + 1):
        contour = (j ** (-(cfg.gamma_prime - cfg.gamma) / cfg.q) * n**eta1) ** expo
        lams.append(max(contour, floor))
    return LambdaSchedule(y_max=y_max, lambdas=tuple(lams), clamped=clamped)


def contour_points(
    kind: str,
    level_c: float,
    cfg: ProblemConfig,
    x_range: tuple[float, float],
    samples: int,
) -> list[tuple[float, float]]:
    """Sample points (x, y) on the contour x^e_x * y^e_y = level_c.

    Args:
        kind: 'bias' or 'variance'.
        level_c: contour level, > 0.
        cfg: problem exponents.
        x_range: (x_min, x_max), both positive.
        samples: number of points, >= 2, geometrically spaced in x.

    Returns:
        List of (x, y) pairs with y solving the contour equation at each x.
    """
    e_x, e_y = _contour_exponents(cfg, kind)
    if level_c <= 0.0:
        raise ValueError(f"contour level must be positive, got {level_c}")
    x_min, x_max = x_range
    if x_min <= 0.0 or x_max <= 0.0 or x_max < x_min:
        raise ValueError(f"x_range must be positive and ordered, got {x_range}")
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    pts = []
    log_min, log_max = math.log(x_min), math.log(x_max)
    for k in range(samples):
        x = math.exp(log_min + (log_max - log_min) * k / (samples - 1))
        y = (level_c / x**e_x) ** (1.0 / e_y)
        pts.append((x, y))
    return pts


@dataclass(frozen=True)
class Level:
    """One staircase level.

    Attributes:
        x: input-frequency corner of the level.
        y: output-frequency corner (unclamped contour solution).
        lam: ridge coefficient of the level, max{x^(-1/p), lambda floor}.
        row_start, row_end: 1-based half-open range of output rows the level
            learns; already clamped to the grid, may be empty.
    """

    x: float
    y: float
    lam: float
    row_start: int
    row_end: int


@dataclass(frozen=True)
class LevelSchedule:
    """The multilevel staircase for one (config, sample count) pair."""

    levels: tuple[Level, ...]
    eta1: float
    eta2: float
    u: float
    special_case: bool
    clamped: bool

    @property
    def learned_row_end(self) -> int:
        """One past the last learned 1-based row."""
        return self.levels[-1].row_end

    @property
    def level_count(self) -> int:
        return len(self.levels)


def _staircase_xy(cfg: ProblemConfig, n: int) -> tuple[list[tuple[float, float]], tuple[float, float, float], bool]:
    """Generate the raw (log x_i, log y_i) sequence, uncapped and unclamped.

    The iteration runs in log space: the final level's corner can undershoot
    (x astronomically small) or its row corner overshoot (y astronomically
    large) for aggressive exponent combinations, beyond what doubles can
    represent directly.
    """
    eta1, eta2, u = theoretical_rate(cfg)
    special = abs(u - 1.0) <= U_EQUAL_TOL
    ex_var, ey_var = _contour_exponents(cfg, "variance")
    ex_bias, ey_bias = _contour_exponents(cfg, "bias")
    mx = max(cfg.alpha - cfg.beta, cfg.p)
    ln_n = math.log(n)
    ln2 = math.log(2.0)
    lx = (cfg.p / (cfg.beta_prime + mx)) * eta2 * ln_n - ln2
    pairs: list[tuple[float, float]] = []
    for _ in range(_MAX_LEVELS):
        if special:
            ly = (eta1 * ln_n - ex_bias * lx) / ey_bias
            pairs.append((lx, ly))
            if lx < 0.0:
                return pairs, (eta1, eta2, u), special
            lx = lx - ln2
        else:
            ly = (eta2 * ln_n - ex_var * lx) / ey_var
            pairs.append((lx, ly))
            if lx <= ln2:
                return pairs, (eta1, eta2, u), special
            lx = (eta1 * ln_n - ey_bias * ly) / ex_bias
    raise RuntimeError(
        "staircase failed to terminate; this indicates a broken config"
    )


def multilevel_schedule(cfg: ProblemConfig, n: int) -> LevelSchedule:
    """Build the multilevel staircase schedule for n samples.

    Starting from x_0 = n^((p/(beta'+max{alpha-beta, p})) * eta2) / 2, each
    level solves the variance contour at level n^eta2 for its row corner y_i
    and the bias contour at level n^eta1 for the next x_{i+1}; iteration
    stops at the first x_i <= 2, that level included. When the input and
    output rates coincide (u = 1) the two contours are the same curve, x
    halves instead and y_i solves the bias contour at x_i, stopping at the
    first x_i < 1.

    Level i learns the 1-based output rows [ceil(y_{i-1}), ceil(y_i)) with
    y_{-1} = 0 (the first level starts at row 1), clamped to the grid; its
    ridge coefficient is max{x_i^(-1/p), lambda_floor}.
    """
    floor = lambda_floor(cfg, n)
    pairs, (eta1, eta2, u), special = _staircase_xy(cfg, n)
    levels = []
    row_start = 1
    clamped = False
    for lx, ly in pairs:
        if ly >= math.log(cfg.d_out + 1.0):
            row_end_raw = cfg.d_out + 1
        else:
            row_end_raw = _ceil_snapped(math.exp(ly))
        if row_end_raw > cfg.d_out:
            clamped = True
        row_end = min(row_end_raw, cfg.d_out + 1)
        row_end = max(row_end, row_start)
        lam = max(_exp_saturated(-lx / cfg.p), floor)
        levels.append(
            Level(
                x=_exp_saturated(lx),
                y=_exp_saturated(ly),
                lam=lam,
                row_start=row_start,
                row_end=row_end,
            )
        )
        row_start = row_end
    return LevelSchedule(
        levels=tuple(levels),
        eta1=eta1,
        eta2=eta2,
        u=u,
        special_case=special,
        clamped=clamped,
    )


def level_count_bound(cfg: ProblemConfig, n: int) -> tuple[int, float]:
    """Realized level count and its reference ceiling.

    The ceiling is 3*log2(log2 n) + 3 in the contracting case (u != 1) and
    2*log2(n) + 3 in the halving case (u = 1). Each contracting step
    multiplies log x by u, so the crossing count scales like 1/|log2 u|;
    the log-log ceiling therefore assumes u at least a constant factor away
    from 1 (roughly u <= 3/4 or u >= 4/3) and is exceeded inside that band.
    """
    sched = multilevel_schedule(cfg, n)
    if sched.special_case:
        bound = 2.0 * math.log2(n) + 3.0
    else:
        bound = 3.0 * math.log2(math.log2(n)) + 3.0
    return sched.level_count, bound
