"""
Quadratic failure model for wind-driven infrastructure damage.

Failures along distribution lines are a Poisson process whose intensity is a
nominal background rate below a critical wind speed and grows quadratically
with wind speed above it.  Integrating the intensity over a storm gives the
per-cell failure rate; ensembles give two rate estimates (the rate of the
mean winds, and the mean of the member rates) and two count distributions
(a single Poisson at the mean rate, and an equal-weight mixture of member
Poissons).  Finite asset counts saturate the count distribution.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .ensemble import Ensemble, mean_velocity


@dataclass(frozen=True)
class NhppParams:
    """Failure-intensity parameters.

    Parameters
    ----------
    Vcrit : float
        Critical wind speed (m/s) below which the intensity is nominal.
    alpha : float
        Quadratic scaling of the supercritical intensity (>= 1).
    lambda_norm : float
        Nominal intensity in failures per hour per km of line.
    """

    Vcrit: float = 20.6
    alpha: float = 4175.6
    lambda_norm: float = 3.5e-5

    def __post_init__(self):
        if self.Vcrit <= 0:
            raise ValueError("Vcrit must be > 0")
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")
        if self.lambda_norm <= 0:
            raise ValueError("lambda_norm must be > 0")


@dataclass(frozen=True)
class AssetInventory:
    """Per-cell distribution-line lengths and derived asset counts.

    `line_km` is the length of line in each cell (km); an asset is one line
    segment of `unit_length_km` (default 0.1 km), and the per-cell asset count
    is the rounded ratio.
    """

    line_km: np.ndarray
    unit_length_km: float = 0.1

    def __post_init__(self):
        lk = np.asarray(self.line_km, dtype=float)
        if np.any(lk < 0):
            raise ValueError("line lengths must be >= 0")
        if self.unit_length_km <= 0:
            raise ValueError("unit_length_km must be > 0")
        object.__setattr__(self, "line_km", lk)

    def asset_counts(self) -> np.ndarray:
        """Integer asset count per cell, Ng = round(line_km / unit_length)."""
        return np.rint(self.line_km / self.unit_length_km).astype(int)


# Worked asset densities (km of line per km^2): dense urban and rural service
# territories, respectively.
URBAN_LINE_DENSITY_KM_PER_KM2 = 7.08
RURAL_LINE_DENSITY_KM_PER_KM2 = 0.65


# =============================================================================
# Intensity and failure rate
# =============================================================================


def poisson_intensity(p: NhppParams, v):
    """Failure intensity (failures/hr/km) at wind speed `v` m/s.

    Nominal below Vcrit; lambda_norm * (1 + alpha * ((v/Vcrit)^2 - 1)) at and
    above it.  Continuous at Vcrit and vectorized over `v`.  The piecewise
    form is used directly (rather than the algebraically equal
    lambda_norm * (1 - alpha) + lambda_norm * alpha * f(v)^2 with
    f = max(Vcrit, v)/Vcrit) so that subcritical speeds return exactly
    lambda_norm with no cancellation error.
    """
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise ValueError("velocity must be >= 0")
    out = np.full(v.shape, p.lambda_norm)
    hot = v >= p.Vcrit
    ratio = v[hot] / p.Vcrit
    out[hot] = p.lambda_norm * (1.0 + p.alpha * (ratio * ratio - 1.0))
    if out.ndim == 0:
        return float(out)
    return out


def exponential_intensity(p: NhppParams, v):
    """Exponential-growth intensity variant behind the same interface.

    Nominal below Vcrit; lambda_norm * (1 + alpha * (exp(v/Vcrit - 1) - 1))
    at and above it.  Continuous at Vcrit.  Provided for comparison only; the
    quadratic model is the one exercised by the acceptance suite.
    """
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise ValueError("velocity must be >= 0")
    out = np.full(v.shape, p.lambda_norm)
    hot = v >= p.Vcrit
    out[hot] = p.lambda_norm * (1.0 + p.alpha * (np.exp(v[hot] / p.Vcrit - 1.0) - 1.0))
    if out.ndim == 0:
        return float(out)
    return out


def failure_rate(p: NhppParams, velocities, dt: float = 1.0):
    """Failure rate (failures/km) accumulated over a velocity time series.

    Sums poisson_intensity over the last axis times `dt`; an all-subcritical
    series of duration T returns lambda_norm * T.  Works on a single series
    (shape (n_steps,)) or a field (shape (..., n_steps)).
    """
    v = np.asarray(velocities, dtype=float)
    if v.size == 0:
        raise ValueError("velocities must be non-empty")
    out = np.sum(poisson_intensity(p, v), axis=-1) * dt
    if out.ndim == 0:
        return float(out)
    return out


def nominal_rate(p: NhppParams, n_steps: int, dt: float = 1.0) -> float:
    """lambda_norm accumulated over `n_steps` steps, using the same reduction
    as `failure_rate` so that comparisons against it are exact."""
    return float(np.sum(np.full(n_steps, p.lambda_norm)) * dt)


# =============================================================================
# Ensemble failure rates
# =============================================================================


def fr1(p: NhppParams, e: Ensemble, cell: int | None = None):
    """Failure rate of the ensemble-mean winds.

    Returns the rate at one cell, or the full per-cell array when `cell` is
    None.
    """
    vbar = mean_velocity(e)
    if cell is not None:
        vbar = vbar[cell]
    return failure_rate(p, vbar, e.times.dt)


def fr2(p: NhppParams, e: Ensemble, cell: int | None = None):
    """Ensemble mean of the per-member failure rates (>= fr1 by convexity).

    Returns the rate at one cell, or the full per-cell array when `cell` is
    None.  Member order is fixed, so the reduction is reproducible.
    """
    v = e.velocities()
    if cell is not None:
        v = v[:, cell]
    rates = failure_rate(p, v, e.times.dt)
    return np.asarray(rates).mean(axis=0) if np.ndim(rates) else float(rates)


def member_rates(p: NhppParams, e: Ensemble, cell: int) -> np.ndarray:
    """Per-member failure rates at one cell, shape (H,)."""
    return np.asarray([failure_rate(p, m.velocities[cell], e.times.dt) for m in e.members])


def failure_rate_through(p: NhppParams, e: Ensemble, cell: int, t_prime: int) -> float:
    """Ensemble-mean failure rate accumulated through time index `t_prime`
    (inclusive).  Nondecreasing in `t_prime`; equals fr2 at the final index."""
    if not 0 <= t_prime < e.times.n_steps:
        raise ValueError("t_prime out of range")
    v = e.velocities()[:, cell, : t_prime + 1]
    return float(np.mean(failure_rate(p, v, e.times.dt)))


def cumulative_velocity(e: Ensemble, cell: int, t_prime: int) -> float:
    """Ensemble-averaged wind speed summed through time index `t_prime`
    (inclusive).  Nondecreasing in `t_prime`."""
    if not 0 <= t_prime < e.times.n_steps:
        raise ValueError("t_prime out of range")
    return float(np.mean(np.sum(e.velocities()[:, cell, : t_prime + 1], axis=-1)))


# =============================================================================
# Failure-count distributions
# =============================================================================


@dataclass(frozen=True)
class FailureDistribution:
    """Probability mass over failure counts 0..n_max plus an explicit tail.

    `pmf[n]` is Pr(N = n) for n <= n_max; `tail` is Pr(N > n_max) (for the
    saturated kind the tail is zero because all residual mass sits at the
    asset count).  Masses are >= 0 and total 1 within 1e-12.
    """

    kind: str  # "poisson" | "mixture" | "saturated"
    pmf: np.ndarray
    tail: float

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        if np.any(pmf < 0) or self.tail < -1e-15:
            raise ValueError("probability masses must be >= 0")
        total = float(pmf.sum() + self.tail)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"masses total {total}, expected 1 within 1e-12")
        object.__setattr__(self, "pmf", pmf)

    @property
    def n_max(self) -> int:
        return len(self.pmf) - 1

    def total_mass(self) -> float:
        return float(self.pmf.sum() + self.tail)

    def mean(self) -> float:
        """Expected count, attributing the tail mass to n_max + 1 as a lower
        bound contribution; exact when tail == 0."""
        n = np.arange(len(self.pmf))
        return float(np.sum(n * self.pmf) + (self.n_max + 1) * self.tail)


def _log_poisson_pmf(n: np.ndarray, rate: float) -> np.ndarray:
    if rate == 0.0:
        out = np.full(n.shape, -np.inf)
        out[n == 0] = 0.0
        return out
    return n * np.log(rate) - rate - gammaln(n + 1.0)


def poisson_pmf(n, rate: float) -> np.ndarray:
    """Poisson pmf computed in log space (stable for large n and rate)."""
    n = np.asarray(n, dtype=float)
    return np.exp(_log_poisson_pmf(n, rate))


def default_n_max(max_rate: float) -> int:
    """Truncation point: the 1 - 1e-9 quantile of a Poisson at `max_rate`."""
    if max_rate <= 0:
        return 1
    return int(poisson.ppf(1.0 - 1e-9, max_rate))


def fd_a(
    p: NhppParams, e: Ensemble, cell: int, n_max: int | None = None
) -> FailureDistribution:
    """Single Poisson at the ensemble-mean failure rate (per km of line)."""
    rate = fr2(p, e, cell)
    if n_max is None:
        n_max = default_n_max(rate)
    n = np.arange(n_max + 1)
    pmf = poisson_pmf(n, rate)
    tail = max(0.0, float(poisson.sf(n_max, rate)))
    return FailureDistribution(kind="poisson", pmf=pmf, tail=tail)


def fd_b(
    p: NhppParams, e: Ensemble, cell: int, n_max: int | None = None
) -> FailureDistribution:
    """Equal-weight mixture of per-member Poisson distributions."""
    rates = member_rates(p, e, cell)
    if n_max is None:
        n_max = default_n_max(float(rates.max()))
    n = np.arange(n_max + 1)
    pmf = np.zeros(n_max + 1)
    tail = 0.0
    for rate in rates:
        pmf += poisson_pmf(n, float(rate))
        tail += max(0.0, float(poisson.sf(n_max, float(rate))))
    pmf /= len(rates)
    tail /= len(rates)
    return FailureDistribution(kind="mixture", pmf=pmf, tail=tail)


def saturated_distribution(total_rate: float, Ng: int) -> FailureDistribution:
    """Failure-count distribution truncated at the asset count.

    Poisson pmf at `total_rate` (failures, i.e. line length times the per-km
    rate) for n < Ng; all remaining mass is placed at n = Ng.
    """
    if Ng < 0:
        raise ValueError("Ng must be >= 0")
    if total_rate < 0:
        raise ValueError("total_rate must be >= 0")
    if Ng == 0:
        return FailureDistribution(kind="saturated", pmf=np.array([1.0]), tail=0.0)
    n = np.arange(Ng + 1)
    pmf = poisson_pmf(n, total_rate)
    below = float(poisson.cdf(Ng - 1, total_rate)) if total_rate > 0 else 1.0
    pmf[Ng] = max(0.0, 1.0 - below)
    return FailureDistribution(kind="saturated", pmf=pmf, tail=0.0)


def expected_failures_saturated(total_rate: float, Ng: int) -> float:
    """Exact mean of the saturated count distribution.

    Monotone nondecreasing in the rate, bounded by Ng, and asymptotically
    approaching Ng as the rate grows.
    """
    if Ng < 0:
        raise ValueError("Ng must be >= 0")
    if total_rate < 0:
        raise ValueError("total_rate must be >= 0")
    if Ng == 0 or total_rate == 0.0:
        return 0.0
    n = np.arange(Ng)  # 0 .. Ng-1
    body = float(np.sum(n * poisson_pmf(n, total_rate)))
    return body + Ng * max(0.0, float(poisson.sf(Ng - 1, total_rate)))


# =============================================================================
# Exports
# =============================================================================

FAILURE_RATE_HEADER = ["cell_id", "failure_rate_per_km"]


def save_failure_rate_field(
    rates, path, fmt: str = ".9g", header_comment: str | None = None
) -> None:
    """Write per-cell failure rates as CSV `cell_id,failure_rate_per_km`."""
    rates = np.asarray(rates, dtype=float)
    with open(path, "w", newline="") as f:
        if header_comment:
            f.write(f"# {header_comment}\n")
        w = csv.writer(f)
        w.writerow(FAILURE_RATE_HEADER)
        for cell, rate in enumerate(rates):
            w.writerow([cell, format(rate, fmt)])


def save_failure_distribution(
    dist: FailureDistribution, path, fmt: str = ".9g", header_comment: str | None = None
) -> None:
    """Write a count distribution as CSV `n,probability`, final row the tail."""
    with open(path, "w", newline="") as f:
        if header_comment:
            f.write(f"# {header_comment}\n")
        w = csv.writer(f)
        w.writerow(["n", "probability"])
        for n, mass in enumerate(dist.pmf):
            w.writerow([n, format(mass, fmt)])
        w.writerow(["tail", format(dist.tail, fmt)])
