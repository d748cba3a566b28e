"""
Region-aggregate damage and loss: exact accumulation and parametric fits.

Over a bounded region G crossed by a storm, total expected damage is the sum
of cellwise inhomogeneous-Poisson failure rates, and total repair loss is the
sum of cellwise quadratic repair costs.  Both admit a decomposition into a
nominal term (weather-independent, proportional to |G| and the exposure time)
plus excess terms driven by the velocity ratio f = v / Vcrit wherever it
exceeds one:

    damage:  Lambda_tot = |G| lambda T + lambda alpha sum_g sum_t (f^2 - 1) dt
    loss:    L_tot = (Lf / (2 Y)) * [ |G| (lambda T)^2
                       + 2 lambda^2 alpha T sum_g sum_t (f^2 - 1) dt
                       + (lambda alpha)^2 sum_g (sum_t (f^2 - 1) dt)^2 ]

The parametric fits compress a (Vm, Rm) sweep of these aggregates into short
power-law expansions in Rm and the normalized intensity excess
g = (max(Vm, Vcrit) - Vcrit) / Vcrit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .fitting import LinearFit, linear_least_squares
from .nhpp import NhppParams, expected_failures_saturated, poisson_intensity
from .wind import MPS_TO_KMH, HollandParams, WindField, holland_speed


# =============================================================================
# Exact aggregates over a wind field
# =============================================================================


def total_damage(field: WindField, p: NhppParams, cell_line_km: float = 1.0) -> float:
    """Expected failures summed over all cells of a wind field.

    `cell_line_km` scales the per-unit-length rates to a line length per cell
    (the default 1 reports rate per km per cell).
    """
    lam = poisson_intensity(p, field.velocities)
    return float(lam.sum() * field.times.dt * cell_line_km)


def excess_integral(field: WindField, p: NhppParams) -> np.ndarray:
    """Per-cell integral of (f^2 - 1) over times where v exceeds Vcrit.

    f = v / Vcrit.  This is the quantity the nominal/excess decompositions
    are built from; units are hours.
    """
    f2m1 = np.square(field.velocities / p.Vcrit) - 1.0
    return np.where(f2m1 > 0, f2m1, 0.0).sum(axis=1) * field.times.dt


def total_damage_decomposed(field: WindField, p: NhppParams) -> dict[str, float]:
    """Nominal/excess split of the total expected damage.

    Returns {"nominal", "excess", "total"}; `total` equals `total_damage` to
    rounding because the piecewise intensity is exactly
    lambda (1 + alpha (f^2 - 1)) above Vcrit and lambda below.
    """
    G = field.grid.n_cells
    T = field.times.duration
    nominal = G * p.lambda_norm * T
    excess = p.lambda_norm * p.alpha * float(excess_integral(field, p).sum())
    return {"nominal": nominal, "excess": excess, "total": nominal + excess}


@dataclass(frozen=True)
class RepairParams:
    """Quadratic repair-cost model: loss per cell = (Lf / (2 Y)) * n^2.

    `Lf` is the lost service value per unit time per failure outstanding and
    `Y` the repair rate (failures repaired per unit time), so n simultaneous
    failures take n/Y to clear at average outstanding count n/2.
    """

    Lf: float = 1.0
    Y: float = 1.0

    def __post_init__(self):
        if self.Lf < 0 or self.Y <= 0:
            raise ValueError("Lf must be >= 0 and Y > 0")

    @property
    def half_ratio(self) -> float:
        return 0.5 * self.Lf / self.Y


def repair_loss_per_cell(n_failures, repair: RepairParams) -> np.ndarray:
    """Repair loss of each cell given its failure count (or expectation)."""
    n = np.asarray(n_failures, dtype=float)
    return repair.half_ratio * n * n


def total_loss(
    field: WindField,
    p: NhppParams,
    repair: RepairParams,
    poisson_exact: bool = False,
) -> float:
    """Total repair loss over all cells of a wind field.

    By default uses the deterministic plug-in n = Lambda_cell, matching the
    closed-form decomposition below.  With `poisson_exact`, uses the Poisson
    second moment E[n^2] = Lambda + Lambda^2 instead.
    """
    lam = poisson_intensity(p, field.velocities).sum(axis=1) * field.times.dt
    n2 = lam + lam * lam if poisson_exact else lam * lam
    return float(repair.half_ratio * n2.sum())


def total_loss_decomposed(
    field: WindField, p: NhppParams, repair: RepairParams
) -> dict[str, float]:
    """Three-term split of the plug-in total loss.

    Returns {"nominal", "cross", "excess", "total"}; `total` equals
    `total_loss(..., poisson_exact=False)` to rounding.
    """
    G = field.grid.n_cells
    T = field.times.duration
    E = excess_integral(field, p)
    la = p.lambda_norm * p.alpha
    nominal = G * (p.lambda_norm * T) ** 2
    cross = 2.0 * p.lambda_norm * la * T * float(E.sum())
    excess = la * la * float((E * E).sum())
    h = repair.half_ratio
    return {
        "nominal": h * nominal,
        "cross": h * cross,
        "excess": h * excess,
        "total": h * (nominal + cross + excess),
    }


def total_damage_saturated(rates_per_km, inventory) -> float:
    """Expected failures summed over cells with finite per-cell asset counts.

    `rates_per_km` are cellwise failure rates per km of line; each cell's
    count distribution is the Poisson at line_km * rate truncated at its
    asset count, so the total follows an S-curve in storm intensity instead
    of growing without bound.
    """
    rates = np.asarray(rates_per_km, dtype=float)
    counts = inventory.asset_counts()
    line = np.asarray(inventory.line_km, dtype=float)
    if rates.shape != line.shape:
        raise ValueError("rates and inventory have different cell counts")
    return float(
        sum(
            expected_failures_saturated(float(l * r), int(n))
            for l, r, n in zip(line, rates, counts)
        )
    )


# =============================================================================
# (Vm, Rm) sweep over the reference region
# =============================================================================


@dataclass(frozen=True)
class SweepConfig:
    """Reference region and storm kinematics for the damage/loss sweep.

    A rectangular region of nx x ny cells centred on the track of a storm
    translating northward at `vtr` for `T` hours, sampled hourly, with the
    transit centred in time so the storm enters at one edge of its path and
    exits symmetrically.  Aggregates are reported per cell (means over the
    region), which makes the fitted coefficients independent of |G|.
    """

    nx: int = 25
    ny: int = 40
    cell_size: float = 22.264
    vtr: float = 3.0
    T: float = 24.0
    dt: float = 1.0
    B: float = 1.0

    def grid_centers(self) -> tuple[np.ndarray, np.ndarray]:
        xs = (np.arange(self.nx) - (self.nx - 1) / 2.0) * self.cell_size
        ys = (np.arange(self.ny) - (self.ny - 1) / 2.0) * self.cell_size
        return xs, ys

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    def centre_y(self) -> np.ndarray:
        """Storm-centre y at each (midpoint) time sample, km."""
        step = self.vtr * MPS_TO_KMH * self.dt
        L = step * self.n_steps
        return -L / 2.0 + (np.arange(self.n_steps) + 0.5) * step


def damage_loss_sweep(
    Vm_values,
    Rm_values,
    nhpp: NhppParams | None = None,
    repair: RepairParams | None = None,
    config: SweepConfig | None = None,
):
    """Mean per-cell damage and loss over the cartesian (Vm, Rm) sweep.

    Returns flat arrays (Vm, Rm, damage, loss).  Damage is the mean cellwise
    failure rate over the region; loss the mean cellwise plug-in repair loss.
    """
    nhpp = nhpp or NhppParams()
    repair = repair or RepairParams()
    config = config or SweepConfig()
    xs, ys = config.grid_centers()
    X = xs[:, None]
    cy = config.centre_y()
    out_vm, out_rm, out_d, out_l = [], [], [], []
    for Vm in Vm_values:
        for Rm in Rm_values:
            p = HollandParams(Vm=float(Vm), Rm=float(Rm), B=config.B)
            lam = np.zeros((config.nx, config.ny))
            for k in range(config.n_steps):
                r = np.hypot(X, ys[None, :] - cy[k])
                lam += poisson_intensity(nhpp, holland_speed(p, r))
            lam *= config.dt
            out_vm.append(float(Vm))
            out_rm.append(float(Rm))
            out_d.append(float(lam.mean()))
            out_l.append(float(repair.half_ratio * np.mean(lam * lam)))
    return (np.array(out_vm), np.array(out_rm), np.array(out_d), np.array(out_l))


# =============================================================================
# Parametric fits
# =============================================================================


def g_of_vm(Vm, Vcrit: float) -> np.ndarray:
    """Normalized intensity excess g = (max(Vm, Vcrit) - Vcrit) / Vcrit."""
    Vm = np.asarray(Vm, dtype=float)
    return (np.maximum(Vm, Vcrit) - Vcrit) / Vcrit


def _relative_weights(y: np.ndarray) -> np.ndarray:
    """Weights 1/y^2, i.e. least squares on relative error.

    The sweep responses span four orders of magnitude; unweighted least
    squares is dominated by the largest storms and pushes the exponent scan
    to its boundary, while relative error treats every storm equally.
    """
    return 1.0 / np.square(y)


@dataclass(frozen=True)
class DamageFitModel:
    """Per-cell damage model
    D(Vm, Rm) = b1 + b2 Rm g^p1 + b3 Rm^2 g^(2 p1) + b4 Rm g^p2 + b5 Rm^2 g^(2 p2)

    with g the normalized intensity excess.  Exponents are scanned on fixed
    grids; terms insignificant at `drop_p` are removed and the model refit.
    `terms` names the retained regressors in order of `fit.beta`.
    """

    p1: float
    p2: float
    beta: np.ndarray
    terms: tuple[str, ...]
    fit: LinearFit
    Vcrit: float

    def predict(self, Vm, Rm) -> np.ndarray:
        return self.fit.predict(_damage_design(Vm, Rm, self.p1, self.p2, self.Vcrit, self.terms))


_DAMAGE_TERMS = ("const", "Rm*g^p1", "Rm^2*g^2p1", "Rm*g^p2", "Rm^2*g^2p2")


def _damage_design(Vm, Rm, p1, p2, Vcrit, terms=_DAMAGE_TERMS) -> np.ndarray:
    g = g_of_vm(Vm, Vcrit)
    Rm = np.asarray(Rm, dtype=float)
    cols = {
        "const": np.ones_like(g),
        "Rm*g^p1": Rm * g**p1,
        "Rm^2*g^2p1": Rm**2 * g ** (2 * p1),
        "Rm*g^p2": Rm * g**p2,
        "Rm^2*g^2p2": Rm**2 * g ** (2 * p2),
    }
    return np.column_stack([cols[t] for t in terms])


def fit_damage_model(
    Vm,
    Rm,
    damage,
    Vcrit: float,
    p1_grid=None,
    p2_grid=None,
    drop_p: float = 0.05,
) -> DamageFitModel:
    """Scan (p1, p2) exponent grids, fit by relative-error least squares,
    keep the scan minimum, and prune insignificant terms.

    Default grids: p1 in [1, 1.5], p2 in [-0.5, 0.5], both step 0.01.
    """
    if p1_grid is None:
        p1_grid = np.round(np.arange(1.00, 1.5001, 0.01), 2)
    if p2_grid is None:
        p2_grid = np.round(np.arange(-0.50, 0.5001, 0.01), 2)
    y = np.asarray(damage, dtype=float)
    w = _relative_weights(y)
    best = None
    for p1 in p1_grid:
        for p2 in p2_grid:
            if p2 >= p1:
                continue
            X = _damage_design(Vm, Rm, p1, p2, Vcrit)
            fit = linear_least_squares(X, y, weights=w)
            if best is None or fit.rms < best[0]:
                best = (fit.rms, float(p1), float(p2), fit)
    _, p1, p2, fit = best
    terms = _DAMAGE_TERMS
    keep = tuple(t for t, p in zip(terms, fit.p_values) if p < drop_p)
    if len(keep) and len(keep) < len(terms):
        fit = linear_least_squares(_damage_design(Vm, Rm, p1, p2, Vcrit, keep), y, weights=w)
        terms = keep
    return DamageFitModel(p1=p1, p2=p2, beta=fit.beta, terms=terms, fit=fit, Vcrit=Vcrit)


@dataclass(frozen=True)
class LossFitModel:
    """Per-cell loss model over the 13-term basis
    [1, Rm g^p, Rm^2 g^2p, Rm^3 g^3p, Rm^4 g^4p, Rm^2 g^p, Rm^3 g^p,
     Rm^3 g^2p, Rm^4 g^2p, Rm, Rm^2, Rm^3, Rm^4],

    with the single exponent p scanned on a grid and insignificant terms
    pruned as in the damage model.
    """

    p: float
    beta: np.ndarray
    terms: tuple[str, ...]
    fit: LinearFit
    Vcrit: float

    def predict(self, Vm, Rm) -> np.ndarray:
        return self.fit.predict(_loss_design(Vm, Rm, self.p, self.Vcrit, self.terms))


_LOSS_TERMS = (
    "const", "Rm*g^p", "Rm^2*g^2p", "Rm^3*g^3p", "Rm^4*g^4p",
    "Rm^2*g^p", "Rm^3*g^p", "Rm^3*g^2p", "Rm^4*g^2p",
    "Rm", "Rm^2", "Rm^3", "Rm^4",
)


def _loss_design(Vm, Rm, p, Vcrit, terms=_LOSS_TERMS) -> np.ndarray:
    g = g_of_vm(Vm, Vcrit)
    Rm = np.asarray(Rm, dtype=float)
    cols = {
        "const": np.ones_like(g),
        "Rm*g^p": Rm * g**p,
        "Rm^2*g^2p": Rm**2 * g ** (2 * p),
        "Rm^3*g^3p": Rm**3 * g ** (3 * p),
        "Rm^4*g^4p": Rm**4 * g ** (4 * p),
        "Rm^2*g^p": Rm**2 * g**p,
        "Rm^3*g^p": Rm**3 * g**p,
        "Rm^3*g^2p": Rm**3 * g ** (2 * p),
        "Rm^4*g^2p": Rm**4 * g ** (2 * p),
        "Rm": Rm,
        "Rm^2": Rm**2,
        "Rm^3": Rm**3,
        "Rm^4": Rm**4,
    }
    return np.column_stack([cols[t] for t in terms])


def fit_loss_model(
    Vm,
    Rm,
    loss,
    Vcrit: float,
    p_grid=None,
    drop_p: float = 0.05,
) -> LossFitModel:
    """Scan the loss exponent grid (default [1.2, 2] step 0.01), fit by
    relative-error least squares, keep the minimum, prune, refit."""
    if p_grid is None:
        p_grid = np.round(np.arange(1.20, 2.0001, 0.01), 2)
    y = np.asarray(loss, dtype=float)
    w = _relative_weights(y)
    best = None
    for p in p_grid:
        X = _loss_design(Vm, Rm, p, Vcrit)
        fit = linear_least_squares(X, y, weights=w)
        if best is None or fit.rms < best[0]:
            best = (fit.rms, float(p), fit)
    _, p, fit = best
    terms = _LOSS_TERMS
    keep = tuple(t for t, pv in zip(terms, fit.p_values) if pv < drop_p)
    if len(keep) and len(keep) < len(terms):
        fit = linear_least_squares(_loss_design(Vm, Rm, p, Vcrit, keep), y, weights=w)
        terms = keep
    return LossFitModel(p=p, beta=fit.beta, terms=terms, fit=fit, Vcrit=Vcrit)


# =============================================================================
# Sweep CSV
# =============================================================================

AGG_SWEEP_HEADER = ["Vm", "Rm", "damage_norm", "loss_norm"]


def save_agg_sweep(
    Vm, Rm, damage, loss, path, fmt: str = ".9g", header_comment: str | None = None
) -> None:
    """Write a damage/loss sweep as CSV."""
    with open(path, "w", newline="") as f:
        if header_comment:
            f.write(f"# {header_comment}\n")
        w = csv.writer(f)
        w.writerow(AGG_SWEEP_HEADER)
        for v, r, d, lo in zip(Vm, Rm, damage, loss):
            w.writerow([v, r, format(d, fmt), format(lo, fmt)])
