"""
Power laws: how damage and loss scale with storm intensity and size
===================================================================

Sweeping storms over a fixed region and fitting short parametric models
yields compact scaling laws: the critical radius grows like a power of Vm,
region damage like intensity^2.3, and repair loss like intensity^5.6 —
useful mental arithmetic for how much worse a stronger storm is.
"""

import numpy as np

from stormrisk import (
    NhppParams,
    damage_loss_sweep,
    fit_crit_radius,
    fit_damage_model,
    fit_loss_model,
    obround_area,
    fit_crit_area,
    sweep_critical_radius,
)

nhpp = NhppParams()

# --- critical radius ---------------------------------------------------------
# Rcrit(Vm, Rm) ~ a1 * Rm * (Vm / Vcrit)^a2, fitted in log space on a coarse
# (Vm, Rm) sweep.
Vm, Rm, Rc = sweep_critical_radius(np.arange(21, 81, 2), np.arange(20, 51, 3), nhpp.Vcrit)
rfit = fit_crit_radius(Vm, Rm, Rc, nhpp.Vcrit)
print(f"critical radius: Rcrit ~ {rfit.a1:.2f} * Rm * (Vm/Vcrit)^{rfit.a2:.2f}")
print(f"  (log-space RMS residual {rfit.residual:.3f})")

# The zone area follows from the obround formula; the free least-squares
# refit against exact obround areas lands on the derived coefficients.
areas = [obround_area(rc, 24.0, 3.0) for rc in Rc]
afit = fit_crit_area(Vm, Rm, areas, rfit, T=24.0, Vtr=3.0)
print(f"zone area: b1 = {afit.b1_free:.0f} (derived {afit.b1_derived:.0f}), "
      f"b2 = {afit.b2_free:.2f} (derived {afit.b2_derived:.2f})")

# --- damage and loss ---------------------------------------------------------
# Mean per-cell damage and quadratic repair loss over a 1,000-cell region for
# a 24 h transit, swept over (Vm, Rm).  (Coarser steps than the benchmark
# sweep keep this demo quick; exponents land in the same place.)
Vm, Rm, damage, loss = damage_loss_sweep(np.arange(21, 81, 2), np.arange(20, 51, 3))
dmodel = fit_damage_model(Vm, Rm, damage, nhpp.Vcrit)
lmodel = fit_loss_model(Vm, Rm, loss, nhpp.Vcrit)
print(f"damage exponent p1 = {dmodel.p1:.2f}  ->  damage ~ Rm^2 * (Vm - Vcrit)^{2 * dmodel.p1:.1f}")
print(f"loss exponent   p  = {lmodel.p:.2f}  ->  loss   ~ Rm^3 * (Vm - Vcrit)^{3 * lmodel.p:.1f}")

# The headline comparison: a storm 10 m/s stronger.
g = lambda v: (v - nhpp.Vcrit) / nhpp.Vcrit
ratio_d = (g(46) / g(37)) ** (2 * dmodel.p1)
ratio_l = (g(46) / g(37)) ** (3 * lmodel.p)
print(f"going from Vm = 37 to Vm = 46 m/s multiplies excess damage by ~{ratio_d:.1f}")
print(f"and excess repair loss by ~{ratio_l:.1f}")
