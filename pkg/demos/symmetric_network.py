# Symmetric integer-gain network: every cross link has the same Gaussian
# integer gain h, every direct link gain 1.  For this family the best
# two-stage lattice transceiver is known in closed form, which makes it the
# standard sanity check for the numerical solver.

import numpy as np

from latticealign import (
    GaussianInt,
    SymmetricInstance,
    gain_condition_sq,
    multi_start,
    symmetric_channelset,
    symmetric_design,
    symmetric_rmin_lattice,
    symmetric_rmin_ml,
)
from latticealign.rates import rate_report

inst = SymmetricInstance(K=3, h=GaussianInt(2, 0), P=4.0)
print(f"instance: K={inst.K} h={inst.h} P={inst.P}")
print(f"closed-form lattice worst rate : {symmetric_rmin_lattice(inst):.6f} bits")
print(f"closed-form two-stage ML rate  : {symmetric_rmin_ml(inst):.6f} bits")

# The canonical design decodes the sum of the two interfering streams with
# coefficients [0, 1, 1] and subtracts it scaled by c = h.
st = symmetric_design(inst)
ch, cfg = symmetric_channelset(inst)
rep = rate_report(ch, st)
print(f"canonical design realizes      : {rep.r_min:.6f} bits (c = {st.c[0,0]:.0f})")

# The solver should land on the same point from scratch.
st2, rep2, trace = multi_start(ch, cfg, n_starts=2)
print(f"solver from scratch            : {rep2.r_min:.6f} bits (c = {st2.c[0,0]:.0f})")
print(f"coefficient row of user 0      : {np.round(st2.a[0, 0].ravel()).real}")

# In corner regimes the canonical scaling c = h is not optimal: the closed
# form is a certified lower bound, and the search can do strictly better.
corner = SymmetricInstance(K=2, h=GaussianInt(3, 0), P=2.0)
ch_c, cfg_c = symmetric_channelset(corner)
_, rep_c, _ = multi_start(ch_c, cfg_c, n_starts=2)
print(f"\ncorner (K=2, h=3, P=2): closed form {symmetric_rmin_lattice(corner):.4f}, "
      f"solver {rep_c.r_min:.4f}")

# Lattice decoding needs enough cross gain to beat plain two-stage ML.
# Sweep the squared gain and report where the advantage switches on.
print("\ngain condition at K=3:")
for P in (10.0, 100.0, 1000.0):
    grid = np.linspace(1.0, 2.0, 2001)
    flips = grid[[gain_condition_sq(3, float(x), P) for x in grid].index(True)]
    print(f"  P={P:7.1f}: lattice wins for |h|^2 >= {flips:.3f}")
print("(the threshold approaches 1 + 1/P for many users, 3/2 for K=3)")
