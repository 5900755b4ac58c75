"""
Round circles win in the plane
==============================

A random star-shaped polygon is pushed down in length while its area is held
at pi. It should land on the regular polygon, with multiplier 1 (the
curvature of the unit circle). A sweep over areas then traces 2 sqrt(pi V).
"""

import numpy as np

from isoperi import ConstantTwoForm, ConstraintSet, minimize_length, star_curve
from isoperi.cli import sweep_profile

rng = np.random.default_rng(0)
c0 = star_curve(256, rng)
cs = ConstraintSet.multi_volume(2, [((0, 1), np.pi)])
rep = minimize_length(c0, cs)
print(f"start length {rep.trace[0].length:.4f}")
print(f"{rep.message} after {rep.iterations} iterations: length {rep.length:.6f} (2 pi = {2 * np.pi:.6f})")
print(f"multiplier {rep.multipliers[(0, 1)]:.6f}, constraint violation {rep.constraint_violation:.1e}")

radii = np.linalg.norm(rep.final_curve.vertices - rep.final_curve.vertices.mean(axis=0), axis=1)
print(f"vertex radii spread {radii.max() - radii.min():.1e}")

# Least length as a function of the enclosed area. Each target warm-starts
# from the previous optimum, rescaled onto the new constraint.
targets = [np.pi / 4, np.pi / 2, np.pi, 2 * np.pi, 4 * np.pi]
sweep = sweep_profile(star_curve(128, rng, 0.8, 1.2), ConstraintSet.omega_volume(ConstantTwoForm(2, {(0, 1): 1.0}), 1.0), targets)
print("\n   V         length      2 sqrt(pi V)")
for row in sweep.rows:
    print(f"{row.target_volume:8.4f}  {row.length:10.6f}  {2 * np.sqrt(np.pi * row.target_volume):10.6f}")
