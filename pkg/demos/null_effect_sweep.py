"""
A zero direct effect under growing nonlinearity
===============================================

X1 affects Y only through X2, and Y is a cubic in X2.  A linear regression
of Y on (X1, X2) misattributes part of the curvature to X1 once the
polynomial terms grow; the Super Learner path model keeps the X1 -> Y
effect near zero.

``python3 demos/null_effect_sweep.py`` runs 2 replicates at n = 5000.
"""
import argparse

import numpy as np

from dagsl import lambda_sweep

parser = argparse.ArgumentParser()
parser.add_argument("--n", type=int, default=5000)
parser.add_argument("--reps", type=int, default=2)
parser.add_argument("--points", type=int, default=4)
args = parser.parse_args()

grid = np.linspace(0.0, 0.1, args.points)
table = lambda_sweep(n=args.n, lambda_grid=grid, reps=args.reps, seed=0)
print(f"{'lambda':>7} {'slem':>8} {'linear':>8}")
for row in table:
    print(f"{row['lambda']:7.3f} {row['slem_mean']:8.4f} {row['linear_mean']:8.4f}")
