"""
Super Learner path model versus a linear path model
===================================================

Two confounded processes with a binary treatment.  In the linear one both
estimators are consistent and the linear model is a little more efficient.
In the nonlinear one the linear model stays biased however large n gets.

``python3 demos/simulation_study.py --reps 5`` takes under a minute; the
full protocol is ``--reps 70 --n 50,100,250,500,1000,5000``.
"""
import argparse

from dagsl import run_comparison

parser = argparse.ArgumentParser()
parser.add_argument("--reps", type=int, default=5)
parser.add_argument("--n", default="250,1000")
parser.add_argument("--threads", type=int, default=None)
args = parser.parse_args()
n_grid = [int(v) for v in args.n.split(",")]

for kind in ("linear_confounder", "nonlinear_confounder"):
    res = run_comparison(kind, n_grid, args.reps, seed=0, threads=args.threads)
    print(f"\n{kind}: mean absolute error of the X -> Y effect")
    print(f"{'n':>6} {'slem':>8} {'baseline':>9}")
    for n in n_grid:
        print(f"{n:>6} {res.mean_mae('slem', n):8.4f} {res.mean_mae('baseline', n):9.4f}")
