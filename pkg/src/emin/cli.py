"""Command-line front end.

Exit codes: 0 success, 2 parse/usage error, 3 size-cap refusal.
"""

import argparse
import sys

import numpy as np

from .bench import (CC_SOLVERS, ENERGY_SOLVERS, SizeCapExceeded, bench_run,
                    brute_force, gen_cc_matrix, gen_grid_energy,
                    run_cc_solver, run_energy_solver)
from .core import EnergyFormatError, evaluate, read_pwe, write_pwe
from .corrclust import AffinityFormatError, cc_energy, read_aff, write_aff
from .local_moves import compact_labels


def _labels_line(L):
    return " ".join(str(int(v)) for v in L)


def cmd_solve(args):
    energy = read_pwe(args.energy)
    L = run_energy_solver(args.solver, energy, seed=args.seed)
    print("energy %.6f" % evaluate(energy, L))
    print("labels " + _labels_line(L))
    return 0


def cmd_cc(args):
    W = read_aff(args.affinity)
    L = run_cc_solver(args.solver, W, seed=args.seed)
    L, k = compact_labels(L)
    print("energy %.6f" % cc_energy(W, L))
    print("k %d" % k)
    print("labels " + _labels_line(L))
    return 0


def cmd_gen(args):
    if args.kind == "grid":
        energy = gen_grid_energy(args.height, args.width, args.labels,
                                 args.lam, args.seed)
        write_pwe(energy, args.out)
    else:
        W, gt = gen_cc_matrix(args.n, args.k, args.density, args.noise,
                              args.seed)
        write_aff(W, args.out)
        if args.gt:
            with open(args.gt, "w") as fh:
                fh.write(_labels_line(gt) + "\n")
    return 0


def cmd_bench(args):
    bench_run(args.config, args.out)
    return 0


def cmd_oracle(args):
    energy = read_pwe(args.energy)
    L, val = brute_force(energy)
    print("energy %.6f" % val)
    print("labels " + _labels_line(L))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="emin",
                                description="discrete pairwise energy minimization")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="minimize a .pwe energy")
    sp.add_argument("--energy", required=True)
    sp.add_argument("--solver", required=True, choices=ENERGY_SOLVERS)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("cc", help="correlation clustering on a .aff affinity")
    sp.add_argument("--affinity", required=True)
    sp.add_argument("--solver", required=True, choices=CC_SOLVERS)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_cc)

    sp = sub.add_parser("gen", help="generate a synthetic instance")
    gsub = sp.add_subparsers(dest="kind", required=True)
    gg = gsub.add_parser("grid")
    gg.add_argument("--height", type=int, required=True)
    gg.add_argument("--width", type=int, required=True)
    gg.add_argument("--labels", type=int, required=True)
    gg.add_argument("--lam", type=float, required=True)
    gg.add_argument("--seed", type=int, default=0)
    gg.add_argument("--out", required=True)
    gg.set_defaults(func=cmd_gen)
    gc = gsub.add_parser("cc")
    gc.add_argument("--n", type=int, required=True)
    gc.add_argument("--k", type=int, required=True)
    gc.add_argument("--density", type=float, required=True)
    gc.add_argument("--noise", type=float, required=True)
    gc.add_argument("--seed", type=int, default=0)
    gc.add_argument("--out", required=True)
    gc.add_argument("--gt", default=None)
    gc.set_defaults(func=cmd_gen)

    sp = sub.add_parser("bench", help="run a benchmark suite")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("oracle", help="brute-force optimum of a .pwe energy")
    sp.add_argument("--energy", required=True)
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SizeCapExceeded as err:
        print("refused: %s" % err, file=sys.stderr)
        return 3
    except (EnergyFormatError, AffinityFormatError, OSError, ValueError,
            KeyError) as err:
        print("error: %s" % err, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
