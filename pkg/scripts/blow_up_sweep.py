"""Center value of the positive radial solution on the unit ball as p approaches
the critical exponent, next to the mesh solution from p-continuation on the disk."""

import argparse
import csv
import sys

from supercrit.geometry import make_profile
from supercrit.reduction import critical_exponent, plain_problem
from supercrit.solver.radial import NoSolutionError, shoot_radial
from supercrit.solver.variational import SolverOptions, continuation_in_p


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--ps", type=float, nargs="+", default=[5.0, 5.5, 5.9, 5.99, 6.0])
    ap.add_argument("--disk-h", type=float, default=1 / 64,
                    help="mesh spacing for the 2-D continuation column (0 to skip)")
    args = ap.parse_args(argv)

    crit = critical_exponent(args.d)
    w = csv.writer(sys.stdout)
    w.writerow(["d", "p", "critical", "center_value"])
    for p in args.ps:
        try:
            value = f"{shoot_radial(args.d, p).center_value:.10g}"
        except NoSolutionError:
            value = "none"
        w.writerow([args.d, p, crit, value])

    if args.disk_h > 0:
        disk = make_profile("ball", center=[0, 0], radius=1.0)
        ps = [3.0, 4.0, 6.0, 8.0, 12.0]
        reps = continuation_in_p(plain_problem(disk, ps[0]), ps, SolverOptions(h=args.disk_h))
        w.writerow(["d", "p", "mesh_max", "shooting_center"])
        for p, rep in zip(ps, reps):
            w.writerow([2, p, f"{rep.field.values.max():.10g}", f"{shoot_radial(2, p).center_value:.10g}"])


if __name__ == "__main__":
    main()
