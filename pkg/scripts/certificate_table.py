"""Verdicts of the nonexistence certificates over a grid of exponents."""

import argparse

import numpy as np

from supercrit.certify import certify_hopf, certify_theorem1, certify_theorem4
from supercrit.geometry import make_profile
from supercrit.reduction import RotationalSpec, critical_exponent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ps", type=float, nargs="+", default=[3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
    args = ap.parse_args(argv)

    ball = make_profile("ball", center=[2.0, 0.0, 0.0], radius=1.0)
    dumbbell = make_profile("dumbbell", first_centers=[2, 5], radius=1.0, neck=0.3, dimension=3)
    growing = (lambda x: x[:, 0] ** 2,
               lambda x: np.stack([2 * x[:, 0], 0 * x[:, 1], 0 * x[:, 2]], axis=1))
    rows = {
        "rotational ball N=4 k=1": lambda p: certify_theorem1(RotationalSpec((1,), 4, ball), p, 1.0, 3.0),
        "rotational dumbbell": lambda p: certify_theorem1(RotationalSpec((1,), 4, dumbbell), p, 1.0, 6.0),
        "rotational ball K=y1^2": lambda p: certify_theorem1(RotationalSpec((1,), 4, ball, *growing), p, 1.0, 3.0),
        "two tori N=5 eps=2": lambda p: certify_theorem4((1, 1), (1.0, 1.0), 2.0, p, 5)[0],
        "Hopf C n=0": lambda p: certify_hopf(ball, 0, p, 2),
    }
    print(f"{'case':28s}" + "".join(f"p={p:<30g}" for p in args.ps))
    for name, make in rows.items():
        cells = []
        for p in args.ps:
            cert = make(p)
            cells.append(cert.verdict + (f"[{','.join(cert.failed)}]" if cert.failed else ""))
        print(f"{name:28s}" + "".join(f"{c:<32s}" for c in cells))
    print(f"threshold 2*_(4,1) = {critical_exponent(4, 1):g}")


if __name__ == "__main__":
    main()
