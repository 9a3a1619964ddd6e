"""Reach nonhomogeneous steady states at a target d by continuation from the
homogeneous state, validate each one and write its certificate.

    python3 scripts/find_solutions.py --out runs/d0.005 [--m 500] [--only b h]
"""
import argparse
import logging
import time
from pathlib import Path

from crossdiff import certificate as certs
from crossdiff.numerics import solution_from_bifurcation
from crossdiff.steady import ModelParams, SteadyX, validate_steady

# label: (bifurcating mode, side, mirrored); None is the homogeneous state
RECIPES = {
    "a": (1, 1, False),
    "l": (1, -1, False),
    "j": (3, 1, False),
    "b": (3, 1, True),
    "e": (4, 1, False),
    "i": (4, -1, False),
    "h": None,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", default="0.005")
    ap.add_argument("--m", type=int, default=500)
    ap.add_argument("--nu", type=float, default=1.06)
    ap.add_argument("--only", nargs="*", default=list(RECIPES))
    ap.add_argument("--out", required=True)
    a = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    print("label  v(0)      radius       seconds")
    for label in a.only:
        t0 = time.perf_counter()
        recipe = RECIPES[label]
        if recipe is None:
            X = SteadyX.homogeneous(ModelParams.with_d(a.d), a.m, a.nu)
        else:
            k, sign, mirrored = recipe
            X = solution_from_bifurcation(a.d, k, sign, m=a.m, nu=a.nu, reflected=mirrored)
        cert = validate_steady(X)
        certs.write(certs.steady_doc(cert), out / f"steady_{label}.json")
        r = f"{cert.r_min:.4e}" if cert.valid else f"FAILED {cert.failure}"
        print(f"({label})    {X.v0():.4f}    {r}   {time.perf_counter() - t0:.1f}")


if __name__ == "__main__":
    main()
