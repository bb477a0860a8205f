"""H^3-seminorm errors and observed rates for several degrees on the disk and the superellipse.

The manufactured field solves the constant-coefficient plate equation exactly,
so the synthesized Neumann data are compatible and no body load is needed.
"""

import argparse

import numpy as np

from sgplate.discretization import assemble, build_space
from sgplate.experiments import exact_solution_expr
from sgplate.fields import AnalyticField
from sgplate.geometry import Disk, RoundedRectangle
from sgplate.material import MaterialField
from sgplate.neumann import synthesize
from sgplate.solver import h3_error, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degrees", type=int, nargs="+", default=[3, 4, 5, 6])
    ap.add_argument("--meshes", type=int, nargs="+", default=[4, 8, 16])
    args = ap.parse_args()
    mat = MaterialField(mu=1, lam=1)
    u = AnalyticField(exact_solution_expr(mat))
    for dom in (Disk(1.0), RoundedRectangle(2.0, 1.0)):
        data = synthesize(u, mat, dom)
        width = dom.bbox[1] - dom.bbox[0]
        print(f"\n{dom.describe()}")
        print(f"{'p':>3} {'n_el':>5} {'dofs':>6} {'|u - u_h|_3':>12} {'rate':>6}")
        for p in args.degrees:
            prev = None
            for n in args.meshes:
                space = build_space(dom, p, n)
                e = h3_error(space, solve(assemble(space, mat, data)).coefs, u)["seminorm3"]
                rate = "" if prev is None else f"{np.log2(prev / e):6.2f}"
                print(f"{p:>3} {n:>5} {space.dim:>6} {e:12.4e} {rate:>6}")
                prev = e
            print(f"    expected rate p - 2 = {p - 2}  (h = {width}/n_el)")


if __name__ == "__main__":
    main()
