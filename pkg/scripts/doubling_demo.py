"""Doubling ratios, frequency N and three-sphere constants for harmonic polynomials
and for discrete solutions computed on the unit disk."""

from sgplate.discretization import SplineField, assemble, build_space
from sgplate.geometry import Disk
from sgplate.material import MaterialField
from sgplate.neumann import synthesize
from sgplate.solver import solve
from sgplate.uc_lab import ball_profile, doubling_radii, doubling_report, harmonic_battery, three_sphere_report


def main(R1=0.5):
    mat, dom = MaterialField(mu=1, lam=1), Disk(1.0)
    fields = list(harmonic_battery())
    for expr in ("x1**3", "x1**2*x2 - x2**3/3"):
        space = build_space(dom, 5, 8)
        fields.append(SplineField(space, solve(assemble(space, mat, synthesize(expr, mat, dom))).coefs,
                                  name=f"solve[{expr}]"))
    print(f"{'field':>28} {'N':>12} {'ratios (min..max)':>24} {'C_cert':>10} {'3-sphere C':>10}")
    for f in fields:
        prof = ball_profile(f, doubling_radii(R1))
        rep = doubling_report(prof, R1)
        ts = three_sphere_report(prof, R1 / 2**10, R1 / 2**9, R1)
        r = sorted(rep.ratios.values())
        print(f"{f.name:>28} {rep.N:12.4g} {r[0]:11.6g}..{r[-1]:<11.6g} {rep.certified_C:10.3g} {ts.C_min:10.3g}")


if __name__ == "__main__":
    main()
