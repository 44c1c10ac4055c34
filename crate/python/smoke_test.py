#!/usr/bin/env python3
"""Smoke test for the hlawka extension module.

Build and stage the module first:

    cargo build -p hlawka-py --release
    cp target/release/libhlawka.so python/hlawka.so

then run `python3 python/smoke_test.py`.
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import hlawka

TOL = 1e-9


def check(name, ok):
    status = "ok" if ok else "FAIL"
    print(f"  {status}: {name}")
    if not ok:
        raise SystemExit(f"smoke test failed at: {name}")


def main():
    print("scalar operations")
    check("x/(x+1) at 1", abs(hlawka.eval_function("ratio", 1.0) - 0.5) < 1e-15)
    check(
        "(x-1)/log x limit at 1",
        abs(hlawka.eval_function("ratio-log", 1.0) - 1.0) < 1e-15,
    )
    check(
        "third divided difference of x^3",
        abs(hlawka.divided_difference("poly:0,0,0,1", [0.0, 1.0, 2.0, 3.0]) - 1.0) < 1e-12,
    )
    check(
        "iterated difference of x^3 = 6abc",
        abs(hlawka.iterated_difference("poly:0,0,0,1", 0.0, [1.0, 2.0, 3.0]) - 36.0) < 1e-12,
    )
    check(
        "Bernstein of x^2 at 0.5, degree 10",
        abs(hlawka.bernstein_poly("poly:0,0,1", 10, 0.5) - 0.275) < 1e-14,
    )
    probe = hlawka.n_convexity_probe("hh-cex", 0.0, 6.0, 3)
    check("cubic passes order-3 probe with margin 1/6",
          probe["passed"] and abs(probe["min_margin"] - 1 / 6) < 1e-9)
    probe = hlawka.n_convexity_probe("hh-cex", 0.0, 6.0, 1)
    check("cubic fails the monotonicity probe", not probe["passed"])

    print("cone operations")
    v = hlawka.cone_iterated_difference("min2", [0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]])
    check("rectangle increment of min", abs(v - 1.0) < 1e-15)
    v = hlawka.cone_iterated_difference(
        "neg-2sqrt", [0.01, 0.01], [[1.0, 2.0], [2.0, 1.0]]
    )
    check("-2 sqrt(xy) violation near the origin", v < -0.34)
    ln2 = math.log(2.0)
    s = hlawka.sz_alternating_sum("exp-inner:1,1", [[ln2, 0.0], [0.0, ln2]])
    check("alternating exponential sum", abs(s - 0.75) < 1e-12)
    p, q = hlawka.bernstein_pq([ln2, ln2])
    check("P and Q product identities", abs(p - 0.75) < 1e-12 and abs(q - 0.25) < 1e-12)
    d = hlawka.double_divided_diff([0.0, 1.0, 2.0], [0.0, 1.0], lambda x, y: x * x * y)
    check("double divided difference of x^2 y", abs(d - 1.0) < 1e-12)

    print("matrix operations")
    a = hlawka.SymMatrix([[2.0, 1.0], [1.0, 2.0]])
    check("eigenvalues of [[2,1],[1,2]]", max(
        abs(l - e) for l, e in zip(a.eigenvalues(), [1.0, 3.0])) < 1e-12)
    d3 = hlawka.SymMatrix.diagonal([1.0, 2.0, 3.0])
    check("e_2(diag(1,2,3)) = 11", abs(d3.esym(2) - 11.0) < 1e-12)
    ones = hlawka.SymMatrix([[1.0, 1.0], [1.0, 1.0]])
    check("permanent of the ones matrix", abs(ones.permanent() - 2.0) < 1e-15)
    check("sign immanant = det", abs(a.immanant("sign") - a.det()) < 1e-12)
    t = hlawka.tensor_power(hlawka.SymMatrix.diagonal([1.0, 2.0]), 2)
    check("tensor power of diag(1,2)", t.rows()[3][3] == 4.0)

    print("inequality margins")
    i2 = hlawka.SymMatrix.identity(2)
    z2 = i2.scale(0.0)
    m = hlawka.det_hlawka(i2, i2, i2, z2)
    check("determinant inequality equality case", abs(m["value"]) < 1e-12)
    m = hlawka.operator_hh(i2, i2, i2, z2, 2)
    check("operator inequality equality case", abs(m["value"]) < 1e-12 and m["passed"])
    m = hlawka.serre_reverse(i2, i2, i2)
    check("reversed det^(1/2) equality case", abs(m["value"]) < 1e-12)
    m = hlawka.detrho_alternating([i2, i2], 0.5)
    check("det^(-1/2) alternating sum", abs(m["value"] - 1.5) < 1e-12)

    print("campaign harness")
    ids = [entry["id"] for entry in hlawka.list_inequalities()]
    check("registry lists op-hh", "op-hh" in ids)
    report = hlawka.campaign("op-hh", trials=200, seed=42, dim=2, power=2)
    check("operator campaign has no failures", report["failures"] == 0)
    report = hlawka.campaign("det-diff", trials=200, order=4, dim=3)
    check("determinant campaign has no failures", report["failures"] == 0)
    witness = hlawka.search("cex-popoviciu-exp", trials=3000)
    check("search finds the exp violation", witness is not None and witness["margin"] <= -0.25)
    check("search finds nothing for the theorem",
          hlawka.search("det-hh", trials=300) is None)
    demos = hlawka.demo_counterexamples()
    check("three built-in counterexamples", len(demos) == 3)
    check("canonical exp witness margin",
          abs(demos[0]["margin"] + 0.2525804578276471) < 1e-12)

    print("all smoke tests passed")


if __name__ == "__main__":
    main()
