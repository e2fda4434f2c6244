"""Smoke test for the nsubdiv extension module. Exits nonzero on failure."""

import cmath
import math

import nsubdiv


def main():
    assert "dual4_binary" in nsubdiv.catalog_ids()

    m = nsubdiv.DilationMatrix([[1, 1], [-1, 1]])
    assert m.m == 2 and m.det == 2
    assert len(m.coset_reps()) == 2
    dual = m.dual_points()
    assert dual[0] == [1, 1]

    a = nsubdiv.LaurentSymbol(1, {(0,): 1, (1,): 1})
    b = a * a
    assert b.terms() == {(0,): 1, (1,): 2, (2,): 1}
    z = [cmath.exp(0.3j)]
    assert abs(b.weighted_derivative([1], z) - z[0] * 2 * (1 + z[0])) < 1e-12

    lam = 1.0
    scheme = nsubdiv.Scheme.catalog("dual4_binary", '{"lambda": [[1, 0]]}')
    space = nsubdiv.Space([([1], [0]), ([0], [lam]), ([0], [-lam])])
    tau = nsubdiv.solve_tau(scheme, space)
    assert abs(tau[0] + 0.5) < 1e-10, tau

    rep = nsubdiv.check_reproduction(scheme, space, tau)
    assert rep["verdict"] == "pass", rep["max_residual"]
    bad = nsubdiv.check_reproduction(scheme, space, [0.0])
    assert bad["verdict"] == "fail"
    step = nsubdiv.stepwise_test(scheme, space, tau, kmax=3)
    assert step["verdict"] == "pass"

    limit = scheme.symbol(20)
    want = [-5, -7, 35, 105, 105, 35, -7, -5]
    for e, c in zip(range(-4, 4), want):
        assert abs(limit.coeff([e]) - c / 128) < 1e-8

    spline = nsubdiv.Scheme.catalog("exp_bspline", '{"m": 2, "lambda": [[1, 0]]}')
    samples = nsubdiv.limit_samples(spline, 12)
    mid = [v for t, v in samples if t == [0.5]][0]
    assert abs(mid - math.exp(0.5)) < 1e-3

    refined = nsubdiv.refine(spline, {(0,): 1.0}, 1)
    assert set(refined) == {(0,), (1,)}

    again = nsubdiv.Scheme.from_json(scheme.to_json())
    assert again.symbol(3) == scheme.symbol(3)

    bf = nsubdiv.Scheme.catalog("butterfly")
    assert nsubdiv.is_interpolatory(bf.symbol(2), bf.dilation)
    gen = nsubdiv.check_generation(bf, nsubdiv.Space.exp_polynomials([1, 1], 3), kmax=2, tol=1e-10)
    assert gen["verdict"] == "pass"

    try:
        nsubdiv.DilationMatrix([[1, 0], [0, 1]])
    except ValueError:
        pass
    else:
        raise AssertionError("identity accepted as a dilation matrix")

    print("smoke test passed")


if __name__ == "__main__":
    main()
