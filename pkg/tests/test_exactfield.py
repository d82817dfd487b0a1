import random
from fractions import Fraction

import pytest

from dva.exactfield import (
    CycloElem,
    DenominatorVanishes,
    DivisionByZero,
    MultiPoly,
    RatFunc,
    Series,
    cyclo_reduce,
    cyclotomic_poly,
    euler_phi,
    rf_arith,
    rf_eval,
    sample_point,
    series_exp_of_sum,
    series_log_coeffs,
)

P = RatFunc.var("p")
Q = RatFunc.var("q")
H = RatFunc.var("h")
A = RatFunc.var("a")
W = RatFunc.var("w")
ONE = RatFunc.const(1)


def rand_poly(rng, nvars=3, nterms=3, maxexp=2):
    d = {}
    for _ in range(nterms):
        e = [0] * 5
        for i in range(nvars):
            e[i] = rng.randint(0, maxexp)
        d[tuple(e)] = d.get(tuple(e), 0) + Fraction(rng.randint(-6, 6))
    return MultiPoly(d)


def rand_rf(rng):
    num = rand_poly(rng)
    den = MultiPoly({})
    while den.is_zero():
        den = rand_poly(rng)
    return RatFunc(num, den)


def test_add_identity():
    r = (1 - Q) / (1 + P)
    assert rf_arith("add", r, RatFunc.const(0)) == r


def test_gcd_cancellation():
    r = (1 - Q * Q) / (1 - Q)
    assert r == 1 + Q
    assert r.den == 1


def test_zeta_expansion():
    # -(1-q)(1-t^-1)/(1-p) with t = q/p equals -(1-q)(q-p)/(q(1-p))
    t_inv = P / Q
    zeta = -(1 - Q) * (1 - t_inv) / (1 - P)
    expect = (-(1 - Q) * (Q - P)) / (Q * (1 - P))
    assert zeta == expect


def test_div_by_zero():
    with pytest.raises(DivisionByZero):
        rf_arith("div", ONE, RatFunc.const(0))


def test_w_contract():
    assert W * W == P
    assert W ** 2 == P
    assert (W - 1) * (W + 1) == P - 1
    inv = 1 / (W + 1)
    assert inv * (W + 1) == 1
    # 1/w = w/p
    assert 1 / W == W / P


def test_cyclo_reduce_basics():
    q3 = MultiPoly.const(1) + MultiPoly.var("q") + MultiPoly.var("q", 2)
    assert cyclo_reduce(q3, 3).is_zero()
    assert cyclo_reduce(MultiPoly.var("q", 3), 3) == 1
    r = cyclo_reduce(MultiPoly.var("q", 2), 4)
    assert r == -1


def test_cyclo_negative_exponent():
    # q^-1 = q^(N-1)
    r = cyclo_reduce(MultiPoly.var("q", -1), 5)
    assert r == CycloElem.root(5, 4, base="rf")


def test_cyclo_inverse():
    z = CycloElem.root(5)
    assert z * z.inverse() == 1
    u = 1 - CycloElem.root(3)
    assert u * u.inverse() == 1
    with pytest.raises(DivisionByZero):
        CycloElem.scalar(3, 0).inverse()


def test_cyclotomic_polys():
    assert cyclotomic_poly(1) == [-1, 1]
    assert cyclotomic_poly(2) == [1, 1]
    assert cyclotomic_poly(3) == [1, 1, 1]
    assert cyclotomic_poly(4) == [1, 0, 1]
    assert cyclotomic_poly(6) == [1, -1, 1]
    assert cyclotomic_poly(12) == [1, 0, -1, 0, 1]
    assert euler_phi(12) == 4


def test_series_exp_trivial():
    s = series_exp_of_sum(lambda n: Fraction(0), 5)
    assert s.coeffs == [1, 0, 0, 0, 0, 0]


def test_series_exp_geometric():
    a = Fraction(2, 3)
    s = series_exp_of_sum(lambda n: a ** n, 4)
    # exp(sum a^n x^n / n) = 1/(1-ax)
    assert s.coeff(2) == a * a
    assert s.coeff(4) == a ** 4


def test_series_exp_symbolic_first_order():
    t_inv = P / Q

    def g(n):
        return (1 - Q ** n) * (1 - t_inv ** n) / (1 + P ** n)

    s = series_exp_of_sum(g, 2, one=ONE)
    assert s.coeff(0) == 1
    assert s.coeff(1) == (1 - Q) * (1 - t_inv) / (1 + P)


def test_series_log_roundtrip():
    rng = random.Random(7)
    g = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(8)]
    s = series_exp_of_sum(lambda n: g[n - 1], 8)
    assert series_log_coeffs(s) == g


def test_series_div():
    x_one = Series.one("x", 6)
    num = Series("x", 6, [Fraction(v) for v in [1, 0, 0, -1, 0, 0, 0]])
    den = Series("x", 6, [Fraction(v) for v in [1, -1, 0, 0, 0, 0, 0]])
    quot = num / den
    # (1-x^3)/(1-x) = 1+x+x^2
    assert quot.coeffs == [1, 1, 1, 0, 0, 0, 0]
    assert (den * den.inverse()) == x_one


def test_rf_eval_points():
    r = (1 - Q) / (1 + P)
    assert rf_eval(r, {"p": Fraction(2), "q": Fraction(3)}) == Fraction(-2, 3)
    r2 = H * H - (1 + P) ** 2 / P
    assert rf_eval(r2, {"p": Fraction(2), "h": Fraction(0)}) == Fraction(-9, 2)
    r3 = 1 + Q + Q ** 2
    z = CycloElem.root(3)
    assert not rf_eval(r3, {"q": z})


def test_rf_eval_vanishing_denominator():
    r = ONE / (1 - Q)
    with pytest.raises(DenominatorVanishes):
        rf_eval(r, {"q": Fraction(1)})


def test_ring_axioms_random():
    rng = random.Random(12345)
    for _ in range(100):
        a, b, c = rand_rf(rng), rand_rf(rng), rand_rf(rng)
        assert (a + b) + c == a + (b + c)
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a


def test_canonical_idempotent():
    rng = random.Random(99)
    for _ in range(40):
        r = rand_rf(rng)
        again = RatFunc(r.num, r.den)
        assert again.num.terms == r.num.terms
        assert again.den.terms == r.den.terms


def test_eval_homomorphism():
    rng = random.Random(4)
    pts = [sample_point(random.Random(k)) for k in range(4)]
    for _ in range(25):
        a, b = rand_rf(rng), rand_rf(rng)
        for pt in pts:
            try:
                va, vb = rf_eval(a, pt), rf_eval(b, pt)
                vab = rf_eval(a * b, pt)
            except DenominatorVanishes:
                continue
            assert vab == va * vb


def test_cyclo_reduce_is_ring_hom():
    rng = random.Random(31)
    for N in (2, 3, 4, 5, 6):
        for _ in range(10):
            a = rand_poly(rng, nvars=2)
            b = rand_poly(rng, nvars=2)
            ra, rb, rab = cyclo_reduce(a, N), cyclo_reduce(b, N), cyclo_reduce(a * b, N)
            assert rab == ra * rb


def test_string_roundtrip():
    rng = random.Random(2024)
    cases = [
        (1 - Q) / (1 + P),
        RatFunc.const(Fraction(-2, 3)),
        ONE / (P ** 2),
        (H ** 2 - 2 * A + 1) / (Q ** 3 - P),
        W / (1 + P),
        RatFunc.const(0),
        P ** -2 * Q ** 5 - H,
    ]
    for _ in range(30):
        cases.append(rand_rf(rng))
    for r in cases:
        assert RatFunc.parse(str(r)) == r


def test_a_flip():
    r = (A - 1 / A) / (1 - Q)
    flipped = r.a_flip()
    # a -> p/a twice is the identity
    assert flipped.a_flip() == r
    assert flipped == (P / A - A / P) / (1 - Q)


def test_substitute():
    r = (1 - Q) / (1 + P)
    s = r.substitute({"q": Q ** 2})
    assert s == (1 - Q ** 2) / (1 + P)


def test_sample_point_exclusions():
    for seed in range(60):
        pt = sample_point(random.Random(seed))
        assert pt["p"] not in (0, 1, -1)
        assert pt["q"] not in (0, 1)
        assert pt["p"] != pt["q"]
    # determinism
    assert sample_point(random.Random(5)) == sample_point(random.Random(5))
    sq = sample_point(random.Random(8), square=True)
    assert sq["w"] * sq["w"] == sq["p"]


def test_cyclo_with_ratfunc_entries():
    z = CycloElem.root(3, base="rf")
    val = (1 - z) * (1 - z ** 2)
    # (1-q)(1-q^2) at a primitive cube root equals 3
    assert val == 3
