"""Verma modules over the two-parameter deformed Virasoro generators.

The generators T_m obey a quadratic exchange relation whose structure
constants come from a single power series f and a central term c_m.  This
module builds that data in several variants (generic parameters, q at a root
of unity, the q = -1 branch, the one-parameter limit with its own exchange
relations, and user-supplied branches), normal-orders arbitrary generator
words against a highest-weight vector, and derives from that engine the Gram
matrices, Kac-type determinant formulas, quotient-module forms, explicit
singular vectors, and the centrality checks of the one-parameter limit.

Coefficients live in one of four exact domains chosen at construction time:
rational numbers, rational functions in (p, q, h), cyclotomic numbers, or
cyclotomic numbers with rational-function coordinates.  All arithmetic is
exact; nothing here is numerical.

Action results on basis monomials are memoized per algebra instance.  The
memo is a plain dict written once per key with a deterministic value, so
concurrent readers are safe and results are scheduling-independent.
"""

import itertools
import json
from fractions import Fraction

from .exactfield import (
    CycloElem,
    DenominatorVanishes,
    DivisionByZero,
    ExactFieldError,
    RatFunc,
    Series,
    geometric_series,
    rf_eval,
    series_exp_of_sum,
    to_cyclo,
)
from .partitions import Partition, char_series, partitions_of, q_multinomial, stat
from .symfunc import kostka_matrix

VARIANTS = ("generic", "q_root", "q_minus1", "t_infinity", "custom")


class AlgebraError(ValueError):
    pass


class ResampleNeeded(AlgebraError):
    """A numeric specialization hit a vanishing denominator; redraw the point."""


# ---------------------------------------------------------------------------
# scalar domains


def _nz(c):
    probe = getattr(c, "is_zero", None)
    if probe is not None:
        return not probe()
    return bool(c)


def _inv(c):
    if isinstance(c, CycloElem):
        return c.inverse()
    if isinstance(c, RatFunc):
        return c ** (-1)
    return Fraction(1) / c


def _rf_base(ce):
    # uniform RatFunc coordinates; mixing bases inside one domain is unsafe
    if isinstance(ce.coeffs[0], RatFunc):
        return ce
    return CycloElem(ce.N, [RatFunc.const(c) for c in ce.coeffs])


class _Scalars:
    """One exact coefficient field with its distinguished values.

    kind is "frac" (rationals), "rf" (rational functions), "cyclo"
    (cyclotomic over rationals) or "cyclo_rf" (cyclotomic over rational
    functions); N is the cyclotomic order when applicable.  p may be None
    for the one-parameter limit.
    """

    __slots__ = ("kind", "N", "one", "zero", "p", "q", "h")

    def __init__(self, kind, N, one, zero, p, q, h):
        self.kind = kind
        self.N = N
        self.one = one
        self.zero = zero
        self.p = p
        self.q = q
        self.h = h

    def wrap(self, value):
        """Coerce a plain number (or compatible scalar) into this domain."""
        if self.kind == "frac":
            if isinstance(value, RatFunc):
                return value.as_fraction()
            return Fraction(value)
        if self.kind == "rf":
            if isinstance(value, RatFunc):
                return value
            return RatFunc.const(Fraction(value))
        ce = to_cyclo(value, self.N)
        if self.kind == "cyclo_rf":
            return _rf_base(ce)
        if isinstance(ce.coeffs[0], RatFunc):
            raise AlgebraError("symbolic value in a numeric cyclotomic domain")
        return ce


def _numeric(value):
    return isinstance(value, (int, Fraction))


def _scalars_for(variant, N, p, q, h):
    if variant == "q_root":
        if q is not None:
            raise AlgebraError("q is fixed to the chosen root of unity")
        pointlike = lambda v: _numeric(v) or isinstance(v, CycloElem)
        if p is not None and h is not None and pointlike(p) and pointlike(h):
            one = CycloElem.scalar(N, Fraction(1))
            return _Scalars("cyclo", N, one, one * 0, to_cyclo(p, N),
                            CycloElem.root(N), to_cyclo(h, N))
        one = _rf_base(CycloElem.scalar(N, Fraction(1)))

        def slot(value, name):
            if value is None:
                return one * RatFunc.var(name)
            if pointlike(value):
                return _rf_base(to_cyclo(value, N))
            return one * value

        return _Scalars("cyclo_rf", N, one, one * 0, slot(p, "p"),
                        _rf_base(CycloElem.root(N)), slot(h, "h"))
    if variant == "q_minus1":
        if q not in (None, -1, Fraction(-1)):
            raise AlgebraError("this branch lives at q = -1")
        if isinstance(p, CycloElem):
            M = p.N
            one = CycloElem.scalar(M, Fraction(1))
            if h is None:
                raise AlgebraError("cyclotomic p needs an explicit h")
            return _Scalars("cyclo", M, one, one * 0, p, one * (-1),
                            to_cyclo(h, M))
        if _numeric(p) and _numeric(h):
            return _Scalars("frac", None, Fraction(1), Fraction(0),
                            Fraction(p), Fraction(-1), Fraction(h))
        one = RatFunc.const(1)
        sp = RatFunc.var("p") if p is None else RatFunc.const(p)
        sh = RatFunc.var("h") if h is None else RatFunc.const(h)
        return _Scalars("rf", None, one, RatFunc.const(0), sp,
                        RatFunc.const(-1), sh)
    if variant == "t_infinity":
        if p is not None:
            raise AlgebraError("the one-parameter limit has no p")
        if N is not None:
            if q is not None:
                raise AlgebraError("q is fixed to the chosen root of unity")
            if h is not None and (_numeric(h) or isinstance(h, CycloElem)):
                one = CycloElem.scalar(N, Fraction(1))
                return _Scalars("cyclo", N, one, one * 0, None,
                                CycloElem.root(N), to_cyclo(h, N))
            one = _rf_base(CycloElem.scalar(N, Fraction(1)))
            sh = one * (RatFunc.var("h") if h is None else RatFunc.const(h))
            return _Scalars("cyclo_rf", N, one, one * 0, None,
                            _rf_base(CycloElem.root(N)), sh)
        if _numeric(q) and _numeric(h):
            return _Scalars("frac", None, Fraction(1), Fraction(0), None,
                            Fraction(q), Fraction(h))
        one = RatFunc.const(1)
        sq = RatFunc.var("q") if q is None else RatFunc.const(q)
        sh = RatFunc.var("h") if h is None else RatFunc.const(h)
        return _Scalars("rf", None, one, RatFunc.const(0), None, sq, sh)
    # generic and custom share the (p, q, h) domain logic
    if isinstance(q, CycloElem) or isinstance(p, CycloElem):
        raise AlgebraError("use the q_root variant for roots of unity")
    if _numeric(p) and _numeric(q) and _numeric(h):
        return _Scalars("frac", None, Fraction(1), Fraction(0),
                        Fraction(p), Fraction(q), Fraction(h))
    one = RatFunc.const(1)
    sp = RatFunc.var("p") if p is None else RatFunc.const(p)
    sq = RatFunc.var("q") if q is None else RatFunc.const(q)
    sh = RatFunc.var("h") if h is None else RatFunc.const(h)
    return _Scalars("rf", None, one, RatFunc.const(0), sp, sq, sh)


# ---------------------------------------------------------------------------
# algebra construction


class AlgebraSpec:
    """A fully specified variant: structure series, central terms, domain.

    f_coeffs holds the structure series f as a Series over the coefficient
    domain; f(l) extends it on demand.  c(m) is the central term, odd under
    m -> -m.  The engine field selects the exchange-relation family: the
    two-sided family driven by f, or the one-parameter limit's q-commutator
    family.
    """

    __slots__ = ("variant", "max_order", "N", "sc", "f_coeffs", "c_fn",
                 "engine", "_f", "_memo")

    def __init__(self, variant, max_order, N, sc, f_list, c_fn, engine):
        self.variant = variant
        self.max_order = max_order
        self.N = N
        self.sc = sc
        self._f = list(f_list)
        self.f_coeffs = Series("x", len(self._f) - 1, list(self._f))
        self.c_fn = c_fn
        self.engine = engine
        self._memo = {}

    def f(self, l):
        if l < 0:
            raise AlgebraError("structure coefficients start at index 0")
        while l >= len(self._f):
            self._extend_f(max(l, 2 * len(self._f)))
        return self._f[l]

    def _extend_f(self, upto):
        if self.variant == "q_minus1":
            two = self.sc.wrap(2)
            self._f += [two] * (upto + 1 - len(self._f))
        elif self.variant == "t_infinity":
            g = self.sc.one - self.sc.q
            self._f += [g] * (upto + 1 - len(self._f))
        elif self.variant == "custom":
            raise AlgebraError(
                "custom branch supplied only %d structure coefficients"
                % len(self._f))
        else:
            self._f = _f_series_exp(self.sc, upto).coeffs

    def c(self, m):
        return self.c_fn(m)

    def __repr__(self):
        return "AlgebraSpec(%r, order=%d%s)" % (
            self.variant, self.max_order,
            "" if self.N is None else ", N=%d" % self.N)


def _f_series_exp(sc, L):
    """exp-form structure series from the (p, q) parameters."""
    p, q, one = sc.p, sc.q, sc.one

    def g(n):
        # (1 - q^n)(1 - t^-n) / (1 + p^n) with t = q / p
        pn = p ** n
        return (one - q ** n) * (one - pn * _inv(q ** n)) * _inv(one + pn)

    return series_exp_of_sum(g, L, one=one)


def _check_exchange_series(sc, fser):
    """f(x) f(px) must reproduce the defining rational function."""
    L = fser.order
    one, zero, p, q = sc.one, sc.zero, sc.p, sc.q
    fp = Series("x", L, [fser.coeff(k) * p ** k for k in range(L + 1)])
    lhs = fser * fp
    lin = [one] + [zero] * L
    lin1 = list(lin)
    lin2 = list(lin)
    if L >= 1:
        lin1[1] = -q
        lin2[1] = -(_inv(q) * p)
    rhs = (Series("x", L, lin1) * Series("x", L, lin2)
           * geometric_series(one, L, one=one)
           * geometric_series(p, L, one=one))
    for k in range(L + 1):
        if _nz(lhs.coeff(k) - rhs.coeff(k)):
            raise AlgebraError(
                "structure series fails its defining check at order %d" % k)


def make_algebra(variant, L, N=None, p=None, q=None, h=None, f=None, c=None):
    """Build an AlgebraSpec for one variant with structure data to order L.

    p, q, h choose the coefficient domain: omitted means symbolic, rational
    values give a rational domain, cyclotomic values a cyclotomic one.  The
    q_root variant fixes q to a primitive N-th root of unity.  The custom
    variant takes the structure coefficients f (list or callable-free list)
    and the central-term function c verbatim, without the series check.
    """
    if variant not in VARIANTS:
        raise AlgebraError("unknown variant %r" % (variant,))
    if L < 0:
        raise AlgebraError("max order must be nonnegative")
    if variant == "q_root":
        if N is None or N < 2:
            raise AlgebraError("q_root needs a root order N >= 2")
    elif variant == "t_infinity":
        if N is not None and N < 2:
            raise AlgebraError("root order must be at least 2")
    elif N is not None:
        raise AlgebraError("N only applies to q_root and t_infinity")
    sc = _scalars_for(variant, N, p, q, h)
    if variant in ("generic", "q_root"):
        fser = _f_series_exp(sc, L)
        _check_exchange_series(sc, fser)
        zeta = _zeta(sc)
        pw = sc.p

        def c_fn(m, _z=zeta, _p=pw):
            if m == 0:
                return sc.zero
            return _z * (_p ** m - _inv(_p ** m))

        alg_N = N if variant == "q_root" else None
        return AlgebraSpec(variant, L, alg_N, sc, fser.coeffs, c_fn, "bilateral")
    if variant == "q_minus1":
        two = sc.wrap(2)
        f_list = [sc.one] + [two] * L

        def c_fn(m):
            if m == 0:
                return sc.zero
            ratio = (sc.one + sc.p) * _inv(sc.one - sc.p)
            return -(two * ratio * (sc.p ** m - _inv(sc.p ** m)))

        return AlgebraSpec(variant, L, 2, sc, f_list, c_fn, "bilateral")
    if variant == "t_infinity":
        gap = sc.one - sc.q
        f_list = [sc.one] + [gap] * L

        def c_fn(m):
            if m == 0:
                return sc.zero
            return gap if m > 0 else -gap

        return AlgebraSpec(variant, L, N, sc, f_list, c_fn, "tinf")
    # custom
    if f is None or c is None:
        raise AlgebraError("custom branch needs explicit f list and c function")
    f_list = [sc.wrap(x) if not _same_domain(sc, x) else x for x in f]
    if not f_list or _nz(f_list[0] - sc.one):
        raise AlgebraError("the structure series must start with 1")

    def c_fn(m, _c=c):
        val = _c(m)
        return val if _same_domain(sc, val) else sc.wrap(val)

    return AlgebraSpec("custom", L, None, sc, f_list, c_fn, "bilateral")


def _same_domain(sc, value):
    if sc.kind == "frac":
        return isinstance(value, Fraction)
    if sc.kind == "rf":
        return isinstance(value, RatFunc)
    return isinstance(value, CycloElem)


def _zeta(sc):
    # the central-term normalization -(1 - q)(q - p) / (q (1 - p))
    one, p, q = sc.one, sc.p, sc.q
    return -((one - q) * (q - p) * _inv(q * (one - p)))


# ---------------------------------------------------------------------------
# Verma vectors


def _vkey(parts):
    return tuple(-x for x in parts)


class VermaVector:
    """Homogeneous element of a Verma module in the ordered monomial basis.

    Keys are weakly decreasing tuples of positive integers (the negated
    generator subscripts); values are coefficients in the algebra's domain.
    """

    __slots__ = ("coeffs", "level")

    def __init__(self, coeffs, level=None):
        clean = {}
        for key, val in coeffs.items():
            key = tuple(key)
            if any(x <= 0 for x in key) or list(key) != sorted(key, reverse=True):
                raise AlgebraError("bad basis key %r" % (key,))
            if _nz(val):
                clean[key] = val
        self.coeffs = clean
        if clean:
            levels = {sum(k) for k in clean}
            if len(levels) > 1:
                raise AlgebraError("inhomogeneous vector: levels %s"
                                   % sorted(levels))
            self.level = levels.pop()
        else:
            self.level = level

    @staticmethod
    def vacuum(alg):
        return VermaVector({(): alg.sc.one}, level=0)

    @staticmethod
    def basis_state(alg, parts):
        parts = tuple(parts)
        return VermaVector({parts: alg.sc.one}, level=sum(parts))

    def is_zero(self):
        return not self.coeffs

    def terms_sorted(self):
        return sorted(self.coeffs, key=_vkey, reverse=True)

    def scaled(self, c):
        return VermaVector({k: c * v for k, v in self.coeffs.items()},
                           level=self.level)

    def __add__(self, other):
        if not isinstance(other, VermaVector):
            return NotImplemented
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            cur = out.get(k)
            out[k] = v if cur is None else cur + v
        lev = self.level if self.level is not None else other.level
        return VermaVector(out, level=lev)

    def __sub__(self, other):
        return self + other.scaled(-_one_like(other, self))

    def __eq__(self, other):
        if not isinstance(other, VermaVector):
            return NotImplemented
        keys = set(self.coeffs) | set(other.coeffs)
        for k in keys:
            a = self.coeffs.get(k)
            b = other.coeffs.get(k)
            if a is None or b is None:
                return False
            if _nz(a - b):
                return False
        return True

    def __hash__(self):
        return hash(frozenset(self.coeffs))

    def to_json(self):
        terms = [{"partition": ",".join(str(x) for x in k),
                  "coeff": str(self.coeffs[k])}
                 for k in self.terms_sorted()]
        return json.dumps({"level": self.level, "terms": terms})

    @staticmethod
    def from_json(text):
        data = json.loads(text)
        out = {}
        for term in data["terms"]:
            pstr = term["partition"]
            key = tuple(int(x) for x in pstr.split(",")) if pstr else ()
            cstr = term["coeff"]
            if any(ch.isalpha() for ch in cstr):
                out[key] = RatFunc.parse(cstr)
            else:
                out[key] = Fraction(cstr)
        return VermaVector(out, level=data.get("level"))

    def __repr__(self):
        if not self.coeffs:
            return "VermaVector(0)"
        bits = ["%s: %s" % (k or "()", self.coeffs[k])
                for k in self.terms_sorted()]
        return "VermaVector{%s}" % "; ".join(bits)


def _one_like(sample_vec, other_vec):
    for v in sample_vec.coeffs.values():
        return _scalar_one(v)
    for v in other_vec.coeffs.values():
        return _scalar_one(v)
    return 1


def _scalar_one(v):
    if isinstance(v, CycloElem):
        return CycloElem.scalar(v.N, RatFunc.const(1)
                                if isinstance(v.coeffs[0], RatFunc)
                                else Fraction(1))
    if isinstance(v, RatFunc):
        return RatFunc.const(1)
    return Fraction(1)


# ---------------------------------------------------------------------------
# the rewrite engines


def _act_basis(alg, m, lam, l_extra=0):
    """T_m applied to the basis monomial lam, as a key -> coefficient dict.

    A raising generator whose subscript magnitude dominates the first part
    prepends; anything else is pushed through the leading generator with the
    exchange relation and recursion on strictly smaller weights.  The
    returned dicts are shared via the memo table and must not be mutated.
    """
    if l_extra == 0:
        memo = alg._memo
        hit = memo.get((m, lam))
        if hit is None:
            hit = _expand(alg, m, lam, 0)
            memo[(m, lam)] = hit
        return hit
    return _expand(alg, m, lam, l_extra)


def _expand(alg, m, lam, l_extra):
    sc = alg.sc
    if not lam:
        if m > 0:
            return {}
        if m == 0:
            return {(): sc.h}
        return {(-m,): sc.one}
    if m > 0 and m > sum(lam):
        # lowering below the vacuum always annihilates
        return {}
    if m < 0 and -m >= lam[0]:
        return {(-m,) + lam: sc.one}
    if alg.engine == "tinf":
        return _expand_tinf(alg, m, lam, l_extra)
    return _expand_bilateral(alg, m, lam, l_extra)


def _acc(out, vec, c):
    if not _nz(c):
        return
    for key, val in vec.items():
        term = c * val
        cur = out.get(key)
        out[key] = term if cur is None else cur + term


def _act_dict(alg, m, vec, l_extra=0):
    out = {}
    for lam, c in vec.items():
        _acc(out, _act_basis(alg, m, lam, l_extra), c)
    return {k: v for k, v in out.items() if _nz(v)}


def _expand_bilateral(alg, m, lam, l_extra):
    sc = alg.sc
    n0 = -lam[0]
    rest = lam[1:]
    w_rest = sum(rest)
    out = {}
    _acc(out, _act_dict(alg, n0, _act_basis(alg, m, rest, l_extra), l_extra),
         sc.one)
    if m + n0 == 0:
        _acc(out, {rest: sc.one}, alg.c(m))
    l_max = sum(lam) + l_extra
    for l in range(1, l_max + 1):
        fl = alg.f(l)
        if not _nz(fl):
            continue
        if n0 + l <= w_rest:
            t1 = _act_dict(alg, m - l, _act_basis(alg, n0 + l, rest, l_extra),
                           l_extra)
            _acc(out, t1, -fl)
        if m + l <= w_rest:
            t2 = _act_dict(alg, n0 - l, _act_basis(alg, m + l, rest, l_extra),
                           l_extra)
            _acc(out, t2, fl)
    return {k: v for k, v in out.items() if _nz(v)}


def _expand_tinf(alg, m, lam, l_extra):
    sc = alg.sc
    q = sc.q
    one = sc.one
    n0 = -lam[0]
    rest = lam[1:]
    w_rest = sum(rest)
    gap = one - q
    skew = q - _inv(q)
    out = {}
    _acc(out, _act_dict(alg, n0, _act_basis(alg, m, rest, l_extra), l_extra), q)
    if m > 0:
        # positive through negative: q-commutator with a geometric tail
        for l in range(1, w_rest - m + 1 + l_extra):
            t = _act_dict(alg, n0 - l, _act_basis(alg, m + l, rest, l_extra),
                          l_extra)
            _acc(out, t, skew * q ** l)
        if m + n0 == 0:
            _acc(out, {rest: one}, gap)
    elif m == 0:
        for l in range(1, -n0):
            t = _act_dict(alg, -l, _act_basis(alg, n0 + l, rest, l_extra),
                          l_extra)
            _acc(out, t, -gap)
        for l in range(1, w_rest + 1 + l_extra):
            t = _act_dict(alg, n0 - l, _act_basis(alg, l, rest, l_extra),
                          l_extra)
            _acc(out, t, skew * q ** l)
    else:
        # both negative, misordered: finite middle terms only
        for l in range(1, m - n0):
            t = _act_dict(alg, m - l, _act_basis(alg, n0 + l, rest, l_extra),
                          l_extra)
            _acc(out, t, -gap)
    return {k: v for k, v in out.items() if _nz(v)}


def act_mode(alg, m, v, l_extra=0):
    """Apply the generator with subscript m to a VermaVector."""
    out = _act_dict(alg, m, v.coeffs, l_extra)
    lev = None
    if v.level is not None:
        lev = v.level + abs(m) if m < 0 else v.level - m
        if lev < 0:
            lev = None
    return VermaVector(out, level=lev)


def act_word(alg, modes, l_extra=0):
    """Normal-order a generator word against the highest-weight vector.

    modes lists the generator subscripts left to right; the rightmost one
    acts first.
    """
    vec = {(): alg.sc.one}
    level = 0
    for m in reversed(tuple(modes)):
        vec = _act_dict(alg, m, vec, l_extra)
        level -= m
    return VermaVector(vec, level=level if level >= 0 else None)


def pair(alg, u, v):
    """Contravariant form <u, v> with the involution T_m -> T_{-m}."""
    total = None
    for lam, c in u.coeffs.items():
        w = v.coeffs
        for m in lam:
            if not w:
                break
            w = _act_dict(alg, m, w)
        val = w.get(())
        if val is None:
            continue
        term = c * val
        total = term if total is None else total + term
    return alg.sc.zero if total is None else total


# ---------------------------------------------------------------------------
# bases, Gram matrices, determinants


def level_basis(n, max_multiplicity=None):
    """Basis partitions at one level, smallest parts first.

    The ordering puts (1, ..., 1) first and (n) last, so lowering operators
    are triangular toward the earlier states.
    """
    return tuple(tuple(lam.parts)
                 for lam in reversed(partitions_of(
                     n, max_multiplicity=max_multiplicity)))


def gram(alg, n):
    """Gram matrix of the contravariant form at level n."""
    if n < 0:
        raise AlgebraError("level must be nonnegative")
    basis = level_basis(n)
    states = [VermaVector.basis_state(alg, lam) for lam in basis]
    return [[pair(alg, u, v) for v in states] for u in states]


def quotient_gram(alg, n):
    """Gram matrix restricted to multiplicities below the root order.

    Partitions with a part repeated N or more times span the radical
    directions at a primitive N-th root, so the form descends to this
    sub-basis of the quotient module.
    """
    N = _root_order(alg)
    basis = level_basis(n, max_multiplicity=N - 1)
    states = [VermaVector.basis_state(alg, lam) for lam in basis]
    return [[pair(alg, u, v) for v in states] for u in states]


def _root_order(alg):
    if alg.variant == "q_minus1":
        return 2
    if alg.N is not None:
        return alg.N
    raise AlgebraError("variant %r has no root-of-unity order" % alg.variant)


def exact_det(rows, one):
    """Determinant over any exact field by fraction-free-enough elimination."""
    n = len(rows)
    if n == 0:
        return one
    a = [list(r) for r in rows]
    det = one
    for col in range(n):
        piv = None
        for r in range(col, n):
            if _nz(a[r][col]):
                piv = r
                break
        if piv is None:
            return one - one
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        lead = a[col][col]
        det = det * lead
        inv = _inv(lead)
        for r in range(col + 1, n):
            factor = a[r][col] * inv
            if not _nz(factor):
                continue
            for cc in range(col, n):
                a[r][cc] = a[r][cc] - factor * a[col][cc]
    return det


def mode_matrix(alg, m, n, reduced=False):
    """Matrix of T_m from the level-n basis to the level n-m basis.

    Entry [i][j] is the coefficient of the j-th target state in the image
    of the i-th source state.  With reduced=True both bases drop partitions
    with multiplicities at or above the root order and the image is
    projected accordingly.
    """
    if n - m < 0:
        raise AlgebraError("target level would be negative")
    mm = None if not reduced else _root_order(alg) - 1
    src = level_basis(n, max_multiplicity=mm)
    dst = level_basis(n - m, max_multiplicity=mm)
    index = {lam: j for j, lam in enumerate(dst)}
    out = []
    for lam in src:
        img = _act_basis(alg, m, lam)
        row = [alg.sc.zero] * len(dst)
        for key, val in img.items():
            j = index.get(key)
            if j is not None:
                row[j] = val
        out.append(row)
    return out


def reduced_project(alg, v):
    """Project onto the quotient basis by dropping over-repeated parts.

    Only meaningful where the N-th powers of the raising generators are
    central (the q = -1 branch and the one-parameter limit at a root), so
    that the dropped monomials span a submodule.
    """
    N = _root_order(alg)
    if alg.variant not in ("q_minus1", "t_infinity"):
        raise AlgebraError("reduction by over-repeated parts needs central "
                           "generator powers")
    keep = {}
    for key, val in v.coeffs.items():
        lam = Partition(key)
        if all(mult < N for mult in lam.mults().values()):
            keep[key] = val
    return VermaVector(keep, level=v.level)


# ---------------------------------------------------------------------------
# determinant formulas


def _partition_count(k):
    if k < 0:
        return 0
    dp = [1] + [0] * k
    for part in range(1, k + 1):
        for tot in range(part, k + 1):
            dp[tot] += dp[tot - part]
    return dp[k]


def _kac_factors(n):
    for r in range(1, n + 1):
        for s in range(1, n // r + 1):
            e = _partition_count(n - r * s)
            if e:
                yield r, s, e


def kac_formula(n, variant="generic"):
    """Level-n determinant product, up to its level constant.

    The generic form multiplies, over r s <= n, the weight factor
    (h^2 - h_{r,s}^2) and the parameter factor (1 - q^r)(1 - t^-r)/(1 + p^r),
    each to the number of partitions of n - r s.  The one-parameter limit
    keeps only (1 - q^r).  The expanded result grows combinatorially with n;
    for plain evaluation at a point use kac_specialize instead.
    """
    if n < 1:
        raise AlgebraError("level must be positive")
    if variant not in ("generic", "t_infinity"):
        raise AlgebraError("unknown determinant variant %r" % (variant,))
    p = RatFunc.var("p")
    q = RatFunc.var("q")
    h = RatFunc.var("h")
    one = RatFunc.const(1)
    out = one
    # the full product blows past what per-step gcd normalization can chew
    # through, so collect numerator and denominator separately; the factors
    # carry h (or are p-free) while the denominators are p-only, hence coprime
    num = den = None
    for r, s, e in _kac_factors(n):
        if variant == "t_infinity":
            out = out * (one - q ** r) ** e
            continue
        hrs = p ** (-r) * q ** (r - s) + p ** r * q ** (s - r) + 2
        factor = ((h * h - hrs)
                  * (one - q ** r) * (one - (p / q) ** r)
                  / (one + p ** r))
        fn, fd = factor.num ** e, factor.den ** e
        num = fn if num is None else num * fn
        den = fd if den is None else den * fd
    if variant == "t_infinity":
        return out
    return RatFunc._from_coprime(num, den)


def kac_specialize(n, assignment, variant="generic"):
    """Evaluate the level-n determinant product at a rational point.

    assignment maps "p", "q", "h" to numbers ("q" alone suffices in the
    one-parameter limit).  The product is evaluated factor by factor, which
    stays fast at levels where the expanded polynomial would be enormous.
    Raises DivisionByZero on the poles p = -1 (even r) and q = 0.
    """
    if n < 1:
        raise AlgebraError("level must be positive")
    if variant not in ("generic", "t_infinity"):
        raise AlgebraError("unknown determinant variant %r" % (variant,))
    q = Fraction(assignment["q"])
    out = Fraction(1)
    if variant == "t_infinity":
        for r, _s, e in _kac_factors(n):
            out *= (1 - q ** r) ** e
        return out
    p = Fraction(assignment["p"])
    h = Fraction(assignment["h"])
    if p == 0 or q == 0 or p == -1:
        raise DivisionByZero("the determinant product has a pole at this point")
    for r, s, e in _kac_factors(n):
        hrs = p ** (-r) * q ** (r - s) + p ** r * q ** (s - r) + 2
        fac = (h * h - hrs) * (1 - q ** r) * (1 - (p / q) ** r) / (1 + p ** r)
        out *= fac ** e
    return out


def quotient_kac_formula(N, n):
    """Determinant product for the quotient module at a primitive N-th root.

    Returns a rational function in (p, h) for N = 2 and a cyclotomic value
    with rational-function coordinates otherwise.  The exponents come from
    the capped-multiplicity counting series.
    """
    if N < 2:
        raise AlgebraError("root order must be at least 2")
    if n < 1:
        raise AlgebraError("level must be positive")
    one = _rf_base(CycloElem.scalar(N, Fraction(1)))
    q = _rf_base(CycloElem.root(N))
    p = one * RatFunc.var("p")
    h = one * RatFunc.var("h")
    out = one
    for r in range(1, n + 1):
        for s in range(1, min(N - 1, n // r) + 1):
            k = n - r * s
            e = char_series("qN_rs", k, N=N, r=r, s=s).coeff(k)
            if e == 0:
                continue
            hrs = (_inv(p ** r) * q ** (r - s) + p ** r * q ** (s - r)
                   + one * 2)
            out = out * (h * h - hrs) ** e
    capped = char_series("fermionic_N", n, N=N)
    for r in range(1, n + 1):
        if r % N == 0:
            continue
        for s in range(1, n // r + 1):
            e = capped.coeff(n - r * s)
            if e == 0:
                continue
            factor = (one - p ** r * _inv(q ** r)) * _inv(one + p ** r)
            out = out * factor ** e
    if N == 2:
        return out.coeffs[0]
    return out


# ---------------------------------------------------------------------------
# singular vectors


class SingularVerdict:
    __slots__ = ("singular", "witness", "residue")

    def __init__(self, singular, witness=None, residue=None):
        self.singular = singular
        self.witness = witness
        self.residue = residue

    def __repr__(self):
        if self.singular:
            return "SingularVerdict(singular)"
        return "SingularVerdict(nonsingular, witness m=%d)" % self.witness


def singular_check(alg, v, modulo=None):
    """Decide whether every lowering generator annihilates the vector.

    modulo="reduced" works in the quotient module instead, projecting each
    image onto the capped-multiplicity basis first (only where that quotient
    exists, see reduced_project).
    """
    if v.level is None or v.level < 1:
        raise AlgebraError("singular candidates live at positive levels")
    for m in range(1, v.level + 1):
        img = act_mode(alg, m, v)
        if modulo == "reduced":
            img = reduced_project(alg, img)
        elif modulo is not None:
            raise AlgebraError("unknown quotient mode %r" % (modulo,))
        if not img.is_zero():
            return SingularVerdict(False, witness=m, residue=img)
    return SingularVerdict(True)


def _delta_invariant(sc, N, r, s, mults):
    """The tabulated building block for root-of-unity singular vectors."""
    n = sum(i * m for i, m in enumerate(mults, start=1))
    p, q, one = sc.p, sc.q, sc.one
    val = (p ** r) * (q ** s) * (one + p ** (n - 2 * r) * q ** (N - 2 * s))
    for i, m in enumerate(mults, start=1):
        if m:
            val = val * _inv((one + p ** i) ** m)
    if 2 * r == n and (2 * s) % N == 0:
        val = val * _inv(sc.wrap(2))
    return val


def _appB_table(N, d, sc):
    def D(r, s, mults):
        return _delta_invariant(sc, N, r, s, mults)

    def times(k, val):
        return sc.wrap(k) * val

    one = sc.one
    if (N, d) == (3, 3):
        a210 = times(-3, D(1, 0, (2,)))
        a300 = times(-3, D(2, 1, (3, 1)))
        a3 = times(3, D(1, 1, (1, 1)))
        return [((-1, -1, -1), one), ((-2, -1, 0), a210),
                ((-3, 0, 0), a300), ((-3,), a3)]
    if (N, d) == (3, 6):
        a321 = times(-3, D(1, 0, (2,)))
        a411 = times(-3, D(2, 1, (3, 1)))
        a330 = times(-3, D(2, 1, (3, 1)))
        a420 = (times(-3, D(4, 0, (4, 2))) + times(3, D(3, 0, (4, 1)))
                + times(-3, D(2, 1, (3, 1))))
        a510 = times(-6, D(4, 0, (4, 2))) + times(3, D(3, 1, (5, 2)))
        a600 = (times(27, D(8, 0, (6, 3, 0, 1)))
                + times(12, D(6, 0, (6, 3)))
                + times(18, D(7, 0, (6, 2, 0, 1)))
                + times(6, D(5, 0, (6, 2)))
                + times(-3, D(6, 1, (5, 3, 0, 1)))
                + times(-3, D(5, 1, (5, 3, 0, 1)))
                + times(-3, D(4, 1, (5, 3, 0, 1))))
        a6 = (times(-3, D(6, 0, (4, 2, 0, 1)))
              + times(3, D(2, 0, (4, 2, 0, 1)))
              + times(-6, D(4, 0, (4, 2)))
              + times(-12, D(5, 0, (4, 1, 0, 1)))
              + times(6, D(3, 0, (4, 1)))
              + times(-3, D(5, 1, (4, 2, 0, 1)))
              + times(3, D(4, 1, (4, 2, 0, 1)))
              + times(6, D(3, 1, (4, 2, 0, 1))))
        return [((-2, -2, -2), one), ((-3, -2, -1), a321),
                ((-4, -1, -1), a411), ((-3, -3, 0), a330),
                ((-4, -2, 0), a420), ((-5, -1, 0), a510),
                ((-6, 0, 0), a600), ((-6,), a6)]
    if (N, d) == (4, 4):
        a2110 = times(-4, D(1, 0, (2,))) + times(-4, D(1, 1, (3,)))
        a2200 = times(8, D(2, 0, (4,)))
        a3100 = times(12, D(2, 0, (4,))) + times(4, D(2, 1, (5,)))
        # sign of the second invariant pinned by a direct nullspace solve
        a4000 = (times(-8, D(3, 0, (5, 0, 1)))
                 + times(8, D(3, 1, (5, 0, 1))))
        a22 = times(-8, D(1, 0, (2,)))
        a31 = times(-4, D(1, 0, (2,))) + times(4, D(1, 1, (3,)))
        a40 = times(8, D(2, 0, (3, 0, 1))) + times(-8, D(2, 1, (3, 0, 1)))
        return [((-1, -1, -1, -1), one), ((-2, -1, -1, 0), a2110),
                ((-2, -2, 0, 0), a2200), ((-3, -1, 0, 0), a3100),
                ((-4, 0, 0, 0), a4000), ((-2, -2), a22),
                ((-3, -1), a31), ((-4, 0), a40)]
    raise AlgebraError("no tabulated vector for N=%d, level=%d" % (N, d))


def build_appB(N, d, p=None, h=None):
    """Assemble a tabulated root-of-unity singular vector candidate.

    Covers the cube-root candidates at levels 3 and 6 and the fourth-root
    candidate at level 4.  Returns the algebra (freshly built in the q_root
    variant) together with the vector; the weight stays symbolic unless p
    and h are supplied.
    """
    alg = make_algebra("q_root", d, N=N, p=p, h=h)
    total = {}
    for word, coeff in _appB_table(N, d, alg.sc):
        _acc(total, act_word(alg, word).coeffs, coeff)
    vec = VermaVector({k: v for k, v in total.items() if _nz(v)}, level=d)
    return alg, vec


def proportional(u, v):
    """True when the vectors agree up to one nonzero overall scalar."""
    if u.is_zero() or v.is_zero():
        return u.is_zero() and v.is_zero()
    key = u.terms_sorted()[0]
    a = u.coeffs.get(key)
    b = v.coeffs.get(key)
    if b is None:
        return False
    return v == u.scaled(b * _inv(a))


def psi3_series(alg, d):
    """Sum the three-generator screening series at level d.

    The algebra must be the cube-root variant.  Each splitting of d into
    three mode weights contributes its ordered word, dressed by the
    structure series in the three slot ratios; the correction term
    multiplies the single generator of subscript -d.  The sum collapses to
    zero unless 3 divides d.  A numeric parameter choice can land on a
    vanishing denominator, which surfaces as ResampleNeeded.
    """
    if alg.variant != "q_root" or alg.N != 3:
        raise AlgebraError("the screening series needs the cube-root variant")
    if d < 1:
        raise AlgebraError("level must be positive")
    sc = alg.sc
    q = sc.q
    try:
        total = {}
        for m1 in range(d + 1):
            for m2 in range(d + 1 - m1):
                m3 = d - m1 - m2
                pref = q ** (2 * m1 + m2)
                for l12 in range(m2 + m3 + 1):
                    for l13 in range(min(m3, m2 + m3 - l12) + 1):
                        c2 = alg.f(l12) * alg.f(l13)
                        if not _nz(c2):
                            continue
                        for l23 in range(m3 - l13 + 1):
                            coeff = pref * c2 * alg.f(l23)
                            if not _nz(coeff):
                                continue
                            word = (-(m1 + l12 + l13),
                                    -(m2 - l12 + l23),
                                    -(m3 - l13 - l23))
                            _acc(total, act_word(alg, word).coeffs, coeff)
        tail = _zeta(sc) * _tail_bracket(sc, d)
        _acc(total, {(d,): sc.one}, tail)
        return VermaVector({k: v for k, v in total.items() if _nz(v)},
                           level=d)
    except (DivisionByZero, DenominatorVanishes) as exc:
        raise ResampleNeeded(str(exc)) from exc


def _tail_bracket(sc, d):
    """Evaluated two-point tails that close the screening series."""
    one, p, q = sc.one, sc.p, sc.q
    zeta = _zeta(sc)

    def mp_full(x):
        return ((one - q * x) * (one - p * _inv(q) * x)
                * _inv((one - x) * (one - p * x)))

    def pm_full(x):
        return ((one - _inv(q) * x) * (one - _inv(p) * q * x)
                * _inv((one - x) * (one - _inv(p) * x)))

    def mp_partial(x):
        tot = one
        for m in range(1, d + 1):
            tot = tot + zeta * (p ** m - one) * x ** m
        return tot

    def pm_partial(x):
        tot = one
        for m in range(1, d + 1):
            tot = tot + zeta * (one - _inv(p ** m)) * x ** m
        return tot

    qi = _inv(q)
    ratio = q * _inv(p)
    a = q ** (2 * d) * mp_full(qi * qi) * _inv(ratio - one)
    b = q ** d * (mp_partial(qi) * _inv(q * q * _inv(p) - one)
                  - pm_partial(qi) * _inv(q * q * p - one))
    c = ratio * _inv(ratio - one) * pm_full(p * qi * qi)
    return a + b + c


# ---------------------------------------------------------------------------
# the one-parameter limit: powers, centers, symmetrized products


def tinf_power_expand(m, n, level_budget, q=None):
    """Expand the n-th power of the tail sum of generators from subscript m on.

    The full expansion is an infinite sum of ordered words; only words whose
    subscripts total at most level_budget are kept.  Returns a dict mapping
    weakly increasing subscript words to coefficients, each a power of q
    times a q-multinomial.  Coefficients are rational functions in q unless
    a value is supplied.
    """
    if n < 1:
        raise AlgebraError("the power must be positive")
    qv = RatFunc.var("q") if q is None else q
    out = {}
    top = level_budget - n * (m - 1)
    for wt in range(n, top + 1):
        for lam in partitions_of(wt, max_length=n):
            if lam.length() != n:
                continue
            word = tuple(m + a - 1 for a in lam.increasing())
            coeff = ((qv ** stat("ht_op", lam))
                     * q_multinomial(n, lam.mults().values(), qv))
            out[word] = coeff
    return out


class CenterVerdict:
    __slots__ = ("central", "state", "difference")

    def __init__(self, central, state=None, difference=None):
        self.central = central
        self.state = state
        self.difference = difference

    def __repr__(self):
        if self.central:
            return "CenterVerdict(central)"
        return "CenterVerdict(not central, state=%r)" % (self.state,)


def center_witness(alg, m, k, level):
    """Test whether the N-th power of one generator commutes with another.

    Works in the one-parameter limit at a primitive N-th root of unity.
    The commutator of the N-th power of the subscript-m generator with the
    subscript-k generator is applied to every basis state of level at most
    `level`, vacuum first; the first state it fails to kill is returned as
    the witness along with the leftover vector.
    """
    if alg.variant != "t_infinity" or alg.N is None:
        raise AlgebraError("centrality lives in the one-parameter limit at "
                           "a root of unity")
    N = alg.N
    for lev in range(level + 1):
        for lam in level_basis(lev):
            v = VermaVector.basis_state(alg, lam)
            a = act_mode(alg, k, v)
            for _ in range(N):
                a = act_mode(alg, m, a)
            b = v
            for _ in range(N):
                b = act_mode(alg, m, b)
            b = act_mode(alg, k, b)
            diff = a - b
            if not diff.is_zero():
                return CenterVerdict(False, state=lam, difference=diff)
    return CenterVerdict(True)


class SymmetrizedReport:
    """Both sides of a symmetrized-product expansion and their comparison."""

    __slots__ = ("partition", "lhs", "rhs", "coefficients", "match")

    def __init__(self, partition, lhs, rhs, coefficients, match):
        self.partition = partition
        self.lhs = lhs
        self.rhs = rhs
        self.coefficients = coefficients
        self.match = match

    def __repr__(self):
        return "SymmetrizedReport(%r, match=%r)" % (self.partition, self.match)


def _as_rf(value):
    return value if isinstance(value, RatFunc) else RatFunc.const(value)


def _into_domain(sc, rfq):
    """Carry a rational function in q alone into the coefficient domain."""
    if sc.kind == "rf":
        return rfq
    if sc.kind == "frac":
        return rf_eval(rfq, {"q": sc.q})
    return sc.wrap(to_cyclo(rfq, sc.N))


def symmetrized_product_tinf(lam, alg=None):
    """Normal-order the sum over distinct arrangements of a lowering word.

    In the one-parameter limit, the sum over all distinct orderings of the
    lowering generators indexed by a partition collapses to a combination
    of ordered basis monomials whose coefficients factor through the q = 1
    and q-deformed triangular changes of basis, times a q-multinomial.
    Returns both sides and the comparison.
    """
    parts = tuple(sorted((int(x) for x in lam), reverse=True))
    if not parts or parts[-1] < 1:
        raise AlgebraError("need a partition with positive parts")
    n = len(parts)
    wt = sum(parts)
    if alg is None:
        alg = make_algebra("t_infinity", wt)
    if alg.variant != "t_infinity":
        raise AlgebraError("the identity lives in the one-parameter limit")
    sc = alg.sc
    lhs_acc = {}
    for word in sorted(set(itertools.permutations(parts))):
        _acc(lhs_acc, act_word(alg, tuple(-x for x in word)).coeffs, sc.one)
    lhs = VermaVector({k: v for k, v in lhs_acc.items() if _nz(v)}, level=wt)

    km = kostka_matrix(wt)
    plist = [tuple(P.parts) for P in km.parts]
    size = len(plist)
    i_lam = plist.index(parts)
    one_rf = RatFunc.const(1)
    zero_rf = RatFunc.const(0)
    kq = [[_as_rf(e) for e in row] for row in km.entries]
    k1 = [[e.substitute({"q": 1}) for e in row] for row in kq]
    # row of the composed transition: solve x K(1) = e_lam, then x K(q);
    # K(1) is unitriangular in the enumeration order
    x = [zero_rf] * size
    for j in range(size):
        s = one_rf if j == i_lam else zero_rf
        for i in range(j):
            if not x[i].is_zero():
                s = s - x[i] * k1[i][j]
        x[j] = s
    coeffs = {}
    rhs_acc = {}
    for j in range(size):
        mu = plist[j]
        entry = zero_rf
        for i in range(size):
            if not x[i].is_zero():
                entry = entry + x[i] * kq[i][j]
        if entry.is_zero():
            continue
        coeffs[mu] = entry
        if len(mu) != n:
            continue
        weight = (_into_domain(sc, entry)
                  * q_multinomial(n, Partition(mu).mults().values(), sc.q))
        _acc(rhs_acc, {mu: sc.one}, weight)
    rhs = VermaVector({k: v for k, v in rhs_acc.items() if _nz(v)}, level=wt)
    return SymmetrizedReport(parts, lhs, rhs, coeffs, lhs == rhs)


# ---------------------------------------------------------------------------
# degenerate branches


def anticommutator_central_term(alg, m):
    """Central term of the anticommutator family on the q = -1 branch."""
    if alg.variant != "q_minus1":
        raise AlgebraError("anticommutators close only on the q = -1 branch")
    sc = alg.sc
    sign = sc.one if m % 2 == 0 else -sc.one
    pm = sc.p ** abs(m)
    return sc.wrap(2) * (pm + _inv(pm) - sc.wrap(2) * sign)


def finite_dim_certificate(case, order=12):
    """Certify a degenerate one-dimensional branch exactly, to a given order.

    "q1" and "t1" check that the structure series collapses to the constant
    1 and every central term vanishes after the corresponding substitution.
    "p_cubed_q" and "p_inv_sq_q" restrict to the one-parameter curve where
    q is the cube (resp. the inverse square) of p, verify that the
    factorized structure series satisfies the defining product identity,
    and match every central term against the series times the distinguished
    weight square (1 + p)^2 / p.
    """
    one = RatFunc.const(1)
    zero = RatFunc.const(0)
    hvar = RatFunc.var("h")
    if case in ("q1", "t1"):
        p = RatFunc.var("p")
        q = one if case == "q1" else p
        sc = _Scalars("rf", None, one, zero, p, q, hvar)
        fser = _f_series_exp(sc, order)
        for l in range(1, order + 1):
            if _nz(fser.coeff(l)):
                return {"case": case, "order": order, "holds": False,
                        "detail": "structure series keeps a degree-%d term" % l}
        zeta = _zeta(sc)
        for m in range(1, order + 1):
            if _nz(zeta * (p ** m - p ** (-m))):
                return {"case": case, "order": order, "holds": False,
                        "detail": "central term survives at m=%d" % m}
        return {"case": case, "order": order, "holds": True,
                "detail": "structure series is 1 and the central terms vanish"}
    if case not in ("p_cubed_q", "p_inv_sq_q"):
        raise AlgebraError("unknown certificate case %r" % (case,))
    a = RatFunc.var("a")
    p = a
    q = a ** 3 if case == "p_cubed_q" else a ** (-2)
    sc = _Scalars("rf", None, one, zero, p, q, hvar)

    def lin(cc):
        row = [one] + [zero] * order
        row[1] = cc
        return Series("x", order, row)

    fser = (lin(-(p ** (-2))) * lin(-(p ** 2))
            * geometric_series(p ** (-1), order, one=one)
            * geometric_series(p, order, one=one))
    _check_exchange_series(sc, fser)
    zeta = _zeta(sc)
    h2 = (one + p) ** 2 / p
    for m in range(1, order + 1):
        cm = zeta * (p ** m - p ** (-m))
        if _nz(h2 * fser.coeff(m) - cm):
            return {"case": case, "order": order, "holds": False,
                    "detail": "weight condition fails at m=%d" % m}
    return {"case": case, "order": order, "holds": True,
            "detail": "factorized series verified; weight square (1+p)^2/p"}
