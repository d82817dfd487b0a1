"""Exact coefficient arithmetic.

Laurent polynomials and canonical rational functions over the rationals in
the variables (p, q, h, a, w), cyclotomic numbers for q a root of unity,
and truncated formal power series.  Everything is immutable and exact; no
floats anywhere.

The variable t never exists on its own: it is always rewritten as q*p^-1.
The variable a stands for the invertible unit q^alpha.  The variable w
carries a square root of p: the rewrite w^2 -> p is applied whenever two
w's meet, so w-exponents stored are always 0 or 1.
"""

from __future__ import annotations

import heapq
import math
from fractions import Fraction

VARS = ("p", "q", "h", "a", "w")
NVARS = len(VARS)
IP, IQ, IH, IA, IW = range(NVARS)
_ZEXP = (0,) * NVARS


class ExactFieldError(Exception):
    pass


class DivisionByZero(ExactFieldError, ZeroDivisionError):
    pass


class DenominatorVanishes(ExactFieldError):
    """A denominator became zero under an evaluation assignment."""

    def __init__(self, factor):
        super().__init__("denominator vanishes at the given point: %s" % factor)
        self.factor = factor


def _grevlex_key(e):
    # ascending sort under this key lists terms leading-first
    return (-sum(e), tuple(reversed(e)))


def _fold_w(e):
    """Normalize the w-exponent of an exponent vector to 0 or 1 via w^2 = p."""
    ew = e[IW]
    if 0 <= ew <= 1:
        return e
    return (e[IP] + ew // 2, e[IQ], e[IH], e[IA], ew % 2)


class MultiPoly:
    """Sparse Laurent polynomial: map exponent vector -> nonzero Fraction."""

    __slots__ = ("terms", "_canon")

    def __init__(self, terms):
        clean = {}
        for e, c in terms.items():
            if not c:
                continue
            e = _fold_w(e)
            c0 = clean.get(e)
            if c0 is None:
                clean[e] = Fraction(c)
            else:
                c0 = c0 + c
                if c0:
                    clean[e] = c0
                else:
                    del clean[e]
        self.terms = clean
        self._canon = None

    @staticmethod
    def const(c):
        c = Fraction(c)
        return MultiPoly({_ZEXP: c} if c else {})

    @staticmethod
    def var(name, exp=1):
        i = VARS.index(name)
        e = [0] * NVARS
        e[i] = exp
        return MultiPoly({tuple(e): Fraction(1)})

    def is_zero(self):
        return not self.terms

    def canon(self):
        if self._canon is None:
            self._canon = tuple(sorted(self.terms.items(), key=lambda kv: _grevlex_key(kv[0])))
        return self._canon

    def leading(self):
        """Leading (exponent, coefficient) in graded-reverse-lex order."""
        if not self.terms:
            raise ExactFieldError("zero polynomial has no leading term")
        return self.canon()[0]

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.canon())

    def __neg__(self):
        return MultiPoly({e: -c for e, c in self.terms.items()})

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            c0 = out.get(e)
            if c0 is None:
                out[e] = c
            else:
                c0 = c0 + c
                if c0:
                    out[e] = c0
                else:
                    del out[e]
        r = MultiPoly.__new__(MultiPoly)
        r.terms = out
        r._canon = None
        return r

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return MultiPoly({})
            return MultiPoly({e: c * other for e, c in self.terms.items()})
        if not isinstance(other, MultiPoly):
            return NotImplemented
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = _fold_w((e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2],
                             e1[3] + e2[3], e1[4] + e2[4]))
                c0 = out.get(e)
                if c0 is None:
                    out[e] = c1 * c2
                else:
                    c0 = c0 + c1 * c2
                    if c0:
                        out[e] = c0
                    else:
                        del out[e]
        r = MultiPoly.__new__(MultiPoly)
        r.terms = out
        r._canon = None
        return r

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ExactFieldError("negative power of a MultiPoly; use RatFunc")
        result = MultiPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def monomial_shift(self, shift):
        """Multiply by the monomial with exponent vector `shift`."""
        return MultiPoly({_fold_w(tuple(ei + si for ei, si in zip(e, shift))): c
                          for e, c in self.terms.items()})

    def a_flip(self):
        """Substitute a -> p * a^-1 (a monomial map, so done on exponents)."""
        return MultiPoly({(e[0] + e[3], e[1], e[2], -e[3], e[4]): c
                          for e, c in self.terms.items()})

    def vars_used(self):
        used = [False] * NVARS
        for e in self.terms:
            for i in range(NVARS):
                if e[i]:
                    used[i] = True
        return [i for i in range(NVARS) if used[i]]

    def w_split(self):
        """Return (A, B) with self = A + w*B and A, B free of w."""
        A, B = {}, {}
        for e, c in self.terms.items():
            if e[IW]:
                B[(e[0], e[1], e[2], e[3], 0)] = c
            else:
                A[e] = c
        return MultiPoly(A), MultiPoly(B)

    def evaluate(self, assignment):
        """Evaluate with a map var name -> value (Fraction, CycloElem, RatFunc...).

        Values must support the usual arithmetic with Fractions and negative
        integer powers where negative exponents occur.
        """
        vals = [None] * NVARS
        for i, v in enumerate(VARS):
            if v in assignment:
                vals[i] = assignment[v]
        total = 0
        for e, c in self.terms.items():
            term = c
            for i in range(NVARS):
                if e[i]:
                    if vals[i] is None:
                        raise ExactFieldError("no value assigned to variable %r" % VARS[i])
                    term = term * (vals[i] ** e[i])
            total = term + total
        return total

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for e, c in self.canon():
            factors = []
            for i in range(NVARS):
                if e[i] == 1:
                    factors.append(VARS[i])
                elif e[i]:
                    factors.append("%s^%d" % (VARS[i], e[i]))
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = str(mag) + "*" + "*".join(factors)
            if not out:
                out.append(("-" if c < 0 else "") + body)
            else:
                out.append(("-" if c < 0 else "+") + body)
        return "".join(out)

    def __repr__(self):
        return "MultiPoly(%s)" % self


def _poly_parse(s):
    """Parse the canonical polynomial grammar back into a MultiPoly."""
    s = s.strip()
    if s == "0":
        return MultiPoly({})
    # split into signed terms; a +/- after '^' belongs to an exponent
    terms = []
    cur = ""
    for k, ch in enumerate(s):
        if ch in "+-" and k > 0 and s[k - 1] != "^":
            terms.append(cur)
            cur = ch
        else:
            cur += ch
    terms.append(cur)
    d = {}
    for t in terms:
        sign = 1
        if t.startswith("-"):
            sign, t = -1, t[1:]
        elif t.startswith("+"):
            t = t[1:]
        coeff = Fraction(sign)
        e = [0] * NVARS
        for factor in t.split("*"):
            if not factor:
                raise ExactFieldError("empty factor in term %r" % t)
            if factor[0].isdigit():
                coeff *= Fraction(factor)
            else:
                if "^" in factor:
                    name, _, exp = factor.partition("^")
                    e[VARS.index(name)] += int(exp)
                else:
                    e[VARS.index(factor)] += 1
        key = tuple(e)
        d[key] = d.get(key, 0) + coeff
    return MultiPoly(d)


# ---------------------------------------------------------------------------
# multivariate gcd (primitive PRS), used only to canonicalize RatFunc


def _mp_divexact(f, g):
    """Exact division of MultiPolys with nonnegative exponents.

    The running remainder's leading term comes off a heap of candidate
    exponents instead of a fresh sort per step; reduction only creates
    exponents strictly below the one eliminated, so every live exponent
    always has a heap entry (stale entries are skipped on pop).
    """
    if g.is_zero():
        raise DivisionByZero("polynomial division by zero")
    out = {}
    rem = dict(f.terms)
    ge, gc = g.leading()
    gterms = list(g.terms.items())
    heap = [(_grevlex_key(e), e) for e in rem]
    heapq.heapify(heap)
    while heap:
        fe = heapq.heappop(heap)[1]
        fc = rem.get(fe)
        if fc is None:
            continue
        de = tuple(a - b for a, b in zip(fe, ge))
        if any(x < 0 for x in de[:IW]) or de[IW] < 0:
            raise ExactFieldError("inexact polynomial division")
        dc = fc / gc
        out[de] = dc
        for e2, c2 in gterms:
            e = tuple(a + b for a, b in zip(de, e2))
            prev = rem.get(e)
            if prev is None:
                rem[e] = -dc * c2
                heapq.heappush(heap, (_grevlex_key(e), e))
                continue
            c0 = prev - dc * c2
            if c0:
                rem[e] = c0
            else:
                del rem[e]
    return MultiPoly(out)


def _as_univar(f, v):
    """Split f by the exponent of variable v: degree -> MultiPoly coefficient."""
    buckets = {}
    for e, c in f.terms.items():
        d = e[v]
        e0 = list(e)
        e0[v] = 0
        buckets.setdefault(d, {})[tuple(e0)] = c
    return {d: MultiPoly(t) for d, t in buckets.items()}


def _from_univar(coeffs, v):
    out = {}
    for d, poly in coeffs.items():
        for e, c in poly.terms.items():
            e0 = list(e)
            e0[v] = d
            out[tuple(e0)] = c
    return MultiPoly(out)


def _gcd_list(polys):
    g = MultiPoly({})
    for f in polys:
        g = _poly_gcd(g, f)
        if g == 1:
            break
    return g


def _pseudo_rem(A, B, v):
    """Pseudo-remainder lc(B)^(deg A - deg B + 1) * A mod B, univariate in v.

    The full leading-coefficient power is applied even when degree skips let
    the reduction finish in fewer steps; subresultant divisions rely on it.
    """
    a = _as_univar(A, v)
    b = _as_univar(B, v)
    db = max(b)
    lb = b[db]
    need = max(a) - db + 1 if a and max(a) >= db else 0
    steps = 0
    while a and max(a) >= db:
        da = max(a)
        la = a[da]
        # lb*a - la*x^(da-db)*b
        new = {}
        for d, c in a.items():
            new[d] = lb * c
        for d, c in b.items():
            dd = d + da - db
            new[dd] = new.get(dd, MultiPoly({})) - la * c
        a = {d: c for d, c in new.items() if not c.is_zero()}
        steps += 1
    for _ in range(need - steps):
        a = {d: lb * c for d, c in a.items()}
    return _from_univar(a, v)


def _primitive_wrt(f, v):
    """Divide out the content of f with respect to variable v."""
    coeffs = list(_as_univar(f, v).values())
    cont = _gcd_list(coeffs)
    if cont == 1:
        return f
    return _mp_divexact(f, cont)


def _normalize_gcd(g):
    """Scale a gcd to integer coefficients, content 1, positive leading coeff."""
    if g.is_zero():
        return g
    denlcm = 1
    for c in g.terms.values():
        denlcm = denlcm * c.denominator // math.gcd(denlcm, c.denominator)
    numgcd = 0
    for c in g.terms.values():
        numgcd = math.gcd(numgcd, abs(c.numerator) * (denlcm // c.denominator))
    scale = Fraction(denlcm, numgcd)
    g = g * scale
    if g.leading()[1] < 0:
        g = -g
    return g


class _HeuristicFailed(Exception):
    pass


def _subst_int(f, v, xi):
    """Substitute the integer xi for variable v (nonnegative exponents only)."""
    out = {}
    for e, c in f.terms.items():
        e0 = list(e)
        e0[v] = 0
        e0 = tuple(e0)
        out[e0] = out.get(e0, 0) + c * xi ** e[v]
    return MultiPoly(out)


def _maxnorm(f):
    return max(abs(c) for c in f.terms.values())


def _divides(d, f):
    try:
        _mp_divexact(f, d)
        return True
    except ExactFieldError:
        return False


def _heu_gcd(f, g, scale=1):
    """Heuristic divisor via evaluation at a big integer and radix reconstruction.

    f, g have integer coefficients and nonnegative exponents.  The result is
    certified by trial division to DIVIDE both inputs, but maximality is not
    guaranteed here; the caller must certify that separately.

    Integer content is preserved through the recursion on purpose: an inner
    level whose gcd is a bare integer is carrying the evaluated coefficients
    of the outer level's gcd, so collapsing it to 1 would lose the answer.
    """
    vs = sorted(set(f.vars_used()) | set(g.vars_used()))
    if not vs:
        return MultiPoly.const(math.gcd(int(f.terms[_ZEXP]), int(g.terms[_ZEXP])))
    v = vs[0]
    degbound = 1 + max(e[v] for e in list(f.terms) + list(g.terms))
    xi = (2 * min(_maxnorm(f), _maxnorm(g)) + 29) * scale
    for _ in range(6):
        fe = _subst_int(f, v, xi)
        ge = _subst_int(g, v, xi)
        if fe.is_zero() or ge.is_zero():
            xi = xi * 73 // 32 + 1
            continue
        try:
            gamma = _heu_gcd(fe, ge)
        except _HeuristicFailed:
            xi = xi * 73 // 32 + 1
            continue
        # xi-adic reconstruction with balanced digits
        h = {}
        k = 0
        overflow = False
        while not gamma.is_zero():
            if k > degbound:
                overflow = True
                break
            nxt = {}
            for e, c in gamma.terms.items():
                r = int(c) % xi
                if r > xi // 2:
                    r -= xi
                if r:
                    e2 = list(e)
                    e2[v] = k
                    h[tuple(e2)] = Fraction(r)
                q = (int(c) - r) // xi
                if q:
                    nxt[e] = Fraction(q)
            gamma = MultiPoly(nxt)
            k += 1
        if not overflow:
            cand = MultiPoly(h)
            if not cand.is_zero() and _divides(cand, f) and _divides(cand, g):
                return cand
        xi = xi * 73 // 32 + 1
    raise _HeuristicFailed


def _monomial_gcd(f, g):
    mins = None
    for e in list(f.terms) + list(g.terms):
        if mins is None:
            mins = list(e)
        else:
            mins = [min(a, b) for a, b in zip(mins, e)]
    return MultiPoly({tuple(mins): Fraction(1)})


def _univar_view(f, v):
    """Exponent-of-v -> Fraction map for a poly involving only variable v."""
    return {e[v]: c for e, c in f.terms.items()}


def _univar_gcd(a, b):
    """Exact gcd of two univariate coefficient maps (degree -> Fraction)."""
    while b:
        db = max(b)
        lb = b[db]
        while a and max(a) >= db:
            da = max(a)
            c = a[da] / lb
            for d, bc in b.items():
                dd = d + da - db
                nc = a.get(dd, 0) - c * bc
                if nc:
                    a[dd] = nc
                else:
                    a.pop(dd, None)
        a, b = b, a
    return a


def _subst_ints_keep(f, v, sigma):
    """Substitute integers for every variable except v; sigma maps var -> int."""
    out = {}
    for e, c in f.terms.items():
        for i, val in sigma.items():
            if e[i]:
                c = c * val ** e[i]
        out[e[v]] = out.get(e[v], 0) + c
    return {d: c for d, c in out.items() if c}


def _primpart_gcd(A, B, v, vs):
    """Gcd of polys that are primitive with respect to the main variable v.

    Maximality is certified by matching the gcd degree of univariate images:
    for an evaluation point where a leading coefficient survives, the image
    gcd degree is an upper bound for deg_v of the true gcd, and a certified
    divisor of that degree must be the gcd (its cofactor is forced v-free,
    hence a unit by primitivity).
    """
    da = max(e[v] for e in A.terms)
    db = max(e[v] for e in B.terms)
    if da == 0 or db == 0:
        return MultiPoly.const(1)
    others = [u for u in vs if u != v]
    if not others:
        gu = _univar_gcd(_univar_view(A, v), _univar_view(B, v))
        return MultiPoly({tuple(d if i == v else 0 for i in range(NVARS)): c
                          for d, c in gu.items()})
    lcA = _as_univar(A, v)[da]
    lcB = _as_univar(B, v)[db]
    D = min(da, db)
    for attempt in range(8):
        sigma = {u: 3 + 5 * attempt + 7 * ui for ui, u in enumerate(others)}
        lead_ok = (not _subst_int_all(lcA, sigma).is_zero()
                   or not _subst_int_all(lcB, sigma).is_zero())
        if lead_ok:
            ia = _subst_ints_keep(A, v, sigma)
            ib = _subst_ints_keep(B, v, sigma)
            if ia and ib:
                gu = _univar_gcd(dict(ia), dict(ib))
                D = min(D, max(gu) if gu else 0)
        if D == 0:
            return MultiPoly.const(1)
        try:
            h = _normalize_gcd(_heu_gcd(A, B, scale=2 ** attempt))
        except _HeuristicFailed:
            continue
        if max(e[v] for e in h.terms) == D:
            return h
    # guaranteed fallback: subresultant remainder sequence
    if da < db:
        A, B = B, A
    gg = MultiPoly.const(1)
    hh = MultiPoly.const(1)
    while True:
        au, bu = _as_univar(A, v), _as_univar(B, v)
        if max(bu) == 0:
            return MultiPoly.const(1)
        delta = max(au) - max(bu)
        R = _pseudo_rem(A, B, v)
        if R.is_zero():
            return _primitive_wrt(B, v)
        scale = gg * hh ** delta
        A, B = B, (_mp_divexact(R, scale) if scale != 1 else R)
        gg = _as_univar(A, v)[max(_as_univar(A, v))]
        if delta > 0:
            ggd = gg ** delta
            hh = ggd if hh == 1 else _mp_divexact(ggd, hh ** (delta - 1))


def _subst_int_all(f, sigma):
    out = 0
    for e, c in f.terms.items():
        for i, val in sigma.items():
            if e[i]:
                c = c * val ** e[i]
        out += c
    return MultiPoly.const(out)


def _poly_gcd(f, g):
    """Gcd of MultiPolys with nonnegative exponents, normalized via _normalize_gcd."""
    if f.is_zero():
        return _normalize_gcd(g)
    if g.is_zero():
        return _normalize_gcd(f)
    if f.terms == g.terms:
        return _normalize_gcd(f)
    vs = sorted(set(f.vars_used()) | set(g.vars_used()))
    if not vs:
        return MultiPoly.const(1)
    if len(f.terms) == 1 or len(g.terms) == 1:
        return _monomial_gcd(f, g)
    v = vs[0]
    fu, gu = _as_univar(f, v), _as_univar(g, v)
    fcont = _gcd_list(list(fu.values()))
    gcont = _gcd_list(list(gu.values()))
    cont = _poly_gcd(fcont, gcont)
    A = _mp_divexact(f, fcont) if fcont != 1 else f
    B = _mp_divexact(g, gcont) if gcont != 1 else g
    result = _primpart_gcd(_normalize_gcd(A), _normalize_gcd(B), v, vs)
    return _normalize_gcd(cont * result)


# ---------------------------------------------------------------------------


def _rat_parts(num, den, cancel):
    """Normalize a numerator/denominator pair to RatFunc canonical form."""
    if isinstance(num, (int, Fraction)):
        num = MultiPoly.const(num)
    if den is None:
        den = MultiPoly.const(1)
    elif isinstance(den, (int, Fraction)):
        den = MultiPoly.const(den)
    if den.is_zero():
        raise DivisionByZero("rational function with zero denominator")
    if num.is_zero():
        return MultiPoly({}), MultiPoly.const(1)
    # the denominator must not carry w: multiply through by its conjugate
    if any(e[IW] for e in den.terms):
        A, B = den.w_split()
        conj = A - MultiPoly.var("w") * B
        num = num * conj
        den = den * conj
        if num.is_zero():
            return MultiPoly({}), MultiPoly.const(1)
    # strip the joint monomial content so exponents are >= 0 with joint min 0
    all_exps = list(num.terms) + list(den.terms)
    mins = [min(e[i] for e in all_exps) for i in range(NVARS)]
    shift = tuple(-m for m in mins)
    if any(shift):
        num = num.monomial_shift(shift)
        den = den.monomial_shift(shift)
    # integer coefficients, joint content 1
    denlcm = 1
    for c in list(num.terms.values()) + list(den.terms.values()):
        denlcm = denlcm * c.denominator // math.gcd(denlcm, c.denominator)
    numgcd = 0
    for c in list(num.terms.values()) + list(den.terms.values()):
        numgcd = math.gcd(numgcd, abs(c.numerator) * (denlcm // c.denominator))
    scale = Fraction(denlcm, numgcd)
    if scale != 1:
        num = num * scale
        den = den * scale
    # cancel the polynomial gcd; any w-content divides both components of num
    den_is_const = set(den.terms) == {_ZEXP}
    num_is_const = set(num.terms) == {_ZEXP}
    if cancel and not (den_is_const or num_is_const):
        if any(e[IW] for e in num.terms):
            A, B = num.w_split()
            g = _poly_gcd(_poly_gcd(A, B), den)
        else:
            g = _poly_gcd(num, den)
        if g != 1:
            num = _mp_divexact(num, g)
            den = _mp_divexact(den, g)
    if den.leading()[1] < 0:
        num = -num
        den = -den
    return num, den


class RatFunc:
    """Canonical rational function num/den over the integers in (p, q, h, a, w).

    Canonical form: the denominator is free of w; no variable has a negative
    exponent, and for each variable the minimum exponent across num and den
    jointly is 0; gcd(num, den) = 1; all coefficients are integers of joint
    content 1; the leading coefficient of den is positive.  Equal values have
    identical representations, so equality and hashing are structural.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        self.num, self.den = _rat_parts(num, den, cancel=True)

    @staticmethod
    def _from_coprime(num, den):
        """Construct from parts whose polynomial gcd is known to be trivial.

        Skips only the gcd cancellation; every other normalization step
        (w-free denominator, monomial shift, integer content, sign) still
        runs, so the result is canonical iff the caller's claim holds.
        """
        r = RatFunc.__new__(RatFunc)
        r.num, r.den = _rat_parts(num, den, cancel=False)
        return r

    @staticmethod
    def const(c):
        return RatFunc(MultiPoly.const(c))

    @staticmethod
    def var(name):
        return RatFunc(MultiPoly.var(name))

    @staticmethod
    def _coerce(x):
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, (int, Fraction)):
            return RatFunc.const(x)
        if isinstance(x, MultiPoly):
            return RatFunc(x)
        return None

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_const(self):
        return (not self.num.terms or set(self.num.terms) == {_ZEXP}) and \
            set(self.den.terms) == {_ZEXP}

    def as_fraction(self):
        if not self.is_const():
            raise ExactFieldError("not a constant: %s" % self)
        if not self.num.terms:
            return Fraction(0)
        return self.num.terms[_ZEXP] / self.den.terms[_ZEXP]

    def __eq__(self, other):
        o = RatFunc._coerce(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num.canon(), self.den.canon()))

    def __neg__(self):
        r = RatFunc.__new__(RatFunc)
        r.num = -self.num
        r.den = self.den
        return r

    def __add__(self, other):
        o = RatFunc._coerce(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other):
        o = RatFunc._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = RatFunc._coerce(other)
        if o is None:
            return NotImplemented
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = RatFunc._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise DivisionByZero("division of rational functions by zero")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = RatFunc._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n):
        if n < 0:
            if self.is_zero():
                raise DivisionByZero("negative power of zero")
            return RatFunc(self.den, self.num) ** (-n)
        result = RatFunc.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def a_flip(self):
        """Substitute a -> p * a^-1."""
        return RatFunc(self.num.a_flip(), self.den.a_flip())

    def substitute(self, mapping):
        """Substitute RatFunc (or scalar) values for a subset of the variables."""
        assignment = {v: RatFunc.var(v) for v in VARS}
        for k, val in mapping.items():
            c = RatFunc._coerce(val)
            assignment[k] = c if c is not None else val
        n = self.num.evaluate(assignment)
        d = self.den.evaluate(assignment)
        if isinstance(n, (int, Fraction)):
            n = RatFunc.const(n)
        if isinstance(d, (int, Fraction)):
            d = RatFunc.const(d)
        if d.is_zero():
            raise DenominatorVanishes(str(self.den))
        return n / d

    def __str__(self):
        if self.den == 1:
            return str(self.num)
        return "(%s)/(%s)" % (self.num, self.den)

    def __repr__(self):
        return "RatFunc(%s)" % self

    @staticmethod
    def parse(s):
        s = s.strip()
        if s.startswith("(") and s.endswith(")") and ")/(" in s:
            i = s.index(")/(")
            return RatFunc(_poly_parse(s[1:i]), _poly_parse(s[i + 3:-1]))
        return RatFunc(_poly_parse(s))


def rf_arith(kind, lhs, rhs):
    """Four-function arithmetic dispatcher on canonical rational functions."""
    lhs = RatFunc._coerce(lhs)
    rhs = RatFunc._coerce(rhs)
    if kind == "add":
        return lhs + rhs
    if kind == "sub":
        return lhs - rhs
    if kind == "mul":
        return lhs * rhs
    if kind == "div":
        return lhs / rhs
    raise ExactFieldError("unknown arithmetic kind %r" % kind)


def rf_eval(value, assignment):
    """Evaluate a RatFunc at a point (rational or cyclotomic values).

    Raises DenominatorVanishes, naming the denominator, when the point kills it.
    """
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    den = value.den.evaluate(assignment)
    if not den:
        raise DenominatorVanishes(str(value.den))
    num = value.num.evaluate(assignment)
    if isinstance(num, (int, Fraction)) and isinstance(den, (int, Fraction)):
        return Fraction(num) / Fraction(den)
    return num / den


# ---------------------------------------------------------------------------
# cyclotomic numbers


def _int_poly_div(num, den):
    """Exact division of integer coefficient lists (ascending degree)."""
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1]
        if c % den[-1]:
            raise ExactFieldError("inexact cyclotomic division")
        c //= den[-1]
        out[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    if any(num):
        raise ExactFieldError("inexact cyclotomic division")
    return out


_CYCLO_CACHE = {}


def cyclotomic_poly(N):
    """Coefficients of the N-th cyclotomic polynomial, ascending degree."""
    if N < 1:
        raise ExactFieldError("cyclotomic index must be >= 1")
    got = _CYCLO_CACHE.get(N)
    if got is not None:
        return got
    poly = [-1] + [0] * (N - 1) + [1]  # x^N - 1
    for d in range(1, N):
        if N % d == 0:
            poly = _int_poly_div(poly, cyclotomic_poly(d))
    _CYCLO_CACHE[N] = poly
    return poly


def euler_phi(N):
    return len(cyclotomic_poly(N)) - 1


def _entry_zero_one(sample):
    """Zero and one of the coefficient domain that `sample` lives in."""
    if isinstance(sample, RatFunc):
        return RatFunc.const(0), RatFunc.const(1)
    return Fraction(0), Fraction(1)


def _list_reduce_mod_cyclo(coeffs, phi_coeffs, zero):
    """Reduce a coefficient list mod the (monic, integer) cyclotomic polynomial."""
    deg = len(phi_coeffs) - 1
    coeffs = list(coeffs)
    for i in range(len(coeffs) - 1, deg - 1, -1):
        c = coeffs[i]
        if not c:
            continue
        for j in range(deg + 1):
            coeffs[i - deg + j] = coeffs[i - deg + j] - c * phi_coeffs[j]
    coeffs = coeffs[:deg]
    while len(coeffs) < deg:
        coeffs.append(zero)
    return coeffs


class CycloElem:
    """Element of (base field)[q] / Phi_N(q): a vector of length phi(N).

    Entries are Fractions or RatFuncs in the remaining variables; q itself is
    the class of the generator, a primitive N-th root of unity.
    """

    __slots__ = ("N", "coeffs", "_phi")

    def __init__(self, N, coeffs):
        if N < 2:
            raise ExactFieldError("cyclotomic order must be >= 2")
        phi = cyclotomic_poly(N)
        deg = len(phi) - 1
        coeffs = list(coeffs)
        if len(coeffs) > deg:
            zero, _ = _entry_zero_one(coeffs[0])
            coeffs = _list_reduce_mod_cyclo(coeffs, phi, zero)
        elif len(coeffs) < deg:
            zero = Fraction(0)
            for c in coeffs:
                if isinstance(c, RatFunc):
                    zero = RatFunc.const(0)
                    break
            coeffs = coeffs + [zero] * (deg - len(coeffs))
        self.N = N
        self.coeffs = coeffs
        self._phi = phi

    @staticmethod
    def root(N, power=1, base="frac"):
        """The cyclotomic generator q^power as a CycloElem."""
        one = RatFunc.const(1) if base == "rf" else Fraction(1)
        zero = RatFunc.const(0) if base == "rf" else Fraction(0)
        coeffs = [zero] * (power % N) + [one]
        return CycloElem(N, coeffs)

    @staticmethod
    def scalar(N, value, base="frac"):
        if base == "rf":
            v = RatFunc._coerce(value)
        else:
            v = Fraction(value) if isinstance(value, (int, Fraction)) else value
        return CycloElem(N, [v])

    def _zero_one(self):
        return _entry_zero_one(self.coeffs[0])

    def is_zero(self):
        return all(not c for c in self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def _coerce(self, other):
        if isinstance(other, CycloElem):
            if other.N != self.N:
                raise ExactFieldError("mixed cyclotomic orders %d and %d" % (self.N, other.N))
            return other
        if isinstance(other, (int, Fraction)):
            zero, one = self._zero_one()
            return CycloElem(self.N, [one * other])
        if isinstance(other, RatFunc) and isinstance(self.coeffs[0], RatFunc):
            return CycloElem(self.N, [other])
        return None

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return all(x == y for x, y in zip(self.coeffs, o.coeffs))

    def __hash__(self):
        return hash((self.N, tuple(self.coeffs)))

    def __neg__(self):
        return CycloElem(self.N, [-c for c in self.coeffs])

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycloElem(self.N, [x + y for x, y in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycloElem(self.N, [x - y for x, y in zip(self.coeffs, o.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CycloElem(self.N, [c * other for c in self.coeffs])
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = len(self.coeffs)
        zero, _ = self._zero_one()
        prod = [zero] * (2 * n - 1)
        for i, x in enumerate(self.coeffs):
            if not x:
                continue
            for j, y in enumerate(o.coeffs):
                if y:
                    prod[i + j] = prod[i + j] + x * y
        return CycloElem(self.N, _list_reduce_mod_cyclo(prod, self._phi, zero))

    __rmul__ = __mul__

    def inverse(self):
        """Multiplicative inverse via extended Euclid against Phi_N."""
        if self.is_zero():
            raise DivisionByZero("inverse of zero cyclotomic element")
        zero, one = self._zero_one()

        def pdeg(P):
            for i in range(len(P) - 1, -1, -1):
                if P[i]:
                    return i
            return -1

        def ptrim(P):
            d = pdeg(P)
            return P[:d + 1] if d >= 0 else []

        # invariants: r0 = s0 * self (mod Phi), r1 = s1 * self (mod Phi)
        r0 = [one * c for c in self._phi]
        r1 = ptrim(list(self.coeffs))
        s0 = []
        s1 = [one]
        while True:
            d1 = pdeg(r1)
            if d1 < 0:
                raise DivisionByZero("cyclotomic element is a zero divisor")
            if d1 == 0:
                inv = one / r1[0]
                return CycloElem(self.N, [c * inv for c in s1])
            # divide r0 by r1
            q = [zero] * (pdeg(r0) - d1 + 1)
            r0 = list(r0)
            while pdeg(r0) >= d1:
                d0 = pdeg(r0)
                c = r0[d0] / r1[d1]
                q[d0 - d1] = q[d0 - d1] + c
                for j in range(d1 + 1):
                    r0[d0 - d1 + j] = r0[d0 - d1 + j] - c * r1[j]
            # s_new = s0 - q * s1
            s_new = list(s0) + [zero] * max(0, len(q) + len(s1) - 1 - len(s0))
            for i, qc in enumerate(q):
                if not qc:
                    continue
                for j, sc in enumerate(s1):
                    if sc:
                        s_new[i + j] = s_new[i + j] - qc * sc
            r0, r1 = r1, ptrim(r0)
            s0, s1 = s1, ptrim(s_new)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise DivisionByZero("cyclotomic division by zero")
            return CycloElem(self.N, [c / other for c in self.coeffs])
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        zero, one = self._zero_one()
        result = CycloElem(self.N, [one])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __str__(self):
        sym = "z%d" % self.N
        bits = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if i == 0:
                bits.append(str(c))
            elif i == 1:
                bits.append("(%s)*%s" % (c, sym))
            else:
                bits.append("(%s)*%s^%d" % (c, sym, i))
        return " + ".join(bits) if bits else "0"

    def __repr__(self):
        return "CycloElem(N=%d, %s)" % (self.N, self)


def cyclo_reduce(poly, N):
    """Reduce a MultiPoly (or RatFunc with q-free denominator) mod Phi_N(q).

    q-exponents are first brought into 0..N-1 using q^N = 1, then the result
    is reduced mod the cyclotomic polynomial.  Entries are RatFuncs in the
    remaining variables.
    """
    if N < 2:
        raise ExactFieldError("cyclotomic order must be >= 2")
    if isinstance(poly, RatFunc):
        if any(e[IQ] for e in poly.den.terms):
            raise ExactFieldError("cyclo_reduce needs a q-free denominator")
        scaled = cyclo_reduce(poly.num, N)
        dinv = RatFunc(poly.den) ** (-1)
        return CycloElem(N, [c * dinv for c in scaled.coeffs])
    buckets = [{} for _ in range(N)]
    for e, c in poly.terms.items():
        k = e[IQ] % N
        e0 = (e[0], 0, e[2], e[3], e[4])
        buckets[k][e0] = buckets[k].get(e0, 0) + c
    entries = [RatFunc(MultiPoly(b)) for b in buckets]
    zero = RatFunc.const(0)
    phi = cyclotomic_poly(N)
    return CycloElem(N, _list_reduce_mod_cyclo(entries, phi, zero))


def to_cyclo(value, N):
    """Push a scalar into the degree-N cyclotomic field.

    RatFuncs that mention q are reduced modulo the cyclotomic polynomial
    (this is where a symbolic coefficient picks up its root-of-unity value);
    everything else is wrapped as a scalar.  A q-bearing denominator is
    handled by reducing numerator and denominator separately and inverting.
    """
    if isinstance(value, CycloElem):
        if value.N != N:
            raise ExactFieldError("mixed cyclotomic orders %d and %d" % (value.N, N))
        return value
    if isinstance(value, (int, Fraction)):
        return CycloElem.scalar(N, Fraction(value))
    if isinstance(value, RatFunc):
        if value.is_const():
            return CycloElem.scalar(N, value.as_fraction())
        if any(e[IQ] for e in value.den.terms):
            num = to_cyclo(RatFunc(value.num), N)
            den = to_cyclo(RatFunc(value.den), N)
            return num * den.inverse()
        ce = cyclo_reduce(value, N)
        if all(c.is_const() for c in ce.coeffs):
            return CycloElem(N, [c.as_fraction() for c in ce.coeffs])
        return ce
    raise ExactFieldError("cannot coerce %r into a cyclotomic context" % (value,))


# ---------------------------------------------------------------------------
# truncated power series


class Series:
    """Truncated power series in one formal variable with exact coefficients."""

    __slots__ = ("var", "order", "coeffs")

    def __init__(self, var, order, coeffs):
        coeffs = list(coeffs)
        if len(coeffs) != order + 1:
            raise ExactFieldError("series of order %d needs %d coefficients, got %d"
                                  % (order, order + 1, len(coeffs)))
        self.var = var
        self.order = order
        self.coeffs = coeffs

    @staticmethod
    def one(var, order, one=Fraction(1)):
        return Series(var, order, [one] + [one * 0] * order)

    def coeff(self, n):
        if n > self.order:
            raise ExactFieldError("coefficient %d beyond series order %d" % (n, self.order))
        return self.coeffs[n]

    def truncate(self, order):
        if order > self.order:
            raise ExactFieldError("cannot extend a truncated series")
        return Series(self.var, order, self.coeffs[:order + 1])

    def _meet(self, other):
        if isinstance(other, Series):
            if other.var != self.var:
                raise ExactFieldError("series in different variables")
            L = min(self.order, other.order)
            return L, self.coeffs, other.coeffs
        return None

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (self.var == other.var and self.order == other.order
                and all(x == y for x, y in zip(self.coeffs, other.coeffs)))

    def __add__(self, other):
        m = self._meet(other)
        if m is None:
            c = list(self.coeffs)
            c[0] = c[0] + other
            return Series(self.var, self.order, c)
        L, a, b = m
        return Series(self.var, L, [a[i] + b[i] for i in range(L + 1)])

    __radd__ = __add__

    def __neg__(self):
        return Series(self.var, self.order, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other if isinstance(other, Series) else -1 * other)

    def __mul__(self, other):
        m = self._meet(other)
        if m is None:
            return Series(self.var, self.order, [c * other for c in self.coeffs])
        L, a, b = m
        out = []
        for n in range(L + 1):
            s = 0
            for k in range(n + 1):
                if a[k] and b[n - k]:
                    s = a[k] * b[n - k] + s
            if isinstance(s, int):
                s = a[0] * 0
            out.append(s)
        return Series(self.var, L, out)

    __rmul__ = __mul__

    def inverse(self):
        a = self.coeffs
        if not a[0]:
            raise DivisionByZero("series with zero constant term has no inverse")
        inv0 = 1 / a[0] if not isinstance(a[0], (int, Fraction)) else Fraction(1) / a[0]
        out = [inv0]
        for n in range(1, self.order + 1):
            s = 0
            for k in range(1, n + 1):
                if a[k] and out[n - k]:
                    s = a[k] * out[n - k] + s
            out.append(-inv0 * s if s else a[0] * 0)
        return Series(self.var, self.order, out)

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.inverse()
        return self * (Fraction(1) / other if isinstance(other, (int, Fraction)) else 1 / other)

    def shift(self, k, zero=Fraction(0)):
        """Multiply by var^k (k >= 0), truncating at the same order."""
        return Series(self.var, self.order, [zero] * min(k, self.order + 1)
                      + self.coeffs[:max(0, self.order + 1 - k)])

    def __str__(self):
        bits = []
        for n, c in enumerate(self.coeffs):
            if not c and bits:
                continue
            if n == 0:
                bits.append(str(c))
            elif n == 1:
                bits.append("(%s)*%s" % (c, self.var))
            else:
                bits.append("(%s)*%s^%d" % (c, self.var, n))
        return " + ".join(bits) + " + O(%s^%d)" % (self.var, self.order + 1)

    def __repr__(self):
        return "Series(%s)" % self


def series_exp_of_sum(g, L, one=Fraction(1), var="x"):
    """exp(sum_{n>=1} g(n) x^n / n) truncated at order L.

    g maps 1..L to coefficients; the constant term of the result is `one`.
    """
    if L < 0:
        raise ExactFieldError("series order must be >= 0")
    gs = [None] + [g(n) for n in range(1, L + 1)]
    out = [one]
    for n in range(1, L + 1):
        s = 0
        for k in range(1, n + 1):
            if gs[k] and out[n - k]:
                s = gs[k] * out[n - k] + s
        out.append(s / n if s else one * 0)
    return Series(var, L, out)


def series_log_coeffs(s):
    """Inverse of series_exp_of_sum: recover [g(1), ..., g(L)] from exp form.

    Requires constant term equal to one.
    """
    a = s.coeffs
    gs = []
    for n in range(1, s.order + 1):
        acc = n * a[n]
        for k in range(1, n):
            if gs[k - 1] and a[n - k]:
                acc = acc - gs[k - 1] * a[n - k]
        gs.append(acc / a[0] if a[0] != 1 else acc)
    return gs


def geometric_series(c, L, one=Fraction(1), var="x"):
    """1/(1 - c x) truncated at order L."""
    out = [one]
    for _ in range(L):
        out.append(out[-1] * c)
    return Series(var, L, out)


# ---------------------------------------------------------------------------
# random specialization points


def _rand_frac(rng):
    n = 0
    while n == 0:
        n = rng.randint(-97, 97)
    return Fraction(n, rng.randint(1, 97))


def sample_point(rng, square=False, extra_exclude=None):
    """Draw a random rational point for p, q, h, a (and w when square=True).

    Excludes the degenerate locus p in {0, 1, -1}, q in {0, 1}, p == q.
    With square=True, p and q are squares of rationals and w = sqrt(p) is
    included, so identities involving half-integer powers stay rational.
    extra_exclude, if given, is a predicate on the assignment dict; points
    where it returns True are rejected and redrawn.
    """
    while True:
        if square:
            r = Fraction(0)
            while r in (0, 1, -1):
                r = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
            s = Fraction(0)
            while s in (0, 1, -1) or s * s == r * r:
                s = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
            point = {"p": r * r, "q": s * s, "w": r}
        else:
            point = {"p": _rand_frac(rng), "q": _rand_frac(rng)}
        point["h"] = _rand_frac(rng)
        point["a"] = _rand_frac(rng)
        if point["p"] in (0, 1, -1):
            continue
        if point["q"] in (0, 1):
            continue
        if point["p"] == point["q"]:
            continue
        if extra_exclude is not None and extra_exclude(point):
            continue
        return point
