"""Symmetric functions with exact coefficients.

Classical bases (monomial, elementary, complete homogeneous, Schur, power
sum), the one-parameter deformed scalar product, Hall-Littlewood P and Q,
Kostka polynomial matrices, Milne polynomials for arbitrary integer index
sequences, and a raising-operator engine.

All coefficient arithmetic is exact: Fraction, RatFunc over the shared
variable set, or CycloElem when a root-of-unity context is active.  The
power-sum basis is the conversion hub; every other basis is reached through
it by cached transition matrices.
"""

import json
import os
import tempfile
from fractions import Fraction

from .exactfield import (
    CycloElem,
    ExactFieldError,
    RatFunc,
    cyclo_reduce,
    to_cyclo,
)
from .partitions import Partition, partitions_of, stat

BASES = ("m", "e", "h", "s", "p", "HL_P", "HL_Q", "Milne")

_Q = RatFunc.var("q")
_ONE = RatFunc.const(1)


class SymFuncError(ValueError):
    pass


# ---------------------------------------------------------------------------
# coefficient scalars


def _to_cyclo(value, N):
    """Push a scalar into the degree-N cyclotomic field (domain errors as ours)."""
    try:
        return to_cyclo(value, N)
    except ExactFieldError as exc:
        raise SymFuncError(str(exc)) from exc


def _wrap(value, qctx):
    if qctx is None:
        if isinstance(value, CycloElem):
            raise SymFuncError("cyclotomic coefficient outside a root-of-unity context")
        return value
    return _to_cyclo(value, qctx)


# ---------------------------------------------------------------------------
# expressions


class SymFuncExpr:
    """Homogeneous symmetric function: basis tag + partition-keyed coefficients.

    qctx is None for symbolic coefficients, or an integer N meaning q has
    been specialized to a primitive N-th root of unity (coefficients are
    then CycloElem values).
    """

    __slots__ = ("basis", "coeffs", "qctx", "deg")

    def __init__(self, basis, coeffs, qctx=None, deg=None):
        if basis not in BASES:
            raise SymFuncError("unknown basis tag %r" % (basis,))
        if qctx is not None and (not isinstance(qctx, int) or qctx < 2):
            raise SymFuncError("root-of-unity context must be an integer >= 2")
        clean = {}
        for lam, c in coeffs.items():
            if not isinstance(lam, Partition):
                lam = Partition(tuple(lam))
            c = _wrap(c, qctx)
            if c:
                clean[lam] = c
        weights = {lam.weight() for lam in clean}
        if len(weights) > 1:
            raise SymFuncError("inhomogeneous coefficients: degrees %s" % sorted(weights))
        if weights:
            d = weights.pop()
            if deg is not None and deg != d:
                raise SymFuncError("declared degree %d but coefficients have weight %d" % (deg, d))
            deg = d
        self.basis = basis
        self.coeffs = clean
        self.qctx = qctx
        self.deg = 0 if deg is None else deg

    @staticmethod
    def term(basis, lam, coeff=1, qctx=None):
        if not isinstance(lam, Partition):
            lam = Partition(tuple(lam))
        return SymFuncExpr(basis, {lam: coeff}, qctx, deg=lam.weight())

    @staticmethod
    def zero(basis="p", qctx=None, deg=0):
        return SymFuncExpr(basis, {}, qctx, deg=deg)

    def is_zero(self):
        return not self.coeffs

    def terms(self):
        """Coefficients sorted by the standard partition order."""
        return sorted(self.coeffs.items(), key=lambda kv: [-x for x in kv[0]])

    def map_coeffs(self, fn):
        return SymFuncExpr(self.basis, {lam: fn(c) for lam, c in self.coeffs.items()},
                           self.qctx, deg=self.deg)

    def _compat(self, other):
        if self.basis != other.basis:
            raise SymFuncError("basis mismatch %s vs %s" % (self.basis, other.basis))
        if self.qctx != other.qctx:
            raise SymFuncError("q-context mismatch %r vs %r" % (self.qctx, other.qctx))

    def __add__(self, other):
        self._compat(other)
        out = dict(self.coeffs)
        for lam, c in other.coeffs.items():
            acc = out.get(lam)
            out[lam] = c if acc is None else acc + c
        d = self.deg if self.coeffs or not other.coeffs else other.deg
        return SymFuncExpr(self.basis, out, self.qctx, deg=d)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, scalar):
        scalar = _wrap(scalar, self.qctx)
        if not scalar:
            return SymFuncExpr(self.basis, {}, self.qctx, deg=self.deg)
        return self.map_coeffs(lambda c: c * scalar)

    def __eq__(self, other):
        if not isinstance(other, SymFuncExpr):
            return NotImplemented
        return (self.basis == other.basis and self.qctx == other.qctx
                and self.coeffs == other.coeffs)

    def __repr__(self):
        body = " + ".join("(%s)*%s_%s" % (c, self.basis, lam.to_str())
                          for lam, c in self.terms())
        return body if body else "0"


# ---------------------------------------------------------------------------
# transition matrices: dense rows over the degree-n partition list


class TransitionMatrix:
    """Square change-of-basis matrix at one degree.

    Rows and columns are indexed by the partitions of the degree in the
    standard enumeration order; entry(lam, mu) is the coefficient of the
    column-mu target element in the expansion of the row-lam source element.
    """

    __slots__ = ("from_basis", "to_basis", "degree", "parts", "entries", "qctx")

    def __init__(self, from_basis, to_basis, degree, parts, entries, qctx=None):
        self.from_basis = from_basis
        self.to_basis = to_basis
        self.degree = degree
        self.parts = tuple(parts)
        self.entries = entries
        self.qctx = qctx
        n = len(self.parts)
        if len(entries) != n or any(len(row) != n for row in entries):
            raise SymFuncError("transition matrix at degree %d must be %d x %d"
                               % (degree, n, n))

    def index(self, lam):
        if not isinstance(lam, Partition):
            lam = Partition(tuple(lam))
        try:
            return self.parts.index(lam)
        except ValueError:
            raise SymFuncError("partition %s does not have weight %d"
                               % (lam.to_str(), self.degree))

    def entry(self, lam, mu):
        return self.entries[self.index(lam)][self.index(mu)]

    def row(self, lam):
        i = self.index(lam)
        return {mu: c for mu, c in zip(self.parts, self.entries[i]) if c}


def _mat_mul(a, b):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = 0
            for k in range(n):
                x = a[i][k]
                if x:
                    y = b[k][j]
                    if y:
                        acc = acc + x * y
            row.append(acc)
        out.append(row)
    return out


def _mat_inv(a, one):
    """Gaussian elimination over an exact field."""
    n = len(a)
    work = [list(row) for row in a]
    inv = [[one if i == j else one * 0 for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if work[r][col]:
                piv = r
                break
        if piv is None:
            raise SymFuncError("singular transition matrix")
        work[col], work[piv] = work[piv], work[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        lead = work[col][col]
        for j in range(n):
            if work[col][j]:
                work[col][j] = work[col][j] / lead
            if inv[col][j]:
                inv[col][j] = inv[col][j] / lead
        for r in range(n):
            if r != col and work[r][col]:
                f = work[r][col]
                for j in range(n):
                    if work[col][j]:
                        work[r][j] = work[r][j] - f * work[col][j]
                    if inv[col][j]:
                        inv[r][j] = inv[r][j] - f * inv[col][j]
    return inv


# ---------------------------------------------------------------------------
# classical bases in the power-sum hub


def _p_dict_mul(a, b):
    """Product of two power-sum expansions (multiset union of indices)."""
    out = {}
    for lam, c in a.items():
        for mu, d in b.items():
            nu = Partition(tuple(sorted(tuple(lam) + tuple(mu), reverse=True)))
            cd = c * d
            acc = out.get(nu)
            out[nu] = cd if acc is None else acc + cd
    return {k: v for k, v in out.items() if v}

def _h_in_p(k):
    return {lam: Fraction(1, stat("z", lam)) for lam in partitions_of(k)}

def _e_in_p(k):
    out = {}
    for lam in partitions_of(k):
        sign = -1 if (k - lam.length()) % 2 else 1
        out[lam] = Fraction(sign, stat("z", lam))
    return out


_HPROD_MEMO = {}


def _h_multiset_in_p(ks):
    """Product h_{k1} h_{k2} ... in the p basis; ks a sorted tuple."""
    if not ks:
        return {Partition(()): Fraction(1)}
    got = _HPROD_MEMO.get(ks)
    if got is None:
        got = _p_dict_mul(_h_multiset_in_p(ks[:-1]), _h_in_p(ks[-1]))
        _HPROD_MEMO[ks] = got
    return got


def _schur_in_h(lam):
    """Schur function as a signed sum of h products, by determinant expansion.

    The determinant has entry h_{lam_i - i + j}; it is expanded along
    columns with memoization on the set of rows still unused.
    """
    shifts = tuple(lam[i] - i for i in range(len(lam)))
    memo = {}

    def rec(rows):
        if not rows:
            return {(): Fraction(1)}
        got = memo.get(rows)
        if got is not None:
            return got
        col = len(shifts) - len(rows)
        out = {}
        for pos, r in enumerate(rows):
            k = shifts[r] + col
            if k < 0:
                continue
            sign = -1 if pos % 2 else 1
            sub = rec(rows[:pos] + rows[pos + 1:])
            for ks, c in sub.items():
                key = tuple(sorted(ks + (k,))) if k > 0 else ks
                acc = out.get(key, 0)
                acc = acc + sign * c
                if acc:
                    out[key] = acc
                else:
                    out.pop(key, None)
        memo[rows] = out
        return out

    return rec(tuple(range(len(shifts))))


def _p_in_m_rows(n):
    """p_lam expanded in the monomial basis, for every lam of weight n.

    Built by repeated multiplication by single power sums: appending r as a
    new part, or absorbing r into one existing distinct part, in each case
    weighting by the multiplicity the changed part has in the result.
    """
    parts = partitions_of(n)
    rows = []
    for lam in parts:
        cur = {(): Fraction(1)}
        for r in lam:
            nxt = {}
            for mu, c in cur.items():
                grown = tuple(sorted(mu + (r,), reverse=True))
                w = c * grown.count(r)
                acc = nxt.get(grown)
                nxt[grown] = w if acc is None else acc + w
                for s in sorted(set(mu)):
                    bumped = list(mu)
                    bumped.remove(s)
                    bumped = tuple(sorted(bumped + [s + r], reverse=True))
                    w = c * bumped.count(s + r)
                    acc = nxt.get(bumped)
                    nxt[bumped] = w if acc is None else acc + w
            cur = nxt
        rows.append({Partition(mu): c for mu, c in cur.items() if c})
    return parts, rows


# ---------------------------------------------------------------------------
# transition-matrix cache (memory + disk)

_FORMAT_VERSION = 1
_MATRIX_MEMO = {}


def _cache_dir():
    root = os.environ.get("DVA_CACHE_DIR")
    if not root:
        xdg = os.environ.get("XDG_CACHE_HOME")
        base = xdg if xdg else os.path.join(os.path.expanduser("~"), ".cache")
        root = os.path.join(base, "dva")
    return root


def _cache_load(kind, n, parts):
    path = os.path.join(_cache_dir(), "%s_%d.json" % (kind, n))
    try:
        with open(path) as fh:
            blob = json.load(fh)
    except (OSError, ValueError):
        return None
    if not isinstance(blob, dict) or blob.get("format") != _FORMAT_VERSION:
        return None
    if blob.get("kind") != kind or blob.get("degree") != n:
        return None
    names = [lam.to_str() for lam in parts]
    if blob.get("partitions") != names:
        return None
    entries = blob.get("entries")
    if not isinstance(entries, list) or len(entries) != len(parts):
        return None
    if any(not isinstance(row, list) or len(row) != len(parts) for row in entries):
        return None
    try:
        return [[RatFunc.parse(s) for s in row] for row in entries]
    except (ExactFieldError, AttributeError, TypeError):
        return None


def _cache_store(kind, n, parts, entries):
    blob = {
        "format": _FORMAT_VERSION,
        "kind": kind,
        "degree": n,
        "partitions": [lam.to_str() for lam in parts],
        "entries": [[str(RatFunc._coerce(c)) for c in row] for row in entries],
    }
    root = _cache_dir()
    try:
        os.makedirs(root, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=root, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(blob, fh)
        os.replace(tmp, os.path.join(root, "%s_%d.json" % (kind, n)))
    except OSError:
        pass


def _dense_to_p(basis, n):
    """Rows: basis element of weight n expanded over the degree-n p basis.

    Fraction entries.  Memoized in RAM and mirrored to the disk cache.
    """
    key = ("to_p", basis, n)
    got = _MATRIX_MEMO.get(key)
    if got is not None:
        return got
    parts = partitions_of(n)
    idx = {lam: i for i, lam in enumerate(parts)}
    cached = _cache_load("to_p_%s" % basis, n, parts)
    if cached is not None:
        dense = [[c.as_fraction() for c in row] for row in cached]
        _MATRIX_MEMO[key] = (parts, dense)
        return parts, dense

    def densify(dicts):
        return [[d.get(mu, Fraction(0)) for mu in parts] for d in dicts]

    if basis == "p":
        dense = [[Fraction(1) if i == j else Fraction(0) for j in range(len(parts))]
                 for i in range(len(parts))]
    elif basis == "h":
        dense = densify([_h_multiset_in_p(tuple(sorted(lam))) for lam in parts])
    elif basis == "e":
        rows = []
        for lam in parts:
            cur = {Partition(()): Fraction(1)}
            for k in lam:
                cur = _p_dict_mul(cur, _e_in_p(k))
            rows.append(cur)
        dense = densify(rows)
    elif basis == "s":
        rows = []
        for lam in parts:
            acc = {}
            for ks, c in _schur_in_h(lam).items():
                for mu, d in _h_multiset_in_p(ks).items():
                    v = acc.get(mu, 0) + c * d
                    if v:
                        acc[mu] = v
                    else:
                        acc.pop(mu, None)
            rows.append(acc)
        dense = densify(rows)
    elif basis == "m":
        _, prows = _p_in_m_rows(n)
        pm = [[row.get(mu, Fraction(0)) for mu in parts] for row in prows]
        dense = _mat_inv(pm, Fraction(1))
    else:
        raise SymFuncError("no direct power-sum expansion for basis %r" % (basis,))
    _MATRIX_MEMO[key] = (parts, dense)
    _cache_store("to_p_%s" % basis, n, parts, dense)
    return parts, dense


def _dense_from_p(basis, n):
    key = ("from_p", basis, n)
    got = _MATRIX_MEMO.get(key)
    if got is None:
        parts, dense = _dense_to_p(basis, n)
        got = (parts, _mat_inv(dense, Fraction(1)))
        _MATRIX_MEMO[key] = got
    return got


def _rows_between(src, dst, n):
    """Fraction matrix expanding degree-n src elements in the dst basis."""
    key = ("between", src, dst, n)
    got = _MATRIX_MEMO.get(key)
    if got is None:
        parts, a = _dense_to_p(src, n)
        _, b = _dense_from_p(dst, n)
        got = (parts, _mat_mul(a, b))
        _MATRIX_MEMO[key] = got
    return got


# ---------------------------------------------------------------------------
# Hall-Littlewood: Gram-Schmidt and the Kostka polynomial matrix


def _hl_weight(nu):
    w = RatFunc.const(stat("z", nu))
    for part in nu:
        w = w / (_ONE - _Q ** part)
    return w


def _schur_gram(n):
    """Gram matrix of the Schur basis under the deformed product."""
    parts, s2p = _dense_to_p("s", n)
    weights = [_hl_weight(nu) for nu in parts]
    np_ = len(parts)
    g = [[None] * np_ for _ in range(np_)]
    for i in range(np_):
        for j in range(i + 1):
            acc = RatFunc.const(0)
            for k in range(np_):
                c = s2p[i][k] * s2p[j][k]
                if c:
                    acc = acc + weights[k] * c
            g[i][j] = acc
            g[j][i] = acc
    return parts, g


def _kostka_symbolic(n, order=None):
    """The polynomial Kostka matrix K(q) at degree n.

    Gram-Schmidt runs through the partition list from the bottom of the
    dominance order upward (the reversed enumeration order by default;
    any other linear refinement gives the same matrix and `order` lets
    tests check that).  Each orthogonalized vector is rescaled so its
    leading monomial coefficient is 1, and K is the inverse of the matrix
    expressing the orthogonal basis in the Schur basis.
    """
    parts, gram = _schur_gram(n)
    np_ = len(parts)
    _, s2m = _rows_between("s", "m", n)
    if order is None:
        order = range(np_ - 1, -1, -1)
    built = []  # (row index, coeff vector in s, gram * vector)
    vecs = [None] * np_
    for i in order:
        v = [RatFunc.const(0)] * np_
        v[i] = _ONE
        for _, w, gw in built:
            num = gw[i]
            if num:
                den = sum((w[k] * gw[k] for k in range(np_) if w[k]), RatFunc.const(0))
                r = num / den
                for k in range(np_):
                    if w[k]:
                        v[k] = v[k] - r * w[k]
        lead = sum((v[k] * s2m[k][i] for k in range(np_) if v[k]), RatFunc.const(0))
        if lead != _ONE:
            v = [x / lead for x in v]
        gv = [sum((gram[r][k] * v[k] for k in range(np_) if v[k]), RatFunc.const(0))
              for r in range(np_)]
        built.append((i, v, gv))
        vecs[i] = v
    return parts, _mat_inv(vecs, _ONE)


def _kostka(n):
    key = ("kostka", n)
    got = _MATRIX_MEMO.get(key)
    if got is None:
        parts = partitions_of(n)
        entries = _cache_load("kostka", n, parts)
        if entries is None:
            parts, entries = _kostka_symbolic(n)
            _cache_store("kostka", n, parts, entries)
        got = (parts, entries)
        _MATRIX_MEMO[key] = got
    return got


def _kostka_inv(n):
    key = ("kostka_inv", n)
    got = _MATRIX_MEMO.get(key)
    if got is None:
        parts, k = _kostka(n)
        got = (parts, _mat_inv(k, _ONE))
        _MATRIX_MEMO[key] = got
    return got


def kostka_matrix(n, qctx=None):
    """Kostka polynomial transition matrix at degree n (Schur over HL_P)."""
    if n < 0:
        raise SymFuncError("degree must be nonnegative")
    parts, entries = _kostka(n)
    if qctx is not None:
        entries = [[_to_cyclo(c, qctx) for c in row] for row in entries]
    return TransitionMatrix("s", "HL_P", n, parts, entries, qctx)


def _b_factor(lam, qctx):
    b = stat("b_poly", lam, q=_Q)
    return b if qctx is None else _to_cyclo(b, qctx)


# ---------------------------------------------------------------------------
# basis conversion


def _apply_rows(coeffs, parts, rows, qctx):
    idx = {lam: i for i, lam in enumerate(parts)}
    out = {}
    for lam, c in coeffs.items():
        row = rows[idx[lam]]
        for j, entry in enumerate(row):
            if entry:
                e = entry if qctx is None else _to_cyclo(entry, qctx)
                acc = out.get(parts[j])
                term = c * e
                out[parts[j]] = term if acc is None else acc + term
    return {lam: c for lam, c in out.items() if c}


def _check_hl_q_ok(coeffs, qctx):
    if qctx is None:
        return
    for lam in coeffs:
        if any(m >= qctx for m in lam.mults().values()):
            raise SymFuncError(
                "HL_Q is degenerate at a primitive root of unity of order %d: "
                "partition %s has a part of multiplicity >= %d"
                % (qctx, lam.to_str(), qctx))


def to_basis(f, target):
    """Exact change of basis; the power-sum basis is the routing hub."""
    if target not in BASES:
        raise SymFuncError("unknown basis tag %r" % (target,))
    if f.basis == target:
        return f
    n, qctx = f.deg, f.qctx
    coeffs = f.coeffs
    basis = f.basis
    if not coeffs:
        return SymFuncExpr(target, {}, qctx, deg=n)

    # the HL_P <-> HL_Q move is diagonal, no routing needed
    if basis == "HL_P" and target == "HL_Q":
        _check_hl_q_ok(coeffs, qctx)
        out = {}
        for lam, c in coeffs.items():
            b = _b_factor(lam, qctx)
            out[lam] = c * b.inverse() if qctx is not None else c / b
        return SymFuncExpr("HL_Q", out, qctx, deg=n)

    # stage 1: into the Schur basis for the q-dependent sources
    if basis == "HL_Q":
        _check_hl_q_ok(coeffs, qctx)
        coeffs = {lam: c * _b_factor(lam, qctx) for lam, c in coeffs.items()}
        basis = "HL_P"
        if basis == target:
            return SymFuncExpr(target, coeffs, qctx, deg=n)
    if basis == "HL_P":
        parts, kinv = _kostka_inv(n)
        coeffs = _apply_rows(coeffs, parts, kinv, qctx)
        basis = "s"
    if basis == "Milne":
        parts, k = _kostka(n)
        kt = [[k[j][i] for j in range(len(parts))] for i in range(len(parts))]
        coeffs = _apply_rows(coeffs, parts, kt, qctx)
        basis = "s"
    if basis == target:
        return SymFuncExpr(target, coeffs, qctx, deg=n)

    # stage 2: classical moves through the Fraction matrices
    if target in ("m", "e", "h", "s", "p"):
        parts, rows = _rows_between(basis, target, n)
        return SymFuncExpr(target, _apply_rows(coeffs, parts, rows, qctx), qctx, deg=n)

    # stage 3: into the q-dependent targets, via Schur
    if basis != "s":
        parts, rows = _rows_between(basis, "s", n)
        coeffs = _apply_rows(coeffs, parts, rows, qctx)
    if target == "Milne":
        parts, kinv = _kostka_inv(n)
        kit = [[kinv[j][i] for j in range(len(parts))] for i in range(len(parts))]
        return SymFuncExpr("Milne", _apply_rows(coeffs, parts, kit, qctx), qctx, deg=n)
    parts, k = _kostka(n)
    coeffs = _apply_rows(coeffs, parts, k, qctx)
    if target == "HL_P":
        return SymFuncExpr("HL_P", coeffs, qctx, deg=n)
    # HL_Q: divide by b_lam, which must not vanish
    _check_hl_q_ok(coeffs, qctx)
    out = {}
    for lam, c in coeffs.items():
        out[lam] = c * (_b_factor(lam, qctx) ** (-1) if qctx is not None
                        else _ONE / _b_factor(lam, None))
    return SymFuncExpr("HL_Q", out, qctx, deg=n)


def multiply(f, g):
    """Product of two symmetric functions, computed in the power-sum hub."""
    if f.qctx != g.qctx:
        raise SymFuncError("q-context mismatch %r vs %r" % (f.qctx, g.qctx))
    a = to_basis(f, "p")
    b = to_basis(g, "p")
    out = _p_dict_mul(a.coeffs, b.coeffs)
    return SymFuncExpr("p", out, f.qctx, deg=f.deg + g.deg)


# ---------------------------------------------------------------------------
# scalar products


def scalar_product(f, g, mode="plain"):
    """Diagonal pairing in the power-sum basis.

    plain       <p_lam, p_mu> = z_lam delta
    q_deformed  an extra factor prod_i (1 - q^{lam_i})
    hl          the reciprocal factor, the one that makes HL_P and HL_Q dual
    Degree mismatch gives 0 by contract.
    """
    if mode not in ("plain", "q_deformed", "hl"):
        raise SymFuncError("unknown scalar product mode %r" % (mode,))
    if f.qctx != g.qctx:
        raise SymFuncError("q-context mismatch %r vs %r" % (f.qctx, g.qctx))
    qctx = f.qctx
    if f.deg != g.deg:
        return Fraction(0) if qctx is None else CycloElem.scalar(qctx, Fraction(0))
    a = to_basis(f, "p").coeffs
    b = to_basis(g, "p").coeffs
    total = Fraction(0) if qctx is None else CycloElem.scalar(qctx, Fraction(0))
    for lam, c in a.items():
        d = b.get(lam)
        if d is None:
            continue
        w = c * d * stat("z", lam)
        if mode != "plain":
            factor = _ONE
            for part in lam:
                factor = factor * (_ONE - _Q ** part)
            if mode == "hl":
                factor = _ONE / factor
            w = w * (factor if qctx is None else _to_cyclo(factor, qctx))
        total = total + w
    return total


# ---------------------------------------------------------------------------
# Milne polynomials: straightening of integer index sequences


_STRAIGHTEN_MEMO = {}


def _straighten(seq):
    """Rewrite an integer index sequence as partitions with q coefficients.

    The two-slot exchange rule is applied at the leftmost ascent until the
    sequence is weakly decreasing; a trailing negative entry kills the term
    and trailing zeros are stripped.  The adjacent case n = m+1 degenerates
    to a plain q-weighted swap.
    """
    got = _STRAIGHTEN_MEMO.get(seq)
    if got is not None:
        return got
    spot = None
    for i in range(len(seq) - 1):
        if seq[i] < seq[i + 1]:
            spot = i
            break
    if spot is None:
        end = len(seq)
        while end and seq[end - 1] == 0:
            end -= 1
        kept = seq[:end]
        out = {} if any(x < 0 for x in kept) else {Partition(kept): _ONE}
        _STRAIGHTEN_MEMO[seq] = out
        return out
    m, n2 = seq[spot], seq[spot + 1]

    def child(a, b, coeff, acc):
        sub = _straighten(seq[:spot] + (a, b) + seq[spot + 2:])
        for lam, c in sub.items():
            v = acc.get(lam, 0) + coeff * c
            if v:
                acc[lam] = v
            else:
                acc.pop(lam, None)

    out = {}
    if n2 == m + 1:
        child(n2, m, _Q, out)
    else:
        child(n2, m, _Q, out)
        child(n2 - 1, m + 1, -_ONE, out)
        child(m + 1, n2 - 1, _Q, out)
    _STRAIGHTEN_MEMO[seq] = out
    return out


def hlq_of_sequence(seq, qctx=None):
    """Hall-Littlewood Q indexed by any integer sequence, straightened to HL_Q."""
    seq = tuple(seq)
    flat = _straighten(seq)
    return SymFuncExpr("HL_Q", dict(flat), qctx, deg=max(sum(seq), 0))


_MILNE_MEMO = {}


def _milne_partition_s(lam):
    """Milne polynomial of a partition in the Schur basis, symbolic q.

    Computed by the raising-operator expansion, which is one Kostka matrix
    column but costs far less than orthogonalizing the whole degree.
    """
    got = _MILNE_MEMO.get(lam)
    if got is None:
        raised = raising_apply(hl_raising_series(), tuple(lam))
        got = to_basis(raised, "s").coeffs
        _MILNE_MEMO[lam] = got
    return got


def milne(seq, qctx=None):
    """Milne polynomial of an arbitrary integer index sequence, in the Schur basis.

    For a partition index this is a column of the Kostka matrix; a general
    sequence is first straightened to a combination of partition indices.
    """
    seq = tuple(seq)
    flat = _straighten(seq)
    if not flat:
        return SymFuncExpr("s", {}, qctx, deg=max(sum(seq), 0))
    out = {}
    for lam, c in flat.items():
        for mu, e in _milne_partition_s(lam).items():
            v = out.get(mu, 0) + c * e
            if v:
                out[mu] = v
            else:
                out.pop(mu, None)
    return SymFuncExpr("s", out, qctx, deg=sum(seq))


def q_plethysm(f):
    """Substitute each power sum p_r by p_r / (1 - q^r); symbolic q only."""
    if f.qctx is not None:
        raise SymFuncError("plethystic rescaling needs symbolic q")
    g = to_basis(f, "p")
    out = {}
    for lam, c in g.coeffs.items():
        w = RatFunc._coerce(c)
        for r in lam:
            w = w / (_ONE - _Q ** r)
        out[lam] = w
    return SymFuncExpr("p", out, None, deg=f.deg)


def p_stretch(f, N):
    """Replace each variable by its N-th power: p_r maps to p_{N r}."""
    g = to_basis(f, "p")
    out = {Partition(tuple(N * x for x in lam)): c for lam, c in g.coeffs.items()}
    return SymFuncExpr("p", out, g.qctx, deg=N * g.deg)


# ---------------------------------------------------------------------------
# raising operators


def hl_raising_series(q=None):
    """Pair series (1 - R)/(1 - qR): coefficient 1, then (q-1) q^(k-1)."""
    q = _Q if q is None else q

    def coeff(i, j, k):
        if k == 0:
            return 1
        return (q - 1) * q ** (k - 1)

    return coeff


def identity_series(i, j, k):
    return 1 if k == 0 else 0


def raising_apply(pair_coeff, index, slot_gen=None, qctx=None):
    """Apply a product of per-pair raising-operator series to an index vector.

    pair_coeff(i, j, k) is the coefficient of the k-th power of the operator
    that raises slot i and lowers slot j (i < j).  Pairs are processed in
    descending i; once a slot can only be lowered from then on, any state
    already negative there is dropped, which truncates every series to
    finitely many terms.  Operators touch subscripts only, never scalars.

    With the default generator family each final vector becomes a product
    of complete homogeneous functions (entry 0 contributes a factor 1,
    a negative entry kills the term); a custom slot_gen(slot, k) may supply
    any expression per slot and the result is assembled in the p basis.
    """
    entries = tuple(index)
    nslots = len(entries)
    states = {entries: 1}
    for i in range(nslots - 2, -1, -1):
        states = {v: c for v, c in states.items()
                  if all(v[t] >= 0 for t in range(i + 1, nslots))}
        for j in range(i + 1, nslots):
            nxt = {}
            for v, c in states.items():
                for k in range(v[j] + 1):
                    w = pair_coeff(i, j, k)
                    if not w:
                        continue
                    moved = list(v)
                    moved[i] += k
                    moved[j] -= k
                    key = tuple(moved)
                    term = c * w
                    acc = nxt.get(key)
                    nxt[key] = term if acc is None else acc + term
            states = {v: c for v, c in nxt.items() if c}

    if slot_gen is None:
        out = {}
        for v, c in states.items():
            if any(x < 0 for x in v):
                continue
            lam = Partition(tuple(sorted((x for x in v if x > 0), reverse=True)))
            acc = out.get(lam)
            out[lam] = c if acc is None else acc + c
        return SymFuncExpr("h", out, qctx, deg=max(sum(entries), 0))

    total = SymFuncExpr("p", {}, qctx, deg=max(sum(entries), 0))
    for v, c in states.items():
        if any(x < 0 for x in v):
            continue
        prod = SymFuncExpr.term("p", Partition(()), 1, qctx)
        for slot, k in enumerate(v):
            prod = multiply(prod, slot_gen(slot, k))
        total = total + prod.scale(c)
    return total


# ---------------------------------------------------------------------------
# finite-variable evaluation


def _distinct_perms(vec):
    items = sorted(set(vec))
    counts = {x: vec.count(x) for x in items}
    n = len(vec)
    out = []

    def rec(prefix):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for x in items:
            if counts[x]:
                counts[x] -= 1
                prefix.append(x)
                rec(prefix)
                prefix.pop()
                counts[x] += 1

    rec([])
    return out


def specialize_vars(f, values):
    """Evaluate a symmetric function at finitely many variable values.

    Variables beyond the list are set to zero, so any monomial term whose
    partition is longer than the list drops out.
    """
    values = [_wrap(v, f.qctx) for v in values]
    g = to_basis(f, "m")
    total = 0
    for lam, c in g.coeffs.items():
        if lam.length() > len(values):
            continue
        padded = tuple(lam) + (0,) * (len(values) - lam.length())
        acc = 0
        for perm in _distinct_perms(padded):
            term = 1
            for v, e in zip(values, perm):
                if e:
                    term = term * v ** e
            acc = acc + term
        total = total + c * acc
    if isinstance(total, int):
        total = Fraction(total)
        if f.qctx is not None:
            total = CycloElem.scalar(f.qctx, total)
    return total


def monomial_in_HLQ(lam, qctx=None):
    """Expansion of a monomial symmetric function over HL_Q in len(lam) variables.

    Returns the coefficient map; only partitions of the same length survive
    the restriction to that many variables, and the support always sits at
    or below the index partition in dominance order.
    """
    if not isinstance(lam, Partition):
        lam = Partition(tuple(lam))
    n = lam.weight()
    parts, k = _kostka(n)
    k1 = [[Fraction(c.substitute({"q": _ONE}).as_fraction()) for c in row] for row in k]
    m_of_q = _mat_mul(_mat_inv(k1, Fraction(1)), k)
    i = parts.index(lam)
    out = {}
    for j, mu in enumerate(parts):
        if mu.length() != lam.length():
            continue
        c = m_of_q[i][j]
        if not c:
            continue
        c = c / _b_factor(mu, None)
        out[mu] = c if qctx is None else _to_cyclo(c, qctx)
    return out
