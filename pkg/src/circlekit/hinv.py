"""h-invariant machinery.

Exact h for quadratic forms (rank minus rational Witt index, computed from the
classical invariants: signature, discriminant square class and Hasse symbols),
verification and linear count of product decompositions, and the g_M / f_M
splitting constructions.

For degree >= 3 only upper-bound certification through verified decompositions
is offered; no exact algorithm is claimed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import prod

from sympy import factorint

from .poly import LinearForm, Polynomial, SubstitutionMap


# ---------------------------------------------------------------------------
# decompositions f = sum U_i V_i
# ---------------------------------------------------------------------------

@dataclass
class Decomposition:
    """A claimed representation f = sum U_i V_i with forms of positive degree."""

    target: Polynomial
    pairs: list

    @property
    def claimed_h(self):
        return len(self.pairs)


def verify_decomposition(dec):
    """Check a Decomposition by exact arithmetic.

    Returns (ok, diagnostics).  Raises ValueError if the target is not
    homogeneous; shape violations in the pairs yield ok=False with a reason.
    """
    f = dec.target
    if not f.is_homogeneous() or f.is_zero():
        raise ValueError("decomposition target must be a nonzero form")
    d = f.degree
    for idx, (u, v) in enumerate(dec.pairs, start=1):
        for name, g in (("U", u), ("V", v)):
            if g.is_zero() or not g.is_homogeneous():
                return False, {"reason": f"{name}_{idx} is not a form of positive degree"}
        if u.degree < 1 or v.degree < 1 or u.degree + v.degree != d:
            return False, {"reason": f"pair {idx}: degrees {u.degree}+{v.degree} != {d}"}
    total = Polynomial.zero(f.n)
    for u, v in dec.pairs:
        total = total + u * v
    diff = total - f
    if diff.is_zero():
        return True, {}
    e, c = diff.sorted_terms()[0]
    return False, {"reason": "sum differs from target",
                   "first_offending_monomial": e, "excess_coefficient": c}


def linear_count(dec):
    """Number of pairs whose lower-degree factor is linear.

    A verified decomposition with k such pairs witnesses h*(f) >= k when
    k pairs are achieved inside an optimal (length h) decomposition.
    """
    ok, diag = verify_decomposition(dec)
    if not ok:
        raise ValueError(f"invalid decomposition: {diag.get('reason')}")
    return sum(1 for u, v in dec.pairs if min(u.degree, v.degree) == 1)


# ---------------------------------------------------------------------------
# rational invariants of quadratic forms
# ---------------------------------------------------------------------------

def squarefree_part(a):
    """Signed squarefree integer representing the square class of a rational."""
    a = Fraction(a)
    if a == 0:
        return 0
    m = a.numerator * a.denominator
    sign = -1 if m < 0 else 1
    out = sign
    for p, e in factorint(abs(m)).items():
        if e % 2:
            out *= p
    return out


def _split_valuation(a, p):
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v, a


def _legendre(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def hilbert_symbol(a, b, p):
    """Hilbert symbol (a, b)_p for nonzero integers; p prime, or None for R."""
    if a == 0 or b == 0:
        raise ValueError("hilbert symbol needs nonzero arguments")
    if p is None:
        return -1 if (a < 0 and b < 0) else 1
    al, u = _split_valuation(abs(a), p)
    be, v = _split_valuation(abs(b), p)
    u *= -1 if a < 0 else 1
    v *= -1 if b < 0 else 1
    if p != 2:
        s = 1
        if al % 2 and be % 2 and p % 4 == 3:
            s = -s
        if be % 2 and _legendre(u, p) == -1:
            s = -s
        if al % 2 and _legendre(v, p) == -1:
            s = -s
        return s
    eps_u = (u - 1) // 2
    eps_v = (v - 1) // 2
    om_u = (u * u - 1) // 8
    om_v = (v * v - 1) // 8
    e = eps_u * eps_v + al * om_v + be * om_u
    return -1 if e % 2 else 1


def is_local_square(a, p):
    """Is the nonzero integer a a square in Q_p (p prime, or None for R)?"""
    if a == 0:
        raise ValueError("zero has no square class")
    if p is None:
        return a > 0
    v, u = _split_valuation(abs(a), p)
    u *= -1 if a < 0 else 1
    if v % 2:
        return False
    if p == 2:
        return u % 8 == 1
    return _legendre(u, p) == 1


def _diagonalize_symmetric(A):
    """Exact diagonalization of a symmetric rational matrix by congruence.

    Returns the nonzero diagonal entries of some P^T A P with P invertible.
    """
    A = [[Fraction(x) for x in row] for row in A]
    n = len(A)
    diag = []
    for i in range(n):
        if A[i][i] == 0:
            # try to bring a nonzero diagonal entry to position i
            pivot = next((j for j in range(i + 1, n) if A[j][j] != 0), None)
            if pivot is not None:
                for k in range(n):
                    A[i][k], A[pivot][k] = A[pivot][k], A[i][k]
                for k in range(n):
                    A[k][i], A[k][pivot] = A[k][pivot], A[k][i]
            else:
                off = next((j for j in range(i + 1, n) if A[i][j] != 0), None)
                if off is None:
                    continue  # row i is identically zero: rank drop
                # x_off <- x_off + x_i turns the off-diagonal entry diagonal
                for k in range(n):
                    A[i][k] += A[off][k]
                for k in range(n):
                    A[k][i] += A[k][off]
                if A[i][i] == 0:
                    continue
        a = A[i][i]
        for j in range(i + 1, n):
            if A[i][j] != 0:
                r = A[i][j] / a
                for k in range(n):
                    A[j][k] -= r * A[i][k]
                for k in range(n):
                    A[k][j] -= r * A[k][i]
        diag.append(a)
    return [d for d in diag if d != 0]


def _isotropic_local(r, d, eps, p):
    # Serre's criteria for a rank-r p-adic form with discriminant class d and
    # Hasse symbol eps to represent zero nontrivially.
    if r >= 5:
        return True
    if r == 4:
        return (not is_local_square(d, p)) or eps == hilbert_symbol(-1, -1, p)
    if r == 3:
        return eps == hilbert_symbol(-1, -d, p)
    if r == 2:
        return is_local_square(-d, p)
    return False


def _witt_index_local(diag_sf, p):
    """Witt index over Q_p of the form with squarefree diagonal entries."""
    r = len(diag_sf)
    d = squarefree_part(Fraction(prod(diag_sf)))
    eps = 1
    for i in range(r):
        for j in range(i + 1, r):
            eps *= hilbert_symbol(diag_sf[i], diag_sf[j], p)
    w = 0
    while r >= 2 and _isotropic_local(r, d, eps, p):
        eps *= hilbert_symbol(-1, squarefree_part(Fraction(-d)), p)
        d = squarefree_part(Fraction(-d))
        r -= 2
        w += 1
    return w


def witt_index(diag):
    """Witt index over Q of the nondegenerate diagonal form ``diag``.

    Equals the minimum of the local Witt indices over all completions
    (strong Hasse-Minkowski).  Only finitely many places can be extremal:
    the reals, 2, primes dividing an entry, and the generic unramified bound.
    """
    entries = [squarefree_part(a) for a in diag if a != 0]
    r = len(entries)
    if r == 0:
        return 0
    sp = sum(1 for a in entries if a > 0)
    w = min(sp, r - sp)
    places = {2}
    for a in entries:
        places.update(factorint(abs(a)))
    for p in sorted(places):
        if w == 0:
            break
        w = min(w, _witt_index_local(entries, p))
    # cap from unramified odd primes: reduction mod p over F_p
    if r % 2 == 0:
        dd = squarefree_part(Fraction(prod(entries) * (-1) ** (r // 2)))
        w = min(w, r // 2 if dd == 1 else (r - 2) // 2)
    else:
        w = min(w, (r - 1) // 2)
    return w


@dataclass
class QuadraticFormData:
    """Invariant record for a rational quadratic form f(x) = x^T gram x.

    ``gram`` is the symmetric matrix with A_ii the coefficient of x_i^2 and
    A_ij half the coefficient of x_i x_j (so mixed coefficients are 2*A_ij).
    """

    gram: tuple
    rank: int
    signature: tuple
    witt_index: int
    h_value: int


def gram_matrix(f):
    """Symmetric rational Gram matrix of a quadratic form."""
    if f.is_zero():
        return tuple(tuple(Fraction(0) for _ in range(f.n)) for _ in range(f.n))
    if not f.is_homogeneous() or f.degree != 2:
        raise ValueError("need a homogeneous quadratic form")
    A = [[Fraction(0)] * f.n for _ in range(f.n)]
    for e, c in f.terms.items():
        idx = [i for i, k in enumerate(e) for _ in range(k)]
        i, j = idx
        if i == j:
            A[i][i] = Fraction(c)
        else:
            A[i][j] = A[j][i] = Fraction(c, 2)
    return tuple(tuple(row) for row in A)


def quadratic_h(f):
    """Exact h-invariant data for a quadratic form: h = rank - Witt index."""
    A = gram_matrix(f)
    diag = _diagonalize_symmetric([list(r) for r in A])
    sf = [squarefree_part(a) for a in diag]
    rank = len(sf)
    sp = sum(1 for a in sf if a > 0)
    w = witt_index(sf)
    return QuadraticFormData(gram=A, rank=rank, signature=(sp, rank - sp),
                             witt_index=w, h_value=rank - w)


# ---------------------------------------------------------------------------
# restriction inequality and g_M / f_M construction
# ---------------------------------------------------------------------------

@dataclass
class RestrictionReport:
    h: int
    per_index: list  # (i, h of f|_{x_i=0}, within_bounds)

    @property
    def ok(self):
        return all(flag for _, _, flag in self.per_index)


def lemma21_check(f):
    """For a quadratic form, verify h(f) - 1 <= h(f|_{x_i=0}) <= h(f) for all i."""
    h0 = 0 if f.is_zero() else quadratic_h(f).h_value
    rows = []
    for i in range(1, f.n + 1):
        fi = f.restrict_zero(i)
        hi = 0 if fi.is_zero() else quadratic_h(fi).h_value
        rows.append((i, hi, h0 - 1 <= hi <= h0))
    return RestrictionReport(h=h0, per_index=rows)


def build_gm_fm(f, dec, M):
    """Split f along the first M echelonized linear factors of a decomposition.

    The leading M pairs must have U_i = x_i + l_i with l_i supported on
    variables M+1..n.  Returns (g_M, f_M) with f = g_M + f_M, where f_M is f
    with x_i replaced by -l_i, and checks that g_M vanishes identically under
    the same substitution.
    """
    if not f.is_homogeneous() or f.is_zero():
        raise ValueError("f must be a nonzero form")
    if not 1 <= M <= len(dec.pairs):
        raise ValueError("M out of range for the decomposition")
    n = f.n
    ells = []
    for i in range(1, M + 1):
        u = dec.pairs[i - 1][0]
        ell = u - Polynomial.variable(n, i)
        if ell.degree > 1 or not all(e == 0 or sum(e) == 1 for e in ell.terms):
            raise ValueError(f"U_{i} is not of the form x_{i} + linear")
        coeffs = [Fraction(0)] * n
        for e, c in ell.terms.items():
            j = e.index(1)
            coeffs[j] = Fraction(c)
        lf = LinearForm(coeffs)
        if any(j <= M for j in lf.support_vars()):
            raise ValueError(
                f"l_{i} must be supported on variables {M + 1}..{n}")
        ells.append(lf)
    smap = SubstitutionMap({i + 1: -ells[i] for i in range(M)})
    f_M = f.substitute(smap)
    g_M = f - f_M
    if not g_M.substitute(smap).is_zero():
        raise AssertionError("g_M does not vanish under the echelon substitution")
    return g_M, f_M


# reported lower bound for the threshold constant of degree d; the two
# regularization-dependent terms are non-constructive and omitted.
def a_d_lower(d):
    import math
    return 5 * 2 ** (d - 1) * (d - 1) * math.factorial(d) / math.log(2) ** d + 5 * d
