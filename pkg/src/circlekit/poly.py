"""Exact sparse multivariate polynomial arithmetic over Z and Q.

Variables are indexed 1..n.  Terms are stored as a map from exponent tuples
(0-based positions, length n) to nonzero exact coefficients (int or Fraction).
All values are immutable after construction; every operation returns a new
polynomial, so everything here is safe to call from concurrent workers.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct
from math import gcd

import numpy as np

Coeff = "int | Fraction"


def _norm_coeff(c):
    """Normalize to int when the denominator is 1, keep Fraction otherwise."""
    if isinstance(c, Fraction):
        return int(c) if c.denominator == 1 else c
    if isinstance(c, int):
        return c
    raise TypeError(f"coefficient must be int or Fraction, got {type(c).__name__}")


def _grlex_key(exps):
    # graded lexicographic, largest first when used with sort(reverse=True)
    return (sum(exps), exps)


class Polynomial:
    """Sparse exact polynomial in ``n`` variables."""

    __slots__ = ("n", "terms", "degree", "_hash")

    def __init__(self, n, terms=None):
        n = int(n)
        if n < 0:
            raise ValueError("variable count must be >= 0")
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise ValueError(f"exponent vector {exps} has length {len(exps)}, expected {n}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = _norm_coeff(c)
            if c:
                if exps in clean:
                    s = _norm_coeff(clean[exps] + c)
                    if s:
                        clean[exps] = s
                    else:
                        del clean[exps]
                else:
                    clean[exps] = c
        self.n = n
        self.terms = clean
        self.degree = max((sum(e) for e in clean), default=0)
        self._hash = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n):
        return cls(n, {})

    @classmethod
    def constant(cls, n, c):
        return cls(n, {(0,) * n: c})

    @classmethod
    def variable(cls, n, i):
        """The monomial x_i (1-based index)."""
        if not 1 <= i <= n:
            raise IndexError(f"variable index {i} out of range 1..{n}")
        e = [0] * n
        e[i - 1] = 1
        return cls(n, {tuple(e): 1})

    # -- predicates --------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_integral(self):
        return all(isinstance(c, int) for c in self.terms.values())

    def is_homogeneous(self):
        if not self.terms:
            return True
        degs = {sum(e) for e in self.terms}
        return len(degs) == 1

    def support_vars(self):
        """Set of 1-based variable indices that actually occur."""
        out = set()
        for e in self.terms:
            for i, k in enumerate(e):
                if k:
                    out.add(i + 1)
        return out

    # -- arithmetic --------------------------------------------------------

    def _require_same_ring(self, other):
        if self.n != other.n:
            raise ValueError(f"variable count mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.n, other)
        self._require_same_ring(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = _norm_coeff(terms.get(e, 0) + c)
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return Polynomial(self.n, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Polynomial.zero(self.n)
            return Polynomial(self.n, {e: c * other for e, c in self.terms.items()})
        self._require_same_ring(other)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return Polynomial(self.n, terms)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset((e, Fraction(c)) for e, c in self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"Polynomial(n={self.n}, {self.to_text()!r})"

    # -- evaluation --------------------------------------------------------

    def evaluate(self, point):
        """Exact evaluation at an integer/rational point."""
        if len(point) != self.n:
            raise ValueError(f"point length {len(point)} != {self.n} variables")
        total = 0
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v *= x ** k
            total += v
        return total

    def evaluate_mod(self, point, q):
        """``evaluate(point) mod q`` for q >= 1, in [0, q)."""
        q = int(q)
        if q < 1:
            raise ValueError("modulus must be >= 1")
        if len(point) != self.n:
            raise ValueError(f"point length {len(point)} != {self.n} variables")
        if not self.is_integral():
            raise ValueError("modular evaluation needs integer coefficients")
        total = 0
        for e, c in self.terms.items():
            v = c % q
            for x, k in zip(point, e):
                if k:
                    v = (v * pow(int(x) % q, k, q)) % q
            total = (total + v) % q
        return total

    def eval_float(self, points):
        """Vectorized float evaluation; ``points`` has shape (m, n)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.shape[1] != self.n:
            raise ValueError(f"points have {pts.shape[1]} columns, expected {self.n}")
        out = np.zeros(pts.shape[0])
        for e, c in self.terms.items():
            v = np.full(pts.shape[0], float(c))
            for i, k in enumerate(e):
                if k:
                    v *= pts[:, i] ** k
            out += v
        return out

    def gradient(self):
        """List of partial derivatives, one Polynomial per variable."""
        grads = []
        for i in range(self.n):
            terms = {}
            for e, c in self.terms.items():
                if e[i]:
                    ne = list(e)
                    ne[i] -= 1
                    terms[tuple(ne)] = terms.get(tuple(ne), 0) + c * e[i]
            grads.append(Polynomial(self.n, terms))
        return grads

    # -- structural operations --------------------------------------------

    def top_degree_part(self):
        """The homogeneous part of maximal total degree."""
        if not self.terms:
            raise ValueError("zero polynomial has no top-degree part")
        d = self.degree
        return Polynomial(self.n, {e: c for e, c in self.terms.items() if sum(e) == d})

    def restrict_zero(self, i):
        """Set x_i = 0; the ambient variable count is preserved."""
        if not 1 <= i <= self.n:
            raise IndexError(f"variable index {i} out of range 1..{self.n}")
        return Polynomial(self.n, {e: c for e, c in self.terms.items() if e[i - 1] == 0})

    def substitute(self, smap):
        """Apply a SubstitutionMap; see its docstring for the well-formedness rule."""
        smap.validate(self.n)
        # per-variable replacement polynomials, memoized powers
        repl = {}
        for i, a in smap.assignments.items():
            if isinstance(a, LinearForm):
                repl[i] = a.to_polynomial(self.n)
            else:
                repl[i] = Polynomial.constant(self.n, a)
        powers = {i: {0: Polynomial.constant(self.n, 1)} for i in repl}
        out = Polynomial.zero(self.n)
        for e, c in self.terms.items():
            term = Polynomial.constant(self.n, c)
            for i, k in enumerate(e, start=1):
                if not k:
                    continue
                if i in repl:
                    cache = powers[i]
                    m = max(cache)
                    while m < k:
                        cache[m + 1] = cache[m] * repl[i]
                        m += 1
                    term = term * cache[k]
                else:
                    mono = [0] * self.n
                    mono[i - 1] = k
                    term = term * Polynomial(self.n, {tuple(mono): 1})
            out = out + term
        return out

    def compose_linear(self, rows, n_new):
        """Substitute x_i by the linear form with coefficients ``rows[i-1]`` in
        a fresh ring with ``n_new`` variables."""
        if len(rows) != self.n:
            raise ValueError("need one coefficient row per variable")
        repl = [Polynomial(n_new, {tuple(1 if j == k else 0 for j in range(n_new)): c
                                   for k, c in enumerate(row) if c})
                for row in rows]
        out = Polynomial.zero(n_new)
        powers = [{0: Polynomial.constant(n_new, 1)} for _ in range(self.n)]
        for e, c in self.terms.items():
            term = Polynomial.constant(n_new, c)
            for i, k in enumerate(e):
                if not k:
                    continue
                cache = powers[i]
                while max(cache) < k:
                    cache[max(cache) + 1] = cache[max(cache)] * repl[i]
                term = term * cache[k]
            out = out + term
        return out

    # -- serialization -----------------------------------------------------

    def sorted_terms(self):
        """Terms in canonical graded-lexicographic order (largest first)."""
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def to_text(self):
        """Canonical text format: header ``n=<int>``, then one monomial per line
        ``c k_1 ... k_n``.  Round-trips bit-exactly through :func:`parse_polynomial`."""
        lines = [f"n={self.n}"]
        for e, c in self.sorted_terms():
            cs = str(c) if isinstance(c, int) else f"{c.numerator}/{c.denominator}"
            lines.append(" ".join([cs] + [str(k) for k in e]))
        return "\n".join(lines) + "\n"

    def sha256(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()


def parse_polynomial(text):
    """Parse the one-monomial-per-line format produced by ``to_text``."""
    n = None
    terms = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("n="):
            if n is not None:
                raise ValueError(f"line {lineno}: duplicate header")
            n = int(line[2:])
            continue
        if n is None:
            raise ValueError(f"line {lineno}: missing 'n=<int>' header")
        parts = line.split()
        if len(parts) != n + 1:
            raise ValueError(f"line {lineno}: expected coefficient plus {n} exponents")
        cs = parts[0]
        c = Fraction(cs) if "/" in cs else int(cs)
        exps = tuple(int(x) for x in parts[1:])
        terms[exps] = terms.get(exps, 0) + c
    if n is None:
        raise ValueError("missing 'n=<int>' header")
    return Polynomial(n, terms)


def load_polynomial(path):
    with open(path) as fh:
        return parse_polynomial(fh.read())


@dataclass(frozen=True)
class LinearForm:
    """A linear form sum(c_i * x_i) with rational coefficients, no constant."""

    coefficients: tuple

    def __init__(self, coefficients):
        object.__setattr__(self, "coefficients",
                           tuple(_norm_coeff(Fraction(c)) for c in coefficients))

    def is_zero(self):
        return all(c == 0 for c in self.coefficients)

    def support_vars(self):
        return {i + 1 for i, c in enumerate(self.coefficients) if c}

    def to_polynomial(self, n):
        if len(self.coefficients) != n:
            raise ValueError("coefficient count mismatch")
        terms = {}
        for i, c in enumerate(self.coefficients):
            if c:
                e = [0] * n
                e[i] = 1
                terms[tuple(e)] = c
        return Polynomial(n, terms)

    def __neg__(self):
        return LinearForm(tuple(-c for c in self.coefficients))


@dataclass(frozen=True)
class SubstitutionMap:
    """Partial map variable index -> LinearForm or rational constant.

    Well-formed when every assigned LinearForm references only *unassigned*
    variables, so the whole substitution can be applied in one pass.
    """

    assignments: dict

    def validate(self, n):
        assigned = set(self.assignments)
        for i, a in self.assignments.items():
            if not 1 <= i <= n:
                raise ValueError(f"assigned variable {i} out of range 1..{n}")
            if isinstance(a, LinearForm):
                bad = a.support_vars() & assigned
                if bad:
                    raise ValueError(
                        f"assignment for x_{i} references assigned variables {sorted(bad)}")
            elif not isinstance(a, (int, Fraction)):
                raise TypeError("assignments must be LinearForm or int/Fraction")


# -- operation-style wrappers (thin aliases over methods) -------------------

def evaluate_int(p, point):
    return p.evaluate(point)


def evaluate_mod(p, point, q):
    return p.evaluate_mod(point, q)


def top_degree_part(p):
    return p.top_degree_part()


def restrict_zero(p, i):
    return p.restrict_zero(i)


def substitute_linear(p, smap):
    return p.substitute(smap)


# -- Weyl differencing ------------------------------------------------------

def weyl_difference(G, d, args):
    """Numeric alternating 2^d-term difference of G along the d argument vectors.

    Sign convention: the full-sum term (all arguments included) enters with a
    plus sign, so for a degree-d form the result is the d!-scaled polar form;
    e.g. G = x^2 gives 2uv and G = x^3 gives 6uvw.
    """
    d = int(d)
    if d < 1:
        raise ValueError("d must be >= 1")
    if len(args) != d:
        raise ValueError(f"need {d} argument vectors, got {len(args)}")
    for a in args:
        if len(a) != G.n:
            raise ValueError("argument vector length mismatch")
    total = 0
    for ts in iproduct((0, 1), repeat=d):
        point = [0] * G.n
        for t, a in zip(ts, args):
            if t:
                for i, x in enumerate(a):
                    point[i] += x
        sign = 1 if (d - sum(ts)) % 2 == 0 else -1
        total += sign * G.evaluate(point)
    return total


def weyl_difference_poly(G, d):
    """Symbolic Weyl difference: a polynomial in d blocks of n fresh variables.

    Block k (1-based) occupies variables (k-1)*n+1 .. k*n of the result ring.
    """
    d = int(d)
    if d < 1:
        raise ValueError("d must be >= 1")
    n = G.n
    n_new = n * d
    out = Polynomial.zero(n_new)
    for ts in iproduct((0, 1), repeat=d):
        rows = []
        for i in range(n):
            row = [0] * n_new
            for k, t in enumerate(ts):
                if t:
                    row[k * n + i] = 1
            rows.append(row)
        sign = 1 if (d - sum(ts)) % 2 == 0 else -1
        out = out + sign * G.compose_linear(rows, n_new)
    return out
