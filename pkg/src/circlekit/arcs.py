"""Arc dissection and exponential sums.

Major/minor arc geometry on the torus, von-Mangoldt-weighted and plain
exponential sums, normalized full-residue sums, rational classification of
frequencies, and the degeneracy diagnostics z_R / fitted g_d built on the
multilinear differencing operator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .poly import weyl_difference

_ENUM_BUDGET = 10 ** 8


class BudgetExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# arc geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalFreq:
    """A reduced rational frequency m/q in [0, 1)."""

    m: int
    q: int

    def __post_init__(self):
        if self.q < 1 or not 0 <= self.m < self.q:
            raise ValueError("need 0 <= m < q")
        if math.gcd(self.m, self.q) != 1:
            raise ValueError("m/q must be reduced")

    @property
    def value(self):
        return Fraction(self.m, self.q)


@dataclass
class ArcDissection:
    """Major arcs: closed intervals of one radius around all reduced m/q
    with q up to (log N)^C.  The arc at 0 wraps around the torus."""

    N: int
    C: float
    d: int
    arcs: list            # (RationalFreq, radius)
    total_measure: float

    def radius(self):
        return self.arcs[0][1]

    def contains(self, alpha):
        """The center whose arc contains alpha (mod 1), or None."""
        a = alpha % 1.0
        r = self.radius()
        for freq, _ in self.arcs:
            c = float(freq.value)
            dist = abs(a - c)
            if min(dist, 1.0 - dist) <= r:
                return freq
        return None


def build_arcs(N, C, d):
    """Construct the major-arc dissection at scale N.

    Radius N^{-d} (log N)^C around every reduced m/q with q <= (log N)^C;
    log is natural.  Raises if the arcs overlap (N too small for C).
    """
    if N < 3:
        raise ValueError("need N >= 3 so that log N > 1")
    logC = math.log(N) ** C
    Q = int(logC)
    radius = N ** (-d) * logC
    centers = sorted(
        {Fraction(m, q) for q in range(1, Q + 1)
         for m in range(q) if math.gcd(m, q) == 1})
    # consecutive Farey gaps, plus the wrap-around gap back to 0
    gaps = [b - a for a, b in zip(centers, centers[1:])]
    gaps.append(1 - centers[-1] + centers[0])
    if min(gaps) <= 2 * Fraction(radius):
        raise ValueError(
            f"arcs of radius {radius} overlap at N={N}, C={C}")
    arcs = [(RationalFreq(c.numerator % c.denominator, c.denominator), radius)
            for c in centers]
    return ArcDissection(N=N, C=C, d=d, arcs=arcs,
                         total_measure=len(arcs) * 2 * radius)


# ---------------------------------------------------------------------------
# exponential sums
# ---------------------------------------------------------------------------

def _weighted_support(table, N):
    """Indices k <= N with Lambda(k) > 0 and their log weights."""
    if table.N < N:
        raise ValueError("von Mangoldt table too small")
    ks = [k for k in range(min(N, table.N) + 1) if table.values[k] > 0]
    return np.array(ks, dtype=np.int64), np.array(
        [table.values[k] for k in ks])


def T_sum(b, alpha, N, table):
    """Von-Mangoldt-weighted exponential sum over [0, N]^n.

    sum over x of Lambda(x_1)...Lambda(x_n) e(alpha b(x)), iterating over
    prime-power coordinates only.
    """
    ks, logs = _weighted_support(table, N)
    n = b.n
    if len(ks) ** n > _ENUM_BUDGET:
        raise BudgetExceeded("prime-power grid too large")
    re_parts, im_parts = [], []
    # outer tuples in lexicographic order, innermost coordinate vectorized
    for head in product(range(len(ks)), repeat=n - 1):
        pts = np.empty((len(ks), n), dtype=np.int64)
        for i, hi in enumerate(head):
            pts[:, i] = ks[hi]
        pts[:, n - 1] = ks
        vals = b.eval_float(pts.astype(float))
        w = math.prod(logs[hi] for hi in head) * logs
        ph = 2 * np.pi * alpha * vals
        re_parts.append(float(np.dot(w, np.cos(ph))))
        im_parts.append(float(np.dot(w, np.sin(ph))))
    return complex(math.fsum(re_parts), math.fsum(im_parts))


def S_sum(psi, alpha, box, P):
    """Plain exponential sum over the dilated box P*box intersected with Z^n.

    box is a list of (lo, hi) with hi - lo <= 1 in each coordinate.
    """
    if len(box) != psi.n:
        raise ValueError("box dimension mismatch")
    ranges = []
    for lo, hi in box:
        if hi - lo > 1 + 1e-12:
            raise ValueError("box sides must be at most 1")
        ranges.append(np.arange(math.ceil(P * lo), math.floor(P * hi) + 1,
                                dtype=np.int64))
    total = math.prod(len(r) for r in ranges)
    if total > _ENUM_BUDGET:
        raise BudgetExceeded("lattice box too large")
    if total == 0:
        return 0j
    re_parts, im_parts = [], []
    for head in product(*[range(len(r)) for r in ranges[:-1]]):
        pts = np.empty((len(ranges[-1]), psi.n), dtype=np.int64)
        for i, hi in enumerate(head):
            pts[:, i] = ranges[i][hi]
        pts[:, psi.n - 1] = ranges[-1]
        ph = 2 * np.pi * alpha * psi.eval_float(pts.astype(float))
        re_parts.append(float(np.sum(np.cos(ph))))
        im_parts.append(float(np.sum(np.sin(ph))))
    return complex(math.fsum(re_parts), math.fsum(im_parts))


def E_normalized(psi, q, m):
    """q^{-n} times the full-residue exponential sum of e(m psi(x) / q).

    Unlike the unit-restricted sums of the local module, x ranges over all
    of (Z/q)^n.
    """
    if q < 1:
        raise ValueError("q must be positive")
    if math.gcd(m, q) != 1:
        raise ValueError("need gcd(m, q) = 1")
    if not psi.is_integral():
        raise ValueError("need integer coefficients")
    n = psi.n
    if q ** n > _ENUM_BUDGET:
        raise BudgetExceeded("residue grid too large")
    total = 0j
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    last = np.arange(q, dtype=np.int64)
    for head in product(range(q), repeat=n - 1):
        pts = np.empty((q, n), dtype=np.int64)
        for i, h in enumerate(head):
            pts[:, i] = h
        pts[:, n - 1] = last
        vals = _eval_mod_batch(psi, pts, q)
        total += roots[(m % q) * vals % q].sum()
    return total / q ** n


def _eval_mod_batch(psi, pts, q):
    """Exact modular evaluation on an int64 batch of points; needs q^2 < 2^63."""
    out = np.zeros(len(pts), dtype=np.int64)
    for e, c in psi.terms.items():
        v = np.full(len(pts), int(c) % q, dtype=np.int64)
        for i, k in enumerate(e):
            for _ in range(k):
                v = v * (pts[:, i] % q) % q
        out = (out + v) % q
    return out


# ---------------------------------------------------------------------------
# rational classification of a frequency
# ---------------------------------------------------------------------------

def _convergents(alpha, q_max, depth=64):
    """Continued-fraction convergents (a, q) of alpha with q <= q_max."""
    out = []
    p0, q0, p1, q1 = 1, 0, 0, 1
    x = alpha
    for _ in range(depth):
        a = math.floor(x)
        p0, q0, p1, q1 = a * p0 + p1, a * q0 + q1, p0, q0
        if q0 > q_max:
            break
        out.append((p0, q0))
        frac = x - a
        if frac < 1e-15:
            break
        x = 1.0 / frac
    return out


def classify_alpha(alpha, P, d, Delta):
    """Rational approximation test: find the smallest q <= P^Delta with
    ||q alpha|| <= P^{Delta - d}, or report "minor".

    Returns (q, a, ||q alpha||) on success.  Small q ranges are scanned
    directly; otherwise continued-fraction convergents suffice, since best
    approximations are convergents.
    """
    if Delta <= 0:
        raise ValueError("Delta must be positive")
    q_max = int(P ** Delta)
    thresh = P ** (Delta - d)
    if q_max <= 10 ** 6:
        qs = np.arange(1, q_max + 1)
        dist = np.abs(qs * alpha - np.round(qs * alpha))
        hits = np.nonzero(dist <= thresh)[0]
        if len(hits):
            q = int(qs[hits[0]])
            return q, int(round(q * alpha)), float(dist[hits[0]])
        return "minor"
    for a, q in _convergents(alpha % 1.0, q_max):
        dd = abs(q * (alpha % 1.0) - a)
        if dd <= thresh:
            return q, a, dd
    return "minor"


# ---------------------------------------------------------------------------
# degeneracy diagnostics via the multilinear operator
# ---------------------------------------------------------------------------

@dataclass
class WeylReport:
    P: float
    R_values: list
    z_counts: list
    fitted_gd: float
    gamma_d: float
    gamma_d_prime: float


def _grid(n, R):
    axes = [np.arange(-R, R + 1, dtype=np.int64)] * n
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)


def z_count(f, d, R):
    """Number of (d-1)-tuples in [-R, R]^{n(d-1)} on which the differencing
    operator of f contracts to zero against every basis vector.

    For d = 2 this is exact kernel counting of the associated bilinear form;
    for d >= 3 the last tuple slot is handled by batched linear algebra over
    the grid.
    """
    if not f.is_homogeneous() or f.degree != d:
        raise ValueError("need a form of degree d")
    n = f.n
    if d < 2:
        raise ValueError("degeneracy count needs d >= 2")
    if (2 * R + 1) ** (n * (d - 2 if d > 2 else 0) + n) > _ENUM_BUDGET:
        raise BudgetExceeded("tuple grid too large")
    basis = np.eye(n, dtype=np.int64)
    Y = _grid(n, R).astype(float)               # candidate last vectors
    if d == 2:
        M = np.array([[weyl_difference(f, d, [basis[j], basis[i]])
                       for j in range(n)] for i in range(n)], dtype=float)
        return int(np.sum(np.all(np.abs(Y @ M.T) < 0.5, axis=1)))
    count = 0
    for head in product(_grid(n, R), repeat=d - 2):
        A = np.array([[weyl_difference(f, d, list(head) + [basis[j], basis[i]])
                       for j in range(n)] for i in range(n)], dtype=float)
        count += int(np.sum(np.all(np.abs(Y @ A.T) < 0.5, axis=1)))
    return count


def estimate_gd(f, d, R_list):
    """Fit the growth exponent of z_R and report the degeneracy exponents.

    fitted_gd = n(d-1) - slope of log z_R in log R; gamma_d and gamma'_d are
    the derived minor-arc exponents (infinite when g_d = 0).
    """
    if len(R_list) < 3:
        raise ValueError("need at least 3 values of R")
    R_list = sorted(R_list)
    zs = [z_count(f, d, R) for R in R_list]
    slope = float(np.polyfit(np.log(R_list), np.log(zs), 1)[0])
    gd = max(f.n * (d - 1) - slope, 0.0)
    gamma_d = 2 ** (d - 1) * (d - 1) / gd if gd > 0 else math.inf
    gamma_dp = 2 ** (d - 1) / gd if gd > 0 else math.inf
    return WeylReport(P=float(max(R_list)), R_values=list(R_list),
                      z_counts=zs, fitted_gd=gd,
                      gamma_d=gamma_d, gamma_d_prime=gamma_dp)
