"""Exact polynomial arithmetic, serialization, and the differencing operator.

Arithmetic is cross-checked against sympy as an independent oracle; the
symbolic differencing identities are checked monomial by monomial.
"""
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from circlekit.poly import (LinearForm, Polynomial, SubstitutionMap,
                            parse_polynomial, weyl_difference,
                            weyl_difference_poly)


def sympy_expr(p, symbols):
    expr = sympy.Integer(0)
    for e, c in p.terms.items():
        term = sympy.Rational(c) if isinstance(c, Fraction) else sympy.Integer(c)
        for s, k in zip(symbols, e):
            term *= s ** k
        expr += term
    return sympy.expand(expr)


small_polys = st.builds(
    lambda n, terms: Polynomial(
        n, {tuple(e[:n]): c for e, c in terms}),
    st.integers(1, 3),
    st.lists(st.tuples(st.tuples(*[st.integers(0, 3)] * 3),
                       st.integers(-9, 9)), max_size=5))


class TestArithmetic:
    @settings(max_examples=60, deadline=None)
    @given(small_polys, small_polys)
    def test_product_matches_sympy(self, a, b):
        n = max(a.n, b.n)
        a = Polynomial(n, {e + (0,) * (n - a.n): c for e, c in a.terms.items()})
        b = Polynomial(n, {e + (0,) * (n - b.n): c for e, c in b.terms.items()})
        syms = sympy.symbols(f"x1:{n + 1}")
        assert sympy_expr(a * b, syms) == sympy.expand(
            sympy_expr(a, syms) * sympy_expr(b, syms))
        assert sympy_expr(a + b, syms) == sympy_expr(a, syms) + sympy_expr(b, syms)

    @settings(max_examples=40, deadline=None)
    @given(small_polys, st.integers(0, 3))
    def test_power_is_repeated_product(self, a, k):
        prod = Polynomial.constant(a.n, 1)
        for _ in range(k):
            prod = prod * a
        assert a ** k == prod

    def test_zero_and_cancellation(self):
        x = Polynomial.variable(2, 1)
        assert (x - x).is_zero()
        assert (x * 0).is_zero()
        assert Polynomial.zero(2).degree == 0

    def test_rational_coefficients_normalize(self):
        p = parse_polynomial("n=1\n1/2 1\n1/2 1\n")
        assert p == Polynomial.variable(1, 1)
        assert p.is_integral()


class TestEvaluation:
    @settings(max_examples=40, deadline=None)
    @given(small_polys, st.tuples(*[st.integers(-5, 5)] * 3))
    def test_evaluate_matches_sympy(self, p, pt):
        pt = pt[:p.n]
        syms = sympy.symbols(f"x1:{p.n + 1}")
        expected = sympy_expr(p, syms).subs(dict(zip(syms, pt)))
        assert p.evaluate(pt) == expected

    @settings(max_examples=30, deadline=None)
    @given(small_polys, st.tuples(*[st.integers(-5, 5)] * 3),
           st.integers(2, 30))
    def test_evaluate_mod_consistent(self, p, pt, q):
        if not p.is_integral():
            return
        pt = pt[:p.n]
        assert p.evaluate_mod(pt, q) == int(p.evaluate(pt)) % q

    def test_eval_float_batch(self):
        p = parse_polynomial("n=2\n3 2 0\n-1 0 1\n5 0 0\n")
        pts = np.array([[1.0, 2.0], [0.5, -1.0]])
        np.testing.assert_allclose(p.eval_float(pts), [3 - 2 + 5, 0.75 + 1 + 5])

    def test_gradient(self):
        p = parse_polynomial("n=2\n1 2 1\n")     # x1^2 x2
        gx, gy = p.gradient()
        assert gx == parse_polynomial("n=2\n2 1 1\n")
        assert gy == parse_polynomial("n=2\n1 2 0\n")


class TestStructure:
    def test_top_degree_part(self):
        p = parse_polynomial("n=2\n1 2 0\n1 1 0\n-7 0 0\n")
        assert p.top_degree_part() == parse_polynomial("n=2\n1 2 0\n")
        assert p.top_degree_part().is_homogeneous()

    def test_restrict_zero(self):
        p = parse_polynomial("n=2\n1 2 0\n1 1 1\n4 0 2\n")
        assert p.restrict_zero(1) == parse_polynomial("n=2\n4 0 2\n")
        assert p.restrict_zero(2) == parse_polynomial("n=2\n1 2 0\n")

    def test_substitute_linear(self):
        # x1 -> x2 + x3 in x1^2: (x2+x3)^2
        p = parse_polynomial("n=3\n1 2 0 0\n")
        smap = SubstitutionMap({1: LinearForm([0, 1, 1])})
        assert p.substitute(smap) == parse_polynomial(
            "n=3\n1 0 2 0\n2 0 1 1\n1 0 0 2\n")

    def test_substitute_rejects_cyclic(self):
        p = parse_polynomial("n=2\n1 1 0\n")
        smap = SubstitutionMap({1: LinearForm([1, 1]), 2: LinearForm([0, 1])})
        with pytest.raises(ValueError):
            p.substitute(smap)

    def test_compose_linear_matches_substitution(self):
        p = parse_polynomial("n=2\n1 1 1\n")     # x1 x2
        # x1 -> u1 + u2, x2 -> u3 in a 3-variable ring
        q = p.compose_linear([[1, 1, 0], [0, 0, 1]], 3)
        assert q == parse_polynomial("n=3\n1 1 0 1\n1 0 1 1\n")


class TestSerialization:
    @settings(max_examples=50, deadline=None)
    @given(small_polys)
    def test_text_roundtrip(self, p):
        assert parse_polynomial(p.to_text()) == p

    def test_comments_and_duplicates(self):
        p = parse_polynomial("# a comment\nn=2\n2 1 0  # trailing\n3 1 0\n")
        assert p == parse_polynomial("n=2\n5 1 0\n")

    def test_hash_stable_under_term_order(self):
        a = parse_polynomial("n=2\n1 2 0\n2 0 2\n")
        b = parse_polynomial("n=2\n2 0 2\n1 2 0\n")
        assert a.sha256() == b.sha256()

    def test_parse_errors(self):
        with pytest.raises(ValueError):
            parse_polynomial("1 1\n")            # missing header
        with pytest.raises(ValueError):
            parse_polynomial("n=2\n1 1\n")       # wrong arity


class TestDifferencing:
    def test_square_gives_twice_product(self):
        G = parse_polynomial("n=1\n1 2\n")
        out = weyl_difference_poly(G, 2)
        assert out == parse_polynomial("n=2\n2 1 1\n")

    def test_cube_gives_six_product(self):
        G = parse_polynomial("n=1\n1 3\n")
        out = weyl_difference_poly(G, 3)
        assert out == parse_polynomial("n=3\n6 1 1 1\n")

    def test_low_degree_annihilated(self):
        G = parse_polynomial("n=2\n3 1 0\n2 0 1\n9 0 0\n")   # degree 1
        assert weyl_difference_poly(G, 2).is_zero()
        assert weyl_difference(G, 2, [[1, 2], [3, -1]]) == 0

    def test_numeric_matches_symbolic(self):
        G = parse_polynomial("n=2\n1 2 1\n-2 0 3\n")         # degree 3
        sym = weyl_difference_poly(G, 3)
        args = [[1, -2], [0, 3], [2, 1]]
        flat = [x for a in args for x in a]
        assert weyl_difference(G, 3, args) == sym.evaluate(flat)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 4), st.data())
    def test_symmetry_in_arguments(self, d, data):
        G = parse_polynomial("n=2\n1 2 2\n1 4 0\n-3 1 3\n")  # degree 4
        args = [[data.draw(st.integers(-4, 4)) for _ in range(2)]
                for _ in range(d)]
        base = weyl_difference(G, d, args)
        perm = data.draw(st.permutations(list(range(d))))
        assert weyl_difference(G, d, [args[i] for i in perm]) == base

    def test_multilinearity_at_top_degree(self):
        G = parse_polynomial("n=2\n1 3 0\n2 1 2\n")          # cubic form
        u, v, w, w2 = [1, 2], [3, -1], [-2, 5], [4, 1]
        lhs = weyl_difference(G, 3, [u, v, [a + b for a, b in zip(w, w2)]])
        assert lhs == weyl_difference(G, 3, [u, v, w]) + \
            weyl_difference(G, 3, [u, v, w2])
