"""The multiparametric R-matrix of the orthogonal series, its metric
companions, and the projector decomposition rhat = r P_S - r^-1 P_A
+ r^(1-N) P_0.

Small closed-form entries for dim 3 are pinned exactly; the structural
identities (Yang-Baxter, triangularity, metric conjugation, embedding
block decomposition) run through the suite drivers.
"""

from fractions import Fraction

import pytest

from qortho.itensor import (IndexGeometry, SparseTensor4, rank6_equal,
                            tensor_equal, triple_compose)
from qortho.rmatrix import (build_bundle, build_R, decompose_embedding,
                            inner_lift, specialized_rank, uniparametric_R,
                            verify_rmatrix_suite)
from qortho.scalars import ParamSpace, scalar_invert, specialize


def test_r3_entries_pinned():
    g = IndexGeometry(3)
    ps = g.params
    lam = ps.s_pow(2) - ps.s_pow(-2)
    expected = {
        (1, 1, 1, 1): ps.s_pow(2),
        (1, 2, 1, 2): ps.one,
        (1, 3, 1, 3): ps.s_pow(-2),
        (2, 1, 1, 2): lam,
        (2, 1, 2, 1): ps.one,
        (2, 2, 1, 3): -(ps.s_pow(-1) * lam),
        (2, 2, 2, 2): ps.one,
        (2, 3, 2, 3): ps.one,
        (3, 1, 1, 3): lam * (ps.one - ps.s_pow(-2)),
        (3, 1, 2, 2): -(ps.s_pow(-1) * lam),
        (3, 1, 3, 1): ps.s_pow(-2),
        (3, 2, 2, 3): lam,
        (3, 2, 3, 2): ps.one,
        (3, 3, 3, 3): ps.s_pow(2),
    }
    R = build_R(g)
    ok, witness = tensor_equal(R, SparseTensor4(g, expected))
    assert ok, witness


def test_multiparametric_entries_carry_g():
    g = IndexGeometry(4)
    ps = g.params
    R = build_R(g)
    q12 = ps.monomial(1, ps.mono(0, {(1, 2): 1}))
    assert R.get((1, 2, 1, 2)) == ps.r * scalar_invert(q12)
    assert R.get((2, 1, 2, 1)) == q12 * scalar_invert(ps.r)


def test_k_projects_on_metric_pairs():
    g = IndexGeometry(3)
    b = build_bundle(g)
    assert b.K.get((1, 3, 3, 1)) == g.params.one
    assert b.K.get((1, 3, 1, 2)) == g.params.zero


def test_suite_all_green_dim3():
    rep = verify_rmatrix_suite(IndexGeometry(3))
    assert rep.ok
    assert len(rep.checks) == 16
    names = [c.name for c in rep.checks]
    assert "yang-baxter: R12 R13 R23 = R23 R13 R12" in names
    assert "projector completeness: P_S + P_A + P_0 = I" in names
    assert "spectral form: Rhat = r P_S - r^{-1} P_A + r^{1-N} P_0" in names


def test_qybe_detects_perturbation():
    g = IndexGeometry(3)
    R = build_R(g)
    bad = dict(R.entries)
    bad[(1, 2, 1, 2)] = bad[(1, 2, 1, 2)] + g.params.one
    Rb = SparseTensor4(g, bad)
    lhs = triple_compose([(Rb, 12), (Rb, 13), (Rb, 23)])
    rhs = triple_compose([(Rb, 23), (Rb, 13), (Rb, 12)])
    ok, witness = rank6_equal(lhs, rhs)
    assert not ok and witness is not None


def test_uniparametric_specializes_to_identity_at_s1():
    g = IndexGeometry(3)
    U = uniparametric_R(g)
    vals = {k: specialize(v, {"s": Fraction(1)}) for k, v in U.entries.items()}
    nz = {k: v for k, v in vals.items() if v}
    assert nz == {(a, b, a, b): Fraction(1)
                  for a in g.indices() for b in g.indices()}


def test_projector_ranks():
    expected = {3: (3, 1, 5), 4: (6, 1, 9), 5: (10, 1, 14)}
    for M, (ra, r0, rs) in expected.items():
        g = IndexGeometry(M)
        b = build_bundle(g)
        assign = {"s": Fraction(3)}
        primes = iter([5, 7, 11, 13, 17, 19])
        for v in g.params.vars[1:]:
            assign[v] = Fraction(next(primes))
        assert specialized_rank(b.P_A, assign) == ra
        assert specialized_rank(b.P_0, assign) == r0
        assert specialized_rank(b.P_S, assign) == rs


def test_embedding_blocks_dim3():
    rep = decompose_embedding(3)
    assert rep.ok
    names = [c.name for c in rep.checks]
    assert "inner block equals the dimension-3 matrix" in names
    assert "apex cell carries f(r) = lambda (1 - r^{-2 rho})" in names


def test_inner_lift_variable_map():
    g = IndexGeometry(6, embedded=True)
    lift = inner_lift(g)
    small = ParamSpace(4)
    big = g.params
    assert lift(small.s_pow(3)) == big.s_pow(3)
    g12 = small.monomial(1, small.mono(0, {(1, 2): 1}))
    g23 = big.monomial(1, big.mono(0, {(2, 3): 1}))
    assert lift(g12) == g23


def test_inner_lift_requires_embedding():
    with pytest.raises(ValueError):
        inner_lift(IndexGeometry(6))
