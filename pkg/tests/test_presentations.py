"""Free-algebra presentations: the deformed coordinate algebras, their
rewrite systems and normal-form counts, Hopf costructure, the cone
projection onto the inhomogeneous algebra, and ideal membership.

Normal form puts u, v first, then plane coordinates in ascending order,
then rotation letters; the inner rotation sector is deliberately kept
out of the combined system.
"""

from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from qortho.presentations import (AlgebraElement, TensorElement,
                                  build_presentation, check_confluence,
                                  check_hopf_ideal, costructure,
                                  derive_rewrite_rules, element_from_json,
                                  element_to_json, expand_certificate,
                                  hilbert_dimension, ideal_membership,
                                  iso_normal_system, merge_rewrite_systems,
                                  project, quantum_determinant, reduce,
                                  section, tensor_costructure, unit_element,
                                  word_element, word_key, zero_element)
from qortho.scalars import specialize
from fractions import Fraction

P3 = build_presentation("iso", 3)
RS3 = iso_normal_system(P3)
A3, PS3 = P3.alphabet, P3.params


def wel(names, coeff=None):
    return word_element(A3, PS3, A3.word(*names), coeff)


def test_iso_alphabet_and_sectors():
    assert A3.symbols == ["u", "v", "x1", "x2", "x3",
                          "T[1,1]", "T[1,2]", "T[1,3]",
                          "T[2,1]", "T[2,2]", "T[2,3]",
                          "T[3,1]", "T[3,2]", "T[3,3]"]
    assert sorted(P3.sectors) == ["dilatation", "inner", "iso-mixed", "plane"]
    assert A3.show_word(()) == "I"
    assert A3.show_word(A3.word("x1", "u")) == "x1 u"
    assert word_key(A3.word("x3")) < word_key(A3.word("u", "u"))


def test_pinned_rewrite_rules():
    g12 = PS3.monomial(1, PS3.mono(0, {(1, 2): 1}))
    expected = {
        ("u", "v"): unit_element(A3, PS3),
        ("x2", "x1"): wel(["x1", "x2"], PS3.s_pow(-2)),
        ("x3", "x2"): wel(["x2", "x3"], PS3.s_pow(-2)),
        ("x3", "x1"): wel(["x1", "x3"]) +
            wel(["x2", "x2"], PS3.s_pow(1) - PS3.s_pow(-1)),
        ("x1", "v"): wel(["v", "x1"], g12),
        ("T[3,2]", "x1"): wel(["x1", "T[3,2]"], PS3.s_pow(-2)),
    }
    for names, rhs in expected.items():
        assert RS3.rules[A3.word(*names)] == rhs, names
    assert not RS3.partial


def test_reduce_is_idempotent_on_rules():
    for lw, rhs in RS3.rules.items():
        lhs = AlgebraElement(A3, PS3, {lw: PS3.one})
        assert reduce(lhs, RS3) == reduce(rhs, RS3)


def test_confluence_of_combined_system():
    rep = check_confluence(RS3, P3)
    assert rep.ok
    names = [c.name for c in rep.checks]
    assert "all degree-3 overlaps rejoin" in names
    assert "all leading words have degree 2" in names


def test_sector_errors():
    with pytest.raises(ValueError):
        derive_rewrite_rules(P3, "no-such-sector")
    with pytest.raises(ValueError):
        derive_rewrite_rules(P3, "so-swap")


def test_plane_dimensions_match_commutative_counts():
    for N in (3, 4):
        p = build_presentation("iso", N)
        rs = iso_normal_system(p)
        xs = ["x%d" % k for k in range(1, N + 1)]
        got = [hilbert_dimension(p, rs, d, letters=xs) for d in range(5)]
        assert got == [comb(N + d - 1, d) for d in range(5)]


def test_exterior_dimensions_are_binomial():
    for N in (3, 4):
        ext = build_presentation("exterior", N)
        ers = derive_rewrite_rules(ext, "exterior")
        got = [hilbert_dimension(ext, ers, d) for d in range(N + 3)]
        assert got == [comb(N, d) for d in range(N + 1)] + [0, 0]
        assert got[N] == 1


def test_so_swap_sector_is_partial():
    so = build_presentation("so", 3)
    sw = derive_rewrite_rules(so, "so-swap")
    assert sw.partial


def test_quantum_determinant_terms():
    qd = quantum_determinant(3)
    B = qd.alphabet
    ps = qd.ps
    s = ps.s_pow(1)
    expected = {
        ("T[1,1]", "T[2,2]", "T[3,3]"): ps.one,
        ("T[1,1]", "T[2,3]", "T[3,2]"): -ps.r,
        ("T[1,2]", "T[2,1]", "T[3,3]"): -ps.r,
        ("T[1,2]", "T[2,2]", "T[3,2]"): s - s * ps.r,
        ("T[1,2]", "T[2,3]", "T[3,1]"): ps.r,
        ("T[1,3]", "T[2,1]", "T[3,2]"): ps.r,
        ("T[1,3]", "T[2,2]", "T[3,1]"): -(ps.r * ps.r),
    }
    assert qd.terms == {B.word(*names): c for names, c in expected.items()}


def test_quantum_determinant_classical_limit():
    qd = quantum_determinant(3)
    B = qd.alphabet
    signs = {}
    for w, c in qd.terms.items():
        val = specialize(c, {"s": Fraction(1)})
        if val:
            signs[tuple(B.symbols[i] for i in w)] = val
    # six permutations with their signs, the seventh term vanishes at s=1
    assert signs == {
        ("T[1,1]", "T[2,2]", "T[3,3]"): 1,
        ("T[1,1]", "T[2,3]", "T[3,2]"): -1,
        ("T[1,2]", "T[2,1]", "T[3,3]"): -1,
        ("T[1,2]", "T[2,3]", "T[3,1]"): 1,
        ("T[1,3]", "T[2,1]", "T[3,2]"): 1,
        ("T[1,3]", "T[2,2]", "T[3,1]"): -1,
    }


def test_coproduct_of_translation():
    cop = costructure("coproduct", wel(["x1"]), P3)
    assert isinstance(cop, TensorElement)
    expected = {
        (A3.word("x1"), A3.word("v")): PS3.one,
        (A3.word("T[1,1]"), A3.word("x1")): PS3.one,
        (A3.word("T[1,2]"), A3.word("x2")): PS3.one,
        (A3.word("T[1,3]"), A3.word("x3")): PS3.one,
    }
    assert cop.terms == expected


def test_counit_values():
    assert costructure("counit", wel(["u"]), P3) == unit_element(A3, PS3)
    assert costructure("counit", wel(["x2"]), P3) == zero_element(A3, PS3)
    assert costructure("counit", wel(["T[1,2]"]), P3) == zero_element(A3, PS3)
    assert costructure("counit", wel(["T[2,2]"]), P3) == unit_element(A3, PS3)


def test_coassociativity_and_counit_law():
    for name in ("u", "x2", "T[1,3]"):
        cop = costructure("coproduct", wel([name]), P3)
        left = tensor_costructure(cop, 0, "coproduct", P3)
        right = tensor_costructure(cop, 1, "coproduct", P3)
        assert left.terms == right.terms
        lcu = tensor_costructure(cop, 0, "counit", P3)
        rcu = tensor_costructure(cop, 1, "counit", P3)
        assert lcu.terms == {(A3.word(name),): PS3.one}
        assert rcu.terms == {(A3.word(name),): PS3.one}


def test_antipode_law_on_coordinate_letters():
    for name in ("u", "v", "x1", "x2", "x3"):
        a = wel([name])
        cop = costructure("coproduct", a, P3)
        acc = zero_element(A3, PS3)
        for (w1, w2), c in cop.terms.items():
            ka = costructure("antipode", word_element(A3, PS3, w1), P3)
            acc = acc + (ka * word_element(A3, PS3, w2)).scale(c)
        assert reduce(acc, RS3) == reduce(costructure("counit", a, P3), RS3)


def test_hopf_ideal_report():
    rep = check_hopf_ideal(3)
    assert rep.ok and len(rep.checks) == 22
    names = [c.name for c in rep.checks]
    assert names[0] == "H has 2N+1 generators"
    assert "coproduct of T[1,∘] splits through H" in names
    assert "counit kills T[1,∘]" in names
    assert "antipode keeps T[1,∘] inside H" in names


BIG5 = build_presentation("so", 5, embedded=True)
B5 = BIG5.alphabet


def big_letter(name):
    return word_element(B5, BIG5.params, B5.word(name))


def test_projection_of_cone_rows():
    assert reduce(project(big_letter("T[∘,2]"), P3), RS3) == \
        reduce(P3.derived["y2"], RS3)
    assert reduce(project(big_letter("T[∘,•]"), P3), RS3) == \
        reduce(P3.derived["z"], RS3)
    assert project(big_letter("T[1,∘]"), P3) == zero_element(A3, PS3)
    assert project(big_letter("T[∘,∘]"), P3) == wel(["u"])
    assert project(big_letter("T[1,2]"), P3) == wel(["T[1,2]"])


def test_section_splits_projection():
    for name in A3.symbols:
        e = wel([name])
        assert reduce(project(section(e, P3), P3), RS3) == reduce(e, RS3)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.sampled_from(B5.symbols), min_size=0, max_size=2),
       st.lists(st.sampled_from(B5.symbols), min_size=0, max_size=2))
def test_projection_is_multiplicative(n1, n2):
    e1 = word_element(B5, BIG5.params, B5.word(*n1))
    e2 = word_element(B5, BIG5.params, B5.word(*n2))
    joint = reduce(project(e1 * e2, P3), RS3)
    split = reduce(project(e1, P3) * project(e2, P3), RS3)
    assert joint == split


def test_membership_with_certificate():
    rel = wel(["x2", "x1"]) + wel(["x1", "x2"], -PS3.s_pow(-2))
    res = ideal_membership(rel, P3, bound=2)
    assert res.member and res.certificate
    assert expand_certificate(res.certificate, P3) == rel
    miss = ideal_membership(wel(["x1"]), P3, bound=2)
    assert not miss.member and miss.certificate is None


def test_element_json_round_trip():
    e = wel(["x1", "u"], PS3.s_pow(2)) + wel(["v"], -PS3.one)
    payload = element_to_json(e)
    words = [rec["word"] for rec in payload]
    assert words == sorted(words, key=lambda w: (len(w), [A3.index[n] for n in w]))
    assert element_from_json(A3, PS3, payload) == e
