import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cycloez.carriers import (
    AlgebraChainsCarrier,
    CorruptedCarrier,
    El,
    ModelCarrier,
    ProductCarrier,
    averaging_report,
    el_cycle,
    el_degeneracy,
    el_face,
    karoubi_report,
    op_b,
    op_bprime,
    op_B,
    op_h,
    op_hprime,
    op_K,
    op_kappa,
    op_L,
    op_N,
    op_r,
    op_sigma,
    op_T,
    project,
    resolve_operator,
    verify_cyclic_relations,
)
from cycloez.chains import parse_chain

ALG = AlgebraChainsCarrier(("a",))


def wrap(text, tags=("a",)):
    return AlgebraChainsCarrier(tags).wrap(parse_chain(text, tags=tags))


def binom(n, k):
    from math import comb
    return comb(n, k)


def random_els(carrier, n, count=4, seed=11):
    rng = random.Random(seed)
    return [carrier.random_element(n, rng) for _ in range(count)]


class TestCarrierContracts:
    def test_algebra_chains_relations(self):
        rep = verify_cyclic_relations(ALG, 4, seed=3)
        assert rep["failures"] == []
        assert rep["checked"] > 100

    def test_model_relations(self):
        rep = verify_cyclic_relations(ModelCarrier(1), 5)
        assert rep["failures"] == []

    def test_product_relations(self):
        prod = ProductCarrier(ModelCarrier(1), ModelCarrier(0))
        rep = verify_cyclic_relations(prod, 3)
        assert rep["failures"] == []

    def test_corrupted_carrier_reports_failures(self):
        rep = verify_cyclic_relations(CorruptedCarrier(ALG), 3, seed=3)
        assert rep["failures"]

    def test_model_basis_counts(self):
        # degree-n dimension of the model on [m] is (n+1)*C(m+n+1, n+1)
        for m, n, expected in [(1, 1, 6), (2, 5, 168), (1, 5, 42),
                               (2, 4, 105), (3, 5, 504), (0, 5, 6)]:
            assert len(ModelCarrier(m).basis(n)) == expected
            assert expected == (n + 1) * binom(m + n + 1, n + 1)

    def test_model_normalized_counts(self):
        # the degenerate span is the union of single-token degeneracy
        # images; nondegenerate token counts die above degree m+1, not m
        expected = {1: [2, 4, 2, 0, 0], 2: [3, 9, 9, 3, 0],
                    3: [4, 16, 24, 16, 4]}
        for m, dims in expected.items():
            model = ModelCarrier(m)
            got = []
            for n in range(len(dims)):
                image = set()
                if n:
                    for w in model.basis(n - 1):
                        for j in range(n):
                            ((tok, c),) = model.degeneracy(n - 1, w, j).items()
                            assert c == 1
                            image.add(tok)
                flagged = {t for t in model.basis(n)
                           if model.token_degenerate(n, t)}
                assert flagged == image
                got.append(len(model.basis(n)) - len(flagged))
            assert got == dims

    def test_rotated_repeat_not_always_degenerate(self):
        # t . s_last lands outside every degeneracy image: this is the
        # extra degeneracy r, nonzero after normalization
        model = ModelCarrier(2)
        ((tok, c),) = model.cycle(
            2, next(iter(model.degeneracy(1, (0, (0, 1)), 1)))).items()
        assert c == 1 and tok == (1, (0, 1, 1))
        assert not model.token_degenerate(2, tok)
        assert model.token_degenerate(2, (0, (0, 1, 1)))

    def test_model_identity_token(self):
        model = ModelCarrier(3)
        assert model.identity_token() in model.basis(3)
        assert model.basis(3).count(model.identity_token()) == 1


class TestDerivedOperators:
    def test_b_squared_zero(self):
        for n in range(1, 6):
            for x in random_els(ALG, n):
                assert op_b(op_b(x)).is_zero()
                assert op_bprime(op_bprime(x)).is_zero()

    def test_bprime_contraction(self):
        # the extra degeneracy contracts b': b'r + rb' = 1
        for n in range(5):
            for x in random_els(ALG, n):
                lhs = op_bprime(op_r(x))
                if n >= 1:
                    lhs = lhs + op_r(op_bprime(x))
                assert lhs == x

    def test_B_degree0(self):
        x = wrap("[a0]")
        assert ALG.unwrap(project(op_B(x))) == parse_chain("[1, a0]")

    def test_B_squared_and_anticommute_normalized(self):
        for n in range(4):
            for x0 in random_els(ALG, n):
                x = project(x0)
                B2 = project(op_B(project(op_B(x))))
                assert B2.is_zero()
                bB = project(op_b(project(op_B(x))))
                if n >= 1:
                    bB = bB + project(op_B(project(op_b(x))))
                assert bB.is_zero()

    def test_TN_both_zero(self):
        for n in range(5):
            for x in random_els(ALG, n, count=2):
                assert op_T(op_N(x)).is_zero()
                assert op_N(op_T(x)).is_zero()

    def test_d0B_equals_2N(self):
        model = ModelCarrier(2)
        for n in range(4):
            for tok in model.basis(n):
                x = El.of(model, n, tok)
                assert el_face(op_B(x), 0) == 2 * op_N(x)

    def test_karoubi_defining_property(self):
        # the closed formula satisfies br + rb = 1 - kappa
        for n in range(5):
            for x in random_els(ALG, n):
                lhs = op_b(op_r(x)) + (El.zero(ALG, 0) if n == 0
                                       else op_r(op_b(x)))
                assert lhs == x - op_kappa(x)

    def test_kappa_degeneracy_relations(self):
        # kappa s_i = -s_{i+1} kappa (i < n) and kappa s_n = 0 after s_n,
        # matching the normalizability computation
        for n in range(4):
            for x in random_els(ALG, n, count=2):
                for i in range(n):
                    assert (op_kappa(el_degeneracy(x, i))
                            == -1 * el_degeneracy(op_kappa(x), i + 1))
                assert op_kappa(el_degeneracy(x, n)).is_zero()

    def test_r_degeneracy_relations(self):
        for n in range(4):
            for x in random_els(ALG, n, count=2):
                for i in range(n + 1):
                    assert (op_r(el_degeneracy(x, i))
                            == el_degeneracy(op_r(x), i + 1))
                assert op_r(op_r(x)) == el_degeneracy(op_r(x), 0)

    def test_averaging_identities(self):
        for cases in (averaging_report(ALG, 4, seed=2),
                      averaging_report(ModelCarrier(1), 4)):
            assert all(c["ok"] for c in cases)

    def test_resolve_operator(self):
        x = wrap("[a0, a1]")
        assert resolve_operator("d0")(x) == el_face(x, 0)
        assert resolve_operator("s1")(x) == el_degeneracy(x, 1)
        assert resolve_operator("t")(x) == el_cycle(x)
        with pytest.raises(KeyError):
            resolve_operator("nope")

    @given(st.integers(min_value=0, max_value=3),
           st.integers(min_value=0, max_value=10 ** 6))
    @settings(max_examples=25, deadline=None)
    def test_property_b_squared(self, n, seed):
        x = ALG.random_element(n + 1, random.Random(seed))
        assert op_b(op_b(x)).is_zero()

    @given(st.integers(min_value=0, max_value=4),
           st.integers(min_value=0, max_value=10 ** 6))
    @settings(max_examples=25, deadline=None)
    def test_property_hT_identity(self, n, seed):
        x = ALG.random_element(n, random.Random(seed))
        assert op_h(op_T(x)) == x - op_hprime(op_N(x))


class TestKaroubiSuite:
    def test_model_lambda2(self):
        cases = karoubi_report(ModelCarrier(2), 3)
        assert cases
        assert all(c["ok"] for c in cases)

    def test_algebra_chains(self):
        cases = karoubi_report(ALG, 4, seed=5)
        assert all(c["ok"] for c in cases)

    def test_corrupted_fails(self):
        cases = karoubi_report(CorruptedCarrier(ALG), 3, seed=5)
        assert any(not c["ok"] for c in cases)


class TestProductAndSigma:
    def test_sigma_involution_and_chain_maps(self):
        prod = ProductCarrier(ModelCarrier(1), ModelCarrier(1))
        for n in range(4):
            for tok in prod.basis(n)[:20]:
                x = El.of(prod, n, tok)
                assert op_sigma(op_sigma(x)) == x
                if n >= 1:
                    assert op_sigma(op_b(x)) == op_b(op_sigma(x))
                assert op_sigma(op_B(x)) == op_B(op_sigma(x))

    def test_sigma_needs_product(self):
        with pytest.raises(ValueError):
            op_sigma(wrap("[a0]"))

    def test_cross_representation_b(self):
        # diagonal product of algebra carriers vs the two-factor carrier
        A = AlgebraChainsCarrier(("a",))
        B = AlgebraChainsCarrier(("b",))
        AB = AlgebraChainsCarrier(("a", "b"))
        prod = ProductCarrier(A, B)
        rng = random.Random(9)
        for n in range(1, 4):
            xa = A.random_element(n, rng)
            xb = B.random_element(n, rng)
            pair = El(prod, n, {(u, v): cu * cv
                                for u, cu in xa.terms.items()
                                for v, cv in xb.terms.items()})
            merged = El(AB, n, {
                tuple((eu[0], ev[0]) for eu, ev in zip(u, v)): c
                for (u, v), c in pair.terms.items()})
            got = op_b(pair)
            want = op_b(merged)
            regot = El(AB, n - 1, {
                tuple((eu[0], ev[0]) for eu, ev in zip(u, v)): c
                for (u, v), c in got.terms.items()})
            assert regot == want

    def test_pair_degeneracy_is_joint(self):
        model = ModelCarrier(1)
        prod = ProductCarrier(model, model)
        # s_j twice diagonally is degenerate; mixed degeneracies need not be
        base = El.of(prod, 1, ((0, (0, 1)), (0, (0, 1))))
        dg = el_degeneracy(base, 0)
        tok = next(iter(dg.terms))
        assert prod.token_degenerate(2, tok)
        mixed = ((0, (0, 0, 1)), (1, (0, 1, 1)))
        assert any(model.token_degenerate(2, u) for u in mixed)
        assert not prod.token_degenerate(2, mixed)
