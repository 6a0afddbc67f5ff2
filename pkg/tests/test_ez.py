"""Tests for the Eilenberg-Zilber maps: sh, aw, shp, sigma, triples."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cycloez.carriers import AlgebraChainsCarrier, op_B, op_b
from cycloez.chains import (
    Chain,
    TensorChain,
    format_chain,
    koszul_swap,
    normalize_chain,
    normalize_tensor_chain,
    parse_chain,
    parse_tensor_chain,
)
from cycloez.ez import (
    alexander_whitney,
    chain_B,
    chain_b,
    cyclic_shuffle_map,
    cyclic_shuffle_product,
    enumerate_cyclic_shuffles,
    enumerate_shuffles,
    shuffle_map,
    shuffle_product,
    swap_algebra_factors,
    swap_sigma,
    tensor_B,
    tensor_b,
    triple_maps,
)


def gen(tags, n):
    alg = AlgebraChainsCarrier(tags)
    return alg.unwrap(alg.generic_element(n))


def rand_chain(tags, n, seed):
    alg = AlgebraChainsCarrier(tags)
    return alg.unwrap(alg.random_element(n, random.Random(seed)))


def perm_sign(positions):
    seen = [False] * len(positions)
    sign = 1
    for s in range(len(positions)):
        if seen[s]:
            continue
        length = 0
        j = s
        while not seen[j]:
            seen[j] = True
            j = positions[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


nc = normalize_chain
nt = normalize_tensor_chain


class TestShuffleEnumeration:
    def test_counts(self):
        for p in range(5):
            for q in range(5):
                assert len(enumerate_shuffles(p, q)) == math.comb(p + q, p)

    def test_empty_is_identity(self):
        (shf,) = enumerate_shuffles(0, 0)
        assert shf.takes == () and shf.sign == 1

    def test_one_one(self):
        first, second = enumerate_shuffles(1, 1)
        assert first.takes == (("a", 0), ("b", 0)) and first.sign == 1
        assert second.takes == (("b", 0), ("a", 0)) and second.sign == -1

    @given(st.integers(0, 4), st.integers(0, 4))
    def test_blocks_monotone_and_sign(self, p, q):
        for shf in enumerate_shuffles(p, q):
            a_slots = [s for s, src in enumerate(shf.takes) if src[0] == "a"]
            b_slots = [s for s, src in enumerate(shf.takes) if src[0] == "b"]
            assert [shf.takes[s][1] for s in a_slots] == list(range(p))
            assert [shf.takes[s][1] for s in b_slots] == list(range(q))
            assert shf.sign == perm_sign(tuple(a_slots) + tuple(b_slots))

    def test_deterministic(self):
        assert enumerate_shuffles(3, 2) == enumerate_shuffles(3, 2)


class TestCyclicShuffleEnumeration:
    def test_one_one(self):
        (shf,) = enumerate_cyclic_shuffles(1, 1)
        assert shf.takes == (("a", 0), ("b", 0))
        assert shf.sign == 1

    def test_block_restrictions_are_rotations(self):
        p, q = 3, 2
        for shf in enumerate_cyclic_shuffles(p, q):
            a_order = [src[1] for src in shf.takes if src[0] == "a"]
            b_order = [src[1] for src in shf.takes if src[0] == "b"]
            assert a_order == [(a_order[0] + i) % p for i in range(p)]
            assert b_order == [(b_order[0] + j) % q for j in range(q)]
            pos = {src: s for s, src in enumerate(shf.takes)}
            assert pos[("a", 0)] < pos[("b", 0)]

    def test_signs_match_permutation_signature(self):
        for p, q in [(1, 2), (2, 2), (3, 1)]:
            for shf in enumerate_cyclic_shuffles(p, q):
                pos = {src: s for s, src in enumerate(shf.takes)}
                positions = tuple(pos[("a", i)] for i in range(p)) \
                    + tuple(pos[("b", j)] for j in range(q))
                assert shf.sign == perm_sign(positions)

    def test_rejects_empty_block(self):
        with pytest.raises(ValueError):
            enumerate_cyclic_shuffles(0, 2)


class TestShuffleProduct:
    def test_degree_zero(self):
        out = shuffle_product(parse_chain("[a0]"), parse_chain("[b0]"))
        assert out == parse_chain("[a0.b0]", tags=("a", "b"))

    def test_one_one_example(self):
        out = shuffle_product(parse_chain("[a0, a1]"), parse_chain("[b0, b1]"))
        assert out == parse_chain("[a0.b0, a1, b1] - [a0.b0, b1, a1]",
                                  tags=("a", "b"))

    def test_term_counts(self):
        for p in range(4):
            for q in range(4 - p):
                out = shuffle_product(gen(("a",), p), gen(("b",), q))
                assert len(out.terms) == math.comb(p + q, p)

    def test_bilinear(self):
        x1, x2 = gen(("a",), 1), rand_chain(("a",), 1, 7)
        y = rand_chain(("b",), 2, 8)
        lhs = shuffle_product(x1 + 2 * x2, y)
        assert lhs == shuffle_product(x1, y) + 2 * shuffle_product(x2, y)

    def test_chain_map_for_b(self):
        for p in range(4):
            for q in range(4 - p):
                t = TensorChain.of_chains(gen(("a",), p), gen(("b",), q))
                assert chain_b(shuffle_map(t)) == shuffle_map(tensor_b(t))

    def test_associative(self):
        for degs in [(0, 0, 0), (1, 1, 0), (1, 1, 1), (2, 1, 1), (2, 2, 0)]:
            x, y, z = gen(("a",), degs[0]), gen(("b",), degs[1]), gen(("c",), degs[2])
            assert triple_maps("sh_left", x, y, z) == triple_maps("sh_right", x, y, z)

    def test_signature_overlap_rejected(self):
        with pytest.raises(ValueError):
            shuffle_product(parse_chain("[a0]"), parse_chain("[a1]", tags=("a",)))


class TestAlexanderWhitney:
    def test_degree_zero(self):
        out = alexander_whitney(parse_chain("[a0.b0]", tags=("a", "b")))
        assert out == parse_tensor_chain("[a0] @ [b0]", factors=(("a",), ("b",)))

    def test_degree_one_example(self):
        out = alexander_whitney(parse_chain("[a0.b0, a1.b1]", tags=("a", "b")))
        expected = parse_tensor_chain("[a1.a0] @ [b0, b1] + [a0, a1] @ [b0.b1]",
                                      factors=(("a",), ("b",)))
        assert out == expected

    def test_chain_map_for_b(self):
        for n in range(6):
            c = gen(("a", "b"), n)
            assert tensor_b(alexander_whitney(c)) == alexander_whitney(chain_b(c))

    def test_coassociative(self):
        for n in range(5):
            c = gen(("a", "b", "c"), n)
            assert triple_maps("aw_left", c) == triple_maps("aw_right", c)

    def test_aw_sh_is_identity_normalized(self):
        for p in range(6):
            for q in range(6 - p):
                t = nt(TensorChain.of_chains(gen(("a",), p), gen(("b",), q)))
                assert nt(alexander_whitney(shuffle_map(t))) == t


class TestCyclicShuffleProduct:
    def test_table_00(self):
        out = cyclic_shuffle_product(parse_chain("[a0]"), parse_chain("[b0]"))
        assert format_chain(out) == "[1, a0, b0]"

    def test_table_10(self):
        out = cyclic_shuffle_product(parse_chain("[a0, a1]"), parse_chain("[b0]"))
        expected = parse_chain("-[1, a0, a1, b0] + [1, a1, a0, b0] + [1, a0, b0, a1]",
                               tags=("a", "b"))
        assert out == expected
        assert format_chain(out) == \
            "[1, a0, b0, a1] - [1, a0, a1, b0] + [1, a1, a0, b0]"

    def test_table_01(self):
        out = cyclic_shuffle_product(parse_chain("[a0]"), parse_chain("[b0, b1]"))
        expected = parse_chain("[1, a0, b0, b1] - [1, a0, b1, b0] + [1, b1, a0, b0]",
                               tags=("a", "b"))
        assert out == expected

    def test_unit_coefficient_entry(self):
        out = cyclic_shuffle_product(gen(("a",), 2), gen(("b",), 1))
        arity = len(out.tags)
        assert all(mono[0] == ((),) * arity for mono in out.terms)

    def test_mixed_commutator_vanishes_normalized(self):
        # b shp - shp b + B sh - sh B = 0 on the normalized complexes
        for p in range(5):
            for q in range(5 - p):
                t = nt(TensorChain.of_chains(gen(("a",), p), gen(("b",), q)))
                lhs = (nc(chain_b(cyclic_shuffle_map(t)))
                       - nc(cyclic_shuffle_map(nt(tensor_b(t))))
                       + nc(chain_B(shuffle_map(t)))
                       - nc(shuffle_map(nt(tensor_B(t)))))
                assert lhs.is_zero(), (p, q)

    def test_connes_commutator_vanishes_normalized(self):
        for p in range(5):
            for q in range(5 - p):
                t = nt(TensorChain.of_chains(gen(("a",), p), gen(("b",), q)))
                lhs = (nc(chain_B(cyclic_shuffle_map(t)))
                       - nc(cyclic_shuffle_map(nt(tensor_B(t)))))
                assert lhs.is_zero(), (p, q)

    def test_aw_B_sh_is_B_normalized(self):
        for p in range(5):
            for q in range(5 - p):
                t = nt(TensorChain.of_chains(gen(("a",), p), gen(("b",), q)))
                lhs = nt(alexander_whitney(nc(chain_B(shuffle_map(t)))))
                assert lhs == nt(tensor_B(t)), (p, q)

    def test_aw_of_shp_on_scalars(self):
        out = nt(alexander_whitney(
            cyclic_shuffle_product(parse_chain("[a0]"), parse_chain("[b0]"))))
        assert out == parse_tensor_chain("[1, a0] @ [1, b0]",
                                         factors=(("a",), ("b",)))


class TestSwap:
    def test_koszul_sign(self):
        t = TensorChain.of_chains(gen(("a",), 1), gen(("b",), 1))
        swapped = swap_sigma(t)
        ((key, coeff),) = swapped.terms.items()
        assert coeff == -1
        assert swapped.factors == (("b",), ("a",))

    @given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 100))
    @settings(max_examples=25, deadline=None)
    def test_involution(self, p, q, seed):
        t = TensorChain.of_chains(rand_chain(("a",), p, seed),
                                  rand_chain(("b",), q, seed + 1))
        assert swap_sigma(swap_sigma(t)) == t

    def test_sigma_sh_sigma_is_sh(self):
        for p in range(6):
            for q in range(6 - p):
                t = TensorChain.of_chains(gen(("a",), p), gen(("b",), q))
                assert swap_algebra_factors(shuffle_map(koszul_swap(t)), 1) \
                    == shuffle_map(t)


class TestChainLevelBoundaries:
    def test_chain_b_squares_to_zero(self):
        for n in range(1, 6):
            c = rand_chain(("a", "b"), n, n)
            assert chain_b(chain_b(c)).is_zero()

    def test_matches_carrier_operators(self):
        alg = AlgebraChainsCarrier(("a",))
        rng = random.Random(3)
        for n in range(5):
            x = alg.random_element(n, rng)
            c = alg.unwrap(x)
            assert alg.unwrap(op_b(x)) == chain_b(c) or n == 0
            assert alg.unwrap(op_B(x)) == chain_B(c)

    def test_tensor_b_squares_to_zero(self):
        t = TensorChain.of_chains(gen(("a",), 2), gen(("b",), 2))
        assert tensor_b(tensor_b(t)).is_zero()

    def test_tensor_B_squares_to_zero_normalized(self):
        for p in range(3):
            for q in range(3 - p):
                t = nt(TensorChain.of_chains(gen(("a",), p), gen(("b",), q)))
                assert nt(tensor_B(nt(tensor_B(t)))).is_zero()
