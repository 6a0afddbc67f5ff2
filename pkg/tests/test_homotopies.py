"""Tests for the contraction homotopies: phi, (h, k), normalization."""

import random

import pytest

from cycloez.carriers import (
    AlgebraChainsCarrier,
    El,
    ModelCarrier,
    project,
)
from cycloez.chains import (
    Chain,
    TensorChain,
    format_chain,
    koszul_swap,
    normalize_chain,
    normalize_tensor_chain,
    parse_chain,
)
from cycloez.ez import (
    alexander_whitney,
    chain_B,
    chain_b,
    cyclic_shuffle_map,
    shuffle_map,
    swap_algebra_factors,
)
from cycloez.homotopies import (
    chain_normalization_contraction,
    degeneracy_homotopy,
    normalization_contraction,
    phi_homotopy,
    resolution_contraction,
    resolution_h,
    resolution_k,
    specialize_contraction,
)


def rand_raw(tags, n, rng, nterms=3, letters=3):
    """Raw chains with degenerate monomials allowed anywhere past slot 0."""
    terms = {}
    for _ in range(nterms):
        mono = []
        for pos in range(n + 1):
            size = rng.choice([0, 1, 1, 2]) if pos else rng.choice([1, 2])
            mono.append(tuple(
                tuple(rng.randrange(letters) for _ in range(size))
                for _ in tags))
        terms[tuple(mono)] = rng.choice([-2, -1, 1, 2])
    return Chain(n, tags, terms)


def gen(tags, n):
    alg = AlgebraChainsCarrier(tags)
    return alg.unwrap(alg.generic_element(n))


def rand_chain(tags, n, seed):
    alg = AlgebraChainsCarrier(tags)
    return alg.unwrap(alg.random_element(n, random.Random(seed)))


nc = normalize_chain
nt = normalize_tensor_chain


def sh_bar(t):
    return nc(shuffle_map(t))


def aw_bar(c):
    return nt(alexander_whitney(c))


class TestPhiHomotopy:
    def test_degree_zero_vanishes(self):
        assert phi_homotopy(parse_chain("[a0.b0]", tags=("a", "b"))).is_zero()

    def test_degree_one_example(self):
        out = phi_homotopy(parse_chain("[a0.b0, a1.b1]", tags=("a", "b")))
        assert format_chain(out) == "[a0.b0, b1, a1]"

    def test_term_count_on_generic_monomial(self):
        for n in range(1, 6):
            out = phi_homotopy(gen(("a", "b"), n))
            assert len(out.terms) == 2 * (2 ** n - 1) - n

    def test_homotopy_identity(self):
        # sh.aw = 1 + b phi + phi b on the normalized complex
        for n in range(6):
            x = nc(gen(("a", "b"), n))
            lhs = sh_bar(aw_bar(x))
            rhs = x + nc(chain_b(phi_homotopy(x))) \
                + phi_homotopy(nc(chain_b(x)))
            assert lhs == rhs, n

    def test_homotopy_identity_random(self):
        for n in range(1, 5):
            for seed in range(3):
                x = nc(rand_chain(("a", "b"), n, 50 * n + seed))
                lhs = sh_bar(aw_bar(x))
                rhs = x + nc(chain_b(phi_homotopy(x))) \
                    + phi_homotopy(nc(chain_b(x)))
                assert lhs == rhs, (n, seed)

    def test_special_phi_phi_vanishes(self):
        for n in range(6):
            assert phi_homotopy(phi_homotopy(nc(gen(("a", "b"), n)))).is_zero()

    def test_special_phi_after_sh_vanishes(self):
        for p in range(6):
            for q in range(6 - p):
                t = nt(TensorChain.of_chains(gen(("a",), p), gen(("b",), q)))
                assert phi_homotopy(sh_bar(t)).is_zero(), (p, q)

    def test_special_aw_after_phi_vanishes(self):
        for n in range(6):
            assert aw_bar(phi_homotopy(nc(gen(("a", "b"), n)))).is_zero()

    def test_phi_B_sh_matches_swapped_cyclic_shuffle(self):
        for p in range(5):
            for q in range(5 - p):
                t = nt(TensorChain.of_chains(gen(("a",), p), gen(("b",), q)))
                lhs = phi_homotopy(nc(chain_B(shuffle_map(t))))
                rhs = nc(swap_algebra_factors(
                    cyclic_shuffle_map(koszul_swap(t)), 1))
                assert lhs == rhs, (p, q)

    def test_bad_split_rejected(self):
        with pytest.raises(ValueError):
            phi_homotopy(gen(("a", "b"), 1), split=2)


class TestResolutionContraction:
    def test_h_vanishes_in_degree_zero(self):
        assert resolution_h(parse_chain("[a0.b0]", tags=("a", "b"))).is_zero()

    def test_k_is_identity_in_degree_zero(self):
        x = nc(rand_chain(("a", "b"), 0, 1))
        assert resolution_k(x) == x

    def test_k_vanishes_above_degree_two(self):
        for n in (3, 4):
            assert resolution_k(nc(gen(("a", "b"), n))).is_zero()

    def test_contraction_identity(self):
        # hb + bh = 1 - k on the normalized complex
        for n in range(1, 5):
            for seed in range(5):
                x = nc(rand_chain(("a", "b"), n, 100 * n + seed))
                h, k = resolution_contraction(x)
                lhs = nc(chain_b(h)) + resolution_h(nc(chain_b(x)))
                assert lhs == x - k, (n, seed)

    def test_defect_of_homotopy_identity_lies_in_kernels(self):
        # Z = (sh.aw - 1 - phi b)(x) satisfies k(Z) = 0, h(Z) = phi(x) and
        # b(h(Z)) = Z; the last two show phi is the contraction of Z.
        for n in range(1, 4):
            x = nc(gen(("a", "b"), n))
            z = sh_bar(aw_bar(x)) - x - phi_homotopy(nc(chain_b(x)))
            assert resolution_k(z).is_zero(), n
            assert resolution_h(z) == phi_homotopy(x), n
            assert nc(chain_b(resolution_h(z))) == z, n

    def test_wrong_signature_rejected(self):
        with pytest.raises(ValueError):
            resolution_h(gen(("a", "b", "c"), 1))
        with pytest.raises(ValueError):
            resolution_k(gen(("a",), 1))


class TestNormalizationContraction:
    def test_degeneracy_homotopy_table(self):
        alg = AlgebraChainsCarrier(("a",))
        x = alg.wrap(parse_chain("[a0, a1]"))
        out = alg.unwrap(degeneracy_homotopy(x))
        expected = parse_chain("-[a0, 1, a1] + [a0, a1, 1] - [a0.a1, 1, 1]")
        assert out == expected

    def test_projection_kills_homotopy_image(self):
        alg = AlgebraChainsCarrier(("a", "b"))
        rng = random.Random(9)
        for n in range(6):
            x = alg.random_element(n, rng)
            assert project(degeneracy_homotopy(x)).is_zero(), n

    def test_projection_kills_homotopy_image_on_model(self):
        model = ModelCarrier(2)
        rng = random.Random(11)
        for n in range(5):
            tokens = rng.sample(model.basis(n), 3)
            x = El(model, n, {tok: rng.choice([-2, -1, 1, 2])
                              for tok in tokens})
            assert project(degeneracy_homotopy(x)).is_zero(), n

    def test_projection_after_section_is_identity(self):
        alg = AlgebraChainsCarrier(("a",))
        data = normalization_contraction(alg)
        rng = random.Random(13)
        for n in range(5):
            x = project(alg.random_element(n, rng))
            assert data.g(data.f(x)) == x, n

    def test_section_after_projection_is_homotopic_to_identity(self):
        # f.g = 1 + b phi + phi b on arbitrary (unprojected) elements
        alg = AlgebraChainsCarrier(("a",))
        data = normalization_contraction(alg)
        rng = random.Random(17)
        for n in range(5):
            x = alg.random_element(n, rng)
            lhs = data.f(data.g(x))
            rhs = x + data.b_big(data.phi(x)) + data.phi(data.b_big(x))
            assert lhs == rhs, n

    def test_section_is_chain_map(self):
        alg = AlgebraChainsCarrier(("a",))
        data = normalization_contraction(alg)
        rng = random.Random(19)
        for n in range(1, 5):
            x = project(alg.random_element(n, rng))
            assert data.b_big(data.f(x)) == data.f(data.b_small(x)), n

    def test_not_marked_special(self):
        alg = AlgebraChainsCarrier(("a",))
        assert normalization_contraction(alg).special is False


class TestSpecializeContraction:
    def test_gauged_homotopy_is_special(self):
        # all three side conditions, on chains with degenerate monomials
        sp = specialize_contraction(chain_normalization_contraction())
        assert sp.special is True
        rng = random.Random(7)
        for tags in [("a",), ("a", "b")]:
            for n in range(5):
                for _ in range(3):
                    x = rand_raw(tags, n, rng)
                    assert nc(sp.phi(x)).is_zero(), (tags, n)
                    assert sp.phi(sp.phi(x)).is_zero(), (tags, n)
                    assert sp.phi(sp.f(nc(x))).is_zero(), (tags, n)

    def test_gauged_homotopy_keeps_the_contraction_identity(self):
        sp = specialize_contraction(chain_normalization_contraction())
        rng = random.Random(11)
        for n in range(5):
            x = rand_raw(("a",), n, rng)
            lhs = sp.f(sp.g(x))
            rhs = x + sp.b_big(sp.phi(x)) + sp.phi(sp.b_big(x))
            assert lhs == rhs, n

    def test_plain_telescope_is_not_special(self):
        # the gauge is not a no-op: the raw telescope squares to something
        data = chain_normalization_contraction()
        x = parse_chain("[a0, a1]")
        assert not data.phi(data.phi(x)).is_zero()

    def test_carrier_level_contraction_can_be_gauged_too(self):
        alg = AlgebraChainsCarrier(("a",))
        sp = specialize_contraction(normalization_contraction(alg))
        rng = random.Random(23)
        for n in range(4):
            x = alg.random_element(n, rng)
            assert project(sp.phi(x)).is_zero(), n
            assert sp.phi(sp.phi(x)).is_zero(), n
            lhs = sp.f(sp.g(x))
            rhs = x + sp.b_big(sp.phi(x)) + sp.phi(sp.b_big(x))
            assert lhs == rhs, n
