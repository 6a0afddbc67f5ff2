"""Eilenberg-Zilber maps between a product complex and a tensor complex.

The chain-level players: the shuffle product sh (tensor to product, degree
0), the Alexander-Whitney map aw (product to tensor, degree 0) and the
cyclic shuffle product shp (tensor to product, degree +2) whose output
always carries a unit coefficient entry.  Shuffle enumerations are
memoized; everything is exact and side-effect free.
"""

from __future__ import annotations

import itertools
import operator
from functools import lru_cache
from typing import NamedTuple

from .chains import (
    Chain,
    TensorChain,
    entry_mul,
    koszul_swap,
    mono_cycle,
    mono_degeneracy,
    mono_face,
    unit_entry,
)


class SignedShuffle(NamedTuple):
    """(p,q)-shuffle: ``takes[slot]`` is ("a", i) or ("b", j), block order
    preserved; ``sign`` is the permutation signature."""

    takes: tuple
    sign: int


class SignedCyclicShuffle(NamedTuple):
    """Interleaving of independently rotated blocks, the original first
    a-element kept before the original first b-element."""

    rot_a: int
    rot_b: int
    takes: tuple
    sign: int


def _inversion_sign(positions):
    inv = 0
    for u in range(len(positions)):
        for v in range(u + 1, len(positions)):
            if positions[u] > positions[v]:
                inv += 1
    return -1 if inv % 2 else 1


@lru_cache(maxsize=None)
def enumerate_shuffles(p, q):
    """All (p,q)-shuffles with signs, C(p+q, p) of them, in a stable order."""
    if p < 0 or q < 0:
        raise ValueError("block sizes must be nonnegative")
    out = []
    for a_pos in itertools.combinations(range(p + q), p):
        a_set = set(a_pos)
        b_pos = [s for s in range(p + q) if s not in a_set]
        takes = [None] * (p + q)
        for i, s in enumerate(a_pos):
            takes[s] = ("a", i)
        for j, s in enumerate(b_pos):
            takes[s] = ("b", j)
        sign = _inversion_sign(tuple(a_pos) + tuple(b_pos))
        out.append(SignedShuffle(tuple(takes), sign))
    return tuple(out)


@lru_cache(maxsize=None)
def shuffle_body_getters(p, q):
    """Per (p,q)-shuffle: a tuple getter over the merged letter list (a block
    in slots 0..p-1, b block in slots p..p+q-1) and the shuffle sign."""
    table = []
    for shf in enumerate_shuffles(p, q):
        idx = tuple(i if blk == "a" else p + i for blk, i in shf.takes)
        if len(idx) == 1:
            getter = (lambda merged, _i=idx[0]: (merged[_i],))
        else:
            getter = operator.itemgetter(*idx)
        table.append((getter, shf.sign))
    return tuple(table)


@lru_cache(maxsize=None)
def enumerate_cyclic_shuffles(p, q):
    """All cyclic shuffles of blocks of lengths p, q >= 1: rotate each block
    cyclically, interleave preserving both rotated orders, and keep only the
    words in which element a_0 still precedes element b_0."""
    if p < 1 or q < 1:
        raise ValueError("cyclic shuffle blocks must be nonempty")
    out = []
    for rot_a in range(p):
        order_a = [(rot_a + i) % p for i in range(p)]
        for rot_b in range(q):
            order_b = [(rot_b + j) % q for j in range(q)]
            for a_pos in itertools.combinations(range(p + q), p):
                a_set = set(a_pos)
                b_pos = [s for s in range(p + q) if s not in a_set]
                takes = [None] * (p + q)
                slot_of = {}
                for i, s in enumerate(a_pos):
                    takes[s] = ("a", order_a[i])
                    slot_of[("a", order_a[i])] = s
                for j, s in enumerate(b_pos):
                    takes[s] = ("b", order_b[j])
                    slot_of[("b", order_b[j])] = s
                if slot_of[("a", 0)] > slot_of[("b", 0)]:
                    continue
                positions = tuple(slot_of[("a", i)] for i in range(p)) \
                    + tuple(slot_of[("b", j)] for j in range(q))
                out.append(SignedCyclicShuffle(
                    rot_a, rot_b, tuple(takes), _inversion_sign(positions)))
    return tuple(out)


# ---------------------------------------------------------------------------
# The three maps, monomial kernels first.
# ---------------------------------------------------------------------------


def _embed(entry, before, after):
    return ((),) * before + entry + ((),) * after


def _shuffle_mono(mx, my, ar_a, ar_b):
    """sh on a monomial pair: coefficient entry a0 (x) b0, form entries
    interleaved with shuffle signs."""
    p, q = len(mx) - 1, len(my) - 1
    letters = {("a", i): _embed(mx[i + 1], 0, ar_b) for i in range(p)}
    letters.update({("b", j): _embed(my[j + 1], ar_a, 0) for j in range(q)})
    head = mx[0] + my[0]
    out = {}
    for shf in enumerate_shuffles(p, q):
        mono = (head,) + tuple(letters[src] for src in shf.takes)
        out[mono] = out.get(mono, 0) + shf.sign
    return out


def _cyclic_shuffle_mono(mx, my, ar_a, ar_b):
    """shp on a monomial pair: every entry becomes a form letter, the
    coefficient slot is the unit, overall sign (-1)^p."""
    p, q = len(mx) - 1, len(my) - 1
    letters = {("a", i): _embed(mx[i], 0, ar_b) for i in range(p + 1)}
    letters.update({("b", j): _embed(my[j], ar_a, 0) for j in range(q + 1)})
    head = unit_entry(ar_a + ar_b)
    outer = -1 if p % 2 else 1
    out = {}
    for shf in enumerate_cyclic_shuffles(p + 1, q + 1):
        mono = (head,) + tuple(letters[src] for src in shf.takes)
        s = out.get(mono, 0) + outer * shf.sign
        if s == 0:
            out.pop(mono, None)
        else:
            out[mono] = s
    return out


def _joint_tags(fa, fb):
    tags = tuple(fa) + tuple(fb)
    if len(set(tags)) != len(tags):
        raise ValueError("factor signatures overlap")
    return tags


def _accumulate(terms, mono, coeff):
    s = terms.get(mono, 0) + coeff
    if s == 0:
        terms.pop(mono, None)
    else:
        terms[mono] = s


def shuffle_map(t):
    """Linear extension of sh to an arity-2 tensor chain."""
    fa, fb = t.factors
    tags = _joint_tags(fa, fb)
    terms = {}
    for (mx, my), coeff in t.terms.items():
        for mono, sgn in _shuffle_mono(mx, my, len(fa), len(fb)).items():
            _accumulate(terms, mono, sgn * coeff)
    return Chain._raw(t.degree, tags, terms)


def shuffle_product(x, y):
    """sh(x_p (x) y_q): the signed sum of all interleavings, C(p+q, p)
    monomials for a monomial pair."""
    return shuffle_map(TensorChain.of_chains(x, y))


def cyclic_shuffle_map(t):
    """Linear extension of shp to an arity-2 tensor chain (degree +2)."""
    fa, fb = t.factors
    tags = _joint_tags(fa, fb)
    terms = {}
    for (mx, my), coeff in t.terms.items():
        for mono, sgn in _cyclic_shuffle_mono(mx, my, len(fa), len(fb)).items():
            _accumulate(terms, mono, sgn * coeff)
    return Chain._raw(t.degree + 2, tags, terms)


def cyclic_shuffle_product(x, y):
    """shp(x_p (x) y_q), degree p+q+2, unit coefficient entry."""
    return cyclic_shuffle_map(TensorChain.of_chains(x, y))


def alexander_whitney(c, split=1):
    """aw(m0 dm1 ... dmn): front factor takes iterated wrap faces, back
    factor takes iterated 0-faces; no internal signs.  ``split`` is the
    number of leading algebra factors routed to the front tensor slot."""
    if not 0 < split < len(c.tags):
        raise ValueError("split must cut the signature in two")
    fa, fb = c.tags[:split], c.tags[split:]
    terms = {}
    for mono, coeff in c.terms.items():
        n = len(mono) - 1
        a_col = [e[:split] for e in mono]
        b_col = [e[split:] for e in mono]
        for k in range(n + 1):
            # iterated wrap faces accumulate a_{k+1} ... a_n left of a_0
            head_a = a_col[0]
            for e in reversed(a_col[k + 1:]):
                head_a = entry_mul(e, head_a)
            head_b = b_col[0]
            for e in b_col[1:k + 1]:
                head_b = entry_mul(head_b, e)
            key = ((head_a,) + tuple(a_col[1:k + 1]),
                   (head_b,) + tuple(b_col[k + 1:]))
            s = terms.get(key, 0) + coeff
            if s == 0:
                terms.pop(key, None)
            else:
                terms[key] = s
    return TensorChain._raw(c.degree, (fa, fb), terms)


def swap_sigma(x):
    """Koszul swap on tensor chains; plain factor swap on product-carrier
    elements (sign handled by the caller's docking convention there)."""
    if isinstance(x, TensorChain):
        return koszul_swap(x)
    from .carriers import El, op_sigma
    if isinstance(x, El):
        return op_sigma(x)
    raise TypeError("swap_sigma expects a TensorChain or a carrier element")


def swap_algebra_factors(c, split):
    """Entrywise swap of the two algebra blocks of a product signature; an
    algebra isomorphism, hence sign free."""
    if not 0 < split < len(c.tags):
        raise ValueError("split must cut the signature in two")
    tags = c.tags[split:] + c.tags[:split]
    terms = {}
    for mono, coeff in c.terms.items():
        key = tuple(e[split:] + e[:split] for e in mono)
        terms[key] = terms.get(key, 0) + coeff
    return Chain._raw(c.degree, tags, terms, c.normalized)


def triple_aw(c, mode, cuts=(1, 2)):
    """Iterated aw on a three-block signature: outer-then-inner front cut
    (aw_left) or back cut (aw_right)."""
    i, j = cuts
    factors = (c.tags[:i], c.tags[i:j], c.tags[j:])
    terms = {}
    if mode == "aw_left":
        outer = alexander_whitney(c, split=j)
        for (mab, mc), coeff in outer.terms.items():
            inner = alexander_whitney(
                Chain(len(mab) - 1, c.tags[:j], {mab: 1}), split=i)
            for (ma, mb), c2 in inner.terms.items():
                _accumulate(terms, (ma, mb, mc), coeff * c2)
    elif mode == "aw_right":
        outer = alexander_whitney(c, split=i)
        for (ma, mbc), coeff in outer.terms.items():
            inner = alexander_whitney(
                Chain(len(mbc) - 1, c.tags[i:], {mbc: 1}), split=j - i)
            for (mb, mc), c2 in inner.terms.items():
                _accumulate(terms, (ma, mb, mc), coeff * c2)
    else:
        raise ValueError(f"unknown aw mode {mode!r}")
    return TensorChain._raw(c.degree, factors, terms)


def triple_maps(mode, *inputs):
    """Associativity composites: sh(sh x 1), sh(1 x sh) on three chains;
    (aw x 1)aw, (1 x aw)aw on one product chain."""
    if mode == "sh_left":
        x, y, z = inputs
        return shuffle_product(shuffle_product(x, y), z)
    if mode == "sh_right":
        x, y, z = inputs
        return shuffle_product(x, shuffle_product(y, z))
    if mode in ("aw_left", "aw_right"):
        (c,) = inputs
        return triple_aw(c, mode)
    raise ValueError(f"unknown triple mode {mode!r}")


# ---------------------------------------------------------------------------
# Chain-level differentials (the carrier-free view used by the map tests).
# ---------------------------------------------------------------------------


def chain_b(c):
    """Hochschild boundary: alternating sum of all faces."""
    terms = {}
    if c.degree > 0:
        for mono, coeff in c.terms.items():
            for i in range(len(mono)):
                _accumulate(terms, mono_face(mono, i),
                            -coeff if i % 2 else coeff)
    return Chain._raw(c.degree - 1, c.tags, terms)


def _mono_B_terms(mono):
    # T r N on one monomial; T at degree n+1 is 1 - (-1)^{n+1} t, so the
    # rotated copy of each summand gets (-1)^n
    n = len(mono) - 1
    t_coeff = -1 if n % 2 else 1
    out = {}
    cur, sgn = mono, 1
    for _ in range(n + 1):
        rm = mono_cycle(mono_degeneracy(cur, n))
        _accumulate(out, rm, sgn)
        _accumulate(out, mono_cycle(rm), t_coeff * sgn)
        cur = mono_cycle(cur)
        if n % 2:
            sgn = -sgn
    return out


def chain_B(c):
    """Connes boundary T r N (cyclic symmetrization, extra degeneracy,
    then the degree-(n+1) averaging difference)."""
    terms = {}
    for mono, coeff in c.terms.items():
        for rm, sgn in _mono_B_terms(mono).items():
            _accumulate(terms, rm, sgn * coeff)
    return Chain._raw(c.degree + 1, c.tags, terms)


def tensor_b(t):
    """Total Hochschild boundary b x 1 + (-1)^p 1 x b."""
    terms = {}
    for (mx, my), coeff in t.terms.items():
        p, q = len(mx) - 1, len(my) - 1
        for i in range(p + 1 if p else 0):
            _accumulate(terms, (mono_face(mx, i), my),
                        -coeff if i % 2 else coeff)
        s = -coeff if p % 2 else coeff
        for i in range(q + 1 if q else 0):
            _accumulate(terms, (mx, mono_face(my, i)), -s if i % 2 else s)
    return TensorChain._raw(t.degree - 1, t.factors, terms)


def tensor_B(t):
    """Total Connes boundary B x 1 + (-1)^p 1 x B."""
    terms = {}
    for (mx, my), coeff in t.terms.items():
        p = len(mx) - 1
        for rm, sgn in _mono_B_terms(mx).items():
            _accumulate(terms, (rm, my), sgn * coeff)
        s = -coeff if p % 2 else coeff
        for rm, sgn in _mono_B_terms(my).items():
            _accumulate(terms, (mx, rm), sgn * s)
    return TensorChain._raw(t.degree + 1, t.factors, terms)
