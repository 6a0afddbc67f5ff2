"""Explicit contraction homotopies.

Three constructions on exact chains: the special homotopy phi measuring
sh.aw - 1 on a two-factor signature, the letter-splitting contraction
(h, k) available over free algebras, and the normalization contraction
(section, projection, degeneracy homotopy) on any carrier.  All chain
outputs are normalized; the lemma-level identities live on the normalized
complexes.
"""

from __future__ import annotations

from .carriers import El, el_degeneracy, el_face, op_B, op_b, project
from .chains import (Chain, entry_mul, mono_degeneracy, mono_face,
                     mono_is_degenerate, normalize_chain, unit_entry)
from .ez import (_accumulate, chain_B, chain_b, enumerate_shuffles,
                 shuffle_body_getters)


class ContractionData:
    """Section f, projection g with g.f = 1 and f.g = 1 + b phi + phi b.

    The boundary and cyclic-boundary evaluators of both sides travel with
    the data so the perturbation engine stays generic.  ``special`` means
    phi.f = 0, g.phi = 0 and phi.phi = 0.
    """

    __slots__ = ("f", "g", "phi", "b_small", "b_big", "B_small", "B_big",
                 "special")

    def __init__(self, f, g, phi, b_small, b_big, B_small, B_big,
                 special=False):
        self.f = f
        self.g = g
        self.phi = phi
        self.b_small = b_small
        self.b_big = b_big
        self.B_small = B_small
        self.B_big = B_big
        self.special = special


# ---------------------------------------------------------------------------
# The special homotopy for sh.aw on a two-factor signature.
# ---------------------------------------------------------------------------


def phi_homotopy(c, split=1):
    """Homotopy of degree +1 with sh.aw = 1 + b phi + phi b (normalized).

    Acts on the last r entries of each monomial for every window size r:
    the a-parts beyond p multiply the coefficient, the first p b-parts
    collapse into one new form entry, and the remaining letters are
    shuffled; signs are (-1)^(n+r) times the shuffle signature.

    Degenerate inputs land entirely in the degenerate span, and a window
    with a unit shuffle letter or a unit collapsed entry produces only
    degenerate monomials, so all three are skipped up front instead of
    being filtered after accumulation.
    """
    if not 0 < split < len(c.tags):
        raise ValueError("split must cut the signature in two")
    arity = len(c.tags)
    pad_a, pad_b = unit_entry(arity - split), unit_entry(split)
    terms = {}
    for mono, coeff in c.terms.items():
        if mono_is_degenerate(mono):
            continue
        n = len(mono) - 1
        for r in range(1, n + 1):
            base_sign = -1 if (n + r) % 2 else 1
            omega = mono[:n - r + 1]
            tail = mono[n - r + 1:]
            a_col = [e[:split] for e in tail]
            b_col = [e[split:] for e in tail]
            a_run = 0
            while a_run < r and any(a_col[a_run]):
                a_run += 1
            b_run = 0
            while b_run < r and any(b_col[r - 1 - b_run]):
                b_run += 1
            mid = omega[1:]
            for p in range(max(1, r - b_run), a_run + 1):
                if not any(any(e) for e in b_col[:p]):
                    continue
                head = unit_entry(split)
                for e in a_col[p:]:
                    head = entry_mul(head, e)
                new0 = entry_mul(head + pad_a, omega[0])
                db_prod = unit_entry(arity - split)
                for e in b_col[:p]:
                    db_prod = entry_mul(db_prod, e)
                prefix = (new0,) + mid + (pad_b + db_prod,)
                merged = [a_col[i] + pad_a for i in range(p)] \
                    + [pad_b + b_col[j] for j in range(p, r)]
                outer = base_sign * coeff
                for getter, sgn in shuffle_body_getters(p, r - p):
                    key = prefix + getter(merged)
                    s = terms.get(key, 0) + sgn * outer
                    if s:
                        terms[key] = s
                    else:
                        del terms[key]
    return Chain._raw(c.degree + 1, c.tags, terms, normalized=True)


# ---------------------------------------------------------------------------
# The free-algebra resolution contraction (h, k):  hb + bh = 1 - k.
# ---------------------------------------------------------------------------


def _check_pair_signature(c):
    if len(c.tags) != 2:
        raise ValueError(
            "resolution contraction needs a two-factor free algebra")


def resolution_k(c):
    """Defect map k: identity in degree 0, letter-splitting sums in degrees
    1 and 2, zero above."""
    _check_pair_signature(c)
    n = c.degree
    if n == 0:
        return normalize_chain(c)
    if n >= 3:
        return Chain.zero(n, c.tags, normalized=True)
    terms = {}
    for mono, coeff in c.terms.items():
        c0 = mono[0]
        if n == 1:
            v, w = mono[1]
            for k in range(1, len(w) + 1):
                m0 = entry_mul(entry_mul((v, w[k:]), c0), ((), w[:k - 1]))
                _accumulate(terms, (m0, ((), (w[k - 1],))), coeff)
            for j in range(1, len(v) + 1):
                m0 = entry_mul(entry_mul((v[j:], ()), c0), (v[:j - 1], w))
                _accumulate(terms, (m0, ((v[j - 1],), ())), coeff)
        else:
            v, bw = mono[1]
            aw, w = mono[2]
            for k in range(1, len(w) + 1):
                for j in range(1, len(v) + 1):
                    m0 = entry_mul(entry_mul((v[j:] + aw, w[k:]), c0),
                                   (v[:j - 1], bw + w[:k - 1]))
                    e_v = ((v[j - 1],), ())
                    e_w = ((), (w[k - 1],))
                    _accumulate(terms, (m0, e_v, e_w), coeff)
                    _accumulate(terms, (m0, e_w, e_v), -coeff)
    return normalize_chain(Chain(n, c.tags, terms))


def resolution_h(c):
    """Contracting homotopy h of degree +1; h vanishes in degree 0 and its
    degree-1 value only uses the two tail sums."""
    _check_pair_signature(c)
    n = c.degree
    if n == 0:
        return Chain.zero(1, c.tags, normalized=True)
    sign_tail = -1 if n % 2 else 1
    terms = {}
    for mono, coeff in c.terms.items():
        c0 = mono[0]
        if n == 1:
            v, w = mono[1]
            for k in range(2, len(w) + 1):
                m0 = entry_mul((v, w[k:]), c0)
                _accumulate(terms,
                            (m0, ((), w[:k - 1]), ((), (w[k - 1],))),
                            sign_tail * coeff)
            for j in range(1, len(v) + 1):
                m0 = entry_mul((v[j:], ()), c0)
                _accumulate(terms,
                            (m0, (v[:j - 1], w), ((v[j - 1],), ())),
                            sign_tail * coeff)
            continue
        omega_form = mono[1:n - 1]
        u, bw = mono[n - 1]
        v, w = mono[n]
        for k in range(1, len(w) + 1):
            for i in range(1, len(u) + 1):
                m0 = entry_mul((u[i:] + v, w[k:]), c0)
                mid = (u[:i - 1], bw + w[:k - 1])
                e_u = ((u[i - 1],), ())
                e_w = ((), (w[k - 1],))
                base = (m0,) + omega_form + (mid,)
                _accumulate(terms, base + (e_u, e_w), -sign_tail * coeff)
                _accumulate(terms, base + (e_w, e_u), sign_tail * coeff)
        for k in range(2, len(w) + 1):
            m0 = entry_mul((v, w[k:]), c0)
            base = (m0,) + omega_form + ((u, bw),)
            _accumulate(terms,
                        base + (((), w[:k - 1]), ((), (w[k - 1],))),
                        sign_tail * coeff)
        for j in range(1, len(v) + 1):
            m0 = entry_mul((v[j:], ()), c0)
            base = (m0,) + omega_form + ((u, bw),)
            _accumulate(terms,
                        base + ((v[:j - 1], w), ((v[j - 1],), ())),
                        sign_tail * coeff)
    return normalize_chain(Chain(n + 1, c.tags, terms))


def resolution_contraction(c):
    """Pair (h(c), k(c)) with hb + bh = 1 - k on the normalized complex."""
    return resolution_h(c), resolution_k(c)


# ---------------------------------------------------------------------------
# Normalization contraction on a carrier.
# ---------------------------------------------------------------------------


def degeneracy_homotopy(x):
    """Alternating telescope -s_0 + s_1(1 - s_0 d_0) - ... ; its image is
    degenerate, so the projection kills it."""
    n = x.degree
    out = El.zero(x.carrier, n + 1)
    if n < 0:
        return out
    cur = x
    for k in range(n + 1):
        if k:
            cur = cur - el_degeneracy(el_face(cur, k - 1), k - 1)
        out = out + (-1 if k % 2 == 0 else 1) * el_degeneracy(cur, k)
    return out


def normalization_contraction(carrier):
    """ContractionData between a carrier and its normalized view.

    The projection drops degenerate tokens; the section corrects the basis
    inclusion by 1 + b phi + phi b, which makes it a chain map and makes
    the homotopy identity f.g = 1 + b phi + phi b literal.
    """

    def section(x):
        y = project(x)
        return y + op_b(degeneracy_homotopy(y)) + degeneracy_homotopy(op_b(y))

    return ContractionData(
        f=section,
        g=project,
        phi=degeneracy_homotopy,
        b_small=lambda x: project(op_b(x)),
        b_big=op_b,
        B_small=lambda x: project(op_B(x)),
        B_big=op_B,
        special=False,
    )


def specialize_contraction(data):
    """Gauge the homotopy of a contraction so the side conditions hold.

    With e = f.g, the reduction runs in two classical steps: conjugating by
    1 - e forces g.phi' = 0 and phi'.f = 0, and -phi'.b.phi' then squares to
    zero while keeping f.g = 1 + b phi + phi b on the nose.  Requires g.f = 1
    and f, g chain maps; f, g and both differentials are reused unchanged.
    """

    def complement(x):
        return x - data.f(data.g(x))

    def gauged(x):
        return complement(data.phi(complement(x)))

    def special_phi(x):
        return -gauged(data.b_big(gauged(x)))

    return ContractionData(
        f=data.f,
        g=data.g,
        phi=special_phi,
        b_small=data.b_small,
        b_big=data.b_big,
        B_small=data.B_small,
        B_big=data.B_big,
        special=True,
    )


def _chain_degeneracy(c, j):
    terms = {}
    for mono, coeff in c.terms.items():
        _accumulate(terms, mono_degeneracy(mono, j), coeff)
    return Chain(c.degree + 1, c.tags, terms)


def _chain_face(c, i):
    terms = {}
    for mono, coeff in c.terms.items():
        _accumulate(terms, mono_face(mono, i), coeff)
    return Chain(c.degree - 1, c.tags, terms)


def chain_degeneracy_homotopy(c):
    """The degeneracy telescope acting on raw chains instead of carrier
    elements; output spans degenerate monomials only.

    Runs on bare term dicts; the telescope stages repeatedly rewrite large
    intermediate chains, so per-stage Chain objects are avoided.
    """
    n = c.degree
    if n < 0:
        return Chain.zero(n + 1, c.tags)
    out = {}
    cur = c.terms
    for k in range(n + 1):
        if k:
            nxt = dict(cur)
            for mono, coeff in cur.items():
                dm = mono_degeneracy(mono_face(mono, k - 1), k - 1)
                s = nxt.get(dm, 0) - coeff
                if s:
                    nxt[dm] = s
                else:
                    nxt.pop(dm, None)
            cur = nxt
        sgn = -1 if k % 2 == 0 else 1
        for mono, coeff in cur.items():
            dm = mono_degeneracy(mono, k)
            s = out.get(dm, 0) + sgn * coeff
            if s:
                out[dm] = s
            else:
                out.pop(dm, None)
    return Chain._raw(n + 1, c.tags, out)


def chain_normalization_contraction():
    """Chain-level normalization contraction; the small side is the span of
    nondegenerate monomials with the projected boundary."""

    def section(cbar):
        y = normalize_chain(cbar)
        return y + chain_b(chain_degeneracy_homotopy(y)) \
            + chain_degeneracy_homotopy(chain_b(y))

    return ContractionData(
        f=section,
        g=normalize_chain,
        phi=chain_degeneracy_homotopy,
        b_small=lambda c: normalize_chain(chain_b(c)),
        b_big=chain_b,
        B_small=lambda c: normalize_chain(chain_B(c)),
        B_big=chain_B,
        special=False,
    )
