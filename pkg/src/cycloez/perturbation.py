"""Perturbation of contractions along the degree-raising boundary.

The engine turns ContractionData into the perturbed quadruple: section,
projection, homotopy and differential each acquire higher components
indexed by the number of boundary insertions.  Two instances matter here:
the shuffle/interchange contraction (whose perturbed section stops after
one correction), and the denormalization that lifts a coextension off the
normalized complex while keeping its normalized values.
"""

from __future__ import annotations

from .chains import normalize_chain, normalize_tensor_chain
from .ez import (
    alexander_whitney,
    chain_B,
    chain_b,
    shuffle_map,
    tensor_B,
    tensor_b,
)
from .homotopies import ContractionData, phi_homotopy


class PerturbationError(ValueError):
    """A series fails to terminate or input data breaks a precondition."""


PERTURBED = ("f_inf", "g_inf", "phi_inf", "b_inf")


def _store(out, k, value):
    if not value.is_zero():
        out[k] = value


def perturb(data, which, x, degree_cap=None):
    """Perturbed value of one map as {k: homogeneous component}.

    Keys count boundary insertions: f_inf/g_inf component k sits 2k above
    the unperturbed degree, phi_inf component k sits at 2k + 1, and b_inf
    has the plain boundary at k = 0 with corrections at 2k - 1 for k >= 1.
    Zero components are dropped.  The underlying series must vanish before
    its carrier passes degree_cap (default 2n + 6, beyond where any
    terminating instance can still be nonzero); otherwise the evaluation
    raises instead of truncating.
    """
    n = x.degree
    limit = 2 * n + 6 if degree_cap is None else degree_cap

    def advance(label, cur, k):
        if cur.degree > limit:
            raise PerturbationError(
                f"{label}: series has not vanished by degree {limit} "
                f"(carrier of component {k} has degree {cur.degree})")
        return data.phi(data.B_big(cur))

    out = {}
    if which == "f_inf":
        cur = data.f(x)
        k = 0
        while not cur.is_zero():
            out[k] = cur
            cur = advance(which, cur, k)
            k += 1
    elif which == "g_inf":
        _store(out, 0, data.g(x))
        cur = data.phi(x)
        k = 1
        while not cur.is_zero():
            _store(out, k, data.g(data.B_big(cur)))
            cur = advance(which, cur, k)
            k += 1
    elif which == "phi_inf":
        cur = data.phi(x)
        k = 0
        while not cur.is_zero():
            out[k] = cur
            cur = advance(which, cur, k)
            k += 1
    elif which == "b_inf":
        _store(out, 0, data.b_small(x))
        cur = data.f(x)
        k = 1
        while not cur.is_zero():
            _store(out, k, data.g(data.B_big(cur)))
            cur = advance(which, cur, k)
            k += 1
    else:
        raise ValueError(f"unknown perturbed map {which!r}; "
                         f"expected one of {PERTURBED}")
    return out


class CoextensionFamily:
    """Components indexed by k >= 0, each of degree offset +2k, closing
    the mixed commutator [b, f_k] + [B, f_(k-1)] = 0.  Evaluation is
    demand-driven per (k, input); ``graded`` takes the incremental sweep
    when one is attached, so consecutive components share the series
    prefix instead of recomputing it."""

    __slots__ = ("component", "name", "sweep")

    def __init__(self, component, name="", sweep=None):
        self.component = component
        self.name = name
        self.sweep = sweep

    def __call__(self, k, x):
        if k < 0:
            raise ValueError("component index must be >= 0")
        return self.component(k, x)

    def graded(self, x, max_k):
        if self.sweep is not None:
            return self.sweep(x, max_k)
        out = {}
        for k in range(max_k + 1):
            _store(out, k, self(k, x))
        return out


def ez_contraction(tags_a=("a",), tags_b=("b",)):
    """Shuffle section and interchange projection between the normalized
    tensor bicomplex and the normalized chains of the joint signature;
    the homotopy is special."""
    split = len(tags_a)

    return ContractionData(
        f=lambda t: normalize_chain(shuffle_map(t)),
        g=lambda c: normalize_tensor_chain(alexander_whitney(c, split)),
        phi=lambda c: phi_homotopy(c, split),
        b_small=lambda t: normalize_tensor_chain(tensor_b(t)),
        b_big=lambda c: normalize_chain(chain_b(c)),
        B_small=lambda t: normalize_tensor_chain(tensor_B(t)),
        B_big=lambda c: normalize_chain(chain_B(c)),
        special=True,
    )


def ez_coextension(tags_a=("a",), tags_b=("b",)):
    """Families (sh_inf, aw_inf, phi_inf) of the perturbed shuffle pair."""
    data = ez_contraction(tags_a, tags_b)

    def sh_component(k, t):
        cur = data.f(t)
        for _ in range(k):
            cur = data.phi(data.B_big(cur))
        return cur

    def aw_component(k, c):
        cur = c
        for _ in range(k):
            cur = data.B_big(data.phi(cur))
        return data.g(cur)

    def phi_component(k, c):
        cur = data.phi(c)
        for _ in range(k):
            cur = data.phi(data.B_big(cur))
        return cur

    def sh_sweep(t, max_k):
        out = {}
        cur = data.f(t)
        for k in range(max_k + 1):
            if cur.is_zero():
                break
            out[k] = cur
            cur = data.phi(data.B_big(cur))
        return out

    def aw_sweep(c, max_k):
        out = {}
        cur = c
        for k in range(max_k + 1):
            if cur.is_zero():
                break
            _store(out, k, data.g(cur))
            cur = data.B_big(data.phi(cur))
        return out

    def phi_sweep(c, max_k):
        out = {}
        cur = data.phi(c)
        for k in range(max_k + 1):
            if cur.is_zero():
                break
            out[k] = cur
            cur = data.phi(data.B_big(cur))
        return out

    return (CoextensionFamily(sh_component, "sh_inf", sh_sweep),
            CoextensionFamily(aw_component, "aw_inf", aw_sweep),
            CoextensionFamily(phi_component, "phi_inf", phi_sweep))


def _add(u, v):
    if u is None:
        return v
    if v is None:
        return u
    return u + v


def _sub(u, v):
    if v is None:
        return u
    if u is None:
        return -v
    return u - v


class DenormalizedCoextension:
    """Lift h_k = f_k + phi . sum_i (B phi)^(k-i) D_i of a coextension that
    only closes after normalization, where D_i = [b, f_i] + [B, f_(i-1)].

    The lift agrees with the input under the projection (j h_k = j f_k)
    and closes the mixed commutator on the full complex.  ``recursive``
    evaluates the degreewise recursion for cross-checking; it returns the
    same values when the contraction homotopy is special (phi squared and
    phi composed with the section both vanish, as after
    ``specialize_contraction``).  With only g.phi = 0 both forms are still
    valid lifts but differ by phi-squared terms.
    """

    __slots__ = ("lifts", "contraction", "b_src", "B_src")

    def __init__(self, lifts, contraction, b_src, B_src):
        self.lifts = list(lifts)
        self.contraction = contraction
        self.b_src = b_src
        self.B_src = B_src

    def _lift(self, k, x):
        if 0 <= k < len(self.lifts):
            return self.lifts[k](x)
        return None

    def _defect(self, i, x):
        # D_i = b f_i - f_i b + B f_(i-1) - f_(i-1) B
        data = self.contraction
        out = None
        fi = self._lift(i, x)
        if fi is not None:
            out = _add(out, data.b_big(fi))
        out = _sub(out, self._lift(i, self.b_src(x)))
        prev = self._lift(i - 1, x)
        if prev is not None:
            out = _add(out, data.B_big(prev))
        out = _sub(out, self._lift(i - 1, self.B_src(x)))
        return out

    def __call__(self, k, x):
        data = self.contraction
        total = self._lift(k, x)
        for i in range(1, k + 1):
            d = self._defect(i, x)
            if d is None:
                continue
            for _ in range(k - i):
                d = data.B_big(data.phi(d))
            total = _add(total, data.phi(d))
        if total is None:
            raise PerturbationError(
                f"no data to evaluate component {k}: all lifts are absent")
        return total

    def recursive(self, k, x):
        """h_k = f_k + phi(b f_k - h_k b + [B, h_(k-1)]), recursing on the
        component index and the input degree.

        Subtrees repeat (the same boundary image feeds several branches), so
        evaluations are memoized per call on the chain value.
        """
        memo = {}

        def go(k, x):
            if k < 0 or x.is_zero():
                return None
            key = (k, x.degree, frozenset(x.terms.items()))
            if key in memo:
                return memo[key]
            data = self.contraction
            fk = self._lift(k, x)
            inner = None
            if fk is not None:
                inner = _add(inner, data.b_big(fk))
            inner = _sub(inner, go(k, self.b_src(x)))
            prev = go(k - 1, x)
            if prev is not None:
                inner = _add(inner, data.B_big(prev))
            inner = _sub(inner, go(k - 1, self.B_src(x)))
            total = fk
            if inner is not None:
                total = _add(total, data.phi(inner))
            memo[key] = total
            return total

        return go(k, x)

    def check_preconditions(self, x):
        """The zeroth lift must be a chain map, and the projected family
        must already close the mixed commutator."""
        data = self.contraction
        for k in range(len(self.lifts)):
            fk = self._lift(k, x)
            if fk is not None and not fk.is_zero() \
                    and fk.degree != x.degree + 2 * k:
                raise PerturbationError(
                    f"lift {k} has degree offset {fk.degree - x.degree} "
                    f"on a degree-{x.degree} input, expected +{2 * k}")
        f0 = self._lift(0, x)
        d0 = _sub(data.b_big(f0) if f0 is not None else None,
                  self._lift(0, self.b_src(x)))
        if d0 is not None and not d0.is_zero():
            raise PerturbationError(
                f"[b, f_0] != 0 on a degree-{x.degree} witness: {d0!r}")
        for i in range(1, len(self.lifts) + 1):
            d = self._defect(i, x)
            if d is None:
                continue
            proj = data.g(d)
            if not proj.is_zero():
                raise PerturbationError(
                    f"projected [b, f_{i}] + [B, f_{i - 1}] != 0 on a "
                    f"degree-{x.degree} witness: {proj!r}")


def denormalize_coextension(f_lifts, contraction, b_src, B_src, check_on=()):
    """Wrap degreewise lifts of a normalized coextension; any sample in
    check_on that breaks a precondition raises with the failing identity
    and witness."""
    co = DenormalizedCoextension(f_lifts, contraction, b_src, B_src)
    for x in check_on:
        co.check_preconditions(x)
    return co
