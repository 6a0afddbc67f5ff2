"""Cyclic-module carriers and the derived operator calculus.

A carrier is a graded family of based vector spaces together with sparse
structure maps: faces d_i (degree n to n-1), degeneracies s_j (n to n+1)
and the cyclic rotation t of order n+1.  Four carriers are provided:
free-algebra chains (tokens are word-tuple monomials), the standard
cyclic models (tokens are rotation-plus-monotone-map normal forms),
products acting diagonally, and presented quotients.

Elements are El instances: one degree, sparse token -> coefficient.  All
derived operators (Hochschild b and b', the cyclic complexes' T, N, B,
the extra degeneracy r, the Karoubi operator, and the rational averaging
homotopies h, h', L, K) are written once against the carrier interface
and work on every carrier.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .chains import (
    Chain,
    entry_is_unit,
    mono_cycle,
    mono_degeneracy,
    mono_face,
    mono_is_degenerate,
)
from .linalg import SpanSolver


class El:
    """Sparse element of one degree of a carrier."""

    __slots__ = ("carrier", "degree", "terms")

    def __init__(self, carrier, degree, terms=None):
        self.carrier = carrier
        self.degree = degree
        self.terms = {t: c for t, c in terms.items() if c != 0} if terms else {}

    @classmethod
    def zero(cls, carrier, degree):
        return cls(carrier, degree)

    @classmethod
    def of(cls, carrier, degree, token, coeff=1):
        return cls(carrier, degree, {token: coeff})

    def is_zero(self):
        return not self.terms

    def _compatible(self, other):
        if self.degree != other.degree or self.carrier != other.carrier:
            raise ValueError("element mismatch (degree or carrier)")

    def __add__(self, other):
        self._compatible(other)
        terms = dict(self.terms)
        for t, c in other.terms.items():
            s = terms.get(t, 0) + c
            if s == 0:
                terms.pop(t, None)
            else:
                terms[t] = s
        return El(self.carrier, self.degree, terms)

    def __sub__(self, other):
        return self + (-1) * other

    def __neg__(self):
        return (-1) * self

    def __rmul__(self, scalar):
        if scalar == 0:
            return El.zero(self.carrier, self.degree)
        return El(self.carrier, self.degree,
                  {t: scalar * c for t, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, El):
            return NotImplemented
        return (self.degree == other.degree and self.carrier == other.carrier
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.degree, frozenset(self.terms.items())))

    def __repr__(self):
        items = sorted(self.terms.items(), key=lambda kv: repr(kv[0]))
        body = " + ".join(f"{c}*{t}" for t, c in items) or "0"
        return f"El(deg={self.degree}, {body})"

    def map_tokens(self, fn, degree):
        """Linear extension of token -> sparse dict; result in `degree`."""
        out = {}
        for tok, c in self.terms.items():
            for t2, c2 in fn(tok).items():
                s = out.get(t2, 0) + c * c2
                if s == 0:
                    out.pop(t2, None)
                else:
                    out[t2] = s
        return El(self.carrier, degree, out)


# ---------------------------------------------------------------------------
# Carriers.
# ---------------------------------------------------------------------------


class AlgebraChainsCarrier:
    """Chains of a free algebra (or of a tensor product of 2-3 of them).

    Tokens are monomials: tuples of entries, each entry one word per
    factor.  Faces multiply adjacent entries, the top face wrapping the
    last entry onto the coefficient entry; degeneracies insert units; the
    cycle rotates entries one step to the right.
    """

    def __init__(self, tags=("a",)):
        self.tags = tuple(tags)
        self.arity = len(self.tags)

    def __eq__(self, other):
        return (isinstance(other, AlgebraChainsCarrier)
                and self.tags == other.tags)

    def __hash__(self):
        return hash(("alg", self.tags))

    def __repr__(self):
        return f"AlgebraChainsCarrier({self.tags!r})"

    def face(self, n, token, i):
        return {mono_face(token, i): 1}

    def degeneracy(self, n, token, j):
        return {mono_degeneracy(token, j): 1}

    def cycle(self, n, token):
        return {mono_cycle(token): 1}

    def token_degenerate(self, n, token):
        return mono_is_degenerate(token)

    def reduce_mod_degenerate(self, n, terms):
        return {t: c for t, c in terms.items() if not mono_is_degenerate(t)}

    def basis(self, n):
        return None

    def wrap(self, chain):
        if chain.tags != self.tags:
            raise ValueError("chain signature does not match carrier")
        return El(self, chain.degree, dict(chain.terms))

    def unwrap(self, el, normalized=False):
        return Chain(el.degree, self.tags, dict(el.terms), normalized)

    def generic_token(self, n):
        # one fresh letter of every factor per entry
        return tuple(tuple((i,) for _ in self.tags) for i in range(n + 1))

    def generic_element(self, n):
        return El.of(self, n, self.generic_token(n))

    def random_element(self, n, rng, nterms=3, letters=3, maxlen=2):
        terms = {}
        for _ in range(nterms):
            mono = tuple(
                tuple(tuple(rng.randrange(letters)
                            for _ in range(rng.randrange(maxlen + 1)))
                      for _ in self.tags)
                for _ in range(n + 1))
            coeff = rng.choice((-2, -1, 1, 2))
            s = terms.get(mono, 0) + coeff
            if s == 0:
                terms.pop(mono, None)
            else:
                terms[mono] = s
        return El(self, n, terms)


def _monotone_tuples(length, top):
    if length == 0:
        yield ()
        return
    def rec(prefix, lo):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for v in range(lo, top + 1):
            yield from rec(prefix + [v], v)
    yield from rec([], 0)


class ModelCarrier:
    """The standard cyclic model on one object [m].

    Degree-n tokens are pairs (k, f): a rotation exponent k in 0..n and a
    monotone value tuple f of length n+1 over 0..m, the unique normal form
    rotation-after-monotone.  Structure maps rewrite via the cyclic
    commutation rules and stay single tokens.
    """

    def __init__(self, m):
        self.m = m

    def __eq__(self, other):
        return isinstance(other, ModelCarrier) and self.m == other.m

    def __hash__(self):
        return hash(("model", self.m))

    def __repr__(self):
        return f"ModelCarrier({self.m})"

    def identity_token(self):
        return (0, tuple(range(self.m + 1)))

    def face(self, n, token, i):
        if n == 0:
            raise IndexError("no faces in degree 0")
        if not 0 <= i <= n:
            raise IndexError(f"face index {i} out of range for degree {n}")
        k, f = token
        exp, acc = k, 0
        while exp > 0:
            if i == 0:
                i = n
            else:
                i -= 1
                acc += 1
            exp -= 1
        out = (acc % n, f[:i] + f[i + 1:])
        return {out: 1}

    def degeneracy(self, n, token, j):
        if not 0 <= j <= n:
            raise IndexError(f"degeneracy index {j} out of range for degree {n}")
        k, f = token
        exp, acc = k, 0
        while exp > 0:
            if j == 0:
                j = n
                acc += 2
            else:
                j -= 1
                acc += 1
            exp -= 1
        out = (acc % (n + 2), f[:j] + (f[j],) + f[j:])
        return {out: 1}

    def cycle(self, n, token):
        k, f = token
        return {((k + 1) % (n + 1), f): 1}

    def token_degenerate(self, n, token):
        # lies in the image of some degeneracy, i.e. is fixed by s_j d_j;
        # a rotated token can carry a repeated value without being one
        if not any(token[1][i] == token[1][i + 1] for i in range(n)):
            return False
        for j in range(n):
            ((dtok, _),) = self.face(n, token, j).items()
            if self.degeneracy(n - 1, dtok, j) == {token: 1}:
                return True
        return False

    def reduce_mod_degenerate(self, n, terms):
        return {t: c for t, c in terms.items()
                if not self.token_degenerate(n, t)}

    def basis(self, n):
        return [(k, f) for k in range(n + 1)
                for f in _monotone_tuples(n + 1, self.m)]


class ProductCarrier:
    """Tensor product of two carriers with the diagonal cyclic structure."""

    def __init__(self, left, right):
        self.left = left
        self.right = right

    def __eq__(self, other):
        return (isinstance(other, ProductCarrier)
                and self.left == other.left and self.right == other.right)

    def __hash__(self):
        return hash(("prod", self.left, self.right))

    def __repr__(self):
        return f"ProductCarrier({self.left!r}, {self.right!r})"

    def _pair(self, du, dv):
        out = {}
        for u, cu in du.items():
            for v, cv in dv.items():
                out[(u, v)] = cu * cv
        return out

    def face(self, n, token, i):
        u, v = token
        return self._pair(self.left.face(n, u, i), self.right.face(n, v, i))

    def degeneracy(self, n, token, j):
        u, v = token
        return self._pair(self.left.degeneracy(n, u, j),
                          self.right.degeneracy(n, v, j))

    def cycle(self, n, token):
        u, v = token
        return self._pair(self.left.cycle(n, u), self.right.cycle(n, v))

    def _in_degeneracy_image(self, carrier, n, token, j):
        (down,) = carrier.face(n, token, j).items()
        dtok, dc = down
        if dc != 1:
            return False
        return carrier.degeneracy(n - 1, dtok, j) == {token: 1}

    def joint_degeneracy_set(self, n, token):
        u, v = token
        out = []
        for j in range(n):
            if (self._in_degeneracy_image(self.left, n, u, j)
                    and self._in_degeneracy_image(self.right, n, v, j)):
                out.append(j)
        return out

    def token_degenerate(self, n, token):
        return bool(self.joint_degeneracy_set(n, token))

    def reduce_mod_degenerate(self, n, terms):
        return {t: c for t, c in terms.items()
                if not self.token_degenerate(n, t)}

    def basis(self, n):
        bl = self.left.basis(n)
        br = self.right.basis(n)
        if bl is None or br is None:
            return None
        return [(u, v) for u in bl for v in br]


class QuotientCarrier:
    """Quotient of a finite-basis carrier by a span of relation vectors.

    relations maps degree -> iterable of sparse base-token vectors; the
    quotient basis in each degree is the set of non-pivot base tokens of
    the relation echelon.  Structure maps act on representatives and
    reduce.  Degrees above the configured cap are an error.
    """

    def __init__(self, base, relations, max_degree):
        self.base = base
        self.max_degree = max_degree
        self._ech = {}
        for n in range(max_degree + 1):
            solver = SpanSolver()
            for idx, vec in enumerate(relations.get(n, ())):
                solver.add(("rel", n, idx), vec)
            self._ech[n] = solver

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)

    def _check(self, n):
        if not 0 <= n <= self.max_degree:
            raise IndexError(f"degree {n} beyond quotient cap {self.max_degree}")

    def reduce(self, n, terms):
        self._check(n)
        return self._ech[n].residual(terms)

    def face(self, n, token, i):
        self._check(n - 1)
        return self.reduce(n - 1, self.base.face(n, token, i))

    def degeneracy(self, n, token, j):
        self._check(n + 1)
        return self.reduce(n + 1, self.base.degeneracy(n, token, j))

    def cycle(self, n, token):
        return self.reduce(n, self.base.cycle(n, token))

    def basis(self, n):
        self._check(n)
        pivots = set(self._ech[n]._rows)
        return [t for t in self.base.basis(n) if t not in pivots]

    def wrap(self, el_base):
        return El(self, el_base.degree,
                  self.reduce(el_base.degree, el_base.terms))

    def degenerate_span(self, n):
        """Echelon of the image of all degeneracies plus the relations."""
        self._check(n)
        solver = SpanSolver()
        if n > 0:
            for tok in self.basis(n - 1):
                for j in range(n):
                    solver.add(("s", j, tok), self.degeneracy(n - 1, tok, j))
        return solver

    def reduce_mod_degenerate(self, n, terms):
        terms = self.reduce(n, terms)
        return self.degenerate_span(n).residual(terms)

    def token_degenerate(self, n, token):
        return not self.reduce_mod_degenerate(n, {token: 1})


class CorruptedCarrier:
    """Negative-control wrapper: swaps the actions of d_0 and d_1."""

    def __init__(self, base):
        self.base = base

    def __eq__(self, other):
        return isinstance(other, CorruptedCarrier) and self.base == other.base

    def __hash__(self):
        return hash(("corrupt", self.base))

    def face(self, n, token, i):
        if n >= 1 and i in (0, 1):
            i = 1 - i
        return self.base.face(n, token, i)

    def __getattr__(self, name):
        return getattr(self.base, name)


# ---------------------------------------------------------------------------
# Structure maps on elements.
# ---------------------------------------------------------------------------


def el_face(x, i):
    return x.map_tokens(lambda t: x.carrier.face(x.degree, t, i), x.degree - 1)


def el_degeneracy(x, j):
    return x.map_tokens(lambda t: x.carrier.degeneracy(x.degree, t, j),
                        x.degree + 1)


def el_cycle(x, k=1):
    n = x.degree
    if n < 0:
        return x
    k %= (n + 1)
    out = x
    for _ in range(k):
        out = out.map_tokens(lambda t: x.carrier.cycle(n, t), n)
    return out


def project(x):
    """Reduce modulo the degenerate subspace (normalized view)."""
    return El(x.carrier, x.degree,
              x.carrier.reduce_mod_degenerate(x.degree, x.terms))


# ---------------------------------------------------------------------------
# Derived operators.  Input degree n throughout.
# ---------------------------------------------------------------------------


def op_t(x):
    return el_cycle(x)


def op_b(x):
    n = x.degree
    out = El.zero(x.carrier, n - 1)
    for i in range(n + 1):
        if n == 0:
            break
        out = out + (-1) ** i * el_face(x, i)
    return out


def op_bprime(x):
    n = x.degree
    out = El.zero(x.carrier, n - 1)
    for i in range(n):
        out = out + (-1) ** i * el_face(x, i)
    return out


def op_T(x):
    # 1 - (-1)^n t
    sgn = -1 if x.degree % 2 == 0 else 1
    return x + sgn * el_cycle(x)


def op_N(x):
    n = x.degree
    out = El.zero(x.carrier, n)
    cur = x
    for i in range(n + 1):
        sgn = -1 if (n * i) % 2 else 1
        out = out + sgn * cur
        if i < n:
            cur = el_cycle(cur)
    return out


def op_r(x):
    # the extra degeneracy t s_n
    return el_cycle(el_degeneracy(x, x.degree))


def op_B(x):
    return op_T(op_r(op_N(x)))


def op_kappa(x):
    n = x.degree
    if n == 0:
        return x
    y = x - el_degeneracy(el_face(x, n), n - 1)
    sgn = -1 if n % 2 else 1
    return sgn * el_cycle(y)


def op_h(x):
    n = x.degree
    out = El.zero(x.carrier, n)
    cur = x
    tau_sign = -1 if n % 2 else 1
    for i in range(n + 1):
        c = Fraction(n - 2 * i, 2 * (n + 1))
        out = out + (c * tau_sign ** i) * cur
        if i < n:
            cur = el_cycle(cur)
    return out


def op_hprime(x):
    return Fraction(1, x.degree + 1) * x


def op_L(x):
    n = x.degree
    if n == 0:
        return El.zero(x.carrier, -1)
    return Fraction(1, 2 * n) * el_face(x, 0)


def op_K(x):
    return x - op_B(op_L(x))


def op_sigma(x):
    """Swap the two factors of a product-carrier element."""
    if not isinstance(x.carrier, ProductCarrier):
        raise ValueError("sigma needs a product carrier")
    swapped = ProductCarrier(x.carrier.right, x.carrier.left)
    return El(swapped, x.degree,
              {(v, u): c for (u, v), c in x.terms.items()})


OPERATORS = {
    "b": op_b,
    "bprime": op_bprime,
    "B": op_B,
    "T": op_T,
    "N": op_N,
    "r": op_r,
    "kappa": op_kappa,
    "h": op_h,
    "hprime": op_hprime,
    "L": op_L,
    "K": op_K,
    "t": op_t,
    "sigma": op_sigma,
}


def resolve_operator(name):
    """Operator function for a stable ASCII name (d<i>, s<i> included)."""
    if name in OPERATORS:
        return OPERATORS[name]
    if len(name) >= 2 and name[0] in "ds" and name[1:].isdigit():
        idx = int(name[1:])
        if name[0] == "d":
            return lambda x: el_face(x, idx)
        return lambda x: el_degeneracy(x, idx)
    raise KeyError(f"unknown operator {name!r}")


# ---------------------------------------------------------------------------
# Contract verification reports.
# ---------------------------------------------------------------------------


def _test_elements(carrier, n, rng=None, samples=3):
    basis = carrier.basis(n)
    if basis is not None:
        return [El.of(carrier, n, t) for t in basis]
    # rebind to the passed carrier: a wrapper's delegated constructors
    # return elements bound to the wrapped carrier
    out = [El(carrier, n, carrier.generic_element(n).terms)]
    if rng is not None:
        out.extend(El(carrier, n, carrier.random_element(n, rng).terms)
                   for _ in range(samples))
    return out


def verify_cyclic_relations(carrier, max_degree, seed=0):
    """Check every simplicial/cyclic identity on basis (or sampled)
    elements up to max_degree; failures are returned as data."""
    rng = random.Random(seed)
    failures = []
    checked = 0

    def expect(ok, relation, n):
        nonlocal checked
        checked += 1
        if not ok:
            failures.append({"relation": relation, "degree": n})

    for n in range(max_degree + 1):
        for x in _test_elements(carrier, n, rng):
            if n >= 2:
                for j in range(1, n + 1):
                    for i in range(j):
                        expect(el_face(el_face(x, j), i)
                               == el_face(el_face(x, i), j - 1),
                               f"d{i} d{j} = d{j - 1} d{i}", n)
            for j in range(n + 1):
                for i in range(j + 1):
                    expect(el_degeneracy(el_degeneracy(x, j), i)
                           == el_degeneracy(el_degeneracy(x, i), j + 1),
                           f"s{i} s{j} = s{j + 1} s{i}", n)
            for j in range(n + 1):
                for i in range(n + 2):
                    lhs = el_face(el_degeneracy(x, j), i)
                    if i < j:
                        ok = lhs == el_degeneracy(el_face(x, i), j - 1)
                    elif i in (j, j + 1):
                        ok = lhs == x
                    else:
                        ok = lhs == el_degeneracy(el_face(x, i - 1), j)
                    expect(ok, f"d{i} s{j} cases", n)
            tx = el_cycle(x)
            if n >= 1:
                for i in range(1, n + 1):
                    expect(el_face(tx, i) == el_cycle(el_face(x, i - 1)),
                           f"d{i} t = t d{i - 1}", n)
                expect(el_face(tx, 0) == el_face(x, n), "d0 t = dn", n)
                for i in range(1, n + 1):
                    expect(el_degeneracy(tx, i)
                           == el_cycle(el_degeneracy(x, i - 1)),
                           f"s{i} t = t s{i - 1}", n)
                expect(el_degeneracy(tx, 0)
                       == el_cycle(el_cycle(el_degeneracy(x, n))),
                       "s0 t = t t sn", n)
            expect(el_cycle(x, n + 1) == x, "t^(n+1) = 1", n)
    return {"checked": checked, "failures": failures}


def _nap(fn, x):
    # apply on the normalized view
    return project(fn(x))


def karoubi_report(carrier, max_degree, seed=0):
    """The Karoubi-operator identity battery on the normalized carrier."""
    rng = random.Random(seed)
    cases = []

    def record(name, n, ok, witness=None):
        cases.append({"name": name, "degree": n, "ok": ok,
                      "witness": witness})

    def kpow(x, j):
        for _ in range(j):
            x = _nap(op_kappa, x)
        return x

    for n in range(max_degree + 1):
        checks = {
            "rbar^2 = 0": [],
            "[kbar, rbar] = 0": [],
            "kbar rbar = (-1)^n (r t)bar": [],
            "kbar^{n+1} rbar = rbar": [],
            "kbar^n = 1 + b kbar^n rbar": [],
            "kbar^n b = b": [],
            "kbar^{n+1} = 1 - rbar b": [],
            "(kbar^n - 1)(kbar^{n+1} - 1) = 0": [],
            "B = sum kbar^j rbar": [],
            "rbar B = B rbar = B^2 = 0": [],
            "B kbar = kbar B = B": [],
            "kbar^{n(n+1)} = 1 + bB, bB = -Bb": [],
            "d0 B = 2N": [],
        }
        for x0 in _test_elements(carrier, n, rng):
            x = project(x0)
            rx = _nap(op_r, x)
            bx = _nap(op_b, x)
            Bx = _nap(op_B, x)
            zero_up2 = El.zero(x.carrier, n + 2)
            checks["rbar^2 = 0"].append(_nap(op_r, rx) == zero_up2)
            checks["[kbar, rbar] = 0"].append(
                _nap(op_kappa, rx) == _nap(op_r, _nap(op_kappa, x)))
            sgn = -1 if n % 2 else 1
            checks["kbar rbar = (-1)^n (r t)bar"].append(
                _nap(op_kappa, rx) == sgn * _nap(op_r, el_cycle(x)))
            checks["kbar^{n+1} rbar = rbar"].append(kpow(rx, n + 1) == rx)
            checks["kbar^n = 1 + b kbar^n rbar"].append(
                kpow(x, n) == x + _nap(op_b, kpow(rx, n)))
            if n >= 1:
                checks["kbar^n b = b"].append(kpow(bx, n) == bx)
            checks["kbar^{n+1} = 1 - rbar b"].append(
                kpow(x, n + 1) == (x - _nap(op_r, bx) if n >= 1 else x))
            y = kpow(x, n + 1) - x
            checks["(kbar^n - 1)(kbar^{n+1} - 1) = 0"].append(
                kpow(y, n) == y if n >= 1 else y.is_zero())
            acc = El.zero(x.carrier, n + 1)
            term = rx
            for _ in range(n + 1):
                acc = acc + term
                term = _nap(op_kappa, term)
            checks["B = sum kbar^j rbar"].append(Bx == acc)
            checks["rbar B = B rbar = B^2 = 0"].append(
                _nap(op_r, Bx).is_zero() and _nap(op_B, rx).is_zero()
                and _nap(op_B, Bx).is_zero())
            checks["B kbar = kbar B = B"].append(
                _nap(op_B, _nap(op_kappa, x)) == Bx
                and _nap(op_kappa, Bx) == Bx)
            bB = _nap(op_b, Bx)
            checks["kbar^{n(n+1)} = 1 + bB, bB = -Bb"].append(
                kpow(x, n * (n + 1)) == x + bB
                and bB == -1 * _nap(op_B, bx))
            checks["d0 B = 2N"].append(
                el_face(op_B(x0), 0) == 2 * op_N(x0))
        for name, results in checks.items():
            if results:
                record(name, n, all(results))
    return cases


def averaging_report(carrier, max_degree, seed=0):
    """Identities of the rational homotopy toolkit: hT = Th = 1 - h'N,
    hT^2 = T, h'N = LB, KB = 0, hT(1-K) = 1-K, idempotents."""
    rng = random.Random(seed)
    cases = []
    for n in range(max_degree + 1):
        oks = {"hT = Th = 1 - h'N": [], "hT^2 = T": [], "h'N = LB": [],
               "KB = 0": [], "hT(1-K) = 1-K": [],
               "K, 1-K, hT, h'N idempotent": []}
        for x in _test_elements(carrier, n, rng):
            hT = op_h(op_T(x))
            Th = op_T(op_h(x))
            ref = x - op_hprime(op_N(x))
            oks["hT = Th = 1 - h'N"].append(hT == Th == ref)
            oks["hT^2 = T"].append(op_h(op_T(op_T(x))) == op_T(x))
            oks["h'N = LB"].append(op_hprime(op_N(x)) == op_L(op_B(x)))
            oks["KB = 0"].append(op_K(op_B(x)).is_zero())
            mK = x - op_K(x)
            hN = op_hprime(op_N(x))
            oks["hT(1-K) = 1-K"].append(op_h(op_T(mK)) == mK)
            oks["K, 1-K, hT, h'N idempotent"].append(
                op_K(op_K(x)) == op_K(x)
                and mK - op_K(mK) == mK
                and op_h(op_T(hT)) == hT
                and op_hprime(op_N(hN)) == hN)
        for name, results in oks.items():
            cases.append({"name": name, "degree": n, "ok": all(results)})
    return cases
