"""Normal-form calculus on the standard simplicial and cyclic models.

Morphisms of the index categories are stored in epi-mono normal form (a
rotation, then a monotone vertex map); they act on any carrier through
their face, degeneracy and rotation words.  Finite combinations of
morphisms, possibly in pairs over a product of two models, therefore
name natural maps, and identities between natural maps are decided
exactly by evaluating on universal elements and solving small linear
systems over the rationals.

On top of that calculus sit the worked constructions: an exact
boundary-preimage solver, the degree-raising shuffle correction built
by recursion, a finitely presented cyclic module on which the
averaging-projector argument breaks down, and linear certificates that
no natural homotopy symmetrizes the correction while plain shuffles
are strictly associative and the correction is associative up to an
explicit homotopy produced by the solver.
"""

import random
from functools import lru_cache

from .carriers import (
    AlgebraChainsCarrier,
    El,
    ModelCarrier,
    ProductCarrier,
    QuotientCarrier,
    _monotone_tuples,
    el_cycle,
    el_degeneracy,
    el_face,
    op_B,
    op_K,
    op_L,
    op_N,
    op_T,
    op_b,
    op_h,
    op_hprime,
    op_r,
    project,
)
from .chains import (
    Chain,
    TensorChain,
    entry_is_unit,
    mono_cycle,
    mono_degeneracy,
    mono_face,
    normalize_chain,
    normalize_tensor_chain,
)
from .ez import (
    alexander_whitney,
    chain_B,
    chain_b,
    cyclic_shuffle_map,
    cyclic_shuffle_product,
    enumerate_shuffles,
    shuffle_product,
    tensor_B,
    tensor_b,
    triple_aw,
    triple_maps,
)
from .homotopies import normalization_contraction, phi_homotopy
from .linalg import SpanSolver, solve_columns

__all__ = [
    "SimplicialMorphism",
    "CyclicMorphism",
    "ModelElement",
    "InfeasibleSystem",
    "enumerate_morphisms",
    "yoneda_evaluate",
    "universal_chain",
    "representability",
    "morphism_image_profile",
    "random_model_element",
    "b_preimage",
    "construct_sh2",
    "check_sh2_equations",
    "check_sh2_transport",
    "sh2_on_chains",
    "counterexample_lambda1",
    "noncommutativity_obstruction",
    "associativity_certificates",
]


class InfeasibleSystem(Exception):
    """An exact linear system admitted no solution.

    ``certificate`` records the rank of the column span, the rank of
    the augmented system, and enough context to reproduce the solve.
    """

    def __init__(self, message, certificate):
        super().__init__(message)
        self.certificate = certificate


def _acc(store, key, coeff):
    new = store.get(key, 0) + coeff
    if new:
        store[key] = new
    else:
        store.pop(key, None)


# ---------------------------------------------------------------------------
# Morphisms in epi-mono normal form.
# ---------------------------------------------------------------------------


class SimplicialMorphism:
    """Monotone map [n] -> [m], stored by its vertex values.

    Factors uniquely as degeneracies (collapsing repeated values)
    followed by faces (skipping missed values); those two words are
    what act on carriers.
    """

    __slots__ = ("values", "m")

    def __init__(self, values, m):
        values = tuple(values)
        if not values:
            raise ValueError("empty vertex tuple")
        if any(values[i] > values[i + 1] for i in range(len(values) - 1)):
            raise ValueError("vertex values must be weakly increasing")
        if values[0] < 0 or values[-1] > m:
            raise ValueError("vertex values out of range")
        self.values = values
        self.m = m

    @property
    def n(self):
        return len(self.values) - 1

    @classmethod
    def identity(cls, n):
        return cls(range(n + 1), n)

    def __eq__(self, other):
        return (isinstance(other, SimplicialMorphism)
                and self.values == other.values and self.m == other.m)

    def __hash__(self):
        return hash(("simp", self.values, self.m))

    def __repr__(self):
        return "SimplicialMorphism(%r, m=%d)" % (list(self.values), self.m)

    def compose(self, other):
        """self after other (other lands in this morphism's source)."""
        if other.m != self.n:
            raise ValueError("codomain/domain mismatch")
        return SimplicialMorphism(
            tuple(self.values[v] for v in other.values), self.m)

    def face_word(self):
        """Missed target values, decreasing: the mono part as faces."""
        hit = set(self.values)
        return tuple(i for i in range(self.m, -1, -1) if i not in hit)

    def degeneracy_word(self):
        """Positions of repeated values, increasing: the epi part."""
        return tuple(j for j in range(self.n)
                     if self.values[j] == self.values[j + 1])

    def is_identity(self):
        return self.m == self.n and self.values == tuple(range(self.m + 1))


class CyclicMorphism:
    """Morphism [n] -> [m] of the cyclic index category.

    Normal form: rotate the source ``rot`` times, then apply a monotone
    vertex map.  Equivalently a monotone staircase map on the integers
    commuting with the shifts, taken modulo the target shift; the
    staircase view makes composition a finite window search.
    """

    __slots__ = ("rot", "simp")

    def __init__(self, rot, values, m):
        simp = SimplicialMorphism(values, m)
        self.rot = rot % (simp.n + 1)
        self.simp = simp

    @property
    def values(self):
        return self.simp.values

    @property
    def m(self):
        return self.simp.m

    @property
    def n(self):
        return self.simp.n

    @classmethod
    def identity(cls, n):
        return cls(0, range(n + 1), n)

    @classmethod
    def from_token(cls, token, m):
        rot, values = token
        return cls(rot, values, m)

    def token(self):
        return (self.rot, self.simp.values)

    def __eq__(self, other):
        return (isinstance(other, CyclicMorphism)
                and self.rot == other.rot and self.simp == other.simp)

    def __hash__(self):
        return hash(("cyc", self.rot, self.simp.values, self.simp.m))

    def __repr__(self):
        return "CyclicMorphism(rot=%d, values=%r, m=%d)" % (
            self.rot, list(self.simp.values), self.m)

    def is_identity(self):
        return self.rot == 0 and self.simp.is_identity()

    def compose(self, other):
        """self after other, staying in normal form."""
        if other.m != self.n:
            raise ValueError("codomain/domain mismatch")
        rot, values = _compose_tokens(
            self.token(), self.m, other.token(), other.m)
        return CyclicMorphism(rot, values, self.m)


def _staircase(token, m, i):
    """Value at i of the periodic monotone cover of a normal form."""
    rot, values = token
    n = len(values) - 1
    j = i - rot
    return values[j % (n + 1)] + (m + 1) * (j // (n + 1))


@lru_cache(maxsize=None)
def _compose_tokens(outer, outer_m, inner, inner_m):
    """Compose two normal forms via their staircase covers.

    The composite cover is refactored by scanning which source window
    of full length lands inside one fundamental period of the target;
    exactly one window does.
    """
    if len(outer[1]) - 1 != inner_m:
        raise ValueError("codomain/domain mismatch")
    n = len(inner[1]) - 1
    period = outer_m + 1
    lifted = [_staircase(outer, outer_m, _staircase(inner, inner_m, i))
              for i in range(2 * n + 2)]
    for k in range(n + 1):
        shift = (lifted[k] // period) * period
        if lifted[k + n] - shift <= outer_m:
            return (k, tuple(lifted[k + j] - shift for j in range(n + 1)))
    raise AssertionError("staircase composite admits no normal form")


def _compose_token_windows(outer, outer_m, inner, inner_m):
    """All windows that would normalize the composite (for uniqueness
    checks; composition itself takes the first)."""
    n = len(inner[1]) - 1
    period = outer_m + 1
    lifted = [_staircase(outer, outer_m, _staircase(inner, inner_m, i))
              for i in range(2 * n + 2)]
    out = []
    for k in range(n + 1):
        shift = (lifted[k] // period) * period
        if lifted[k + n] - shift <= outer_m:
            out.append((k, tuple(lifted[k + j] - shift
                                 for j in range(n + 1))))
    return out


def _canon_cat(category):
    cat = str(category).lower()
    if cat in ("delta", "simplicial"):
        return "delta"
    if cat in ("lambda", "cyclic"):
        return "lambda"
    raise ValueError("unknown category %r" % (category,))


def enumerate_morphisms(category, m, n):
    """All morphisms [n] -> [m]: monotone maps for 'delta', every
    rotation of them for 'lambda'.  Order matches the model basis."""
    if m < 0 or n < 0:
        raise ValueError("negative simplex dimension")
    if _canon_cat(category) == "delta":
        return [CyclicMorphism(0, values, m)
                for values in _monotone_tuples(n + 1, m)]
    return [CyclicMorphism(rot, values, m)
            for rot in range(n + 1)
            for values in _monotone_tuples(n + 1, m)]


# ---------------------------------------------------------------------------
# Evaluation: morphisms act through their structure-map words.
# ---------------------------------------------------------------------------


def _apply_morphism_el(morph, x):
    if x.degree != morph.m:
        raise ValueError("element degree %d does not match morphism "
                         "codomain %d" % (x.degree, morph.m))
    out = x
    for i in morph.simp.face_word():
        out = el_face(out, i)
    for j in morph.simp.degeneracy_word():
        out = el_degeneracy(out, j)
    if morph.rot:
        out = el_cycle(out, morph.rot)
    return out


def _apply_morphism_mono(morph, mono):
    if len(mono) - 1 != morph.m:
        raise ValueError("monomial degree mismatch")
    out = mono
    for i in morph.simp.face_word():
        out = mono_face(out, i)
    for j in morph.simp.degeneracy_word():
        out = mono_degeneracy(out, j)
    for _ in range(morph.rot):
        out = mono_cycle(out)
    return out


def _factor_word_apply(carrier, degree, token, morph):
    """Action of one morphism on one factor token, as a combination."""
    if isinstance(carrier, ModelCarrier):
        # pure composition of normal forms
        return {_compose_tokens(token, carrier.m, morph.token(),
                                morph.m): 1}
    cur = {token: 1}
    deg = degree
    for i in morph.simp.face_word():
        nxt = {}
        for t, c in cur.items():
            for t2, c2 in carrier.face(deg, t, i).items():
                _acc(nxt, t2, c * c2)
        cur, deg = nxt, deg - 1
    for j in morph.simp.degeneracy_word():
        nxt = {}
        for t, c in cur.items():
            for t2, c2 in carrier.degeneracy(deg, t, j).items():
                _acc(nxt, t2, c * c2)
        cur, deg = nxt, deg + 1
    for _ in range(morph.rot):
        nxt = {}
        for t, c in cur.items():
            for t2, c2 in carrier.cycle(deg, t).items():
                _acc(nxt, t2, c * c2)
        cur = nxt
    return cur


def _apply_pair_el(pair, x):
    """Diagonal action of a morphism pair on a product element."""
    fa, fb = pair
    carrier = x.carrier
    if not isinstance(carrier, ProductCarrier):
        raise TypeError("pair evaluation needs a product carrier")
    if fa.m != x.degree or fb.m != x.degree:
        raise ValueError("pair codomain does not match element degree")
    if fa.n != fb.n:
        raise ValueError("pair members land in different degrees")
    terms = {}
    for (u, v), c in x.terms.items():
        du = _factor_word_apply(carrier.left, x.degree, u, fa)
        dv = _factor_word_apply(carrier.right, x.degree, v, fb)
        for tu, cu in du.items():
            for tv, cv in dv.items():
                _acc(terms, (tu, tv), c * cu * cv)
    return El(carrier, fa.n, terms)


def universal_chain(m, tag="a"):
    """The universal element of the size-m model as an algebra chain:
    one generator letter per tensor slot, in order."""
    return Chain._raw(m, (tag,), {_universal_mono(m): 1})


def _universal_mono(m):
    return tuple(((i,),) for i in range(m + 1))


def yoneda_evaluate(x, target):
    """Evaluate a morphism, a morphism pair, or a ModelElement.

    Targets are carrier elements (El) or algebra chains (Chain) of
    degree equal to the codomain; pairs act diagonally on product
    elements.  Naturality makes the result route-independent.
    """
    if isinstance(x, ModelElement):
        out = _zero_value(x, target)
        for key, coeff in x.terms.items():
            out = out + coeff * yoneda_evaluate(_key_to_morphs(key, x),
                                                target)
        return out
    if isinstance(x, tuple) and len(x) == 2 \
            and isinstance(x[0], CyclicMorphism):
        return _apply_pair_el(x, target)
    if not isinstance(x, CyclicMorphism):
        raise TypeError("cannot evaluate %r" % (type(x).__name__,))
    if isinstance(target, El):
        return _apply_morphism_el(x, target)
    if isinstance(target, Chain):
        if target.degree != x.m:
            raise ValueError("chain degree does not match codomain")
        terms = {}
        for mono, coeff in target.terms.items():
            _acc(terms, _apply_morphism_mono(x, mono), coeff)
        return Chain._raw(x.n, target.tags, terms)
    raise TypeError("cannot evaluate on %r" % (type(target).__name__,))


class ModelElement:
    """Finite combination of morphisms out of one model, or of morphism
    pairs out of a product of two models: the unit of account of the
    representability calculus.

    shape is ("single", m) or ("pair", (ma, mb)); terms map normal-form
    tokens (or token pairs) to coefficients.
    """

    __slots__ = ("shape", "degree", "terms")

    def __init__(self, shape, degree, terms):
        self.shape = shape
        self.degree = degree
        self.terms = {k: v for k, v in terms.items() if v}

    @classmethod
    def of_morphism(cls, morph):
        return cls(("single", morph.m), morph.n, {morph.token(): 1})

    @classmethod
    def of_pair(cls, fa, fb):
        if fa.n != fb.n:
            raise ValueError("pair members must share their source")
        return cls(("pair", (fa.m, fb.m)), fa.n,
                   {(fa.token(), fb.token()): 1})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if self.shape != other.shape or self.degree != other.degree:
            raise ValueError("shape mismatch")
        terms = dict(self.terms)
        for k, v in other.terms.items():
            _acc(terms, k, v)
        return ModelElement(self.shape, self.degree, terms)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        return ModelElement(self.shape, self.degree,
                            {k: scalar * v for k, v in self.terms.items()})

    def __neg__(self):
        return (-1) * self

    def __eq__(self, other):
        return (isinstance(other, ModelElement)
                and self.shape == other.shape
                and self.degree == other.degree
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.shape, self.degree,
                     tuple(sorted(self.terms.items()))))

    def __repr__(self):
        return "ModelElement(shape=%r, degree=%d, terms=%d)" % (
            self.shape, self.degree, len(self.terms))

    def sorted_terms(self):
        return sorted(self.terms.items())


def _key_to_morphs(key, elem):
    kind, size = elem.shape
    if kind == "single":
        return CyclicMorphism.from_token(key, size)
    ma, mb = size
    return (CyclicMorphism.from_token(key[0], ma),
            CyclicMorphism.from_token(key[1], mb))


def _zero_value(elem, target):
    if isinstance(target, El):
        return El.zero(target.carrier, elem.degree)
    if isinstance(target, Chain):
        return Chain.zero(elem.degree, target.tags)
    raise TypeError("cannot evaluate on %r" % (type(target).__name__,))


def _model_element_to_el(elem):
    kind, size = elem.shape
    if kind == "single":
        return El(ModelCarrier(size), elem.degree, dict(elem.terms))
    ma, mb = size
    return El(ProductCarrier(ModelCarrier(ma), ModelCarrier(mb)),
              elem.degree, dict(elem.terms))


def _el_to_model_element(x):
    carrier = x.carrier
    if isinstance(carrier, ModelCarrier):
        return ModelElement(("single", carrier.m), x.degree, dict(x.terms))
    if isinstance(carrier, ProductCarrier) \
            and isinstance(carrier.left, ModelCarrier) \
            and isinstance(carrier.right, ModelCarrier):
        return ModelElement(("pair", (carrier.left.m, carrier.right.m)),
                            x.degree, dict(x.terms))
    raise TypeError("element does not live on a standard model")


def random_model_element(m, degree, seed, pair=False, nterms=3):
    """Deterministic pseudo-random combination of normal forms with
    small nonzero integer coefficients."""
    rng = random.Random("model-element:%d:%d:%d:%d"
                        % (m, degree, seed, int(pair)))
    if pair:
        carrier = ProductCarrier(ModelCarrier(m), ModelCarrier(m))
    else:
        carrier = ModelCarrier(m)
    basis = carrier.basis(degree)
    terms = {}
    for tok in rng.sample(basis, min(nterms, len(basis))):
        terms[tok] = rng.choice([-2, -1, 1, 2])
    return _el_to_model_element(El(carrier, degree, terms))


# ---------------------------------------------------------------------------
# Representability: exact linear solve against all token images.
# ---------------------------------------------------------------------------


def morphism_image_profile(morph):
    """Reading shape of the image of the universal element: 'ordered'
    when the letters read 0..m left to right beginning inside the
    first entry, 'wrapped' for a cyclic rotation of that (around the
    entry circle or inside a product), 'other' otherwise."""
    m = morph.m
    mono = _apply_morphism_mono(morph, _universal_mono(m))
    word = tuple(letter for entry in mono for w in entry for letter in w)
    base = tuple(range(m + 1))
    if sorted(word) == list(base):
        if word == base and not entry_is_unit(mono[0]):
            return "ordered"
        k = word.index(0)
        if word[k:] + word[:k] == base:
            return "wrapped"
    return "other"


def _max_letter(monos, slot=None):
    top = -1
    for mono in monos:
        entries = mono if slot is None else mono[slot]
        for entry in entries:
            for word in entry:
                for letter in word:
                    if letter > top:
                        top = letter
    return top


def representability(value, category, m=None):
    """Decide whether a chain-level value is a combination of morphisms
    evaluated on the universal element (pairs of morphisms for a
    two-factor tensor value).

    Returns the verdict, the representing ModelElement when feasible,
    the exact rank certificate, and the ordered/wrapped profile of the
    enumerated images.
    """
    cat = _canon_cat(category)
    if isinstance(value, TensorChain):
        return _representability_pair(value, cat, m)
    if not isinstance(value, Chain):
        raise TypeError("value must be a Chain or a TensorChain")
    if len(value.tags) != 1:
        raise ValueError("single-model values carry exactly one tag")
    if m is None:
        m = _max_letter(value.terms)
        if m < 0:
            raise ValueError("cannot infer the model size from zero")
    n = value.degree
    universal = _universal_mono(m)
    columns = []
    profile = {"ordered": 0, "wrapped": 0, "other": 0}
    for morph in enumerate_morphisms(cat, m, n):
        mono = _apply_morphism_mono(morph, universal)
        columns.append((morph.token(), {mono: 1}))
        profile[morphism_image_profile(morph)] += 1
    sol, cert = solve_columns(columns, dict(value.terms))
    element = None
    if sol is not None:
        element = ModelElement(("single", m), n, sol)
    return {
        "representable": sol is not None,
        "element": element,
        "certificate": cert,
        "profile": profile,
        "category": cat,
        "model": m,
    }


def _representability_pair(value, cat, m):
    if len(value.factors) != 2:
        raise ValueError("pair representability needs two factors")
    if m is None:
        ma = _max_letter(value.terms, 0)
        mb = _max_letter(value.terms, 1)
        if ma < 0 or mb < 0:
            raise ValueError("cannot infer the model sizes from zero")
    else:
        ma, mb = m
    n = value.degree
    ua, ub = _universal_mono(ma), _universal_mono(mb)
    images_a = [(f.token(), _apply_morphism_mono(f, ua))
                for f in enumerate_morphisms(cat, ma, n)]
    images_b = [(f.token(), _apply_morphism_mono(f, ub))
                for f in enumerate_morphisms(cat, mb, n)]
    columns = [((ta, tb), {(ia, ib): 1})
               for ta, ia in images_a for tb, ib in images_b]
    sol, cert = solve_columns(columns, dict(value.terms))
    element = None
    if sol is not None:
        element = ModelElement(("pair", (ma, mb)), n, sol)
    return {
        "representable": sol is not None,
        "element": element,
        "certificate": cert,
        "profile": None,
        "category": cat,
        "model": (ma, mb),
    }


# ---------------------------------------------------------------------------
# Exact boundary preimages on the models.
# ---------------------------------------------------------------------------


class _IndexedSolver:
    """SpanSolver over integer-indexed rows; a row index is assigned
    the first time its key appears in an added column.  A target with
    a key the columns never hit is immediately infeasible."""

    __slots__ = ("solver", "index")

    def __init__(self):
        self.solver = SpanSolver()
        self.index = {}

    def add(self, name, vec):
        self.solver.add(name, self._pack(vec, grow=True))

    def _pack(self, vec, grow=False):
        packed = {}
        for key, coeff in vec.items():
            idx = self.index.get(key)
            if idx is None:
                if not grow:
                    return None
                idx = len(self.index)
                self.index[key] = idx
            packed[idx] = coeff
        return packed

    def express(self, vec):
        packed = self._pack(vec)
        if packed is None:
            return None
        return self.solver.express(packed)

    def rank(self):
        return self.solver.rank


_BOUNDARY_SOLVERS = {}


def _boundary_solver(carrier, degree):
    """Cached solver writing normalized degree-``degree`` cycles as
    boundaries of nondegenerate tokens one degree up."""
    key = (carrier, degree)
    solver = _BOUNDARY_SOLVERS.get(key)
    if solver is None:
        solver = _IndexedSolver()
        for tok in carrier.basis(degree + 1):
            if carrier.token_degenerate(degree + 1, tok):
                continue
            col = project(op_b(El(carrier, degree + 1, {tok: 1})))
            if not col.is_zero():
                solver.add(tok, col.terms)
        _BOUNDARY_SOLVERS[key] = solver
    return solver


def b_preimage(cycle, module=None):
    """Solve b z = cycle exactly on a model (or product of models).

    Accepts an El or a ModelElement and returns the same kind.  Raises
    ValueError when the input is not a cycle, InfeasibleSystem with a
    rank certificate when it is not a boundary.  The output is
    canonical: the reduced-echelon solution over nondegenerate tokens,
    carried back through the normalization section, minus the
    degeneracy homotopy applied to the input.
    """
    wrapped = isinstance(cycle, ModelElement)
    x = _model_element_to_el(cycle) if wrapped else cycle
    if module is not None and module != x.carrier:
        raise ValueError("module does not match the element's carrier")
    carrier = x.carrier
    if x.is_zero():
        z = El.zero(carrier, x.degree + 1)
        return _el_to_model_element(z) if wrapped else z
    if not op_b(x).is_zero():
        raise ValueError("boundary preimage needs a cycle")
    xbar = project(x)
    solver = _boundary_solver(carrier, x.degree)
    combo = solver.express(xbar.terms)
    if combo is None:
        raise InfeasibleSystem(
            "cycle is not a boundary in degree %d" % (x.degree,),
            {
                "rank": solver.rank(),
                "rank_augmented": solver.rank() + 1,
                "degree": x.degree,
                "support": sorted(xbar.terms),
            })
    contraction = normalization_contraction(carrier)
    wbar = El(carrier, x.degree + 1, {t: c for t, c in combo.items() if c})
    z = contraction.f(wbar) - contraction.phi(x)
    if op_b(z) != x:
        raise AssertionError("boundary preimage failed verification")
    return _el_to_model_element(z) if wrapped else z


# ---------------------------------------------------------------------------
# The degree-raising shuffle correction, built by recursion.
# ---------------------------------------------------------------------------


_OP_CACHE = {}

_OP_BUILDERS = {
    "b": op_b,
    "B": op_B,
    "T": op_T,
    "L": op_L,
    "Th": lambda x: op_T(op_h(x)),
    "ThK": lambda x: op_T(op_h(op_K(x))),
    "hTK": lambda x: op_h(op_T(op_K(x))),
    "hN": lambda x: op_hprime(op_N(x)),
    "BL": lambda x: x - op_K(x),
}


def _op_value(name, m):
    """A natural operator applied to the universal element of the
    size-m model, i.e. the element representing that operator."""
    key = (name, m)
    val = _OP_CACHE.get(key)
    if val is None:
        carrier = ModelCarrier(m)
        one = El(carrier, m, {carrier.identity_token(): 1})
        val = _OP_BUILDERS[name](one)
        _OP_CACHE[key] = val
    return val


def _push_factor(x, side, w):
    """Precompose one tensor slot with an operator element ``w``.

    ``w`` lives on the model of the new slot and has degree equal to
    the current slot size; it composes as the outer normal form into
    every term of ``x``.
    """
    carrier = x.carrier
    old = carrier.left if side == 0 else carrier.right
    if w.degree != old.m:
        raise ValueError("push degree mismatch")
    new_model = ModelCarrier(w.carrier.m)
    new_carrier = (ProductCarrier(new_model, carrier.right) if side == 0
                   else ProductCarrier(carrier.left, new_model))
    terms = {}
    for (u, v), c in x.terms.items():
        slot = u if side == 0 else v
        for wtok, wc in w.terms.items():
            composed = _compose_tokens(wtok, w.carrier.m, slot, old.m)
            key = (composed, v) if side == 0 else (u, composed)
            _acc(terms, key, c * wc)
    return El(new_carrier, x.degree, terms)


def _shuffle_element(p, q):
    """The shuffle product of the two universal elements, written on
    the product of the size-p and size-q models."""
    carrier = ProductCarrier(ModelCarrier(p), ModelCarrier(q))
    terms = {}
    for shf in enumerate_shuffles(p, q):
        va, vb = [0], [0]
        for origin, _ in shf.takes:
            va.append(va[-1] + (1 if origin == "a" else 0))
            vb.append(vb[-1] + (1 if origin == "b" else 0))
        terms[((0, tuple(va)), (0, tuple(vb)))] = shf.sign
    return El(carrier, p + q, terms)


def _rotation_orbits(carrier, degree):
    """Rotation orbits on degree-``degree`` tokens: orbit
    representatives plus token -> (orbit id, exponent)."""
    reps = []
    pos = {}
    for tok in carrier.basis(degree):
        if tok in pos:
            continue
        cur = tok
        for j in range(degree + 1):
            pos[cur] = (len(reps), j)
            ((cur, c),) = carrier.cycle(degree, cur).items()
            if c != 1:
                raise AssertionError("rotation has a nonunit coefficient")
        if cur != tok:
            raise AssertionError("rotation orbit does not close")
        reps.append(tok)
    return reps, pos


_ORBIT_SOLVERS = {}


def _split_rotation_boundary(rhs):
    """Solve T u + b v = rhs on a product of models, using that the
    rotation acts freely on product tokens.

    Projects to the rotation coinvariants, solves for v there, then
    integrates u orbit by orbit; the split is verified exactly.
    """
    carrier = rhs.carrier
    degree = rhs.degree
    if rhs.is_zero():
        return El.zero(carrier, degree), El.zero(carrier, degree + 1)
    reps, pos = _rotation_orbits(carrier, degree)
    eps = -1 if degree % 2 else 1

    def to_orbit(terms):
        out = {}
        for tok, c in terms.items():
            oid, j = pos[tok]
            _acc(out, oid, c * (eps ** j))
        return out

    key = (carrier, degree)
    cached = _ORBIT_SOLVERS.get(key)
    if cached is None:
        reps_up, _ = _rotation_orbits(carrier, degree + 1)
        solver = _IndexedSolver()
        for oid, rep in enumerate(reps_up):
            col = to_orbit(op_b(El(carrier, degree + 1, {rep: 1})).terms)
            if col:
                solver.add(oid, col)
        cached = (solver, reps_up)
        _ORBIT_SOLVERS[key] = cached
    solver, reps_up = cached

    combo = solver.express(to_orbit(rhs.terms))
    if combo is None:
        raise InfeasibleSystem(
            "no rotation/boundary split in degree %d" % (degree,),
            {"rank": solver.rank(), "rank_augmented": solver.rank() + 1,
             "degree": degree})
    v = El(carrier, degree + 1,
           {reps_up[oid]: c for oid, c in combo.items() if c})
    rem = rhs - op_b(v)
    # rem lies in the image of T: integrate along each orbit with
    # u_0 = 0, u_j = r_j + eps * u_{j-1}, checking closure at the wrap.
    per_orbit = {}
    for tok, c in rem.terms.items():
        oid, j = pos[tok]
        per_orbit.setdefault(oid, {})[j] = c
    u_terms = {}
    for oid, coeffs in per_orbit.items():
        tok = reps[oid]
        acc = 0
        for j in range(1, degree + 1):
            ((tok, _c),) = carrier.cycle(degree, tok).items()
            acc = coeffs.get(j, 0) + eps * acc
            if acc:
                u_terms[tok] = acc
        if coeffs.get(0, 0) + eps * acc != 0:
            raise InfeasibleSystem(
                "orbit closure failed in degree %d" % (degree,),
                {"rank": solver.rank(),
                 "rank_augmented": solver.rank() + 1,
                 "degree": degree})
    u = El(carrier, degree, u_terms)
    if op_T(u) + op_b(v) != rhs:
        raise AssertionError("rotation/boundary split failed verification")
    return u, v


def _sh2_boundary_rhs(p, q, sh, shp):
    """What the boundary of the (p, q) correction component has to be:
    the failure of the plain shuffles to intertwine the two
    differentials, assembled from components already built."""
    sgn = -1 if p % 2 else 1
    total = -op_B(sh[(p, q)])
    if p >= 1:
        total = total + _push_factor(shp[(p - 1, q)], 0, _op_value("b", p))
    if q >= 1:
        total = total + sgn * _push_factor(shp[(p, q - 1)], 1,
                                           _op_value("b", q))
    total = total + _push_factor(sh[(p + 1, q)], 0, _op_value("B", p))
    total = total + sgn * _push_factor(sh[(p, q + 1)], 1,
                                       _op_value("B", q))
    return total


def _sh2_alpha(p, q, shp):
    """Source term of the first-slot recursion, from components of
    total degree one less."""
    sgn = -1 if p % 2 else 1
    return (sgn * _push_factor(shp[(p - 1, q + 1)], 1, _op_value("B", q))
            + op_B(shp[(p - 1, q)]))


_SH2_CACHE = {}


def construct_sh2(n_max=3, cap=3):
    """Build the degree-raising shuffle correction on the models for
    all bidegrees of total degree <= n_max, by recursion over exact
    rational solves.

    Returns the components (as elements and as ModelElements), the
    plain shuffles, the recursion sources, the boundary targets, and
    per-component solver statistics.  Solver infeasibility anywhere is
    raised, never patched.
    """
    if n_max > cap:
        raise ValueError("total degree %d exceeds the cap %d"
                         % (n_max, cap))
    if n_max in _SH2_CACHE:
        return _SH2_CACHE[n_max]
    sh = {}
    for total in range(n_max + 2):
        for p in range(total + 1):
            sh[(p, total - p)] = _shuffle_element(p, total - p)
    shp = {}
    alphas = {}
    rhs = {}
    solves = []
    for total in range(n_max + 1):
        for p in range(total + 1):
            q = total - p
            target = _sh2_boundary_rhs(p, q, sh, shp)
            rhs[(p, q)] = target
            y = b_preimage(target)
            if p == 0:
                shp[(p, q)] = y
                solves.append({"bidegree": (p, q), "kind": "base",
                               "support": len(y.terms)})
                continue
            alpha = _sh2_alpha(p, q, shp)
            alphas[(p, q)] = alpha
            alpha0 = _push_factor(alpha, 0, _op_value("L", p))
            gamma = _push_factor(alpha0, 0, _op_value("BL", p))
            if q >= 1:
                sgn = -1 if p % 2 else 1
                beta0 = _push_factor(sgn * op_B(shp[(p, q - 1)]), 1,
                                     _op_value("L", q))
                gamma = gamma + _push_factor(
                    _push_factor(beta0, 0, _op_value("hTK", p)),
                    1, _op_value("BL", q))
            yprime = _push_factor(_push_factor(y, 0, _op_value("Th", p)),
                                  1, _op_value("Th", q))
            u, v = _split_rotation_boundary(yprime)
            comp = gamma + _push_factor(
                _push_factor(op_T(u), 0, _op_value("ThK", p)),
                1, _op_value("ThK", q))
            comp = comp + _push_factor(
                _push_factor(y, 0, _op_value("ThK", p)),
                1, _op_value("hN", q))
            comp = comp + _push_factor(y, 0, _op_value("hN", p))
            shp[(p, q)] = comp
            solves.append({"bidegree": (p, q), "kind": "recursion",
                           "support": len(comp.terms),
                           "split_support": (len(u.terms), len(v.terms))})
    result = {
        "n_max": n_max,
        "sh": sh,
        "components": shp,
        "sh2": {k: _el_to_model_element(v) for k, v in shp.items()},
        "alphas": alphas,
        "rhs": rhs,
        "solves": solves,
    }
    _SH2_CACHE[n_max] = result
    return result


def check_sh2_equations(result):
    """Verify the boundary equation and the three recursion identities
    on the models for every component built; returns one report per
    equation instance."""
    shp = result["components"]
    rhs = result["rhs"]
    checks = []
    for (p, q), comp in sorted(shp.items()):
        checks.append({"name": "boundary", "bidegree": (p, q),
                       "ok": op_b(comp) == rhs[(p, q)]})
    for (p, q), comp in sorted(shp.items()):
        if p < 1:
            continue
        lhs = _push_factor(comp, 0, _op_value("B", p - 1))
        alpha = result["alphas"].get((p, q), _sh2_alpha(p, q, shp))
        checks.append({"name": "first-slot recursion",
                       "bidegree": (p, q), "ok": lhs == alpha})
    for (p, q), comp in sorted(shp.items()):
        if p < 1 or q < 1:
            continue
        val = _push_factor(_push_factor(comp, 0, _op_value("T", p)),
                           1, _op_value("T", q))
        checks.append({"name": "rotation kernel", "bidegree": (p, q),
                       "ok": op_B(val).is_zero()})
    for (p, q), comp in sorted(shp.items()):
        if p < 1 or q < 1:
            continue
        lhs = _push_factor(_push_factor(comp, 1, _op_value("B", q - 1)),
                           0, _op_value("T", p))
        sgn = -1 if p % 2 else 1
        target = _push_factor(sgn * op_B(shp[(p, q - 1)]), 0,
                              _op_value("T", p))
        checks.append({"name": "second-slot recursion",
                       "bidegree": (p, q), "ok": lhs == target})
    return checks


def _join_monos(monos):
    """Entrywise concatenation of parallel factor monomials into one
    monomial over the joined signature."""
    length = len(monos[0])
    if any(len(m) != length for m in monos):
        raise ValueError("factor degrees differ")
    return tuple(sum((m[i] for m in monos), ()) for i in range(length))


def _eval_product_el(el, x, y):
    """Evaluate a product-model element on a pair of algebra chains by
    naturality, landing in chains over the joined signature."""
    p = el.carrier.left.m
    q = el.carrier.right.m
    if (x.degree, y.degree) != (p, q):
        raise ValueError("chain degrees do not match the model sizes")
    tags = tuple(x.tags) + tuple(y.tags)
    terms = {}
    for (ta, tb), c in el.terms.items():
        fa = CyclicMorphism.from_token(ta, p)
        fb = CyclicMorphism.from_token(tb, q)
        for mono_x, cx in x.terms.items():
            ia = _apply_morphism_mono(fa, mono_x)
            for mono_y, cy in y.terms.items():
                ib = _apply_morphism_mono(fb, mono_y)
                _acc(terms, _join_monos((ia, ib)), c * cx * cy)
    return Chain._raw(el.degree, tags, terms)


def sh2_on_chains(result, x, y):
    """Transport a constructed correction component to algebra chains
    and evaluate it on a pair."""
    comp = result["components"].get((x.degree, y.degree))
    if comp is None:
        raise ValueError("component %r not built"
                         % ((x.degree, y.degree),))
    return _eval_product_el(comp, x, y)


def check_sh2_transport(result):
    """Check on algebra chains that the transported components satisfy
    the coextension boundary identity, and that transported plain
    shuffles agree with the direct shuffle product."""
    shp = result["components"]
    sh = result["sh"]
    checks = []
    for (p, q) in sorted(shp):
        x = universal_chain(p, "a")
        y = universal_chain(q, "b")
        sgn = -1 if p % 2 else 1
        lhs = chain_b(_eval_product_el(shp[(p, q)], x, y))
        total = -1 * chain_B(_eval_product_el(sh[(p, q)], x, y))
        total = total + _eval_product_el(sh[(p + 1, q)], chain_B(x), y)
        total = total + sgn * _eval_product_el(sh[(p, q + 1)], x,
                                               chain_B(y))
        if p >= 1:
            total = total + _eval_product_el(shp[(p - 1, q)],
                                             chain_b(x), y)
        if q >= 1:
            total = total + sgn * _eval_product_el(shp[(p, q - 1)], x,
                                                   chain_b(y))
        checks.append({"name": "transported boundary",
                       "bidegree": (p, q), "ok": lhs == total})
        direct = shuffle_product(x, y)
        via_model = _eval_product_el(sh[(p, q)], x, y)
        checks.append({"name": "shuffle transport",
                       "bidegree": (p, q), "ok": direct == via_model})
    return checks


# ---------------------------------------------------------------------------
# The cyclic module where the averaging argument breaks down.
# ---------------------------------------------------------------------------


def _top_degeneracies(x, k):
    out = x
    for _ in range(k):
        out = el_degeneracy(out, out.degree)
    return out


def _lambda1_generators(top):
    """The two generator towers inside the free size-1 model, built up
    to degree ``top``."""
    car = ModelCarrier(1)
    one = El(car, 1, {car.identity_token(): 1})
    F = el_face(one, 0)
    G = el_face(one, 1)
    E = {0: one}
    for i in range(1, top):
        E[i] = el_degeneracy(E[i - 1], 0)
    f = {1: _top_degeneracies(F, 1) + el_cycle(_top_degeneracies(G, 1), 1)
            - one - el_cycle(one, 1)}
    e = {}
    for n in range(2, top + 1):
        w = _top_degeneracies(E[1], n - 2) - _top_degeneracies(E[0], n - 1)
        base = _top_degeneracies(E[0], n - 1)
        f[n] = _top_degeneracies(F, n) + el_cycle(w, n) - base
        partial = El.zero(car, n)
        for i in range(1, n + 1):
            # partial sums of rotations of w enter every tower element
            partial = partial + el_cycle(w, i - 1)
            if i == n:
                e[(n, n)] = _top_degeneracies(G, n) - partial - base
            elif i >= 2:
                e[(i, n)] = (_top_degeneracies(E[i], n - 1 - i)
                             - partial - base)
    return car, one, F, G, E, f, e


def _lambda1_e(e, i, n):
    if i <= 1:
        return El.zero(ModelCarrier(1), n)
    return e[(i, n)]


def counterexample_lambda1(max_degree=6):
    """Quotient the free size-1 cyclic model by the saturation of one
    forced-degenerate relation and certify that the extra-degeneracy
    homology refuses to vanish.

    Checks the closed generator equations in the free model, the
    dimension table of the quotient, that the bottom class is closed
    for the normalized extra degeneracy, and that it is not a
    combination of extra-degeneracy images and degenerates (exact rank
    certificate).
    """
    top = max_degree + 1
    car, one, F, G, E, f, e = _lambda1_generators(top)

    equations = []

    def eq(name, n, lhs, rhs):
        equations.append({"name": name, "degree": n, "ok": lhs == rhs})

    for n in range(1, top):
        eq("face bottom kills f", n, el_face(f[n], 0), El.zero(car, n - 1))
        eq("face top kills f", n, el_face(f[n], n), El.zero(car, n - 1))
        eq("degeneracy 0 on f", n, el_degeneracy(f[n], 0),
           f[n + 1] + el_cycle(_lambda1_e(e, 2, n + 1), n + 1))
        eq("top degeneracy on f", n, el_degeneracy(f[n], n),
           f[n + 1] + el_cycle(_lambda1_e(e, 2, n + 1), n))
        for j in range(1, n):
            eq("inner face on f", n, el_face(f[n], j), f[n - 1])
            eq("inner degeneracy on f", n, el_degeneracy(f[n], j),
               f[n + 1])
    for n in range(2, top):
        for i in range(2, n + 1):
            x = e[(i, n)]
            e2up = _lambda1_e(e, 2, n + 1)
            eq("degeneracy 0 on e", n, el_degeneracy(x, 0),
               _lambda1_e(e, i + 1, n + 1) - e2up)
            eq("face 0 on e", n, el_face(x, 0), _lambda1_e(e, i - 1, n - 1))
            for j in range(1, i):
                eq("low degeneracy on e", n, el_degeneracy(x, j),
                   _lambda1_e(e, i + 1, n + 1)
                   - el_cycle(e2up, j - 1) - el_cycle(e2up, j))
                eq("low face on e", n, el_face(x, j),
                   _lambda1_e(e, i - 1, n - 1) + el_cycle(f[n - 1], j))
            eq("diagonal degeneracy on e", n, el_degeneracy(x, i),
               _lambda1_e(e, i + 1, n + 1) - el_cycle(e2up, i - 1))
            eq("diagonal face on e", n, el_face(x, i),
               _lambda1_e(e, i - 1, n - 1))
            for j in range(i + 1, n + 1):
                eq("high degeneracy on e", n, el_degeneracy(x, j),
                   _lambda1_e(e, i + 1, n + 1))
                eq("high face on e", n, el_face(x, j),
                   _lambda1_e(e, i, n - 1))

    # the forced relation is one rotation of the degree-2 tower bottom
    y = op_r(one)
    y = y - el_degeneracy(el_face(y, 0), 0)
    y = y - el_degeneracy(el_face(y, 1), 1)
    relation_matches = (y == -1 * el_cycle(f[2], 1))

    relations = {}
    for n in range(1, max_degree + 1):
        vecs = [el_cycle(f[n], k).terms for k in range(n + 1)]
        for i in range(2, n + 1):
            vecs.extend(el_cycle(e[(i, n)], k).terms for k in range(n + 1))
        relations[n] = vecs
    quotient = QuotientCarrier(car, relations, max_degree)

    dims = {}
    relation_ranks = {}
    for n in range(max_degree + 1):
        dims[n] = len(quotient.basis(n))
        relation_ranks[n] = len(car.basis(n)) - dims[n]

    wrap = quotient.wrap
    class_E0 = wrap(one)
    col_rF = wrap(op_r(F))
    col_rG = wrap(op_r(G))
    col_sF = wrap(el_degeneracy(F, 0))
    col_sG = wrap(el_degeneracy(G, 0))
    twisted = wrap(one + el_cycle(one, 1))
    image_identities = (col_rF == twisted - col_sG
                        and col_rG == twisted - col_sF)
    solver = SpanSolver()
    for name, col in (("rF", col_rF), ("rG", col_rG),
                      ("sF", col_sF), ("sG", col_sG)):
        solver.add(name, col.terms)
    feasible = solver.express(class_E0.terms) is not None
    averaging = {
        "feasible": feasible,
        "rank": solver.rank,
        "rank_augmented": solver.rank + (0 if feasible else 1),
        "image_identities": image_identities,
    }

    r_on_E0 = op_r(one)
    r1_normalized_zero = not quotient.reduce_mod_degenerate(
        2, quotient.reduce(2, r_on_E0.terms))
    class_nonzero = bool(quotient.reduce_mod_degenerate(
        1, class_E0.terms))

    r_square = True
    for n in range(max_degree - 1):
        for tok in quotient.basis(n):
            x = El(quotient, n, {tok: 1})
            rx = op_r(x)
            if op_r(rx) != el_degeneracy(rx, 0):
                r_square = False

    return {
        "module": quotient,
        "dims": dims,
        "expected_dims": {n: 2 * (n + 1) for n in range(max_degree + 1)},
        "relation_ranks": relation_ranks,
        "expected_relation_ranks": {n: n * (n + 1)
                                    for n in range(max_degree + 1)},
        "equations": equations,
        "relation_matches": relation_matches,
        "averaging": averaging,
        "r1_normalized_zero": r1_normalized_zero,
        "class_nonzero": class_nonzero,
        "r_square": r_square,
    }


# ---------------------------------------------------------------------------
# No natural homotopy symmetrizes the correction's bottom layer.
# ---------------------------------------------------------------------------


def _universal_pair(p, q):
    return TensorChain.of_chains(universal_chain(p, "a"),
                                 universal_chain(q, "b"))


def _pair_value_on_tensor(fa, fb, t):
    """Apply a morphism pair to every matching-bidegree term of a
    two-factor tensor by plain substitution."""
    terms = {}
    for (ma, mb), c in t.terms.items():
        if len(ma) - 1 != fa.m or len(mb) - 1 != fb.m:
            continue
        _acc(terms,
             (_apply_morphism_mono(fa, ma), _apply_morphism_mono(fb, mb)),
             c)
    return TensorChain._raw(fa.n + fb.n, t.factors, terms)


def _nondegenerate_tokens(m, d):
    car = ModelCarrier(m)
    return [tok for tok in car.basis(d)
            if not car.token_degenerate(d, tok)]


def noncommutativity_obstruction():
    """Certify that no natural degree-one map, factorwise normalized
    in the target, can be a chain homotopy whose averaging boundary
    produces the correction's bottom value.

    The unknowns are factorwise-nondegenerate token pairs over the
    five lowest source bidegrees; the rows impose the chain-map
    constraints and the bottom equation.  Returns the block dimension
    table, the exact infeasibility certificate, and direct checks that
    the bottom value is what the correction produces.
    """
    sources = [("h00", 0, 0), ("h10", 1, 0), ("h01", 0, 1),
               ("h20", 2, 0), ("h02", 0, 2)]
    unknowns = []
    block_dims = {}
    for label, p, q in sources:
        count = 0
        n = p + q + 1
        for ptar in range(n, -1, -1):
            qtar = n - ptar
            for xtok in _nondegenerate_tokens(p, ptar):
                for ytok in _nondegenerate_tokens(q, qtar):
                    unknowns.append((label, p, q, xtok, ytok,
                                     ptar, qtar))
                    count += 1
        block_dims[label] = count

    u10 = _universal_pair(1, 0)
    u01 = _universal_pair(0, 1)
    u20 = _universal_pair(2, 0)
    u02 = _universal_pair(0, 2)
    u00 = _universal_pair(0, 0)
    b_u10 = tensor_b(u10)
    b_u01 = tensor_b(u01)
    b_u20 = tensor_b(u20)
    b_u02 = tensor_b(u02)
    B_u00 = tensor_B(u00)

    def add_rows(row, block, tensor):
        for key, c in normalize_tensor_chain(tensor).terms.items():
            _acc(row, (block, key), c)

    columns = []
    for label, p, q, xtok, ytok, ptar, qtar in unknowns:
        fa = CyclicMorphism.from_token(xtok, p)
        fb = CyclicMorphism.from_token(ytok, q)
        row = {}
        if label == "h00":
            add_rows(row, "A", _pair_value_on_tensor(fa, fb, b_u10))
            add_rows(row, "B", _pair_value_on_tensor(fa, fb, b_u01))
            add_rows(row, "E",
                     tensor_B(_pair_value_on_tensor(fa, fb, u00)))
        elif label == "h10":
            add_rows(row, "A",
                     tensor_b(_pair_value_on_tensor(fa, fb, u10)))
            add_rows(row, "C", _pair_value_on_tensor(fa, fb, b_u20))
            add_rows(row, "E", _pair_value_on_tensor(fa, fb, B_u00))
        elif label == "h01":
            add_rows(row, "B",
                     tensor_b(_pair_value_on_tensor(fa, fb, u01)))
            add_rows(row, "D", _pair_value_on_tensor(fa, fb, b_u02))
            add_rows(row, "E", _pair_value_on_tensor(fa, fb, B_u00))
        elif label == "h20":
            add_rows(row, "C",
                     tensor_b(_pair_value_on_tensor(fa, fb, u20)))
        else:
            add_rows(row, "D",
                     tensor_b(_pair_value_on_tensor(fa, fb, u02)))
        columns.append(((label, ptar, qtar, xtok, ytok), row))

    da = Chain._raw(1, ("a",), {(((),), ((0,),)): 1})
    db = Chain._raw(1, ("b",), {(((),), ((0,),)): 1})
    dadb = TensorChain.of_chains(da, db)
    rhs = {}
    for key, c in normalize_tensor_chain(dadb).terms.items():
        _acc(rhs, ("E", key), c)

    sol, cert = solve_columns(columns, rhs)

    bottom = normalize_chain(cyclic_shuffle_map(u00))
    aw_bottom = normalize_tensor_chain(alexander_whitney(bottom, 1))
    bottom_matches = aw_bottom == normalize_tensor_chain(dadb)

    kills = True
    pair_carrier = AlgebraChainsCarrier(("a", "b"))
    for n in range(1, 4):
        c = pair_carrier.unwrap(pair_carrier.generic_element(n))
        aw = alexander_whitney(phi_homotopy(c, 1), 1)
        if not normalize_tensor_chain(aw).is_zero():
            kills = False

    return {
        "block_dims": block_dims,
        "total_unknowns": len(unknowns),
        "feasible": sol is not None,
        "certificate": cert,
        "bottom_matches": bottom_matches,
        "normalized_aw_kills_homotopy": kills,
    }


# ---------------------------------------------------------------------------
# Associativity: strict for shuffles, up to homotopy for the correction.
# ---------------------------------------------------------------------------


def _tensor_b_multi(t):
    """Total boundary on a tensor of any arity, alternating the sign
    over the factors by their degrees."""
    terms = {}
    for monos, coeff in t.terms.items():
        sgn_prefix = 1
        for slot, mono in enumerate(monos):
            d = len(mono) - 1
            for i in range(d + 1 if d else 0):
                s = sgn_prefix * (-1 if i % 2 else 1)
                new = monos[:slot] + (mono_face(mono, i),) + monos[slot + 1:]
                _acc(terms, new, coeff * s)
            if d % 2:
                sgn_prefix = -sgn_prefix
    return TensorChain._raw(t.degree - 1, t.factors, terms)


def _assoc_defect(x, y, z):
    """The two-sided failure of the correction to associate with the
    plain shuffle, as a chain over the joined signature."""
    return (shuffle_product(cyclic_shuffle_product(x, y), z)
            + cyclic_shuffle_product(shuffle_product(x, y), z)
            - shuffle_product(x, cyclic_shuffle_product(y, z))
            - cyclic_shuffle_product(x, shuffle_product(y, z)))


def _assoc_defect_on_tensor(t):
    out = None
    for (ma, mb, mc), c in t.terms.items():
        x = Chain._raw(len(ma) - 1, ("a",), {ma: 1})
        y = Chain._raw(len(mb) - 1, ("b",), {mb: 1})
        z = Chain._raw(len(mc) - 1, ("c",), {mc: 1})
        piece = c * _assoc_defect(x, y, z)
        out = piece if out is None else out + piece
    if out is None:
        return Chain.zero(t.degree + 2, ("a", "b", "c"))
    return out


@lru_cache(maxsize=None)
def _degeneracy_directions(m, n, tok):
    """Directions in which a model token is a degeneracy image."""
    car = ModelCarrier(m)
    out = set()
    for j in range(n):
        ((dtok, dc),) = car.face(n, tok, j).items()
        if dc == 1 and car.degeneracy(n - 1, dtok, j) == {tok: 1}:
            out.add(j)
    return frozenset(out)


def _triple_unknowns(p, q, r):
    """Token triples whose joint image survives normalization: no
    common degeneracy direction."""
    n = p + q + r + 3
    toks_a = ModelCarrier(p).basis(n)
    toks_b = ModelCarrier(q).basis(n)
    toks_c = ModelCarrier(r).basis(n)
    out = []
    for xa in toks_a:
        da = _degeneracy_directions(p, n, xa)
        for xb in toks_b:
            shared = da & _degeneracy_directions(q, n, xb)
            if not shared:
                out.extend((xa, xb, xc) for xc in toks_c)
                continue
            for xc in toks_c:
                if not (shared & _degeneracy_directions(r, n, xc)):
                    out.append((xa, xb, xc))
    return out


def _triple_value_on_tensor(triple, sizes, t):
    """Apply a token triple to matching-bidegree terms of a
    three-factor tensor, joining into one chain."""
    fs = [CyclicMorphism.from_token(tok, m)
          for tok, m in zip(triple, sizes)]
    degree = fs[0].n
    terms = {}
    for monos, c in t.terms.items():
        if any(len(mono) - 1 != f.m for mono, f in zip(monos, fs)):
            continue
        images = [_apply_morphism_mono(f, mono)
                  for f, mono in zip(fs, monos)]
        _acc(terms, _join_monos(images), c)
    return Chain._raw(degree, ("a", "b", "c"), terms)


def _psi_on_tensor(psi, t):
    out = None
    for sizes, combo in psi.items():
        for triple, coeff in combo.items():
            piece = coeff * _triple_value_on_tensor(triple, sizes, t)
            out = piece if out is None else out + piece
    if out is None:
        return Chain.zero(t.degree + 3, ("a", "b", "c"))
    return out


def _universal_triple(p, q, r):
    return TensorChain.of_chains(universal_chain(p, "a"),
                                 universal_chain(q, "b"),
                                 universal_chain(r, "c"))


def associativity_certificates(total_degree_cap=3, strict_cap=None,
                               limit=3):
    """Certify strict associativity of the plain shuffle, strict
    coassociativity of its one-sided inverse, and produce a natural
    homotopy correcting the associativity defect of the degree-raising
    correction on totals up to the cap.

    The homotopy is solved degreewise from scratch and verified
    exactly; infeasibility would be raised, never patched.
    """
    if total_degree_cap > limit:
        raise ValueError("total degree %d exceeds the cap %d"
                         % (total_degree_cap, limit))
    if strict_cap is None:
        strict_cap = total_degree_cap + 1

    strict_sh = []
    for n in range(strict_cap + 1):
        for p in range(n + 1):
            for q in range(n - p + 1):
                r = n - p - q
                x = universal_chain(p, "a")
                y = universal_chain(q, "b")
                z = universal_chain(r, "c")
                ok = (triple_maps("sh_left", x, y, z)
                      == triple_maps("sh_right", x, y, z))
                strict_sh.append({"bidegree": (p, q, r), "ok": ok})

    triple_carrier = AlgebraChainsCarrier(("a", "b", "c"))
    strict_aw = []
    for n in range(strict_cap + 1):
        c = triple_carrier.unwrap(triple_carrier.generic_element(n))
        ok = triple_aw(c, "aw_left") == triple_aw(c, "aw_right")
        strict_aw.append({"degree": n, "ok": ok})

    closure = []
    psi = {}
    solves = []
    for n in range(total_degree_cap + 1):
        for key in sorted((p, q, n - p - q)
                          for p in range(n + 1)
                          for q in range(n - p + 1)):
            p, q, r = key
            t = _universal_triple(p, q, r)
            defect = normalize_chain(_assoc_defect_on_tensor(t))
            if n <= 2:
                lhs = normalize_chain(chain_b(_assoc_defect_on_tensor(t)))
                rhs = normalize_chain(
                    _assoc_defect_on_tensor(_tensor_b_multi(t)))
                closure.append({"bidegree": key, "ok": lhs == rhs})
            target = defect - normalize_chain(
                _psi_on_tensor(psi, _tensor_b_multi(t)))
            if target.is_zero():
                psi[key] = {}
                solves.append({"bidegree": key, "columns": 0,
                               "trivial": True})
                continue
            columns = []
            for triple in _triple_unknowns(p, q, r):
                val = normalize_chain(
                    chain_b(_triple_value_on_tensor(triple, key, t)))
                if not val.is_zero():
                    columns.append((triple, val.terms))
            sol, cert = solve_columns(columns, dict(target.terms))
            if sol is None:
                raise InfeasibleSystem(
                    "no associativity homotopy at %r" % (key,), cert)
            psi[key] = {trip: c for trip, c in sol.items() if c}
            solves.append({"bidegree": key, "columns": len(columns),
                           "rank": cert["rank"],
                           "support": len(psi[key])})

    witness = []
    for n in range(total_degree_cap + 1):
        for key in sorted((p, q, n - p - q)
                          for p in range(n + 1)
                          for q in range(n - p + 1)):
            t = _universal_triple(*key)
            lhs = (normalize_chain(chain_b(_psi_on_tensor(psi, t)))
                   + normalize_chain(
                       _psi_on_tensor(psi, _tensor_b_multi(t))))
            ok = lhs == normalize_chain(_assoc_defect_on_tensor(t))
            witness.append({"bidegree": key, "ok": ok})

    return {
        "strict_shuffle": strict_sh,
        "strict_coproduct": strict_aw,
        "b_closure": closure,
        "psi": psi,
        "witness": witness,
        "solves": solves,
        "caps": {"homotopy": total_degree_cap, "strict": strict_cap},
    }
