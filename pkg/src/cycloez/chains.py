"""Sparse exact-rational chains over free algebras and products of them.

A degree-n chain is a finite rational combination of monomials.  A monomial
is a tuple of n+1 entries (position 0 is the coefficient slot, positions
1..n are the differential-form slots of m_0 dm_1 ... dm_n).  An entry is one
word per algebra factor; a word is a tuple of generator indices, the unit
being the empty tuple.  Coefficients are ints or fractions.Fraction, never
floats.
"""

from __future__ import annotations

from fractions import Fraction

TAGS = ("a", "b", "c")

# Word = tuple[int, ...]; Entry = tuple[Word, ...]; Monomial = tuple[Entry, ...]

UNIT_WORD: tuple = ()


def unit_entry(arity):
    return ((),) * arity


def entry_is_unit(entry):
    return all(w == () for w in entry)


def entry_mul(x, y):
    """Factorwise concatenation (product in the tensor algebra)."""
    return tuple(xw + yw for xw, yw in zip(x, y))


def mono_degree(mono):
    return len(mono) - 1


def mono_face(mono, i):
    """Face d_i: multiply entries i and i+1; the top face wraps the last
    entry into position 0 (cyclic bar construction)."""
    n = len(mono) - 1
    if not 0 <= i <= n:
        raise IndexError(f"face index {i} out of range for degree {n}")
    if n == 0:
        raise IndexError("no faces in degree 0")
    if i < n:
        return mono[:i] + (entry_mul(mono[i], mono[i + 1]),) + mono[i + 2:]
    return (entry_mul(mono[n], mono[0]),) + mono[1:n]


def mono_degeneracy(mono, j):
    """Degeneracy s_j: insert a unit entry directly after position j."""
    n = len(mono) - 1
    if not 0 <= j <= n:
        raise IndexError(f"degeneracy index {j} out of range for degree {n}")
    return mono[:j + 1] + (unit_entry(len(mono[0])),) + mono[j + 1:]


def mono_cycle(mono):
    """Cyclic rotation t: (m_0, ..., m_n) -> (m_n, m_0, ..., m_{n-1})."""
    return mono[-1:] + mono[:-1]


def mono_is_degenerate(mono):
    """A monomial is degenerate iff some entry at a position >= 1 is the unit."""
    unit = ((),) * len(mono[0])
    for e in mono[1:]:
        if e == unit:
            return True
    return False


def _coerce_coeff(c):
    if isinstance(c, (int, Fraction)):
        return c
    raise TypeError(f"coefficient must be int or Fraction, got {type(c).__name__}")


class Chain:
    """Finite rational combination of same-degree monomials over one signature.

    ``tags`` names the algebra factors, e.g. ("a",) for one free algebra or
    ("a", "b") for a tensor product of two.  ``terms`` maps monomials to
    nonzero coefficients.  Instances are treated as immutable.
    """

    __slots__ = ("degree", "tags", "terms", "normalized")

    def __init__(self, degree, tags, terms=None, normalized=False):
        self.degree = degree
        self.tags = tuple(tags)
        clean = {}
        if terms:
            for mono, coeff in terms.items():
                coeff = _coerce_coeff(coeff)
                if coeff == 0:
                    continue
                if len(mono) != degree + 1:
                    raise ValueError(
                        f"monomial of degree {len(mono) - 1} in degree-{degree} chain")
                if any(len(e) != len(self.tags) for e in mono):
                    raise ValueError("entry arity does not match chain signature")
                clean[mono] = coeff
        self.terms = clean
        self.normalized = normalized

    @classmethod
    def _raw(cls, degree, tags, terms, normalized=False):
        """Unvalidated constructor for internal maps whose outputs are
        well-formed by construction (no zero coefficients, degrees match)."""
        self = object.__new__(cls)
        self.degree = degree
        self.tags = tags
        self.terms = terms
        self.normalized = normalized
        return self

    @classmethod
    def zero(cls, degree, tags, normalized=False):
        return cls(degree, tags, {}, normalized)

    @classmethod
    def of(cls, mono, coeff=1, tags=None, normalized=False):
        if tags is None:
            tags = TAGS[:len(mono[0])]
        return cls(len(mono) - 1, tags, {tuple(mono): coeff}, normalized)

    def is_zero(self):
        return not self.terms

    def _compatible(self, other):
        if self.degree != other.degree or self.tags != other.tags:
            raise ValueError(
                f"chain mismatch: degree {self.degree}/{other.degree}, "
                f"tags {self.tags}/{other.tags}")

    def __add__(self, other):
        self._compatible(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            s = terms.get(mono, 0) + c
            if s == 0:
                terms.pop(mono, None)
            else:
                terms[mono] = s
        return Chain._raw(self.degree, self.tags, terms,
                          self.normalized and other.normalized)

    def __sub__(self, other):
        return self + (-1) * other

    def __neg__(self):
        return (-1) * self

    def __rmul__(self, scalar):
        scalar = _coerce_coeff(scalar)
        if scalar == 0:
            return Chain.zero(self.degree, self.tags, self.normalized)
        return Chain._raw(self.degree, self.tags,
                          {m: scalar * c for m, c in self.terms.items()},
                          self.normalized)

    def __eq__(self, other):
        if not isinstance(other, Chain):
            return NotImplemented
        return (self.degree == other.degree and self.tags == other.tags
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.degree, self.tags, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Chain({format_chain(self)!r})"

    def sorted_terms(self):
        return sorted(self.terms.items())

    def map_monomials(self, fn):
        """Linear extension of a monomial -> sparse {monomial: coeff} map."""
        out = {}
        for mono, c in self.terms.items():
            for m2, c2 in fn(mono).items():
                s = out.get(m2, 0) + c * c2
                if s == 0:
                    out.pop(m2, None)
                else:
                    out[m2] = s
        return out


def normalize_chain(c):
    """Drop every monomial with a unit entry in a position >= 1; idempotent."""
    terms = {m: v for m, v in c.terms.items() if not mono_is_degenerate(m)}
    return Chain._raw(c.degree, c.tags, terms, normalized=True)


def chain_l1_norm(c):
    """Sum of absolute values of the coefficients (exact rational)."""
    total = Fraction(0)
    for v in c.terms.values():
        total += abs(v)
    return total


# ---------------------------------------------------------------------------
# Text grammar.
#
#   letter   = tag index              (a0, b3, c12)
#   word     = letter ("." letter)*   or "1"
#   entry    = word ("*" word)*       (factors in order; trailing units may
#                                      be omitted; untagged "." form assigns
#                                      letters to factors by tag)
#   monomial = "[" entry ("," entry)* "]"
#   term     = [rational "*"] monomial
#   chain    = ["-"] term (("+"|"-") term)*   or "0"
#
# Canonical output writes each entry as the factor words concatenated in
# factor order joined by ".", sorts monomials, and reduces rationals.
# ---------------------------------------------------------------------------


class ChainParseError(ValueError):
    def __init__(self, message, pos):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


def _parse_word(text, base, tags, strict_tag=None):
    """Parse a dotted word; returns per-factor letter lists."""
    per_factor = [[] for _ in tags]
    if text.strip() == "1":
        return per_factor
    offset = 0
    for piece in text.split("."):
        piece_stripped = piece.strip()
        pos = base + offset
        offset += len(piece) + 1
        if not piece_stripped:
            raise ChainParseError("empty letter", pos)
        tag = piece_stripped[0]
        if strict_tag is not None and tag != strict_tag:
            raise ChainParseError(
                f"letter {piece_stripped!r} does not belong to factor {strict_tag!r}", pos)
        if tag not in tags:
            raise ChainParseError(
                f"letter {piece_stripped!r} has unknown alphabet for signature {tags}", pos)
        digits = piece_stripped[1:]
        if not digits.isdigit():
            raise ChainParseError(f"bad letter {piece_stripped!r}", pos)
        per_factor[tags.index(tag)].append(int(digits))
    return per_factor


def _parse_entry(text, base, tags):
    if "*" in text:
        parts = text.split("*")
        if len(parts) > len(tags):
            raise ChainParseError(
                f"{len(parts)} factor words for arity {len(tags)}", base)
        per_factor = [[] for _ in tags]
        offset = 0
        for k, part in enumerate(parts):
            got = _parse_word(part, base + offset, tags, strict_tag=tags[k])
            per_factor[k] = got[k]
            offset += len(part) + 1
        return tuple(tuple(w) for w in per_factor)
    per_factor = _parse_word(text, base, tags)
    return tuple(tuple(w) for w in per_factor)


def _parse_monomial(text, base, tags):
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ChainParseError("expected [...] monomial", base)
    inner = body[1:-1]
    entries = []
    offset = base + text.index("[") + 1
    for piece in inner.split(","):
        entries.append(_parse_entry(piece, offset, tags))
        offset += len(piece) + 1
    return tuple(entries)


def _split_terms(text):
    """Split a chain expression on top-level + and -, keeping signs."""
    terms = []
    sign = 1
    start = 0
    i = 0
    # leading sign
    while i < len(text) and text[i] in " \t":
        i += 1
    if i < len(text) and text[i] in "+-":
        sign = -1 if text[i] == "-" else 1
        i += 1
        start = i
    depth = 0
    for j in range(i, len(text)):
        ch = text[j]
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch in "+-" and depth == 0:
            # not part of a rational like 1/2; signs only appear between terms
            terms.append((sign, text[start:j], start))
            sign = -1 if ch == "-" else 1
            start = j + 1
    terms.append((sign, text[start:], start))
    return terms


def _parse_coeff(text, base):
    body = text.strip()
    if not body:
        return 1
    if "/" in body:
        num, _, den = body.partition("/")
        try:
            return Fraction(int(num.strip()), int(den.strip()))
        except (ValueError, ZeroDivisionError):
            raise ChainParseError(f"bad rational {body!r}", base) from None
    try:
        return int(body)
    except ValueError:
        raise ChainParseError(f"bad coefficient {body!r}", base) from None


def _infer_tags(text):
    present = {ch for ch in text if ch in TAGS}
    tags = tuple(t for t in TAGS if t in present)
    return tags if tags else ("a",)


def parse_chain(text, tags=None):
    """Parse the ASCII chain grammar; ``tags`` fixes the signature, otherwise
    it is inferred from the letters present."""
    if tags is None:
        tags = _infer_tags(text)
    tags = tuple(tags)
    stripped = text.strip()
    if not stripped:
        raise ChainParseError("empty chain text", 0)
    if stripped == "0":
        raise ChainParseError(
            "the zero chain has no degree; supply an explicit monomial", 0)
    terms = {}
    degree = None
    for sign, body, base in _split_terms(text):
        if not body.strip():
            raise ChainParseError("empty term", base)
        if "[" not in body:
            raise ChainParseError("term has no [...] monomial", base)
        head, _, _ = body.partition("[")
        coeff_text = head.strip()
        if coeff_text.endswith("*"):
            coeff_text = coeff_text[:-1]
        elif coeff_text:
            raise ChainParseError("expected '*' between coefficient and monomial", base)
        coeff = sign * _parse_coeff(coeff_text, base)
        mono = _parse_monomial(body[body.index("["):], base + body.index("["), tags)
        if degree is None:
            degree = len(mono) - 1
        elif len(mono) - 1 != degree:
            raise ChainParseError(
                f"degree mismatch: {len(mono) - 1} vs {degree}", base)
        s = terms.get(mono, 0) + coeff
        if s == 0:
            terms.pop(mono, None)
        else:
            terms[mono] = s
    return Chain(degree, tags, terms)


def _format_entry(entry, tags):
    letters = []
    for tag, word in zip(tags, entry):
        letters.extend(f"{tag}{i}" for i in word)
    return ".".join(letters) if letters else "1"


def format_monomial(mono, tags):
    return "[" + ", ".join(_format_entry(e, tags) for e in mono) + "]"


def _format_coeff(c):
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_chain(c):
    """Deterministic canonical text; equal chains format byte-identically."""
    if c.is_zero():
        return "0"
    pieces = []
    for mono, coeff in c.sorted_terms():
        mag = abs(Fraction(coeff))
        body = format_monomial(mono, c.tags)
        if mag != 1:
            body = f"{_format_coeff(mag)}*{body}"
        if not pieces:
            pieces.append(body if coeff > 0 else f"-{body}")
        else:
            pieces.append(("+ " if coeff > 0 else "- ") + body)
    return " ".join(pieces)


# ---------------------------------------------------------------------------
# Tensors of chain complexes (Koszul signs live here).
# ---------------------------------------------------------------------------


class TensorChain:
    """Element of a tensor product of chain complexes (arity 2 or 3).

    ``factors`` is a tuple of per-factor signatures (tag tuples); ``terms``
    maps tuples of monomials (one per factor, degrees summing to the total
    degree) to coefficients.  A bidegree-(p,q) pair x_p (x) y_q is the key
    (mono_x, mono_y).
    """

    __slots__ = ("degree", "factors", "terms", "normalized")

    def __init__(self, degree, factors, terms=None, normalized=False):
        self.degree = degree
        self.factors = tuple(tuple(f) for f in factors)
        clean = {}
        if terms:
            for key, coeff in terms.items():
                coeff = _coerce_coeff(coeff)
                if coeff == 0:
                    continue
                if len(key) != len(self.factors):
                    raise ValueError("tensor key arity mismatch")
                if sum(len(m) - 1 for m in key) != degree:
                    raise ValueError("tensor key degrees do not sum to total degree")
                clean[key] = coeff
        self.terms = clean
        self.normalized = normalized

    @classmethod
    def _raw(cls, degree, factors, terms, normalized=False):
        """Unvalidated constructor, see Chain._raw."""
        self = object.__new__(cls)
        self.degree = degree
        self.factors = factors
        self.terms = terms
        self.normalized = normalized
        return self

    @classmethod
    def zero(cls, degree, factors, normalized=False):
        return cls(degree, factors, {}, normalized)

    @classmethod
    def of_chains(cls, *chains):
        """Tensor product of homogeneous chains, one per factor."""
        factors = tuple(c.tags for c in chains)
        degree = sum(c.degree for c in chains)
        out = {}
        normalized = all(c.normalized for c in chains)

        def rec(idx, key, coeff):
            if idx == len(chains):
                s = out.get(key, 0) + coeff
                if s == 0:
                    out.pop(key, None)
                else:
                    out[key] = s
                return
            for mono, c in chains[idx].terms.items():
                rec(idx + 1, key + (mono,), coeff * c)

        rec(0, (), 1)
        return cls._raw(degree, factors, out, normalized)

    def is_zero(self):
        return not self.terms

    def _compatible(self, other):
        if self.degree != other.degree or self.factors != other.factors:
            raise ValueError("tensor chain mismatch")

    def __add__(self, other):
        self._compatible(other)
        terms = dict(self.terms)
        for key, c in other.terms.items():
            s = terms.get(key, 0) + c
            if s == 0:
                terms.pop(key, None)
            else:
                terms[key] = s
        return TensorChain._raw(self.degree, self.factors, terms,
                                self.normalized and other.normalized)

    def __sub__(self, other):
        return self + (-1) * other

    def __neg__(self):
        return (-1) * self

    def __rmul__(self, scalar):
        scalar = _coerce_coeff(scalar)
        if scalar == 0:
            return TensorChain.zero(self.degree, self.factors, self.normalized)
        return TensorChain._raw(self.degree, self.factors,
                                {k: scalar * c for k, c in self.terms.items()},
                                self.normalized)

    def __eq__(self, other):
        if not isinstance(other, TensorChain):
            return NotImplemented
        return (self.degree == other.degree and self.factors == other.factors
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.degree, self.factors, frozenset(self.terms.items())))

    def __repr__(self):
        return f"TensorChain({format_tensor_chain(self)!r})"

    def sorted_terms(self):
        return sorted(self.terms.items())

    def bidegrees(self):
        """Sorted list of degree vectors present in the support."""
        return sorted({tuple(len(m) - 1 for m in key) for key in self.terms})

    def component(self, bidegree):
        """Sub-sum of terms with the given degree vector."""
        terms = {k: c for k, c in self.terms.items()
                 if tuple(len(m) - 1 for m in k) == tuple(bidegree)}
        return TensorChain(self.degree, self.factors, terms, self.normalized)

    def map_keys(self, fn):
        """Linear extension of a key -> sparse {key: coeff} map (same degree)."""
        out = {}
        for key, c in self.terms.items():
            for k2, c2 in fn(key).items():
                s = out.get(k2, 0) + c * c2
                if s == 0:
                    out.pop(k2, None)
                else:
                    out[k2] = s
        return out


def normalize_tensor_chain(x):
    """Kill keys in which any factor monomial is degenerate."""
    terms = {k: c for k, c in x.terms.items()
             if not any(mono_is_degenerate(m) for m in k)}
    return TensorChain._raw(x.degree, x.factors, terms, normalized=True)


def tensor_l1_norm(x):
    total = Fraction(0)
    for v in x.terms.values():
        total += abs(v)
    return total


def koszul_swap(x):
    """sigma(x_p (x) y_q) = (-1)^{pq} y_q (x) x_p on arity-2 tensor chains."""
    if len(x.factors) != 2:
        raise ValueError("koszul_swap needs an arity-2 tensor chain")
    terms = {}
    for (mx, my), c in x.terms.items():
        p, q = len(mx) - 1, len(my) - 1
        sgn = -1 if (p * q) % 2 else 1
        key = (my, mx)
        terms[key] = terms.get(key, 0) + sgn * c
    return TensorChain(x.degree, (x.factors[1], x.factors[0]),
                       {k: v for k, v in terms.items() if v != 0}, x.normalized)


def format_tensor_chain(x):
    if x.is_zero():
        return "0"
    pieces = []
    for key, coeff in x.sorted_terms():
        mag = abs(Fraction(coeff))
        body = " @ ".join(format_monomial(m, f) for m, f in zip(key, x.factors))
        if mag != 1:
            body = f"{_format_coeff(mag)}*{body}"
        if not pieces:
            pieces.append(body if coeff > 0 else f"-{body}")
        else:
            pieces.append(("+ " if coeff > 0 else "- ") + body)
    return " ".join(pieces)


def parse_tensor_chain(text, factors=None):
    """Parse sums of tensor terms "[...] @ [...]", one monomial per factor,
    with an optional rational coefficient before the first factor."""
    if factors is None:
        factors = (("a",), ("b",))
    factors = tuple(tuple(f) for f in factors)
    if not text.strip():
        raise ChainParseError("empty tensor chain text", 0)
    terms = {}
    degree = None
    for sign, body, base in _split_terms(text):
        pieces = body.split("@")
        if len(pieces) != len(factors):
            raise ChainParseError(
                f"{len(pieces)} tensor factors for arity {len(factors)}", base)
        coeff = sign
        key = []
        offset = 0
        for k, piece in enumerate(pieces):
            if "[" not in piece:
                raise ChainParseError("tensor factor has no [...] monomial",
                                      base + offset)
            head, _, _ = piece.partition("[")
            head_text = head.strip()
            if k == 0 and head_text:
                if not head_text.endswith("*"):
                    raise ChainParseError(
                        "expected '*' between coefficient and monomial", base)
                coeff = coeff * _parse_coeff(head_text[:-1], base)
            elif head_text:
                raise ChainParseError("unexpected text before tensor factor",
                                      base + offset)
            bracket = piece.index("[")
            key.append(_parse_monomial(piece[bracket:], base + offset + bracket,
                                       factors[k]))
            offset += len(piece) + 1
        key = tuple(key)
        d = sum(len(m) - 1 for m in key)
        if degree is None:
            degree = d
        elif d != degree:
            raise ChainParseError(f"degree mismatch: {d} vs {degree}", base)
        s = terms.get(key, 0) + coeff
        if s == 0:
            terms.pop(key, None)
        else:
            terms[key] = s
    return TensorChain(degree, factors, terms)


class GradedChain:
    """Finite family of chains indexed by degree (at most one per degree)."""

    __slots__ = ("tags", "components")

    def __init__(self, tags, components=None):
        self.tags = tuple(tags)
        self.components = {}
        if components:
            for n, c in components.items():
                if c.degree != n or c.tags != self.tags:
                    raise ValueError("graded component mismatch")
                if not c.is_zero():
                    self.components[n] = c

    def __add__(self, other):
        if self.tags != other.tags:
            raise ValueError("graded chain mismatch")
        out = dict(self.components)
        for n, c in other.components.items():
            s = out[n] + c if n in out else c
            if s.is_zero():
                out.pop(n, None)
            else:
                out[n] = s
        return GradedChain(self.tags, out)

    def __rmul__(self, scalar):
        return GradedChain(self.tags,
                           {n: scalar * c for n, c in self.components.items()})

    def degrees(self):
        return sorted(self.components)
