"""Sparse exact linear algebra over the rationals.

Vectors are dicts mapping hashable keys to nonzero int/Fraction
coefficients.  The one workhorse is an incremental row echelon with
combination tracking, which provides span membership, coordinate
expression, rank, and canonical (free-variables-zero) solutions of
sparse linear systems.
"""

from __future__ import annotations

from fractions import Fraction


def vec_add(u, v, scale=1):
    """u + scale*v, dropping zeros; does not mutate inputs."""
    out = dict(u)
    for k, c in v.items():
        s = out.get(k, 0) + scale * c
        if s == 0:
            out.pop(k, None)
        else:
            out[k] = s
    return out


def vec_scale(u, scale):
    if scale == 0:
        return {}
    return {k: scale * c for k, c in u.items()}


class SpanSolver:
    """Incremental echelon of named vectors with expression tracking.

    add(name, vec) inserts a vector into the span; express(vec) returns a
    dict of name -> coefficient reproducing vec exactly, or None when vec
    is outside the span.  Pivots are chosen as the minimal support key, so
    results are deterministic given insertion order.
    """

    def __init__(self):
        # pivot key -> (reduced vector with pivot coeff 1, combo dict)
        self._rows = {}

    @property
    def rank(self):
        return len(self._rows)

    def _reduce(self, vec, combo):
        vec = dict(vec)
        combo = dict(combo)
        while vec:
            pivot = min(vec)
            row = self._rows.get(pivot)
            if row is None:
                return vec, combo, pivot
            rvec, rcombo = row
            c = vec[pivot]
            for k, v in rvec.items():
                s = vec.get(k, 0) - c * v
                if s == 0:
                    vec.pop(k, None)
                else:
                    vec[k] = s
            for k, v in rcombo.items():
                s = combo.get(k, 0) - c * v
                if s == 0:
                    combo.pop(k, None)
                else:
                    combo[k] = s
        return vec, combo, None

    def add(self, name, vec):
        """Insert vec under the given name; returns True if it enlarged
        the span (was independent)."""
        vec, combo, pivot = self._reduce(vec, {name: -1})
        if pivot is None:
            return False
        inv = Fraction(1, 1) / vec[pivot]
        vec = {k: inv * c for k, c in vec.items()}
        combo = {k: inv * c for k, c in combo.items()}
        self._rows[pivot] = (vec, combo)
        return True

    def residual(self, vec):
        red, _, _ = self._reduce(vec, {})
        return red

    def contains(self, vec):
        return not self.residual(vec)

    def express(self, vec):
        """Coefficients writing vec in terms of the added vectors, or None.

        If add(name_i, v_i) were the insertions, a non-None result c
        satisfies vec = sum c[name_i] * v_i exactly (later-inserted
        dependent vectors never appear).
        """
        red, combo, _ = self._reduce(vec, {})
        if red:
            return None
        return {k: c for k, c in combo.items() if c != 0}


def solve_columns(columns, rhs):
    """Solve sum_j x_j * columns[j] = rhs exactly.

    columns: ordered dict/list of (unknown name, sparse vector).
    Returns (solution dict | None, certificate) where the certificate
    carries rank data and, on infeasibility, the irreducible residual.
    Free unknowns are set to zero (canonical echelon solution).
    """

    solver = SpanSolver()
    for name, col in columns:
        solver.add(name, col)
    rank_a = solver.rank
    sol = solver.express(rhs)
    if sol is None:
        residual = solver.residual(rhs)
        return None, {"rank": rank_a, "rank_augmented": rank_a + 1,
                      "residual": residual}
    return sol, {"rank": rank_a, "rank_augmented": rank_a}
