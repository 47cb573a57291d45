"""Permutohedron and Birkhoff-polytope oracles for the error bounds.

The trial-state errors are linear over the doubly stochastic matrices, so
their extrema under the constraint dE_w = delta live on the boundary of the
polytope.  Working on the permutohedra P(w) (rearrangements of the weights)
and P(E) (rearrangements of the energies) is enough for the ensemble-state
and eigenenergy errors.  For delta <= g the constraint plane only cuts edges
emanating from the zero-error reference vertices, which gives closed-form
slice vertices

    v_{k,l} = (1 - p) ref + p S_{k,l} ref,
    p = delta / [(w_k - w_l)(E_l - E_k)]  in (0, 1].

``constrained_extrema`` evaluates a linear target on exactly those points;
``brute_force_extrema`` re-derives the same extrema from a full vertex
enumeration without using any of the adjacency theory, as an independent
oracle.  ``cycle_bound_check`` verifies the cycle inequalities used to
control vertices far from the reference.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .core import (
    WEIGHT_TOL,
    as_energy_spectrum,
    as_weight_vector,
)
from .bounds import gap_functions
from .errors import (
    DimensionMismatchError,
    OutOfRegimeError,
    RangeError,
    ValidationError,
)

_MAX_ENUM_DIM = 8
_MAX_BRUTE_DIM = 6
_PLANE_TOL = 1e-12


@dataclass(frozen=True)
class Permutation:
    """Bijection pi on {0, ..., D-1}, stored as the image tuple mapping[i] = pi(i).

    Acting on a vector v gives the rearrangement v'[i] = v[pi(i)]; the
    associated matrix P (with P v = v') is a Birkhoff-polytope vertex.
    """

    mapping: Tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(i) for i in self.mapping)
        if sorted(m) != list(range(len(m))):
            raise ValidationError("mapping %r is not a bijection" % (self.mapping,))
        object.__setattr__(self, "mapping", m)

    @classmethod
    def from_cycle(cls, cycle: Sequence[int], dim: int) -> "Permutation":
        """Single cycle c_0 -> c_1 -> ... -> c_0 acting on dim indices."""
        m = list(range(dim))
        cyc = [int(c) for c in cycle]
        if len(set(cyc)) != len(cyc) or any(not 0 <= c < dim for c in cyc):
            raise ValidationError("invalid cycle %r for dimension %d" % (cycle, dim))
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            m[a] = b
        return cls(tuple(m))

    @property
    def dim(self) -> int:
        return len(self.mapping)

    @property
    def cycles(self) -> Tuple[Tuple[int, ...], ...]:
        """Non-trivial cycles, each starting at its smallest element."""
        seen, out = set(), []
        for start in range(self.dim):
            if start in seen:
                continue
            cyc, i = [], start
            while i not in seen:
                seen.add(i)
                cyc.append(i)
                i = self.mapping[i]
            if len(cyc) > 1:
                out.append(tuple(cyc))
        return tuple(out)

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.size != self.dim:
            raise DimensionMismatchError("vector length %d != %d" % (v.size, self.dim))
        return v[list(self.mapping)]

    def matrix(self) -> np.ndarray:
        return np.eye(self.dim)[list(self.mapping)]


@dataclass(frozen=True)
class SliceVertex:
    """One intersection of the constraint plane with a polytope edge."""

    vertex: np.ndarray
    reference: np.ndarray
    swap: Tuple[int, int]
    edge_error: float
    p: float


@dataclass(frozen=True)
class PermutohedronSlice:
    base: str
    delta: float
    intersection_vertices: Tuple[SliceVertex, ...]


@dataclass(frozen=True)
class VertexClassification:
    """Zero-error reference vertices and their positive-error edge neighbors."""

    base: str
    delta: float
    g: float
    references: Tuple[np.ndarray, ...]
    positives: Tuple[SliceVertex, ...]


@dataclass(frozen=True)
class CycleReport:
    delta_E_w: float
    L: int
    L_prime: int
    delta1: float
    delta2: float
    lower_bound: float
    upper_bound: float
    satisfied: bool


def permutohedron_vertices(v) -> list:
    """All distinct rearrangements of v, lexicographically sorted."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatchError("expected a 1-D vector")
    if v.size > _MAX_ENUM_DIM:
        raise RangeError(
            "enumeration capped at D=%d (got D=%d)" % (_MAX_ENUM_DIM, v.size)
        )
    distinct = sorted(set(itertools.permutations(v.tolist())))
    return [np.array(t) for t in distinct]


def _vertex_error(base: str, point: np.ndarray, warr: np.ndarray, earr: np.ndarray) -> float:
    # dE_w restricted to the permutohedron: over P(w) the point is the
    # shuffled weight vector, over P(E) the shuffled energy vector
    if base == "w":
        return float((point - warr) @ earr)
    return float(warr @ (point - earr))


def _references(base: str, warr: np.ndarray, earr: np.ndarray) -> list:
    if base == "w":
        return [warr.copy()]
    # over P(E): energies may be permuted freely within each block of equal
    # weights without changing dE_w
    blocks, start = [], 0
    for i in range(1, warr.size):
        if warr[start] - warr[i] > WEIGHT_TOL:
            blocks.append(range(start, i))
            start = i
    blocks.append(range(start, warr.size))
    count = 1
    for b in blocks:
        for n in range(2, len(b) + 1):
            count *= n
        if count > 40320:
            raise RangeError("too many reference vertices to enumerate")
    refs = []
    for arrangement in itertools.product(
        *(itertools.permutations(earr[list(b)].tolist()) for b in blocks)
    ):
        ref = np.empty_like(earr)
        for b, vals in zip(blocks, arrangement):
            ref[list(b)] = vals
        refs.append(ref)
    return refs


def _edge_neighbors(ref: np.ndarray):
    """True polytope edges at a vertex: swaps of positions holding values
    adjacent in the sorted distinct-value order."""
    order = np.sort(np.unique(ref))
    for lo, hi in zip(order[:-1], order[1:]):
        for i in np.flatnonzero(ref == hi):
            for j in np.flatnonzero(ref == lo):
                yield (int(min(i, j)), int(max(i, j)))


def _classify(w, E, delta: float, base: str) -> VertexClassification:
    wv = as_weight_vector(w)
    ev = as_energy_spectrum(E)
    if wv.dim != ev.dim:
        raise DimensionMismatchError("w and E dimensions differ")
    if base not in ("w", "E"):
        raise ValidationError("base must be 'w' or 'E', got %r" % (base,))
    gf = gap_functions(wv, ev)
    if not delta > 0:
        raise RangeError("delta must be positive, got %g" % delta)
    if delta > gf.g * (1 + 1e-12):
        raise OutOfRegimeError(
            "delta=%g exceeds the validity threshold g=%g" % (delta, gf.g)
        )
    warr, earr = wv.weights, ev.values
    scale = max(1.0, gf.G)
    positives = []
    refs = _references(base, warr, earr)
    for ref in refs:
        for i, j in _edge_neighbors(ref):
            nb = ref.copy()
            nb[[i, j]] = nb[[j, i]]
            err = _vertex_error(base, nb, warr, earr)
            if err <= _PLANE_TOL * scale:
                continue  # neighbor is itself a reference vertex
            positives.append(
                SliceVertex(
                    vertex=nb,
                    reference=ref,
                    swap=(i, j),
                    edge_error=err,
                    p=delta / err,
                )
            )
    return VertexClassification(
        base=base,
        delta=float(delta),
        g=gf.g,
        references=tuple(refs),
        positives=tuple(positives),
    )


def reference_and_positive_vertices(w, E, delta: float, base: str = "w") -> VertexClassification:
    """Classify permutohedron vertices around the constraint plane dE_w = delta.

    References carry zero error; positives are their edge neighbors together
    with the generating swap, the edge's vertex error, and the mixing
    parameter p = delta/error at which the plane cuts the edge.
    """
    return _classify(w, E, delta, base)


def _slice(w, E, delta: float, base: str) -> PermutohedronSlice:
    cls = _classify(w, E, delta, base)
    cuts = []
    for pos in cls.positives:
        v = (1.0 - pos.p) * pos.reference + pos.p * pos.vertex
        cuts.append(
            SliceVertex(
                vertex=v,
                reference=pos.reference,
                swap=pos.swap,
                edge_error=pos.edge_error,
                p=pos.p,
            )
        )
    return PermutohedronSlice(base=base, delta=float(delta), intersection_vertices=tuple(cuts))


def constraint_slice(w, E, delta: float, base: str = "w") -> PermutohedronSlice:
    """Intersection vertices of the plane dE_w = delta with the permutohedron
    over the chosen base vector ("w" or "E")."""
    return _slice(as_weight_vector(w), as_energy_spectrum(E), delta, base)


_E_TARGET = re.compile(r"^E_(\d+)$")


def _resolve_target(target, warr: np.ndarray, earr: np.ndarray, base: Optional[str]):
    """Map a target spec onto (base, evaluator over permutohedron points)."""
    if isinstance(target, str):
        if target == "rho":
            return "w", lambda pts: 2.0 * (warr @ warr - pts @ warr)
        m = _E_TARGET.match(target)
        if m:
            k = int(m.group(1))
            if not 0 <= k < earr.size:
                raise RangeError("target %r outside 0..%d" % (target, earr.size - 1))
            return "E", lambda pts: pts[:, k] - earr[k]
        raise ValidationError(
            "unknown target %r (expected 'rho', 'E_<k>', or coefficients)" % (target,)
        )
    coeffs = np.asarray(target, dtype=float)
    if coeffs.shape != warr.shape:
        raise DimensionMismatchError("coefficient vector has wrong length")
    base = base or "w"
    base_vec = warr if base == "w" else earr
    return base, lambda pts: (pts - base_vec) @ coeffs


def constrained_extrema(target, w, E, delta: float, base: Optional[str] = None) -> Tuple[float, float]:
    """Extrema of a linear target on the slice dE_w = delta of the relevant
    permutohedron, using the closed-form intersection vertices.

    ``target`` is "rho" (ensemble-state error, over P(w)), "E_<k>" (k-th
    eigenenergy error, over P(E)), or a coefficient vector c evaluated as
    c . (point - base vector) with ``base`` choosing the polytope.
    """
    wv = as_weight_vector(w)
    ev = as_energy_spectrum(E)
    base, evaluate = _resolve_target(target, wv.weights, ev.values, base)
    sl = _slice(wv, ev, delta, base)
    if not sl.intersection_vertices:
        raise OutOfRegimeError("constraint plane misses every reference edge")
    pts = np.array([sv.vertex for sv in sl.intersection_vertices])
    vals = evaluate(pts)
    return float(vals.min()), float(vals.max())


def brute_force_extrema(target, w, E, delta: float, base: Optional[str] = None) -> Tuple[float, float]:
    """Oracle twin of ``constrained_extrema`` by exhaustive enumeration.

    Enumerates every vertex of the permutohedron, intersects the constraint
    plane with every transposition chord, and evaluates the target on all
    intersection points and on-plane vertices.  No adjacency theory is used.
    """
    wv = as_weight_vector(w)
    ev = as_energy_spectrum(E)
    if wv.dim > _MAX_BRUTE_DIM:
        raise RangeError(
            "brute force capped at D=%d (got D=%d)" % (_MAX_BRUTE_DIM, wv.dim)
        )
    base, evaluate = _resolve_target(target, wv.weights, ev.values, base)
    base_vec = wv.weights if base == "w" else ev.values
    verts = permutohedron_vertices(base_vec)
    errors = np.array([_vertex_error(base, v, wv.weights, ev.values) for v in verts])
    scale = max(1.0, float(errors.max()))
    levels = np.unique(np.round(errors[errors > _PLANE_TOL * scale] / (1e-12 * scale)))
    if levels.size == 0:
        raise OutOfRegimeError("no positive vertex error; constraint plane is empty")
    cap = (levels[1] if levels.size > 1 else levels[0]) * 1e-12 * scale
    if not 0 < delta <= cap * (1 + 1e-9):
        raise OutOfRegimeError(
            "delta=%g outside the full-enumeration regime (0, %g]" % (delta, cap)
        )
    index = {tuple(v.tolist()): a for a, v in enumerate(verts)}
    points = [v for v, e in zip(verts, errors) if abs(e - delta) <= _PLANE_TOL * scale]
    for a, va in enumerate(verts):
        ea = errors[a]
        for i in range(va.size):
            for j in range(i + 1, va.size):
                if va[i] == va[j]:
                    continue
                vb = va.copy()
                vb[[i, j]] = vb[[j, i]]
                b = index[tuple(vb.tolist())]
                if b <= a:
                    continue
                eb = errors[b]
                if (ea - delta) * (eb - delta) < 0:
                    p = (delta - ea) / (eb - ea)
                    points.append((1.0 - p) * va + p * vb)
    if not points:
        raise OutOfRegimeError("constraint plane misses the polytope")
    vals = evaluate(np.array(points))
    return float(vals.min()), float(vals.max())


def gok_minimum_check(w, E) -> float:
    """Minimum of w . (rearranged E) over all D! rearrangements.

    For descending w and ascending E this must equal the aligned pairing
    w . E; the weights are taken as given (not re-sorted) so a misordered w
    exposes itself by beating its own aligned value.
    """
    warr = w.weights if hasattr(w, "weights") else np.asarray(w, dtype=float)
    earr = E.values if hasattr(E, "values") else np.asarray(E, dtype=float)
    if warr.shape != earr.shape or warr.ndim != 1:
        raise DimensionMismatchError("w and E must be 1-D vectors of equal length")
    if warr.size > _MAX_ENUM_DIM:
        raise RangeError("enumeration capped at D=%d" % _MAX_ENUM_DIM)
    table = np.array(list(itertools.permutations(earr.tolist())))
    return float((table @ warr).min())


def cycle_bound_check(cycle: Union[Permutation, Sequence[int]], w, E) -> CycleReport:
    """Check the cycle inequalities for a vertex S_L x (reference part).

    The permutation may contain one cycle touching positive weights (the
    L-cycle under test) plus any number of cycles moving only zero weights.
    The positive weights moved must be pairwise distinct.  Verifies

        lower(L', delta1, delta2)  <=  dE_w(S_L)  <=  min(L', floor(L/2)) G

    where L' counts the positive weights moved, delta1 is the smallest
    in-head exchange cost and delta2 the smallest head-tail exchange cost.
    """
    if not isinstance(cycle, Permutation):
        cycle = Permutation(tuple(cycle))
    wv = as_weight_vector(w)
    ev = as_energy_spectrum(E)
    if cycle.dim != wv.dim or wv.dim != ev.dim:
        raise DimensionMismatchError("cycle, w and E dimensions differ")
    warr, earr = wv.weights, ev.values
    K = wv.K

    pos_cycles = [
        c for c in cycle.cycles if any(warr[i] > WEIGHT_TOL for i in c)
    ]
    if len(pos_cycles) > 1:
        raise ValidationError(
            "%d cycles touch positive weights; at most one is allowed"
            % len(pos_cycles)
        )
    if pos_cycles:
        main = pos_cycles[0]
    else:
        main = max(cycle.cycles, key=len, default=())
    L = max(len(main), 1)
    moved_pos = np.array(sorted(warr[i] for i in main if warr[i] > WEIGHT_TOL))
    if moved_pos.size > 1 and np.any(np.diff(moved_pos) <= WEIGHT_TOL):
        raise ValidationError("positive weights moved by the cycle must be distinct")
    L_prime = int(moved_pos.size)

    delta_E_w = float((cycle.apply(warr) - warr) @ earr)
    gaps = ev.gaps
    mu = wv.mu[:-1]
    t_head = mu[: K - 1] * gaps[: K - 1]
    delta1 = float(t_head.min()) if K >= 2 else np.inf
    delta2 = float(warr[K - 1] * gaps[K - 1]) if K < wv.dim else np.inf
    G = float((warr[0] - warr[-1]) * ev.spread)

    if L_prime == 0:
        lower = 0.0
    elif delta1 <= 2.0 * delta2 and L_prime > 1:
        lower = (L_prime - 1) * delta1
    else:
        lower = (2 * L_prime - 1) * delta2
    upper = min(L_prime, L // 2) * G
    ok = (lower - 1e-10) <= delta_E_w <= (upper + 1e-10)
    return CycleReport(
        delta_E_w=delta_E_w,
        L=L,
        L_prime=L_prime,
        delta1=delta1,
        delta2=delta2,
        lower_bound=lower,
        upper_bound=upper,
        satisfied=bool(ok),
    )
