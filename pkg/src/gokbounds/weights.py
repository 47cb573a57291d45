"""Optimal ensemble weights minimizing the upper-bound prefactors.

Six closed-form generators cover the targets "k-th eigenenergy", "all
eigenenergies", "lowest K eigenenergies" and the three eigenstate
counterparts.  ``grid_search_optimal`` minimizes the same prefactors by
dense enumeration over the simplex

    mu_l >= 0,   sum_l (l+1) mu_l = 1,

where mu_l = w_l - w_{l+1} (mu_{D-1} = w_{D-1}) parameterizes the weight
gaps; it serves as an independent oracle for every closed form.
"""

from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np

from .core import WeightVector, as_energy_spectrum
from .errors import DimensionMismatchError, RangeError, ValidationError

_GRID_POINT_CAP = 600_000_000


def _normalized(raw: np.ndarray) -> WeightVector:
    return WeightVector(raw / raw.sum())


def optimal_weights_single_energy(k: int, D: int) -> WeightVector:
    """w = (2, ..., 2 [k times], 1, 0, ..., 0) / (2k+1); the unique weight
    vector whose |dE_k| prefactor reaches the optimum 2k+1."""
    if not 0 <= k <= D - 2:
        raise RangeError("k=%d outside 0..%d" % (k, D - 2))
    raw = np.zeros(D)
    raw[:k] = 2.0
    raw[k] = 1.0
    return _normalized(raw)


def optimal_weights_all_energies(D: int) -> WeightVector:
    """Equal weight gaps, w = 2/(D(D-1)) * (D-1, ..., 1, 0); optimal for the
    summed eigenenergy errors with bound D(D-1)."""
    if D < 2:
        raise RangeError("need D >= 2, got %d" % D)
    return _normalized(np.arange(D - 1, -1, -1, dtype=float))


def optimal_weights_lowest_K_energies(K: int, D: int) -> WeightVector:
    """w = (2K-1, 2K-3, ..., 1, 0, ..., 0) / K^2; optimal for the summed
    errors of the K lowest eigenenergies with bound K^2."""
    if not 0 < K < D - 1:
        raise RangeError("K=%d outside 1..%d" % (K, D - 2))
    raw = np.zeros(D)
    raw[:K] = np.arange(2 * K - 1, 0, -2, dtype=float)
    return _normalized(raw)


def optimal_weights_single_state(k: int, E) -> WeightVector:
    """Optimal weights for the k-th eigenstate infidelity.

    With r_pm = 1/|E_k - E_{k pm 1}| the first k entries are r_- + r_+
    followed by one entry r_+ and zeros; the achieved bound is
    k (r_- + r_+) + r_+.  The topmost state k = D-1 has no upper neighbor
    and is rejected; k = 0 degenerates to the pure-state limit (1, 0, ...).
    """
    ev = as_energy_spectrum(E)
    D = ev.dim
    if not 0 <= k <= D - 2:
        raise RangeError("k=%d outside 0..%d" % (k, D - 2))
    r_plus = 1.0 / float(ev.values[k + 1] - ev.values[k])
    raw = np.zeros(D)
    if k > 0:
        r_minus = 1.0 / float(ev.values[k] - ev.values[k - 1])
        raw[:k] = r_minus + r_plus
    raw[k] = r_plus
    return _normalized(raw)


def optimal_weights_all_states(E) -> WeightVector:
    """w_k proportional to sum_{j>k} 1/(E_j - E_{j-1}); optimal for the
    summed infidelities of all D states."""
    ev = as_energy_spectrum(E)
    inv_gaps = 1.0 / ev.gaps
    raw = np.concatenate([np.cumsum(inv_gaps[::-1])[::-1], [0.0]])
    return _normalized(raw)


def optimal_weights_lowest_K_states(K: int, E) -> WeightVector:
    """Like ``optimal_weights_all_states`` but truncated to the K lowest
    states, with the boundary gap term entering at half strength."""
    ev = as_energy_spectrum(E)
    D = ev.dim
    if not 0 < K < D - 1:
        raise RangeError("K=%d outside 1..%d" % (K, D - 2))
    terms = np.zeros(D - 1)
    terms[: K - 1] = 1.0 / ev.gaps[: K - 1]
    terms[K - 1] = 0.5 / ev.gaps[K - 1]
    raw = np.concatenate([np.cumsum(terms[::-1])[::-1], [0.0]])
    return _normalized(raw)


_ENERGY_QUANTITIES = ("E_k", "sumE_all", "sumE_K")
_STATE_QUANTITIES = ("Psi_k", "sumPsi_all", "sumPsi_K")


def _objective(quantity: str, D: int, K: Optional[int], k: Optional[int],
               gaps: Optional[np.ndarray]):
    """Upper-bound prefactor as a vectorized function of mu (rows of shape D)."""
    if quantity in _STATE_QUANTITIES:
        scale = gaps  # t_l = mu_l * (E_{l+1} - E_l)
    else:
        scale = np.ones(D - 1)

    if quantity in ("E_k", "Psi_k"):
        if k is None or not 0 <= k <= D - 2:
            raise RangeError("quantity %r needs k in 0..%d" % (quantity, D - 2))

        def f(mu):
            t = mu[:, k] * scale[k]
            if k > 0:
                t = np.minimum(t, mu[:, k - 1] * scale[k - 1])
            return 1.0 / t

    elif quantity in ("sumE_all", "sumPsi_all"):

        def f(mu):
            return 2.0 / (mu[:, : D - 1] * scale).min(axis=1)

    else:  # sumE_K, sumPsi_K
        if K is None or not 0 < K < D - 1:
            raise RangeError("quantity %r needs K in 1..%d" % (quantity, D - 2))

        def f(mu):
            J = 1.0 / (mu[:, K - 1] * scale[K - 1])
            if K > 1:
                J = np.maximum(
                    J, 2.0 / (mu[:, : K - 1] * scale[: K - 1]).min(axis=1)
                )
            return J

    return f


def _prefixes(budget: int, count: int):
    if count == 0:
        yield (), budget
        return
    for n in range(budget + 1):
        for rest, rem in _prefixes(budget - n, count - 1):
            yield (n,) + rest, rem


def grid_search_optimal(quantity: str, D: int, K: Optional[int] = None,
                        k: Optional[int] = None, E=None,
                        resolution: float = 1e-3) -> Tuple[WeightVector, float]:
    """Brute-force minimization of an upper-bound prefactor over the simplex.

    Returns (w, bound) at the best grid point; ties within relative 1e-12
    resolve to the lexicographically largest w.  Energy-targeting quantities
    ignore E; state-targeting ones require it.  The grid has round(1/resolution)
    subdivisions per simplex coordinate.
    """
    if quantity not in _ENERGY_QUANTITIES + _STATE_QUANTITIES:
        raise ValidationError("unknown quantity %r" % (quantity,))
    if D < 2:
        raise RangeError("need D >= 2, got %d" % D)
    gaps = None
    if quantity in _STATE_QUANTITIES:
        if E is None:
            raise ValidationError("quantity %r needs an energy spectrum" % (quantity,))
        ev = as_energy_spectrum(E)
        if ev.dim != D:
            raise DimensionMismatchError("spectrum dimension %d != D=%d" % (ev.dim, D))
        gaps = ev.gaps
    if not resolution > 0:
        raise RangeError("resolution must be positive")
    N = int(round(1.0 / resolution))
    if N < 1:
        raise RangeError("resolution %g leaves no grid" % resolution)
    if math.comb(N + D - 1, D - 1) > _GRID_POINT_CAP:
        raise RangeError(
            "grid with %d points is infeasible; coarsen the resolution"
            % math.comb(N + D - 1, D - 1)
        )
    objective = _objective(quantity, D, K, k, gaps)
    denom = np.arange(1, D + 1, dtype=float)

    if D == 2:
        chunks = [(np.stack([np.arange(N + 1), np.arange(N, -1, -1)], axis=1), ())]
    else:
        # last three coordinates (n_{D-3}, n_{D-2}, n_{D-1}) enumerate a
        # triangle; rows are pre-sorted by j+k so a leading budget M selects
        # exactly the first (M+1)(M+2)/2 of them
        tri_j = np.concatenate([np.arange(s + 1) for s in range(N + 1)])
        tri_k = np.concatenate([np.full(s + 1, s) - np.arange(s + 1) for s in range(N + 1)])
        chunks = None  # assembled lazily below

    best_J = np.inf
    best_w = None

    def consider(nu_rows: np.ndarray):
        nonlocal best_J, best_w
        mu = nu_rows / (N * denom)
        with np.errstate(divide="ignore"):
            J = objective(mu)
        m = float(J.min())
        if not np.isfinite(m) or m > best_J * (1 + 1e-12):
            return
        best_J = min(best_J, m)
        sel = J <= best_J * (1 + 1e-12)
        w_rows = np.cumsum(mu[sel][:, ::-1], axis=1)[:, ::-1]
        order = np.lexsort(tuple(w_rows[:, d] for d in range(D - 1, -1, -1)))
        cand = w_rows[order[-1]]
        if best_w is None or tuple(cand) > tuple(best_w):
            best_w = cand

    if D == 2:
        consider(chunks[0][0].astype(float))
    else:
        for prefix, M in _prefixes(N, D - 3):
            rows = (M + 1) * (M + 2) // 2
            nu = np.empty((rows, D))
            for col, val in enumerate(prefix):
                nu[:, col] = val
            j, kk = tri_j[:rows], tri_k[:rows]
            nu[:, D - 3] = M - j - kk
            nu[:, D - 2] = j
            nu[:, D - 1] = kk
            consider(nu)

    if best_w is None:
        raise RangeError(
            "no feasible grid point for %r at resolution %g" % (quantity, resolution)
        )
    return WeightVector(best_w), float(best_J)
