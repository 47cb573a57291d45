"""Analytic prefactors bounding every error functional by dE_w.

Inside the validity regime dE_w <= g, each error is sandwiched between
multiples of the ensemble-energy error::

    a_-  dE_w  <=  drho_w          <=  a_+  dE_w
    0          <=  dPsi_k          <=  b_+^(k) dE_w
    l5   dE_w  <=  sum_k dPsi_k    <=  u5 dE_w
    c_-^(k) dE_w  <=  dE_k         <=  c_+^(k) dE_w
    l7   dE_w  <=  sum_k |dE_k|    <=  u7 dE_w

with the gap functions g = min_k (w_k - w_{k+1})(E_{k+1} - E_k) (over strict
descents) and G = (w_0 - w_{D-1})(E_{D-1} - E_0).  The sums run over all D
states for strictly descending weights and over the K targeted states when
the weight vector has a zero tail.

``bound_set`` packages every prefactor for a weight/spectrum pair and
``check_bounds`` verifies a measured ErrorBundle against them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import (
    WEIGHT_TOL,
    EnergySpectrum,
    ErrorBundle,
    WeightShape,
    WeightVector,
    as_energy_spectrum,
    as_weight_vector,
)
from .errors import (
    DegenerateWeightError,
    DimensionMismatchError,
    RangeError,
    ShapeError,
)


@dataclass(frozen=True)
class GapFunctions:
    """Validity threshold g, global scale G, and the per-descent costs t_k.

    ``t`` has length D-1; entries at indices without a strict weight descent
    are +inf so that ``g = t.min()`` stays meaningful.  ``k_min`` is the
    index attaining g.
    """

    g: float
    G: float
    t: np.ndarray
    k_min: int


@dataclass(frozen=True)
class BoundSet:
    """Every prefactor available for one (w, E) pair.

    Per-state entries are None where the corresponding bound is refused
    (equal neighboring weights, or an untargeted state with no control).
    """

    shape: WeightShape
    dim: int
    K: int
    validity_g: float
    gap_G: float
    a_minus: float
    a_plus: float
    b_plus: Tuple[Optional[float], ...]
    sum_psi_lower: float
    sum_psi_upper: float
    c_minus: Tuple[Optional[float], ...]
    c_plus: Tuple[Optional[float], ...]
    sum_E_lower: float
    sum_E_upper: float


@dataclass(frozen=True)
class CheckRecord:
    name: str
    observed: float
    bound: float
    slack: float
    passed: bool


@dataclass(frozen=True)
class ComplianceReport:
    """Outcome of checking one ErrorBundle against a BoundSet.

    Out-of-regime bundles (dE_w > g) are not checked at all: ``checks`` is
    empty and ``ok`` is True, with ``in_regime`` False as the flag.
    """

    in_regime: bool
    ok: bool
    delta_E_w: float
    validity_g: float
    slack: float
    checks: Tuple[CheckRecord, ...]

    @property
    def failures(self) -> Tuple[CheckRecord, ...]:
        return tuple(c for c in self.checks if not c.passed)


def _pair(w, E) -> Tuple[WeightVector, EnergySpectrum]:
    wv = as_weight_vector(w)
    ev = as_energy_spectrum(E)
    if wv.dim != ev.dim:
        raise DimensionMismatchError(
            "weight vector (D=%d) and spectrum (D=%d) differ" % (wv.dim, ev.dim)
        )
    return wv, ev


def _strict_shape(wv: WeightVector) -> WeightShape:
    shape = wv.shape
    if shape is WeightShape.OTHER:
        raise ShapeError(
            "weights must be strictly descending, or strictly descending on a "
            "positive head followed by zeros; repeated weights leave this "
            "bound undefined"
        )
    return shape


def gap_functions(w, E) -> GapFunctions:
    """g, G and the descent costs t_k = (w_k - w_{k+1})(E_{k+1} - E_k).

    Works for any admissible weight vector with at least one strict descent;
    a fully uniform w has no positive vertex error and is refused.
    """
    wv, ev = _pair(w, E)
    mu = wv.mu[:-1]
    gaps = ev.gaps
    t = np.where(mu > WEIGHT_TOL, mu * gaps, np.inf)
    if not np.any(np.isfinite(t)):
        raise DegenerateWeightError(
            "uniform weights admit no validity threshold (every descent gap is zero)"
        )
    k_min = int(np.argmin(t))
    g = float(t[k_min])
    G = float((wv.weights[0] - wv.weights[-1]) * ev.spread)
    return GapFunctions(g=g, G=G, t=t, k_min=k_min)


def ensemble_state_prefactors(w, E) -> Tuple[float, float]:
    """(a_minus, a_plus) sandwiching the ensemble-state error drho_w."""
    wv, ev = _pair(w, E)
    shape = _strict_shape(wv)
    mu = wv.mu
    gaps = ev.gaps
    if shape is WeightShape.STRICT_FULL:
        r = mu[:-1] / gaps
        return 2.0 * float(r.min()), 2.0 * float(r.max())
    K = wv.K
    r_head = mu[:K] / gaps[:K]
    a_plus = 2.0 * float(r_head.max())
    tail = wv.weights[K - 1] / float(ev.values[-1] - ev.values[K - 1])
    lo = tail if K == 1 else min(float(r_head[: K - 1].min()), tail)
    return 2.0 * lo, a_plus


def eigenstate_prefactor(k: int, w, E) -> float:
    """b_plus for state k: dPsi_k <= b_plus * dE_w.

    Only the weight w_k and its immediate neighbors enter: the bound exists
    whenever w_k differs from both (ties give state k a zero-cost exchange
    partner, leaving its infidelity uncontrolled by the ensemble energy).
    Ties elsewhere in the vector are harmless.
    """
    wv, ev = _pair(w, E)
    if not 0 <= k < wv.dim:
        raise RangeError("state index k=%d outside 0..%d" % (k, wv.dim - 1))
    warr = wv.weights
    if k > 0 and warr[k - 1] - warr[k] <= WEIGHT_TOL:
        raise DegenerateWeightError(
            "dPsi_%d is unbounded: weight %d is degenerate with weight %d"
            % (k, k, k - 1)
        )
    if k < wv.dim - 1 and warr[k] - warr[k + 1] <= WEIGHT_TOL:
        raise DegenerateWeightError(
            "dPsi_%d is unbounded: weight %d is degenerate with weight %d"
            % (k, k, k + 1)
        )
    t = gap_functions(wv, ev).t
    cands = [float(t[j]) for j in (k - 1, k) if 0 <= j < t.size]
    return 1.0 / min(cands)


def eigenstate_sum_prefactors(w, E) -> Tuple[float, float]:
    """(lower, upper) prefactors for the summed infidelities.

    The sum runs over all D states for strictly descending weights and over
    the K targeted states for zero-tail weights.
    """
    wv, ev = _pair(w, E)
    shape = _strict_shape(wv)
    gf = gap_functions(wv, ev)
    if shape is WeightShape.STRICT_FULL:
        return 2.0 / gf.G, 2.0 / gf.g
    K = wv.K
    upper = 1.0 / gf.t[K - 1]
    if K > 1:
        upper = max(upper, float(2.0 / gf.t[: K - 1].min()))
    return 1.0 / gf.G, float(upper)


def eigenenergy_prefactors(k: int, w) -> Tuple[float, float]:
    """(c_minus, c_plus) sandwiching the signed eigenenergy error dE_k.

    Only the weight gaps to the two neighbors enter (with w_D := 0); both
    prefactors are refused together when either neighbor gap closes.
    """
    wv = as_weight_vector(w)
    if not 0 <= k < wv.dim:
        raise RangeError("state index k=%d outside 0..%d" % (k, wv.dim - 1))
    warr = wv.weights
    up_gap = warr[k] - (warr[k + 1] if k < wv.dim - 1 else 0.0)
    down_gap = warr[k - 1] - warr[k] if k > 0 else np.inf
    if up_gap <= WEIGHT_TOL or down_gap <= WEIGHT_TOL:
        raise DegenerateWeightError(
            "dE_%d is uncontrolled: weight %d is degenerate with a neighbor" % (k, k)
        )
    c_plus = float(1.0 / up_gap)
    c_minus = 0.0 if k == 0 else float(-1.0 / down_gap)
    return c_minus, c_plus


def eigenenergy_sum_prefactors(w) -> Tuple[float, float]:
    """(lower, upper) prefactors for sum_k |dE_k| (same sum range as the
    infidelity sum)."""
    wv = as_weight_vector(w)
    shape = _strict_shape(wv)
    warr = wv.weights
    mu = wv.mu
    if shape is WeightShape.STRICT_FULL:
        return 2.0 / float(warr[0] - warr[-1]), 2.0 / float(mu[:-1].min())
    K = wv.K
    upper = 1.0 / warr[K - 1]
    if K > 1:
        upper = max(upper, 2.0 / float(mu[: K - 1].min()))
    return 1.0 / float(warr[0]), float(upper)


def bound_set(w, E) -> BoundSet:
    """Assemble every available prefactor for one (w, E) pair.

    Raises ShapeError for weight vectors with repeated positive entries;
    per-state refusals are recorded as None instead of raising.
    """
    wv, ev = _pair(w, E)
    shape = _strict_shape(wv)
    gf = gap_functions(wv, ev)
    a_minus, a_plus = ensemble_state_prefactors(wv, ev)
    sum_psi = eigenstate_sum_prefactors(wv, ev)
    sum_E = eigenenergy_sum_prefactors(wv)
    b_plus, c_minus, c_plus = [], [], []
    for k in range(wv.dim):
        try:
            b_plus.append(eigenstate_prefactor(k, wv, ev))
        except DegenerateWeightError:
            b_plus.append(None)
        try:
            cm, cp = eigenenergy_prefactors(k, wv)
        except DegenerateWeightError:
            cm, cp = None, None
        c_minus.append(cm)
        c_plus.append(cp)
    return BoundSet(
        shape=shape,
        dim=wv.dim,
        K=wv.K,
        validity_g=gf.g,
        gap_G=gf.G,
        a_minus=a_minus,
        a_plus=a_plus,
        b_plus=tuple(b_plus),
        sum_psi_lower=sum_psi[0],
        sum_psi_upper=sum_psi[1],
        c_minus=tuple(c_minus),
        c_plus=tuple(c_plus),
        sum_E_lower=sum_E[0],
        sum_E_upper=sum_E[1],
    )


def check_bounds(bundle: ErrorBundle, bounds: BoundSet, slack: float = 1e-10) -> ComplianceReport:
    """Verify a measured ErrorBundle against a BoundSet.

    Every inequality is tested with the given absolute slack.  Bundles
    outside the validity regime (dE_w > g) are flagged, not checked.
    """
    d = float(bundle.delta_E_w)
    if d > bounds.validity_g + slack:
        return ComplianceReport(
            in_regime=False,
            ok=True,
            delta_E_w=d,
            validity_g=bounds.validity_g,
            slack=slack,
            checks=(),
        )
    checks = []

    def lower(name, observed, coeff):
        bnd = coeff * d
        checks.append(CheckRecord(name, float(observed), bnd, slack, bool(observed >= bnd - slack)))

    def upper(name, observed, coeff):
        bnd = coeff * d
        checks.append(CheckRecord(name, float(observed), bnd, slack, bool(observed <= bnd + slack)))

    lower("ensemble_state_lower", bundle.delta_rho_w, bounds.a_minus)
    upper("ensemble_state_upper", bundle.delta_rho_w, bounds.a_plus)
    for k, b in enumerate(bounds.b_plus):
        if b is None:
            continue
        lower("eigenstate_lower_k%d" % k, bundle.delta_psi[k], 0.0)
        upper("eigenstate_upper_k%d" % k, bundle.delta_psi[k], b)
    if bounds.shape is WeightShape.STRICT_FULL:
        psi_sum = float(bundle.delta_psi.sum())
        abs_E_sum = float(np.abs(bundle.delta_E_k).sum())
    else:
        psi_sum = bundle.sum_psi_K
        abs_E_sum = bundle.sum_abs_E_K
    lower("eigenstate_sum_lower", psi_sum, bounds.sum_psi_lower)
    upper("eigenstate_sum_upper", psi_sum, bounds.sum_psi_upper)
    for k, (cm, cp) in enumerate(zip(bounds.c_minus, bounds.c_plus)):
        if cm is None:
            continue
        lower("eigenenergy_lower_k%d" % k, bundle.delta_E_k[k], cm)
        upper("eigenenergy_upper_k%d" % k, bundle.delta_E_k[k], cp)
    lower("eigenenergy_sum_lower", abs_E_sum, bounds.sum_E_lower)
    upper("eigenenergy_sum_upper", abs_E_sum, bounds.sum_E_upper)
    return ComplianceReport(
        in_regime=True,
        ok=all(c.passed for c in checks),
        delta_E_w=d,
        validity_g=bounds.validity_g,
        slack=slack,
        checks=tuple(checks),
    )
