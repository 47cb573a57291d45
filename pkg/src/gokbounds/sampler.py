"""Random-conjugation sampling and bound-saturating Jacobi rotations.

Trial bases are drawn as U = exp(A) with A real antisymmetric and the
strict upper triangle sampled uniformly from [-pi, pi]; a complex mode
U = exp(iH) with H Hermitian is available as well.  The seed contract is
prefix-stable: a PCG64 stream delivers one contiguous block of D*D uniforms
per sample (row-major), so sample i is the same no matter how many samples
are requested or how they are chunked, and ``sample_orthogonal(D, seed)``
equals sample 0 of ``scatter_experiment(..., rng_seed=seed)``.

``scatter_experiment`` combines random draws, all D! permutation matrices
and a deterministic sweep of Jacobi rotations

    J_{a,b}(theta):  dE_w = sin^2(theta) (w_a - w_b)(E_b - E_a),

whose adjacent-pair members saturate the upper bounds exactly.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .core import (
    WEIGHT_TOL,
    BasisMap,
    WeightShape,
    as_energy_spectrum,
    as_weight_vector,
    error_bundle_batch,
)
from .bounds import (
    bound_set,
    eigenenergy_prefactors,
    eigenenergy_sum_prefactors,
    eigenstate_prefactor,
    eigenstate_sum_prefactors,
    ensemble_state_prefactors,
    gap_functions,
)
from .errors import (
    DimensionMismatchError,
    OutOfRegimeError,
    RangeError,
    ValidationError,
)

_CHUNK = 100_000
_SWEEP_POINTS = 25
_SOURCE_NAMES = ("random", "permutation", "jacobi")

THEOREM_TARGETS = (
    "ensemble_state",
    "eigenstate",
    "eigenstate_sum",
    "eigenenergy",
    "eigenenergy_sum",
)


def _block_stream(rng_seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(rng_seed))


def _orthogonal_from_blocks(blocks: np.ndarray, D: int) -> np.ndarray:
    """exp(A) for each block, A = triu(block) - triu(block)^T."""
    B = blocks.reshape(-1, D, D)
    upper = np.triu(B, 1)
    A = upper - np.transpose(upper, (0, 2, 1))
    lam, V = np.linalg.eigh(1j * A)
    phases = np.exp(-1j * lam)
    U = np.einsum("nij,nj,nkj->nik", V, phases, V.conj())
    return U.real


def _unitary_from_blocks(blocks: np.ndarray, D: int) -> np.ndarray:
    """exp(iH) for each block, H = sym(block) + i antisym(block)."""
    B = blocks.reshape(-1, D, D)
    H = 0.5 * (B + np.transpose(B, (0, 2, 1))) + 0.5j * (
        B - np.transpose(B, (0, 2, 1))
    )
    lam, V = np.linalg.eigh(H)
    phases = np.exp(1j * lam)
    return np.einsum("nij,nj,nkj->nik", V, phases, V.conj())


def sample_orthogonal(D: int, rng_seed: int = 0) -> BasisMap:
    """One random orthogonal basis map (sample 0 of the seed's stream)."""
    if D < 2:
        raise RangeError("need D >= 2, got %d" % D)
    blocks = _block_stream(rng_seed).uniform(-np.pi, np.pi, size=(1, D * D))
    return BasisMap(_orthogonal_from_blocks(blocks, D)[0], mode="orthogonal")


def sample_unitary(D: int, rng_seed: int = 0) -> BasisMap:
    """One random unitary basis map (sample 0 of the seed's stream)."""
    if D < 2:
        raise RangeError("need D >= 2, got %d" % D)
    blocks = _block_stream(rng_seed).uniform(-np.pi, np.pi, size=(1, D * D))
    return BasisMap(_unitary_from_blocks(blocks, D)[0], mode="unitary")


def jacobi_rotation(D: int, a: int, b: int, theta: float) -> np.ndarray:
    """Plane rotation by theta in the (a, b) coordinate plane."""
    if not (0 <= a < D and 0 <= b < D and a != b):
        raise RangeError("invalid rotation plane (%d, %d) for D=%d" % (a, b, D))
    U = np.eye(D)
    c, s = np.cos(theta), np.sin(theta)
    U[a, a] = U[b, b] = c
    U[a, b] = s
    U[b, a] = -s
    return U


def _saturating_pair(theorem: str, wv, ev, k: Optional[int]):
    """Adjacent pair (i, i+1) whose rotation drives the bound to equality."""
    gf = gap_functions(wv, ev)
    mu = wv.mu
    D = wv.dim
    K = wv.K
    head = D - 1 if wv.shape is WeightShape.STRICT_FULL else K

    if theorem == "ensemble_state":
        ensemble_state_prefactors(wv, ev)  # validates the shape
        r = mu[:head] / ev.gaps[:head]
        i = int(np.argmax(r))
        return i, i + 1
    if theorem == "eigenstate":
        if k is None:
            raise ValidationError("theorem 'eigenstate' needs the state index k")
        eigenstate_prefactor(k, wv, ev)
        cands = []
        if k > 0:
            cands.append((gf.t[k - 1], k - 1))
        if k < D - 1 and np.isfinite(gf.t[k]):
            cands.append((gf.t[k], k))
        i = min(cands)[1]
        return i, i + 1
    if theorem == "eigenstate_sum":
        eigenstate_sum_prefactors(wv, ev)
        if wv.shape is WeightShape.STRICT_FULL:
            return gf.k_min, gf.k_min + 1
        if K > 1:
            j = int(np.argmin(gf.t[: K - 1]))
            if 2.0 / gf.t[j] >= 1.0 / gf.t[K - 1]:
                return j, j + 1
        return K - 1, K
    if theorem == "eigenenergy":
        if k is None:
            raise ValidationError("theorem 'eigenenergy' needs the state index k")
        eigenenergy_prefactors(k, wv)
        if k >= D - 1:
            raise RangeError("no saturating rotation exists for the top index")
        return k, k + 1
    if theorem == "eigenenergy_sum":
        eigenenergy_sum_prefactors(wv)
        if wv.shape is WeightShape.STRICT_FULL:
            i = int(np.argmin(mu[: D - 1]))
            return i, i + 1
        if K > 1:
            j = int(np.argmin(mu[: K - 1]))
            if 2.0 / mu[j] >= 1.0 / wv.weights[K - 1]:
                return j, j + 1
        return K - 1, K
    raise ValidationError(
        "unknown theorem %r (expected one of %s)" % (theorem, ", ".join(THEOREM_TARGETS))
    )


def jacobi_saturating_state(theorem: str, w, E, theta: Optional[float] = None,
                            delta: Optional[float] = None,
                            k: Optional[int] = None) -> BasisMap:
    """Rotation J_{i,i+1} at the extremizing index of a bound's prefactor.

    Exactly one of ``theta`` (rotation angle) or ``delta`` (requested dE_w,
    converted through sin^2(theta) = delta / t_pair) must be given.  The
    resulting trial state meets the theorem's upper bound with equality.
    """
    wv = as_weight_vector(w)
    ev = as_energy_spectrum(E)
    if wv.dim != ev.dim:
        raise DimensionMismatchError("w and E dimensions differ")
    if (theta is None) == (delta is None):
        raise ValidationError("pass exactly one of theta or delta")
    a, b = _saturating_pair(theorem, wv, ev, k)
    if delta is not None:
        if delta < 0:
            raise RangeError("delta must be non-negative")
        t_pair = float((wv.weights[a] - wv.weights[b]) * (ev.values[b] - ev.values[a]))
        s2 = delta / t_pair
        if s2 > 1 + 1e-12:
            raise OutOfRegimeError(
                "delta=%g exceeds the rotation's reach t=%g" % (delta, t_pair)
            )
        theta = float(np.arcsin(np.sqrt(min(s2, 1.0))))
    return BasisMap(jacobi_rotation(wv.dim, a, b, theta), mode="orthogonal")


@dataclass(frozen=True)
class ScatterRecord:
    delta_E_w: float
    delta_rho_w: float
    delta_psi: tuple
    delta_E_k: tuple
    sum_psi: float
    sum_abs_E: float
    source: str
    sample_index: int


@dataclass
class ScatterResult:
    """Columnar outcome of one scatter experiment.

    ``sum_psi`` and ``sum_abs_E`` run over the targeted states: all D for a
    strictly descending w, the positive head for a zero-tail w.  ``source``
    holds codes 0 (random), 1 (permutation), 2 (jacobi).
    """

    seed: int
    mode: str
    w: np.ndarray
    E: np.ndarray
    g: float
    delta_E_w: np.ndarray
    delta_rho_w: np.ndarray
    delta_psi: np.ndarray
    delta_E_k: np.ndarray
    sum_psi: np.ndarray
    sum_abs_E: np.ndarray
    source: np.ndarray
    sample_index: np.ndarray
    envelope: dict = field(repr=False)

    @property
    def n_records(self) -> int:
        return self.delta_E_w.size

    def records(self) -> Iterator[ScatterRecord]:
        for i in range(self.n_records):
            yield ScatterRecord(
                delta_E_w=float(self.delta_E_w[i]),
                delta_rho_w=float(self.delta_rho_w[i]),
                delta_psi=tuple(self.delta_psi[i]),
                delta_E_k=tuple(self.delta_E_k[i]),
                sum_psi=float(self.sum_psi[i]),
                sum_abs_E=float(self.sum_abs_E[i]),
                source=_SOURCE_NAMES[int(self.source[i])],
                sample_index=int(self.sample_index[i]),
            )

    def compliance(self, slack: float = 1e-10) -> dict:
        """Vectorized bound check over all in-regime records."""
        return check_error_table(
            self.w, self.E, self.delta_E_w, self.delta_rho_w, self.delta_psi,
            self.delta_E_k, self.sum_psi, self.sum_abs_E, slack=slack,
        )

    def write_csv(self, dest) -> None:
        """Write all records; column layout documented in the CLI help."""
        own = isinstance(dest, (str, os.PathLike))
        f = open(dest, "w") if own else dest
        try:
            D = self.w.size
            cols = ["seed", "sample_index", "source", "delta_E_w", "delta_rho_w"]
            cols += ["delta_psi_%d" % i for i in range(D)]
            cols += ["delta_E_%d" % i for i in range(D)]
            cols += ["sum_psi", "sum_abs_E"]
            f.write("# schema_version=1 seed=%d\n" % self.seed)
            f.write(",".join(cols) + "\n")
            for i in range(self.n_records):
                row = [str(self.seed), str(int(self.sample_index[i])),
                       _SOURCE_NAMES[int(self.source[i])]]
                vals = [self.delta_E_w[i], self.delta_rho_w[i]]
                vals += list(self.delta_psi[i]) + list(self.delta_E_k[i])
                vals += [self.sum_psi[i], self.sum_abs_E[i]]
                row += ["%.12g" % v for v in vals]
                f.write(",".join(row) + "\n")
        finally:
            if own:
                f.close()


def _envelope(g: float, delta_E_w: np.ndarray, quantities: dict) -> dict:
    """Per-quantity extremal ratios dQ/dE_w over in-regime records, plus a
    50-bin logarithmic profile of the per-bin maximum."""
    lo = 1e-12 * g
    mask = (delta_E_w > lo) & (delta_E_w <= g * (1 + 1e-12))
    edges = np.geomspace(lo, g, 51)
    x = delta_E_w[mask]
    idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, 49)
    out = {"g": g, "bin_edges": edges.tolist(), "quantities": {}}
    for name, q in quantities.items():
        if x.size == 0:
            out["quantities"][name] = {"max": None, "min": None, "bin_max": [None] * 50}
            continue
        r = q[mask] / x
        bin_max = np.full(50, -np.inf)
        np.maximum.at(bin_max, idx, r)
        out["quantities"][name] = {
            "max": float(r.max()),
            "min": float(r.min()),
            "bin_max": [float(v) if np.isfinite(v) else None for v in bin_max],
        }
    return out


def scatter_experiment(w, E, n_samples: int, mode: str = "orthogonal",
                       rng_seed: int = 0) -> ScatterResult:
    """n random basis maps + all D! permutations + a Jacobi-rotation sweep.

    The sweep visits every pair (a, b) with positive exchange cost at 25
    log-spaced values of sin^2(theta) in [1e-6, 1], so the record cloud
    touches each upper bound exactly.  Some permutation records land beyond
    the validity threshold g by construction; the envelope only aggregates
    records with 0 < dE_w <= g.
    """
    wv = as_weight_vector(w)
    ev = as_energy_spectrum(E)
    if wv.dim != ev.dim:
        raise DimensionMismatchError("w and E dimensions differ")
    if n_samples < 0:
        raise RangeError("n_samples must be non-negative")
    if mode not in ("orthogonal", "unitary"):
        raise ValidationError("mode must be 'orthogonal' or 'unitary'")
    D = wv.dim
    if D > 8:
        raise RangeError("permutation enumeration capped at D=8")
    g = gap_functions(wv, ev).g

    builder = _orthogonal_from_blocks if mode == "orthogonal" else _unitary_from_blocks
    rng = _block_stream(rng_seed)
    parts = []  # (bundle dict, source code, sample indices)

    done = 0
    while done < n_samples:
        c = min(_CHUNK, n_samples - done)
        blocks = rng.uniform(-np.pi, np.pi, size=(c, D * D))
        U = builder(blocks, D)
        X = np.abs(U) ** 2
        parts.append((error_bundle_batch(X, wv, ev), 0, np.arange(done, done + c)))
        done += c

    perms = np.array(list(itertools.permutations(range(D))))
    Xp = np.eye(D)[perms]
    parts.append((error_bundle_batch(Xp, wv, ev), 1, np.arange(len(perms))))

    rotations = []
    s2_sweep = np.geomspace(1e-6, 1.0, _SWEEP_POINTS)
    for a in range(D - 1):
        for b in range(a + 1, D):
            t_ab = (wv.weights[a] - wv.weights[b]) * (ev.values[b] - ev.values[a])
            if t_ab <= WEIGHT_TOL * ev.spread:
                continue
            for s2 in s2_sweep:
                rotations.append(jacobi_rotation(D, a, b, np.arcsin(np.sqrt(s2))))
    if rotations:
        Xj = np.abs(np.array(rotations)) ** 2
        parts.append((error_bundle_batch(Xj, wv, ev), 2, np.arange(len(rotations))))

    def gather(key):
        return np.concatenate([p[0][key] for p in parts])

    delta_E_w = gather("delta_E_w")
    delta_psi = gather("delta_psi")
    delta_E_k = gather("delta_E_k")
    if wv.shape is WeightShape.STRICT_HEAD:
        sum_psi = gather("sum_psi_K")
        sum_abs_E = gather("sum_abs_E_K")
    else:
        sum_psi = delta_psi.sum(axis=1)
        sum_abs_E = np.abs(delta_E_k).sum(axis=1)
    source = np.concatenate(
        [np.full(p[2].size, p[1], dtype=np.int8) for p in parts]
    )
    sample_index = np.concatenate([p[2] for p in parts]).astype(np.int64)
    delta_rho_w = gather("delta_rho_w")

    quantities = {"delta_rho_w": delta_rho_w, "sum_psi": sum_psi, "sum_abs_E": sum_abs_E}
    for i in range(D):
        quantities["delta_psi_%d" % i] = delta_psi[:, i]
        quantities["delta_E_%d" % i] = delta_E_k[:, i]
    env = _envelope(g, delta_E_w, quantities)

    return ScatterResult(
        seed=rng_seed,
        mode=mode,
        w=wv.weights,
        E=ev.values,
        g=g,
        delta_E_w=delta_E_w,
        delta_rho_w=delta_rho_w,
        delta_psi=delta_psi,
        delta_E_k=delta_E_k,
        sum_psi=sum_psi,
        sum_abs_E=sum_abs_E,
        source=source,
        sample_index=sample_index,
        envelope=env,
    )


def check_error_table(w, E, delta_E_w, delta_rho_w, delta_psi, delta_E_k,
                      sum_psi, sum_abs_E, slack: float = 1e-10) -> dict:
    """Vectorized compliance check of tabulated error records.

    Applies every prefactor inequality of ``bound_set(w, E)`` to the rows
    with dE_w <= g + slack (records beyond the validity threshold carry no
    guarantees and are skipped).  The sum columns must follow the same
    convention as ``scatter_experiment``: targeted-states sums for zero-tail
    weight vectors, full sums otherwise.
    """
    bs = bound_set(w, E)
    d = np.asarray(delta_E_w, dtype=float).ravel()
    rho = np.asarray(delta_rho_w, dtype=float).ravel()
    psi = np.atleast_2d(np.asarray(delta_psi, dtype=float))
    dEk = np.atleast_2d(np.asarray(delta_E_k, dtype=float))
    spsi = np.asarray(sum_psi, dtype=float).ravel()
    sabs = np.asarray(sum_abs_E, dtype=float).ravel()
    n = d.size
    if psi.shape != (n, bs.dim) or dEk.shape != (n, bs.dim):
        raise DimensionMismatchError("error table columns do not match D=%d" % bs.dim)
    idx = np.nonzero(d <= bs.validity_g + slack)[0]
    dd = d[idx]
    failures = {}
    bad_any = np.zeros(idx.size, dtype=bool)

    def tally(name, bad):
        nb = int(bad.sum())
        if nb:
            failures[name] = nb
            np.logical_or(bad_any, bad, out=bad_any)

    tally("ensemble_state_lower", rho[idx] < bs.a_minus * dd - slack)
    tally("ensemble_state_upper", rho[idx] > bs.a_plus * dd + slack)
    for k, b in enumerate(bs.b_plus):
        if b is None:
            continue
        tally("eigenstate_lower_k%d" % k, psi[idx, k] < -slack)
        tally("eigenstate_upper_k%d" % k, psi[idx, k] > b * dd + slack)
    tally("eigenstate_sum_lower", spsi[idx] < bs.sum_psi_lower * dd - slack)
    tally("eigenstate_sum_upper", spsi[idx] > bs.sum_psi_upper * dd + slack)
    for k, (cm, cp) in enumerate(zip(bs.c_minus, bs.c_plus)):
        if cm is None:
            continue
        tally("eigenenergy_lower_k%d" % k, dEk[idx, k] < cm * dd - slack)
        tally("eigenenergy_upper_k%d" % k, dEk[idx, k] > cp * dd + slack)
    tally("eigenenergy_sum_lower", sabs[idx] < bs.sum_E_lower * dd - slack)
    tally("eigenenergy_sum_upper", sabs[idx] > bs.sum_E_upper * dd + slack)

    bad_records = idx[bad_any]
    return {
        "n_records": int(n),
        "n_in_regime": int(idx.size),
        "n_violations": int(bad_records.size),
        "failures": failures,
        "violating_records": bad_records[:20].tolist(),
    }
