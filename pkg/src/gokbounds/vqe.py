"""Ensemble-VQE demonstration on the transverse-field Ising chain.

H = sum_i a_i X_i + sum_{i<j} J_ij Z_i Z_j is assembled densely, its exact
spectrum obtained with a cyclic Jacobi eigensolver, and the ensemble cost

    C(theta) = sum_k w_k (U^T H U)_{kk},   U = exp(A(theta)),

is minimized with Adam over the full orthogonal group (A antisymmetric,
D(D-1)/2 parameters).  Every iteration is recorded as a full ErrorBundle so
the trace can be checked against the analytic bound channels.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import expm, expm_frechet

from .core import (
    BasisMap,
    EnergySpectrum,
    ErrorBundle,
    WeightVector,
    as_weight_vector,
    error_bundle,
)
from .bounds import bound_set
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    ParameterCountError,
    RangeError,
    ValidationError,
)

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_PAULI_Z_DIAG = np.array([1.0, -1.0])


@dataclass(frozen=True)
class IsingModel:
    """Transverse-field Ising chain: N sites, fields a_i, couplings J_ij (i<j)."""

    N: int
    a: Tuple[float, ...]
    J: Dict[Tuple[int, int], float]

    def __post_init__(self):
        if self.N < 1:
            raise RangeError("need at least one site")
        a = tuple(float(x) for x in self.a)
        if len(a) != self.N:
            raise DimensionMismatchError(
                "got %d field coefficients for N=%d sites" % (len(a), self.N)
            )
        if not all(np.isfinite(a)):
            raise ValidationError("field coefficients must be finite")
        J = {}
        for (i, j), val in dict(self.J or {}).items():
            if not (0 <= i < j < self.N):
                raise ValidationError("coupling index (%r, %r) out of range" % (i, j))
            if not np.isfinite(val):
                raise ValidationError("coupling J_%d%d must be finite" % (i, j))
            J[(int(i), int(j))] = float(val)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "J", J)


#: two-site reference model used throughout the demonstration
REFERENCE_MODEL = IsingModel(N=2, a=(0.32696, 0.80430), J={(0, 1): 0.09})


def build_hamiltonian(model: IsingModel) -> np.ndarray:
    """Dense 2^N x 2^N real symmetric Hamiltonian by Kronecker assembly."""
    if model.N > 10:
        raise RangeError("dense assembly capped at N=10 (got N=%d)" % model.N)
    dim = 2 ** model.N
    H = np.zeros((dim, dim))
    for i, ai in enumerate(model.a):
        if ai == 0.0:
            continue
        op = np.array([[1.0]])
        for site in range(model.N):
            op = np.kron(op, _PAULI_X if site == i else np.eye(2))
        H += ai * op
    diag = np.zeros(dim)
    for (i, j), val in model.J.items():
        z = np.array([1.0])
        for site in range(model.N):
            z = np.kron(z, _PAULI_Z_DIAG if site in (i, j) else np.ones(2))
        diag += val * z
    H[np.diag_indices(dim)] += diag
    return H


def _jacobi_eigh(M: np.ndarray, tol: float = 1e-12,
                 max_sweeps: int = 100) -> Tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Returns ascending eigenvalues and the matching eigenvector columns.
    Written out longhand on purpose: it provides an eigensolver route that
    does not share code with numpy's LAPACK binding, so the two can be
    cross-checked against each other.
    """
    A = np.array(M, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(A)))
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 0.1 * tol * scale / n:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                if tau == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                A[[p, q], :] = rot.T @ A[[p, q], :]
                A[:, [p, q]] = A[:, [p, q]] @ rot
                V[:, [p, q]] = V[:, [p, q]] @ rot
    else:
        raise ConvergenceError("Jacobi sweeps did not converge")
    vals = np.diag(A).copy()
    order = np.argsort(vals)
    return vals[order], V[:, order]


def exact_spectrum(H) -> EnergySpectrum:
    """Ascending eigenvalues of a symmetric matrix (Jacobi sweeps)."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionMismatchError("Hamiltonian must be a square matrix")
    sym_err = float(np.max(np.abs(H - H.T)))
    if sym_err > 1e-10 * max(1.0, float(np.max(np.abs(H)))):
        raise ValidationError("Hamiltonian is not symmetric (error %.3g)" % sym_err)
    vals, _ = _jacobi_eigh(0.5 * (H + H.T))
    return EnergySpectrum(vals)


def ansatz_unitary(params, dim: Optional[int] = None) -> BasisMap:
    """U = exp(A) with the strict upper triangle of A filled row-major from
    params; D is inferred from the triangular parameter count."""
    params = np.asarray(params, dtype=float).ravel()
    if dim is None:
        d = int(round((1 + np.sqrt(1 + 8 * params.size)) / 2))
        if d < 2 or d * (d - 1) // 2 != params.size:
            raise ParameterCountError(
                "%d parameters do not form a triangular count D(D-1)/2" % params.size
            )
    else:
        d = dim
        if d * (d - 1) // 2 != params.size:
            raise ParameterCountError(
                "D=%d needs %d parameters, got %d" % (d, d * (d - 1) // 2, params.size)
            )
    return BasisMap(expm(_antisym(params, d)), mode="orthogonal")


def _antisym(params: np.ndarray, d: int) -> np.ndarray:
    A = np.zeros((d, d))
    iu = np.triu_indices(d, 1)
    A[iu] = params
    return A - A.T


def ensemble_cost(params, w, H) -> float:
    """Ensemble energy of the trial basis U(params): sum_k w_k (U^T H U)_kk."""
    wv = as_weight_vector(w)
    H = np.asarray(H, dtype=float)
    if H.shape[0] != wv.dim:
        raise DimensionMismatchError(
            "H is %dx%d but w has %d entries" % (H.shape[0], H.shape[1], wv.dim)
        )
    U = ansatz_unitary(params, dim=wv.dim).matrix
    return float(wv.weights @ np.einsum("ki,kl,li->i", U, H, U))


def cost_gradient(params, w, H) -> np.ndarray:
    """Analytic gradient of ``ensemble_cost`` via the Frechet derivative of
    the matrix exponential: dC/dtheta_m = 2 tr[diag(w) U^T H dU]."""
    wv = as_weight_vector(w)
    H = np.asarray(H, dtype=float)
    params = np.asarray(params, dtype=float).ravel()
    d = wv.dim
    if d * (d - 1) // 2 != params.size:
        raise ParameterCountError(
            "D=%d needs %d parameters, got %d" % (d, d * (d - 1) // 2, params.size)
        )
    A = _antisym(params, d)
    iu = np.triu_indices(d, 1)
    grad = np.empty(params.size)
    U = expm(A)
    HU_w = H @ U * wv.weights  # (H U diag(w))
    for m in range(params.size):
        Em = np.zeros((d, d))
        Em[iu[0][m], iu[1][m]] = 1.0
        dU = expm_frechet(A, Em - Em.T, compute_expm=False)
        grad[m] = 2.0 * float(np.sum(dU * HU_w))
    return grad


def finite_difference_gradient(params, w, H, step: float = 1e-6) -> np.ndarray:
    """Central finite differences of ``ensemble_cost``."""
    params = np.asarray(params, dtype=float).ravel()
    grad = np.empty(params.size)
    for m in range(params.size):
        shift = np.zeros(params.size)
        shift[m] = step
        grad[m] = (
            ensemble_cost(params + shift, w, H) - ensemble_cost(params - shift, w, H)
        ) / (2.0 * step)
    return grad


@dataclass(frozen=True)
class AdamHyper:
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise RangeError("learning rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise RangeError("decay rates must lie in [0, 1)")


@dataclass(frozen=True)
class TracePoint:
    iteration: int
    bundle: ErrorBundle
    param_norm: float


@dataclass(frozen=True)
class OptimizerTrace:
    w: WeightVector
    spectrum: EnergySpectrum
    points: Tuple[TracePoint, ...]
    converged: bool
    final_params: np.ndarray = field(repr=False)

    @property
    def delta_E_w_series(self) -> np.ndarray:
        return np.array([p.bundle.delta_E_w for p in self.points])


_CONVERGED_DELTA = 1e-10
_DIVERGENCE_RUN = 100


def adam_optimize(w, H, hyper: Optional[AdamHyper] = None, max_iter: int = 5000,
                  seed: int = 0) -> OptimizerTrace:
    """Minimize the ensemble cost with Adam, recording an ErrorBundle per
    iteration (the initial point included).

    Stops when dE_w < 1e-10 or after max_iter updates; raises
    ConvergenceError (with ``trace`` and ``iteration`` attached) after 100
    consecutive cost increases.
    """
    wv = as_weight_vector(w)
    H = np.asarray(H, dtype=float)
    if H.shape[0] != wv.dim:
        raise DimensionMismatchError("H dimension does not match w")
    hyper = hyper or AdamHyper()
    if max_iter < 0:
        raise RangeError("max_iter must be non-negative")
    d = wv.dim
    n_params = d * (d - 1) // 2

    vals, V = _jacobi_eigh(0.5 * (H + H.T))
    spectrum = EnergySpectrum(vals)

    rng = np.random.Generator(np.random.PCG64(seed))
    params = rng.uniform(-0.1, 0.1, size=n_params)

    def bundle_at(p) -> ErrorBundle:
        U = expm(_antisym(p, d))
        return error_bundle(BasisMap(V.T @ U, mode="orthogonal"), wv, spectrum)

    points = [TracePoint(0, bundle_at(params), float(np.linalg.norm(params)))]
    m = np.zeros(n_params)
    v = np.zeros(n_params)
    prev_cost = np.inf
    rising = 0
    converged = points[0].bundle.delta_E_w < _CONVERGED_DELTA

    for it in range(1, max_iter + 1):
        if converged:
            break
        g = cost_gradient(params, wv, H)
        m = hyper.beta1 * m + (1 - hyper.beta1) * g
        v = hyper.beta2 * v + (1 - hyper.beta2) * g * g
        m_hat = m / (1 - hyper.beta1 ** it)
        v_hat = v / (1 - hyper.beta2 ** it)
        params = params - hyper.learning_rate * m_hat / (np.sqrt(v_hat) + hyper.eps)

        bundle = bundle_at(params)
        points.append(TracePoint(it, bundle, float(np.linalg.norm(params))))
        cost = bundle.delta_E_w
        if cost >= prev_cost:
            rising += 1
            if rising >= _DIVERGENCE_RUN:
                err = ConvergenceError(
                    "cost increased for %d consecutive iterations (at iteration %d)"
                    % (_DIVERGENCE_RUN, it)
                )
                err.trace = OptimizerTrace(
                    w=wv, spectrum=spectrum, points=tuple(points),
                    converged=False, final_params=params,
                )
                err.iteration = it
                raise err
        else:
            rising = 0
        prev_cost = cost
        if cost < _CONVERGED_DELTA:
            converged = True

    return OptimizerTrace(
        w=wv,
        spectrum=spectrum,
        points=tuple(points),
        converged=bool(converged),
        final_params=params,
    )


def demo_weights(D: int, exponent: int) -> WeightVector:
    """w proportional to (D, D-1, ..., 1) ** exponent."""
    if exponent < 0:
        raise RangeError("exponent must be non-negative")
    raw = np.arange(D, 0, -1, dtype=float) ** exponent
    return WeightVector(raw / raw.sum())


def _write_trace_csv(path: str, trace: OptimizerTrace, seed: int) -> None:
    D = trace.w.dim
    cols = ["iter", "delta_E_w", "delta_rho_w"]
    cols += ["delta_psi_%d" % i for i in range(D)]
    cols += ["delta_E_%d" % i for i in range(D)]
    cols += ["sum_psi", "sum_abs_E"]
    with open(path, "w") as f:
        f.write("# schema_version=1 seed=%d\n" % seed)
        f.write(",".join(cols) + "\n")
        for pt in trace.points:
            b = pt.bundle
            vals = [b.delta_E_w, b.delta_rho_w]
            vals += list(b.delta_psi) + list(b.delta_E_k)
            vals += [float(b.delta_psi.sum()), float(np.abs(b.delta_E_k).sum())]
            f.write(",".join([str(pt.iteration)] + ["%.12g" % x for x in vals]) + "\n")


def _write_bounds_csv(path: str, w, E, seed: int) -> None:
    bs = bound_set(w, E)
    rows = [("ensemble_state", bs.a_minus, bs.a_plus)]
    for k in range(bs.dim):
        rows.append(("eigenstate_%d" % k, 0.0, bs.b_plus[k]))
    rows.append(("eigenstate_sum", bs.sum_psi_lower, bs.sum_psi_upper))
    for k in range(bs.dim):
        rows.append(("eigenenergy_%d" % k, bs.c_minus[k], bs.c_plus[k]))
    rows.append(("eigenenergy_sum", bs.sum_E_lower, bs.sum_E_upper))
    with open(path, "w") as f:
        f.write("# schema_version=1 seed=%d\n" % seed)
        f.write("quantity,lower_prefactor,upper_prefactor,g,G\n")
        for name, lo, hi in rows:
            fmt = lambda x: "" if x is None else "%.12g" % x
            f.write(
                "%s,%s,%s,%.12g,%.12g\n"
                % (name, fmt(lo), fmt(hi), bs.validity_g, bs.gap_G)
            )


def run_demo(model: IsingModel = REFERENCE_MODEL, weight_mode: str = "all",
             out_path: str = ".", max_iter: int = 5000, seed: int = 0) -> dict:
    """Optimize for the selected weight exponents and write one trace CSV
    plus one bound-channel CSV per exponent into ``out_path``.

    ``weight_mode`` is "all" (exponents 1, 2, 3) or a single exponent digit.
    Returns {exponent: {"trace": path, "bounds": path, "result": trace}}.
    """
    if weight_mode == "all":
        exponents = (1, 2, 3)
    else:
        try:
            exponents = (int(weight_mode),)
        except (TypeError, ValueError):
            raise ValidationError("weight_mode must be 'all' or an integer exponent")
    H = build_hamiltonian(model)
    D = H.shape[0]
    os.makedirs(out_path, exist_ok=True)
    out = {}
    for n in exponents:
        wv = demo_weights(D, n)
        trace = adam_optimize(wv, H, max_iter=max_iter, seed=seed)
        trace_path = os.path.join(out_path, "trace_n%d.csv" % n)
        bounds_path = os.path.join(out_path, "bounds_n%d.csv" % n)
        _write_trace_csv(trace_path, trace, seed)
        _write_bounds_csv(bounds_path, wv, trace.spectrum, seed)
        out[n] = {"trace": trace_path, "bounds": bounds_path, "result": trace}
    return out
