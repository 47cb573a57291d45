"""Domain types and exact error functionals for ensemble trial states.

The exact ensemble state rho_w = sum_k w_k |Psi_k><Psi_k| (weights w sorted
descending, energies E sorted ascending) is compared against a trial ensemble
rho~_w = U rho_w U^dag for a unitary U.  With the doubly stochastic matrix
X_{kl} = |U_{kl}|^2, the shuffled vectors w~ = X w and E~ = X^T E, every
error of interest is linear in X::

    dE_w   = w . (E~ - E) = (w~ - w) . E     ensemble-energy error, >= 0
    drho_w = 2 w . (w - w~)                  ensemble-state error (HS norm^2)
    dPsi_k = 1 - X_{kk}                      k-th eigenstate infidelity
    dE_k   = E~_k - E_k                      k-th eigenenergy error (signed)
    F_k    = sum_{j<=k} (E~_j - E_j)         partial sums, F_k >= 0, F_{D-1} = 0

``error_bundle`` evaluates all of them for one trial state;
``error_bundle_batch`` does the same for a stack of X matrices at once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .errors import (
    DegenerateSpectrumError,
    DimensionMismatchError,
    NonUnitaryError,
    RangeError,
    ValidationError,
)

#: absolute tolerance for weight-sum normalization and zero/degeneracy tests
WEIGHT_TOL = 1e-12
#: entrywise tolerance for unitarity and double stochasticity
MATRIX_TOL = 1e-10
#: relative factor for the default spectrum non-degeneracy threshold
SPECTRUM_DEGEN_REL = 1e-12


class WeightShape(enum.Enum):
    """Structural class of a weight vector, as used by the bound formulas.

    STRICT_FULL: strictly descending, w_0 > w_1 > ... > w_{D-1} >= 0
    (at most a single trailing zero).  STRICT_HEAD: strictly descending
    positive head followed by at least two exact zeros,
    w_0 > ... > w_{K-1} > w_K = ... = w_{D-1} = 0 with K < D-1.
    OTHER: anything else (e.g. repeated positive weights).
    """

    STRICT_FULL = "strict_full"
    STRICT_HEAD = "strict_head"
    OTHER = "other"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class EnergySpectrum:
    """Ascending, non-degenerate energy eigenvalues of the target Hamiltonian.

    Parameters
    ----------
    values : array_like
        D >= 2 energies sorted strictly ascending.
    eps_degen : float, optional
        Minimal allowed level spacing.  Defaults to
        ``SPECTRUM_DEGEN_REL * (values[-1] - values[0])``.
    """

    values: np.ndarray
    eps_degen: Optional[float] = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise DimensionMismatchError("energy spectrum must be a 1-D vector")
        if vals.size < 2:
            raise RangeError("energy spectrum needs at least two levels")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("energy spectrum contains non-finite entries")
        spread = float(vals[-1] - vals[0])
        eps = self.eps_degen
        if eps is None:
            eps = SPECTRUM_DEGEN_REL * spread
        if np.any(np.diff(vals) <= eps):
            raise DegenerateSpectrumError(
                "energy levels must be strictly ascending with spacing > %.3g" % eps
            )
        object.__setattr__(self, "values", _readonly(vals))
        object.__setattr__(self, "eps_degen", float(eps))

    @property
    def dim(self) -> int:
        return self.values.size

    @property
    def spread(self) -> float:
        return float(self.values[-1] - self.values[0])

    @property
    def gaps(self) -> np.ndarray:
        """Consecutive level spacings E_{k+1} - E_k (length D-1)."""
        return np.diff(self.values)


@dataclass(frozen=True)
class WeightVector:
    """Descending probability vector of ensemble weights.

    Exposes ``K`` (number of strictly positive entries), the gap view
    ``mu`` with mu_l = w_l - w_{l+1} and mu_{D-1} = w_{D-1}, and the
    structural ``shape`` flag consumed by the bound formulas.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise DimensionMismatchError("weight vector must be a 1-D vector")
        if w.size < 2:
            raise RangeError("weight vector needs at least two entries")
        if np.any(w < -1e-15):
            raise ValidationError("weights must be non-negative")
        w = np.maximum(w, 0.0)
        if np.any(np.diff(w) > 1e-15):
            raise ValidationError("weights must be sorted in descending order")
        total = float(w.sum())
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValidationError(
                "weights must sum to 1 within %.0e (got %.17g)" % (WEIGHT_TOL, total)
            )
        object.__setattr__(self, "weights", _readonly(w))

    @property
    def dim(self) -> int:
        return self.weights.size

    @property
    def K(self) -> int:
        """Number of strictly positive weights."""
        return int(np.count_nonzero(self.weights > WEIGHT_TOL))

    @property
    def mu(self) -> np.ndarray:
        """Weight gaps mu_l = w_l - w_{l+1}, with mu_{D-1} = w_{D-1}."""
        w = self.weights
        return np.concatenate([-np.diff(w), w[-1:]])

    @property
    def shape(self) -> WeightShape:
        w = self.weights
        gaps = -np.diff(w)
        if np.all(gaps > WEIGHT_TOL):
            return WeightShape.STRICT_FULL
        k = self.K
        # strict head needs k < D-1 (at least two zeros) and strictly
        # descending positive entries; the tail is zero by definition of K
        if k < w.size - 1 and np.all(gaps[: k - 1] > WEIGHT_TOL):
            return WeightShape.STRICT_HEAD
        return WeightShape.OTHER


@dataclass(frozen=True)
class BasisMap:
    """Orthogonal/unitary matrix mapping the exact eigenbasis to a trial basis.

    ``mode`` is metadata ("orthogonal", "unitary" or "permutation"); every
    error functional depends on the map only through X_{kl} = |U_{kl}|^2.
    """

    matrix: np.ndarray
    mode: Optional[str] = None

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError("basis map must be a square matrix")
        if np.iscomplexobj(m) and not np.any(np.abs(m.imag) > 0):
            m = m.real
        m = np.array(m, copy=True)
        if not np.all(np.isfinite(m.real)) or (
            np.iscomplexobj(m) and not np.all(np.isfinite(m.imag))
        ):
            raise ValidationError("basis map contains non-finite entries")
        gram = m.conj().T @ m
        err = float(np.max(np.abs(gram - np.eye(m.shape[0]))))
        if err > MATRIX_TOL:
            raise NonUnitaryError(
                "matrix is not unitary: max |U^dag U - 1| = %.3g" % err
            )
        mode = self.mode
        if mode is None:
            mode = "unitary" if np.iscomplexobj(m) else "orthogonal"
        if mode not in ("orthogonal", "unitary", "permutation"):
            raise ValidationError("unknown basis-map mode %r" % (mode,))
        if mode == "permutation":
            near = np.minimum(np.abs(np.abs(m) - 1.0), np.abs(m))
            if float(np.max(near)) > MATRIX_TOL:
                raise ValidationError("permutation mode requires 0/1 entries")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "mode", mode)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class UnistochasticMatrix:
    """Doubly stochastic matrix X, typically X_{kl} = |U_{kl}|^2."""

    X: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.X, dtype=float)
        if x.ndim != 2 or x.shape[0] != x.shape[1]:
            raise DimensionMismatchError("X must be a square matrix")
        if np.any(x < -MATRIX_TOL):
            raise ValidationError("X must be entrywise non-negative")
        rows = np.abs(x.sum(axis=1) - 1.0)
        cols = np.abs(x.sum(axis=0) - 1.0)
        worst = float(max(rows.max(), cols.max()))
        if worst > MATRIX_TOL:
            raise ValidationError(
                "X is not doubly stochastic: worst row/col sum error %.3g" % worst
            )
        object.__setattr__(self, "X", _readonly(x))

    @property
    def dim(self) -> int:
        return self.X.shape[0]

    def w_tilde(self, w: Union["WeightVector", np.ndarray]) -> np.ndarray:
        """Shuffled weights X w."""
        return self.X @ _weights_array(w, self.dim)

    def E_tilde(self, E: Union["EnergySpectrum", np.ndarray]) -> np.ndarray:
        """Trial-basis energy expectations X^T E."""
        return self.X.T @ _energy_array(E, self.dim)


@dataclass(frozen=True)
class ErrorBundle:
    """All error functionals of one trial ensemble state.

    ``sum_psi_K`` and ``sum_abs_E_K`` are restricted to the targeted states
    k < K; ``kyfan_partials`` holds F_k = sum_{j<=k} (E~_j - E_j).
    """

    delta_E_w: float
    delta_rho_w: float
    delta_psi: np.ndarray
    delta_E_k: np.ndarray
    sum_psi_K: float
    sum_abs_E_K: float
    kyfan_partials: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "delta_psi", _readonly(self.delta_psi))
        object.__setattr__(self, "delta_E_k", _readonly(self.delta_E_k))
        object.__setattr__(self, "kyfan_partials", _readonly(self.kyfan_partials))


def as_weight_vector(w) -> WeightVector:
    """Coerce an array-like (or pass through a WeightVector)."""
    return w if isinstance(w, WeightVector) else WeightVector(np.asarray(w, dtype=float))


def as_energy_spectrum(E) -> EnergySpectrum:
    """Coerce an array-like (or pass through an EnergySpectrum)."""
    return E if isinstance(E, EnergySpectrum) else EnergySpectrum(np.asarray(E, dtype=float))


def _weights_array(w, dim: Optional[int] = None) -> np.ndarray:
    arr = w.weights if isinstance(w, WeightVector) else np.asarray(w, dtype=float)
    if dim is not None and arr.size != dim:
        raise DimensionMismatchError(
            "weight vector has length %d, expected %d" % (arr.size, dim)
        )
    return arr


def _energy_array(E, dim: Optional[int] = None) -> np.ndarray:
    arr = E.values if isinstance(E, EnergySpectrum) else np.asarray(E, dtype=float)
    if dim is not None and arr.size != dim:
        raise DimensionMismatchError(
            "energy spectrum has length %d, expected %d" % (arr.size, dim)
        )
    return arr


def ensemble_energy(w, E) -> float:
    """Exact ensemble energy E_w = sum_k w_k E_k (w descending, E ascending)."""
    wv = as_weight_vector(w)
    ev = as_energy_spectrum(E)
    if wv.dim != ev.dim:
        raise DimensionMismatchError(
            "weight vector (D=%d) and spectrum (D=%d) differ" % (wv.dim, ev.dim)
        )
    return float(wv.weights @ ev.values)


def unistochastic_from_basis(U: BasisMap) -> UnistochasticMatrix:
    """X_{kl} = |U_{kl}|^2 for a validated basis map."""
    if not isinstance(U, BasisMap):
        U = BasisMap(U)
    return UnistochasticMatrix(np.abs(U.matrix) ** 2)


def error_bundle(U, w, E) -> ErrorBundle:
    """Evaluate every error functional for one trial state.

    ``U`` may be a BasisMap, a raw (square, unitary) matrix, or an already
    computed UnistochasticMatrix.
    """
    if isinstance(U, UnistochasticMatrix):
        X = U
    else:
        X = unistochastic_from_basis(U)
    wv = as_weight_vector(w)
    ev = as_energy_spectrum(E)
    if not (X.dim == wv.dim == ev.dim):
        raise DimensionMismatchError(
            "dimension mismatch: X is %d, w is %d, E is %d" % (X.dim, wv.dim, ev.dim)
        )
    batch = error_bundle_batch(X.X[np.newaxis], wv, ev)
    return ErrorBundle(
        delta_E_w=float(batch["delta_E_w"][0]),
        delta_rho_w=float(batch["delta_rho_w"][0]),
        delta_psi=batch["delta_psi"][0],
        delta_E_k=batch["delta_E_k"][0],
        sum_psi_K=float(batch["sum_psi_K"][0]),
        sum_abs_E_K=float(batch["sum_abs_E_K"][0]),
        kyfan_partials=batch["kyfan_partials"][0],
    )


def error_bundle_batch(X: np.ndarray, w, E) -> dict:
    """Vectorized error functionals for a stack of doubly stochastic matrices.

    Parameters
    ----------
    X : ndarray, shape (n, D, D)
        Stack of doubly stochastic matrices (not re-validated here).
    w, E : WeightVector / EnergySpectrum or array_like

    Returns
    -------
    dict of ndarrays keyed ``delta_E_w`` (n,), ``delta_rho_w`` (n,),
    ``delta_psi`` (n, D), ``delta_E_k`` (n, D), ``sum_psi_K`` (n,),
    ``sum_abs_E_K`` (n,), ``kyfan_partials`` (n, D).
    """
    wv = as_weight_vector(w)
    ev = as_energy_spectrum(E)
    X = np.asarray(X, dtype=float)
    if X.ndim != 3 or X.shape[1] != X.shape[2]:
        raise DimensionMismatchError("X batch must have shape (n, D, D)")
    if X.shape[1] != wv.dim or wv.dim != ev.dim:
        raise DimensionMismatchError("batch dimension does not match w/E")
    warr, earr = wv.weights, ev.values
    K = wv.K

    w_tilde = X @ warr                              # (n, D)
    E_tilde = np.einsum("nkl,k->nl", X, earr)       # (n, D), (X^T E)_l
    dE_k = E_tilde - earr
    dE_w = dE_k @ warr
    drho = 2.0 * (warr @ warr - w_tilde @ warr)
    dpsi = 1.0 - np.einsum("nkk->nk", X)
    return {
        "delta_E_w": dE_w,
        "delta_rho_w": drho,
        "delta_psi": dpsi,
        "delta_E_k": dE_k,
        "sum_psi_K": dpsi[:, :K].sum(axis=1),
        "sum_abs_E_K": np.abs(dE_k[:, :K]).sum(axis=1),
        "kyfan_partials": np.cumsum(dE_k, axis=1),
    }


def rr_state_bounds(E) -> Tuple[float, float]:
    """Ground-state error prefactors (q_minus, q_plus) of the pure variational
    principle: q_minus = 1/(E_{D-1} - E_0), q_plus = 1/(E_1 - E_0)."""
    ev = as_energy_spectrum(E)
    vals = ev.values
    return 1.0 / float(vals[-1] - vals[0]), 1.0 / float(vals[1] - vals[0])


def observable_error_bound(hs_norm_A: float, a_plus: float, delta_E_w: float) -> float:
    """Upper bound ||A||_HS * sqrt(a_plus * dE_w) on an observable's
    expectation-value error over the ensemble."""
    for name, val in (("hs_norm_A", hs_norm_A), ("a_plus", a_plus), ("delta_E_w", delta_E_w)):
        if val < 0:
            raise RangeError("%s must be non-negative, got %g" % (name, val))
    return float(hs_norm_A * np.sqrt(a_plus * delta_E_w))
