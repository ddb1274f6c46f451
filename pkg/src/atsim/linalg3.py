"""Dense complex 3x3 linear algebra for the three-level simulator.

Everything in the package funnels through these few primitives: Hermitian
eigendecomposition with a fixed ordering/phase convention, unitary
propagators built from it, and basis conjugation.  States carry an explicit
basis tag ("bare" = (|0>, |1>, |2>), "dressed" = (|+>, |->, |2>)) so that
frame mix-ups fail loudly instead of silently permuting rows.

Units: Hamiltonian entries are angular frequencies in rad/us, times in us.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DIM = 3


class NumericalError(RuntimeError):
    """A computation failed numerically (step-size floor, stalled solve, ...)."""


BARE = "bare"
DRESSED = "dressed"
BASES = (BARE, DRESSED)

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
NORM_TOL = 1e-10
TRACE_TOL = 1e-9
PSD_TOL = 1e-7
DEGENERACY_TOL = 1e-10
PHASE_TOL = 1e-12


def as_matrix3(m) -> np.ndarray:
    """Coerce input to a complex 3x3 ndarray (copied)."""
    a = np.array(m, dtype=complex)
    if a.shape != (DIM, DIM):
        raise ValueError(f"expected a 3x3 matrix, got shape {a.shape}")
    return a


def max_asymmetry(m: np.ndarray) -> float:
    """Largest entrywise deviation |M - M^dagger|."""
    return float(np.max(np.abs(m - m.conj().T)))


def require_hermitian(m, tol: float = HERMITIAN_TOL, name: str = "matrix") -> np.ndarray:
    a = as_matrix3(m)
    asym = max_asymmetry(a)
    if asym > tol:
        raise ValueError(
            f"{name} is not Hermitian: max |M - M^dagger| = {asym:.3e} exceeds {tol:.1e}"
        )
    return a


def unitarity_defect(u: np.ndarray) -> float:
    """Largest entrywise deviation |U^dagger U - I|."""
    return float(np.max(np.abs(u.conj().T @ u - np.eye(DIM))))


def require_unitary(u, tol: float = UNITARY_TOL, name: str = "matrix") -> np.ndarray:
    a = as_matrix3(u)
    defect = unitarity_defect(a)
    if defect > tol:
        raise ValueError(
            f"{name} is not unitary: max |U^dagger U - I| = {defect:.3e} exceeds {tol:.1e}"
        )
    return a


def _validate_basis(basis: str) -> str:
    if basis not in BASES:
        raise ValueError(f"unknown basis tag {basis!r}; expected one of {BASES}")
    return basis


@dataclass
class StateVector:
    """Normalized pure state, three complex amplitudes plus a basis tag."""

    amplitudes: np.ndarray
    basis: str = BARE

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (DIM,):
            raise ValueError(f"state vector needs 3 amplitudes, got {amps.shape}")
        _validate_basis(self.basis)
        norm_err = abs(float(np.vdot(amps, amps).real) - 1.0)
        if norm_err > NORM_TOL:
            raise ValueError(f"state vector not normalized: | ||psi||^2 - 1 | = {norm_err:.3e}")
        self.amplitudes = amps

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.basis)


@dataclass
class DensityMatrix:
    """Unit-trace positive-semidefinite 3x3 matrix plus a basis tag."""

    matrix: np.ndarray
    basis: str = BARE

    def __post_init__(self):
        m = as_matrix3(self.matrix)
        _validate_basis(self.basis)
        trace_err = abs(float(np.trace(m).real) - 1.0)
        if trace_err > TRACE_TOL:
            raise ValueError(f"density matrix trace off unity by {trace_err:.3e}")
        asym = max_asymmetry(m)
        if asym > 1e-10:
            raise ValueError(f"density matrix not Hermitian: asymmetry {asym:.3e}")
        lo = float(np.min(np.linalg.eigvalsh(0.5 * (m + m.conj().T))))
        if lo < -PSD_TOL:
            raise ValueError(f"density matrix not positive semidefinite: min eigenvalue {lo:.3e}")
        self.matrix = m

    def population(self, level: int) -> float:
        return float(self.matrix[level, level].real)


def basis_state(level: int, basis: str = BARE) -> StateVector:
    amps = np.zeros(DIM, dtype=complex)
    amps[level] = 1.0
    return StateVector(amps, basis)


@dataclass
class EigenSystem:
    """Eigendecomposition of a Hermitian 3x3 matrix.

    ``values`` ascending; column k of ``vectors`` is the eigenvector for
    ``values[k]``.  Each column is phased so its first entry with modulus
    above ``PHASE_TOL`` is real and non-negative; exact degeneracies are
    ordered lexicographically by the real parts of the vector entries.
    """

    values: np.ndarray
    vectors: np.ndarray
    residual: float = field(default=0.0)


def _fix_column_phases(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > PHASE_TOL)
        if idx.size == 0:
            continue
        pivot = col[idx[0]]
        out[:, k] = col * (abs(pivot) / pivot)
    return out


def _canonicalize_degenerate(values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Re-orthonormalize and deterministically order degenerate clusters."""
    out = vectors.copy()
    start = 0
    while start < DIM:
        stop = start + 1
        while stop < DIM and values[stop] - values[start] < DEGENERACY_TOL:
            stop += 1
        if stop - start > 1:
            block = out[:, start:stop]
            # Gram-Schmidt inside the degenerate subspace (eigh output is
            # already orthonormal; this pins the result after phase fixing).
            q, _ = np.linalg.qr(block)
            q = _fix_column_phases(q)
            order = np.lexsort(q.real[::-1])  # lexicographic by rows, first row major
            out[:, start:stop] = q[:, order]
        start = stop
    return out


def eig_hermitian(h) -> EigenSystem:
    """Eigendecompose a Hermitian 3x3 matrix with the package conventions.

    Rejects non-Hermitian input, reporting the max asymmetry.
    """
    a = require_hermitian(h, name="eig_hermitian input")
    values, vectors = np.linalg.eigh(a)
    vectors = _fix_column_phases(vectors)
    vectors = _canonicalize_degenerate(values, vectors)
    scale = max(float(np.linalg.norm(a)), 1e-300)
    residual = float(np.linalg.norm(a @ vectors - vectors * values)) / scale
    return EigenSystem(values=values, vectors=vectors, residual=residual)


def propagator(h, t: float) -> np.ndarray:
    """U = exp(-i H t) via eigendecomposition, for Hermitian H and t >= 0."""
    if t < 0:
        raise ValueError(f"propagation time must be non-negative, got {t}")
    sys = eig_hermitian(h)
    phases = np.exp(-1j * sys.values * t)
    u = (sys.vectors * phases) @ sys.vectors.conj().T
    defect = unitarity_defect(u)
    if defect > UNITARY_TOL:
        raise ValueError(f"propagator lost unitarity: defect {defect:.3e}")
    return u


def conjugate_basis(h, v) -> np.ndarray:
    """Return V^dagger H V for unitary V; the spectrum is preserved exactly."""
    a = as_matrix3(h)
    u = require_unitary(v, name="conjugate_basis transform")
    return u.conj().T @ a @ u
