"""Hamiltonians and frames for the coherently driven V-type three-level system.

Level order is fixed package-wide as (|0>, |1>, |2>) = (m_s = 0, -1, +1);
the dressed order is (|+>, |->, |2>).  All drive quantities are angular
frequencies in rad/us; user-facing "MHz" values are ordinary frequencies and
get multiplied by 2*pi on ingestion (see ``DriveParams.from_mhz``).

The rotating-frame Hamiltonian is

    [[0,              Oc/2 e^{+i pc}, Op/2 e^{+i pp}],
     [Oc/2 e^{-i pc}, dc,             0             ],
     [Op/2 e^{-i pp}, 0,              dp            ]]

with coupling (probe) Rabi frequency Oc (Op) and detuning dc (dp).  At
resonant coupling (dc = 0) the dressed frame diagonalizes the {|0>, |1>}
block via |+-> = (|0> +- |1>)/sqrt(2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .linalg3 import (
    BARE,
    DRESSED,
    DensityMatrix,
    StateVector,
    conjugate_basis,
    eig_hermitian,
    require_hermitian,
)

TWO_PI = 2.0 * math.pi

#: Columns are the resonant dressed basis vectors (|+>, |->, |2>) expressed in
#: the bare basis; the matrix is real, symmetric and involutory.
DRESSED_TO_BARE = np.array(
    [
        [1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0), 0.0],
        [1.0 / math.sqrt(2.0), -1.0 / math.sqrt(2.0), 0.0],
        [0.0, 0.0, 1.0],
    ],
    dtype=complex,
)


def mhz_to_rad(value_mhz: float) -> float:
    """Ordinary frequency in MHz -> angular frequency in rad/us."""
    return TWO_PI * value_mhz


def rad_to_mhz(value_rad: float) -> float:
    """Angular frequency in rad/us -> ordinary frequency in MHz."""
    return value_rad / TWO_PI


@dataclass(frozen=True)
class GroundStateParams:
    """Static spin-1 ground-state parameters (GHz scale).

    d_ghz: zero-field splitting; gamma_e_ghz_per_t: gyromagnetic ratio;
    b_z_t: axial magnetic field in tesla.
    """

    d_ghz: float = 2.87
    gamma_e_ghz_per_t: float = 28.03
    b_z_t: float = 0.0

    def __post_init__(self):
        if not self.d_ghz > 0:
            raise ValueError(f"zero-field splitting must be positive, got {self.d_ghz}")
        if self.b_z_t < 0:
            raise ValueError(f"axial field must be non-negative, got {self.b_z_t}")


def transition_frequencies(p: GroundStateParams) -> tuple[float, float]:
    """(omega_01, omega_02) in GHz from the Zeeman-split spin-1 triplet.

    With S_z = diag(0, -1, +1) the level energies are D*Sz^2 - gamma_e*Bz*Sz,
    so omega_01 = D - gamma_e*Bz and omega_02 = D + gamma_e*Bz.
    """
    zeeman = p.gamma_e_ghz_per_t * p.b_z_t
    return p.d_ghz - zeeman, p.d_ghz + zeeman


@dataclass(frozen=True)
class DriveParams:
    """Two-tone drive: Rabi frequencies, detunings and initial phases.

    omega_c/omega_p and delta_c/delta_p are angular frequencies in rad/us;
    phi_c/phi_p in rad.
    """

    omega_c: float
    omega_p: float
    delta_c: float = 0.0
    delta_p: float = 0.0
    phi_c: float = 0.0
    phi_p: float = 0.0

    def __post_init__(self):
        if self.omega_c < 0 or self.omega_p < 0:
            raise ValueError(
                f"Rabi frequencies must be non-negative, got "
                f"omega_c={self.omega_c}, omega_p={self.omega_p}"
            )
        for name in ("omega_c", "omega_p", "delta_c", "delta_p", "phi_c", "phi_p"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def from_mhz(cls, omega_c, omega_p, delta_c=0.0, delta_p=0.0, phi_c=0.0, phi_p=0.0):
        """Build from ordinary frequencies in MHz (phases stay in rad)."""
        return cls(
            omega_c=mhz_to_rad(omega_c),
            omega_p=mhz_to_rad(omega_p),
            delta_c=mhz_to_rad(delta_c),
            delta_p=mhz_to_rad(delta_p),
            phi_c=phi_c,
            phi_p=phi_p,
        )

    def replace(self, **kwargs) -> "DriveParams":
        fields = dict(
            omega_c=self.omega_c,
            omega_p=self.omega_p,
            delta_c=self.delta_c,
            delta_p=self.delta_p,
            phi_c=self.phi_c,
            phi_p=self.phi_p,
        )
        fields.update(kwargs)
        return DriveParams(**fields)

    def effective_rabi(self) -> float:
        """Generalized coupling Rabi frequency sqrt(delta_c^2 + omega_c^2)."""
        return math.hypot(self.delta_c, self.omega_c)


@dataclass(frozen=True)
class DressedBasis:
    """Orthonormal triple (|+>, |->, |2>) expressed in the bare basis."""

    plus: np.ndarray
    minus: np.ndarray
    two: np.ndarray

    def __post_init__(self):
        cols = np.column_stack([self.plus, self.minus, self.two]).astype(complex)
        gram = cols.conj().T @ cols
        defect = float(np.max(np.abs(gram - np.eye(3))))
        if defect > 1e-10:
            raise ValueError(f"dressed basis not orthonormal: defect {defect:.3e}")

    def matrix(self) -> np.ndarray:
        """Columns (|+>, |->, |2>) in bare coordinates; unitary."""
        return np.column_stack([self.plus, self.minus, self.two]).astype(complex)


def rotating_frame_hamiltonian(d: DriveParams) -> np.ndarray:
    """Two-tone rotating-frame Hamiltonian in the bare basis (rad/us)."""
    ec = 0.5 * d.omega_c * np.exp(1j * d.phi_c)
    ep = 0.5 * d.omega_p * np.exp(1j * d.phi_p)
    return np.array(
        [
            [0.0, ec, ep],
            [np.conj(ec), d.delta_c, 0.0],
            [np.conj(ep), 0.0, d.delta_p],
        ],
        dtype=complex,
    )


def dressed_hamiltonian(d: DriveParams) -> np.ndarray:
    """Resonant-coupling Hamiltonian in the dressed basis (|+>, |->, |2>).

    Requires delta_c = 0 and zero drive phases; unitarily equivalent to
    ``rotating_frame_hamiltonian`` through the (|0>, |1>) Hadamard block, so
    the two spectra agree exactly.
    """
    if d.delta_c != 0.0:
        raise ValueError(f"dressed frame requires resonant coupling, got delta_c={d.delta_c}")
    if d.phi_c != 0.0 or d.phi_p != 0.0:
        raise ValueError("dressed frame is written for zero drive phases")
    g = math.sqrt(2.0) * d.omega_p / 4.0
    return np.array(
        [
            [0.5 * d.omega_c, 0.0, g],
            [0.0, -0.5 * d.omega_c, g],
            [g, g, d.delta_p],
        ],
        dtype=complex,
    )


def effective_two_level(d: DriveParams, branch: int) -> np.ndarray:
    """Dressed Hamiltonian after second-order elimination of one branch.

    For branch +1 the probe addresses |+> <-> |2> and the far-detuned |->
    level is decoupled, leaving a probe-induced shift +Op^2/(8 Oc) on |2>;
    branch -1 mirrors this with shift -Op^2/(8 Oc).  Perturbative, intended
    for omega_c >> omega_p.
    """
    if branch not in (+1, -1):
        raise ValueError(f"branch must be +1 or -1, got {branch}")
    if d.delta_c != 0.0:
        raise ValueError(f"effective two-level model requires delta_c=0, got {d.delta_c}")
    if d.omega_c <= 0:
        raise ValueError("second-order elimination undefined for omega_c = 0")
    if d.omega_p > 0 and d.omega_c / d.omega_p < 5:
        warnings.warn(
            f"omega_c/omega_p = {d.omega_c / d.omega_p:.2f} < 5; "
            "second-order elimination may be inaccurate",
            stacklevel=2,
        )
    g = math.sqrt(2.0) * d.omega_p / 4.0
    shift = d.omega_p**2 / (8.0 * d.omega_c)
    h = np.diag([0.5 * d.omega_c, -0.5 * d.omega_c, 0.0]).astype(complex)
    if branch == +1:
        h[0, 2] = h[2, 0] = g
        h[2, 2] = d.delta_p + shift
    else:
        h[1, 2] = h[2, 1] = g
        h[2, 2] = d.delta_p - shift
    return h


def probe_resonance(d: DriveParams, branch: int = +1) -> float:
    """Probe detuning that makes the chosen dressed branch resonant.

    Includes the second-order probe shift: delta_p = +-Oc/2 -+ Op^2/(8 Oc).
    """
    if branch not in (+1, -1):
        raise ValueError(f"branch must be +1 or -1, got {branch}")
    if d.omega_c <= 0:
        raise ValueError("branch resonance undefined for omega_c = 0")
    shift = d.omega_p**2 / (8.0 * d.omega_c)
    return branch * (0.5 * d.omega_c - shift)


def nonresonant_dressed(d: DriveParams) -> tuple[np.ndarray, DressedBasis]:
    """Dressed frame for detuned coupling: basis and exactly conjugated H.

    |+-> diagonalize the driven {|0>, |1>} block with eigenvalues
    (delta_c +- Omega_eff)/2.  The returned Hamiltonian is the exact unitary
    conjugation of the rotating-frame matrix into (|+>, |->, |2>); its probe
    couplings are Oc*Op / (2*sqrt(2*Oeff^2 +- 2*dc*Oeff)).
    """
    if d.phi_c != 0.0 or d.phi_p != 0.0:
        raise ValueError("dressed frame is written for zero drive phases")
    omega_eff = d.effective_rabi()
    if omega_eff <= 0:
        raise ValueError("dressed basis undefined for omega_c = delta_c = 0")
    n_plus_sq = 2.0 * omega_eff**2 + 2.0 * d.delta_c * omega_eff
    n_minus_sq = 2.0 * omega_eff**2 - 2.0 * d.delta_c * omega_eff
    if n_plus_sq <= 1e-30 or n_minus_sq <= 1e-30:
        raise ValueError(
            "dressed basis degenerates without coupling amplitude "
            f"(omega_c={d.omega_c}, delta_c={d.delta_c})"
        )
    plus = np.array([d.omega_c, d.delta_c + omega_eff, 0.0], dtype=complex)
    plus /= math.sqrt(n_plus_sq)
    minus = np.array([d.omega_c, d.delta_c - omega_eff, 0.0], dtype=complex)
    minus /= math.sqrt(n_minus_sq)
    two = np.array([0.0, 0.0, 1.0], dtype=complex)
    basis = DressedBasis(plus=plus, minus=minus, two=two)
    h = conjugate_basis(rotating_frame_hamiltonian(d), basis.matrix())
    return require_hermitian(h, tol=1e-10, name="nonresonant dressed Hamiltonian"), basis


def ats_splitting(d: DriveParams) -> float:
    """Doublet splitting of the probe spectrum (rad/us).

    Resonant coupling: Oc - Op^2/(4 Oc), the separation of the two
    second-order branch resonances.  Detuned coupling: ~ Omega_eff.
    """
    if d.omega_c <= 0:
        raise ValueError("splitting undefined for omega_c = 0")
    if d.delta_c == 0.0:
        return d.omega_c - d.omega_p**2 / (4.0 * d.omega_c)
    return d.effective_rabi()


def eigenenergies_detuned(d: DriveParams, omega_02: float) -> tuple[float, float]:
    """Absolute dressed energies E+- = omega_02 + delta_c/2 +- Omega_eff/2."""
    omega_eff = d.effective_rabi()
    return (
        omega_02 + 0.5 * d.delta_c + 0.5 * omega_eff,
        omega_02 + 0.5 * d.delta_c - 0.5 * omega_eff,
    )


def to_bare(state):
    """Map a tagged state (vector or density matrix) to the bare basis.

    Dressed tags use the resonant dressed frame; bare input passes through.
    """
    if isinstance(state, StateVector):
        if state.basis == BARE:
            return state
        if state.basis == DRESSED:
            return StateVector(DRESSED_TO_BARE @ state.amplitudes, BARE)
    elif isinstance(state, DensityMatrix):
        if state.basis == BARE:
            return state
        if state.basis == DRESSED:
            t = DRESSED_TO_BARE
            return DensityMatrix(t @ state.matrix @ t.conj().T, BARE)
    else:
        raise TypeError(f"expected StateVector or DensityMatrix, got {type(state).__name__}")
    raise ValueError(f"cannot convert basis tag {state.basis!r} to bare")


def dressed_state(label: str) -> StateVector:
    """Convenience constructor for |+>, |-> or |2> (dressed-tagged)."""
    index = {"+": 0, "-": 1, "2": 2}
    if label not in index:
        raise ValueError(f"unknown dressed label {label!r}")
    amps = np.zeros(3, dtype=complex)
    amps[index[label]] = 1.0
    return StateVector(amps, DRESSED)


def spectrum(h) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix (thin wrapper)."""
    return eig_hermitian(h).values
