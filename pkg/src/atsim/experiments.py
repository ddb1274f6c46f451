"""Pulse schedules, spectral scans, interference traces and dip extraction.

The measurement protocol throughout is: initialize |0>, optionally apply
ideal instantaneous pre-pulses, drive coupling+probe simultaneously for a
fixed duration, then read the |0> population.  Photoluminescence follows the
two-value contrast model pl = 1 - C + C*p0 with C = 0.22 by default, so a
fully mixed state reads pl = 1 - 2C/3 ~ 0.853.

Spectral scans step the probe detuning; interference traces sample the
duration on the grid t = 2*pi*n/omega_c where the dressed dynamical phase
rewinds and the cos^4 interference envelope is exposed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg3 import (
    DIM,
    DensityMatrix,
    StateVector,
    basis_state,
    eig_hermitian,
    propagator,
)
from .lindblad import DecoherenceParams, dissipators_from_params, evolve_rk4
from .model import (
    DriveParams,
    probe_resonance,
    rotating_frame_hamiltonian,
    to_bare,
)

DEFAULT_CONTRAST = 0.22
DEFAULT_SCAN_POINTS = 301
DEFAULT_SCAN_SPAN = 1.5  # probe-detuning half-span in units of omega_c
SQRT2 = math.sqrt(2.0)
TWO_PI = 2.0 * math.pi


def population_p0(state) -> float:
    """Population of |0>; dressed-tagged inputs are converted first."""
    bare = to_bare(state)
    if isinstance(bare, StateVector):
        return float(abs(bare.amplitudes[0]) ** 2)
    return bare.population(0)


def pl_from_p0(p0: float, contrast: float = DEFAULT_CONTRAST) -> float:
    """Normalized photoluminescence 1 - C + C*p0."""
    if not 0.0 <= p0 <= 1.0 + 1e-12:
        raise ValueError(f"p0 must be a probability, got {p0}")
    return 1.0 - contrast + contrast * min(p0, 1.0)


def analytic_interference(omega_p: float, omega_c: float, t):
    """Interference law for |0> population at the upper branch resonance.

    P(t) = |cos(sqrt(2)*omega_p*t/4) + exp(i*omega_c*t)|^2 / 4, the sum of the
    driven |+> <-> |2> amplitude and the spectator |-> dynamical phase.
    """
    t = np.asarray(t, dtype=float)
    amp = np.cos(SQRT2 * omega_p * t / 4.0) + np.exp(1j * omega_c * t)
    out = 0.25 * np.abs(amp) ** 2
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class OptimalDuration:
    """A drive duration scoring well against the dark-dip conditions."""

    t: float
    family: str  # "A": odd cos^4 node on the 2n*pi coupling grid; "B": even node, odd grid
    n: int
    k: int
    residual: float
    p0: float


#: |cos - target| residual bound for a duration to count as dark (p0 <= 0.01)
DARK_RESIDUAL = 0.2


def optimal_durations(omega_c: float, omega_p: float, max_index: int) -> list:
    """Durations on the coupling-phase grid that reach the dark interference dip.

    Family A pairs t = 2n*pi/omega_c with cos(sqrt2*omega_p*t/4) = -1
    (omega_p*t = 2*sqrt2*(2k-1)*pi); family B pairs t = (2n-1)*pi/omega_c with
    cos(...) = +1 (omega_p*t = 2*sqrt2*(2k)*pi).  Exact simultaneous solutions
    require rational ratios, so for each (family, k) the grid point with the
    smallest |cos - target| residual is kept; entries whose residual exceeds
    ``DARK_RESIDUAL`` (interference floor above p0 = 0.01) are dropped.
    Returned shortest first.
    """
    if omega_c <= 0 or omega_p <= 0:
        raise ValueError("optimal durations need positive Rabi frequencies")
    if max_index < 1:
        raise ValueError(f"max_index must be >= 1, got {max_index}")
    best: dict[tuple, OptimalDuration] = {}
    for family, target in (("A", -1.0), ("B", 1.0)):
        for n in range(1, max_index + 1):
            if family == "A":
                t = TWO_PI * n / omega_c
            else:
                t = (2.0 * n - 1.0) * math.pi / omega_c
            x = omega_p * t / (2.0 * SQRT2 * math.pi)
            if family == "A":
                m = max(1, 2 * int(round((x - 1.0) / 2.0)) + 1)  # nearest odd multiplier
                k = (m + 1) // 2
            else:
                k = int(round(x / 2.0))
                if k < 1:
                    # cos ~ +1 only because the probe barely acted; not a
                    # solution of the even-node condition.
                    continue
            residual = abs(math.cos(SQRT2 * omega_p * t / 4.0) - target)
            candidate = OptimalDuration(
                t=t,
                family=family,
                n=n,
                k=k,
                residual=residual,
                p0=float(analytic_interference(omega_p, omega_c, t)),
            )
            key = (family, k)
            if key not in best or candidate.residual < best[key].residual:
                best[key] = candidate
    kept = [c for c in best.values() if c.residual <= DARK_RESIDUAL]
    return sorted(kept, key=lambda c: c.t)


def optimal_duration(drive: DriveParams) -> float:
    """Shortest family-A dark duration: t = 2n*pi/omega_c, n ~ sqrt2*Oc/Op."""
    if drive.omega_c <= 0 or drive.omega_p <= 0:
        raise ValueError("optimal duration needs positive Rabi frequencies")
    n = max(1, int(round(SQRT2 * drive.omega_c / drive.omega_p)))
    return TWO_PI * n / drive.omega_c


def detuning_scan_duration(drive: DriveParams) -> float:
    """Scan duration for detuned coupling: dressed-phase-aligned 2pi pulse.

    Picks t = 2n*pi/Omega_eff (the two dressed branches rephase) with n set
    so the stronger branch accumulates pulse area ~ 2pi.  Aligning on the
    weaker branch would stretch t and drown the dips in coherent fringes.
    Reduces to ``optimal_duration`` at delta_c = 0.
    """
    if drive.omega_c <= 0 or drive.omega_p <= 0:
        raise ValueError("scan duration needs positive Rabi frequencies")
    omega_eff = drive.effective_rabi()
    branch = -1.0 if drive.delta_c > 0 else +1.0
    g = drive.omega_c * drive.omega_p / (
        2.0 * math.sqrt(2.0 * omega_eff**2 + branch * 2.0 * drive.delta_c * omega_eff)
    )
    n = max(1, int(round(omega_eff / (2.0 * g))))
    return TWO_PI * n / omega_eff


@dataclass(frozen=True)
class PrePulse:
    """Ideal instantaneous rotation on one two-level block.

    ``transition`` selects the block: "coupling" acts on (|0>, |1>), "probe"
    on (|0>, |2>).  A pi/2 rotation about "y" on the coupling block takes
    |0> to (|0> + |1>)/sqrt(2).
    """

    transition: str
    angle: float
    axis: str = "y"

    def __post_init__(self):
        if self.transition not in ("coupling", "probe"):
            raise ValueError(f"unknown transition {self.transition!r}")
        if self.axis not in ("x", "y"):
            raise ValueError(f"rotation axis must be 'x' or 'y', got {self.axis!r}")
        if not math.isfinite(self.angle):
            raise ValueError("rotation angle must be finite")

    def matrix(self) -> np.ndarray:
        c = math.cos(0.5 * self.angle)
        s = math.sin(0.5 * self.angle)
        if self.axis == "x":
            block = np.array([[c, -1j * s], [-1j * s, c]])
        else:
            block = np.array([[c, -s], [s, c]], dtype=complex)
        out = np.eye(DIM, dtype=complex)
        j = 1 if self.transition == "coupling" else 2
        out[0, 0] = block[0, 0]
        out[0, j] = block[0, 1]
        out[j, 0] = block[1, 0]
        out[j, j] = block[1, 1]
        return out


@dataclass(frozen=True)
class PulseSchedule:
    """init -> pre-pulses -> simultaneous two-tone drive -> projective readout."""

    drive: DriveParams
    duration: float
    init_state: object = None  # StateVector or DensityMatrix; default |0>
    pre_pulses: tuple = ()
    readout: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration >= 0):
            raise ValueError(f"duration must be non-negative, got {self.duration}")
        if self.readout not in (0, 1, 2):
            raise ValueError(f"readout level must be 0, 1 or 2, got {self.readout}")
        object.__setattr__(self, "pre_pulses", tuple(self.pre_pulses))
        for p in self.pre_pulses:
            if not isinstance(p, PrePulse):
                raise ValueError("pre_pulses must be PrePulse instances")


@dataclass(frozen=True)
class RunResult:
    p0: float
    pl: float
    rho: DensityMatrix


def _initial_density(init_state) -> np.ndarray:
    if init_state is None:
        state = basis_state(0)
    else:
        state = to_bare(init_state)
    if isinstance(state, StateVector):
        state = state.density()
    return state.matrix.copy()


def _drive_step(drive: DriveParams, h: np.ndarray) -> float:
    """Fixed step: >= 50 steps per fastest drive cycle and dt*||H|| <= 0.1."""
    scale = max(drive.omega_c, drive.omega_p, abs(drive.delta_p), abs(drive.delta_c), 1.0)
    norm_h = float(np.max(np.abs(np.linalg.eigvalsh(h)))) if np.any(h) else 0.0
    dt = TWO_PI / scale / 50.0
    if norm_h > 0:
        dt = min(dt, 0.1 / norm_h)
    return dt


def run_schedule(schedule: PulseSchedule, dec: DecoherenceParams | None = None,
                 dt: float | None = None) -> RunResult:
    """Execute one pulse schedule; returns readout probability, pl and state.

    Pre-pulses are ideal zero-duration rotations.  The main drive evolves
    unitarily when ``dec`` is absent (or carries no rates), otherwise through
    the master equation.  ``pl`` always reflects the |0> population.
    """
    rho = _initial_density(schedule.init_state)
    for pulse in schedule.pre_pulses:
        r = pulse.matrix()
        rho = r @ rho @ r.conj().T
    h = rotating_frame_hamiltonian(schedule.drive)
    contrast = dec.contrast if dec is not None else DEFAULT_CONTRAST
    if schedule.duration > 0:
        if dec is None or not dec.has_dissipation():
            u = propagator(h, schedule.duration)
            rho = u @ rho @ u.conj().T
            final = DensityMatrix(0.5 * (rho + rho.conj().T))
        else:
            ops, damping = dissipators_from_params(dec)
            step = dt if dt is not None else _drive_step(schedule.drive, h)
            final = evolve_rk4(rho, h, ops, t_final=schedule.duration, dt=step,
                               damping=damping)
    else:
        final = DensityMatrix(rho)
    p_read = final.population(schedule.readout)
    pl = pl_from_p0(final.population(0), contrast)
    return RunResult(p0=p_read, pl=pl, rho=final)


def _drive_metadata(drive: DriveParams) -> dict:
    return {
        "omega_c_rad_us": drive.omega_c,
        "omega_p_rad_us": drive.omega_p,
        "delta_c_rad_us": drive.delta_c,
        "delta_p_rad_us": drive.delta_p,
        "phi_c_rad": drive.phi_c,
        "phi_p_rad": drive.phi_p,
    }


def _dec_metadata(dec: DecoherenceParams | None) -> dict | None:
    if dec is None:
        return None
    return {
        "gamma1_per_us": dec.gamma1,
        "gamma2_per_us": dec.gamma2,
        "gamma3_per_us": dec.gamma3,
        "relaxation_per_us": dec.relaxation,
        "contrast": dec.contrast,
    }


def _check_bounds(p0: np.ndarray, pl: np.ndarray, contrast: float, noisy: bool):
    if np.any(p0 < -1e-9) or np.any(p0 > 1.0 + 1e-9):
        raise ValueError("population sample outside [0, 1]")
    if not noisy and (np.any(pl < 1.0 - contrast - 1e-9) or np.any(pl > 1.0 + 1e-9)):
        raise ValueError(f"photoluminescence sample outside [1 - C, 1] for C = {contrast}")


@dataclass(frozen=True)
class ScanResult:
    """Probe-detuning scan: populations and pl per grid point."""

    axis: np.ndarray  # probe detunings, rad/us
    p0: np.ndarray
    pl: np.ndarray
    metadata: dict

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        p0 = np.asarray(self.p0, dtype=float)
        pl = np.asarray(self.pl, dtype=float)
        if not (axis.shape == p0.shape == pl.shape):
            raise ValueError("axis, p0 and pl must have matching shapes")
        _check_bounds(p0, pl, self.metadata.get("contrast", DEFAULT_CONTRAST),
                      self.metadata.get("noise_sigma", 0.0) > 0.0)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "pl", pl)

    @property
    def axis_mhz(self) -> np.ndarray:
        return self.axis / TWO_PI


@dataclass(frozen=True)
class TimeTrace:
    """Duration-sampled populations and pl (fixed drive)."""

    times: np.ndarray
    p0: np.ndarray
    pl: np.ndarray
    metadata: dict

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        p0 = np.asarray(self.p0, dtype=float)
        pl = np.asarray(self.pl, dtype=float)
        if not (times.shape == p0.shape == pl.shape):
            raise ValueError("times, p0 and pl must have matching shapes")
        _check_bounds(p0, pl, self.metadata.get("contrast", DEFAULT_CONTRAST),
                      self.metadata.get("noise_sigma", 0.0) > 0.0)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "pl", pl)


def default_probe_grid(omega_c: float, span_factor: float = DEFAULT_SCAN_SPAN,
                       points: int = DEFAULT_SCAN_POINTS) -> np.ndarray:
    """Symmetric probe-detuning grid covering both doublet dips."""
    return np.linspace(-span_factor * omega_c, span_factor * omega_c, points)


def spectrum_scan(base: DriveParams, delta_p_grid, t: float,
                  dec: DecoherenceParams | None = None, noise_sigma: float = 0.0,
                  seed: int | None = None, threads: int | None = None) -> ScanResult:
    """Probe-detuning scan at fixed duration: one schedule per grid point."""
    grid = np.asarray(delta_p_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("delta_p_grid must be ascending with at least 2 points")

    def run_point(dp: float):
        schedule = PulseSchedule(drive=base.replace(delta_p=float(dp)), duration=t)
        result = run_schedule(schedule, dec)
        return result.p0, result.pl

    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs = list(pool.map(run_point, grid))
    else:
        pairs = [run_point(dp) for dp in grid]
    p0 = np.array([p for p, _ in pairs])
    pl = np.array([q for _, q in pairs])
    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        pl = pl + rng.normal(0.0, noise_sigma, pl.size)
    contrast = dec.contrast if dec is not None else DEFAULT_CONTRAST
    metadata = {
        "kind": "spectrum_scan",
        "drive": _drive_metadata(base),
        "duration_us": t,
        "decoherence": _dec_metadata(dec),
        "contrast": contrast,
        "noise_sigma": noise_sigma,
        "seed": seed,
        "points": int(grid.size),
    }
    return ScanResult(axis=grid, p0=p0, pl=pl, metadata=metadata)


def _sampled_populations(rho0: np.ndarray, drive: DriveParams, times: np.ndarray,
                         dec: DecoherenceParams | None) -> np.ndarray:
    """|0> population at the requested times for a fixed drive."""
    h = rotating_frame_hamiltonian(drive)
    if dec is None or not dec.has_dissipation():
        sys = eig_hermitian(h)
        coeff = sys.vectors.conj().T @ rho0 @ sys.vectors
        phases = np.exp(-1j * np.outer(sys.values, times))  # (3, n)
        # <0|rho(t)|0> = row0 . (phases * coeff * phases^dag) . col0
        row = sys.vectors[0, :]  # (3,)
        left = row[:, None] * phases  # (3, n)
        out = np.einsum("in,ij,jn->n", left, coeff, left.conj())
        return np.clip(out.real, 0.0, 1.0)
    ops, damping = dissipators_from_params(dec)
    positive = times[times > 0]
    _, samples = evolve_rk4(
        rho0, h, ops, t_final=float(times[-1]), dt=_drive_step(drive, h),
        damping=damping, sample_times=positive,
    )
    p0 = np.empty(times.size)
    j = 0
    for i, tv in enumerate(times):
        if tv > 0:
            p0[i] = samples[j, 0, 0].real
            j += 1
        else:
            p0[i] = rho0[0, 0].real
    return np.clip(p0, 0.0, 1.0)


def dynamics_trace(base: DriveParams, n_max: int,
                   dec: DecoherenceParams | None = None, branch: int = +1,
                   noise_sigma: float = 0.0, seed: int | None = None) -> TimeTrace:
    """Interference trace sampled at t = 2*pi*n/omega_c, n = 0..n_max.

    Requires resonant coupling and the probe parked on the chosen branch
    resonance (see ``model.probe_resonance``).
    """
    if base.delta_c != 0.0:
        raise ValueError(f"interference trace requires delta_c = 0, got {base.delta_c}")
    if base.omega_c <= 0:
        raise ValueError("interference trace requires a coupling drive")
    resonance = probe_resonance(base, branch)
    if abs(base.delta_p - resonance) > 1e-9 * max(1.0, abs(resonance)):
        raise ValueError(
            f"probe detuning {base.delta_p} is off the branch {branch:+d} resonance "
            f"{resonance}; set delta_p = model.probe_resonance(drive, branch)"
        )
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    times = TWO_PI * np.arange(n_max + 1) / base.omega_c
    rho0 = _initial_density(None)
    p0 = _sampled_populations(rho0, base, times, dec)
    contrast = dec.contrast if dec is not None else DEFAULT_CONTRAST
    pl = 1.0 - contrast + contrast * p0
    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        pl = pl + rng.normal(0.0, noise_sigma, pl.size)
    metadata = {
        "kind": "dynamics_trace",
        "constraint": "t = 2*pi*n/omega_c",
        "branch": branch,
        "drive": _drive_metadata(base),
        "decoherence": _dec_metadata(dec),
        "contrast": contrast,
        "noise_sigma": noise_sigma,
        "seed": seed,
        "points": int(times.size),
    }
    return TimeTrace(times=times, p0=p0, pl=pl, metadata=metadata)


def rabi_reference_trace(base: DriveParams, n_max: int,
                         dec: DecoherenceParams | None = None) -> TimeTrace:
    """Probe-only Rabi trace from (|0> + |1>)/sqrt(2), on the same time grid.

    A pi/2 coupling pre-pulse prepares the superposition, the coupling tone
    is then switched off and the probe drives |0> <-> |2> resonantly; the pl
    oscillation runs at omega_p.  Companion measurement for the interference
    trace's frequency ratio.
    """
    if base.omega_c <= 0:
        raise ValueError("time grid needs omega_c > 0")
    times = TWO_PI * np.arange(n_max + 1) / base.omega_c
    prep = PrePulse(transition="coupling", angle=0.5 * math.pi, axis="y").matrix()
    rho0 = prep @ _initial_density(None) @ prep.conj().T
    probe_only = DriveParams(omega_c=0.0, omega_p=base.omega_p, delta_p=0.0)
    p0 = _sampled_populations(rho0, probe_only, times, dec)
    contrast = dec.contrast if dec is not None else DEFAULT_CONTRAST
    pl = 1.0 - contrast + contrast * p0
    metadata = {
        "kind": "rabi_reference_trace",
        "drive": _drive_metadata(probe_only),
        "time_grid_omega_c_rad_us": base.omega_c,
        "decoherence": _dec_metadata(dec),
        "contrast": contrast,
        "noise_sigma": 0.0,
        "seed": None,
        "points": int(times.size),
    }
    return TimeTrace(times=times, p0=p0, pl=pl, metadata=metadata)


@dataclass(frozen=True)
class Dip:
    """A refined local minimum of a scan."""

    position: float  # rad/us
    value: float  # interpolated signal value at the minimum
    p0: float  # interpolated |0> population at the minimum
    depth: float  # scan maximum minus ``value``


def _parabolic_minimum(x, y):
    coeff = np.polyfit(x, y, 2)
    if coeff[0] <= 0:
        return float(x[1]), float(y[1])
    xv = float(np.clip(-coeff[1] / (2.0 * coeff[0]), x[0], x[2]))
    return xv, float(np.polyval(coeff, xv))


def find_dips(scan: ScanResult, signal: str = "pl") -> list:
    """Qualifying local minima of a scan, refined by 3-point parabolas.

    A minimum qualifies when it falls below max - 0.2*(max - min).  Returns
    dips ascending by position; an empty list when nothing qualifies.
    """
    if signal not in ("pl", "p0"):
        raise ValueError(f"signal must be 'pl' or 'p0', got {signal!r}")
    y = scan.pl if signal == "pl" else scan.p0
    x = scan.axis
    if x.size < 5:
        raise ValueError(f"need at least 5 grid points to find dips, got {x.size}")
    lo, hi = float(np.min(y)), float(np.max(y))
    if hi - lo <= 0:
        return []
    threshold = hi - 0.2 * (hi - lo)
    dips = []
    for i in range(1, x.size - 1):
        if y[i] < y[i - 1] and y[i] < y[i + 1] and y[i] < threshold:
            xv, yv = _parabolic_minimum(x[i - 1 : i + 2], y[i - 1 : i + 2])
            p_coeff = np.polyfit(x[i - 1 : i + 2], scan.p0[i - 1 : i + 2], 2)
            dips.append(
                Dip(position=xv, value=yv,
                    p0=float(np.polyval(p_coeff, xv)), depth=hi - yv)
            )
    return sorted(dips, key=lambda d: d.position)


def _two_deepest(dips):
    if len(dips) < 2:
        return None
    pair = sorted(sorted(dips, key=lambda d: d.value)[:2], key=lambda d: d.position)
    return pair


@dataclass(frozen=True)
class AmplitudePoint:
    omega_c: float
    splitting: float | None  # rad/us; None when fewer than two dips qualify
    dips: tuple


def amplitude_sweep(omega_c_grid, omega_p: float | None = None,
                    ratio: float | None = None, t_rule=None,
                    dec: DecoherenceParams | None = None,
                    span_factor: float = DEFAULT_SCAN_SPAN,
                    points: int = DEFAULT_SCAN_POINTS,
                    threads: int | None = None) -> list:
    """Measured doublet splitting versus coupling amplitude.

    Exactly one of ``omega_p`` (fixed probe) or ``ratio`` (omega_c/omega_p)
    selects the probe strength.  ``t_rule(drive) -> duration`` defaults to the
    shortest family-A dark duration.  Points with fewer than two qualifying
    dips carry ``splitting=None``.
    """
    if (omega_p is None) == (ratio is None):
        raise ValueError("specify exactly one of omega_p or ratio")
    rule = t_rule if t_rule is not None else optimal_duration
    out = []
    for oc in np.asarray(omega_c_grid, dtype=float):
        if oc <= 0:
            raise ValueError(f"coupling amplitudes must be positive, got {oc}")
        op = oc / ratio if ratio is not None else omega_p
        drive = DriveParams(omega_c=float(oc), omega_p=float(op))
        scan = spectrum_scan(drive, default_probe_grid(oc, span_factor, points),
                             rule(drive), dec, threads=threads)
        dips = find_dips(scan)
        pair = _two_deepest(dips)
        splitting = pair[1].position - pair[0].position if pair else None
        out.append(AmplitudePoint(omega_c=float(oc), splitting=splitting, dips=tuple(dips)))
    return out


@dataclass(frozen=True)
class DetuningPoint:
    delta_c: float
    positions: tuple  # two deepest dip positions, ascending (rad/us)
    depths: tuple  # matching pl depths
    separation: float | None
    dips: tuple


def detuning_sweep(delta_c_grid, base: DriveParams, t_rule=None,
                   dec: DecoherenceParams | None = None,
                   span_factor: float = DEFAULT_SCAN_SPAN,
                   points: int = DEFAULT_SCAN_POINTS,
                   threads: int | None = None) -> list:
    """Doublet positions and depths versus coupling detuning.

    The two dips sit near (delta_c +- Omega_eff)/2 and acquire unequal depth
    away from resonance.
    """
    rule = t_rule if t_rule is not None else detuning_scan_duration
    out = []
    for dc in np.asarray(delta_c_grid, dtype=float):
        if not math.isfinite(dc):
            raise ValueError("delta_c grid must be finite")
        drive = base.replace(delta_c=float(dc))
        scan = spectrum_scan(drive, default_probe_grid(base.omega_c, span_factor, points),
                             rule(drive), dec, threads=threads)
        dips = find_dips(scan)
        pair = _two_deepest(dips)
        if pair:
            positions = (pair[0].position, pair[1].position)
            depths = (pair[0].depth, pair[1].depth)
            separation = positions[1] - positions[0]
        else:
            positions, depths, separation = (), (), None
        out.append(DetuningPoint(delta_c=float(dc), positions=positions,
                                 depths=depths, separation=separation, dips=tuple(dips)))
    return out
