"""Nonlinear least-squares fitting of the decay/oscillation models.

Model catalogue
---------------
damped_cos4     : y(t) = a * exp(-(t/T)^k) * cos^4(w*(t - t_c)) + b
                  (stretched-exponential envelope on a cos^4 interference
                  trace; w in rad/us, k bounded to [0.5, 4])
gaussian_ramsey : y(t) = a * exp(-(t/T2)^2) * cos(2*pi*omega*t) + b
                  (omega is an ordinary frequency in MHz = cycles/us)
damped_rabi     : y(t) = a * exp(-(t/T1rho)^2) * cos(pi*(t - x_c)/w) + b
                  (w is a half period in us)
exp_decay       : y(t) = a * exp(-t/T1) + b

``fit`` is a Levenberg-Marquardt solver with a central-difference Jacobian:
lambda starts at 1e-3, grows x10 on a rejected step and shrinks /10 on an
accepted one; iteration stops when the relative residual change drops below
1e-10 or the gradient infinity-norm below 1e-8.  Parameters whose Jacobian
column vanishes identically are frozen for that step rather than inverted.
Standard errors come from the scaled inverse normal matrix.  Frequency-like
parameters are reported in both angular (rad/us) and ordinary (MHz)
conventions on the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg3 import NumericalError

LM_LAMBDA0 = 1e-3
LM_LAMBDA_MAX = 1e12
LM_LAMBDA_MIN = 1e-14
FTOL = 1e-10
GTOL = 1e-8
MAX_ITERATIONS = 500


@dataclass(frozen=True)
class FitModel:
    """A named model curve: parameter order, callable and default bounds."""

    id: str
    param_names: tuple
    func: object
    bounds: dict = field(default_factory=dict)
    #: frequency-style parameters and their native convention
    frequency_params: dict = field(default_factory=dict)

    def __call__(self, t, theta):
        # Wild trial parameters may overflow the envelope; the LM loop
        # rejects non-finite costs, so keep evaluation silent.
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return self.func(np.asarray(t, dtype=float), *theta)


def _damped_cos4(t, a, big_t, k, w, t_c, b):
    envelope = np.exp(-np.power(t / big_t, k))
    return a * envelope * np.cos(w * (t - t_c)) ** 4 + b


def _gaussian_ramsey(t, a, t2, omega, b):
    return a * np.exp(-((t / t2) ** 2)) * np.cos(2.0 * np.pi * omega * t) + b


def _damped_rabi(t, a, t1rho, x_c, w, b):
    return a * np.exp(-((t / t1rho) ** 2)) * np.cos(np.pi * (t - x_c) / w) + b


def _exp_decay(t, a, t1, b):
    return a * np.exp(-t / t1) + b


MODELS = {
    "damped_cos4": FitModel(
        id="damped_cos4",
        param_names=("a", "T", "k", "w", "t_c", "b"),
        func=_damped_cos4,
        bounds={"T": (1e-9, np.inf), "k": (0.5, 4.0), "w": (0.0, np.inf)},
        frequency_params={"w": "angular"},
    ),
    "gaussian_ramsey": FitModel(
        id="gaussian_ramsey",
        param_names=("a", "T2", "omega", "b"),
        func=_gaussian_ramsey,
        bounds={"T2": (1e-9, np.inf), "omega": (0.0, np.inf)},
        frequency_params={"omega": "cycles"},
    ),
    "damped_rabi": FitModel(
        id="damped_rabi",
        param_names=("a", "T1rho", "x_c", "w", "b"),
        func=_damped_rabi,
        bounds={"T1rho": (1e-9, np.inf), "w": (1e-9, np.inf)},
        frequency_params={"w": "half_period"},
    ),
    "exp_decay": FitModel(
        id="exp_decay",
        param_names=("a", "T1", "b"),
        func=_exp_decay,
        bounds={"T1": (1e-9, np.inf)},
    ),
}


def get_model(model) -> FitModel:
    if isinstance(model, FitModel):
        return model
    if model not in MODELS:
        raise ValueError(f"unknown fit model {model!r}; available: {sorted(MODELS)}")
    return MODELS[model]


def evaluate(model, t, params: dict) -> np.ndarray:
    """Evaluate a model curve from named parameters."""
    m = get_model(model)
    theta = [params[name] for name in m.param_names]
    return m(t, theta)


def _frequency_report(model: FitModel, params: dict) -> dict:
    out = {}
    for name, kind in model.frequency_params.items():
        value = params[name]
        if kind == "angular":
            rad, mhz = value, value / (2.0 * np.pi)
        elif kind == "cycles":
            rad, mhz = 2.0 * np.pi * value, value
        elif kind == "half_period":
            rad = np.pi / value if value > 0 else np.inf
            mhz = 0.5 / value if value > 0 else np.inf
        else:  # pragma: no cover - registry is static
            raise ValueError(f"unknown frequency convention {kind!r}")
        out[name] = {"rad_per_us": float(rad), "mhz": float(mhz)}
    return out


@dataclass
class FitResult:
    """Converged (or best-effort) parameter estimates with uncertainties."""

    model: str
    params: dict
    std_errors: dict
    residual_norm: float
    converged: bool
    iterations: int
    residual_history: list
    frequencies: dict

    def __post_init__(self):
        if self.converged and not math.isfinite(self.residual_norm):
            raise ValueError("converged fit must have a finite residual")


def _coerce_data(data):
    if isinstance(data, tuple) and len(data) == 2:
        t = np.asarray(data[0], dtype=float).ravel()
        y = np.asarray(data[1], dtype=float).ravel()
    else:
        arr = np.asarray(data, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("data must be an (N, 2) array of (t, y) pairs or a (t, y) tuple")
        t, y = arr[:, 0], arr[:, 1]
    if t.shape != y.shape:
        raise ValueError(f"t and y lengths differ: {t.shape} vs {y.shape}")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
        raise ValueError("data contains non-finite values")
    order = np.argsort(t, kind="stable")
    return t[order], y[order]


def _jacobian(model: FitModel, t, theta, lo, hi):
    n = theta.size
    jac = np.empty((t.size, n))
    for i in range(n):
        h = 6e-6 * (abs(theta[i]) + 1.0)
        up = theta.copy()
        dn = theta.copy()
        up[i] = min(theta[i] + h, hi[i])
        dn[i] = max(theta[i] - h, lo[i])
        span = up[i] - dn[i]
        if span <= 0:
            jac[:, i] = 0.0
            continue
        jac[:, i] = (model(t, up) - model(t, dn)) / span
    return jac


def _solve_damped_step(jtj, grad, lam, param_names):
    """Solve (J^T J + lam diag(J^T J)) delta = -grad on the active columns."""
    n = jtj.shape[0]
    active = np.flatnonzero(np.diag(jtj) > 1e-30)
    delta = np.zeros(n)
    if active.size == 0:
        raise NumericalError(
            "singular normal matrix: no parameter affects the residual "
            f"(all of {list(param_names)} are degenerate)"
        )
    sub = jtj[np.ix_(active, active)]
    damped = sub + lam * np.diag(np.diag(sub))
    try:
        delta[active] = np.linalg.solve(damped, -grad[active])
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(sub)
        worst = active[int(np.argmax(np.abs(v[:, int(np.argmin(w))])))]
        raise NumericalError(
            f"singular normal matrix: parameter {param_names[worst]!r} "
            "is degenerate with the others"
        ) from None
    if not np.all(np.isfinite(delta)):
        w, v = np.linalg.eigh(sub)
        worst = active[int(np.argmax(np.abs(v[:, int(np.argmin(w))])))]
        raise NumericalError(
            f"singular normal matrix: parameter {param_names[worst]!r} produced "
            "a non-finite step"
        )
    return delta, active


def _lm_core(model: FitModel, t, y, theta0, lo, hi):
    theta = np.clip(theta0, lo, hi)
    residual = model(t, theta) - y
    cost = float(residual @ residual)
    history = [math.sqrt(cost)]
    lam = LM_LAMBDA0
    converged = False
    iterations = 0
    active = np.arange(theta.size)
    for iterations in range(1, MAX_ITERATIONS + 1):
        jac = _jacobian(model, t, theta, lo, hi)
        grad = jac.T @ residual
        jtj = jac.T @ jac
        if float(np.max(np.abs(grad))) < GTOL:
            converged = True
            break
        accepted = False
        while lam <= LM_LAMBDA_MAX:
            delta, active = _solve_damped_step(jtj, grad, lam, model.param_names)
            # Backtrack along the damped direction: full Gauss-Newton-like
            # steps on oscillatory models can hop basins while still lowering
            # the cost slightly; a shorter step that lowers it more wins.
            best = None
            for fraction in (1.0, 0.5, 0.25):
                trial = np.clip(theta + fraction * delta, lo, hi)
                trial_residual = model(t, trial) - y
                trial_cost = float(trial_residual @ trial_residual)
                if np.isfinite(trial_cost) and (best is None or trial_cost < best[0]):
                    best = (trial_cost, trial, trial_residual)
            if best is not None and best[0] < cost:
                improvement = cost - best[0]
                cost, theta, residual = best
                history.append(math.sqrt(cost))
                lam = max(lam / 10.0, LM_LAMBDA_MIN)
                accepted = True
                if improvement <= FTOL * max(cost, 1e-300):
                    converged = True
                break
            lam *= 10.0
        if not accepted:
            # Stalled: no damped step improves the residual.
            converged = float(np.max(np.abs(grad))) < GTOL
            break
        if converged:
            break
    return theta, residual, cost, converged, iterations, history, active


def fit(model, data, init: dict, bounds: dict | None = None, multi_start: int = 0,
        seed: int = 0) -> FitResult:
    """Levenberg-Marquardt fit of a catalogue model to (t, y) data.

    ``init`` maps every model parameter to a finite starting value;
    ``bounds`` optionally overrides the model's default box constraints.
    ``multi_start > 0`` additionally runs that many seeded +-10% perturbations
    of the starting point and keeps the lowest-residual outcome (useful for
    noisy data; off by default).  Deterministic for fixed inputs and seed.
    """
    m = get_model(model)
    t, y = _coerce_data(data)
    n_params = len(m.param_names)
    if t.size < n_params + 2:
        raise ValueError(
            f"need at least {n_params + 2} points to fit {m.id!r}, got {t.size}"
        )
    missing = [p for p in m.param_names if p not in init]
    if missing:
        raise ValueError(f"init missing parameters {missing} for model {m.id!r}")
    theta0 = np.array([float(init[p]) for p in m.param_names])
    if not np.all(np.isfinite(theta0)):
        raise ValueError("init contains non-finite values")

    box = dict(m.bounds)
    if bounds:
        box.update(bounds)
    lo = np.array([box.get(p, (-np.inf, np.inf))[0] for p in m.param_names], dtype=float)
    hi = np.array([box.get(p, (-np.inf, np.inf))[1] for p in m.param_names], dtype=float)

    starts = [theta0]
    if multi_start > 0:
        rng = np.random.default_rng(seed)
        for _ in range(multi_start):
            starts.append(theta0 * (1.0 + 0.1 * rng.standard_normal(n_params)))

    best = None
    for start in starts:
        outcome = _lm_core(m, t, y, start, lo, hi)
        if best is None or outcome[2] < best[2]:
            best = outcome
    theta, residual, cost, converged, iterations, history, active = best

    jac = _jacobian(m, t, theta, lo, hi)
    jtj = jac.T @ jac
    dof = t.size - int(active.size)
    std = np.full(n_params, np.nan)
    if dof > 0 and active.size:
        s2 = cost / dof
        cov = s2 * np.linalg.pinv(jtj[np.ix_(active, active)])
        std[active] = np.sqrt(np.maximum(np.diag(cov), 0.0))

    params = {name: float(v) for name, v in zip(m.param_names, theta)}
    return FitResult(
        model=m.id,
        params=params,
        std_errors={name: float(v) for name, v in zip(m.param_names, std)},
        residual_norm=math.sqrt(cost),
        converged=converged,
        iterations=iterations,
        residual_history=history,
        frequencies=_frequency_report(m, params),
    )


def dominant_frequency(t, y, pad_factor: int = 8) -> float:
    """Dominant oscillation frequency (cycles/us) of a uniformly sampled trace.

    Hann-windowed, zero-padded rFFT with parabolic refinement of the peak bin.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 4:
        raise ValueError("need at least 4 samples for a frequency estimate")
    dt = float(np.median(np.diff(t)))
    if dt <= 0:
        raise ValueError("times must be strictly increasing")
    centered = y - np.mean(y)
    window = np.hanning(t.size)
    n_pad = int(pad_factor * 2 ** math.ceil(math.log2(t.size)))
    spectrum = np.abs(np.fft.rfft(centered * window, n=n_pad))
    freqs = np.fft.rfftfreq(n_pad, d=dt)
    guard = max(2, int(round(1.5 * n_pad / t.size)))  # skip the DC/window lobe
    k = guard + int(np.argmax(spectrum[guard:]))
    if 0 < k < spectrum.size - 1:
        s_m, s_0, s_p = spectrum[k - 1 : k + 2]
        denom = s_m - 2.0 * s_0 + s_p
        shift = 0.5 * (s_m - s_p) / denom if denom != 0 else 0.0
        shift = float(np.clip(shift, -0.5, 0.5))
    else:
        shift = 0.0
    return float((k + shift) * (freqs[1] - freqs[0]))


def _envelope_decay_time(t, y, b):
    """Time for the |y - b| envelope to fall to 1/e of its initial level."""
    amp = np.abs(y - b)
    peak = float(np.max(amp))
    if peak <= 0:
        return float(t[-1] - t[0]) or 1.0
    n_blocks = max(2, min(16, t.size // 4))
    edges = np.linspace(0, t.size, n_blocks + 1, dtype=int)
    centers, maxima = [], []
    for a, c in zip(edges[:-1], edges[1:]):
        if c > a:
            centers.append(float(np.mean(t[a:c])))
            maxima.append(float(np.max(amp[a:c])))
    level = maxima[0] / math.e
    for tc, mx in zip(centers, maxima):
        if mx < level:
            return max(tc, float(t[1] - t[0]))
    return float(t[-1])


def default_init(model, data) -> dict:
    """Heuristic starting point: tail offset, peak-to-mean amplitude,
    spectral-peak frequency and 1/e envelope decay."""
    m = get_model(model)
    t, y = _coerce_data(data)
    if t.size < 4:
        raise ValueError("need at least 4 points for an initial guess")
    if float(np.max(y) - np.min(y)) < 1e-12:
        raise ValueError("data is flat; no meaningful initialization exists")

    b = float(np.mean(y[-max(1, t.size // 10):]))
    a = float(np.max(y) - np.mean(y))
    decay = _envelope_decay_time(t, y, b)

    init = {"a": a, "b": b}
    if m.id == "exp_decay":
        # Monotone trace: use the direct 1/e crossing of y - b.
        rel = y - b
        if abs(rel[0]) > 0:
            below = np.flatnonzero(np.abs(rel) <= abs(rel[0]) / math.e)
            if below.size:
                decay = max(float(t[below[0]]), float(t[1] - t[0]))
        init.update({"a": float(y[0] - b), "T1": decay})
        return init

    f_peak = dominant_frequency(t, y)
    if f_peak <= 0:
        f_peak = 1.0 / max(float(t[-1] - t[0]), 1e-9)
    if m.id == "gaussian_ramsey":
        init.update({"T2": decay, "omega": f_peak})
    elif m.id == "damped_rabi":
        init.update({"T1rho": decay, "x_c": float(t[int(np.argmax(y))]), "w": 0.5 / f_peak})
    elif m.id == "damped_cos4":
        init.update(
            {
                "T": decay,
                "k": 1.0,
                "w": math.pi * f_peak,
                "t_c": float(t[int(np.argmax(y))]),
            }
        )
    else:  # pragma: no cover - registry is static
        raise ValueError(f"no initialization rule for model {m.id!r}")
    return init
