"""Time-of-flight interference fringes: synthesis, fitting and phase stats.

The released double well produces a far-field pattern
n(x) = g(x) (1 + alpha cos(2 pi x / Lambda + phi)) with period
Lambda = h t / (m d) for well separation d and flight time t.  The fit is
damped least squares with an analytic Jacobian, spectrum-based initial
values and a four-way phase multistart to dodge the phase/contrast local
minimum.  Ensemble phases are summarized with circular statistics.

Note: the experiment's flight time is unpublished; 14 ms is this package's
documented default and every period-dependent number scales with it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .constants import PLANCK
from .errors import ConfigError, FitError
from .geometry import AtomSpecies

DEFAULT_TOF = 14e-3  # s, NOT from the experiment (unpublished); documented default
DEFAULT_HISTOGRAM_BIN_DEG = 15.0
MIN_PERIODS_IN_FWHM = 3.0
_FIT_XTOL = 1e-10
_FIT_MAX_ITER = 200


def wrap_phase(phi):
    """Wrap angles to (-pi, pi]."""
    w = np.mod(np.asarray(phi, dtype=float), 2.0 * np.pi)
    w = np.where(w > np.pi, w - 2.0 * np.pi, w)
    return float(w) if w.ndim == 0 else w


def fringe_period(separation: float, tof: float, mass: float) -> float:
    """Far-field two-source period Lambda = h t / (m d)."""
    if separation <= 0.0 or tof <= 0.0 or mass <= 0.0:
        raise ConfigError("separation, tof and mass must be > 0")
    return PLANCK * tof / (mass * separation)


def fringe_resolvable(period: float, pixel_spacing: float, min_ratio: float = 4.0) -> bool:
    """Whether a detector with the given sampling can resolve the fringes."""
    return period / pixel_spacing > min_ratio


@dataclass(frozen=True)
class GaussianEnvelope:
    center: float
    sigma: float
    amplitude: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amplitude * np.exp(-0.5 * ((x - self.center) / self.sigma) ** 2)


@dataclass(frozen=True)
class FringeModel:
    """Modulated-gaussian profile parameters."""

    envelope: GaussianEnvelope
    contrast: float
    period: float
    phase: float
    separation: float | None = None
    tof: float | None = None
    mass: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.contrast <= 1.0):
            raise ConfigError("contrast must lie in [0, 1]")
        if self.period <= 0.0:
            raise ConfigError("period must be > 0")
        object.__setattr__(self, "phase", wrap_phase(self.phase))

    @classmethod
    def from_double_well(cls, separation: float, tof: float, species: AtomSpecies,
                         envelope: GaussianEnvelope, contrast: float,
                         phase: float) -> "FringeModel":
        return cls(
            envelope=envelope, contrast=contrast,
            period=fringe_period(separation, tof, species.mass),
            phase=phase, separation=separation, tof=tof, mass=species.mass,
        )

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.envelope(x) * (
            1.0 + self.contrast * np.cos(2.0 * np.pi * x / self.period + self.phase)
        )


def synthesize_fringes(model: FringeModel, x, noise: float = 0.0,
                       seed: int | None = None,
                       rng: np.random.Generator | None = None) -> np.ndarray:
    """Sampled profile with seeded multiplicative Gaussian noise, clipped at 0.

    The grid must satisfy spacing < period/6 (Nyquist margin); stochastic
    synthesis requires an explicit seed or generator.
    """
    x = np.asarray(x, dtype=float)
    dx = np.max(np.diff(x))
    if not dx < model.period / 6.0:
        raise ConfigError(
            f"grid spacing {dx * 1e6:.3g} um under-samples period "
            f"{model.period * 1e6:.3g} um (need < period/6)"
        )
    n = model.density(x)
    if noise > 0.0:
        if rng is None:
            if seed is None:
                raise ConfigError("noisy synthesis needs an explicit seed")
            rng = np.random.default_rng(seed)
        n = n * (1.0 + noise * rng.standard_normal(len(x)))
    return np.clip(n, 0.0, None)


@dataclass(frozen=True)
class FringeFitResult:
    envelope: GaussianEnvelope
    contrast: float
    period: float
    phase: float                      # wrapped to (-pi, pi]
    covariance: tuple[tuple[float, ...], ...]  # order (A, x0, sigma, alpha, Lambda, phi)
    residual_norm: float
    converged: bool
    contrast_pinned: bool
    n_evaluations: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.residual_norm):
            raise FitError("fit produced a non-finite residual")


def _initial_guess(x: np.ndarray, n: np.ndarray):
    """Envelope moments plus fringe period/phase from the spectrum peak."""
    w = np.clip(n, 0.0, None)
    total = w.sum()
    if total <= 0.0:
        raise FitError("profile is nonpositive everywhere")
    x0 = float((x * w).sum() / total)
    sigma = float(np.sqrt(((x - x0) ** 2 * w).sum() / total))
    dx = float(x[1] - x[0])
    if sigma < dx:
        raise FitError("envelope narrower than the grid spacing")
    amp = float(total * dx / (sigma * np.sqrt(2.0 * np.pi)))

    g0 = amp * np.exp(-0.5 * ((x - x0) / sigma) ** 2)
    valid = g0 > 0.05 * amp
    m = np.where(valid, n / np.where(valid, g0, 1.0) - 1.0, 0.0)

    window = valid.sum() * dx
    fwhm = 2.0 * np.sqrt(2.0 * np.log(2.0)) * sigma
    spectrum = np.fft.rfft(m)
    freqs = np.fft.rfftfreq(len(x), dx)
    # fringes this fit accepts have >= 3 periods per FWHM; anything slower is
    # envelope mismatch, not modulation
    usable = (freqs >= 1.5 / window) & (freqs >= 2.0 / fwhm)
    if not np.any(usable):
        raise FitError("window too short to resolve any fringe")
    power = np.abs(spectrum)
    power_usable = np.where(usable, power, 0.0)
    k = int(np.argmax(power_usable))
    median = float(np.median(power[usable]))
    if power[k] <= 5.0 * median + 1e-6 * total:
        raise FitError("degenerate spectrum: no fringe peak (contrast ~ 0?)")
    period = 1.0 / freqs[k]

    corr = np.sum(m[valid] * np.exp(-2j * np.pi * x[valid] / period))
    phase = float(np.angle(corr))
    alpha_raw = 2.0 * np.abs(corr) / max(valid.sum(), 1)
    if alpha_raw < 0.02:
        # smooth envelope mismatch, not modulation: no usable fringe
        raise FitError("degenerate spectrum: no fringe peak (contrast ~ 0?)")
    alpha = float(np.clip(alpha_raw, 0.02, 0.98))
    return amp, x0, sigma, alpha, period, phase


def fit_modulated_gaussian(x, n, min_periods: float = MIN_PERIODS_IN_FWHM) -> FringeFitResult:
    """Nonlinear least-squares fit of g(x)(1 + alpha cos(2 pi x/Lambda + phi)).

    Requires a near-uniform grid and at least ``min_periods`` fringe periods
    inside the envelope FWHM.  Runs four phase-offset starts (0/90/180/270
    degrees) and keeps the lowest-cost solution; convergence at relative
    step < 1e-10 or 200 iterations.
    """
    x = np.asarray(x, dtype=float)
    n = np.asarray(n, dtype=float)
    if x.shape != n.shape or x.ndim != 1 or len(x) < 16:
        raise FitError("need matching 1D arrays with at least 16 samples")
    steps = np.diff(x)
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0):
        raise FitError("fit requires a uniform grid")

    amp, x0, sigma, alpha, period, phase = _initial_guess(x, n)
    fwhm = 2.0 * np.sqrt(2.0 * np.log(2.0)) * sigma
    if fwhm / period < min_periods:
        raise FitError(
            f"only {fwhm / period:.2f} fringe periods inside the envelope FWHM "
            f"(need >= {min_periods})"
        )

    span = float(x[-1] - x[0])
    dx = float(steps[0])
    lower = [0.0, x[0] - span, dx / 2.0, 0.0, 4.0 * dx, -2.0 * np.pi]
    upper = [np.inf, x[-1] + span, 2.0 * span, 1.0, 2.0 * span, 2.0 * np.pi]

    def residual(theta):
        a, mu, s, al, lam, ph = theta
        g = a * np.exp(-0.5 * ((x - mu) / s) ** 2)
        return g * (1.0 + al * np.cos(2.0 * np.pi * x / lam + ph)) - n

    def jacobian(theta):
        a, mu, s, al, lam, ph = theta
        g = a * np.exp(-0.5 * ((x - mu) / s) ** 2)
        u = 2.0 * np.pi * x / lam + ph
        c, sn = np.cos(u), np.sin(u)
        mod = 1.0 + al * c
        J = np.empty((len(x), 6))
        J[:, 0] = g / a * mod
        J[:, 1] = g * (x - mu) / s**2 * mod
        J[:, 2] = g * (x - mu) ** 2 / s**3 * mod
        J[:, 3] = g * c
        J[:, 4] = g * al * sn * 2.0 * np.pi * x / lam**2
        J[:, 5] = -g * al * sn
        return J

    best = None
    total_nfev = 0
    for dphi in (0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi):
        theta0 = np.array([amp, x0, sigma, alpha, period, wrap_phase(phase + dphi)])
        theta0 = np.clip(theta0, lower, upper)
        res = least_squares(residual, theta0, jac=jacobian, bounds=(lower, upper),
                            method="trf", xtol=_FIT_XTOL, ftol=1e-14, gtol=1e-14,
                            max_nfev=_FIT_MAX_ITER * 7)
        total_nfev += res.nfev
        if best is None or res.cost < best.cost:
            best = res
    assert best is not None

    a, mu, s, al, lam, ph = best.x
    dof = max(len(x) - 6, 1)
    s2 = 2.0 * best.cost / dof
    J = jacobian(best.x)
    cov = s2 * np.linalg.pinv(J.T @ J)
    return FringeFitResult(
        envelope=GaussianEnvelope(center=float(mu), sigma=float(s), amplitude=float(a)),
        contrast=float(al),
        period=float(lam),
        phase=wrap_phase(ph),
        covariance=tuple(tuple(float(v) for v in row) for row in cov),
        residual_norm=float(np.sqrt(2.0 * best.cost)),
        converged=bool(best.status > 0),
        contrast_pinned=bool(al <= 1e-9 or al >= 1.0 - 1e-9),
        n_evaluations=total_nfev,
    )


# ---------------------------------------------------------------------------
# circular statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseEnsembleStats:
    """Circular summary of an ensemble of fringe phases (radians)."""

    phases: tuple[float, ...]
    circular_mean: float
    circular_std: float        # sqrt(-2 ln R)
    angular_deviation: float   # sqrt(2 (1 - R)), always <= linear_std
    resultant_length: float
    linear_std: float          # population std of wrapped deviations
    histogram_bin_edges_deg: tuple[float, ...]
    histogram_counts: tuple[int, ...]
    uniform_suspect: bool      # resultant too short for a phase-locked ensemble

    def __post_init__(self) -> None:
        if not (0.0 <= self.resultant_length <= 1.0 + 1e-12):
            raise ValueError("resultant length must lie in [0, 1]")


def phase_statistics(phases: Sequence[float],
                     bin_width_deg: float = DEFAULT_HISTOGRAM_BIN_DEG,
                     uniform_threshold: float = 0.2) -> PhaseEnsembleStats:
    """Circular mean/std, resultant length and a (-180, 180] histogram.

    ``uniform_suspect`` is raised when the resultant length falls below
    ``uniform_threshold`` (phases consistent with a uniform circle for
    ensembles of ~100 shots).
    """
    phases = np.asarray(phases, dtype=float)
    if phases.size < 2:
        raise ConfigError("need at least 2 phases")
    z = np.exp(1j * phases)
    zbar = z.mean()
    r = min(float(np.abs(zbar)), 1.0)  # rounding can push |mean| past 1
    mean = float(np.angle(zbar))
    circ_std = float(np.sqrt(-2.0 * np.log(r))) if r > 0.0 else float("inf")
    ang_dev = float(np.sqrt(2.0 * (1.0 - r)))
    deviations = wrap_phase(phases - mean)
    lin_std = float(np.sqrt(np.mean(deviations**2)))

    n_bins = int(round(360.0 / bin_width_deg))
    edges = np.linspace(-180.0, 180.0, n_bins + 1)
    deg = np.degrees(wrap_phase(phases))
    # histogram over (-180, 180]: fold exact -180 onto +180
    deg = np.where(deg <= -180.0, 180.0, deg)
    counts, _ = np.histogram(deg, bins=edges)
    return PhaseEnsembleStats(
        phases=tuple(float(p) for p in phases),
        circular_mean=mean,
        circular_std=circ_std,
        angular_deviation=ang_dev,
        resultant_length=r,
        linear_std=lin_std,
        histogram_bin_edges_deg=tuple(edges.tolist()),
        histogram_counts=tuple(int(c) for c in counts),
        uniform_suspect=bool(r < uniform_threshold),
    )


# ---------------------------------------------------------------------------
# end-to-end simulated shots
# ---------------------------------------------------------------------------

def end_to_end_shot(well_report, species: AtomSpecies, x, phase: float,
                    contrast: float = 0.6, tof: float = DEFAULT_TOF,
                    envelope: GaussianEnvelope | None = None,
                    noise: float = 0.0,
                    rng: np.random.Generator | None = None,
                    seed: int | None = None) -> FringeFitResult:
    """Simulate one readout: double-well separation -> fringes -> fit.

    ``well_report`` must describe a genuine double well (n_minima == 2);
    its separation sets the fringe period.
    """
    if well_report.n_minima != 2:
        raise ConfigError("end-to-end shot needs a double well (n_minima == 2)")
    x = np.asarray(x, dtype=float)
    if envelope is None:
        span = x[-1] - x[0]
        envelope = GaussianEnvelope(center=float(x.mean()), sigma=span / 6.0, amplitude=1.0)
    model = FringeModel.from_double_well(
        separation=well_report.separation, tof=tof, species=species,
        envelope=envelope, contrast=contrast, phase=phase,
    )
    profile = synthesize_fringes(model, x, noise=noise, rng=rng, seed=seed)
    return fit_modulated_gaussian(x, profile)


def phase_ensemble(well_report, species: AtomSpecies, x, n_shots: int, seed: int,
                   base_phase: float = 0.0, phase_jitter: float = 0.0,
                   contrast: float = 0.6, tof: float = DEFAULT_TOF,
                   envelope: GaussianEnvelope | None = None,
                   noise: float = 0.0):
    """Seeded ensemble of simulated shots; returns (fitted, injected) phases.

    Each shot owns a child generator spawned from ``seed`` (drawing first
    the injected phase, then the detection noise), so ensembles reproduce
    exactly and shots could run concurrently without changing results.
    """
    children = np.random.SeedSequence(seed).spawn(n_shots)
    fitted, injected = [], []
    for k in range(n_shots):
        rng = np.random.default_rng(children[k])
        phi = base_phase + phase_jitter * rng.standard_normal()
        result = end_to_end_shot(
            well_report, species, x, phase=phi, contrast=contrast, tof=tof,
            envelope=envelope, noise=noise, rng=rng,
        )
        fitted.append(result.phase)
        injected.append(wrap_phase(phi))
    return np.asarray(fitted), np.asarray(injected)
