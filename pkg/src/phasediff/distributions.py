"""Full phase distributions: the high-gain closed form and the Fock-space reference.

Two routes to the phase density of the amplified field:

* p_function_phase_density - the closed-form high-gain density of the
  phase-space (Glauber-Sudarshan) picture for a lossless amplifier, evaluated
  in an algebraically expanded form that is free of the sec(phi - theta)
  singularity of the textbook expression.
* evolve_density + pegg_barnett_distribution - the master equation integrated
  in a truncated Fock basis, projected onto the discrete phase states
  |phi_m> = (s+1)^(-1/2) sum_n exp(i n phi_m) |n>.

The master-equation generator couples density-matrix entries only along a
fixed diagonal offset m - n, so the integrator stores and steps the band of
offsets that the coherent input actually populates; this is the classical RK4
scheme on the (vectorized) density matrix, just skipping entries that are
exactly zero for all time.  Dissipators are built from the cutoff-truncated
operators, which keeps the evolution trace-preserving on the truncated space;
the population that would have escaped past the cutoff shows up in the top
Fock level and is monitored (top_population) instead of silently lost.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, gammaln

from .errors import GuardTripError
from .moments import gain
from .params import AmplifierParams, CoherentInput

__all__ = [
    "erf",
    "eta",
    "p_function_phase_density",
    "FockState",
    "PhaseDensity",
    "coherent_state",
    "fock_cutoff",
    "evolve_density",
    "evolve_density_series",
    "richardson_check",
    "pegg_barnett_distribution",
    "distribution_variance",
]

TOP_POPULATION_LIMIT = 1e-6
_MIN_CUTOFF = 48


def eta(params: AmplifierParams, amplitude_sq: float, t):
    """Amplified signal normalized by the spontaneous-emission noise.

    eta = G_t |alpha|^2 / (G_t - 1) for the lossless amplifier; tends to
    |alpha|^2 in the high-gain limit and diverges as t -> 0.
    """
    if not params.ideal():
        raise ValueError("eta is defined for the lossless amplifier (kappa_down = 0)")
    t = np.asarray(t, dtype=float)
    x = params.kappa_up * t
    if np.any(x <= 1e-12):
        raise ValueError("gain must exceed 1 (t too small)")
    # G/(G-1) = 1/(1 - 1/G)
    return np.asarray(amplitude_sq, dtype=float) / (-np.expm1(-x))


def p_function_phase_density(params: AmplifierParams, input: CoherentInput, t, phi):
    """High-gain phase density of the phase-space picture, singularity-free.

    Expanding the textbook expression cancels sec(phi - theta) against its
    cos prefactor:

        p(phi) = e^-eta / 2pi
               + cos(d)/2pi * sqrt(pi eta) e^(-eta sin^2 d) (1 + erf(sqrt(eta) cos d)),

    d = phi - theta.  Single peak at phi = theta, symmetric about it, uniform
    1/2pi in the eta -> 0 limit.
    """
    e = eta(params, input.amplitude_sq, t)
    d = np.asarray(phi, dtype=float) - input.theta
    c = np.cos(d)
    return np.exp(-e) / (2 * np.pi) + (
        c / (2 * np.pi)
        * np.sqrt(np.pi * e)
        * np.exp(-e * np.sin(d) ** 2)
        * (1.0 + erf(np.sqrt(e) * c))
    )


@dataclass(frozen=True, eq=False)
class FockState:
    """Density matrix on the number basis truncated at cutoff_s."""

    cutoff_s: int
    rho: np.ndarray

    def __post_init__(self):
        d = self.cutoff_s + 1
        if self.rho.shape != (d, d):
            raise ValueError(f"rho must be {(d, d)}, got {self.rho.shape}")
        tr = np.trace(self.rho).real
        if abs(tr - 1.0) > 1e-9:
            raise ValueError(f"trace must be 1 within 1e-9, got {tr}")
        herm = np.abs(self.rho - self.rho.conj().T).max()
        if herm > 1e-12:
            raise ValueError(f"rho must be Hermitian within 1e-12, deviation {herm:.2e}")

    def mean_photon(self) -> float:
        return float((np.arange(self.cutoff_s + 1) * np.diag(self.rho).real).sum())

    def top_population(self) -> float:
        return float(self.rho[-1, -1].real)


@dataclass(frozen=True, eq=False)
class PhaseDensity:
    """Probability density per radian on a uniform grid spanning one period."""

    phi_grid: np.ndarray
    density: np.ndarray
    origin: str

    def __post_init__(self):
        if self.phi_grid.shape != self.density.shape:
            raise ValueError("grid and density must have equal shapes")
        if np.any(self.density < -1e-9):
            raise ValueError("density must be nonnegative")
        h = self.spacing
        mass = float(self.density.sum() * h)
        if abs(mass - 1.0) > 1e-6:
            raise ValueError(f"density must integrate to 1 within 1e-6, got {mass}")

    @property
    def spacing(self) -> float:
        return float(self.phi_grid[1] - self.phi_grid[0])


def coherent_state(input: CoherentInput, cutoff_s: int) -> FockState:
    """Truncated coherent-state density matrix, renormalized to unit trace."""
    d = int(cutoff_s) + 1
    n = np.arange(d)
    log_mag = -input.amplitude_sq / 2 + n * (np.log(input.amplitude_sq) / 2) - gammaln(n + 1) / 2
    c = np.exp(log_mag) * np.exp(1j * n * input.theta)
    c /= np.sqrt((np.abs(c) ** 2).sum())
    return FockState(cutoff_s=int(cutoff_s), rho=np.outer(c, c.conj()))


def _chernoff_count_cutoff(coherent_part: float, thermal_part: float, tail: float) -> int:
    """Smallest s with P(X > s) <= tail for a displaced-thermal photon count.

    Uses the Chernoff bound P(X > s) <= M(z)/z^(s+1) on the generating
    function M(z) = exp(b zeta/(1 - n_th zeta))/(1 - n_th zeta), zeta = z - 1,
    minimized over a zeta grid.
    """
    if thermal_part < 1e-300:
        zeta_max = 1e4
    else:
        zeta_max = (1.0 - 1e-10) / thermal_part
    zeta = np.geomspace(1e-8, zeta_max, 4000)
    log_m = coherent_part * zeta / (1.0 - thermal_part * zeta) - np.log1p(-thermal_part * zeta)
    s_req = (log_m - np.log(tail)) / np.log1p(zeta) - 1.0
    return max(int(np.ceil(s_req.min())), 0)


def fock_cutoff(params: AmplifierParams, input: CoherentInput, t: float, tail: float = 1e-10) -> int:
    """Cutoff large enough for the input and the amplified output.

    The output photon statistics are displaced thermal with thermal part
    (kappa_up/kappa_minus)(G_t - 1) and coherent part G_t |alpha|^2 — much
    broader than Poisson with the same mean — so the bound is taken on that
    distribution.  The input's own (Poisson) tail is held below 1e-10 and a
    small floor keeps the phase grid usable at tiny t.
    """
    g = float(gain(params, t))
    s_in = _chernoff_count_cutoff(input.amplitude_sq, 0.0, 1e-10)
    s_out = _chernoff_count_cutoff(
        g * input.amplitude_sq, params.noise_ratio * (g - 1.0), tail
    )
    return max(s_in, s_out, _MIN_CUTOFF)


def _band_kmax(c: np.ndarray, drop_below: float = 1e-17, margin: int = 8) -> int:
    d = len(c)
    for k in range(d):
        if np.max(np.abs(c[k:] * np.conj(c[: d - k]))) < drop_below:
            return min(k + margin, d - 1)
    return d - 1


class _BandEvolver:
    """RK4 stepping of the offset band B[k, n] = rho[n + k, n]."""

    def __init__(self, params: AmplifierParams, d: int, kmax: int):
        self.d = d
        self.kmax = kmax
        kk = np.arange(kmax + 1)[:, None].astype(float)
        nn = np.arange(d)[None, :].astype(float)
        valid = nn <= d - 1 - kk
        # truncated gain operator: the top level neither decays nor feeds out
        f_row = np.where(nn + kk < d - 1, nn + kk + 1.0, 0.0)
        f_col = np.where(nn < d - 1, nn + 1.0, 0.0)
        self.c_loss = np.where(
            nn <= d - 2 - kk, params.kappa_down * np.sqrt((nn + kk + 1.0) * (nn + 1.0)), 0.0
        )
        self.c_gain = np.where((nn >= 1) & valid, params.kappa_up * np.sqrt((nn + kk) * nn), 0.0)
        self.c_decay = np.where(
            valid,
            -0.5 * (params.kappa_down * (2 * nn + kk) + params.kappa_up * (f_row + f_col)),
            0.0,
        )

    def initial_band(self, c: np.ndarray) -> np.ndarray:
        band = np.zeros((self.kmax + 1, self.d), dtype=complex)
        for k in range(self.kmax + 1):
            band[k, : self.d - k] = c[k:] * np.conj(c[: self.d - k])
        return band

    def rhs(self, band: np.ndarray) -> np.ndarray:
        out = self.c_decay * band
        out[:, :-1] += self.c_loss[:, :-1] * band[:, 1:]
        out[:, 1:] += self.c_gain[:, 1:] * band[:, :-1]
        return out

    def run(self, band: np.ndarray, t_from: float, t_to: float, dt: float) -> np.ndarray:
        span = t_to - t_from
        if span <= 0:
            return band
        steps = max(1, int(np.ceil(span / dt - 1e-12)))
        h = span / steps
        for _ in range(steps):
            k1 = self.rhs(band)
            k2 = self.rhs(band + 0.5 * h * k1)
            k3 = self.rhs(band + 0.5 * h * k2)
            k4 = self.rhs(band + h * k3)
            band = band + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return band


def _stable_dt(params: AmplifierParams, d: int, dt_requested: float) -> float:
    # explicit RK4 on the amplification chain: the field of values of the
    # generator reaches ~2 (kappa_up + kappa_down) d, well beyond its spectrum
    return min(dt_requested, 2.5 / (2.0 * (params.kappa_up + params.kappa_down) * d))


def _band_to_state(band: np.ndarray, d: int) -> FockState:
    rho = np.zeros((d, d), dtype=complex)
    for k in range(band.shape[0]):
        idx = np.arange(d - k)
        rho[idx + k, idx] = band[k, : d - k]
        if k:
            rho[idx, idx + k] = band[k, : d - k].conj()
    return FockState(cutoff_s=d - 1, rho=rho)


def _check_band(band: np.ndarray, d: int, t: float):
    top = band[0, d - 1].real
    if top > TOP_POPULATION_LIMIT:
        raise GuardTripError(
            f"top Fock level holds {top:.2e} > {TOP_POPULATION_LIMIT} at t={t}; "
            "cutoff too small for this horizon"
        )
    if band.shape[0] >= 4:
        edge = np.abs(band[-3:]).max()
        if edge > 1e-10:
            raise GuardTripError(
                f"coherence band edge reached {edge:.2e} at t={t}; enlarge the offset margin"
            )


def evolve_density_series(
    params: AmplifierParams,
    input: CoherentInput,
    cutoff_s: int,
    times,
    dt: float | None = None,
) -> list[FockState]:
    """Master-equation evolution snapshotted at the (sorted) requested times."""
    times = [float(t) for t in times]
    if any(t < 0 for t in times) or times != sorted(times):
        raise ValueError("times must be nonnegative and sorted")
    d = int(cutoff_s) + 1
    if dt is None:
        dt = 1e-3 / params.kappa_up
    dt = _stable_dt(params, d, dt)
    n = np.arange(d)
    log_mag = -input.amplitude_sq / 2 + n * (np.log(input.amplitude_sq) / 2) - gammaln(n + 1) / 2
    c = np.exp(log_mag) * np.exp(1j * n * input.theta)
    c /= np.sqrt((np.abs(c) ** 2).sum())
    evolver = _BandEvolver(params, d, _band_kmax(c))
    band = evolver.initial_band(c)
    out = []
    t_now = 0.0
    for t in times:
        band = evolver.run(band, t_now, t, dt)
        t_now = t
        _check_band(band, d, t)
        out.append(_band_to_state(band, d))
    return out


def evolve_density(
    params: AmplifierParams,
    input: CoherentInput,
    cutoff_s: int,
    t: float,
    dt: float | None = None,
) -> FockState:
    """Coherent input evolved under the gain/loss master equation to time t."""
    return evolve_density_series(params, input, cutoff_s, [t], dt=dt)[0]


def richardson_check(
    params: AmplifierParams,
    input: CoherentInput,
    cutoff_s: int,
    t: float,
    dt: float | None = None,
) -> float:
    """Largest density-matrix change when the step is halved (integrator check)."""
    if dt is None:
        dt = 1e-3 / params.kappa_up
    full = evolve_density(params, input, cutoff_s, t, dt=dt)
    half = evolve_density(params, input, cutoff_s, t, dt=dt / 2)
    return float(np.abs(full.rho - half.rho).max())


def pegg_barnett_distribution(state: FockState, phi_0: float) -> PhaseDensity:
    """Phase density from projecting onto the s+1 discrete phase states.

    p(phi_m) = [(s+1)/2pi] <phi_m|rho|phi_m> on phi_m = phi_0 + 2pi m/(s+1);
    in Fourier form (1/2pi)[1 + 2 sum_k Re(c_k e^(-ik phi))] with c_k the sum
    of the k-th subdiagonal of rho.  The grid sum integrates to trace(rho)
    exactly.
    """
    d = state.cutoff_s + 1
    m = np.arange(d)
    phi = phi_0 + 2 * np.pi * m / d
    dens = np.full(d, np.trace(state.rho).real)
    for k in range(1, d):
        ck = np.trace(state.rho, offset=-k)
        if ck == 0:
            continue
        dens += 2 * (ck * np.exp(-1j * k * phi)).real
    dens /= 2 * np.pi
    return PhaseDensity(phi_grid=phi, density=np.maximum(dens, 0.0), origin="pegg_barnett")


def distribution_variance(density: PhaseDensity) -> float:
    """Windowed phase variance with the window recentered on the peak.

    The grid is rolled so the density's maximum sits at the window center
    before the moments are taken (the distribution is single-peaked, so this
    places it wholly inside one period).  A warning is issued when the
    recentered window still carries visible mass at its edges.
    """
    dens = density.density
    m = len(dens)
    h = density.spacing
    peak = int(np.argmax(dens))
    rolled = np.roll(dens, m // 2 - peak)
    phi = density.phi_grid[peak] + (np.arange(m) - m // 2) * h
    edge_mass = float((rolled[0] + rolled[-1]) * h)
    if edge_mass > 1e-6:
        warnings.warn(
            f"recentered window carries {edge_mass:.2e} mass at its edges; "
            "variance may be window-dependent",
            stacklevel=2,
        )
    mass = float(rolled.sum() * h)
    mean = float((phi * rolled).sum() * h / mass)
    second = float((phi**2 * rolled).sum() * h / mass)
    return second - mean**2
