"""Closed-form photon-number statistics and signal-to-noise diagnostics.

All formulas are evaluated in log-gain form: the exponent x = kappa_minus * t
is formed first and G - 1 terms go through expm1, so small-t values do not
suffer cancellation (G - 1 ~ kappa_minus * t there).
"""

from __future__ import annotations

import numpy as np

from .params import AmplifierParams, CoherentInput

__all__ = [
    "gain",
    "mean_photon",
    "second_moment_photon",
    "photon_variance",
    "inverse_snr",
    "high_gain_inverse_snr",
    "small_noise_inverse_mean",
]


def _log_gain(params: AmplifierParams, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    return params.kappa_minus * t


def gain(params: AmplifierParams, t):
    """Photon-number gain G_t = exp(kappa_minus * t)."""
    return np.exp(_log_gain(params, t))


def mean_photon(params: AmplifierParams, n0: float, t):
    """E[N(t)] = G_t n0 + (kappa_up/kappa_minus)(G_t - 1).

    The second piece is the input-independent spontaneous-emission noise.
    """
    if n0 < 0:
        raise ValueError("n0 must be >= 0")
    x = _log_gain(params, t)
    return n0 * np.exp(x) + params.noise_ratio * np.expm1(x)


def second_moment_photon(params: AmplifierParams, n0: float, n0_sq: float, t):
    """E[N^2(t)] for an initial distribution with mean n0 and second moment n0_sq.

    n0_sq is taken as given (for a coherent phase-space point it equals n0^2);
    no distributional assumption beyond n0_sq >= n0^2 is made.
    """
    if n0 < 0:
        raise ValueError("n0 must be >= 0")
    if n0_sq < n0**2 * (1 - 1e-12):
        raise ValueError(f"n0_sq must be >= n0^2, got n0_sq={n0_sq}, n0^2={n0**2}")
    km = params.kappa_minus
    ku = params.kappa_up
    x = _log_gain(params, t)
    ex = np.exp(x)
    # G^2(1 - 1/G) = G(G-1) and G^2(1 - 1/G^2) = G^2 - 1, kept in expm1 form
    return ex**2 * n0_sq + 4 * ku * (
        ((km * n0 + ku) / km**2) * ex * np.expm1(x)
        - (ku / (2 * km**2)) * np.expm1(2 * x)
    )


def photon_variance(params: AmplifierParams, input: CoherentInput, t):
    """V[N(t)] for a coherent input.

    Algebraically V = E[N^2] - E[N]^2; for the deterministic initial point the
    difference collapses to 2 r G(G-1) n0 + r^2 (G-1)^2 with r = kappa_up /
    kappa_minus, which is the form evaluated here (no cancellation at small t).
    """
    r = params.noise_ratio
    x = _log_gain(params, t)
    gm1 = np.expm1(x)
    return 2 * r * np.exp(x) * gm1 * input.amplitude_sq + (r * gm1) ** 2


def inverse_snr(params: AmplifierParams, input: CoherentInput, t):
    """1/sigma(t) = V[N(t)] / E[N(t)]^2, the inverse signal-to-noise ratio."""
    mean = mean_photon(params, input.amplitude_sq, t)
    if np.any(mean == 0):
        raise ZeroDivisionError("mean photon number vanishes on the requested grid")
    return photon_variance(params, input, t) / mean**2


def high_gain_inverse_snr(params: AmplifierParams, amplitude_sq: float):
    """Stationary (G -> infinity) limit of 1/sigma for a coherent input.

    Sigma(|alpha|^2) = [(|alpha|^2 + r)^2 - |alpha|^4] / (|alpha|^2 + r)^2,
    r = kappa_up/kappa_minus.  Equals 1 exactly at zero input and decays to 0
    for strong inputs; smaller r (a more ideal amplifier) gives a smaller value
    at every nonzero input strength.
    """
    amplitude_sq = np.asarray(amplitude_sq, dtype=float)
    if np.any(amplitude_sq < 0):
        raise ValueError("amplitude_sq must be >= 0")
    r = params.noise_ratio
    return (2 * amplitude_sq * r + r**2) / (amplitude_sq + r) ** 2


def small_noise_inverse_mean(params: AmplifierParams, input: CoherentInput, t):
    """Second-order Taylor estimate of E[1/N(t)]: (1 + 1/sigma(t)) / E[N(t)]."""
    mean = mean_photon(params, input.amplitude_sq, t)
    return (1.0 + inverse_snr(params, input, t)) / mean
