"""Phase variance under the small-noise approximation.

Replacing E[1/N(t)] by 1/E[N(t)] closes the phase second-moment equation; the
time integral of kappa_up / (2 E[N(t)]) then has the closed log form below.
By Jensen's inequality (1/N convex) this is a lower bound on the true phase
variance at every time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .moments import _log_gain, mean_photon
from .params import AmplifierParams, CoherentInput

__all__ = [
    "SmallNoiseConstants",
    "small_noise_constants",
    "small_noise_phase_variance",
    "small_noise_variance_rate",
]


@dataclass(frozen=True)
class SmallNoiseConstants:
    """Constants of the mean-photon curve E[N(t)] = a G_t + b."""

    a: float
    b: float


def small_noise_constants(params: AmplifierParams, input: CoherentInput) -> SmallNoiseConstants:
    r = params.noise_ratio
    return SmallNoiseConstants(a=input.amplitude_sq + r, b=-r)


def small_noise_phase_variance(
    params: AmplifierParams,
    input: CoherentInput,
    t,
    initial_variance: float = 0.0,
):
    """Closed-form V[Phi(t)] with E[1/N] replaced by 1/E[N].

    V(t) = V(0) + (1/2) ln[(n0 + r)/n0] + (1/2) ln[1 - r/((n0 + r) G_t)],
    r = kappa_up/kappa_minus.  Both logs are evaluated as log1p so the large-G
    tail (argument -> 1) keeps full precision.  V(0) is zero for a coherent
    phase-space point; pass initial_variance for inputs with intrinsic spread.
    """
    n0 = input.amplitude_sq
    r = params.noise_ratio
    x = _log_gain(params, t)
    return (
        initial_variance
        + 0.5 * np.log1p(r / n0)
        + 0.5 * np.log1p(-r / ((n0 + r) * np.exp(x)))
    )


def small_noise_variance_rate(params: AmplifierParams, input: CoherentInput, t):
    """d/dt of the small-noise phase variance: kappa_up / (2 E[N(t)])."""
    return params.kappa_up / (2.0 * mean_photon(params, input.amplitude_sq, t))
