"""Prototype banded RK4 master-equation evolution; PB vs P variance checks."""
import time
import numpy as np
from scipy.special import gammaln, erf as serf

kup, kdn = 1.0, 0.0
A, theta = 2.25, np.pi


def coherent_amps(A, theta, d):
    n = np.arange(d)
    logmag = -A / 2 + n * (np.log(A) / 2) - gammaln(n + 1) / 2
    return np.exp(logmag) * np.exp(1j * n * theta)


def chernoff_cutoff(beta_sq, n_th, tail):
    if n_th < 1e-300:
        zmax = 1e4
    else:
        zmax = (1 - 1e-10) / n_th
    zeta = np.geomspace(1e-8, zmax, 4000)
    logM = beta_sq * zeta / (1 - n_th * zeta) - np.log1p(-n_th * zeta)
    sreq = (logM - np.log(tail)) / np.log1p(zeta) - 1
    return max(int(np.ceil(sreq.min())), 0)


def evolve_band(c, d, kmax, T, dt):
    n = np.arange(d)
    K = kmax + 1
    # B[k, m] = rho[m+k, m]
    B = np.zeros((K, d), dtype=complex)
    for k in range(K):
        B[k, : d - k] = c[k:] * np.conj(c[: d - k])
    # coefficient arrays
    kk = np.arange(K)[:, None]
    nn = n[None, :]
    valid = nn <= d - 1 - kk
    f = lambda x: np.where(x < d - 1, x + 1.0, 0.0)
    Cdn = np.where(nn <= d - 2 - kk, kdn * np.sqrt((nn + kk + 1.0) * (nn + 1.0)), 0.0)
    Cup = np.where((nn >= 1) & valid, kup * np.sqrt((nn + kk) * 1.0 * nn), 0.0)
    Cdec = np.where(valid, -0.5 * (kdn * (2 * nn + kk) + kup * (f(nn + kk) + f(nn))), 0.0)

    def rhs(B):
        out = Cdec * B
        out[:, :-1] += Cdn[:, :-1] * B[:, 1:]
        out[:, 1:] += Cup[:, 1:] * B[:, :-1]
        return out

    steps = int(round(T / dt))
    for _ in range(steps):
        k1 = rhs(B)
        k2 = rhs(B + 0.5 * dt * k1)
        k3 = rhs(B + 0.5 * dt * k2)
        k4 = rhs(B + dt * k3)
        B = B + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return B


def pb_variance(B, d, phi0):
    # c_k = sum_n rho[n+k, n]
    ck = B.sum(axis=1)
    M = d  # s+1 grid points
    m = np.arange(M)
    phi = phi0 + 2 * np.pi * m / M
    dens = np.full(M, ck[0].real)
    for k in range(1, B.shape[0]):
        dens += 2 * (ck[k] * np.exp(-1j * k * phi)).real
    dens /= 2 * np.pi
    h = 2 * np.pi / M
    mass = dens.sum() * h
    peak = np.argmax(dens)
    rolled = np.roll(dens, M // 2 - peak)
    phis = phi[peak] + (m - M // 2) * h
    mean = (phis * rolled).sum() * h / mass
    var = (phis ** 2 * rolled).sum() * h / mass - mean ** 2
    return var, mass, dens.min()


def p_var(eta, theta):
    M = 20001
    phi = np.linspace(theta - np.pi, theta + np.pi, M, endpoint=False)
    dl = phi - theta
    c = np.cos(dl)
    dens = np.exp(-eta) / (2 * np.pi) + c / (2 * np.pi) * np.sqrt(np.pi * eta) * np.exp(
        -eta * np.sin(dl) ** 2
    ) * (1 + serf(np.sqrt(eta) * c))
    h = 2 * np.pi / M
    mean = (phi * dens).sum() * h
    return (phi ** 2 * dens).sum() * h - mean ** 2


for T in (0.1, 4.0):
    G = np.exp(kup * T)
    nth = G - 1
    bsq = G * A
    s_in = chernoff_cutoff(A, 0.0, 1e-10)
    s_out = chernoff_cutoff(bsq, nth, 1e-10)
    s = max(s_in, s_out)
    d = s + 1
    c = coherent_amps(A, theta, d)
    # renormalize
    c = c / np.sqrt((np.abs(c) ** 2).sum())
    # kmax from initial band
    kmax = 0
    for k in range(d):
        if np.max(np.abs(c[k:] * np.conj(c[: d - k]))) < 1e-17:
            kmax = k + 8
            break
    t0 = time.time()
    B = evolve_band(c, d, kmax, T, dt=1e-3)
    el = time.time() - t0
    tr = B[0].sum().real
    nmean = (np.arange(d) * B[0].real).sum()
    expected = G * A + (kup / kup) * (G - 1)
    toppop = B[0, d - 1].real
    boundary = np.abs(B[-3:]).max()
    vpb, mass, dmin = pb_variance(B, d, theta - np.pi)
    vp = p_var(G * A / (G - 1), theta)
    print(
        f"T={T}: s={s} kmax={kmax} elapsed={el:.1f}s trace={tr:.12f} "
        f"<n>={nmean:.8f} (expect {expected:.8f}, rel {abs(nmean-expected)/expected:.2e})"
    )
    print(
        f"      toppop={toppop:.2e} boundary_offsets={boundary:.2e} "
        f"PBvar={vpb:.6f} mass={mass:.9f} min_dens={dmin:.2e} Pvar={vp:.6f} "
        f"ratio diff={(abs(vpb-vp)/vpb)*100:.1f}%"
    )

# doubling-s check at t=ln2
T = np.log(2)
G = np.exp(kup * T)
s_base = max(chernoff_cutoff(A, 0.0, 1e-10), chernoff_cutoff(G * A, G - 1, 1e-10))
for s in (s_base, 2 * s_base):
    d = s + 1
    c = coherent_amps(A, theta, d)
    c = c / np.sqrt((np.abs(c) ** 2).sum())
    kmax = 0
    for k in range(d):
        if np.max(np.abs(c[k:] * np.conj(c[: d - k]))) < 1e-17:
            kmax = k + 8
            break
    kmax = min(kmax, d - 1)
    B = evolve_band(c, d, kmax, T, dt=1e-3)
    vpb, mass, dmin = pb_variance(B, d, theta - np.pi)
    print(f"t=ln2 s={s}: PBvar={vpb:.10f} mass={mass:.10f}")
