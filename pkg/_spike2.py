"""Second spike: MC phase variance vs expansion margins; P vs PB variance at T=4."""
import numpy as np
from math import factorial

kup, kdn = 1.0, 0.0
km = kup - kdn


def chi_ideal(n, G):
    tot = np.zeros_like(np.asarray(G, dtype=float))
    for k in range(1, n + 1):
        prod = 1.0
        for j in range(1, n + 1):
            if j != k:
                prod *= (j - k)
        tot = tot + (1 - G**(-k)) / (k * prod)
    return factorial(n - 1) ** 2 / 2 * tot


def v_expansion(A, K, t):
    G = np.exp(km * t)
    return sum(chi_ideal(n, G) * A**(-n) for n in range(1, K + 1))


def v_smallnoise(A, t):
    r = kup / km
    G = np.exp(km * t)
    return 0.5 * np.log1p(r / A) + 0.5 * np.log1p(-r / ((A + r) * G))


def run_mc(A, seed, ntraj=500, dt=1e-3, tmax=6.0, rec=10):
    rng_master = seed
    steps = int(round(tmax / dt))
    nrec = steps // rec + 1
    phiv = np.empty((ntraj, nrec))
    Nv = np.empty((ntraj, nrec))
    for i in range(ntraj):
        rng = np.random.default_rng(np.random.SeedSequence([rng_master, i]))
        xi = rng.standard_normal((steps, 2)) * np.sqrt(dt)
        N = A
        phi = np.pi
        phiv[i, 0] = phi
        Nv[i, 0] = N
        k = 0
        for s in range(steps):
            phi = phi + np.sqrt(kup / (2 * N)) * xi[s, 1]
            N = N + (kup + km * N) * dt + np.sqrt(2 * kup * N) * xi[s, 0]
            if N < 1e-6:
                N = 1e-6
            if (s + 1) % rec == 0:
                k += 1
                phiv[i, k] = phi
                Nv[i, k] = N
    return phiv, Nv


for A in (2.25, 13.0):
    phiv, Nv = run_mc(A, seed=20260809)
    t = np.arange(phiv.shape[1]) * 1e-2
    sv = phiv.var(axis=0, ddof=1)
    n = phiv.shape[0]
    dev = phiv - phiv.mean(axis=0)
    m4 = (dev**4).mean(axis=0)
    se_var = np.sqrt((m4 - sv**2 * (n - 3) / (n - 1)) / n)
    vk4 = v_expansion(A, 4, t)
    vk1 = v_expansion(A, 1, t)
    vsn = v_smallnoise(A, t)
    z = (sv - vk4) / np.where(se_var > 0, se_var, 1)
    print(f"A={A}: max|z| sample vs K4 = {np.abs(z[1:]).max():.2f}")
    print(f"   stationary: sample={sv[-1]:.4f} K4={vk4[-1]:.4f} K1={vk1[-1]:.4f} sn={vsn[-1]:.4f} se={se_var[-1]:.4f}")
    gap_sn = (vk4[-1] - vsn[-1]) / se_var[-1]
    print(f"   (K4 - smallnoise)/SE at end = {gap_sn:.1f}")

# Jensen check: smallnoise <= K2 everywhere?
t = np.linspace(0, 8, 300)
for A in (1.5, 2.25, 5.0, 13.0):
    d = v_expansion(A, 2, t) - v_smallnoise(A, t)
    print(f"A={A}: min(K2 - smallnoise) = {d.min():.3e}")
