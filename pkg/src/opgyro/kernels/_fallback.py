"""Pure-numpy twin of the compiled RK4 kernel (same signature and results)."""

import numpy as np


def rk4_evolve(K, psi0, h, w0, wm, w1, record):
    psi = np.array(psi0, dtype=complex, copy=True)
    states = np.empty((len(record), psi.size), dtype=complex)
    r = 0
    max_drift = 0.0
    while r < len(record) and record[r] == 0:
        states[r] = psi
        r += 1
    for step in range(len(h)):
        dt = h[step]
        k1 = -1j * w0[step] * (K @ psi)
        k2 = -1j * wm[step] * (K @ (psi + 0.5 * dt * k1))
        k3 = -1j * wm[step] * (K @ (psi + 0.5 * dt * k2))
        k4 = -1j * w1[step] * (K @ (psi + dt * k3))
        psi = psi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        norm = np.linalg.norm(psi)
        max_drift = max(max_drift, abs(norm - 1.0))
        psi /= norm
        while r < len(record) and record[r] == step + 1:
            states[r] = psi
            r += 1
    return states, max_drift
