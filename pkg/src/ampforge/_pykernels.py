"""Pure-Python/numpy implementation of the Omega-search kernels.

Mirrors ``_kernels.pyx`` step for step; used when the compiled extension is
unavailable or ``AMPFORGE_PURE_PYTHON=1`` is set.
"""

import numpy as np

NAME = "python"


def unpack_omega(x, p):
    n = p.shape[0]
    omega = np.diag(p.astype(complex))
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            omega[i, j] = x[2 * k] + 1j * x[2 * k + 1]
            omega[j, i] = x[2 * k] - 1j * x[2 * k + 1]
            k += 1
    return omega


def min_eig_hermitian(re, im):
    return float(np.linalg.eigvalsh(np.asarray(re) + 1j * np.asarray(im))[0])


def penalty(x, gpi_re, gpi_im, gxi_re, gxi_im, p, margin):
    """Squared hinge on the smallest eigenvalues of Omega and K, shifted by ``margin``."""
    omega = unpack_omega(x, p)
    gpi = gpi_re + 1j * gpi_im
    gxi = gxi_re + 1j * gxi_im
    lam_o = np.linalg.eigvalsh(omega)[0]
    lam_k = np.linalg.eigvalsh(gpi - gxi * omega)[0]
    a = max(0.0, margin - lam_o)
    b = max(0.0, margin - lam_k)
    return a * a + b * b


def nelder_mead_penalty(x0, step, gpi_re, gpi_im, gxi_re, gxi_im, p, margin,
                        maxfev, xatol, fatol, inner_restarts):
    """Adaptive Nelder-Mead on :func:`penalty`; stops early at an exact zero.

    Returns:
        (x_best, f_best, nfev)
    """
    args = (gpi_re, gpi_im, gxi_re, gxi_im, p, margin)
    x = np.array(x0, dtype=float)
    nv = x.size
    rho, chi = 1.0, 1.0 + 2.0 / nv
    psi, sigma = 0.75 - 1.0 / (2.0 * nv), 1.0 - 1.0 / nv
    nfev = 0
    fbest = np.inf
    for _ in range(inner_restarts + 1):
        sim = np.empty((nv + 1, nv))
        sim[0] = x
        for i in range(nv):
            sim[i + 1] = x
            sim[i + 1, i] += step
        fs = np.empty(nv + 1)
        for i in range(nv + 1):
            fs[i] = penalty(sim[i], *args)
        nfev += nv + 1
        while nfev < maxfev:
            order = np.argsort(fs, kind="stable")
            sim = sim[order]
            fs = fs[order]
            if fs[0] <= 0.0:
                break
            if (np.max(np.abs(fs[1:] - fs[0])) <= fatol
                    and np.max(np.abs(sim[1:] - sim[0])) <= xatol):
                break
            xbar = sim[:-1].sum(axis=0) / nv
            xr = xbar + rho * (xbar - sim[-1])
            fr = penalty(xr, *args)
            nfev += 1
            if fr < fs[0]:
                xe = xbar + rho * chi * (xbar - sim[-1])
                fe = penalty(xe, *args)
                nfev += 1
                if fe < fr:
                    sim[-1], fs[-1] = xe, fe
                else:
                    sim[-1], fs[-1] = xr, fr
                continue
            if fr < fs[-2]:
                sim[-1], fs[-1] = xr, fr
                continue
            if fr < fs[-1]:
                xc = xbar + psi * rho * (xbar - sim[-1])
                fc = penalty(xc, *args)
                nfev += 1
                if fc <= fr:
                    sim[-1], fs[-1] = xc, fc
                    continue
            else:
                xc = xbar - psi * (xbar - sim[-1])
                fc = penalty(xc, *args)
                nfev += 1
                if fc < fs[-1]:
                    sim[-1], fs[-1] = xc, fc
                    continue
            for j in range(1, nv + 1):
                sim[j] = sim[0] + sigma * (sim[j] - sim[0])
                fs[j] = penalty(sim[j], *args)
            nfev += nv
        i0 = int(np.argmin(fs))
        if fs[i0] < fbest:
            fbest = float(fs[i0])
            x = sim[i0].copy()
        if fbest <= 0.0 or nfev >= maxfev:
            break
    return x, fbest, nfev
