"""numpy implementations of the simplex inner kernels.

Semantics match ``_kernels.pyx`` exactly; these are used when the compiled
extension is unavailable or ``FLEXINVEST_KERNELS=python`` is set.
"""
import numpy as np

BASIC, AT_LB, AT_UB, FREE, FIXED = 0, 1, 2, 3, 4


def price(d, w, status, tol, bland):
    elig = ((status == AT_LB) & (d < -tol)) | ((status == AT_UB) & (d > tol)) \
        | ((status == FREE) & (np.abs(d) > tol))
    idx = np.flatnonzero(elig)
    if idx.size == 0:
        return -1
    if bland:
        return int(idx[0])
    di = d[idx]
    return int(idx[np.argmax(di * di / w[idx])])


def ratio_test(xB, lbB, ubB, alpha, direction, ptol, ftol, bland, head):
    delta = direction * alpha
    dec = (delta > ptol) & np.isfinite(lbB)
    inc = (delta < -ptol) & np.isfinite(ubB)
    cand = np.flatnonzero(dec | inc)
    if cand.size == 0:
        return -1, np.inf
    dc = delta[cand]
    up = dc < 0
    gap = np.where(up, ubB[cand] - xB[cand], xB[cand] - lbB[cand])
    adc = np.abs(dc)
    exact = gap / adc
    if bland:
        exact = np.maximum(exact, 0.0)
        tmin = exact.min()
        ties = cand[exact <= tmin + 1e-12 * max(1.0, tmin)]
        r = int(ties[np.argmin(head[ties])])
        return r, float(max(tmin, 0.0))
    tmax = ((gap + ftol) / adc).min()
    ok = exact <= tmax
    sel = np.flatnonzero(ok)
    k = sel[np.argmax(adc[sel])]
    return int(cand[k]), float(max(exact[k], 0.0))


def ftran_etas(z, k, eta_r, eta_piv, eta_start, eta_idx, eta_val):
    for e in range(k):
        r = eta_r[e]
        zr = z[r]
        if zr != 0.0:
            zr = zr / eta_piv[e]
            z[r] = zr
            s, t = eta_start[e], eta_start[e + 1]
            z[eta_idx[s:t]] -= eta_val[s:t] * zr


def btran_etas(w, k, eta_r, eta_piv, eta_start, eta_idx, eta_val):
    for e in range(k - 1, -1, -1):
        r = eta_r[e]
        s, t = eta_start[e], eta_start[e + 1]
        acc = w[r] - np.dot(eta_val[s:t], w[eta_idx[s:t]])
        w[r] = acc / eta_piv[e]
