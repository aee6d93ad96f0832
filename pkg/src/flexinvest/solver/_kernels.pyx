# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simplex inner kernels; see _pykernels.py for the reference semantics."""
from libc.math cimport fabs, INFINITY, isfinite

cdef enum:
    BASIC = 0
    AT_LB = 1
    AT_UB = 2
    FREE = 3
    FIXED = 4


def price(const double[::1] d, const double[::1] w, const signed char[::1] status, double tol, bint bland):
    cdef Py_ssize_t j, n = d.shape[0], best = -1
    cdef double dj, score, best_score = -1.0
    cdef signed char st
    for j in range(n):
        st = status[j]
        dj = d[j]
        if st == AT_LB:
            if dj >= -tol:
                continue
        elif st == AT_UB:
            if dj <= tol:
                continue
        elif st == FREE:
            if fabs(dj) <= tol:
                continue
        else:
            continue
        if bland:
            return j
        score = dj * dj / w[j]
        if score > best_score:
            best_score = score
            best = j
    return best


def ratio_test(const double[::1] xB, const double[::1] lbB, const double[::1] ubB,
               const double[::1] alpha, double direction, double ptol, double ftol,
               bint bland, const long long[::1] head):
    cdef Py_ssize_t i, m = xB.shape[0], r = -1
    cdef double delta, gap, a, exact, tmax = INFINITY, tmin = INFINITY, best_a = -1.0
    cdef double tol_tie
    cdef long long best_head = 0
    if bland:
        for i in range(m):
            delta = direction * alpha[i]
            if delta > ptol and isfinite(lbB[i]):
                gap = xB[i] - lbB[i]
            elif delta < -ptol and isfinite(ubB[i]):
                gap = ubB[i] - xB[i]
            else:
                continue
            exact = gap / fabs(delta)
            if exact < 0.0:
                exact = 0.0
            if exact < tmin:
                tmin = exact
        if tmin == INFINITY:
            return -1, INFINITY
        tol_tie = tmin + 1e-12 * (tmin if tmin > 1.0 else 1.0)
        for i in range(m):
            delta = direction * alpha[i]
            if delta > ptol and isfinite(lbB[i]):
                gap = xB[i] - lbB[i]
            elif delta < -ptol and isfinite(ubB[i]):
                gap = ubB[i] - xB[i]
            else:
                continue
            exact = gap / fabs(delta)
            if exact < 0.0:
                exact = 0.0
            if exact <= tol_tie and (r < 0 or head[i] < best_head):
                r = i
                best_head = head[i]
        return r, (tmin if tmin > 0.0 else 0.0)

    for i in range(m):
        delta = direction * alpha[i]
        if delta > ptol and isfinite(lbB[i]):
            gap = xB[i] - lbB[i]
        elif delta < -ptol and isfinite(ubB[i]):
            gap = ubB[i] - xB[i]
        else:
            continue
        exact = (gap + ftol) / fabs(delta)
        if exact < tmax:
            tmax = exact
    if tmax == INFINITY:
        return -1, INFINITY
    for i in range(m):
        delta = direction * alpha[i]
        if delta > ptol and isfinite(lbB[i]):
            gap = xB[i] - lbB[i]
        elif delta < -ptol and isfinite(ubB[i]):
            gap = ubB[i] - xB[i]
        else:
            continue
        a = fabs(delta)
        exact = gap / a
        if exact <= tmax and a > best_a:
            best_a = a
            r = i
            tmin = exact
    return r, (tmin if tmin > 0.0 else 0.0)


def ftran_etas(double[::1] z, Py_ssize_t k, const long long[::1] eta_r, const double[::1] eta_piv,
               const long long[::1] eta_start, const long long[::1] eta_idx, const double[::1] eta_val):
    cdef Py_ssize_t e, p
    cdef long long r
    cdef double zr
    for e in range(k):
        r = eta_r[e]
        zr = z[r]
        if zr != 0.0:
            zr = zr / eta_piv[e]
            z[r] = zr
            for p in range(eta_start[e], eta_start[e + 1]):
                z[eta_idx[p]] -= eta_val[p] * zr


def btran_etas(double[::1] w, Py_ssize_t k, const long long[::1] eta_r, const double[::1] eta_piv,
               const long long[::1] eta_start, const long long[::1] eta_idx, const double[::1] eta_val):
    cdef Py_ssize_t e, p
    cdef long long r
    cdef double acc
    for e in range(k - 1, -1, -1):
        r = eta_r[e]
        acc = w[r]
        for p in range(eta_start[e], eta_start[e + 1]):
            acc -= eta_val[p] * w[eta_idx[p]]
        w[r] = acc / eta_piv[e]
