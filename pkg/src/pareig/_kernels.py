"""Compiled inner loops: Thomas solves over many consecutive time steps."""

import math

import numpy as np
from numba import njit

OK = 0
NEGATIVE = 1
BAD_PIVOT = 2


@njit(cache=True, nogil=True)
def _thomas(lo, di, up, rhs, out, cp):
    """Solve a tridiagonal system; returns False on a nonpositive pivot.

    Positive pivots are guaranteed for M-matrices, so a nonpositive pivot
    signals a broken monotonicity condition.
    """
    n = di.shape[0]
    piv = di[0]
    if piv <= 0.0:
        return False
    cp[0] = up[0] / piv
    out[0] = rhs[0] / piv
    for i in range(1, n):
        piv = di[i] - lo[i] * cp[i - 1]
        if piv <= 0.0:
            return False
        cp[i] = up[i] / piv
        out[i] = (rhs[i] - lo[i] * out[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        out[i] -= cp[i] * out[i + 1]
    return True


@njit(cache=True, nogil=True)
def advance_linear(lower, diag, upper, shift, u, dt, theta, logs, snap_every, snaps, status):
    """Renormalized theta-scheme steps for u_t + L u = 0.

    lower/diag/upper have shape (R, n) with R == 1 (frozen rows) or R == K
    (one row set per step); shift[k] is added to the diagonal at step k.
    logs[k] receives ln of the stripped sup-norm.  u is overwritten with the
    final max-normalized profile.
    """
    K = shift.shape[0]
    n = u.shape[0]
    rows = lower.shape[0]
    lo = np.empty(n)
    di = np.empty(n)
    up = np.empty(n)
    rhs = np.empty(n)
    v = np.empty(n)
    cp = np.empty(n)
    explicit = 1.0 - theta
    for k in range(K):
        r = k if rows > 1 else 0
        s = shift[k]
        for i in range(n):
            lo[i] = dt * theta * lower[r, i]
            up[i] = dt * theta * upper[r, i]
            di[i] = 1.0 + dt * theta * (diag[r, i] + s)
        if explicit > 0.0:
            for i in range(n):
                acc = (diag[r, i] + s) * u[i]
                if i > 0:
                    acc += lower[r, i] * u[i - 1]
                if i < n - 1:
                    acc += upper[r, i] * u[i + 1]
                rhs[i] = u[i] - dt * explicit * acc
        else:
            for i in range(n):
                rhs[i] = u[i]
        if not _thomas(lo, di, up, rhs, v, cp):
            status[0] = BAD_PIVOT
            status[1] = k
            return
        m = 0.0
        for i in range(n):
            if v[i] < 0.0:
                status[0] = NEGATIVE
                status[1] = k
                return
            if v[i] > m:
                m = v[i]
        if m <= 0.0:
            status[0] = NEGATIVE
            status[1] = k
            return
        inv = 1.0 / m
        for i in range(n):
            u[i] = v[i] * inv
        logs[k] = math.log(m)
        if snap_every > 0 and (k + 1) % snap_every == 0:
            j = (k + 1) // snap_every - 1
            for i in range(n):
                snaps[j, i] = u[i]
    status[0] = OK
    status[1] = K


@njit(cache=True, nogil=True)
def advance_kpp(lower, diag, upper, shift, absorb, power, u, dt, rec_every,
                sups, probe_infs, probe_lo, probe_hi, snaps, status):
    """Backward Euler for u_t + L u = -n u^power * u with implicit weighting.

    The absorption enters the diagonal as dt * n * u_old^power (Patankar
    form), so the update matrix stays an M-matrix and u >= 0 is preserved.
    absorb has shape (R, n) like the operator rows.
    """
    K = shift.shape[0]
    n = u.shape[0]
    rows = lower.shape[0]
    arows = absorb.shape[0]
    lo = np.empty(n)
    di = np.empty(n)
    up = np.empty(n)
    v = np.empty(n)
    cp = np.empty(n)
    for k in range(K):
        r = k if rows > 1 else 0
        ra = k if arows > 1 else 0
        s = shift[k]
        for i in range(n):
            lo[i] = dt * lower[r, i]
            up[i] = dt * upper[r, i]
            w = u[i] if power == 1 else u[i] * u[i]
            di[i] = 1.0 + dt * (diag[r, i] + s + absorb[ra, i] * w)
        if not _thomas(lo, di, up, u, v, cp):
            status[0] = BAD_PIVOT
            status[1] = k
            return
        for i in range(n):
            if v[i] < 0.0:
                status[0] = NEGATIVE
                status[1] = k
                return
            u[i] = v[i]
        if rec_every > 0 and (k + 1) % rec_every == 0:
            j = (k + 1) // rec_every - 1
            m = 0.0
            p = np.inf
            for i in range(n):
                if u[i] > m:
                    m = u[i]
                if i >= probe_lo and i < probe_hi and u[i] < p:
                    p = u[i]
            sups[j] = m
            probe_infs[j] = p
            if snaps.shape[0] > j:
                for i in range(n):
                    snaps[j, i] = u[i]
    status[0] = OK
    status[1] = K
