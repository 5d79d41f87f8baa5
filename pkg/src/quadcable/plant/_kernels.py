"""Compiled inner loops for the coupled load / cable / quadrotor dynamics.

Everything here works on the flat state vector; see ``plant.state`` for the
layout. Generalized speed ordering (the ``X`` vector) is
``[v_l (3), Omega_l (3), omega_s (3 per segment), l_dot_s (1 per segment)]``
with segments numbered cable-major.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_CACHE = True


@njit(cache=_CACHE)
def _hat(v):
    out = np.zeros((3, 3))
    out[0, 1] = -v[2]
    out[0, 2] = v[1]
    out[1, 0] = v[2]
    out[1, 2] = -v[0]
    out[2, 0] = -v[1]
    out[2, 1] = v[0]
    return out


@njit(cache=_CACHE)
def _cross(a, b):
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


@njit(cache=_CACHE)
def _gate(x):
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return 0.0
    return 0.5


@njit(cache=_CACHE)
def _offsets(N, n):
    q0 = 18
    w0 = q0 + 3 * N
    l0 = w0 + 3 * N
    ld0 = l0 + N
    qr0 = ld0 + N
    qw0 = qr0 + 9 * n
    return q0, w0, l0, ld0, qr0, qw0


@njit(cache=_CACHE)
def _mm(A, B):
    out = np.zeros((A.shape[0], B.shape[1]))
    for i in range(A.shape[0]):
        for k in range(A.shape[1]):
            a = A[i, k]
            if a != 0.0:
                for j in range(B.shape[1]):
                    out[i, j] += a * B[k, j]
    return out


@njit(cache=_CACHE)
def _mv(A, v):
    out = np.zeros(A.shape[0])
    for i in range(A.shape[0]):
        acc = 0.0
        for k in range(A.shape[1]):
            acc += A[i, k] * v[k]
        out[i] = acc
    return out


@njit(cache=_CACHE)
def _vm(v, A):
    out = np.zeros(A.shape[1])
    for k in range(A.shape[0]):
        for j in range(A.shape[1]):
            out[j] += v[k] * A[k, j]
    return out


@njit(cache=_CACHE)
def _load_block(dvec, Mq, MT, Jl, R):
    """6 x 6 block acting on [v_l dot, Omega_l dot] in the load rows."""
    A = np.zeros((6, 6))
    for k in range(3):
        A[k, k] = MT
    A[3:6, 3:6] = Jl
    for i in range(dvec.shape[0]):
        dh = _hat(dvec[i])
        Rdh = _mm(R, dh)
        dh2 = _mm(dh, dh)
        for a in range(3):
            for c in range(3):
                A[a, 3 + c] -= Mq[i] * Rdh[a, c]
                A[3 + a, c] -= Mq[i] * Rdh[c, a]  # hat(d) R^T = -(R hat(d))^T
                A[3 + a, 3 + c] -= Mq[i] * dh2[a, c]
    return A


@njit(cache=_CACHE)
def _cable_blocks(y, i, start, dvec, Mc, R, regularize):
    """Coupling blocks of cable ``i``.

    Local unknowns are ``[omega_dot_1..m (3 each), l_ddot_1..m]``. Returns
    ``(B, Cb, D)``: load rows x local columns (6 x 4m), local rows x load
    columns (4m x 6), local square block (4m x 4m). Uses
    ``-hat(q)^2 = I - q q^T`` for unit ``q``.
    """
    n = dvec.shape[0]
    N = start[n]
    q0, _, l0, _, _, _ = _offsets(N, n)
    s0 = start[i]
    m = start[i + 1] - s0
    B = np.zeros((6, 4 * m))
    Cb = np.zeros((4 * m, 6))
    D = np.zeros((4 * m, 4 * m))
    Rdh = _mm(R, _hat(dvec[i]))
    Q = np.empty((m, 3))
    H = np.empty((m, 3, 3))
    l = np.empty(m)
    for b in range(m):
        for a in range(3):
            Q[b, a] = y[q0 + 3 * (s0 + b) + a]
        H[b] = _hat(Q[b])
        l[b] = y[l0 + s0 + b]
    qR = np.empty(3)  # (R hat(d))^T q
    for b in range(m):
        Mb = Mc[s0 + b]
        lb = l[b]
        for c in range(3):
            qR[c] = Q[b, 0] * Rdh[0, c] + Q[b, 1] * Rdh[1, c] + Q[b, 2] * Rdh[2, c]
        for a in range(3):
            for c in range(3):
                B[a, 3 * b + c] = Mb * lb * H[b, a, c]
                B[3 + a, 3 * b + c] = -Mb * lb * (Rdh[0, a] * H[b, 0, c] + Rdh[1, a] * H[b, 1, c]
                                                  + Rdh[2, a] * H[b, 2, c])
                proj = -Q[b, a] * Q[b, c]
                if a == c:
                    proj += 1.0
                Cb[3 * b + a, c] = Mb * lb * proj
                Cb[3 * b + a, 3 + c] = -Mb * lb * (Rdh[a, c] - Q[b, a] * qR[c])
            B[a, 3 * m + b] = -Mb * Q[b, a]
            B[3 + a, 3 * m + b] = Mb * qR[a]
            Cb[3 * m + b, a] = -Mb * Q[b, a]
            Cb[3 * m + b, 3 + a] = Mb * qR[a]
        for c in range(m):
            Mbc = Mc[s0 + min(b, c)]
            lc = l[c]
            # q_b x q_c and q_b . q_c
            x0 = Q[b, 1] * Q[c, 2] - Q[b, 2] * Q[c, 1]
            x1 = Q[b, 2] * Q[c, 0] - Q[b, 0] * Q[c, 2]
            x2 = Q[b, 0] * Q[c, 1] - Q[b, 1] * Q[c, 0]
            dot = Q[b, 0] * Q[c, 0] + Q[b, 1] * Q[c, 1] + Q[b, 2] * Q[c, 2]
            for a in range(3):
                qa = Q[b, a]
                D[3 * b + a, 3 * c] = Mbc * lc * lb * (H[c, a, 0] - qa * x0)
                D[3 * b + a, 3 * c + 1] = Mbc * lc * lb * (H[c, a, 1] - qa * x1)
                D[3 * b + a, 3 * c + 2] = Mbc * lc * lb * (H[c, a, 2] - qa * x2)
                D[3 * b + a, 3 * m + c] = -Mbc * lb * (Q[c, a] - qa * dot)
            D[3 * m + b, 3 * c] = -Mbc * lc * x0
            D[3 * m + b, 3 * c + 1] = -Mbc * lc * x1
            D[3 * m + b, 3 * c + 2] = -Mbc * lc * x2
            D[3 * m + b, 3 * m + c] = Mbc * dot
        if regularize:
            # omega is confined to the tangent plane of q; pin the normal direction
            mu = Mb * lb * lb
            for a in range(3):
                for e in range(3):
                    D[3 * b + a, 3 * b + e] += mu * Q[b, a] * Q[b, e]
    return B, Cb, D


@njit(cache=_CACHE)
def _global_index(start, i, N, k):
    """Map local cable index ``k`` to the global generalized-speed index."""
    m = start[i + 1] - start[i]
    if k < 3 * m:
        return 6 + 3 * start[i] + k
    return 6 + 3 * N + start[i] + (k - 3 * m)


@njit(cache=_CACHE)
def _mass_matrix(y, start, dvec, Mq, Mc, MT, Jl, regularize):
    n = dvec.shape[0]
    N = start[n]
    R = y[6:15].copy().reshape(3, 3)
    M = np.zeros((6 + 4 * N, 6 + 4 * N))
    M[0:6, 0:6] = _load_block(dvec, Mq, MT, Jl, R)
    for i in range(n):
        B, Cb, D = _cable_blocks(y, i, start, dvec, Mc, R, regularize)
        w = B.shape[1]
        for r in range(w):
            gr = _global_index(start, i, N, r)
            for a in range(6):
                M[a, gr] = B[a, r]
                M[gr, a] = Cb[r, a]
            for c in range(w):
                M[gr, _global_index(start, i, N, c)] = D[r, c]
    return M


@njit(cache=_CACHE)
def mass_matrix(y, start, dvec, Mq, Mc, MT, Jl):
    return _mass_matrix(y, start, dvec, Mq, Mc, MT, Jl, False)


@njit(cache=_CACHE)
def regularized_mass_matrix(y, start, dvec, Mq, Mc, MT, Jl):
    return _mass_matrix(y, start, dvec, Mq, Mc, MT, Jl, True)


@njit(cache=_CACHE)
def bias_vector(y, start, dvec, Mq, Mc, MT, Jl, K, bdamp, Lrest, g):
    n = dvec.shape[0]
    N = start[n]
    q0, w0, l0, ld0, _, _ = _offsets(N, n)
    R = y[6:15].copy().reshape(3, 3)
    Om = y[15:18].copy()
    C = np.zeros(6 + 4 * N)
    # velocity-product part of each segment's acceleration: 2 l_dot q_dot + l omega x q_dot
    beta = np.empty((N, 3))
    for s in range(N):
        qx, qy, qz = y[q0 + 3 * s], y[q0 + 3 * s + 1], y[q0 + 3 * s + 2]
        wx, wy, wz = y[w0 + 3 * s], y[w0 + 3 * s + 1], y[w0 + 3 * s + 2]
        dx = wy * qz - wz * qy
        dy = wz * qx - wx * qz
        dz = wx * qy - wy * qx
        l = y[l0 + s]
        ld2 = 2.0 * y[ld0 + s]
        beta[s, 0] = ld2 * dx + l * (wy * dz - wz * dy)
        beta[s, 1] = ld2 * dy + l * (wz * dx - wx * dz)
        beta[s, 2] = ld2 * dz + l * (wx * dy - wy * dx)
    Jeta = Jl.copy()
    for i in range(n):
        dh = _hat(dvec[i])
        dh2 = _mm(dh, dh)
        for a in range(3):
            for c in range(3):
                Jeta[a, c] -= Mq[i] * dh2[a, c]
    C[2] = -MT * g
    C[3:6] = _cross(Om, _mv(Jeta, Om))
    f = np.empty(3)
    tmp = np.empty(3)
    for i in range(n):
        d = dvec[i]
        att = _mv(R, _cross(Om, _cross(Om, d)))  # centripetal part of the attachment acceleration
        gz = _cross(d, R[2, :].copy())    # hat(d) R^T e3
        for a in range(3):
            C[a] += Mq[i] * att[a]
            C[3 + a] -= Mq[i] * g * gz[a]
        for b in range(start[i], start[i + 1]):
            for a in range(3):
                tmp[a] = beta[b, 0] * R[0, a] + beta[b, 1] * R[1, a] + beta[b, 2] * R[2, a]
            C[0] -= Mc[b] * beta[b, 0]
            C[1] -= Mc[b] * beta[b, 1]
            C[2] -= Mc[b] * beta[b, 2]
            C[3] -= Mc[b] * (d[1] * tmp[2] - d[2] * tmp[1])
            C[4] -= Mc[b] * (d[2] * tmp[0] - d[0] * tmp[2])
            C[5] -= Mc[b] * (d[0] * tmp[1] - d[1] * tmp[0])
            # acceleration-independent part of the momentum balance of everything above b
            for a in range(3):
                f[a] = Mc[b] * att[a]
            f[2] -= Mc[b] * g
            for c in range(start[i], start[i + 1]):
                Mbc = Mc[min(b, c)]
                for a in range(3):
                    f[a] -= Mbc * beta[c, a]
            qx, qy, qz = y[q0 + 3 * b], y[q0 + 3 * b + 1], y[q0 + 3 * b + 2]
            qf = qx * f[0] + qy * f[1] + qz * f[2]
            lb = y[l0 + b]
            C[6 + 3 * b] = lb * (f[0] - qf * qx)
            C[7 + 3 * b] = lb * (f[1] - qf * qy)
            C[8 + 3 * b] = lb * (f[2] - qf * qz)
            dl = lb - Lrest[b]
            C[6 + 3 * N + b] = -qf + (K[b] * dl + bdamp[b] * y[ld0 + b]) * _gate(dl)
    return C


@njit(cache=_CACHE)
def force_vector(y, start, dvec, F):
    """Generalized forces of external forces ``F[i]`` applied at quadrotor ``i``."""
    n = dvec.shape[0]
    N = start[n]
    dim = 6 + 4 * N
    R = y[6:15].copy().reshape(3, 3)
    q0, _, l0, _, _, _ = _offsets(N, n)
    P = np.zeros(dim)
    for i in range(n):
        Fi = F[i].copy()
        P[0:3] += Fi
        P[3:6] += _cross(dvec[i], _vm(Fi, R))
        for b in range(start[i], start[i + 1]):
            qb = y[q0 + 3 * b:q0 + 3 * b + 3].copy()
            qF = qb[0] * Fi[0] + qb[1] * Fi[1] + qb[2] * Fi[2]
            P[6 + 3 * b:9 + 3 * b] = y[l0 + b] * (Fi - qF * qb)
            P[6 + 3 * N + b] = -qF
    return P


@njit(cache=_CACHE)
def thrust_forces(y, n, N, thrust):
    _, _, _, _, qr0, _ = _offsets(N, n)
    F = np.zeros((n, 3))
    for i in range(n):
        Ri = y[qr0 + 9 * i:qr0 + 9 * i + 9].copy().reshape(3, 3)
        F[i] = -thrust[i] * Ri[:, 2]
    return F


@njit(cache=_CACHE)
def _solve(A, B):
    """Gaussian elimination with partial pivoting; ``A`` and ``B`` are overwritten.

    Returns ``(X, ok)``; ``ok`` is False for an exactly singular pivot.
    """
    n = A.shape[0]
    k = B.shape[1]
    for c in range(n):
        p = c
        best = abs(A[c, c])
        for r in range(c + 1, n):
            v = abs(A[r, c])
            if v > best:
                best = v
                p = r
        if best == 0.0:
            return B, False
        if p != c:
            for j in range(n):
                t = A[c, j]
                A[c, j] = A[p, j]
                A[p, j] = t
            for j in range(k):
                t = B[c, j]
                B[c, j] = B[p, j]
                B[p, j] = t
        inv = 1.0 / A[c, c]
        for r in range(c + 1, n):
            f = A[r, c] * inv
            if f != 0.0:
                for j in range(c + 1, n):
                    A[r, j] -= f * A[c, j]
                for j in range(k):
                    B[r, j] -= f * B[c, j]
    for c in range(n - 1, -1, -1):
        inv = 1.0 / A[c, c]
        for j in range(k):
            acc = B[c, j]
            for r in range(c + 1, n):
                acc -= A[c, r] * B[r, j]
            B[c, j] = acc * inv
    return B, True


@njit(cache=_CACHE)
def accelerations(y, start, dvec, Mq, Mc, MT, Jl, K, bdamp, Lrest, g, thrust, Fext, Pdelta):
    """Solve ``M Xdot = P + P_delta - C``; returns ``(Xdot, ok)``.

    Each cable block is eliminated first; the remaining 6 x 6 Schur
    complement gives the load accelerations.
    """
    n = dvec.shape[0]
    N = start[n]
    q0, _, _, _, _, _ = _offsets(N, n)
    R = y[6:15].copy().reshape(3, 3)
    C = bias_vector(y, start, dvec, Mq, Mc, MT, Jl, K, bdamp, Lrest, g)
    F = thrust_forces(y, n, N, thrust) + Fext
    rhs = force_vector(y, start, dvec, F) + Pdelta - C
    S = _load_block(dvec, Mq, MT, Jl, R)
    r0 = rhs[0:6].copy()
    wmax = 0
    for i in range(n):
        wmax = max(wmax, 4 * (start[i + 1] - start[i]))
    sols = np.empty((n, wmax, 7))
    for i in range(n):
        B, Cb, D = _cable_blocks(y, i, start, dvec, Mc, R, True)
        w = B.shape[1]
        Z = np.empty((w, 7))
        Z[:, 0:6] = Cb
        for k in range(w):
            Z[k, 6] = rhs[_global_index(start, i, N, k)]
        X, solved = _solve(D, Z)
        if not solved:
            return np.full(6 + 4 * N, np.nan), False
        BX = _mm(B, X)
        for a in range(6):
            r0[a] -= BX[a, 6]
            for c in range(6):
                S[a, c] -= BX[a, c]
        sols[i, 0:w] = X
    xs, solved = _solve(S, r0.reshape(6, 1))
    if not solved:
        return np.full(6 + 4 * N, np.nan), False
    x = xs[:, 0].copy()
    out = np.empty(6 + 4 * N)
    out[0:6] = x
    for i in range(n):
        X = sols[i]
        for k in range(4 * (start[i + 1] - start[i])):
            acc = X[k, 6]
            for c in range(6):
                acc -= X[k, c] * x[c]
            out[_global_index(start, i, N, k)] = acc
    ok = True
    for k in range(out.shape[0]):
        if not np.isfinite(out[k]):
            ok = False
    for s in range(N):
        qs = y[q0 + 3 * s:q0 + 3 * s + 3]
        ws = 6 + 3 * s
        dot = out[ws] * qs[0] + out[ws + 1] * qs[1] + out[ws + 2] * qs[2]
        for a in range(3):
            out[ws + a] -= dot * qs[a]
    return out, ok


@njit(cache=_CACHE)
def state_rate(y, start, dvec, Mq, Mc, MT, Jl, K, bdamp, Lrest, g, Jq, Jq_inv,
               thrust, torque, Fext, Pdelta, dT):
    n = dvec.shape[0]
    N = start[n]
    q0, w0, l0, ld0, qr0, qw0 = _offsets(N, n)
    X, ok = accelerations(y, start, dvec, Mq, Mc, MT, Jl, K, bdamp, Lrest, g, thrust, Fext, Pdelta)
    out = np.empty_like(y)
    out[0:3] = y[3:6]
    out[3:6] = X[0:3]
    R = y[6:15].copy().reshape(3, 3)
    Om = y[15:18].copy()
    out[6:15] = _mm(R, _hat(Om)).reshape(9)
    out[15:18] = X[3:6]
    for s in range(N):
        qs = y[q0 + 3 * s:q0 + 3 * s + 3].copy()
        ws = y[w0 + 3 * s:w0 + 3 * s + 3].copy()
        out[q0 + 3 * s:q0 + 3 * s + 3] = _cross(ws, qs)
        out[w0 + 3 * s:w0 + 3 * s + 3] = X[6 + 3 * s:9 + 3 * s]
        out[l0 + s] = y[ld0 + s]
        out[ld0 + s] = X[6 + 3 * N + s]
    for i in range(n):
        Ri = y[qr0 + 9 * i:qr0 + 9 * i + 9].copy().reshape(3, 3)
        Wi = y[qw0 + 3 * i:qw0 + 3 * i + 3].copy()
        out[qr0 + 9 * i:qr0 + 9 * i + 9] = _mm(Ri, _hat(Wi)).reshape(9)
        # rigid-body Euler equation in the body frame
        out[qw0 + 3 * i:qw0 + 3 * i + 3] = _mv(Jq_inv[i], torque[i] + dT[i] - _cross(Wi, _mv(Jq[i], Wi)))
    return out, ok


@njit(cache=_CACHE)
def _polar(M):
    """Orthogonal polar factor of a near-rotation (Newton-Schulz iteration)."""
    X = M.copy()
    for _ in range(8):
        E = _mm(X.T, X)
        err = 0.0
        for a in range(3):
            E[a, a] -= 1.0
            for b in range(3):
                err = max(err, abs(E[a, b]))
        if err < 1e-15:
            break
        # X <- X (3 I - X^T X) / 2 = X (I - E / 2)
        for a in range(3):
            for b in range(3):
                E[a, b] = -0.5 * E[a, b]
            E[a, a] += 1.0
        X = _mm(X, E)
    return X


@njit(cache=_CACHE)
def enforce_constraints(y, n, N):
    """Renormalize q, re-project omega, re-orthonormalize rotations in place.

    Returns the largest pre-enforcement violation (|q| - 1, q . omega, R^T R - I).
    """
    q0, w0, _, _, qr0, _ = _offsets(N, n)
    worst = 0.0
    for s in range(N):
        qs = y[q0 + 3 * s:q0 + 3 * s + 3]
        nq = np.sqrt(qs @ qs)
        worst = max(worst, abs(nq - 1.0))
        qs = qs / nq
        y[q0 + 3 * s:q0 + 3 * s + 3] = qs
        ws = y[w0 + 3 * s:w0 + 3 * s + 3]
        dot = ws @ qs
        worst = max(worst, abs(dot))
        y[w0 + 3 * s:w0 + 3 * s + 3] = ws - dot * qs
    for k in range(n + 1):
        o = 6 if k == 0 else qr0 + 9 * (k - 1)
        Rk = y[o:o + 9].copy().reshape(3, 3)
        E = _mm(Rk.T, Rk)
        for a in range(3):
            E[a, a] -= 1.0
            for b in range(3):
                worst = max(worst, abs(E[a, b]))
        y[o:o + 9] = _polar(Rk).reshape(9)
    return worst


@njit(cache=_CACHE)
def rk4_step(y, dt, start, dvec, Mq, Mc, MT, Jl, K, bdamp, Lrest, g, Jq, Jq_inv,
             thrust, torque, Fext, Pdelta, dT):
    k1, ok1 = state_rate(y, start, dvec, Mq, Mc, MT, Jl, K, bdamp, Lrest, g, Jq, Jq_inv,
                         thrust, torque, Fext, Pdelta, dT)
    k2, ok2 = state_rate(y + 0.5 * dt * k1, start, dvec, Mq, Mc, MT, Jl, K, bdamp, Lrest, g, Jq, Jq_inv,
                         thrust, torque, Fext, Pdelta, dT)
    k3, ok3 = state_rate(y + 0.5 * dt * k2, start, dvec, Mq, Mc, MT, Jl, K, bdamp, Lrest, g, Jq, Jq_inv,
                         thrust, torque, Fext, Pdelta, dT)
    k4, ok4 = state_rate(y + dt * k3, start, dvec, Mq, Mc, MT, Jl, K, bdamp, Lrest, g, Jq, Jq_inv,
                         thrust, torque, Fext, Pdelta, dT)
    out = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    n = dvec.shape[0]
    drift = enforce_constraints(out, n, start[n])
    return out, drift, ok1 and ok2 and ok3 and ok4


@njit(cache=_CACHE)
def quad_kinematics(y, start, dvec):
    """Quadrotor positions and velocities (n x 3 each) from the flat state."""
    n = dvec.shape[0]
    N = start[n]
    q0, w0, l0, ld0, _, _ = _offsets(N, n)
    r = y[0:3].copy()
    v = y[3:6].copy()
    R = y[6:15].copy().reshape(3, 3)
    Om = y[15:18].copy()
    pos = np.zeros((n, 3))
    vel = np.zeros((n, 3))
    for i in range(n):
        pos[i] = r + R @ dvec[i]
        vel[i] = v + R @ _cross(Om, dvec[i])
        for s in range(start[i], start[i + 1]):
            qs = y[q0 + 3 * s:q0 + 3 * s + 3].copy()
            ws = y[w0 + 3 * s:w0 + 3 * s + 3].copy()
            pos[i] -= y[l0 + s] * qs
            vel[i] -= y[ld0 + s] * qs + y[l0 + s] * _cross(ws, qs)
    return pos, vel


@njit(cache=_CACHE)
def advance(y, dt, steps, start, dvec, Mq, Mc, MT, Jl, K, bdamp, Lrest, g, Jq, Jq_inv,
            thrust, torque, Fext, Pdelta, dT):
    """``steps`` RK4 steps with fixed inputs; returns (state, worst drift, ok, steps completed)."""
    worst = 0.0
    for s in range(steps):
        y, drift, ok = rk4_step(y, dt, start, dvec, Mq, Mc, MT, Jl, K, bdamp, Lrest, g, Jq, Jq_inv,
                                thrust, torque, Fext, Pdelta, dT)
        worst = max(worst, drift)
        if not ok:
            return y, worst, False, s
        for a in range(y.shape[0]):
            if not np.isfinite(y[a]):
                return y, worst, False, s
    return y, worst, True, steps


@njit(cache=_CACHE)
def energy(y, start, dvec, mquad, mseg, ml, Jl, Jq, K, Lrest, g):
    """Kinetic and potential energy ``(T, V)`` of the whole system."""
    n = dvec.shape[0]
    N = start[n]
    q0, w0, l0, ld0, _, qw0 = _offsets(N, n)
    r = y[0:3].copy()
    v = y[3:6].copy()
    R = y[6:15].copy().reshape(3, 3)
    Om = y[15:18].copy()
    T = 0.5 * ml * (v @ v) + 0.5 * (Om @ _mv(Jl, Om))
    V = -g * ml * r[2]
    for i in range(n):
        base = r + _mv(R, dvec[i])
        vbase = v + _mv(R, _cross(Om, dvec[i]))
        acc = np.zeros(3)
        vacc = np.zeros(3)
        for s in range(start[i + 1] - 1, start[i] - 1, -1):
            # point mass s sits below segments s+1 .. end of this cable
            p = base - acc
            pv = vbase - vacc
            T += 0.5 * mseg[s] * (pv @ pv)
            V -= g * mseg[s] * p[2]
            qs = y[q0 + 3 * s:q0 + 3 * s + 3].copy()
            ws = y[w0 + 3 * s:w0 + 3 * s + 3].copy()
            acc += y[l0 + s] * qs
            vacc += y[ld0 + s] * qs + y[l0 + s] * _cross(ws, qs)
            dl = y[l0 + s] - Lrest[s]
            if dl > 0.0:
                V += 0.5 * K[s] * dl * dl
        p = base - acc
        pv = vbase - vacc
        T += 0.5 * mquad[i] * (pv @ pv)
        V -= g * mquad[i] * p[2]
        Wi = y[qw0 + 3 * i:qw0 + 3 * i + 3].copy()
        T += 0.5 * (Wi @ _mv(Jq[i], Wi))
    return T, V
