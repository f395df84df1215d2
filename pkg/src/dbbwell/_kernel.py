"""Fused integration loop for coupled runs, compiled with numba.

This mirrors the reference path in `simulation._run_reference` sub-step for
sub-step and, as far as practical, float-op for float-op; the equivalence is
pinned by tests. Keep the two in sync when touching either.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STATUS_COLLAPSED = 0
STATUS_NO_DETECTION = 1   # assigned by the caller, never by the kernel
STATUS_ABSORBED = 2
STATUS_TIMEOUT = 3


@njit(cache=True, nogil=True)
def run_coupled(
    re, im, im_prev,                 # float64[M], mutated in place
    dx, dt, mass, half_width,
    det_lo, det_hi,                  # int64[D], window node ranges [lo, hi)
    det_xlo, det_xhi,                # float64[D], physical window edges
    lam, ndof, mu, u2k,              # float64[D]
    outside_value,                   # float64, 0.0 or -1.0
    edge_eps,                        # window-edge membership guard
    r0, threshold,
    max_steps, record_every, snapshot_every,
    node_eps_rel,
    y, y_dot,                        # float64[D], mutated in place
    rec_step, rec_r, rec_y, rec_p,   # output buffers
    snap_step, snap_rho,
):
    M = re.shape[0]
    D = det_lo.shape[0]
    vdet = np.zeros(M)
    rho = np.empty(M)
    inv2mdx2 = 1.0 / (2.0 * mass * dx * dx)
    two_dx = 2.0 * dx
    L = half_width
    ov = outside_value

    r = r0
    vel_last = 0.0
    n_rec = 0
    n_snap = 0
    vdet_max = 0.0

    # state at step 0
    norm0 = 0.0
    for j in range(M):
        rho[j] = re[j] * re[j] + im[j] * im_prev[j]
        norm0 += rho[j]
    norm0 *= dx
    norm_now = norm0
    max_drift = 0.0

    # record + collapse check at step 0
    rec_step[n_rec] = 0
    rec_r[n_rec] = r
    for i in range(D):
        rec_y[n_rec, i] = y[i]
        p = 0.0
        for j in range(det_lo[i], det_hi[i]):
            if rho[j] > 0.0:
                p += rho[j]
        p *= dx
        rec_p[n_rec, i] = p
    n_rec += 1
    if snapshot_every > 0:
        snap_step[n_snap] = 0
        for j in range(M):
            snap_rho[n_snap, j] = rho[j]
        n_snap += 1
    for i in range(D):
        if rec_p[0, i] >= threshold:
            return (STATUS_COLLAPSED, i, 0, r, vel_last, n_rec, n_snap,
                    norm0, norm_now, max_drift, vdet_max)

    status = STATUS_TIMEOUT
    det_idx = -1
    end_step = max_steps

    for step in range(1, max_steps + 1):
        # (1) refresh the detector potential from the current pointers
        for j in range(M):
            vdet[j] = 0.0
        for i in range(D):
            amp = lam[i] * ndof[i] * y[i]
            if ov == 0.0:
                for j in range(det_lo[i], det_hi[i]):
                    vdet[j] -= amp
            else:
                for j in range(M):
                    vdet[j] -= amp * ov
                for j in range(det_lo[i], det_hi[i]):
                    vdet[j] -= amp * (1.0 - ov)
        for j in range(M):
            av = abs(vdet[j])
            if av > vdet_max:
                vdet_max = av

        # (2) staggered step: re with H[im], then im with H[new re]
        prev = 0.0
        for j in range(M):
            nxt = im[j + 1] if j + 1 < M else 0.0
            h = -(nxt - 2.0 * im[j] + prev) * inv2mdx2 + vdet[j] * im[j]
            prev = im[j]
            re[j] += dt * h
        for j in range(M):
            im_prev[j] = im[j]
        prev = 0.0
        for j in range(M):
            nxt = re[j + 1] if j + 1 < M else 0.0
            h = -(nxt - 2.0 * re[j] + prev) * inv2mdx2 + vdet[j] * re[j]
            prev = re[j]
            im[j] -= dt * h

        rho_max = 0.0
        norm_now = 0.0
        for j in range(M):
            rho[j] = re[j] * re[j] + im[j] * im_prev[j]
            norm_now += rho[j]
            if rho[j] > rho_max:
                rho_max = rho[j]
        norm_now *= dx
        drift = abs(norm_now - norm0)
        if drift > max_drift:
            max_drift = drift

        # (3) guidance step with wall-ghost interpolation of J and rho
        u = (r + L) / dx
        i0 = int(np.floor(u))
        frac = u - i0
        if i0 < 0:
            i0 = 0
            frac = 0.0
        if i0 > M:
            i0 = M
            frac = 1.0
        rho_lo = rho[i0 - 1] if i0 >= 1 else 0.0
        rho_hi = rho[i0] if i0 < M else 0.0
        j_lo = 0.0
        j_hi = 0.0
        for kk in range(2):
            node = i0 - 1 + kk
            if node < 0 or node >= M:
                continue
            re_m = re[node - 1] if node - 1 >= 0 else 0.0
            re_p = re[node + 1] if node + 1 < M else 0.0
            ia_m = 0.5 * (im[node - 1] + im_prev[node - 1]) if node - 1 >= 0 else 0.0
            ia_p = 0.5 * (im[node + 1] + im_prev[node + 1]) if node + 1 < M else 0.0
            ia_c = 0.5 * (im[node] + im_prev[node])
            d_ia = (ia_p - ia_m) / two_dx
            d_re = (re_p - re_m) / two_dx
            val = (re[node] * d_ia - ia_c * d_re) / mass
            if kk == 0:
                j_lo = val
            else:
                j_hi = val
        rho_r = (1.0 - frac) * rho_lo + frac * rho_hi
        cur_r = (1.0 - frac) * j_lo + frac * j_hi
        if rho_r < node_eps_rel * rho_max:
            vel = vel_last
        else:
            vel = cur_r / rho_r
        vel_last = vel
        r = r + dt * vel
        if r > L - dx or r < -L + dx:
            side = 1 if r > 0.0 else -1
            r = L if side == 1 else -L
            status = STATUS_ABSORBED
            det_idx = side
            end_step = step
            break

        # (4) pointers see the updated realization
        for i in range(D):
            w = 1.0 if (det_xlo[i] - edge_eps <= r and r < det_xhi[i] - edge_eps) else 0.0
            if ov != 0.0 and w == 0.0:
                w = ov
            force = lam[i] * w - u2k[i] * y[i] / ndof[i]
            y_dot[i] += dt * force / mu[i]
            y[i] += dt * y_dot[i]

        # (5) collapse check, lowest index wins
        collapsed = -1
        for i in range(D):
            p = 0.0
            for j in range(det_lo[i], det_hi[i]):
                if rho[j] > 0.0:
                    p += rho[j]
            p *= dx
            if p >= threshold and collapsed < 0:
                collapsed = i

        # (6) record if due
        terminal = collapsed >= 0 or step == max_steps
        if step % record_every == 0 or terminal:
            rec_step[n_rec] = step
            rec_r[n_rec] = r
            for i in range(D):
                rec_y[n_rec, i] = y[i]
                p = 0.0
                for j in range(det_lo[i], det_hi[i]):
                    if rho[j] > 0.0:
                        p += rho[j]
                p *= dx
                rec_p[n_rec, i] = p
            n_rec += 1
        if snapshot_every > 0 and (step % snapshot_every == 0 or terminal):
            snap_step[n_snap] = step
            for j in range(M):
                snap_rho[n_snap, j] = rho[j]
            n_snap += 1

        if collapsed >= 0:
            status = STATUS_COLLAPSED
            det_idx = collapsed
            end_step = step
            break

    if status == STATUS_ABSORBED:
        # terminal record for the absorption step (pointers kept pre-step)
        rec_step[n_rec] = end_step
        rec_r[n_rec] = r
        for i in range(D):
            rec_y[n_rec, i] = y[i]
            p = 0.0
            for j in range(det_lo[i], det_hi[i]):
                if rho[j] > 0.0:
                    p += rho[j]
            p *= dx
            rec_p[n_rec, i] = p
        n_rec += 1
        if snapshot_every > 0:
            snap_step[n_snap] = end_step
            for j in range(M):
                snap_rho[n_snap, j] = rho[j]
            n_snap += 1

    return (status, det_idx, end_step, r, vel_last, n_rec, n_snap,
            norm0, norm_now, max_drift, vdet_max)


def record_capacity(max_steps: int, every: int) -> int:
    # step 0 + stride records + possibly one extra terminal row
    return max_steps // every + 3
