# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-joint dynamics step.

Must stay arithmetically identical to simbridge._fallback.step_joints:
same operations in the same order, so both lanes produce bit-equal
trajectories.
"""

from libc.math cimport sin, fabs


def step_joints(double[::1] q, double[::1] qd, double[::1] applied,
                double[::1] u_motor, double[::1] ext, double dt,
                double[::1] inertia_eff, double[::1] damping,
                double[::1] coulomb, double[::1] stiction,
                double[::1] gravity_amp, double[::1] gear,
                double[::1] torque_limit, double[::1] pos_min,
                double[::1] pos_max, double v_eps):
    cdef Py_ssize_t i, n = q.shape[0]
    cdef double u, tau_nd, tau_drive, c2, s, qd_nc, fr, qd_new, q_new
    for i in range(n):
        u = gear[i] * u_motor[i]
        if u > torque_limit[i]:
            u = torque_limit[i]
        elif u < -torque_limit[i]:
            u = -torque_limit[i]
        applied[i] = u
        tau_nd = u + ext[i] - gravity_amp[i] * sin(q[i])
        tau_drive = tau_nd - damping[i] * qd[i]
        if fabs(qd[i]) < v_eps and fabs(tau_drive) <= stiction[i]:
            qd_new = 0.0
        else:
            s = 0.0
            if qd[i] > 0.0:
                s = 1.0
            elif qd[i] < 0.0:
                s = -1.0
            c2 = 0.5 * dt * damping[i] / inertia_eff[i]
            qd_nc = ((1.0 - c2) * qd[i] + dt * tau_nd / inertia_eff[i]) / (1.0 + c2)
            fr = dt * (coulomb[i] * s) / (inertia_eff[i] * (1.0 + c2))
            qd_new = qd_nc - fr
            # Coulomb friction may slow the joint but never reverse it.
            if s != 0.0 and qd_new * qd[i] < 0.0 and qd_nc * qd[i] >= 0.0:
                qd_new = 0.0
        q_new = q[i] + dt * qd_new
        if q_new < pos_min[i]:
            q_new = pos_min[i]
            qd_new = 0.0
        elif q_new > pos_max[i]:
            q_new = pos_max[i]
            qd_new = 0.0
        q[i] = q_new
        qd[i] = qd_new
