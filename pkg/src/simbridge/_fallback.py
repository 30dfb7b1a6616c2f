"""Pure-Python (numpy) lane of the per-joint dynamics step.

Kept arithmetically identical to the compiled kernel in _kernels.pyx:
same operations, same order. The benchmark and the parity test hold the
two lanes against each other.
"""

import numpy as np


def step_joints(q, qd, applied, u_motor, ext, dt,
                inertia_eff, damping, coulomb, stiction, gravity_amp,
                gear, torque_limit, pos_min, pos_max, v_eps):
    u = np.minimum(np.maximum(gear * u_motor, -torque_limit), torque_limit)
    applied[:] = u
    tau_nd = u + ext - gravity_amp * np.sin(q)
    tau_drive = tau_nd - damping * qd
    latched = (np.abs(qd) < v_eps) & (np.abs(tau_drive) <= stiction)

    s = np.sign(qd)
    c2 = 0.5 * dt * damping / inertia_eff
    qd_nc = ((1.0 - c2) * qd + dt * tau_nd / inertia_eff) / (1.0 + c2)
    fr = dt * (coulomb * s) / (inertia_eff * (1.0 + c2))
    qd_new = qd_nc - fr
    # Coulomb friction may slow the joint but never reverse it.
    flipped = (s != 0.0) & (qd_new * qd < 0.0) & (qd_nc * qd >= 0.0)
    qd_new = np.where(flipped, 0.0, qd_new)
    qd_new = np.where(latched, 0.0, qd_new)

    q_new = q + dt * qd_new
    below = q_new < pos_min
    above = q_new > pos_max
    q_new = np.minimum(np.maximum(q_new, pos_min), pos_max)
    qd_new = np.where(below | above, 0.0, qd_new)

    q[:] = q_new
    qd[:] = qd_new
