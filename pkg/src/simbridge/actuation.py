"""Motor command computation and controller-rate reference upsampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ActuatorSpec, ServoGains


@dataclass(frozen=True)
class ReferenceSample:
    q_ref: float = 0.0
    qd_ref: float = 0.0


def pd_torque(gains: ServoGains, ref: ReferenceSample, q: float, qd: float) -> float:
    """Motor-side torque from the PD servo loop."""
    return gains.kp * (ref.q_ref - q) + gains.kd * (ref.qd_ref - qd)


def position_torque(kp: float, q_ref: float, q: float) -> float:
    return kp * (q_ref - q)


def velocity_torque(kd: float, qd_ref: float, qd: float) -> float:
    return kd * (qd_ref - qd)


@dataclass(frozen=True)
class RefInterpolator:
    """Linear blend between consecutive controller-tick references.

    K is the substep count per controller tick (dt_ctrl / dt_sim,
    an exact integer). mode "hold" keeps the newest reference for all
    substeps (zero-order hold) for A/B comparison against "linear".
    """
    prev: ReferenceSample
    next: ReferenceSample
    K: int
    mode: str = "linear"

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"substep count K must be >= 1, got {self.K}")
        if self.mode not in ("linear", "hold"):
            raise ValueError(f"unknown interpolation mode '{self.mode}'")

    def sample(self, k: int) -> ReferenceSample:
        if not 1 <= k <= self.K:
            raise ValueError(f"substep index {k} out of range 1..{self.K}")
        if self.mode == "hold" or k == self.K:
            # k=K returns next bit-exactly; prev + 1.0*(next-prev) would not.
            return self.next
        a = k / self.K
        return ReferenceSample(
            q_ref=self.prev.q_ref + a * (self.next.q_ref - self.prev.q_ref),
            qd_ref=self.prev.qd_ref + a * (self.next.qd_ref - self.prev.qd_ref),
        )


def interpolate(itp: RefInterpolator, k: int) -> ReferenceSample:
    return itp.sample(k)


def interpolate_arrays(prev_q, prev_qd, next_q, next_qd, k: int, K: int,
                       mode: str = "linear"):
    """Vectorized RefInterpolator.sample over scene joint arrays."""
    if mode == "hold" or k == K:
        return next_q, next_qd
    a = k / K
    return prev_q + a * (next_q - prev_q), prev_qd + a * (next_qd - prev_qd)


def command_for(actuator: ActuatorSpec, gains: ServoGains,
                ref: ReferenceSample, q: float, qd: float) -> float | None:
    """Motor torque for one actuator, or None for a passive joint.

    direct_torque reinterprets the reference: q_ref carries the motor
    torque to pass through.
    """
    kind = actuator.kind
    if kind == "none":
        return None
    if kind == "pd_servo":
        return pd_torque(gains, ref, q, qd)
    if kind == "position":
        return position_torque(gains.kp, ref.q_ref, q)
    if kind == "velocity":
        return velocity_torque(gains.kd, ref.qd_ref, qd)
    if kind == "direct_torque":
        return ref.q_ref
    raise ValueError(f"unknown actuator kind '{kind}'")


def commands_array(kind_codes, kp, kd, q_ref, qd_ref, q, qd):
    """Vectorized command_for over scene joint arrays.

    kind_codes: int array, 0=none 1=direct_torque 2=position 3=velocity
    4=pd_servo. Passive joints produce zero motor torque.
    """
    pos_term = kp * (q_ref - q)
    vel_term = kd * (qd_ref - qd)
    u = np.zeros_like(q)
    u = np.where(kind_codes == 4, pos_term + vel_term, u)
    u = np.where(kind_codes == 2, pos_term, u)
    u = np.where(kind_codes == 3, vel_term, u)
    u = np.where(kind_codes == 1, q_ref, u)
    return u


ACTUATOR_KIND_CODES = {
    "none": 0, "direct_torque": 1, "position": 2, "velocity": 3, "pd_servo": 4,
}
