import pytest

from simbridge.model import (ActuatorSpec, ControlBounds, JointBounds,
                             JointSpec, ObjectSpec, RobotDescription,
                             SensorSpec, ServoGains, merge_scene)
from simbridge.physics import CompiledScene, PhysicsState


def make_joint(name="j1", **kw):
    defaults = dict(inertia=1.0, pos_limits=(-100.0, 100.0), vel_limit=1000.0,
                    torque_limit=1000.0)
    defaults.update(kw)
    return JointSpec(name=name, **defaults)


def make_robot(joints, actuators=None, sensors=(), posture=None, name="bot"):
    if actuators is None:
        actuators = tuple(ActuatorSpec(joint=j.name, kind="pd_servo")
                          for j in joints)
    return RobotDescription(name=name, joints=tuple(joints),
                            actuators=tuple(actuators), sensors=tuple(sensors),
                            default_posture=posture or {})


def bounds_from_limits(desc):
    return ControlBounds(joints={
        j.name: JointBounds(pos=j.pos_limits, vel=j.vel_limit, torque=j.torque_limit)
        for j in desc.joints
    })


def one_joint_state(dt=0.001, instance="a", objects=None, **joint_kw):
    """Fresh PhysicsState over a single-joint scene; joint is 'a/j1'."""
    desc = make_robot([make_joint(**joint_kw)])
    scene = merge_scene([(instance, desc, bounds_from_limits(desc))],
                        objects or [])
    return PhysicsState(CompiledScene(scene), dt)


@pytest.fixture
def grasp_doc():
    from simbridge.demo import grasp_scenario_document
    return grasp_scenario_document()
