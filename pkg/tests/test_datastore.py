import pytest

from simbridge.datastore import Datastore, camera_stub_frame
from simbridge.errors import DatastoreError


class TestValues:
    def test_put_get_roundtrip(self):
        ds = Datastore()
        ds.put("servo.gains.a/j1", {"kp": 100.0, "kd": 10.0}, "gains")
        assert ds.get("servo.gains.a/j1") == {"kp": 100.0, "kd": 10.0}
        assert ds.get("servo.gains.a/j1", "gains") == {"kp": 100.0, "kd": 10.0}

    def test_get_missing_key(self):
        with pytest.raises(DatastoreError, match="missing key"):
            Datastore().get("nope")

    def test_type_mismatch_names_both_types(self):
        ds = Datastore()
        ds.put("demo.flag", True, "bool")
        with pytest.raises(DatastoreError) as e:
            ds.get("demo.flag", "gains")
        assert "bool" in str(e.value) and "gains" in str(e.value)

    def test_overwrite_same_type_ok_different_type_rejected(self):
        ds = Datastore()
        ds.put("demo.count", 1, "int")
        ds.put("demo.count", 2, "int")
        assert ds.get("demo.count") == 2
        with pytest.raises(DatastoreError, match="refusing overwrite"):
            ds.put("demo.count", "x", "str")

    def test_remove(self):
        ds = Datastore()
        ds.put("demo.x", 1, "int")
        ds.remove("demo.x")
        assert not ds.has("demo.x")
        with pytest.raises(DatastoreError):
            ds.remove("demo.x")

    def test_keys_independent(self):
        ds = Datastore()
        ds.put("a", 1, "int")
        ds.put("b", 2, "int")
        ds.remove("a")
        assert ds.get("b") == 2

    def test_invalid_keys_rejected(self):
        ds = Datastore()
        with pytest.raises(DatastoreError):
            ds.put("", 1, "int")
        with pytest.raises(DatastoreError):
            ds.put("has space", 1, "int")


class TestCallables:
    def test_call_invokes_synchronously(self):
        ds = Datastore()
        seen = []
        ds.register("servo.set_gains", lambda j, kp, kd: seen.append((j, kp, kd)),
                    "fn(joint, kp, kd)")
        ds.call("servo.set_gains", "a/j1", 200.0, 20.0)
        assert seen == [("a/j1", 200.0, 20.0)]

    def test_calling_a_value_entry_fails(self):
        ds = Datastore()
        ds.put("demo.x", 1, "int")
        with pytest.raises(DatastoreError, match="not callable"):
            ds.call("demo.x")

    def test_call_missing_key(self):
        with pytest.raises(DatastoreError, match="missing key"):
            Datastore().call("servo.set_gains")

    def test_camera_stub_returns_fixed_descriptor(self):
        ds = Datastore()
        ds.register("camera.frame", camera_stub_frame, "fn(camera)")
        frame = ds.call("camera.frame", "head")
        assert frame["channels"] == 3 and frame["format"] == "stub"

    def test_callable_may_mutate_store_explicitly(self):
        ds = Datastore()
        ds.register("demo.set", lambda v: ds.put("demo.value", v, "int"), "fn(v)")
        ds.call("demo.set", 5)
        assert ds.get("demo.value") == 5
