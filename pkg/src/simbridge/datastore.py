"""Typed key-value blackboard shared between the bridge and the controller.

Entries are either plain values or callables; both carry a type tag fixed
at insertion. Overwrites with a different tag are rejected. Reserved
namespaces: "servo.*" (gain get/set), "camera.*" (stub channel),
"demo.*" (scenario flags).

All access happens on the bridge's control context; external clients
reach the store only through enqueued commands.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from .errors import DatastoreError


@dataclass(frozen=True)
class Entry:
    type_tag: str
    payload: Any = None
    fn: Callable | None = None

    @property
    def is_callable(self) -> bool:
        return self.fn is not None


class Datastore:
    def __init__(self):
        self._entries: dict[str, Entry] = {}

    def _check_key(self, key: str):
        if not key or any(c.isspace() for c in key):
            raise DatastoreError(f"invalid key {key!r}")

    def put(self, key: str, payload: Any, type_tag: str) -> None:
        self._check_key(key)
        existing = self._entries.get(key)
        if existing is not None and existing.type_tag != type_tag:
            raise DatastoreError(
                f"key '{key}' holds type '{existing.type_tag}', refusing overwrite with '{type_tag}'")
        self._entries[key] = Entry(type_tag=type_tag, payload=payload)

    def register(self, key: str, fn: Callable, signature: str) -> None:
        """Store a callable entry; signature is its declared type tag."""
        self._check_key(key)
        existing = self._entries.get(key)
        if existing is not None and existing.type_tag != signature:
            raise DatastoreError(
                f"key '{key}' holds type '{existing.type_tag}', refusing overwrite with '{signature}'")
        self._entries[key] = Entry(type_tag=signature, fn=fn)

    def get(self, key: str, expected: str | None = None) -> Any:
        entry = self._entries.get(key)
        if entry is None:
            raise DatastoreError(f"missing key '{key}'")
        if expected is not None and entry.type_tag != expected:
            raise DatastoreError(
                f"key '{key}': expected type '{expected}', stored type is '{entry.type_tag}'")
        return entry.fn if entry.is_callable else entry.payload

    def call(self, key: str, *args, **kwargs) -> Any:
        entry = self._entries.get(key)
        if entry is None:
            raise DatastoreError(f"missing key '{key}'")
        if not entry.is_callable:
            raise DatastoreError(f"key '{key}' is a value entry, not callable")
        return entry.fn(*args, **kwargs)

    def remove(self, key: str) -> None:
        if key not in self._entries:
            raise DatastoreError(f"missing key '{key}'")
        del self._entries[key]

    def has(self, key: str) -> bool:
        return key in self._entries

    def keys(self) -> list[str]:
        return sorted(self._entries)


def camera_stub_frame(camera: str) -> dict:
    """Placeholder for the camera callback: a fixed frame descriptor."""
    return {"camera": camera, "width": 640, "height": 480, "channels": 3,
            "format": "stub"}
