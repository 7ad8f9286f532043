"""Deliberate fault injection used to prove that the verification suite bites.

Only the acceptance harness toggles these; production code paths consult
:func:`active` at the single place each fault applies.
"""
from __future__ import annotations

import contextlib

KNOWN = frozenset({"christoffel_sign", "lie_transport_sign", "geodesic_force_sign"})
_active: set[str] = set()


def active(name: str) -> bool:
    return name in _active


@contextlib.contextmanager
def inject(*names: str):
    unknown = set(names) - KNOWN
    if unknown:
        raise KeyError(f"unknown fault(s): {sorted(unknown)}")
    added = set(names) - _active
    _active.update(added)
    try:
        yield
    finally:
        _active.difference_update(added)
