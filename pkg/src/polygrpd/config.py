"""Size caps and the error types shared by every module."""

from __future__ import annotations

import contextvars
from contextlib import contextmanager
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Caps:
    objects: int = 5000
    sections: int = 10**6
    group_order: int = 64


_caps = contextvars.ContextVar("polygrpd_caps", default=Caps())


class SizeCapExceeded(RuntimeError):
    """A construction would exceed a configured size cap."""

    def __init__(self, kind, size, limit):
        super().__init__(f"{kind} cap exceeded: {size} > {limit}")
        self.kind = kind
        self.size = size
        self.limit = limit


class ParseError(ValueError):
    """Malformed input file or structure."""


def get_caps() -> Caps:
    return _caps.get()


@contextmanager
def size_caps(**overrides):
    """Temporarily override caps, e.g. ``with size_caps(objects=100): ...``."""
    token = _caps.set(replace(_caps.get(), **overrides))
    try:
        yield _caps.get()
    finally:
        _caps.reset(token)


def check_cap(kind: str, size: int) -> None:
    limit = getattr(_caps.get(), kind)
    if size > limit:
        raise SizeCapExceeded(kind, size, limit)
