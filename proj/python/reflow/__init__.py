"""Python front of the reflow layout engine."""

import json

from ._reflow import (
    BundleError,
    RangeError,
    Session,
    SpecError,
    __version__,
    benchmark_spec,
    build,
    compile_counts,
    validate,
)


def load_session(bundle_path, backend="local"):
    with open(bundle_path, encoding="utf-8") as f:
        return Session(f.read(), backend)


def summary(session):
    return json.loads(session.summary())


__all__ = [
    "BundleError",
    "RangeError",
    "Session",
    "SpecError",
    "__version__",
    "benchmark_spec",
    "build",
    "compile_counts",
    "load_session",
    "summary",
    "validate",
]
