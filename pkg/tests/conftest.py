from __future__ import annotations

from functools import lru_cache

import pytest

from exactq import (
    build_equality,
    build_exact_k,
    build_exact_kl,
    build_general_unbalance,
    build_unb,
    build_unbr,
    build_uw_step,
    verify_exactness,
)

_BUILDERS = {
    "unb": build_unb,
    "unbr": build_unbr,
    "equality": build_equality,
    "exact": build_exact_k,
    "exactkl": build_exact_kl,
    "general": build_general_unbalance,
    "uw": build_uw_step,
}


@lru_cache(maxsize=None)
def _verified(family: str, *args: int):
    plan = _BUILDERS[family](*args)
    return verify_exactness(plan)


@pytest.fixture(scope="session")
def verified():
    """Cached exhaustive verification, shared across test modules."""
    return _verified
