"""Compiler from symmetric boolean functions to weight-elimination plans.

A symmetric function is given by its value vector a, indexed by Hamming
weight. The compiler pads the instance so that testable weight pairs appear,
then sweeps the center eliminating one candidate weight (or one variable
pair) per query until the answer is forced or a single candidate remains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .algorithms import _hadamard_test_step, _uw_test_step, build_exact_k
from .errors import InconsistentSpec
from .plans import Call, Output, Plan, PlanNode, const, drop_wires, identity_wires

TWO_SIDED = "two-sided-center-sweep"
OUTWARD = "outward-pair-sweep"
STRATEGIES = (TWO_SIDED, OUTWARD)


@dataclass(frozen=True)
class SymSpec:
    """Value vector `a` (one char per weight), optional radius `g`, strategy.

    All weights with a-value 1 must lie within g of n/2; g=None derives the
    smallest valid radius.
    """

    a: str
    g: int | None = None
    strategy: str = TWO_SIDED


def _min_radius(a: str) -> int:
    n = len(a) - 1
    return max((abs(2 * w - n) + 1) // 2 for w, c in enumerate(a) if c == "1") if "1" in a else 0


def sym_claimed_queries(spec: SymSpec) -> int:
    n = len(spec.a) - 1
    g = spec.g if spec.g is not None else _min_radius(spec.a)
    half = (n + 1) // 2
    return half + 7 * g + 1 if spec.strategy == TWO_SIDED else half + 5 * g


def _avec_truth(avec: tuple[str, ...]) -> Callable[[tuple[int, ...]], int]:
    def truth(bits: tuple[int, ...]) -> int:
        return 1 if avec[sum(bits)] == "1" else 0
    return truth


def _star(avec: tuple[str, ...], w: int) -> tuple[str, ...]:
    return avec[:w] + ("*",) + avec[w + 1:]


def _max_claim(node: PlanNode) -> int:
    return node.plan.claimed_queries if isinstance(node, Call) else 0


def _leaf_plan(avec: tuple[str, ...], root: PlanNode, claimed: int, strategy: str) -> Plan:
    n_cur = len(avec) - 1
    return Plan(
        family="sym", n=n_cur,
        params=(("a", "".join(avec)), ("strategy", strategy)),
        root=root, claimed_queries=claimed, truth=_avec_truth(avec),
    )


def _early_exit(avec: tuple[str, ...], strategy: str) -> Plan | None:
    ones = [w for w, c in enumerate(avec) if c == "1"]
    n_cur = len(avec) - 1
    if not ones:
        return _leaf_plan(avec, Output(0), 0, strategy)
    if "0" not in avec:
        return _leaf_plan(avec, Output(1), 0, strategy)
    if len(ones) == 1:
        sub = build_exact_k(n_cur, ones[0])
        root = Call(sub, identity_wires(n_cur))
        return _leaf_plan(avec, root, sub.claimed_queries, strategy)
    return None


def _build_two_sided(
    avec: tuple[str, ...], m2: int, g: int, memo: dict,
) -> Plan:
    key = (avec, m2)
    if key in memo:
        return memo[key]
    exit_plan = _early_exit(avec, TWO_SIDED)
    if exit_plan is not None:
        memo[key] = exit_plan
        return exit_plan

    n_cur = len(avec) - 1
    testable = [w for w, c in enumerate(avec)
                if c == "1" and 2 * w < n_cur and avec[n_cur - w] == "1"]
    if testable:
        lo = min(testable)
        hi = n_cur - lo
        d = n_cur - 2 * lo
        dropped = _build_two_sided(avec[1:-1], m2, g, memo)
        ruled_out_high = _build_two_sided(_star(avec, hi), m2, g, memo)
        ruled_out_low = _build_two_sided(_star(avec, lo), m2, g, memo)
        root: PlanNode = _hadamard_test_step(
            n_cur, d,
            pair_child=lambda i, j: Call(dropped, drop_wires(n_cur, (i, j))),
            s0_child=Call(ruled_out_high, identity_wires(n_cur)),
            s1_child=Call(ruled_out_low, identity_wires(n_cur)),
        )
        claimed = 1 + max(dropped.claimed_queries, ruled_out_high.claimed_queries,
                          ruled_out_low.claimed_queries)
    else:
        if m2 > 4 * g:
            raise InconsistentSpec(
                f"center sweep exhausted with candidates {avec!r} left; "
                f"the radius g={g} does not cover this value vector")
        padded = _build_two_sided(avec + ("0",), m2 + 1, g, memo)
        root = Call(padded, identity_wires(n_cur) + (const(0),))
        claimed = padded.claimed_queries

    plan = _leaf_plan(avec, root, claimed, TWO_SIDED)
    memo[key] = plan
    return plan


def _build_outward(
    avec: tuple[str, ...], budget: int, memo: dict,
) -> Plan:
    if avec in memo:
        return memo[avec]
    exit_plan = _early_exit(avec, OUTWARD)
    if exit_plan is not None:
        memo[avec] = exit_plan
        return exit_plan

    n_cur = len(avec) - 1
    ones = [w for w, c in enumerate(avec) if c == "1"]
    below = [w for w in ones if 2 * w < n_cur]
    above = [w for w in ones if 2 * w > n_cur]
    if below and above:
        lo, hi = min(below), max(above)
        u, w = n_cur - 2 * lo, 2 * hi - n_cur
        dropped = _build_outward(avec[1:-1], budget, memo)
        ruled_out_low = _build_outward(_star(avec, lo), budget, memo)
        ruled_out_high = _build_outward(_star(avec, hi), budget, memo)
        root: PlanNode = _uw_test_step(
            n_cur, u, w,
            pair_child=lambda i, j: Call(dropped, drop_wires(n_cur, (i, j))),
            s0_child=Call(ruled_out_low, identity_wires(n_cur)),
            s1_child=Call(ruled_out_high, identity_wires(n_cur)),
        )
        claimed = 1 + max(dropped.claimed_queries, ruled_out_low.claimed_queries,
                          ruled_out_high.claimed_queries)
    else:
        if len(avec) > budget:
            raise InconsistentSpec(
                f"padding budget exhausted with candidates {avec!r} left")
        if max(ones) * 2 <= n_cur:
            padded = _build_outward(("0",) + avec, budget, memo)
            root = Call(padded, identity_wires(n_cur) + (const(1),))
        else:
            padded = _build_outward(avec + ("0",), budget, memo)
            root = Call(padded, identity_wires(n_cur) + (const(0),))
        claimed = padded.claimed_queries

    plan = _leaf_plan(avec, root, claimed, OUTWARD)
    memo[avec] = plan
    return plan


def build_sym(spec: SymSpec) -> Plan:
    """Compile a symmetric function to a plan under the chosen strategy."""
    if not spec.a or any(c not in "01" for c in spec.a):
        raise ValueError(f"value vector must be a nonempty 0/1 string, got {spec.a!r}")
    if spec.strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {spec.strategy!r}; choose from {STRATEGIES}")
    n = len(spec.a) - 1
    gmin = _min_radius(spec.a)
    g = spec.g if spec.g is not None else gmin
    if g < gmin:
        raise InconsistentSpec(
            f"radius g={g} too small: weights with value 1 reach distance {gmin} from n/2")

    avec = tuple(spec.a)
    if spec.strategy == TWO_SIDED:
        start = ("0",) * (2 * g) + avec
        inner = _build_two_sided(start, 0, g, {})
        wires = identity_wires(n) + tuple(const(1) for _ in range(2 * g))
    else:
        inner = _build_outward(avec, len(avec) + 6 * g + 16, {})
        wires = identity_wires(n)

    root = Call(inner, wires)

    def truth(bits: tuple[int, ...]) -> int:
        return 1 if avec[sum(bits)] == "1" else 0

    return Plan(
        family="sym", n=n,
        params=(("a", spec.a), ("g", g), ("strategy", spec.strategy)),
        root=root, claimed_queries=sym_claimed_queries(SymSpec(spec.a, g, spec.strategy)),
        truth=truth,
    )
