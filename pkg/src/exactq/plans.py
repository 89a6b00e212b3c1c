"""Adaptive plan graph: immutable step nodes wired into branching programs.

A Plan is a tree of steps. Unitary steps (PrepareState, GadgetStep, QueryStep)
have one child; MeasureStep fans out per outcome; leaves are Output bits or
Call nodes that hand the live variables to a sub-plan. Plans either prepare
their own root state or declare an input contract, a state the caller must
supply as a function of the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

from .state_core import Binding, Label, LabeledState, MeasurementPartition

# A wire feeds one sub-plan variable: from a parent variable or a padded bit.
Wire = tuple[str, int]


def var(i: int) -> Wire:
    if not isinstance(i, int) or i < 1:
        raise ValueError(f"var wires take a 1-based parent index, got {i!r}")
    return ("var", i)


def const(bit: int) -> Wire:
    if bit not in (0, 1):
        raise ValueError(f"const wires take a bit, got {bit!r}")
    return ("const", bit)


def identity_wires(n: int) -> tuple[Wire, ...]:
    return tuple(var(i) for i in range(1, n + 1))


def drop_wires(n: int, removed: tuple[int, ...]) -> tuple[Wire, ...]:
    """Wires that renumber the surviving parent variables order-preservingly."""
    gone = set(removed)
    return tuple(var(i) for i in range(1, n + 1) if i not in gone)


@dataclass(frozen=True, eq=False)
class Output:
    bit: int

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError(f"Output takes a bit, got {self.bit!r}")


@dataclass(frozen=True, eq=False)
class PrepareState:
    """Root-only step: replace the (norm-1) incoming state with `state`."""

    state: LabeledState
    child: "PlanNode"

    def __post_init__(self):
        if abs(self.state.squared_norm() - 1.0) > 1e-9:
            raise ValueError(f"prepared states must be normalized, got norm^2={self.state.squared_norm()}")


@dataclass(frozen=True, eq=False)
class GadgetStep:
    """Apply bound gadgets in order; True in an entry means the adjoint."""

    applications: tuple[tuple[Binding, bool], ...]
    child: "PlanNode"


@dataclass(frozen=True, eq=False)
class QueryStep:
    """One oracle call; the extractor maps each label to its queried index."""

    extractor: Callable[[Label], int | None]
    child: "PlanNode"


@dataclass(frozen=True, eq=False)
class MeasureStep:
    """Measure with a partition; children align 1:1 with partition outcomes.

    Each child entry is (outcome_id, relabeling-or-None, node); the relabeling
    is applied to the collapsed branch before descending.
    """

    partition: MeasurementPartition
    children: tuple[tuple[object, Mapping[Label, Label] | None, "PlanNode"], ...]

    def __post_init__(self):
        got = tuple(oid for oid, _, _ in self.children)
        if got != self.partition.outcome_ids():
            raise ValueError(f"children {got!r} do not match partition outcomes {self.partition.outcome_ids()!r}")


@dataclass(frozen=True, eq=False)
class Call:
    """Hand off to a sub-plan; wires feed each of its variables in order."""

    plan: "Plan"
    wires: tuple[Wire, ...]

    def __post_init__(self):
        if len(self.wires) != self.plan.n:
            raise ValueError(f"{self.plan.family}: {self.plan.n} wires required, got {len(self.wires)}")
        live = [i for kind, i in self.wires if kind == "var"]
        if len(set(live)) != len(live):
            raise ValueError(f"{self.plan.family}: live-variable wires must be injective, got {self.wires!r}")


PlanNode = Union[Output, PrepareState, GadgetStep, QueryStep, MeasureStep, Call]


@dataclass(frozen=True, eq=False)
class Plan:
    """A complete branching program for one function family instance.

    `truth` is the intended Boolean function (used as the default check).
    Plans with an input `contract` consume a caller-prepared state instead of
    a PrepareState root; `contract` maps the +-1 input encoding to that state,
    and `contract_gamma` records its leakage coefficient when meaningful.
    """

    family: str
    n: int
    params: tuple[tuple[str, object], ...]
    root: PlanNode
    claimed_queries: int
    truth: Callable[[tuple[int, ...]], int]
    contract: Callable[[tuple[int, ...]], LabeledState] | None = None
    contract_gamma: float | None = None

    def params_dict(self) -> dict:
        return dict(self.params)

    def __repr__(self) -> str:
        extra = f", gamma={self.contract_gamma!r}" if self.contract is not None else ""
        return f"Plan({self.family}, n={self.n}, claimed={self.claimed_queries}{extra})"
