"""Exhaustive simulation of plans and polynomial-level certification.

The simulator runs a plan on every input, tracking unnormalized branch
states. Subroutine calls are memoized per (plan, sub-input): a call on a
state proportional to the callee's input contract reuses the callee's
summary, scaled by the squared proportionality factor; anything else is run
directly so that broken plans produce honest wrong outputs rather than
crashes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import NotSymmetrizable, PartitionGap, ZeroWitnessMissing
from .gadgets import OracleSpec, oracle_apply
from .plans import (
    Call,
    GadgetStep,
    MeasureStep,
    Output,
    Plan,
    PlanNode,
    PrepareState,
    QueryStep,
    Wire,
)
from .state_core import LabeledState, ZERO_LABEL, apply_bindings, measure

DEFAULT_TOL = 1e-9
DEFAULT_BRANCH_TOL = 1e-9

_SCRATCH = LabeledState({ZERO_LABEL: 1.0})


@dataclass(frozen=True)
class RunTree:
    """One node of a simulated run: branch weight, query depth, children.

    Leaves carry the classical output; unreachable branches are marked and
    carry no children.
    """

    kind: str
    outcome: tuple | None
    norm_sq: float
    queries: int
    output: int | None
    reachable: bool
    children: tuple[RunTree, ...]


@dataclass(frozen=True)
class VerificationReport:
    family: str
    params: tuple[tuple[str, object], ...]
    n: int
    exact: bool
    worst_case_queries: int
    claimed_bound: int
    max_norm_residual: float
    counterexamples: tuple[tuple[tuple[int, ...], int, float], ...]
    inputs_checked: int

    def params_dict(self) -> dict[str, object]:
        return dict(self.params)

    def as_dict(self, *, verbose: bool = False) -> dict[str, object]:
        out: dict[str, object] = {
            "family": self.family,
            "params": self.params_dict(),
            "exact": self.exact,
            "worst_case_queries": self.worst_case_queries,
            "claimed_bound": self.claimed_bound,
            "max_norm_residual": self.max_norm_residual,
        }
        if verbose:
            out["inputs_checked"] = self.inputs_checked
            out["counterexamples"] = [
                {"input": "".join(map(str, bits)), "output": o, "norm_sq": w}
                for bits, o, w in self.counterexamples
            ]
        return out


@dataclass(frozen=True)
class _Summary:
    """Aggregate of one plan run: worst reachable query depth, per-output
    mass (total and heaviest single branch), and worst call residual."""

    max_queries: int
    mass: tuple[tuple[int, float, float], ...]
    residual: float


_VACUOUS = _Summary(0, (), 0.0)


def _merge_masses(parts: Iterable[tuple[tuple[int, float, float], ...]]) -> tuple:
    acc: dict[int, tuple[float, float]] = {}
    for mass in parts:
        for output, total, heaviest in mass:
            t, h = acc.get(output, (0.0, 0.0))
            acc[output] = (t + total, max(h, heaviest))
    return tuple((o, t, h) for o, (t, h) in sorted(acc.items()))


def _scale_mass(mass: tuple, factor: float) -> tuple:
    return tuple((o, t * factor, h * factor) for o, t, h in mass)


def _resolve_bits(bits: tuple[int, ...], wires: tuple[Wire, ...]) -> tuple[int, ...]:
    return tuple(bits[w[1] - 1] if w[0] == "var" else w[1] for w in wires)


class _Executor:
    def __init__(self, *, tol: float = DEFAULT_TOL, branch_tol: float = DEFAULT_BRANCH_TOL):
        self.tol = tol
        self.branch_tol = branch_tol
        self.cache: dict[tuple[int, tuple[int, ...]], _Summary] = {}

    # -- plan entry ---------------------------------------------------------

    def entry_state(self, plan: Plan, oracle: OracleSpec) -> LabeledState | None:
        """Normalized entry state, or None when the contract vanishes (the
        input cannot reach this subroutine at all)."""
        if plan.contract is None:
            return _SCRATCH
        raw = plan.contract(oracle.xhat)
        norm_sq = raw.squared_norm()
        if norm_sq <= self.branch_tol:
            return None
        return raw.scaled(1.0 / math.sqrt(norm_sq))

    def run_plan(self, plan: Plan, bits: tuple[int, ...]) -> _Summary:
        key = (id(plan), bits)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        oracle = OracleSpec.from_bits(bits)
        entry = self.entry_state(plan, oracle)
        if entry is None:
            summary = _VACUOUS
        else:
            summary = self._walk(plan.root, entry, bits, oracle, 0)
        self.cache[key] = summary
        return summary

    # -- node stepping ------------------------------------------------------

    def _walk(self, node: PlanNode, state: LabeledState, bits: tuple[int, ...],
              oracle: OracleSpec, queries: int) -> _Summary:
        weight = state.squared_norm()
        if weight <= self.branch_tol:
            return _VACUOUS
        if isinstance(node, Output):
            return _Summary(queries, ((node.bit, weight, weight),), 0.0)
        if isinstance(node, PrepareState):
            prepared = node.state.scaled(math.sqrt(weight))
            return self._walk(node.child, prepared, bits, oracle, queries)
        if isinstance(node, GadgetStep):
            state = apply_bindings(state, node.applications)
            return self._walk(node.child, state, bits, oracle, queries)
        if isinstance(node, QueryStep):
            state = oracle_apply(state, oracle, node.extractor)
            return self._walk(node.child, state, bits, oracle, queries + 1)
        if isinstance(node, MeasureStep):
            parts = measure(state, node.partition)
            empty = LabeledState(())
            results = []
            for outcome_id, rewrite, child in node.children:
                branch = parts.get(outcome_id, empty)
                if rewrite is not None:
                    branch = branch.rewritten(rewrite)
                results.append(self._walk(child, branch, bits, oracle, queries))
            max_q = max((r.max_queries for r in results if r.mass), default=0)
            residual = max((r.residual for r in results), default=0.0)
            return _Summary(max_q, _merge_masses(r.mass for r in results), residual)
        if isinstance(node, Call):
            return self._call(node, state, weight, bits, queries)
        raise TypeError(f"unknown plan node {node!r}")

    def _call(self, node: Call, state: LabeledState, weight: float,
              bits: tuple[int, ...], queries: int) -> _Summary:
        sub = node.plan
        bits_sub = _resolve_bits(bits, node.wires)
        if sub.contract is None:
            inner = self.run_plan(sub, bits_sub)
            if not inner.mass:
                return _Summary(0, (), inner.residual)
            return _Summary(queries + inner.max_queries,
                            _scale_mass(inner.mass, weight), inner.residual)

        oracle_sub = OracleSpec.from_bits(bits_sub)
        kappa = sub.contract(oracle_sub.xhat)
        k_norm_sq = kappa.squared_norm()
        if k_norm_sq > self.branch_tol:
            overlap = sum(a.conjugate() * state.amplitude(l) for l, a in kappa.items())
            coeff = overlap / k_norm_sq
            mismatch = LabeledState(
                list(state.items()) + [(l, -coeff * a) for l, a in kappa.items()])
            residual = math.sqrt(mismatch.squared_norm())
            if residual <= self.tol * max(1.0, math.sqrt(weight)):
                inner = self.run_plan(sub, bits_sub)
                factor = abs(coeff) ** 2 * k_norm_sq
                if not inner.mass or factor <= self.branch_tol:
                    return _Summary(0, (), max(residual, inner.residual))
                return _Summary(queries + inner.max_queries,
                                _scale_mass(inner.mass, factor),
                                max(residual, inner.residual))
        else:
            residual = math.sqrt(weight)
        # The branch state is outside the callee's input family: run it
        # through the callee directly and let wrong outputs surface. If it
        # escapes the callee's measurement algebra entirely, report the
        # branch as output -1, which can never match a truth value.
        try:
            inner = self._walk(sub.root, state, bits_sub, oracle_sub, queries)
        except PartitionGap:
            return _Summary(queries, ((-1, weight, weight),), residual)
        return _Summary(inner.max_queries, inner.mass, max(residual, inner.residual))

    # -- traced run (full tree, no memoization) -----------------------------

    def trace(self, plan: Plan, bits: tuple[int, ...]) -> RunTree:
        oracle = OracleSpec.from_bits(bits)
        entry = self.entry_state(plan, oracle)
        if entry is None:
            return RunTree("vacuous", None, 0.0, 0, None, False, ())
        return self._trace_walk(plan.root, entry, bits, oracle, 0, None)

    def _trace_walk(self, node: PlanNode, state: LabeledState, bits: tuple[int, ...],
                    oracle: OracleSpec, queries: int, outcome: tuple | None) -> RunTree:
        weight = state.squared_norm()
        if weight <= self.branch_tol:
            return RunTree("pruned", outcome, weight, queries, None, False, ())
        if isinstance(node, Output):
            return RunTree("output", outcome, weight, queries, node.bit, True, ())
        if isinstance(node, PrepareState):
            child = self._trace_walk(node.child, node.state.scaled(math.sqrt(weight)),
                                     bits, oracle, queries, None)
            return RunTree("prepare", outcome, weight, queries, None, True, (child,))
        if isinstance(node, GadgetStep):
            state = apply_bindings(state, node.applications)
            child = self._trace_walk(node.child, state, bits, oracle, queries, None)
            return RunTree("gadget", outcome, weight, queries, None, True, (child,))
        if isinstance(node, QueryStep):
            state = oracle_apply(state, oracle, node.extractor)
            child = self._trace_walk(node.child, state, bits, oracle, queries + 1, None)
            return RunTree("query", outcome, weight, queries, None, True, (child,))
        if isinstance(node, MeasureStep):
            parts = measure(state, node.partition)
            empty = LabeledState(())
            kids = []
            for outcome_id, rewrite, child_node in node.children:
                branch = parts.get(outcome_id, empty)
                if rewrite is not None:
                    branch = branch.rewritten(rewrite)
                kids.append(self._trace_walk(child_node, branch, bits, oracle,
                                             queries, outcome_id))
            return RunTree("measure", outcome, weight, queries, None, True, tuple(kids))
        if isinstance(node, Call):
            sub = node.plan
            bits_sub = _resolve_bits(bits, node.wires)
            oracle_sub = OracleSpec.from_bits(bits_sub)
            if sub.contract is None:
                entry = _SCRATCH.scaled(math.sqrt(weight))
            else:
                entry = state
            try:
                child = self._trace_walk(sub.root, entry, bits_sub, oracle_sub, queries, None)
            except PartitionGap:
                child = RunTree("gap", None, weight, queries, -1, True, ())
            return RunTree("call", outcome, weight, queries, None, True, (child,))
        raise TypeError(f"unknown plan node {node!r}")


def run_on_input(
    plan: Plan,
    x: Sequence[int],
    *,
    tol: float = DEFAULT_TOL,
    branch_tol: float = DEFAULT_BRANCH_TOL,
) -> RunTree:
    """Simulate one input and return the full branching tree (no sharing;
    intended for inspection at small n)."""
    bits = tuple(x)
    if len(bits) != plan.n:
        raise ValueError(f"plan has n={plan.n}, input has {len(bits)} bits")
    return _Executor(tol=tol, branch_tol=branch_tol).trace(plan, bits)


def tree_leaves(tree: RunTree) -> list[RunTree]:
    """All reachable output leaves of a run tree."""
    if tree.kind == "output":
        return [tree]
    out: list[RunTree] = []
    for child in tree.children:
        out.extend(tree_leaves(child))
    return out


def verify_exactness(
    plan: Plan,
    truth: Callable[[tuple[int, ...]], int] | None = None,
    *,
    limit: int = 20,
    tol: float = DEFAULT_TOL,
    branch_tol: float = DEFAULT_BRANCH_TOL,
    parallel: int | None = None,
) -> VerificationReport:
    """Run the plan on all 2^n inputs and certify outputs and query counts.

    A counterexample records (input, observed output, branch squared norm)
    for the heaviest branch whose output disagrees with the truth function.
    Output -1 marks a branch whose state left a subroutine's measurement
    algebra, which only corrupted plans produce.
    """
    if plan.n > limit:
        raise ValueError(f"n={plan.n} exceeds the enumeration limit {limit}")
    truth_fn = truth if truth is not None else plan.truth
    executor = _Executor(tol=tol, branch_tol=branch_tol)
    inputs = list(product((0, 1), repeat=plan.n))

    def run_one(bits: tuple[int, ...]) -> _Summary:
        return executor.run_plan(plan, bits)

    if parallel and parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            summaries = list(pool.map(run_one, inputs))
    else:
        summaries = [run_one(bits) for bits in inputs]

    worst = 0
    max_residual = 0.0
    counterexamples = []
    for bits, summary in zip(inputs, summaries):
        if not summary.mass:
            continue
        worst = max(worst, summary.max_queries)
        total = sum(t for _, t, _ in summary.mass)
        max_residual = max(max_residual, abs(total - 1.0), summary.residual)
        expected = truth_fn(bits)
        for output, _, heaviest in summary.mass:
            if output != expected and heaviest > tol:
                counterexamples.append((bits, output, heaviest))
    return VerificationReport(
        family=plan.family,
        params=plan.params,
        n=plan.n,
        exact=not counterexamples,
        worst_case_queries=worst,
        claimed_bound=plan.claimed_queries,
        max_norm_residual=max_residual,
        counterexamples=tuple(counterexamples),
        inputs_checked=len(inputs),
    )


# ---------------------------------------------------------------------------
# Polynomial suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultilinearPoly:
    """Sparse multilinear polynomial in the +-1 variables, indexed by subsets
    of {1..n}."""

    n: int
    coeffs: tuple[tuple[tuple[int, ...], float], ...]

    @classmethod
    def from_values(cls, n: int, values: Sequence[float], *, tol: float = 1e-11) -> MultilinearPoly:
        """Fourier inversion: alpha_S = 2^-n sum_x A(x) prod_{i in S} xhat_i.

        `values` is indexed by inputs in lexicographic bit order (first bit
        most significant).
        """
        if len(values) != 1 << n:
            raise ValueError(f"need {1 << n} values, got {len(values)}")
        arr = np.asarray(values, dtype=float).reshape([2] * n if n else [1])
        for axis in range(n):
            lo = np.take(arr, 0, axis=axis)
            hi = np.take(arr, 1, axis=axis)
            arr = np.stack([lo + hi, lo - hi], axis=axis)
        arr = arr / (1 << n)
        coeffs = []
        for index in np.ndindex(*([2] * n)) if n else [()]:
            c = float(arr[index]) if n else float(arr[0])
            if abs(c) > tol:
                subset = tuple(i + 1 for i, b in enumerate(index) if b)
                coeffs.append((subset, c))
        coeffs.sort(key=lambda item: (len(item[0]), item[0]))
        return cls(n, tuple(coeffs))

    def coeff(self, subset: Iterable[int]) -> float:
        key = tuple(sorted(subset))
        for s, c in self.coeffs:
            if s == key:
                return c
        return 0.0

    def evaluate(self, xhat: Sequence[float]) -> float:
        if len(xhat) != self.n:
            raise ValueError(f"need {self.n} entries, got {len(xhat)}")
        total = 0.0
        for subset, c in self.coeffs:
            term = c
            for i in subset:
                term *= xhat[i - 1]
            total += term
        return total

    def degree(self, *, tol: float = 1e-9) -> int:
        return max((len(s) for s, c in self.coeffs if abs(c) > tol), default=0)


def _acceptance_values(plan: Plan, *, tol: float, branch_tol: float) -> list[float]:
    executor = _Executor(tol=tol, branch_tol=branch_tol)
    values = []
    for bits in product((0, 1), repeat=plan.n):
        summary = executor.run_plan(plan, bits)
        values.append(sum(t for o, t, _ in summary.mass if o == 1))
    return values


def extract_multilinear(
    plan: Plan,
    selector: str | tuple = "acceptance",
    *,
    tol: float = DEFAULT_TOL,
    branch_tol: float = DEFAULT_BRANCH_TOL,
) -> MultilinearPoly:
    """Multilinear polynomial of the acceptance probability, or of one
    leaf's branch weight (selector ("leaf", outcome path))."""
    if plan.n > 14:
        raise ValueError(f"n={plan.n} exceeds the extraction limit 14")
    if selector == "acceptance":
        values = _acceptance_values(plan, tol=tol, branch_tol=branch_tol)
        return MultilinearPoly.from_values(plan.n, values)
    if isinstance(selector, tuple) and len(selector) == 2 and selector[0] == "leaf":
        path = tuple(selector[1])
        executor = _Executor(tol=tol, branch_tol=branch_tol)
        values = []
        for bits in product((0, 1), repeat=plan.n):
            tree = executor.trace(plan, bits)
            values.append(_leaf_weight(tree, path))
        return MultilinearPoly.from_values(plan.n, values)
    raise ValueError(f"unknown selector {selector!r}")


def _leaf_weight(tree: RunTree, path: tuple) -> float:
    remaining = path
    node = tree
    while True:
        if not remaining:
            return node.norm_sq if node.reachable or node.kind == "pruned" else 0.0
        advanced = False
        for child in node.children:
            if child.outcome == remaining[0]:
                node, remaining, advanced = child, remaining[1:], True
                break
        if not advanced:
            if len(node.children) == 1:
                node = node.children[0]
            else:
                return 0.0


@dataclass(frozen=True)
class LeafDegreeRecord:
    family: str
    n: int
    path: tuple
    label: tuple
    queries: int
    entry_degree: int
    degree: int
    bound: int

    @property
    def ok(self) -> bool:
        return self.degree <= self.bound


def _collect_plans(plan: Plan) -> list[Plan]:
    seen: dict[int, Plan] = {}

    def visit_node(node: PlanNode) -> None:
        if isinstance(node, Call):
            visit_plan(node.plan)
        elif isinstance(node, (PrepareState, GadgetStep, QueryStep)):
            visit_node(node.child)
        elif isinstance(node, MeasureStep):
            for _, _, child in node.children:
                visit_node(child)

    def visit_plan(p: Plan) -> None:
        if id(p) in seen:
            return
        seen[id(p)] = p
        visit_node(p.root)

    visit_plan(plan)
    return list(seen.values())


def audit_leaf_degrees(plan: Plan, *, coeff_tol: float = 1e-9) -> tuple[LeafDegreeRecord, ...]:
    """Check, for every subroutine reachable from the plan, that every exit
    amplitude is a multilinear polynomial of degree at most (entry degree +
    queries spent inside the subroutine).

    Entry degree is 0 for plans starting from a prepared state and 1 for
    plans consuming the precomputed input family (its amplitudes are linear
    in xhat). Together with linearity of every step this bounds each composed
    leaf amplitude's degree by its full path query count.
    """
    records: list[LeafDegreeRecord] = []
    for sub in _collect_plans(plan):
        if sub.n > 14:
            raise ValueError(f"subroutine n={sub.n} exceeds the extraction limit 14")
        entry_degree = 0 if sub.contract is None else 1
        collected: dict[tuple[tuple, tuple], list[float]] = {}
        queries_by_path: dict[tuple, int] = {}
        n_inputs = 1 << sub.n
        for position, bits in enumerate(product((0, 1), repeat=sub.n)):
            oracle = OracleSpec.from_bits(bits)
            entry = _SCRATCH if sub.contract is None else sub.contract(oracle.xhat)
            for path, queries, state in _exit_states(sub.root, entry, oracle):
                queries_by_path[path] = queries
                for label, amp in state.items():
                    slot = collected.setdefault((path, label), [0.0] * n_inputs)
                    slot[position] = amp.real
        for (path, label), values in sorted(collected.items()):
            queries = queries_by_path[path]
            poly = MultilinearPoly.from_values(sub.n, values, tol=coeff_tol)
            records.append(LeafDegreeRecord(
                family=sub.family, n=sub.n, path=path, label=label,
                queries=queries, entry_degree=entry_degree,
                degree=poly.degree(tol=coeff_tol),
                bound=queries + entry_degree,
            ))
    return tuple(records)


def _exit_states(node: PlanNode, state: LabeledState, oracle: OracleSpec,
                 path: tuple = (), queries: int = 0):
    """Yield (outcome path, queries, branch state) at every Output or Call
    exit of one plan, without descending into callees."""
    if isinstance(node, (Output, Call)):
        yield path, queries, state
        return
    if isinstance(node, PrepareState):
        prepared = node.state.scaled(math.sqrt(state.squared_norm()))
        yield from _exit_states(node.child, prepared, oracle, path, queries)
        return
    if isinstance(node, GadgetStep):
        state = apply_bindings(state, node.applications)
        yield from _exit_states(node.child, state, oracle, path, queries)
        return
    if isinstance(node, QueryStep):
        state = oracle_apply(state, oracle, node.extractor)
        yield from _exit_states(node.child, state, oracle, path, queries + 1)
        return
    if isinstance(node, MeasureStep):
        parts = measure(state, node.partition)
        empty = LabeledState(())
        for outcome_id, rewrite, child in node.children:
            branch = parts.get(outcome_id, empty)
            if rewrite is not None:
                branch = branch.rewritten(rewrite)
            yield from _exit_states(child, branch, oracle, path + (outcome_id,), queries)
        return
    raise TypeError(f"unknown plan node {node!r}")


@dataclass(frozen=True)
class SymmetrizedPoly:
    """Univariate restriction q(s) of a symmetrized multilinear polynomial,
    s being the Hamming weight."""

    n: int
    q_values: tuple[float, ...]
    coeffs: tuple[float, ...]

    def degree(self, *, tol: float = 1e-9) -> int:
        return max((i for i, c in enumerate(self.coeffs) if abs(c) > tol), default=0)


def _elementary_symmetric(xhat: Sequence[float], n: int) -> list[float]:
    e = [1.0] + [0.0] * n
    for v in xhat:
        for j in range(n, 0, -1):
            e[j] += v * e[j - 1]
    return e


def symmetrize_to_univariate(poly: MultilinearPoly, *, tol: float = 1e-9) -> SymmetrizedPoly:
    """Average coefficients over subset-size classes and restrict to the
    Hamming weight axis.

    The class-averaged polynomial is evaluated at every input; if it is not
    constant on some weight class the extraction was broken and
    NotSymmetrizable is raised.
    """
    n = poly.n
    class_sum = [0.0] * (n + 1)
    for subset, c in poly.coeffs:
        class_sum[len(subset)] += c
    avg = [class_sum[m] / math.comb(n, m) for m in range(n + 1)]

    per_weight: list[list[float]] = [[] for _ in range(n + 1)]
    for bits in product((0, 1), repeat=n):
        xhat = [1 - 2 * b for b in bits]
        e = _elementary_symmetric(xhat, n)
        value = sum(avg[m] * e[m] for m in range(n + 1))
        per_weight[sum(bits)].append(value)
    q_values = []
    for s, values in enumerate(per_weight):
        spread = max(values) - min(values)
        if spread > tol:
            raise NotSymmetrizable(
                f"symmetrized polynomial varies by {spread:.3e} on weight class s={s}")
        q_values.append(sum(values) / len(values))

    vander = np.vander(np.arange(n + 1, dtype=float), n + 1, increasing=True)
    coeffs = np.linalg.solve(vander, np.asarray(q_values))
    return SymmetrizedPoly(n, tuple(q_values), tuple(float(c) for c in coeffs))


def root_count_lower_bound(
    q_values: Mapping[int, float],
    claimed_nonzero: int,
    *,
    tol: float = 1e-9,
) -> int:
    """Count zero entries of a value table; with a certified nonzero witness
    this lower-bounds the degree of any polynomial matching the table."""
    if claimed_nonzero not in q_values:
        raise ZeroWitnessMissing(f"no value recorded at the witness point {claimed_nonzero}")
    if abs(q_values[claimed_nonzero]) < tol:
        raise ZeroWitnessMissing(
            f"value {q_values[claimed_nonzero]:.3e} at {claimed_nonzero} is not nonzero")
    return sum(1 for point, value in q_values.items()
               if point != claimed_nonzero and abs(value) < tol)
