"""Exhaustive simulation: run trees, reports, and branch accounting."""

from __future__ import annotations

import itertools

import pytest

from exactq import (
    build_equality,
    build_unb,
    build_unbr,
    run_on_input,
    tree_leaves,
    verify_exactness,
)


def check_norm_conservation(tree, depth=1):
    """Each interior node's mass must equal the sum over its children."""
    if not tree.children:
        return
    total = sum(child.norm_sq for child in tree.children)
    assert abs(total - tree.norm_sq) < 1e-9 * depth, (tree.kind, depth)
    for child in tree.children:
        check_norm_conservation(child, depth + 1)


class TestRunTree:
    def test_input_arity_checked(self):
        plan = build_equality(3)
        with pytest.raises(ValueError):
            run_on_input(plan, (0, 1))

    def test_root_mass_is_one_for_fresh_plans(self):
        plan = build_unb(3, 1)
        for bits in itertools.product((0, 1), repeat=3):
            tree = run_on_input(plan, bits)
            assert tree.norm_sq == pytest.approx(1.0)

    @pytest.mark.parametrize("builder,args", [
        (build_unb, (3, 1)), (build_unb, (5, 1)), (build_unb, (4, 2)),
        (build_equality, (4,)), (build_unbr, (5, 1)),
    ])
    def test_norm_conserved_at_every_level(self, builder, args):
        plan = builder(*args)
        for bits in itertools.product((0, 1), repeat=plan.n):
            check_norm_conservation(run_on_input(plan, bits))

    def test_leaves_carry_single_output(self):
        plan = build_unb(5, 1)
        for bits in itertools.product((0, 1), repeat=5):
            leaves = tree_leaves(run_on_input(plan, bits))
            outputs = {leaf.output for leaf in leaves}
            assert outputs == {plan.truth(bits)}

    def test_contract_plan_enters_through_contract(self):
        plan = build_unbr(3, 1)
        tree = run_on_input(plan, (0, 0, 1))
        assert tree.norm_sq == pytest.approx(1.0)
        assert tree_leaves(tree)


class TestVerifyExactness:
    def test_report_fields(self):
        report = verify_exactness(build_unb(3, 1))
        assert report.family == "unb"
        assert report.n == 3
        assert report.exact
        assert report.inputs_checked == 8
        assert report.counterexamples == ()
        assert report.worst_case_queries == 2
        assert report.max_norm_residual < 1e-12

    def test_truth_override(self):
        plan = build_equality(2)
        report = verify_exactness(plan, truth=lambda bits: 0)
        assert not report.exact
        assert len(report.counterexamples) == 2

    def test_limit_guard(self):
        with pytest.raises(ValueError):
            verify_exactness(build_unb(3, 1), limit=2)

    def test_parallel_report_identical(self):
        plan = build_unb(5, 1)
        assert verify_exactness(plan, parallel=4) == verify_exactness(plan)

    def test_counterexamples_record_heaviest_branch(self):
        plan = build_unb(5, 1, gamma_override=0.05)
        report = verify_exactness(plan)
        assert not report.exact
        for bits, output, weight in report.counterexamples:
            assert len(bits) == 5
            assert output != plan.truth(bits)
            assert weight > 1e-9

    def test_as_dict_shapes(self):
        report = verify_exactness(build_unb(3, 1))
        flat = report.as_dict()
        assert set(flat) == {
            "family", "params", "exact", "worst_case_queries",
            "claimed_bound", "max_norm_residual",
        }
        verbose = report.as_dict(verbose=True)
        assert verbose["inputs_checked"] == 8
        assert verbose["counterexamples"] == []


class TestVacuousContracts:
    def test_zero_contract_inputs_are_skipped(self):
        # The gap-1 contract state vanishes identically for balanced inputs
        # on even n; such inputs carry no mass and cannot refute the plan.
        plan = build_unbr(3, 1)
        report = verify_exactness(plan)
        assert report.inputs_checked == 8
        assert report.exact
