"""Generator tests: sampling primitives, rejection-sampling discipline,
dataset invariants, serialization, and the KL balance report."""

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from rewritebench.core import Alphabet, apply_cascade
from rewritebench.proposer import (
    Dataset,
    GeneratorParams,
    generate_dataset,
    kl_balance_report,
    kl_from_counts,
    lite_params,
    sample_candidate,
    sample_input_vector,
    sample_rule,
)
from rewritebench.relations import classify_bfcc


def tiny_params(**overrides):
    base = dict(
        n=2, alphabet=Alphabet.from_string("abc"), l_min=2, l_max=4,
        L_min=2, L_max=3, s_min=1, s_max=2, D=24, tau=50_000, seed=0,
        quota_mode="category-balanced",
    )
    base.update(overrides)
    return GeneratorParams(**base)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            tiny_params(l_min=0)
        with pytest.raises(ValueError):
            tiny_params(L_min=4)  # exceeds L_max=3
        with pytest.raises(ValueError):
            tiny_params(quota_mode="nope")

    def test_round_trip(self):
        params = tiny_params()
        assert GeneratorParams.from_dict(params.to_dict()) == params

    def test_unknown_keys_rejected(self):
        data = tiny_params().to_dict()
        data["surprise"] = 1
        with pytest.raises(ValueError, match="unknown"):
            GeneratorParams.from_dict(data)


class TestSampling:
    def test_degenerate_alphabet_forces_inputs(self):
        params = tiny_params(
            n=2, alphabet=Alphabet.from_string("a"), l_min=3, l_max=3
        )
        assert sample_input_vector(params, random.Random(0)) == ["aaa", "aaa"]

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_input_bounds(self, seed):
        params = tiny_params()
        vec = sample_input_vector(params, random.Random(seed))
        assert len(vec) == params.n
        for s in vec:
            assert params.l_min <= len(s) <= params.l_max
            assert set(s) <= set(params.alphabet.symbols)

    def test_input_determinism(self):
        params = tiny_params()
        assert sample_input_vector(params, random.Random(7)) == \
            sample_input_vector(params, random.Random(7))

    def test_rule_source_forced(self):
        params = tiny_params(s_min=2, s_max=2)
        rule = sample_rule(["ab"], params, random.Random(0))
        assert rule.source == "ab"

    def test_rule_target_forced(self):
        params = tiny_params(
            alphabet=Alphabet.from_string("z"), s_min=2, s_max=2
        )
        rule = sample_rule(["zz"], params, random.Random(0))
        assert rule.target == "zz"

    def test_rule_rejection_when_no_feasible_source(self):
        params = tiny_params(s_min=2, s_max=2)
        assert sample_rule(["a"], params, random.Random(0)) is None

    def test_candidate_consistency(self):
        params = tiny_params()
        rng = random.Random(3)
        found = 0
        while found < 20:
            cand = sample_candidate(params, rng)
            if cand is None:
                continue
            found += 1
            assert params.L_min <= len(cand.cascade) <= params.L_max
            # outputs re-derivable and every rule effective along the trace
            outputs, trace = apply_cascade(
                cand.cascade, cand.inputs, trace=True
            )
            assert tuple(outputs) == cand.outputs
            assert cand.outputs != cand.inputs
            for before, after in zip(trace, trace[1:]):
                assert before != after
            cat, edges = classify_bfcc(cand.cascade)
            assert cat == cand.category
            assert tuple(edges) == cand.fb_edges


class TestGenerateDataset:
    def test_determinism(self):
        a = generate_dataset(tiny_params())
        b = generate_dataset(tiny_params())
        assert a.to_dict() == b.to_dict()

    def test_dedup_and_unique_ids(self):
        ds = generate_dataset(tiny_params())
        ids = [i.id for i in ds.instances]
        assert len(set(ids)) == len(ids)
        sigs = [i.dedup_signature() for i in ds.instances]
        assert len(set(sigs)) == len(sigs)

    def test_quota_discipline_without_patience_exhaustion(self):
        ds = generate_dataset(tiny_params(D=32))
        if not ds.stats.patience_exhausted:
            counts = {}
            for inst in ds.instances:
                key = inst.category.render()
                counts[key] = counts.get(key, 0) + 1
            cap = math.ceil(32 / 16)
            assert all(v <= cap for v in counts.values())

    def test_tau_zero_accept_any(self):
        ds = generate_dataset(
            tiny_params(tau=0, post_patience_policy="accept-any", D=16)
        )
        assert len(ds.instances) == 16
        assert ds.stats.patience_exhausted

    def test_instance_replay(self):
        ds = generate_dataset(tiny_params())
        for inst in ds.instances:
            assert tuple(apply_cascade(inst.cascade, inst.inputs)) == inst.outputs
            cat, edges = classify_bfcc(inst.cascade)
            assert cat == inst.category
            assert tuple(edges) == inst.fb_edges

    def test_json_round_trip(self, tmp_path):
        ds = generate_dataset(tiny_params())
        path = tmp_path / "ds.json"
        ds.save(str(path))
        loaded = Dataset.load(str(path))
        assert loaded.to_dict() == ds.to_dict()

    def test_lite_params_shape(self):
        params = lite_params(seed=5)
        assert params.n == 5
        assert len(params.alphabet) == 17
        assert (params.L_min, params.L_max) == (2, 5)
        assert (params.l_min, params.l_max) == (2, 6)
        assert (params.s_min, params.s_max) == (1, 3)
        assert params.D == 1008 and params.tau == 100_000


class TestKl:
    def test_two_bin_hand_value(self):
        # counts [2,0], add-one -> Q = [3/4, 1/4]
        expected = 0.5 * math.log((1 / 2) / (3 / 4)) + 0.5 * math.log(
            (1 / 2) / (1 / 4)
        )
        assert kl_from_counts([2, 0]) == pytest.approx(expected)
        assert kl_from_counts([2, 0]) == pytest.approx(0.1438, abs=1e-4)

    def test_uniform_counts_give_zero(self):
        assert kl_from_counts([5] * 16) == 0.0

    @given(st.lists(st.integers(0, 50), min_size=1, max_size=16))
    def test_non_negative(self, counts):
        assert kl_from_counts(counts) >= 0.0

    def test_report_counts(self):
        ds = generate_dataset(tiny_params())
        report = kl_balance_report(ds)
        assert sum(report.category_counts.values()) == len(ds.instances)
        assert sum(report.length_counts.values()) == len(ds.instances)
        assert report.kl_nats >= 0.0

    def test_empty_dataset_rejected(self):
        ds = generate_dataset(tiny_params(D=1))
        ds.instances = []
        with pytest.raises(ValueError):
            kl_balance_report(ds)
