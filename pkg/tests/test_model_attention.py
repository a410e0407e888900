import math
import random
from fractions import Fraction

import pytest

from codegaze import (
    DumpError,
    EmptyDump,
    MissingCopyAttention,
    ModelAttentionDump,
    NodeAttention,
    SpanError,
    aggregate,
    copy_attention,
    load_dump,
    load_dumps,
    project_node_step,
    save_dump,
)
from codegaze.model_attention import (
    NODE_LEVEL,
    TOKEN_LEVEL,
    dump_from_doc,
    dump_to_doc,
    validate_against_snippet,
)

N = NodeAttention


def node_dump(snippet_id, token_count, steps, copy_steps=None, model="m1"):
    return ModelAttentionDump(
        snippet_id=snippet_id,
        model_id=model,
        kind=NODE_LEVEL,
        token_count=token_count,
        steps=tuple(tuple(s) for s in steps),
        copy_steps=None if copy_steps is None else tuple(tuple(s) for s in copy_steps),
    )


def random_step(rng, token_count, max_nodes):
    step = []
    for nid in range(rng.randrange(1, max_nodes + 1)):
        lo = rng.randrange(token_count)
        hi = rng.randrange(lo, token_count)
        terminal = lo == hi and rng.random() < 0.4
        step.append(N(nid, rng.random() * 10, lo, hi, terminal=terminal, direct=terminal))
    return tuple(step)


class TestProjection:
    def test_equal_division_over_span(self, flat_snippet):
        step = project_node_step(flat_snippet, [N(0, 15.0, 0, 2)])
        assert step.as_floats()[:3] == (5.0, 5.0, 5.0)
        assert all(w == 0.0 for w in step.as_floats()[3:])

    def test_terminal_adds_on_top(self, flat_snippet):
        step = project_node_step(
            flat_snippet, [N(0, 15.0, 0, 2), N(1, 3.0, 0, 0, terminal=True, direct=True)]
        )
        assert step.as_floats()[:3] == (8.0, 5.0, 5.0)

    def test_direct_flag_does_not_change_arithmetic(self, flat_snippet):
        a = project_node_step(flat_snippet, [N(0, 4.0, 2, 5, terminal=False, direct=False)])
        b = project_node_step(flat_snippet, [N(0, 4.0, 2, 5, terminal=False, direct=True)])
        assert a.weights == b.weights

    def test_mass_conserved_exactly(self):
        rng = random.Random(42)
        for _ in range(50):
            token_count = rng.randrange(5, 80)
            step = random_step(rng, token_count, 500)
            projected = ModelAttentionDump(
                snippet_id="s",
                model_id="m",
                kind=NODE_LEVEL,
                token_count=token_count,
                steps=(step,),
            )
            total = sum(Fraction(n.weight) for n in step)
            from codegaze.model_attention import _project_nodes

            assert _project_nodes(token_count, step).total() == total
            agg = aggregate(projected)
            assert math.fsum(agg.weights) == pytest.approx(float(total), rel=1e-9)

    def test_matches_brute_force(self):
        rng = random.Random(7)
        for _ in range(100):
            token_count = rng.randrange(3, 40)
            step = random_step(rng, token_count, 60)
            oracle = [
                math.fsum(
                    n.weight / (n.span_hi - n.span_lo + 1)
                    for n in step
                    if n.span_lo <= i <= n.span_hi
                )
                for i in range(token_count)
            ]
            from codegaze.model_attention import _project_nodes

            got = _project_nodes(token_count, step).as_floats()
            assert got == pytest.approx(oracle, rel=1e-9, abs=1e-12)

    def test_span_beyond_snippet_rejected(self, flat_snippet):
        with pytest.raises(SpanError):
            project_node_step(flat_snippet, [N(0, 1.0, 10, 14)])

    def test_node_validation(self):
        with pytest.raises(SpanError):
            N(0, 1.0, 3, 2)
        with pytest.raises(SpanError):
            N(0, 1.0, -1, 2)
        with pytest.raises(SpanError):  # terminal spanning two tokens
            N(0, 1.0, 2, 3, terminal=True)
        with pytest.raises(DumpError):
            N(0, -0.5, 0, 0)
        with pytest.raises(DumpError):
            N(0, float("nan"), 0, 0)


class TestAggregate:
    def test_identical_steps_reproduce_step_bitwise(self, flat_snippet):
        rng = random.Random(3)
        step = random_step(rng, 12, 40)
        one = node_dump("flat", 12, [step])
        five = node_dump("flat", 12, [step] * 5)
        single = project_node_step(flat_snippet, step).as_floats()
        assert aggregate(one).weights == single
        assert aggregate(five).weights == single

    def test_token_level_mean(self):
        dump = ModelAttentionDump(
            snippet_id="s",
            model_id="m",
            kind=TOKEN_LEVEL,
            token_count=2,
            steps=((0.2, 0.8), (0.6, 0.4)),
        )
        assert aggregate(dump).weights == pytest.approx((0.4, 0.6), abs=1e-12)

    def test_step_order_indifference(self):
        rng = random.Random(11)
        for _ in range(20):
            token_count = rng.randrange(4, 30)
            steps = [random_step(rng, token_count, 30) for _ in range(rng.randrange(2, 6))]
            base = aggregate(node_dump("s", token_count, steps))
            shuffled = steps[:]
            rng.shuffle(shuffled)
            assert aggregate(node_dump("s", token_count, shuffled)).weights == base.weights

    def test_node_order_within_step_indifferent(self):
        rng = random.Random(12)
        token_count = 20
        step = list(random_step(rng, token_count, 80))
        base = aggregate(node_dump("s", token_count, [tuple(step)]))
        rng.shuffle(step)
        assert aggregate(node_dump("s", token_count, [tuple(step)])).weights == base.weights

    def test_projection_linear_in_weights(self):
        rng = random.Random(13)
        token_count = 15
        a = random_step(rng, token_count, 30)
        b = random_step(rng, token_count, 30)
        from codegaze.model_attention import _project_nodes

        joint = _project_nodes(token_count, a + b)
        split = [
            x + y
            for x, y in zip(
                _project_nodes(token_count, a).weights,
                _project_nodes(token_count, b).weights,
            )
        ]
        assert list(joint.weights) == split

    def test_empty_dump(self):
        dump = node_dump("s", 5, [])
        with pytest.raises(EmptyDump):
            aggregate(dump)

    def test_copy_attention(self):
        main = ((1.0, 0.0),)
        copy = ((0.25, 0.75),)
        dump = ModelAttentionDump("s", "m", TOKEN_LEVEL, 2, main, copy)
        assert copy_attention(dump).weights == (0.25, 0.75)
        assert aggregate(dump).weights == (1.0, 0.0)
        without = ModelAttentionDump("s", "m", TOKEN_LEVEL, 2, main)
        with pytest.raises(MissingCopyAttention):
            copy_attention(without)

    def test_dump_validation(self):
        with pytest.raises(DumpError):
            ModelAttentionDump("s", "m", "word_level", 2, ((0.5, 0.5),))
        with pytest.raises(DumpError):
            ModelAttentionDump("s", "m", TOKEN_LEVEL, 0, ())
        with pytest.raises(DumpError):  # ragged token step
            ModelAttentionDump("s", "m", TOKEN_LEVEL, 3, ((0.5, 0.5),))
        with pytest.raises(DumpError):  # negative token weight
            ModelAttentionDump("s", "m", TOKEN_LEVEL, 2, ((0.5, -0.5),))
        with pytest.raises(SpanError):  # node span past token_count
            node_dump("s", 4, [(N(0, 1.0, 2, 6),)])


class TestSerialization:
    def test_node_level_round_trip(self, tmp_path):
        rng = random.Random(21)
        dump = node_dump(
            "snip",
            25,
            [random_step(rng, 25, 20) for _ in range(3)],
            copy_steps=[random_step(rng, 25, 20)],
        )
        path = tmp_path / "d.json"
        save_dump(dump, path)
        loaded = load_dump(path)
        assert loaded == dump
        assert aggregate(loaded).weights == aggregate(dump).weights
        assert copy_attention(loaded).weights == copy_attention(dump).weights

    def test_token_level_round_trip(self, tmp_path):
        dump = ModelAttentionDump("s", "m", TOKEN_LEVEL, 3, ((0.1, 0.2, 0.7),))
        path = tmp_path / "t.json"
        save_dump(dump, path)
        assert load_dump(path) == dump

    def test_doc_errors(self):
        with pytest.raises(DumpError):
            dump_from_doc({"format_version": 2})
        with pytest.raises(DumpError):
            dump_from_doc({"format_version": 1, "snippet_id": "s"})
        doc = dump_to_doc(node_dump("s", 4, [(N(0, 1.0, 0, 3),)]))
        doc["steps"][0][0]["span"] = [0]
        with pytest.raises(DumpError):
            dump_from_doc(doc)

    def test_load_dumps_directory(self, tmp_path):
        for name in ("b", "a"):
            save_dump(
                ModelAttentionDump(name, "m", TOKEN_LEVEL, 1, ((1.0,),)),
                tmp_path / f"{name}.json",
            )
        loaded = load_dumps(tmp_path)
        assert [d.snippet_id for d in loaded] == ["a", "b"]
        with pytest.raises(DumpError):
            load_dumps(tmp_path / "missing")

    def test_validate_against_snippet(self, flat_snippet):
        good = ModelAttentionDump("flat", "m", TOKEN_LEVEL, 12, ((0.0,) * 12,))
        validate_against_snippet(good, flat_snippet)
        with pytest.raises(DumpError):
            validate_against_snippet(
                ModelAttentionDump("other", "m", TOKEN_LEVEL, 12, ((0.0,) * 12,)),
                flat_snippet,
            )
        with pytest.raises(DumpError):
            validate_against_snippet(
                ModelAttentionDump("flat", "m", TOKEN_LEVEL, 5, ((0.0,) * 5,)),
                flat_snippet,
            )
