import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radsum.augment import ExamplePair
from radsum.dataset import (
    SplitResult,
    collate,
    corpus_stats,
    filter_complete,
    split,
    write_split_manifest,
)
from radsum.errors import CorpusTooSmall, EmptyBatch, InvalidRatio
from radsum.reports import COMPARISON, FINDINGS, IMPRESSION, INDICATION, TECHNIQUE


class TestFilterComplete:
    def test_complete_report_kept(self, example_report):
        kept, drops = filter_complete(
            [example_report], [FINDINGS, INDICATION, TECHNIQUE, COMPARISON]
        )
        assert kept == [example_report]
        assert drops == {}

    def test_missing_required_field_counted(self, report_factory):
        report = report_factory("r", {"FINDINGS": "clear."})
        kept, drops = filter_complete([report], [FINDINGS, COMPARISON])
        assert kept == []
        assert drops == {COMPARISON: 1}

    def test_empty_required_list_checks_impression_only(self, report_factory):
        with_imp = report_factory("a", {"IMPRESSION": "normal."})
        without = report_factory("b", {"FINDINGS": "clear."})
        kept, drops = filter_complete([with_imp, without], [])
        assert kept == [with_imp]
        assert drops == {IMPRESSION: 1}

    def test_drop_counts_sum_to_dropped(self, report_factory):
        corpus = [
            report_factory("a", {"FINDINGS": "x.", "COMPARISON": "y.", "IMPRESSION": "z."}),
            report_factory("b", {"FINDINGS": "x."}),
            report_factory("c", {"COMPARISON": "y."}),
            report_factory("d", {"FINDINGS": "x.", "COMPARISON": "y."}),
        ]
        kept, drops = filter_complete(corpus, [FINDINGS, COMPARISON])
        assert sum(drops.values()) == len(corpus) - len(kept)

    def test_idempotent(self, report_factory):
        corpus = [
            report_factory("a", {"FINDINGS": "x.", "IMPRESSION": "z."}),
            report_factory("b", {"FINDINGS": "x."}),
        ]
        once, _ = filter_complete(corpus, [FINDINGS])
        twice, drops = filter_complete(once, [FINDINGS])
        assert twice == once
        assert drops == {}

    def test_empty_body_counts_as_missing(self, report_factory):
        report = report_factory("r", {"FINDINGS": "  ", "IMPRESSION": "z."})
        kept, drops = filter_complete([report], [FINDINGS])
        assert kept == []
        assert drops == {FINDINGS: 1}


class TestSplit:
    def test_80_20(self):
        result = split([f"r{i}" for i in range(10)], 0.8, seed=1)
        assert len(result.train_ids) == 8
        assert len(result.test_ids) == 2

    def test_deterministic(self):
        ids = [f"r{i}" for i in range(50)]
        a = split(ids, 0.8, seed=7)
        b = split(ids, 0.8, seed=7)
        assert a == b
        assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())

    def test_accepts_reports(self, report_factory):
        corpus = [report_factory(f"r{i}", {"IMPRESSION": "x."}) for i in range(4)]
        result = split(corpus, 0.5, seed=0)
        assert sorted(result.train_ids + result.test_ids) == [f"r{i}" for i in range(4)]

    def test_round_half_up(self):
        result = split([f"r{i}" for i in range(5)], 0.5, seed=3)
        assert len(result.train_ids) == 3

    @given(
        n=st.integers(min_value=2, max_value=200),
        ratio=st.floats(min_value=0.05, max_value=0.95),
        seed=st.integers(min_value=0, max_value=2**32),
    )
    @settings(max_examples=150)
    def test_partition(self, n, ratio, seed):
        ids = [f"r{i}" for i in range(n)]
        result = split(ids, ratio, seed)
        train, test = set(result.train_ids), set(result.test_ids)
        assert train.isdisjoint(test)
        assert train | test == set(ids)
        assert len(result.train_ids) == int(ratio * n + 0.5)

    @pytest.mark.parametrize("ratio", [0.0, 1.0, -0.2, 1.5])
    def test_invalid_ratio(self, ratio):
        with pytest.raises(InvalidRatio):
            split(["a", "b"], ratio, seed=0)

    def test_too_small(self):
        with pytest.raises(CorpusTooSmall):
            split(["a"], 0.8, seed=0)

    def test_manifest_round_trip(self, tmp_path):
        result = split([f"r{i}" for i in range(10)], 0.8, seed=1)
        path = tmp_path / "split.json"
        write_split_manifest(result, path)
        assert SplitResult.from_dict(json.loads(path.read_text())) == result


class TestCollate:
    def test_shift_rule(self):
        batch = collate([ExamplePair("p", "a b", "c")], 16, 16)
        assert batch.decoder_input == (("<s>", "c"),)
        assert batch.decoder_target == (("c", "</s>"),)
        assert batch.input_token_matrix == (("a", "b"),)

    def test_padding_and_masks(self):
        pairs = [
            ExamplePair("p1", "a b c", "x"),
            ExamplePair("p2", "a b c d e", "x y z"),
        ]
        batch = collate(pairs, 16, 16)
        assert all(len(row) == 5 for row in batch.input_token_matrix)
        assert [sum(mask) for mask in batch.input_mask] == [3, 5]
        assert batch.input_token_matrix[0][3:] == ("<pad>", "<pad>")

    def test_mask_zero_exactly_on_pad(self):
        pairs = [ExamplePair("p1", "a", "x"), ExamplePair("p2", "a b c", "x y")]
        batch = collate(pairs, 16, 16)
        for matrix, masks in (
            (batch.input_token_matrix, batch.input_mask),
            (batch.decoder_target, batch.target_mask),
        ):
            for row, mask in zip(matrix, masks):
                for token, bit in zip(row, mask):
                    assert (bit == 0) == (token == "<pad>")

    def test_shift_consistency(self):
        pairs = [ExamplePair("p1", "a", "x y z"), ExamplePair("p2", "b", "q")]
        batch = collate(pairs, 16, 16)
        for row_in, row_tgt, mask in zip(
            batch.decoder_input, batch.decoder_target, batch.target_mask
        ):
            for t in range(len(row_tgt) - 1):
                if mask[t] and t + 1 < len(row_in):
                    if row_tgt[t] != "</s>":
                        assert row_in[t + 1] == row_tgt[t]

    def test_truncation_counted(self):
        long_input = " ".join(f"tok{i}" for i in range(600))
        batch = collate([ExamplePair("p", long_input, "x")], 512, 16)
        assert len(batch.input_token_matrix[0]) == 512
        assert batch.n_truncated_inputs == 1
        assert batch.n_truncated_targets == 0

    def test_unpadding_recovers_truncated_tokens(self):
        from radsum.textnorm import normalize, tokenize

        pairs = [
            ExamplePair("p1", "Mild cardiomegaly, no effusion.", "No acute disease."),
            ExamplePair("p2", "Clear lungs bilaterally today", "Normal."),
        ]
        cap = 4
        batch = collate(pairs, cap, cap)
        for pair, row, mask in zip(pairs, batch.input_token_matrix, batch.input_mask):
            real = [tok for tok, bit in zip(row, mask) if bit]
            expected = list(tokenize(normalize(pair.input_text)))[:cap]
            assert real == expected

    def test_empty_batch(self):
        with pytest.raises(EmptyBatch):
            collate([], 16, 16)

    def test_caps_validated(self):
        with pytest.raises(ValueError):
            collate([ExamplePair("p", "a", "b")], 1, 16)

    def test_custom_markers(self):
        batch = collate(
            [ExamplePair("p", "a", "b")], 8, 8,
            start_marker="[S]", end_marker="[E]", pad_marker="[P]",
        )
        assert batch.decoder_input == (("[S]", "b"),)
        assert batch.decoder_target == (("b", "[E]"),)

    def test_batch_json_round_trip(self):
        batch = collate([ExamplePair("p", "a b", "c")], 8, 8)
        doc = json.loads(json.dumps(batch.to_dict()))
        assert doc["pair_ids"] == ["p"]
        assert doc["decoder_input"] == [["<s>", "c"]]


class TestCorpusStats:
    def test_single_report(self, report_factory):
        report = report_factory(
            "r", {"FINDINGS": "one two three four five six seven", "IMPRESSION": "x"}
        )
        stats = corpus_stats([report], [FINDINGS])
        fs = stats.per_field[FINDINGS]
        assert fs.n == 1
        assert fs.mean == 7
        assert fs.maximum == 7
        assert fs.minimum == 7

    def test_combined_is_per_report_sum(self, report_factory):
        corpus = [
            report_factory("a", {"FINDINGS": "one two", "COMPARISON": "three", "IMPRESSION": "x"}),
            report_factory("b", {"FINDINGS": "one", "INDICATION": "two three", "IMPRESSION": "x"}),
        ]
        fields = [FINDINGS, COMPARISON, INDICATION]
        stats = corpus_stats(corpus, fields)
        assert stats.combined_counts == (3, 3)
        assert stats.combined.mean == 3

    def test_absent_field_contributes_zero(self, report_factory):
        corpus = [report_factory("a", {"IMPRESSION": "x"})]
        stats = corpus_stats(corpus, [FINDINGS])
        assert FINDINGS not in stats.per_field
        assert stats.combined_counts == (0,)

    def test_percentiles_ordered(self, report_factory):
        corpus = [
            report_factory(f"r{i}", {"FINDINGS": " ".join(["w"] * (i + 1)), "IMPRESSION": "x"})
            for i in range(20)
        ]
        fs = corpus_stats(corpus, [FINDINGS]).per_field[FINDINGS]
        assert fs.minimum <= fs.median <= fs.p95 <= fs.maximum

    def test_empty_corpus(self):
        stats = corpus_stats([], [FINDINGS])
        assert stats.per_field == {}
        assert stats.combined is None
