from __future__ import annotations

import json
import random

import pytest

from darkgram.classify import (
    ArtifactLabelMismatchError,
    ArtifactMissingFileError,
    ArtifactVersionError,
    ClassificationResult,
    CorpusError,
    LabeledCorpus,
    UnsupportedBackendError,
    classify_post,
    classify_text,
    evaluate,
    evaluate_gate,
    featurize,
    load_external_backend,
    macro_f1,
    save_baseline,
    stratified_split,
    train_baseline,
)
from darkgram.core import BENIGN_LABEL, CANONICAL_LABELS, AttachmentKind, CacCategory
from helpers import generate_corpus, make_attachment, make_post


class TestFeaturize:
    def test_plain_text(self):
        assert set(featurize("Free Netflix accounts")) == {"free", "netflix", "accounts"}

    def test_filename_fallback_when_no_text(self):
        tokens = featurize("", ["spotify_premium_mod.apk"])
        assert set(tokens) == {"spotify", "premium", "mod", "apk"}

    def test_empty(self):
        assert featurize("", []) == ()

    def test_filenames_ignored_when_text_is_rich(self):
        tokens = featurize("three word tokens here", ["secret_payload.zip"])
        assert "secret" not in tokens

    def test_filenames_join_short_text(self):
        tokens = featurize("new drop", ["combo_50k.txt"])
        assert "combo" in tokens and "new" in tokens

    def test_deterministic(self):
        args = ("Some Text Here", ["a_b.zip"])
        assert featurize(*args) == featurize(*args)


def _toy_corpus() -> LabeledCorpus:
    items = []
    keyword = {
        BENIGN_LABEL: "weather",
        "CredentialCompromise": "combo",
        "PiratedSoftware": "crack",
        "BlackhatResources": "exploit",
        "PiratedMedia": "episode",
        "SocialMediaManipulation": "followers",
    }
    for label, word in keyword.items():
        for i in range(4):
            items.append((f"{word} item number {i}", label))
    return LabeledCorpus(tuple(items))


class TestTrainBaseline:
    def test_separable_corpus_train_accuracy_one(self):
        corpus = _toy_corpus()
        model = train_baseline(corpus, seed=1)
        for text, label in corpus.items:
            result = classify_text(model, text)
            predicted = result.category.value if result.is_ca else BENIGN_LABEL
            assert predicted == label

    def test_same_seed_identical_predictions(self):
        corpus = _toy_corpus()
        m1 = train_baseline(corpus, seed=5)
        m2 = train_baseline(corpus, seed=5)
        probes = ["combo leak test", "crack app", "nothing here", "episode drop", "followers boost"]
        for probe in probes:
            assert classify_text(m1, probe) == classify_text(m2, probe)

    def test_training_order_irrelevant(self):
        corpus = _toy_corpus()
        shuffled = list(corpus.items)
        random.Random(99).shuffle(shuffled)
        m1 = train_baseline(corpus, seed=5)
        m2 = train_baseline(LabeledCorpus(tuple(shuffled)), seed=5)
        for probe in ["combo dump", "new exploit kit", "fresh episode", "just weather talk"]:
            assert classify_text(m1, probe) == classify_text(m2, probe)

    def test_undersized_label_rejected(self):
        items = list(_toy_corpus().items)
        items = [it for it in items if it[1] != "PiratedMedia"] + [("episode x", "PiratedMedia")]
        with pytest.raises(CorpusError, match="PiratedMedia"):
            train_baseline(LabeledCorpus(tuple(items)), seed=1)

    def test_fixture_corpus_macro_f1(self, fixture_corpus, baseline_model):
        table = evaluate(baseline_model, fixture_corpus.test_view())
        assert macro_f1(table) >= 0.90


class TestClassifyPost:
    def test_credential_post(self, baseline_model):
        post = make_post("chan", 1, "11,000 Hotmail account credentials, file attached")
        result = classify_post(baseline_model, post)
        assert result.is_ca
        assert result.category is CacCategory.CredentialCompromise

    def test_empty_post_is_benign(self, baseline_model):
        result = classify_post(baseline_model, make_post("chan", 1, ""))
        assert not result.is_ca
        assert result.category is None

    def test_benign_newsletter(self, baseline_model):
        post = make_post("chan", 2, "weekly digest: gardening news plus a community meetup about chess")
        assert not classify_post(baseline_model, post).is_ca

    def test_filename_only_post(self, baseline_model):
        post = make_post(
            "chan", 3, "", attachments=[make_attachment("spotify_premium_mod.apk", AttachmentKind.Archive)]
        )
        result = classify_post(baseline_model, post)
        assert result.is_ca
        assert result.category is CacCategory.PiratedSoftware

    def test_stage_coupling_invariant(self, baseline_model, fixture_corpus):
        for text, _ in fixture_corpus.items[:300]:
            result = classify_text(baseline_model, text)
            assert result.is_ca == (result.category is not None)

    def test_confidence_sums_per_stage(self, baseline_model, fixture_corpus):
        for text, _ in fixture_corpus.items[:200]:
            result = classify_text(baseline_model, text)
            gate = result.confidence["Benign"] + result.confidence["CA"]
            assert abs(gate - 1.0) < 1e-6
            if result.is_ca:
                stage2 = sum(result.confidence[c.value] for c in CacCategory)
                assert abs(stage2 - 1.0) < 1e-6

    def test_repeated_calls_identical(self, baseline_model):
        post = make_post("chan", 9, "fresh gmail combo list US UK")
        assert classify_post(baseline_model, post) == classify_post(baseline_model, post)


class _LookupBackend:
    """Returns the true label for texts it knows; benign otherwise."""

    backend_id = "lookup"

    def __init__(self, items):
        self.table = {featurize(text): label for text, label in items}

    def predict(self, tokens):
        label = self.table.get(tuple(tokens), BENIGN_LABEL)
        if label == BENIGN_LABEL:
            return ClassificationResult(False, None, {"Benign": 1.0, "CA": 0.0}, self.backend_id)
        confidence = {"Benign": 0.0, "CA": 1.0}
        confidence.update({c.value: (1.0 if c.value == label else 0.0) for c in CacCategory})
        return ClassificationResult(True, CacCategory(label), confidence, self.backend_id)


class _ConstantBackend:
    backend_id = "constant"

    def __init__(self, category: CacCategory):
        self.category = category

    def predict(self, tokens):
        confidence = {"Benign": 0.0, "CA": 1.0}
        confidence.update({c.value: (1.0 if c is self.category else 0.0) for c in CacCategory})
        return ClassificationResult(True, self.category, confidence, self.backend_id)


def _oracle_metrics(pairs):
    """Brute-force confusion-matrix recomputation (independent of evaluate)."""
    labels = [c.value for c in CacCategory]
    n = len(pairs)
    rows = {}
    for label in labels:
        tp = sum(1 for t, p in pairs if t == label and p == label)
        fp = sum(1 for t, p in pairs if t != label and p == label)
        fn = sum(1 for t, p in pairs if t == label and p != label)
        tn = n - tp - fp - fn
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        rows[label] = ((tp + tn) / n, precision, recall, f1)
    macro_p = sum(rows[c][1] for c in labels) / len(labels)
    macro_r = sum(rows[c][2] for c in labels) / len(labels)
    overall_f1 = 2 * macro_p * macro_r / (macro_p + macro_r) if macro_p + macro_r else 0.0
    exact = sum(1 for t, p in pairs if t == p) / n
    rows["Overall"] = (exact, macro_p, macro_r, overall_f1)
    return rows


class TestEvaluate:
    def test_perfect_model_all_ones(self):
        corpus = _toy_corpus()
        table = evaluate(_LookupBackend(corpus.items), corpus)
        for row in table.rows:
            assert row.accuracy == 1.0
            assert row.f1 == 1.0

    def test_constant_model_on_balanced_set(self):
        corpus = generate_corpus(30, seed=3)
        table = evaluate(_ConstantBackend(CacCategory.PiratedMedia), corpus)
        overall = table.row("Overall")
        assert abs(overall.accuracy - 1 / 6) < 0.02

    def test_matches_confusion_matrix_oracle(self, baseline_model, fixture_corpus):
        test = fixture_corpus.test_view()
        pairs = []
        for text, label in test.items:
            result = classify_text(baseline_model, text)
            pairs.append((label, result.category.value if result.is_ca else BENIGN_LABEL))
        oracle = _oracle_metrics(pairs)
        table = evaluate(baseline_model, test)
        for row in table.rows:
            acc, prec, rec, f1 = oracle[row.label]
            assert abs(row.accuracy - acc) <= 0.02
            assert abs(row.precision - prec) <= 0.02
            assert abs(row.recall - rec) <= 0.02
            assert abs(row.f1 - f1) <= 0.02

    def test_gate_row_reported_separately(self, baseline_model, fixture_corpus):
        row = evaluate_gate(baseline_model, fixture_corpus.test_view())
        assert row.label == "Gate"
        assert row.accuracy >= 0.90

    def test_csv_layout(self, baseline_model, fixture_corpus):
        table = evaluate(baseline_model, fixture_corpus.test_view())
        csv_text = table.to_csv()
        lines = csv_text.strip().splitlines()
        assert lines[0] == "Category,Accuracy,Precision,Recall,F1-score"
        assert lines[1].startswith("CredentialCompromise,")
        assert lines[-1].startswith("Overall,")

    def test_empty_test_rejected(self, baseline_model):
        with pytest.raises(CorpusError):
            evaluate(baseline_model, LabeledCorpus(()))


class TestSplit:
    def test_stratified_ratio(self):
        corpus = generate_corpus(100, seed=8)
        split = stratified_split(corpus, 0.70, seed=8)
        by_label_train = {}
        for i in split.split.train:
            by_label_train[split.items[i][1]] = by_label_train.get(split.items[i][1], 0) + 1
        assert set(by_label_train.values()) == {70}
        assert len(split.split.train) + len(split.split.test) == len(corpus.items)

    def test_split_disjoint_enforced(self):
        from darkgram.classify import CorpusSplit

        with pytest.raises(CorpusError):
            LabeledCorpus(
                (("a", BENIGN_LABEL), ("b", BENIGN_LABEL)),
                CorpusSplit(frozenset({0, 1}), frozenset({1})),
            )


class TestArtifacts:
    def test_round_trip_predictions(self, tmp_path, baseline_model, fixture_corpus):
        artifact = tmp_path / "model"
        save_baseline(baseline_model, artifact)
        loaded = load_external_backend(artifact)
        for text, _ in fixture_corpus.items[:100]:
            assert classify_text(loaded, text) == classify_text(baseline_model, text)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ArtifactMissingFileError):
            load_external_backend(tmp_path / "nope")

    def test_missing_model_file(self, tmp_path, baseline_model):
        artifact = tmp_path / "model"
        save_baseline(baseline_model, artifact)
        (artifact / "model.bin").unlink()
        with pytest.raises(ArtifactMissingFileError):
            load_external_backend(artifact)

    def test_label_order_mismatch(self, tmp_path, baseline_model):
        artifact = tmp_path / "model"
        save_baseline(baseline_model, artifact)
        manifest = json.loads((artifact / "manifest.json").read_text())
        manifest["labels"] = list(reversed(CANONICAL_LABELS))
        (artifact / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(ArtifactLabelMismatchError):
            load_external_backend(artifact)

    def test_version_mismatch(self, tmp_path, baseline_model):
        artifact = tmp_path / "model"
        save_baseline(baseline_model, artifact)
        manifest = json.loads((artifact / "manifest.json").read_text())
        manifest["format_version"] = 99
        (artifact / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(ArtifactVersionError):
            load_external_backend(artifact)

    def test_unsupported_backend(self, tmp_path, baseline_model):
        artifact = tmp_path / "model"
        save_baseline(baseline_model, artifact)
        manifest = json.loads((artifact / "manifest.json").read_text())
        manifest["backend_id"] = "mystery"
        (artifact / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(UnsupportedBackendError):
            load_external_backend(artifact)
