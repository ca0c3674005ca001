import os

import numpy as np
import pytest

import bcp

NATIONS = os.environ.get(
    "BCP_NATIONS_DIR",
    os.path.join(os.path.dirname(__file__), "..", "..", "data", "nations"),
)


@pytest.fixture(scope="module")
def nations():
    return bcp.load_dataset(NATIONS)


def test_dataset_shape(nations):
    assert nations.num_entities == 14
    assert nations.num_relations == 55
    s, o, r = nations.triples("test")[0]
    assert nations.is_known_fact(s, o, r)
    aug = bcp.augment_inverse(nations)
    assert aug.num_relations == 110
    assert len(aug.triples("train")) == 2 * len(nations.triples("train"))


def test_train_freeze_and_score(nations):
    cfg = bcp.TrainConfig()
    cfg.kind = bcp.ModelKind.BCP
    cfg.dim = 24
    cfg.epochs = 5
    factors, losses, best = bcp.train(nations, cfg, validate_every=0)
    assert len(losses) == 5 and losses[-1] < losses[0]
    assert factors.subject.shape == (14, 24)
    frozen = bcp.freeze(factors, 0.5)
    assert frozen.subject_bits.shape == (14, 24)
    assert frozen.score(0, 1, 2) == frozen.score_float(0, 1, 2)
    report = bcp.evaluate_ranking(frozen, nations)
    assert 0 < report["mrr"] <= 1
    assert report["hits@1"] <= report["hits@3"] <= report["hits@10"]


def test_model_round_trip(tmp_path):
    f = bcp.DenseFactors(bcp.ModelKind.CP, 3, 2, 4)
    f.subject = np.arange(12, dtype=float).reshape(3, 4)
    path = tmp_path / "m.bcpd"
    bcp.save_model(path, f)
    assert bcp.load_model(path) == f
    q = bcp.vq_apply(f)
    bcp.save_model(tmp_path / "q.bcpb", q)
    back = bcp.load_model(tmp_path / "q.bcpb")
    assert back.vq and back == q


def test_encoder_exact():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 2, size=(3, 3, 2))
    f = bcp.encode(x)
    assert f.dim == 8 * 3 * 2
    checked, mismatches = bcp.verify_reconstruction(f, x)
    assert (checked, mismatches) == (18, 0)
    for i, j, k in np.ndindex(x.shape):
        assert f.score(i, j, k) == x[i, j, k]


def test_pr_auc_and_baseline(nations):
    assert bcp.pr_auc([0.9, 0.8], [0.1]) == 1.0
    assert bcp.pr_auc([0.5] * 4, [0.5] * 4) == 0.5
    assert 0 < bcp.random_scorer_mrr(nations) < 1


def test_cluster_labels():
    x = np.zeros((4, 4, 1), dtype=int)
    x[0, 1, 0] = x[1, 0, 0] = 1
    labels, merges = bcp.single_linkage(bcp.encode(x), 2)
    assert len(labels) == 4 and max(labels) == 1
    assert len(merges) == 3


def test_cli_in_process():
    code, out, err = bcp.run_cli(["encode-verify", "--ne", "2", "--nr", "1", "--exhaustive"])
    assert code == 0
    assert "result: 0 mismatches" in out
    code, _, err = bcp.run_cli(["train"])
    assert code == 2 and "error" in err
