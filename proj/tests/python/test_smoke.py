import math
import os
from pathlib import Path

import pytest

import qintent

DATA = Path(os.environ.get("QINTENT_DATA", Path(__file__).resolve().parents[2] / "data"))


def test_tokenize():
    assert qintent.tokenize("Cheap Flights, Sydney!") == ["cheap", "flights", "sydney"]
    assert qintent.tokenize("!!!") is None


def test_param_counts():
    assert qintent.count_params("rnn1", 100) == 20809
    assert qintent.count_params("rnn3", 300) == 262103
    assert qintent.count_params("cnn1", 48692) == 24349613
    names = [n for n, _ in qintent.parameter_layout("rnn1", 10)]
    assert names[0] == "rnn.w_ih"


def test_metric_and_loss():
    assert qintent.accuracy_threshold(2) == 0.25
    assert qintent.multi_modal_accuracy((0.5, 0.5, 0.0), (1.0, 0.0, 0.0)) == 0
    assert qintent.multi_modal_accuracy((0.3, 0.0, 0.7), (0.5, 0.0, 0.5)) == 1
    y = qintent.softmax([1.0, 2.0, 3.0])
    assert abs(sum(y) - 1) < 1e-12
    t = [0.2, 0.3, 0.5]
    assert qintent.cross_entropy(y, t) >= qintent.entropy(t)
    assert math.isclose(qintent.cross_entropy(t, t), qintent.entropy(t))
    assert qintent.distance([1, 0], [0, 1], "l1") == 2


def test_labeler_v4_example():
    lab = qintent.Labeler("v4", str(DATA / "rules" / "v4.kws"))
    tokens = ["ex", "demo", "cars", "for", "sale"]
    assert lab.match_phrases(tokens) == [("cars", "transactional", 2), ("sale", "transactional", 4)]
    assert lab.label(tokens) == (0, 1, 0)
    assert lab.label_text("zzzz qqqq") is None


def test_gold_from_fixture():
    fx = DATA / "fixtures"
    g = qintent.build_gold(str(fx / "table3_annotations.tsv"), str(fx / "table3_queries.tsv"))
    assert len(g["gt2"]) == 6
    assert len(g["gt3"]) == 3
    rows = {qid: w for qid, _, w in g["gt2"]}
    assert rows[1] == [0.5, 0.0, 0.5]
    assert 6 in g["gt2_excluded"]


def test_errors():
    with pytest.raises(qintent.QintentError):
        qintent.count_params("mlp", 10)
    with pytest.raises(OSError):
        qintent.Labeler("v4", "/nonexistent.kws")
