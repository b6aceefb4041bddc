"""推論模式測試"""

import pytest
import torch

from src.main.python.classifier.model import build_model
from src.main.python.core.exceptions import ConfigurationError
from src.main.python.data.dataset import Instance
from src.main.python.data.images import load_images, zero_image
from src.main.python.inference.modes import VisualMode
from src.main.python.inference.predictor import infer, infer_batch, query_seed, resolve_visual_context
from src.main.python.inference.records import PredictionRecord, read_predictions, write_predictions
from src.main.python.inference.retrieval import RetrievalPool
from tests.helpers import make_config


@pytest.fixture(scope="module")
def model(joint_dataset):
    model = build_model(make_config(), joint_dataset.event_types, texts=[i.text for i in joint_dataset.instances[:20]])
    model.eval()
    return model


@pytest.fixture(scope="module")
def pool(joint_dataset, model):
    instances = joint_dataset.instances[::40]
    images = torch.stack(load_images([joint_dataset.resolve_image(i) for i in instances], 4))
    return RetrievalPool(list(instances), images)


def test_query_seed_depends_on_id_only():
    assert query_seed(0, "q1") == query_seed(0, "q1")
    assert query_seed(0, "q1") != query_seed(0, "q2")


def test_modes_resolve_expected_context(joint_dataset, model, pool):
    query = joint_dataset.instances[0]
    root = joint_dataset.image_root
    actual = resolve_visual_context(query, "actual", model, pool, 0, root)
    assert actual.shape == (3, 4, 4)
    assert resolve_visual_context(query, VisualMode.TEXTONLY, model, pool, 0, root) is None
    assert torch.equal(resolve_visual_context(query, "zero", model, pool, 0, root), zero_image(4))
    assert torch.equal(resolve_visual_context(query, "retrieve", model, pool, 0, root), pool.images[0])
    imagined = resolve_visual_context(query, "imagine", model, pool, 7, root)
    assert torch.equal(imagined, model.imaginator.synthesize(query.tokens, seed=query_seed(7, query.id)))


def test_textonly_equals_zero_image_with_bias_free_visual_encoder(joint_dataset, model):
    query = joint_dataset.instances[50]
    assert infer(query, "textonly", model).probs == infer(query, "zero", model).probs


def test_missing_prerequisites(model):
    query = Instance("q", "violence today", "Attack", None)
    with pytest.raises(ConfigurationError):
        infer(query, "actual", model)
    with pytest.raises(ConfigurationError):
        infer(query, "visualonly", model)
    with pytest.raises(ConfigurationError):
        infer(query, "retrieve", model, pool=RetrievalPool.empty())
    with pytest.raises(ValueError):
        infer(query, "dream", model)


def test_parallel_inference_is_order_independent(joint_dataset, model, pool):
    queries = joint_dataset.instances[::9]
    serial = infer_batch(queries, "imagine", model, seed=3, pool=pool, image_root=joint_dataset.image_root)
    parallel = infer_batch(queries, "imagine", model, seed=3, pool=pool, image_root=joint_dataset.image_root, workers=4)
    reversed_run = infer_batch(queries[::-1], "imagine", model, seed=3, pool=pool, image_root=joint_dataset.image_root)
    assert [p.probs for p in serial] == [p.probs for p in parallel]
    assert [p.probs for p in serial] == [p.probs for p in reversed_run[::-1]]


def test_prediction_records_jsonl(joint_dataset, model, tmp_path):
    queries = joint_dataset.instances[:3]
    predictions = infer_batch(queries, "zero", model)
    records = [PredictionRecord.from_prediction(q.id, p, "zero") for q, p in zip(queries, predictions)]
    path = write_predictions(records, tmp_path / "out" / "predictions.jsonl")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3
    assert set(records[0].probs) == set(model.labels)
    assert read_predictions(path) == records


def test_prediction_record_validation():
    with pytest.raises(ValueError):
        PredictionRecord(id="q", predicted="A", probs={"A": 0.7, "none": 0.7}, mode="zero")
