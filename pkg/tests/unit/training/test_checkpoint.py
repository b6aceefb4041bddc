"""checkpoint 封存檔測試"""

import json
import zipfile

import pytest
import torch

from src.main.python.core.exceptions import CheckpointError
from src.main.python.data.sampler import sample_episode
from src.main.python.training.checkpoint import FORMAT_VERSION, load_checkpoint, read_manifest, save_checkpoint
from src.main.python.training.trainer import load_support_images, support_pool, train
from tests.helpers import make_config


@pytest.fixture(scope="module")
def trained(color_dataset):
    config = make_config(train={"epochs": 2}, imaginator={"customize_steps": 5})
    episode = sample_episode(color_dataset, n_ways=2, k_shots=3, seed=0)
    images = load_support_images(episode, config)
    model, _ = train(episode, config)
    return config, model, episode, images


def test_save_twice_gives_identical_bytes(trained, tmp_path):
    config, model, episode, images = trained
    pool = support_pool(episode, images)
    a = save_checkpoint(model, tmp_path / "a.vfe", config, *pool)
    b = save_checkpoint(model, tmp_path / "b.vfe", config, *pool)
    assert a.read_bytes() == b.read_bytes()


def test_round_trip_preserves_predictions_and_metadata(trained, tmp_path):
    config, model, episode, images = trained
    path = save_checkpoint(model, tmp_path / "m.vfe", config, *support_pool(episode, images))
    loaded = load_checkpoint(path)

    assert loaded.model.event_types == model.event_types
    assert loaded.model.imaginator.trainable_mask == model.imaginator.trainable_mask
    for name, param in loaded.model.imaginator.named_parameters():
        assert param.requires_grad == model.imaginator.trainable_mask[name]
    for (name, p), (_, q) in zip(model.named_parameters(), loaded.model.named_parameters()):
        assert torch.equal(p, q), name

    query = episode.support[0]
    assert model.predict(query.tokens, images[0]).probs == loaded.model.predict(query.tokens, images[0]).probs
    assert [i.id for i in loaded.pool_instances] == [i.id for i in episode.support]
    assert torch.equal(loaded.pool_images, torch.stack(images))

    manifest = read_manifest(path)
    assert manifest["format_version"] == FORMAT_VERSION
    assert manifest["imaginator"]["schedule"] == {"kind": "cosine", "num_steps": 100}
    assert manifest["imaginator"]["omega"] == 1.0
    assert manifest["config"]["train"]["epochs"] == 2


def test_loaded_config_keeps_structure_and_drops_pretraining(trained, tmp_path):
    config, model, _, _ = trained
    path = save_checkpoint(model, tmp_path / "m.vfe", config)
    user = make_config(encoder={"text_dim": 99}, imaginator={"pretrain_steps": 10}, train={"seed": 5})
    loaded = load_checkpoint(path, user)
    assert loaded.config.encoder.text_dim == 16
    assert loaded.config.imaginator.pretrain_steps == 0
    assert loaded.config.train.seed == 5
    assert loaded.pool_instances == []
    assert loaded.pool_images is None


def test_unreadable_checkpoints(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing.vfe")

    garbage = tmp_path / "garbage.vfe"
    garbage.write_bytes(b"definitely not a zip")
    with pytest.raises(CheckpointError):
        load_checkpoint(garbage)

    future = tmp_path / "future.vfe"
    with zipfile.ZipFile(future, "w") as archive:
        archive.writestr("manifest.json", json.dumps({"format_version": FORMAT_VERSION + 1}))
    with pytest.raises(CheckpointError, match="format version"):
        load_checkpoint(future)


def _rewrite_manifest(source, target, edit):
    with zipfile.ZipFile(source, "r") as original, zipfile.ZipFile(target, "w") as rewritten:
        for name in original.namelist():
            payload = original.read(name)
            if name == "manifest.json":
                manifest = json.loads(payload.decode("utf-8"))
                edit(manifest)
                payload = json.dumps(manifest).encode("utf-8")
            rewritten.writestr(name, payload)
    return target


def test_stored_schedule_descriptor_is_checked_on_load(trained, tmp_path):
    config, model, _, _ = trained
    path = save_checkpoint(model, tmp_path / "m.vfe", config)
    assert read_manifest(path)["imaginator"]["schedule"] == {"kind": "cosine", "num_steps": 100}
    loaded = load_checkpoint(path)
    assert loaded.model.imaginator.schedule.descriptor() == model.imaginator.schedule.descriptor()
    assert loaded.model.imaginator.omega == model.imaginator.omega

    def other_kind(manifest):
        manifest["imaginator"]["schedule"]["kind"] = "linear"

    def missing_schedule(manifest):
        del manifest["imaginator"]["schedule"]

    with pytest.raises(CheckpointError, match="does not match"):
        load_checkpoint(_rewrite_manifest(path, tmp_path / "kind.vfe", other_kind))
    with pytest.raises(CheckpointError, match="descriptor"):
        load_checkpoint(_rewrite_manifest(path, tmp_path / "bare.vfe", missing_schedule))
