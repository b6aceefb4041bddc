"""Trainer 測試（staged / joint / 訓練模態 / 發散處理）"""

import pytest
import torch

from src.main.python.classifier.model import VFEventModel, build_model
from src.main.python.core.exceptions import ConfigurationError, InputError, TrainingError
from src.main.python.data.dataset import Instance
from src.main.python.data.sampler import Episode, sample_episode
from src.main.python.training.trainer import Trainer, load_support_images, support_pool, train
from tests.helpers import make_config


@pytest.fixture(scope="module")
def episode(color_dataset):
    return sample_episode(color_dataset, n_ways=2, k_shots=4, seed=0)


def _config(**train):
    return make_config(train={"epochs": 3, **train}, imaginator={"customize_steps": 10})


def test_zero_epochs_returns_initialization(episode):
    config = _config(epochs=0)
    model, log = train(episode, config)
    reference = build_model(config, episode.event_types, texts=[i.text for i in episode.support])
    assert log.records == []
    for (name, p), (_, q) in zip(model.named_parameters(), reference.named_parameters()):
        assert torch.equal(p, q), name


def test_staged_training_logs_both_stages(episode):
    model, log = train(episode, _config())
    stages = [r.stage for r in log.records]
    assert stages[:10] == ["customize"] * 10
    assert set(stages[10:]) == {"finetune"}
    assert [r.step for r in log.records] == list(range(len(log.records)))
    assert all(r.visual_loss is None for r in log.stage_records("finetune"))
    assert not model.training


def test_joint_with_zero_beta_matches_staged_classifier(episode):
    staged, _ = train(episode, _config(mode="staged"))
    joint, log = train(episode, _config(mode="joint", beta=0.0))
    assert {r.stage for r in log.records} == {"joint"}
    assert all(r.visual_loss is not None for r in log.records)
    for p, q in zip(staged.classifier_parameters(), joint.classifier_parameters()):
        assert torch.equal(p, q)


def test_joint_mode_updates_only_trainable_imaginator_parameters(episode):
    config = _config(mode="joint", beta=1.0)
    initial = build_model(config, episode.event_types, texts=[i.text for i in episode.support])
    model, _ = train(episode, config, init_model=initial)
    for name, param in model.imaginator.named_parameters():
        before = dict(initial.imaginator.named_parameters())[name]
        if name.startswith("cond_encoder."):
            continue
        assert torch.equal(param, before), name
    changed = [
        name for name, param in model.imaginator.named_parameters()
        if name.startswith("cond_encoder.") and not torch.equal(param, dict(initial.imaginator.named_parameters())[name])
    ]
    assert changed


def test_text_only_training_leaves_visual_encoder_untouched(episode):
    config = _config(train_modality="text")
    initial = build_model(config, episode.event_types, texts=[i.text for i in episode.support])
    model, _ = train(episode, config, init_model=initial)
    assert torch.equal(model.backend.visual_proj.weight, initial.backend.visual_proj.weight)
    assert not torch.equal(model.backend.text_proj.weight, initial.backend.text_proj.weight)


def test_training_is_deterministic(episode):
    a, log_a = train(episode, _config())
    b, log_b = train(episode, _config())
    assert log_a.to_dataframe().equals(log_b.to_dataframe())
    for p, q in zip(a.parameters(), b.parameters()):
        assert torch.equal(p, q)


def test_pretrain_stage_is_logged(episode):
    config = make_config(train={"epochs": 1}, imaginator={"customize_steps": 2, "pretrain_steps": 3})
    _, log = train(episode, config)
    assert [r.stage for r in log.records[:5]] == ["pretrain"] * 3 + ["customize"] * 2


def test_mismatched_initial_model(episode):
    config = _config()
    other = build_model(config, ["X", "Y"], texts=["a"])
    with pytest.raises(ConfigurationError):
        train(episode, config, init_model=other)


def test_support_without_images(tmp_path):
    support = [Instance("a", "troops attacked", "Attack", None), Instance("n", "quiet day", "none", None)]
    episode = Episode(support=support, queries=[], n_ways=1, k_shots=1, seed=0, event_types=["Attack"])
    with pytest.raises(InputError):
        load_support_images(episode, _config())


def test_none_support_without_image_uses_zero_image(episode):
    support = list(episode.support)
    support[-1] = Instance(support[-1].id, support[-1].text, "none", None)
    patched = Episode(support, episode.queries, episode.n_ways, episode.k_shots, 0, episode.event_types, episode.image_root)
    images = load_support_images(patched, _config())
    assert torch.equal(images[-1], torch.zeros(3, 4, 4, dtype=torch.float64))
    pool_instances, pool_images = support_pool(patched, images)
    assert len(pool_instances) == len(support) - 1
    assert pool_images.shape[0] == len(support) - 1


def test_divergence_raises_training_error(episode, monkeypatch):
    def diverging(self, *args, **kwargs):
        return torch.tensor(float("nan"), dtype=torch.float64, requires_grad=True)

    monkeypatch.setattr(VFEventModel, "class_loss", diverging)
    with pytest.raises(TrainingError) as info:
        train(episode, _config())
    assert info.value.step == 10
    assert len(info.value.log.stage_records("customize")) == 10


def test_periodic_checkpoints(episode, tmp_path):
    config = _config(checkpoint_every=2, epochs=4)
    _, log = Trainer(config, checkpoint_dir=tmp_path).train(episode)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["checkpoint_epoch002.vfe", "checkpoint_epoch004.vfe"]
    assert log.final_checkpoint.endswith("checkpoint_epoch004.vfe")
