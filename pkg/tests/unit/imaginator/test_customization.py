"""Imaginator 客製化與預訓練測試"""

import pytest
import torch

from src.main.python.core.exceptions import CustomizationError
from src.main.python.data.sampler import sample_episode
from src.main.python.imaginator.customization import (
    VisualPair,
    customize,
    default_customize_steps,
    fit_imaginator,
    pairs_from_episode,
    pretrain,
)
from src.main.python.imaginator.imaginator import build_imaginator
from tests.helpers import make_config


@pytest.fixture
def episode(color_dataset):
    return sample_episode(color_dataset, n_ways=2, k_shots=4, seed=0)


@pytest.fixture
def imaginator(toy_config):
    return build_imaginator(toy_config.imaginator, resolution=4, seed=0)


def _snapshot(module):
    return {name: p.detach().clone() for name, p in module.named_parameters()}


def test_pairs_follow_support_order(episode):
    pairs = pairs_from_episode(episode, resolution=4)
    assert [p.key for p in pairs] == [i.id for i in episode.support if i.image_ref]
    assert pairs[0].image.shape == (3, 4, 4)
    assert pairs[0].target is pairs[0].image


def test_customize_touches_only_conditioning_encoder(episode, imaginator):
    config = make_config(imaginator={"customize_steps": 200})
    before = _snapshot(imaginator)
    losses = []
    customized = customize(imaginator, episode, config, on_step=lambda step, loss: losses.append(loss))

    assert len(losses) == 200
    changed = []
    for name, param in customized.named_parameters():
        if customized.trainable_mask[name]:
            if not torch.equal(param, before[name]):
                changed.append(name)
        else:
            assert torch.equal(param, before[name]), name
    assert any(name.startswith("cond_encoder.") for name in changed)
    # 輸入的 Imaginator 不被修改
    for name, param in imaginator.named_parameters():
        assert torch.equal(param, before[name])


def test_customize_is_deterministic(episode, imaginator):
    config = make_config(imaginator={"customize_steps": 20})
    a = customize(imaginator, episode, config)
    b = customize(imaginator, episode, config)
    for (name, p), (_, q) in zip(a.named_parameters(), b.named_parameters()):
        assert torch.equal(p, q), name


def test_customize_without_images_fails(imaginator, toy_config):
    with pytest.raises(CustomizationError):
        customize(imaginator, [], toy_config)


def test_synthesized_target_policy(episode, imaginator):
    config = make_config(imaginator={"customize_steps": 5, "target_policy": "synthesized"})
    customized = customize(imaginator, episode, config)
    assert customized is not imaginator


def test_pretrain_updates_every_parameter(episode, imaginator):
    pairs = pairs_from_episode(episode, resolution=4)
    before = _snapshot(imaginator)
    pretrained = pretrain(imaginator, pairs, steps=10, learning_rate=1e-2, seed=0)
    for name, param in pretrained.named_parameters():
        assert not torch.equal(param, before[name]), name
    with pytest.raises(CustomizationError):
        pretrain(imaginator, [], steps=1, learning_rate=1e-2, seed=0)


def test_default_customize_steps():
    assert default_customize_steps(make_config(imaginator={"customize_steps": 7}), 12) == 7
    config = make_config(imaginator={"customize_steps": None, "batch_size": 4}, train={"epochs": 3})
    assert default_customize_steps(config, 10) == 9


def test_accepts_pair_sequences(imaginator, toy_config):
    image = torch.zeros(3, 4, 4, dtype=torch.float64)
    pairs = [VisualPair("p", ["dark", "night"], image, image)]
    customized = customize(imaginator, pairs, toy_config, steps=3)
    assert customized.trainable_mask["cond_encoder.proj.weight"]


def test_batches_follow_one_permutation_per_epoch(imaginator, monkeypatch):
    image = torch.zeros(3, 4, 4, dtype=torch.float64)
    pairs = [VisualPair(f"w{i}", [f"w{i}"], image, image) for i in range(5)]
    seen = []
    loss_fn = imaginator.visual_loss

    def recording_loss(batch, *args):
        seen.append([tokens[0] for tokens in batch])
        return loss_fn(batch, *args)

    monkeypatch.setattr(imaginator, "visual_loss", recording_loss)
    fit_imaginator(imaginator, pairs, imaginator.trainable_parameters(),
                   steps=10, learning_rate=1e-3, batch_size=4, seed=0, stage="customize")

    assert [len(batch) for batch in seen] == [4, 1] * 5
    for first, rest in zip(seen[0::2], seen[1::2]):
        assert sorted(first + rest) == [f"w{i}" for i in range(5)]
