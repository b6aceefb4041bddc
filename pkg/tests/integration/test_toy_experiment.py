"""玩具資料集上的端到端實驗：模式排序、想像 vs 零圖片"""

from pathlib import Path

import numpy as np
import pytest

from src.main.python.core.config import load_run_config
from src.main.python.evaluation.experiment import ExperimentRunner

CONFIGS = Path(__file__).parents[2] / "configs"

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def mode_scores(joint_dataset):
    config = load_run_config(str(CONFIGS / "toy.yaml"))
    result = ExperimentRunner(config, joint_dataset).run(
        shots=[20],
        modes=["actual", "textonly", "visualonly", "retrieve", "imagine", "zero"],
        seeds=[0, 1, 2],
    )
    assert not result.failed
    scores = {}
    for report in result.reports:
        scores.setdefault(report.mode, []).append(report.macro_f1)
    return scores


def _mean(scores, mode):
    return float(np.mean(scores[mode]))


def test_actual_images_separate_all_types(mode_scores):
    assert min(mode_scores["actual"]) >= 0.9


def test_each_modality_alone_loses_information(mode_scores):
    assert _mean(mode_scores, "textonly") < _mean(mode_scores, "actual")
    assert _mean(mode_scores, "visualonly") < _mean(mode_scores, "textonly")


def test_retrieval_sits_between_visual_only_and_actual(mode_scores):
    assert _mean(mode_scores, "visualonly") < _mean(mode_scores, "retrieve")
    assert _mean(mode_scores, "retrieve") <= _mean(mode_scores, "actual")


def test_imagined_context_at_least_matches_zero_image(mode_scores):
    assert _mean(mode_scores, "imagine") >= _mean(mode_scores, "zero")
