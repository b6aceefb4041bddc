"""同一設定執行兩次：checkpoint 與 CSV 位元組完全相同"""

from pathlib import Path

import pytest

from run_vf_event import main

TOY_CONFIG = str(Path(__file__).parents[2] / "configs" / "toy.yaml")

pytestmark = pytest.mark.slow

QUICK = [
    "-o", "imaginator.num_steps=50",
    "-o", "imaginator.sample_steps=5",
    "-o", "imaginator.customize_steps=20",
    "-o", "train.epochs=3",
    "-o", "eval.queries_per_label=3",
]


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    toy = tmp_path_factory.mktemp("toy")
    assert main(["make-toy", "--preset", "joint_feature", "--per-class", "12", "--out", str(toy),
                 "-o", "data.resolution=4"]) == 0
    manifest = str(toy / "manifest.jsonl")
    outputs = []
    for name in ("first", "second"):
        out = tmp_path_factory.mktemp(name)
        common = ["--config", TOY_CONFIG, "--dataset", manifest, "--out", str(out), *QUICK]
        assert main(["train", *common, "--shots", "3"]) == 0
        assert main(["eval", *common, "--shots", "2", "3", "--seeds", "0", "1",
                     "--mode", "imagine", "retrieve", "zero"]) == 0
        outputs.append(out)
    return outputs


@pytest.mark.parametrize("name", ["model.vfe", "train_log.csv", "results.csv", "summary.csv"])
def test_outputs_are_byte_identical(runs, name):
    first, second = runs
    assert (first / name).read_bytes() == (second / name).read_bytes()


def test_grid_cardinality(runs):
    lines = (runs[0] / "results.csv").read_text(encoding="utf-8").strip().splitlines()
    assert len(lines) == 1 + 2 * 3 * 2
