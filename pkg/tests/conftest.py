"""共用 fixtures：專案路徑、玩具設定與玩具資料集"""

import sys
from pathlib import Path

import pytest

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.main.python.data.dataset import load_dataset
from src.main.python.data.toy_data_generator import generate_preset
from tests.helpers import make_config


@pytest.fixture
def toy_config():
    return make_config()


@pytest.fixture(scope="session")
def joint_manifest(tmp_path_factory) -> Path:
    return generate_preset("joint_feature", tmp_path_factory.mktemp("joint"), per_class=40, resolution=4)


@pytest.fixture(scope="session")
def color_manifest(tmp_path_factory) -> Path:
    return generate_preset("two_class_color", tmp_path_factory.mktemp("color"), per_class=30, resolution=4)


@pytest.fixture(scope="session")
def joint_dataset(joint_manifest):
    return load_dataset(str(joint_manifest))


@pytest.fixture(scope="session")
def color_dataset(color_manifest):
    return load_dataset(str(color_manifest))
