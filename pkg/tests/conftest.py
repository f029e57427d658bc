import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import json

import pytest

from rxread.corpus import default_charset
from rxread.nnet import ModelConfig, init_model, save_model
from rxread.pipeline import DATA_DIR


@pytest.fixture(scope="session")
def tiny_model_path(tmp_path_factory):
    """An untrained small-input model over the default charset, for plumbing tests."""
    cfg = ModelConfig(default_charset().num_classes, (2, 3), (4, 4), input_h=16, input_w=64)
    path = tmp_path_factory.mktemp("models") / "tiny.rxw"
    save_model(init_model(cfg, seed=0), path)
    return path


@pytest.fixture(scope="session")
def output_schema():
    return json.loads((DATA_DIR / "output_schema.json").read_text(encoding="utf-8"))
