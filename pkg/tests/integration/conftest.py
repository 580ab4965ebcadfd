import os

import pytest

from attnfuse import __main__

from .helper import cd, write_config

EXPERIMENT_CONFIG = """\
DATA_FOLDER = "data"
OUTPUT_FOLDER = "output"
CACHE_FOLDER = "cache"
WINDOW_LENGTH = 30
CATEGORIES = ["EB", "H"]
C_GRID = [0.01, 1.0]
MLP_EPOCHS = 50
"""

SYNTH_SETTINGS = """\
n_users = 4
session_seconds = 240
frame_rate = 2.0

[signals.EB]
accuracy = 0.95
mean = 0.5
noise = 0.2
direction = -1

[signals.H]
accuracy = 0.8
mean = 0.5
noise = 0.3

[signals.Exp]
coupling = 0.0
noise = 0.5
"""


@pytest.fixture(scope="module")
def target_dir(tmp_path_factory):
    """An experiment folder with a configuration and a generated dataset."""
    target = str(tmp_path_factory.mktemp("integration"))
    write_config(target, EXPERIMENT_CONFIG)
    spec = os.path.join(target, "synth.toml")
    with open(spec, "w", encoding="utf-8") as outf:
        outf.write(SYNTH_SETTINGS)
    with cd(target):
        assert __main__.main(["synth", "--spec", spec, "--seed", "5"]) == 0
    return target


@pytest.fixture(scope="module")
def output_dir(target_dir):
    return os.path.join(target_dir, "output")
