"""
Helper utilities for attnfuse tests.

Alongside a contextmanager to switch directories this module builds small
in-memory feature banks and datasets with a planted signal.
"""

import io
import os
from contextlib import contextmanager

import numpy as np

from attnfuse.dataset import FeatureBank
from attnfuse.fuse import FeatureMode
from attnfuse.synth import CategorySignal, SynthSpec

__all__ = ["cd", "write_file", "make_bank", "small_spec"]


@contextmanager
def cd(path):
    old_dir = os.getcwd()
    os.chdir(path)
    yield
    os.chdir(old_dir)


def write_file(path, text):
    os.makedirs(os.path.dirname(str(path)), exist_ok=True)
    with io.open(str(path), "w", encoding="utf-8") as outf:
        outf.write(text)
    return str(path)


def make_bank(n_users=4, per_user=40, shifts=None, width=3, seed=0, mode=FeatureMode.LOCAL):
    """A feature bank whose categories are Gaussian with class means +-shift.

    Labels alternate High/Low inside every user, so each user holds both.
    """
    shifts = shifts if shifts is not None else {"EB": 1.0, "Exp": 1.0}
    rng = np.random.default_rng(seed)
    n = n_users * per_user
    users = np.array(["user{0}".format(k // per_user + 1) for k in range(n)], dtype=object)
    labels = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    features = {}
    for category, shift in shifts.items():
        features[category] = rng.normal(size=(n, width)) + labels[:, None] * shift
    return FeatureBank(
        window_ids=["{0}/session1/{1}".format(u, k) for k, u in enumerate(users)],
        users=users,
        band=np.where(labels > 0, 90.0, 10.0),
        labels=labels,
        features=features,
        mode=mode,
    )


def small_spec(n_users=4, seconds=240, **signals):
    """Few users, short sessions, two categories unless given."""
    if not signals:
        signals = {
            "EB": CategorySignal(0.3, -0.02, 0.1),
            "Exp": CategorySignal(0.0, 0.05, 0.5),
        }
    return SynthSpec(n_users=n_users, session_seconds=seconds, frame_rate=2.0, signals=signals)
