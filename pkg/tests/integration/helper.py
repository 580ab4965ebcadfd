import io
import json
import os

from ..helper import cd

__all__ = ["cd", "read_bytes", "read_report", "write_config"]


def write_config(directory, text):
    """Write attnfuse.toml into an experiment folder."""
    with io.open(os.path.join(directory, "attnfuse.toml"), "w", encoding="utf-8") as outf:
        outf.write(text)


def read_bytes(path):
    with io.open(path, "rb") as inf:
        return inf.read()


def read_report(folder):
    with io.open(os.path.join(folder, "report.json"), encoding="utf-8") as inf:
        return json.load(inf)
