# -*- coding: utf-8 -*-

# Copyright © 2023-2024 the attnfuse authors.

# Permission is hereby granted, free of charge, to any
# person obtaining a copy of this software and associated
# documentation files (the "Software"), to deal in the
# Software without restriction, including without limitation
# the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the
# Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice
# shall be included in all copies or substantial portions of
# the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY
# KIND, EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO THE
# WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR
# PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS
# OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR
# OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR
# OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE
# SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.

"""Utility functions."""

import hashlib
import io
import json
import os
import sys

import natsort
import numpy as np

from .log import LOGGER

try:
    import toml
except ImportError:
    toml = None

__all__ = ('CustomEncoder', 'makedirs', 'sys_decode',
           'get_root_dir', 'load_data', 'dump_json', 'stable_hash',
           'derive_seed', 'sort_users', 'format_number')

ENCODING = sys.getfilesystemencoding() or sys.stdin.encoding
CONF_FILENAME = 'attnfuse.toml'


def sys_decode(thing):
    """Return Unicode."""
    if isinstance(thing, bytes):
        return thing.decode(ENCODING)
    return thing


def makedirs(path):
    """Create a folder and its parents if needed (mkdir -p)."""
    if not path:
        return
    if os.path.exists(path):
        if not os.path.isdir(path):
            raise OSError('Path {0} already exists and is not a folder.'.format(path))
        else:
            return
    try:
        os.makedirs(path)
        return
    except Exception:
        if os.path.isdir(path):
            return
        raise


class CustomEncoder(json.JSONEncoder):
    """JSON encoder that understands numpy values, sets and dataclass-like objects."""

    def default(self, obj):
        """Encode objects the standard encoder rejects."""
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, (set, frozenset)):
            return sorted(obj)
        if hasattr(obj, 'as_dict'):
            return obj.as_dict()
        return super().default(obj)


def dump_json(data, path):
    """Write data as deterministic JSON (sorted keys, repr floats)."""
    makedirs(os.path.dirname(path))
    with io.open(path, 'w', encoding='utf-8') as outf:
        json.dump(data, outf, cls=CustomEncoder, sort_keys=True, indent=2)
        outf.write('\n')


def stable_hash(data) -> str:
    """Return the SHA-256 hex digest of the canonical JSON form of data."""
    canonical = json.dumps(data, cls=CustomEncoder, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def derive_seed(seed: int, *keys) -> int:
    """Derive an independent 32-bit seed from a master seed and labels.

    The result depends only on its arguments, never on call order.
    """
    text = ':'.join([str(seed)] + [str(k) for k in keys])
    digest = hashlib.sha256(text.encode('utf-8')).digest()
    return int.from_bytes(digest[:4], 'little')


def sort_users(user_ids):
    """Sort user identifiers naturally (u2 before u10)."""
    return natsort.natsorted(set(user_ids))


def get_root_dir():
    """Find the experiment root directory by looking for attnfuse.toml."""
    root = os.getcwd()

    while True:
        if os.path.exists(os.path.join(root, CONF_FILENAME)):
            return root
        else:
            basedir = os.path.split(root)[0]
            # Top directory, already checked
            if basedir == root:
                break
            root = basedir

    return None


def load_data(path):
    """Given path to a TOML or JSON file, load data from it."""
    ext = os.path.splitext(path)[-1]
    if ext in {'.toml', '.tml'}:
        if toml is None:
            LOGGER.error('In order to read {0}, you must install the "toml" Python package.'.format(path))
            return {}
        loader = toml
    elif ext in {'.json', '.js'}:
        loader = json
    else:
        return None
    with io.open(path, 'r', encoding='utf-8-sig') as inf:
        return loader.load(inf)


def format_number(value) -> str:
    """Format a number for text output so that parsing it back is exact."""
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)
