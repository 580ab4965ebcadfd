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

"""Cache manifest: which intermediate files belong to which settings."""

import json
import os
import shutil
import tempfile
import threading

from . import utils

__all__ = ('Persistor', 'CacheManifest')


class Persistor():
    """A JSON key/value store in a single file.

    Every operation rereads the file, so several processes sharing a cache
    folder see each other's entries. Not meant for large values.
    """

    def __init__(self, path):
        """Keep the store at ``path``; its folder is created on first write."""
        self._path = path
        self._lock = threading.Lock()
        self._data = {}

    @property
    def path(self):
        return self._path

    def get(self, key, default=None):
        """Get data stored in key."""
        with self._lock:
            self._read()
            return self._data.get(key, default)

    def set(self, key, value):
        """Store value in key."""
        with self._lock:
            self._read()
            self._data[key] = value
            self._save()

    def _read(self):
        if os.path.isfile(self._path):
            with open(self._path, encoding='utf-8') as inf:
                self._data = json.load(inf)
        else:
            self._data = {}

    def _save(self):
        dname = os.path.dirname(self._path) or '.'
        utils.makedirs(dname)
        with tempfile.NamedTemporaryFile(dir=dname, delete=False, mode='w+', encoding='utf-8') as outf:
            tname = outf.name
            json.dump(self._data, outf, sort_keys=True, indent=2)
        shutil.move(tname, self._path)


class CacheManifest(Persistor):
    """Manifest of a cache folder, stored as ``manifest.json`` inside it.

    Entries are keyed ``<stage>:<settings hash>`` and name a file relative to
    the cache folder. Entries whose file is gone are treated as absent.
    """

    FILENAME = 'manifest.json'

    def __init__(self, cache_folder):
        self.cache_folder = cache_folder
        super().__init__(os.path.join(cache_folder, self.FILENAME))

    def lookup(self, stage, key):
        """Return the absolute path recorded for (stage, key), if it still exists."""
        entry = self.get('{0}:{1}'.format(stage, key))
        if not entry:
            return None
        path = os.path.join(self.cache_folder, entry['file'])
        return path if os.path.exists(path) else None

    def record(self, stage, key, path, **info):
        """Remember that ``path`` holds the output of ``stage`` for ``key``."""
        entry = dict(info, file=os.path.relpath(path, self.cache_folder))
        self.set('{0}:{1}'.format(stage, key), entry)
