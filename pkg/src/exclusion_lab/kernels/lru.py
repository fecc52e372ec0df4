# Copyright 2024 The exclusion-lab authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.
"""Byte-bounded LRU cache for kernel rows"""

import threading


class RowCache:
    """Least recently used cache whose budget is the total size of its arrays"""

    def __init__(self, max_bytes=256 * 1024 * 1024):
        """Construct a new row cache

        :type max_bytes: int
        :param max_bytes: The most array bytes held at once; 0 disables caching
        """
        self._lock = threading.RLock()
        self._rows = {}
        self._newest = None
        self._oldest = None
        self._max_bytes = max_bytes
        self._bytes = 0

    def __len__(self):
        with self._lock:
            return len(self._rows)

    @property
    def nbytes(self):
        with self._lock:
            return self._bytes

    def get(self, key):
        """Get the cached row for the given key

        :type key: tuple
        :param key: ``(state number, time)`` or any other hashable key

        :rtype: numpy.ndarray
        :return: The cached row, or None
        """
        with self._lock:
            node = self._rows.get(key)
            if node is None:
                return None
            self._promote(node)
            return node.row

    def put_if_absent(self, key, row):
        """Cache ``row`` under ``key`` unless the key is already present.

        Least recently used rows are evicted until the byte budget holds;
        a row larger than the whole budget is not kept.

        :rtype: bool
        :return: True if the row was stored.
        """
        with self._lock:
            if key in self._rows:
                return False
            node = _RowNode(key, row)
            self._rows[key] = node
            self._bytes += node.nbytes
            self._promote(node)
            while self._bytes > self._max_bytes and self._oldest is not None:
                self._evict(self._oldest)
            return key in self._rows

    def _evict(self, node):
        del self._rows[node.key]
        self._bytes -= node.nbytes
        self._unlink(node)

    def _promote(self, node):
        if node is self._newest:
            return
        self._unlink(node)
        node.older = self._newest
        if self._newest is not None:
            self._newest.newer = node
        self._newest = node
        if self._oldest is None:
            self._oldest = node

    def _unlink(self, node):
        if node is self._newest:
            self._newest = node.older
        if node is self._oldest:
            self._oldest = node.newer
        if node.newer is not None:
            node.newer.older = node.older
        if node.older is not None:
            node.older.newer = node.newer
        node.newer = None
        node.older = None


class _RowNode:
    """A cached row in the recency list."""

    def __init__(self, key, row):
        self.key = key
        self.row = row
        self.nbytes = int(getattr(row, "nbytes", 0))
        self.newer = None
        self.older = None
