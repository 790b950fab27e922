"""Append-only results cache: one json document per line.

A corrupt line is skipped with a warning. An unreadable or unwritable path
disables the cache instead of failing the run.
"""

from __future__ import annotations

import json
import logging
import threading
from pathlib import Path

from genrank.generic_rank import GenericRankResult, RankConfig
from genrank.report import result_from_dict, result_to_dict
from genrank.structures import TensorStructure, to_dict

log = logging.getLogger(__name__)


def cache_key(structure: TensorStructure, cfg: RankConfig) -> str:
    key = {
        "structure": to_dict(structure),
        "ring": cfg.ring.describe(),
        "seed": cfg.seed,
        "trials": cfg.trials,
    }
    return json.dumps(key, sort_keys=True)


class ResultCache:
    def __init__(self, path):
        self.path = Path(path)
        self.enabled = True
        self._lock = threading.Lock()
        self._entries: dict[str, tuple[GenericRankResult, bool]] = {}
        self._load()

    def _load(self):
        if not self.path.exists():
            return
        try:
            text = self.path.read_text()
        except OSError as exc:
            log.warning("cache %s unreadable (%s); caching disabled", self.path, exc)
            self.enabled = False
            return
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                self._entries[doc["key"]] = (result_from_dict(doc["result"]), bool(doc["agreement"]))
            except (ValueError, KeyError, TypeError) as exc:
                log.warning("cache %s line %d skipped: %s", self.path, lineno, exc)

    def __len__(self):
        return len(self._entries)

    def lookup(self, structure: TensorStructure, cfg: RankConfig):
        """Return ``(result, agreement)`` for an exact key match, else None."""
        if not self.enabled:
            return None
        return self._entries.get(cache_key(structure, cfg))

    def store(self, structure: TensorStructure, cfg: RankConfig, result: GenericRankResult, agreement: bool):
        if not self.enabled:
            return
        key = cache_key(structure, cfg)
        line = json.dumps({"key": key, "result": result_to_dict(result), "agreement": agreement})
        with self._lock:
            try:
                with self.path.open("a") as fh:
                    fh.write(line + "\n")
            except OSError as exc:
                log.warning("cache %s unwritable (%s); caching disabled", self.path, exc)
                self.enabled = False
                return
            self._entries[key] = (result, agreement)


def cache_lookup(path, structure: TensorStructure, cfg: RankConfig):
    return ResultCache(path).lookup(structure, cfg)


def cache_store(path, structure: TensorStructure, cfg: RankConfig, result: GenericRankResult, agreement: bool = True):
    ResultCache(path).store(structure, cfg, result, agreement)
