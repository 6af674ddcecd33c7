"""Access to the data files shipped with the package.

Bundled data:

* ``data/triples/<word>.json``: sentence triples for six polysemous words
  (bass, bat, crane, glasses, seal, trunk), with whitespace token indices.
  An exporter that tokenizes differently rewrites the indices.
* ``data/counts/pairs/*.csv``: image counts for nine two-prompt weighted
  sums (30 images per condition; conditions ``s1``, ``s2``, ``sum``).
* ``data/counts/editing/*.csv``: image counts for fourteen sense-editing
  runs (conditions ``unedited``, ``edited_to_1``, ``edited_to_2``).
* ``data/counts/editing_reference.csv``: which editing comparisons the
  source evaluation marked as significant increases.
* ``data/recovery.json``: parameters and thresholds for the synthetic
  recovery checks.
"""

from __future__ import annotations

import csv
import json
from importlib.resources import files
from pathlib import Path

from .errors import MissingFixture


def data_root() -> Path:
    return Path(str(files("sensespace").joinpath("data")))


def triple_words() -> list[str]:
    root = data_root() / "triples"
    return sorted(p.stem for p in root.glob("*.json"))


def triples_path(word: str) -> Path:
    path = data_root() / "triples" / f"{word}.json"
    if not path.exists():
        raise MissingFixture(f"no bundled triples for {word!r}")
    return path


def pair_table_paths() -> list[Path]:
    root = data_root() / "counts" / "pairs"
    paths = sorted(root.glob("*.csv"))
    if not paths:
        raise MissingFixture(f"no pair count tables under {root}")
    return paths


def editing_table_paths() -> list[Path]:
    root = data_root() / "counts" / "editing"
    paths = sorted(root.glob("*.csv"))
    if not paths:
        raise MissingFixture(f"no editing count tables under {root}")
    return paths


def load_editing_reference() -> dict[tuple[str, int], bool]:
    """Map (table stem, direction) to the reference significance flag."""
    path = data_root() / "counts" / "editing_reference.csv"
    if not path.exists():
        raise MissingFixture(f"missing editing reference flags: {path}")
    out: dict[tuple[str, int], bool] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out[(row["table"], int(row["direction"]))] = row["significant"] == "1"
    return out


def load_recovery_fixture() -> dict:
    path = data_root() / "recovery.json"
    if not path.exists():
        raise MissingFixture(f"missing recovery fixture: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
