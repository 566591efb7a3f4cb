"""File formats and report persistence.

Formats supported:

* outcomes CSV — ``user_id`` column plus one column per outcome; gender is
  accepted as m/f/male/female/-1/1 and coded female=+1, male=-1; blank cells
  are missing values;
* lexicon weight CSV — header ``term,category,weight``; the term
  ``_intercept`` sets the model intercept for its category;
* embeddings — CSV (``user_id`` then one column per dimension) or JSON lines
  (``{"user_id": ..., "embedding": [...]}``);
* reports — JSON written with sorted keys (byte-reproducible) plus CSV mirrors
  of tabular data;
* run manifests — seeds, thresholds, and a SHA-256 digest per input file.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .modeling import LexiconModel

GENDER_CODES = {
    "f": 1.0,
    "female": 1.0,
    "1": 1.0,
    "+1": 1.0,
    "m": -1.0,
    "male": -1.0,
    "-1": -1.0,
}


def load_outcomes_csv(path: str | Path) -> dict[str, dict[str, float | None]]:
    """Outcome columns per user; missing cells map to None."""
    out: dict[str, dict[str, float | None]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "user_id" not in reader.fieldnames:
            raise ValueError(f"{path}: outcomes CSV needs a user_id column")
        for row in reader:
            user = row.pop("user_id")
            parsed: dict[str, float | None] = {}
            for col, raw in row.items():
                raw = (raw or "").strip()
                if not raw:
                    parsed[col] = None
                elif col == "gender":
                    code = GENDER_CODES.get(raw.lower())
                    if code is None:
                        raise ValueError(f"{path}: unrecognized gender value {raw!r}")
                    parsed[col] = code
                else:
                    parsed[col] = float(raw)
            out[user] = parsed
    return out


def load_lexicon_csv(path: str | Path) -> dict[str, LexiconModel]:
    """One LexiconModel per category from a ``term,category,weight`` CSV."""
    weights: dict[str, dict[str, float]] = {}
    intercepts: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"term", "category", "weight"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"{path}: lexicon CSV needs term,category,weight columns")
        for row in reader:
            term, cat, w = row["term"], row["category"], float(row["weight"])
            if term.lower() == "_intercept":
                intercepts[cat] = w
            else:
                weights.setdefault(cat, {})[term] = w
    return {
        cat: LexiconModel(weights=weights.get(cat, {}), intercept=intercepts.get(cat, 0.0), outcome=cat)
        for cat in sorted(set(weights) | set(intercepts))
    }


def save_lexicon_csv(models: Mapping[str, LexiconModel], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["term", "category", "weight"])
        for cat in sorted(models):
            model = models[cat]
            writer.writerow(["_intercept", cat, repr(model.intercept)])
            for term in sorted(model.weights):
                writer.writerow([term, cat, repr(model.weights[term])])


def load_embeddings(path: str | Path) -> tuple[list[str], np.ndarray]:
    """User ids and their embedding matrix, rows ordered as in the file."""
    path = Path(path)
    users: list[str] = []
    rows: list[list[float]] = []
    if path.suffix in (".jsonl", ".ndjson"):
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            d = json.loads(line)
            users.append(str(d["user_id"]))
            rows.append([float(v) for v in d["embedding"]])
    else:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if not header or header[0] != "user_id":
                raise ValueError(f"{path}: embeddings CSV must start with a user_id column")
            for row in reader:
                if not row:
                    continue
                users.append(row[0])
                rows.append([float(v) for v in row[1:]])
    if not rows:
        raise ValueError(f"{path}: no embedding rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: inconsistent embedding widths {sorted(widths)}")
    return users, np.asarray(rows, dtype=float)


def write_json(obj, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def write_csv(rows: Iterable[Mapping], fieldnames: Sequence[str], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k) for k in fieldnames})


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    path: str | Path,
    config: Mapping,
    input_paths: Iterable[str | Path],
    package_version: str,
) -> None:
    manifest = {
        "package_version": package_version,
        "config": dict(sorted(config.items())),
        "inputs": {str(p): sha256_file(p) for p in sorted(map(str, input_paths))},
    }
    write_json(manifest, path)
