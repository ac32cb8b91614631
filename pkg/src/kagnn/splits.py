"""Dataset splits: seeded random 80/10/10 and external index files.

A split file is JSON with integer index lists::

    {"train": [0, 5, ...], "valid": [...], "test": [...]}

The three parts must be disjoint and together cover 0..n-1 exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .validation import check_positive_int

__all__ = ["SplitSpec", "load_split", "random_split"]


@dataclass
class SplitSpec:
    train: list[int]
    valid: list[int]
    test: list[int]
    provenance: str = "unspecified"
    seed: int | None = None

    def sizes(self):
        return len(self.train), len(self.valid), len(self.test)

    def validate(self, n):
        """Check the split partitions range(n)."""
        all_idx = list(self.train) + list(self.valid) + list(self.test)
        seen = set()
        for i in all_idx:
            if not isinstance(i, (int, np.integer)) or isinstance(i, bool):
                raise ValueError(f"split indices must be integers, got {i!r}")
            if not 0 <= i < n:
                raise ValueError(f"split index {i} outside 0..{n - 1}")
            if i in seen:
                raise ValueError(f"duplicate split index {i}")
            seen.add(i)
        if len(all_idx) != n:
            raise ValueError(
                f"split covers {len(all_idx)} indices, dataset has {n}"
            )
        return self

    def to_json_dict(self):
        return {
            "train": [int(i) for i in self.train],
            "valid": [int(i) for i in self.valid],
            "test": [int(i) for i in self.test],
        }


def random_split(n, ratios=(0.8, 0.1, 0.1), seed=0):
    """Seeded shuffle split; sizes floor(r0*n), floor(r1*n), remainder."""
    n = check_positive_int(n, "n")
    if n < 3:
        raise ValueError(f"need at least 3 items to split, got {n}")
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValueError(f"ratios must be 3 positive numbers, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = int(np.floor(ratios[0] * n))
    n_valid = int(np.floor(ratios[1] * n))
    train = perm[:n_train]
    valid = perm[n_train:n_train + n_valid]
    test = perm[n_train + n_valid:]
    return SplitSpec(
        train=[int(i) for i in train],
        valid=[int(i) for i in valid],
        test=[int(i) for i in test],
        provenance="random-seeded",
        seed=int(seed),
    )


def load_split(path, n):
    """Read and validate an external split file against dataset size n."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: split file must be a JSON object")
    for part in ("train", "valid", "test"):
        if part not in doc or not isinstance(doc[part], list):
            raise ValueError(f"{path}: split file needs list field {part!r}")
    spec = SplitSpec(train=doc["train"], valid=doc["valid"], test=doc["test"],
                     provenance=f"external-file:{path}")
    try:
        spec.validate(n)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}")
    return spec
