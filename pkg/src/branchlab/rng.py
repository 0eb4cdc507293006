"""Reproducible per-particle random streams.

Every particle gets its own counter-based stream (Philox) keyed by
(seed, replica, genealogy label), so results are bit-identical no matter
in which order, or on how many workers, the tree is traversed.  Labels
are tuples of birth-order digits in {1, 2}; digit 0 is reserved for
auxiliary streams (the biased-line engine uses it), which therefore can
never collide with a tree label.
"""

from __future__ import annotations

import numpy as np

Label = tuple[int, ...]

ROOT: Label = ()


def label_str(label: Label) -> str:
    """Human/CSV form: root is '0', children append their digits ('012')."""
    return "0" + "".join(str(d) for d in label)


def parse_label(text: str) -> Label:
    if not text or text[0] != "0":
        raise ValueError(f"labels start with the root digit '0', got {text!r}")
    return tuple(int(c) for c in text[1:])


def stream(seed: int, replica: int, label: Label = ROOT) -> np.random.Generator:
    """The particle's private generator; a pure function of its key."""
    ss = np.random.SeedSequence((int(seed) & 0xFFFFFFFFFFFFFFFF, int(replica)) + tuple(label))
    return np.random.Generator(np.random.Philox(ss))


class BlockDraws:
    """Amortized scalar draws from one stream (normals and uniforms)."""

    __slots__ = ("_rng", "_norm", "_unif", "_ni", "_ui", "_block")

    def __init__(self, rng: np.random.Generator, block: int = 128):
        self._rng = rng
        self._block = block
        self._norm = rng.standard_normal(block)
        self._unif = rng.random(block)
        self._ni = 0
        self._ui = 0

    def normal(self) -> float:
        i = self._ni
        if i == self._block:
            self._norm = self._rng.standard_normal(self._block)
            i = 0
        self._ni = i + 1
        return self._norm[i]

    def uniform(self) -> float:
        i = self._ui
        if i == self._block:
            self._unif = self._rng.random(self._block)
            i = 0
        self._ui = i + 1
        return self._unif[i]
