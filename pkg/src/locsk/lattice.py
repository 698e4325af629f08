"""Finite lattice box geometry: site and pair indexing.

Sites of the box [-n, n]^d are enumerated lexicographically (first coordinate
slowest), giving a fixed bijection between {0, ..., site_count-1} and the box
that is stable across runs.  Unordered pairs are indexed in row-major
triangular order: (0,1), (0,2), ..., (0,n-1), (1,2), ...; everything that
iterates pairs derives its order from this.
"""

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import LocskValidationError


@dataclass(frozen=True)
class LatticeBox:
    """The box [-radius, radius]^dim with side 2*radius+1 per axis."""

    dim: int
    radius: int

    def __post_init__(self):
        if self.dim < 1:
            raise LocskValidationError(f"dim must be >= 1, got {self.dim}")
        if self.radius < 0:
            raise LocskValidationError(f"radius must be >= 0, got {self.radius}")

    @property
    def side(self) -> int:
        return 2 * self.radius + 1

    @property
    def site_count(self) -> int:
        return self.side ** self.dim

    @property
    def pair_count(self) -> int:
        n = self.site_count
        return n * (n - 1) // 2

    @cached_property
    def sites(self) -> np.ndarray:
        """(site_count, dim) integer coordinates, lexicographic order."""
        r = range(-self.radius, self.radius + 1)
        arr = np.array(list(itertools.product(r, repeat=self.dim)), dtype=np.int64)
        arr.flags.writeable = False
        return arr

    def site_index(self, coord) -> int:
        idx = 0
        for c in coord:
            if not -self.radius <= c <= self.radius:
                raise LocskValidationError(f"coordinate {coord} outside the box")
            idx = idx * self.side + (c + self.radius)
        return idx

    def pair_index(self, a: int, b: int) -> int:
        """Triangular index of the unordered pair {a, b}, a != b."""
        if a == b:
            raise LocskValidationError("a pair needs two distinct sites")
        if a > b:
            a, b = b, a
        n = self.site_count
        return a * (2 * n - a - 1) // 2 + (b - a - 1)

    def iter_pairs(self):
        n = self.site_count
        for a in range(n):
            for b in range(a + 1, n):
                yield a, b
