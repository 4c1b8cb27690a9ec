"""Vietoris-Rips and Čech complexes and filtrations on finite metric spaces."""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import SizeGuard
from .metric import FiniteMetricSpace, fmt_real

STRICT = "strict"
NON_STRICT = "non_strict"
CONVENTIONS = (STRICT, NON_STRICT)
DEFAULT_MAX_SIMPLICES = 10**7


def max_simplices() -> int:
    return int(os.environ.get("VRT_MAX_SIMPLICES", DEFAULT_MAX_SIMPLICES))


def within(value, r: float, convention: str):
    """``value < r`` (strict) or ``value <= r`` (non-strict); works elementwise on arrays."""
    if convention == STRICT:
        return value < r
    if convention == NON_STRICT:
        return value <= r
    raise ValueError(f"unknown convention {convention!r}")


@dataclass(frozen=True, order=True)
class Simplex:
    birth: float
    vertices: tuple

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    space: FiniteMetricSpace = field(repr=False)
    simplices: tuple  # simplices[k] is a sorted tuple of k-simplices (vertex tuples)
    max_dim: int
    scale: Optional[float] = None
    convention: Optional[str] = None
    kind: str = "vr"

    def __iter__(self) -> Iterator[tuple]:
        for level in self.simplices:
            yield from level

    def __len__(self):
        return sum(len(level) for level in self.simplices)

    def __contains__(self, sigma) -> bool:
        sigma = tuple(sorted(sigma))
        k = len(sigma) - 1
        return 0 <= k < len(self.simplices) and sigma in self._lookup[k]

    @property
    def _lookup(self):
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = [set(level) for level in self.simplices]
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    @property
    def vertices(self) -> list:
        return [s[0] for s in self.simplices[0]] if self.simplices else []

    def as_set(self) -> set:
        return set(self)

    def is_closed(self) -> bool:
        """Every facet of every simplex is present."""
        for level in self.simplices[1:]:
            for s in level:
                for face in itertools.combinations(s, len(s) - 1):
                    if face not in self:
                        return False
        return True

    def to_text(self) -> str:
        lines = []
        for s in self:
            birth = self.space.diameter(s) if self.kind == "vr" else self.scale
            lines.append(" ".join([str(len(s) - 1), fmt_real(birth)] + [str(v) for v in s]))
        return "\n".join(lines) + ("\n" if lines else "")


def _check_count(count: int, cap: int) -> None:
    if count > cap:
        raise SizeGuard(f"simplex count exceeds the cap of {cap} (set VRT_MAX_SIMPLICES to raise it)")


def _levels(found: Iterable[tuple], max_dim: int) -> tuple:
    levels = [[] for _ in range(max_dim + 1)]
    for s in found:
        levels[len(s) - 1].append(s)
    while levels and not levels[-1]:
        levels.pop()
    return tuple(tuple(sorted(level)) for level in levels)


def vr_complex(space: FiniteMetricSpace, r: float, convention: str = NON_STRICT, max_dim: int = 2,
               cap: Optional[int] = None) -> SimplicialComplex:
    """Vietoris-Rips complex by clique expansion of the scale graph."""
    if r < 0 or max_dim < 0:
        raise ValueError("need r >= 0 and max_dim >= 0")
    cap = max_simplices() if cap is None else cap
    adj = within(space.dist, r, convention)
    np.fill_diagonal(adj, False)
    upper = [set(np.nonzero(adj[v])[0][np.nonzero(adj[v])[0] > v].tolist()) for v in range(space.size)]
    found: list[tuple] = []

    def expand(sigma, candidates):
        found.append(sigma)
        _check_count(len(found), cap)
        if len(sigma) > max_dim:
            return
        for v in sorted(candidates):
            expand(sigma + (v,), candidates & upper[v])

    for v in range(space.size):
        # the 0-simplex {v} has diameter 0, which a strict scale of 0 excludes
        if within(0.0, r, convention):
            expand((v,), upper[v])
    return SimplicialComplex(space, _levels(found, max_dim), max_dim, r, convention, "vr")


def cech_complex(space: FiniteMetricSpace, r: float, convention: str = NON_STRICT, max_dim: int = 2,
                 cap: Optional[int] = None) -> SimplicialComplex:
    """Čech complex with witnesses drawn from the space itself.

    A simplex is present when some point x of the space is within ``r`` (strictly or
    not) of all of its vertices.
    """
    if r < 0 or max_dim < 0:
        raise ValueError("need r >= 0 and max_dim >= 0")
    cap = max_simplices() if cap is None else cap
    balls = within(space.dist, r, convention)  # balls[x, v]: v in B(x, r)
    found: list[tuple] = []

    def expand(sigma, witnesses):
        found.append(sigma)
        _check_count(len(found), cap)
        if len(sigma) > max_dim:
            return
        for v in range(sigma[-1] + 1, space.size):
            w = witnesses & balls[:, v]
            if w.any():
                expand(sigma + (v,), w)

    for v in range(space.size):
        w = balls[:, v].copy()
        if w.any():
            expand((v,), w)
    return SimplicialComplex(space, _levels(found, max_dim), max_dim, r, convention, "cech")


def star(complex_: SimplicialComplex, sigma) -> list:
    """All simplices of the complex containing ``sigma``; empty iff sigma is not a simplex."""
    sigma = set(sigma)
    return [tau for tau in complex_ if sigma <= set(tau)]


def induced_subcomplex(complex_: SimplicialComplex, vertex_subset) -> SimplicialComplex:
    keep = set(vertex_subset)
    levels = tuple(
        tuple(s for s in level if keep.issuperset(s)) for level in complex_.simplices
    )
    while levels and not levels[-1]:
        levels = levels[:-1]
    return SimplicialComplex(complex_.space, levels, complex_.max_dim, complex_.scale,
                             complex_.convention, complex_.kind)


@dataclass(frozen=True, eq=False)
class Filtration:
    """Simplices in filtration order: (birth, dimension, vertices) ascending."""

    space: FiniteMetricSpace = field(repr=False)
    simplices: tuple  # of Simplex
    max_dim: int
    kind: str = "vr"

    def __len__(self):
        return len(self.simplices)

    def __iter__(self):
        return iter(self.simplices)

    @property
    def values(self) -> list:
        return sorted({s.birth for s in self.simplices})

    def restrict(self, r: float) -> set:
        """Vertex tuples of all simplices born at or before ``r``."""
        return {s.vertices for s in self.simplices if s.birth <= r}

    def is_valid(self) -> bool:
        position = {s.vertices: k for k, s in enumerate(self.simplices)}
        births = [s.birth for s in self.simplices]
        if any(b2 < b1 for b1, b2 in zip(births, births[1:])):
            return False
        for k, s in enumerate(self.simplices):
            if len(s.vertices) > 1:
                for face in itertools.combinations(s.vertices, len(s.vertices) - 1):
                    if position.get(face, len(self.simplices)) >= k:
                        return False
        return True

    def to_text(self) -> str:
        return "".join(
            " ".join([str(s.dim), fmt_real(s.birth)] + [str(v) for v in s.vertices]) + "\n"
            for s in self.simplices
        )


def _sort_key(s: Simplex):
    return (s.birth, len(s.vertices), s.vertices)


def vr_filtration(space: FiniteMetricSpace, max_dim: int = 2, cap: Optional[int] = None,
                  max_scale: float = np.inf) -> Filtration:
    """Every simplex of dimension <= max_dim with its diameter as birth.

    ``max_scale`` truncates the filtration (births above it are omitted).
    """
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    cap = max_simplices() if cap is None else cap
    d = space.dist.tolist()
    n = space.size
    out: list[Simplex] = []

    def expand(sigma, diam):
        out.append(Simplex(diam, sigma))
        _check_count(len(out), cap)
        if len(sigma) > max_dim:
            return
        for v in range(sigma[-1] + 1, n):
            nd = max(diam, max(d[u][v] for u in sigma))
            if nd <= max_scale:
                expand(sigma + (v,), nd)

    for v in range(n):
        expand((v,), 0.0)
    out.sort(key=_sort_key)
    return Filtration(space, tuple(out), max_dim, "vr")


def cech_filtration(space: FiniteMetricSpace, max_dim: int = 2, cap: Optional[int] = None) -> Filtration:
    """Every simplex with its minimal witness radius min_x max_i d(x, v_i) as birth."""
    cap = max_simplices() if cap is None else cap
    d = space.dist
    n = space.size
    out: list[Simplex] = []

    def expand(sigma, radii):
        out.append(Simplex(float(radii.min()), sigma))
        _check_count(len(out), cap)
        if len(sigma) > max_dim:
            return
        for v in range(sigma[-1] + 1, n):
            expand(sigma + (v,), np.maximum(radii, d[:, v]))

    for v in range(n):
        expand((v,), d[:, v].copy())
    out.sort(key=_sort_key)
    return Filtration(space, tuple(out), max_dim, "cech")
