"""Real lattices, nearest-point quantization and nested-pair rates.

Small exact toolkit backing the coding-layer story: messages are fine-lattice
points reduced modulo a coarse shaping lattice, and the rate of such a nested
pair is the normalized log volume ratio.  Quantization is exact nearest-point
search (dimension capped so enumeration stays cheap), which keeps the modulo
identities used by the two-stage decoder exact as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

_MAX_DIM = 8
_ENUM_RADIUS = 2  # offsets around the rounded Babai coordinates


@dataclass(frozen=True, eq=False)
class Lattice:
    """Full-rank lattice {G w : w integer}, columns of G are the basis."""

    G: np.ndarray

    def __post_init__(self):
        G = np.asarray(self.G, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValueError("generator matrix must be square")
        if abs(np.linalg.det(G)) < 1e-12:
            raise ValueError("generator matrix is singular")
        object.__setattr__(self, "G", G)

    @property
    def T(self) -> int:
        return self.G.shape[0]

    def det_abs(self) -> float:
        return abs(np.linalg.det(self.G))


def quantize(lat: Lattice, x: np.ndarray) -> np.ndarray:
    """Nearest lattice point to x in Euclidean norm.

    Enumerates integer coordinate vectors in a +-2 window around the rounded
    (Babai) coordinates, which is exact for the well-conditioned bases this
    toolkit targets; ties are broken by the lexicographically smallest
    coordinate vector so the result is deterministic.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    T = lat.T
    if x.shape[0] != T:
        raise ValueError(f"point has dimension {x.shape[0]}, lattice has {T}")
    if T > _MAX_DIM:
        raise ValueError(f"quantize supports dimension <= {_MAX_DIM}, got {T}")

    base = np.round(np.linalg.solve(lat.G, x))
    offsets = np.array(list(product(range(-_ENUM_RADIUS, _ENUM_RADIUS + 1), repeat=T)))
    W = base[None, :] + offsets
    pts = W @ lat.G.T
    d2 = np.sum((pts - x[None, :]) ** 2, axis=1)
    dmin = d2.min()
    tied = np.flatnonzero(d2 <= dmin + 1e-12)
    best = min(tied, key=lambda i: tuple(W[i]))
    return pts[best]


def mod_lattice(lat: Lattice, x: np.ndarray) -> np.ndarray:
    """x reduced modulo the lattice: x minus its nearest lattice point."""
    x = np.asarray(x, dtype=float).reshape(-1)
    return x - quantize(lat, x)


@dataclass(frozen=True, eq=False)
class NestedPair:
    """Coarse (shaping) lattice nested inside a fine (coding) lattice."""

    coarse: Lattice
    fine: Lattice

    def __post_init__(self):
        if self.coarse.T != self.fine.T:
            raise ValueError("coarse and fine lattices must share the dimension")
        M = np.linalg.solve(self.fine.G, self.coarse.G)
        if np.max(np.abs(M - np.round(M))) > 1e-9:
            raise ValueError("coarse lattice is not a sublattice of the fine one")


def nested_rate(pair: NestedPair) -> float:
    """Codebook rate of the nested pair in bits per dimension.

    (1/T) log2 of the volume ratio |det G_coarse| / |det G_fine|; non-negative
    because nesting forces the coarse cell to contain the fine one.
    """
    T = pair.fine.T
    return float(np.log2(pair.coarse.det_abs() / pair.fine.det_abs()) / T)


def distributive_mod_identity_check(
    lat: Lattice, g1: np.ndarray, g2: np.ndarray, c: int, tol: float = 1e-9
) -> bool:
    """Check the two modulo identities the decoder relies on.

    [g1 + g2] mod L == [[g1] mod L + g2] mod L, and for an integer scalar c,
    [c ([g1] mod L)] mod L == [c g1] mod L.  Exact quantization makes both
    hold to rounding error; returns True when both do within tol.
    """
    if c != int(c):
        raise ValueError("scalar must be an integer")
    g1 = np.asarray(g1, dtype=float).reshape(-1)
    g2 = np.asarray(g2, dtype=float).reshape(-1)
    lhs1 = mod_lattice(lat, g1 + g2)
    rhs1 = mod_lattice(lat, mod_lattice(lat, g1) + g2)
    lhs2 = mod_lattice(lat, c * mod_lattice(lat, g1))
    rhs2 = mod_lattice(lat, c * g1)
    return bool(
        np.max(np.abs(lhs1 - rhs1)) <= tol and np.max(np.abs(lhs2 - rhs2)) <= tol
    )
