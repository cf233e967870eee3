"""Generalized singles-and-doubles (UCCGSD) operator pool."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .fock import Basis, FermionOperator

__all__ = ["CompiledPool", "PoolOperator", "build_uccgsd_pool", "compile_pool"]


@dataclass(frozen=True)
class PoolOperator:
    id: int
    generator: FermionOperator
    label: tuple[int, ...]
    irrep: int

    @property
    def rank(self) -> int:
        return len(self.label) // 2

    def describe(self) -> str:
        names = [f"{j // 2}{'ab'[j % 2]}" for j in self.label]
        half = len(names) // 2
        return f"{','.join(names[:half])}->{','.join(names[half:])}"


def _excitation(annihilate: Sequence[int], create: Sequence[int]) -> FermionOperator:
    """``T - T^+`` with ``T = a+_create... a_annihilate...`` (rightmost annihilator acts first)."""
    string = tuple((j, True) for j in create) + tuple((j, False) for j in reversed(annihilate))
    t = FermionOperator([(1.0, string)])
    return t - t.adjoint()


def build_uccgsd_pool(n_spatial: int, orbital_irreps: Sequence[int] | None = None) -> list[PoolOperator]:
    """Anti-Hermitian generalized singles ``a_p^q - a_q^p`` and doubles ``a_pq^rs - a_rs^pq``.

    Only S_z-conserving, totally symmetric generators are kept. Each
    generator appears once up to sign: singles with ``p < q``, doubles with
    ``p < q``, ``r < s``, ``(p, q) < (r, s)`` and disjoint index pairs.
    Ordering: singles then doubles, each lexicographic in their labels.
    """
    if orbital_irreps is None:
        orbital_irreps = (0,) * n_spatial
    nso = 2 * n_spatial

    def spin(j):
        return j % 2

    def irrep(*idx):
        g = 0
        for j in idx:
            g ^= orbital_irreps[j // 2]
        return g

    ops: list[PoolOperator] = []
    for p, q in combinations(range(nso), 2):
        if spin(p) == spin(q) and irrep(p, q) == 0:
            ops.append(PoolOperator(len(ops), _excitation((p,), (q,)), (p, q), 0))
    pairs = list(combinations(range(nso), 2))
    for a, (p, q) in enumerate(pairs):
        for r, s in pairs[a + 1:]:
            if {p, q} & {r, s}:
                continue
            if spin(p) + spin(q) != spin(r) + spin(s):
                continue
            if irrep(p, q, r, s) != 0:
                continue
            ops.append(PoolOperator(len(ops), _excitation((p, q), (r, s)), (p, q, r, s), 0))
    return ops


@dataclass(frozen=True)
class CompiledPool:
    """Pool generators as disjoint rotation pairs over a basis.

    Every generator acts as ``A|src> = sgn |dst>`` and ``A|dst> = -sgn |src>``
    on pairs ``ptr[j]:ptr[j+1]``, which makes ``exp(theta A)`` a product of
    plane rotations.
    """

    ops: tuple[PoolOperator, ...]
    basis: Basis
    ptr: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    sgn: np.ndarray

    def __len__(self) -> int:
        return len(self.ops)

    def __getitem__(self, j: int) -> PoolOperator:
        return self.ops[j]

    def n_pairs(self, j: int) -> int:
        return int(self.ptr[j + 1] - self.ptr[j])


def compile_pool(ops: Sequence[PoolOperator], basis: Basis) -> CompiledPool:
    ptr = [0]
    src, dst, sgn = [], [], []
    for op in ops:
        m = op.generator.matrix(basis)
        if m.nnz and abs(m + m.T).max() > 0:
            raise ValueError(f"generator {op.label} is not anti-Hermitian on this basis")
        mat = m.tocoo()
        upper = mat.row < mat.col
        rows, cols, vals = mat.row[upper], mat.col[upper], mat.data[upper]
        touched = np.concatenate([rows, cols])
        if len(np.unique(touched)) != len(touched) or not np.all(np.abs(vals) == 1.0):
            raise ValueError(f"generator {op.label} is not a disjoint set of plane rotations")
        # A[row, col] = v means A|col> = v|row>
        src.append(cols)
        dst.append(rows)
        sgn.append(vals)
        ptr.append(ptr[-1] + len(rows))
    cat = (lambda xs, dt: np.ascontiguousarray(np.concatenate(xs) if xs else np.zeros(0), dtype=dt))
    return CompiledPool(
        ops=tuple(ops),
        basis=basis,
        ptr=np.asarray(ptr, dtype=np.int64),
        src=cat(src, np.int64),
        dst=cat(dst, np.int64),
        sgn=cat(sgn, np.float64),
    )
