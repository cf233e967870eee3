"""Determinants, fermionic operators and their action on state vectors.

Spin orbitals are interleaved: spatial orbital ``p`` carries spin orbitals
``2p`` (alpha) and ``2p + 1`` (beta). A determinant is a bit pattern over
spin orbitals and the fermionic phase of ``a_j`` / ``a_j^+`` is the parity
of the occupied spin orbitals with index below ``j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "Basis",
    "Determinant",
    "FermionOperator",
    "SeriesError",
    "SectorError",
    "StateVector",
    "apply_exp",
    "apply_operator",
    "apply_string",
    "build_reference",
    "enumerate_basis",
    "number_operator",
    "operator_matrix",
    "parse_occupation",
]

TAYLOR_TOL = 1e-14
TAYLOR_MAX_TERMS = 60


class SectorError(ValueError):
    """An operator or determinant falls outside the working basis."""


class SeriesError(ArithmeticError):
    """Taylor series for an operator exponential failed to converge."""


def _interleave(alpha: int, beta: int) -> int:
    bits = 0
    p = 0
    while alpha or beta:
        bits |= (alpha & 1) << (2 * p) | (beta & 1) << (2 * p + 1)
        alpha >>= 1
        beta >>= 1
        p += 1
    return bits


class Determinant(NamedTuple):
    """Occupation bit patterns over spatial orbitals, one per spin."""

    alpha_occ: int
    beta_occ: int

    @property
    def bits(self) -> int:
        return _interleave(self.alpha_occ, self.beta_occ)

    @classmethod
    def from_bits(cls, bits: int) -> "Determinant":
        alpha = beta = 0
        p = 0
        while bits:
            alpha |= (bits & 1) << p
            beta |= ((bits >> 1) & 1) << p
            bits >>= 2
            p += 1
        return cls(alpha, beta)

    def irrep(self, orbital_irreps: Sequence[int]) -> int:
        label = 0
        for p, g in enumerate(orbital_irreps):
            if (self.alpha_occ >> p) & 1:
                label ^= g
            if (self.beta_occ >> p) & 1:
                label ^= g
        return label

    def occupation_string(self, n_spatial: int) -> str:
        chars = "0ab2"
        return "".join(
            chars[((self.alpha_occ >> p) & 1) | (((self.beta_occ >> p) & 1) << 1)]
            for p in range(n_spatial)
        )


def parse_occupation(occ: str) -> Determinant:
    """``"2ab0"`` -> doubly occupied orbital 0, alpha in 1, beta in 2."""
    alpha = beta = 0
    for p, c in enumerate(occ.strip()):
        if c not in "0ab2":
            raise ValueError(f"bad occupation character {c!r} in {occ!r}")
        if c in "a2":
            alpha |= 1 << p
        if c in "b2":
            beta |= 1 << p
    return Determinant(alpha, beta)


class Basis:
    """Ordered determinant basis of one symmetry sector.

    ``irreps`` is ``None`` for all irreps, otherwise the tuple of allowed
    irrep labels (several irreps may be combined into one working space).
    """

    def __init__(self, dets: Iterable[Determinant], n_spatial: int, sector=None, orbital_irreps=None):
        dets = sorted(set(dets))
        self.orbital_irreps = tuple(orbital_irreps) if orbital_irreps is not None else (0,) * n_spatial
        self.dets: tuple[Determinant, ...] = tuple(dets)
        self.n_spatial = n_spatial
        self.sector = sector
        self.index_of = {d: i for i, d in enumerate(self.dets)}
        self.bits = np.array([d.bits for d in self.dets], dtype=np.int64)
        self._sort = np.argsort(self.bits, kind="stable")
        self._sorted_bits = self.bits[self._sort]

    def __len__(self) -> int:
        return len(self.dets)

    def __repr__(self) -> str:
        return f"Basis(n_spatial={self.n_spatial}, size={len(self)}, sector={self.sector})"

    def irreps(self) -> np.ndarray:
        """Irrep label of every determinant."""
        return np.array([d.irrep(self.orbital_irreps) for d in self.dets], dtype=np.int64)

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.n_spatial

    def lookup(self, bits: np.ndarray) -> np.ndarray:
        """Positions of determinants given as interleaved bits; -1 if absent."""
        pos = np.searchsorted(self._sorted_bits, bits)
        pos = np.minimum(pos, len(self) - 1)
        found = self._sorted_bits[pos] == bits
        return np.where(found, self._sort[pos], -1)

    def state(self, coeffs) -> "StateVector":
        return StateVector(self, np.asarray(coeffs, dtype=float))

    def basis_state(self, det: Determinant) -> "StateVector":
        v = np.zeros(len(self))
        v[self.index_of[det]] = 1.0
        return StateVector(self, v)


def enumerate_basis(
    n_spatial: int,
    n_alpha: int,
    n_beta: int,
    irrep_filter=None,
    orbital_irreps: Sequence[int] | None = None,
) -> Basis:
    """All determinants with the given spin populations (and irreps).

    ``irrep_filter`` may be a single label or a collection of labels.
    """
    if not (0 <= n_alpha <= n_spatial and 0 <= n_beta <= n_spatial):
        raise ValueError("electron counts must lie in [0, n_spatial]")
    if orbital_irreps is None:
        orbital_irreps = (0,) * n_spatial
    if irrep_filter is None:
        allowed = None
    elif isinstance(irrep_filter, (int, np.integer)):
        allowed = (int(irrep_filter),)
    else:
        allowed = tuple(sorted(set(int(x) for x in irrep_filter)))

    def strings(n):
        return [sum(1 << p for p in occ) for occ in combinations(range(n_spatial), n)]

    def string_irrep(s):
        g = 0
        for p in range(n_spatial):
            if (s >> p) & 1:
                g ^= orbital_irreps[p]
        return g

    a_str, b_str = strings(n_alpha), strings(n_beta)
    b_irr = {b: string_irrep(b) for b in b_str}
    dets = []
    for a in a_str:
        ga = string_irrep(a)
        for b in b_str:
            if allowed is None or (ga ^ b_irr[b]) in allowed:
                dets.append(Determinant(a, b))
    return Basis(
        dets,
        n_spatial,
        sector=(n_alpha, n_beta, "all" if allowed is None else allowed),
        orbital_irreps=orbital_irreps,
    )


@dataclass(frozen=True)
class StateVector:
    basis: Basis
    coeffs: np.ndarray

    def __post_init__(self):
        if len(self.coeffs) != len(self.basis):
            raise ValueError(f"{len(self.coeffs)} coefficients for a basis of {len(self.basis)}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def dot(self, other: "StateVector") -> float:
        return float(self.coeffs @ other.coeffs)

    def __add__(self, other: "StateVector") -> "StateVector":
        return StateVector(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other: "StateVector") -> "StateVector":
        return StateVector(self.basis, self.coeffs - other.coeffs)

    def __mul__(self, alpha: float) -> "StateVector":
        return StateVector(self.basis, alpha * self.coeffs)

    __rmul__ = __mul__


# an operator string is a tuple of (spin-orbital index, is_creation), applied right to left
OpString = tuple


class FermionOperator:
    """Real linear combination of fermionic operator strings plus a constant.

    Strings are tuples ``((j, dagger), ...)``; the rightmost factor acts
    first. Identical strings are merged on construction.
    """

    def __init__(self, terms=None, constant: float = 0.0):
        merged: dict[OpString, float] = {}
        for coeff, string in terms or ():
            string = tuple((int(j), bool(d)) for j, d in string)
            if not string:
                constant += coeff
                continue
            merged[string] = merged.get(string, 0.0) + coeff
        self.terms: dict[OpString, float] = {s: c for s, c in merged.items() if c != 0.0}
        self.constant = float(constant)
        self._matrices: dict[int, sp.csr_matrix] = {}

    @classmethod
    def identity(cls, scale: float = 1.0) -> "FermionOperator":
        return cls(constant=scale)

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"FermionOperator({len(self.terms)} strings, constant={self.constant!r})"

    def items(self):
        return self.terms.items()

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        if not isinstance(other, FermionOperator):
            return FermionOperator([(c, s) for s, c in self.items()], self.constant + float(other))
        terms = [(c, s) for s, c in self.items()] + [(c, s) for s, c in other.items()]
        return FermionOperator(terms, self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self) -> "FermionOperator":
        return self * -1.0

    def __sub__(self, other) -> "FermionOperator":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, FermionOperator):
            terms = []
            mine = [(c, s) for s, c in self.items()] + [(self.constant, ())]
            theirs = [(c, s) for s, c in other.items()] + [(other.constant, ())]
            for c1, s1 in mine:
                for c2, s2 in theirs:
                    if c1 and c2:
                        terms.append((c1 * c2, s1 + s2))
            return FermionOperator(terms)
        return FermionOperator([(c * other, s) for s, c in self.items()], self.constant * other)

    def __rmul__(self, other):
        return self * other

    def adjoint(self) -> "FermionOperator":
        return FermionOperator(
            [(c, tuple((j, not d) for j, d in reversed(s))) for s, c in self.items()], self.constant
        )

    def matrix(self, basis: Basis, project: bool = False) -> sp.csr_matrix:
        """Sparse matrix in ``basis`` (cached per basis object)."""
        key = (id(basis), project)
        mat = self._matrices.get(key)
        if mat is None:
            mat = operator_matrix(self, basis, project=project)
            self._matrices[key] = mat
        return mat


def number_operator(n_spin_orbitals: int) -> FermionOperator:
    return FermionOperator([(1.0, ((j, True), (j, False))) for j in range(n_spin_orbitals)])


def apply_string(det: Determinant, string) -> tuple[Determinant, int] | None:
    """Act with one operator string on a determinant.

    Returns the image determinant and its phase, or ``None`` when the
    string annihilates ``det``.
    """
    bits = det.bits
    phase = 1
    for j, dagger in reversed(tuple(string)):
        occupied = (bits >> j) & 1
        if occupied == dagger:
            return None
        if bin(bits & ((1 << j) - 1)).count("1") & 1:
            phase = -phase
        bits ^= 1 << j
    return Determinant.from_bits(bits), phase


def _apply_string_array(bits: np.ndarray, string):
    """Vectorized :func:`apply_string` over interleaved bit arrays."""
    bits = bits.copy()
    phase = np.ones(len(bits), dtype=np.int64)
    alive = np.ones(len(bits), dtype=bool)
    for j, dagger in reversed(string):
        mask = np.int64(1) << j
        occupied = (bits & mask) != 0
        alive &= occupied != dagger
        below = np.bitwise_count(bits & (mask - 1)) & 1
        phase = np.where(below == 1, -phase, phase)
        bits ^= mask
    return bits, phase, alive


def operator_matrix(op: FermionOperator, basis: Basis, project: bool = False) -> sp.csr_matrix:
    """Matrix ``<d_i|op|d_j>`` over the basis.

    Raises :class:`SectorError` if ``op`` maps a basis determinant outside
    the basis, unless ``project`` is set. Projection is exact for matrix
    elements between states inside the basis (used for property operators
    of lower symmetry, e.g. dipole components).
    """
    n = len(basis)
    rows, cols, vals = [], [], []
    src_all = np.arange(n)
    for string, coeff in op.items():
        out, phase, alive = _apply_string_array(basis.bits, string)
        if not alive.any():
            continue
        out, phase, src = out[alive], phase[alive], src_all[alive]
        dst = basis.lookup(out)
        if project:
            keep = dst >= 0
            dst, src, phase = dst[keep], src[keep], phase[keep]
        elif (dst < 0).any():
            bad = Determinant.from_bits(int(out[dst < 0][0]))
            raise SectorError(
                f"operator string {string} maps into determinant "
                f"{bad.occupation_string(basis.n_spatial)} outside the working basis"
            )
        rows.append(dst)
        cols.append(src)
        vals.append(coeff * phase)
    if op.constant:
        rows.append(src_all)
        cols.append(src_all)
        vals.append(np.full(n, op.constant))
    if not rows:
        return sp.csr_matrix((n, n))
    mat = sp.coo_matrix(
        (np.concatenate(vals).astype(float), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return mat


def apply_operator(op: FermionOperator, v: StateVector) -> StateVector:
    return StateVector(v.basis, op.matrix(v.basis) @ v.coeffs)


def apply_exp(
    generator: FermionOperator,
    theta: float,
    v: StateVector,
    tol: float = TAYLOR_TOL,
    max_terms: int = TAYLOR_MAX_TERMS,
) -> StateVector:
    """``exp(theta * generator) v`` by a Taylor series applied to the vector."""
    if theta == 0.0:
        return StateVector(v.basis, v.coeffs.copy())
    mat = generator.matrix(v.basis)
    out = v.coeffs.copy()
    term = v.coeffs.copy()
    for k in range(1, max_terms + 1):
        term = (theta / k) * (mat @ term)
        out += term
        if np.linalg.norm(term) < tol:
            return StateVector(v.basis, out)
    est = abs(theta) * float(spla.norm(mat, 1)) if mat.nnz else 0.0
    raise SeriesError(
        f"exp series did not converge in {max_terms} terms (|theta|*||A||_1 ~ {est:.3g})"
    )


def build_reference(entries, basis: Basis) -> StateVector:
    """Normalized combination of determinants, e.g. a CSF."""
    v = np.zeros(len(basis))
    for det, coeff in entries:
        if isinstance(det, str):
            det = parse_occupation(det)
        idx = basis.index_of.get(det)
        if idx is None:
            raise SectorError(f"determinant {det} is not in the working basis {basis}")
        v[idx] += coeff
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("reference has zero norm")
    return StateVector(basis, v / norm)
