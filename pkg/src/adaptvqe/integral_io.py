"""Reading and writing FCIDUMP-style integral files.

Two-electron integrals are in chemists' notation ``(pq|rs)`` and are stored
fully expanded (``n**4`` reals). Orbital symmetry labels follow the molpro
ORBSYM numbering; internally they are shifted to start at zero so that the
direct product of two abelian irreps is a bitwise XOR.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product

import numpy as np

__all__ = [
    "FcidumpError",
    "MolecularIntegrals",
    "PropertyIntegrals",
    "ValidationReport",
    "parse_fcidump",
    "parse_property_integrals",
    "read_fcidump",
    "read_property_integrals",
    "validate_integrals",
    "write_fcidump",
]


class FcidumpError(ValueError):
    """Malformed or inconsistent integral file."""


@dataclass(frozen=True)
class MolecularIntegrals:
    n_spatial: int
    n_electrons: int
    core_energy: float
    one_body: np.ndarray
    two_body: np.ndarray
    orbital_irreps: tuple[int, ...]
    ms2: int = 0

    @property
    def n_alpha(self) -> int:
        return (self.n_electrons + self.ms2) // 2

    @property
    def n_beta(self) -> int:
        return (self.n_electrons - self.ms2) // 2


@dataclass(frozen=True)
class PropertyIntegrals:
    component: str
    one_body: np.ndarray
    nuclear_term: float = 0.0


@dataclass
class ValidationReport:
    violations: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "pass"
        return "; ".join(f"{k}: worst deviation {v:.3e}" for k, v in self.violations.items())


_HEADER_END = re.compile(r"^\s*(&END|/)\s*$", re.IGNORECASE)
_KEY = re.compile(r"([A-Za-z_]\w*)\s*=\s*([^=]*?)(?=,?\s*[A-Za-z_]\w*\s*=|$)")


def _split_header(lines: list[str]) -> tuple[dict[str, str], int]:
    if not lines or not lines[0].lstrip().upper().startswith("&FCI"):
        raise FcidumpError("line 1: expected '&FCI' namelist header")
    chunks = []
    for lineno, line in enumerate(lines):
        if _HEADER_END.match(line):
            break
        text = line.strip()
        if lineno == 0:
            text = text[4:]
        if text.upper().endswith("&END"):
            chunks.append(text[:-4])
            break
        chunks.append(text)
    else:
        raise FcidumpError(f"line {len(lines)}: header not terminated by '&END' or '/'")
    body = " ".join(chunks)
    keys = {}
    for m in _KEY.finditer(body):
        keys[m.group(1).upper()] = m.group(2).strip().rstrip(",")
    return keys, lineno + 1


def _header_int(keys: dict[str, str], name: str, default: int | None = None) -> int:
    if name not in keys:
        if default is None:
            raise FcidumpError(f"line 1: header is missing {name}")
        return default
    try:
        return int(keys[name])
    except ValueError as exc:
        raise FcidumpError(f"line 1: cannot read {name}={keys[name]!r}") from exc


def _data_lines(lines, start, norb):
    for lineno in range(start, len(lines)):
        fields = lines[lineno].split()
        if not fields:
            continue
        if len(fields) != 5:
            raise FcidumpError(f"line {lineno + 1}: expected 'value i j k l', got {lines[lineno]!r}")
        try:
            value = float(fields[0].replace("D", "E").replace("d", "e"))
            idx = tuple(int(x) for x in fields[1:])
        except ValueError as exc:
            raise FcidumpError(f"line {lineno + 1}: cannot parse {lines[lineno]!r}") from exc
        for x in idx:
            if not 0 <= x <= norb:
                raise FcidumpError(f"line {lineno + 1}: index {x} outside [1, {norb}]")
        yield lineno + 1, value, idx


def _store(table: dict, key, value, lineno, what, atol=1e-12):
    old = table.get(key)
    if old is not None and abs(old[0] - value) > atol * max(1.0, abs(value)):
        raise FcidumpError(
            f"line {lineno}: {what} {key} = {value!r} conflicts with line {old[1]} ({old[0]!r})"
        )
    table[key] = (value, lineno)


def _two_body_images(p, q, r, s):
    return {(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
            (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)}


def parse_fcidump(text: str) -> MolecularIntegrals:
    """Parse FCIDUMP text into :class:`MolecularIntegrals`.

    Entries that are not listed are zero. A line with all indices zero sets
    the core energy; ``i j 0 0`` lines are one-body terms. Two-body entries
    are expanded over the eight permutations of ``(pq|rs)``. Repeating an
    entry (under any permutation) with a different value is an error.
    """
    lines = text.splitlines()
    keys, start = _split_header(lines)
    norb = _header_int(keys, "NORB")
    nelec = _header_int(keys, "NELEC")
    ms2 = _header_int(keys, "MS2", 0)
    if norb < 1:
        raise FcidumpError("line 1: NORB must be at least 1")
    if "ORBSYM" in keys:
        try:
            orbsym = [int(x) for x in keys["ORBSYM"].replace(",", " ").split()]
        except ValueError as exc:
            raise FcidumpError(f"line 1: cannot read ORBSYM={keys['ORBSYM']!r}") from exc
        if len(orbsym) != norb:
            raise FcidumpError(f"line 1: ORBSYM has {len(orbsym)} labels for NORB={norb}")
        if any(not 1 <= x <= 8 for x in orbsym):
            raise FcidumpError("line 1: ORBSYM labels must lie in 1..8")
    else:
        orbsym = [1] * norb

    h1 = np.zeros((norb, norb))
    g2 = np.zeros((norb, norb, norb, norb))
    core = 0.0
    one: dict = {}
    two: dict = {}
    core_seen = None
    for lineno, value, (i, j, k, l) in _data_lines(lines, start, norb):
        if i == j == k == l == 0:
            if core_seen is not None and abs(core_seen[0] - value) > 1e-12 * max(1.0, abs(value)):
                raise FcidumpError(f"line {lineno}: core energy conflicts with line {core_seen[1]}")
            core_seen = (value, lineno)
            core = value
        elif k == l == 0:
            if i == 0 or j == 0:
                raise FcidumpError(f"line {lineno}: one-body entry needs two nonzero indices")
            _store(one, tuple(sorted((i, j))), value, lineno, "one-body entry")
        elif i == 0 or j == 0 or k == 0 or l == 0:
            # orbital energies (i 0 0 0) carry no Hamiltonian information
            if j == k == l == 0:
                continue
            raise FcidumpError(f"line {lineno}: malformed index pattern {(i, j, k, l)}")
        else:
            canon = min(_two_body_images(i, j, k, l))
            _store(two, canon, value, lineno, "two-body entry")

    for (i, j), (value, _) in one.items():
        h1[i - 1, j - 1] = h1[j - 1, i - 1] = value
    for idx, (value, _) in two.items():
        for p, q, r, s in _two_body_images(*idx):
            g2[p - 1, q - 1, r - 1, s - 1] = value
    h1.setflags(write=False)
    g2.setflags(write=False)
    return MolecularIntegrals(
        n_spatial=norb,
        n_electrons=nelec,
        core_energy=core,
        one_body=h1,
        two_body=g2,
        orbital_irreps=tuple(x - 1 for x in orbsym),
        ms2=ms2,
    )


def parse_property_integrals(text: str, component: str = "z") -> PropertyIntegrals:
    """Parse a one-body property file (same grammar, ``k = l = 0``)."""
    lines = text.splitlines()
    keys, start = _split_header(lines)
    norb = _header_int(keys, "NORB")
    mu = np.zeros((norb, norb))
    nuclear = 0.0
    seen: dict = {}
    for lineno, value, (i, j, k, l) in _data_lines(lines, start, norb):
        if i == j == k == l == 0:
            nuclear = value
        elif k == l == 0 and i and j:
            _store(seen, tuple(sorted((i, j))), value, lineno, "property entry")
        else:
            raise FcidumpError(f"line {lineno}: property files hold one-body entries only")
    for (i, j), (value, _) in seen.items():
        mu[i - 1, j - 1] = mu[j - 1, i - 1] = value
    mu.setflags(write=False)
    return PropertyIntegrals(component=component, one_body=mu, nuclear_term=nuclear)


def read_fcidump(path) -> MolecularIntegrals:
    with open(path) as f:
        return parse_fcidump(f.read())


def read_property_integrals(path, component: str | None = None) -> PropertyIntegrals:
    if component is None:
        tail = str(path)[-1].lower()
        component = tail if tail in "xyz" else "z"
    with open(path) as f:
        return parse_property_integrals(f.read(), component)


def write_fcidump(mi: MolecularIntegrals, tol: float = 0.0) -> str:
    """Serialize integrals, one line per symmetry-unique entry."""
    n = mi.n_spatial
    out = [
        f" &FCI NORB={n},NELEC={mi.n_electrons},MS2={mi.ms2},",
        "  ORBSYM=" + ",".join(str(x + 1) for x in mi.orbital_irreps) + ",",
        "  ISYM=1,",
        " &END",
    ]
    seen = set()
    for p, q, r, s in product(range(n), repeat=4):
        canon = min(_two_body_images(p, q, r, s))
        if canon in seen:
            continue
        seen.add(canon)
        v = mi.two_body[p, q, r, s]
        if abs(v) > tol:
            out.append(f" {float(v)!r} {p + 1} {q + 1} {r + 1} {s + 1}")
    for p in range(n):
        for q in range(p + 1):
            v = mi.one_body[p, q]
            if abs(v) > tol:
                out.append(f" {float(v)!r} {p + 1} {q + 1} 0 0")
    out.append(f" {float(mi.core_energy)!r} 0 0 0 0")
    return "\n".join(out) + "\n"


def validate_integrals(mi: MolecularIntegrals, rtol: float = 1e-12) -> ValidationReport:
    """Check hermiticity and eight-fold permutational symmetry.

    Returns a report keyed by the violated relation with the worst absolute
    deviation. Never raises.
    """
    report = ValidationReport()
    h = np.asarray(mi.one_body)
    g = np.asarray(mi.two_body)
    n = mi.n_spatial
    if h.shape != (n, n) or g.shape != (n, n, n, n):
        report.violations["shape"] = float("inf")
        return report
    scale = max(1.0, float(np.abs(g).max(initial=0.0)))
    dev = float(np.abs(h - h.T).max(initial=0.0))
    if dev > rtol * max(1.0, float(np.abs(h).max(initial=0.0))):
        report.violations["one_body hermiticity"] = dev
    perms = {
        "two_body (pq|rs)=(qp|rs)": (1, 0, 2, 3),
        "two_body (pq|rs)=(pq|sr)": (0, 1, 3, 2),
        "two_body (pq|rs)=(rs|pq)": (2, 3, 0, 1),
    }
    for name, axes in perms.items():
        dev = float(np.abs(g - g.transpose(axes)).max(initial=0.0))
        if dev > rtol * scale:
            report.violations[name] = dev
    if len(mi.orbital_irreps) != n or any(not 0 <= x < 8 for x in mi.orbital_irreps):
        report.violations["orbital_irreps"] = float(len(mi.orbital_irreps))
        return report
    h_bad, g_bad = symmetry_forbidden_masks(mi.orbital_irreps)
    dev = max(float(np.abs(h[h_bad]).max(initial=0.0)), float(np.abs(g[g_bad]).max(initial=0.0)))
    if dev > rtol * scale:
        report.violations["symmetry-forbidden integrals"] = dev
    return report


def symmetry_forbidden_masks(orbital_irreps) -> tuple[np.ndarray, np.ndarray]:
    """Boolean masks of one- and two-body entries whose irrep product is not totally symmetric."""
    g = np.asarray(orbital_irreps, dtype=np.int64)
    h_bad = (g[:, None] ^ g[None, :]) != 0
    g_bad = (g[:, None, None, None] ^ g[None, :, None, None] ^ g[None, None, :, None] ^ g[None, None, None, :]) != 0
    return h_bad, g_bad
