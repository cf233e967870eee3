"""YAML run configuration for the scan driver."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .fock import SectorError, parse_occupation

METHODS = ("adapt", "more_adapt", "qsceom", "fci")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class Geometry:
    id: str
    fcidump: Path
    dipoles: tuple[Path, ...] | None = None
    coordinate: float | None = None


@dataclass(frozen=True)
class Stop:
    max_ops: int | None = None
    grad_norm: float | None = None
    energy_change: float | None = None
    fci_tol: float | None = None


@dataclass(frozen=True)
class Optimizer:
    gtol: float = 1e-8
    max_iter: int | None = None
    recycle_hessian: bool = True


@dataclass(frozen=True)
class RunConfig:
    name: str
    method: str
    geometries: tuple[Geometry, ...]
    references: tuple[tuple[tuple[str, float], ...], ...]
    reference_names: tuple[str, ...]
    weights: tuple[float, ...] | None
    sector: Any  # "auto", "all", or a list of irreps
    stop: Stop
    ground_stop: Stop
    ground_reference: Any  # int or "lowest"
    optimizer: Optimizer
    fci_states: int | None
    coordinate_label: str
    output: Path
    plots: bool = True
    source: Path | None = field(default=None, compare=False)


def _csf(entry, where: str) -> tuple[tuple[str, float], ...]:
    spec = entry.get("csf") if isinstance(entry, dict) else entry
    if isinstance(spec, str):
        spec = [[spec, 1.0]]
    try:
        out = tuple((str(occ), float(c)) for occ, c in spec)
        for occ, _ in out:
            parse_occupation(occ)
    except (TypeError, ValueError, SectorError) as exc:
        raise ConfigError(f"{where}: cannot parse CSF {spec!r} ({exc})") from None
    norm = sum(c * c for _, c in out)
    if abs(norm - 1.0) > 1e-6:
        raise ConfigError(f"{where}: CSF coefficients have norm^2 {norm:.6g}, expected 1")
    return out


def _check_orthonormal(refs, tol=1e-6):
    k = len(refs)
    g = np.zeros((k, k))
    dicts = [dict(r) for r in refs]
    for i in range(k):
        for j in range(k):
            g[i, j] = sum(c * dicts[j].get(occ, 0.0) for occ, c in dicts[i].items())
    dev = np.abs(g - np.eye(k)).max() if k else 0.0
    if dev > tol:
        raise ConfigError(f"references are not orthonormal (max deviation {dev:.2e})")


def _stop(d, where) -> Stop:
    if d is None:
        return Stop()
    unknown = set(d) - {"max_ops", "grad_norm", "energy_change", "fci_tol"}
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    return Stop(
        max_ops=None if d.get("max_ops") is None else int(d["max_ops"]),
        grad_norm=None if d.get("grad_norm") is None else float(d["grad_norm"]),
        energy_change=None if d.get("energy_change") is None else float(d["energy_change"]),
        fci_tol=None if d.get("fci_tol") is None else float(d["fci_tol"]),
    )


def _geometries(raw, base: Path, coord: str | None) -> tuple[tuple[Geometry, ...], str]:
    fixtures = base
    meta = None
    if (fixtures / "meta.json").exists():
        meta = json.loads((fixtures / "meta.json").read_text())
    known = {g["id"]: g for g in meta["geometries"]} if meta else {}
    if raw == "all":
        if meta is None:
            raise ConfigError(f"'geometries: all' needs {fixtures / 'meta.json'}")
        raw = [g["id"] for g in meta["geometries"]]
    if raw is None:
        raw = []
    if not isinstance(raw, list):
        raise ConfigError("geometries must be 'all' or a list")
    if coord is None and known:
        first = next(iter(known.values()))
        coord = next((k for k, v in first.items() if k != "id" and isinstance(v, (int, float))), "index")
    coord = coord or "index"
    out = []
    for n, g in enumerate(raw):
        if isinstance(g, (str, int, float)):
            g = {"id": str(g)}
        gid = str(g["id"])
        fcidump = Path(g.get("fcidump", fixtures / f"{gid}.fcidump"))
        if not fcidump.is_absolute():
            fcidump = fixtures / fcidump
        if "dipoles" in g:
            dips = tuple(p if p.is_absolute() else fixtures / p for p in map(Path, g["dipoles"]))
        else:
            dips = tuple(fixtures / f"{gid}.dip{a}" for a in "xyz")
            if not all(p.exists() for p in dips):
                dips = None
        for p in (fcidump, *(dips or ())):
            if not p.exists():
                raise ConfigError(f"geometry {gid}: missing file {p}")
        x = g.get("coordinate", known.get(gid, {}).get(coord, n))
        out.append(Geometry(gid, fcidump, dips, float(x)))
    return tuple(out), coord


def parse_config(data: dict, base: Path = Path("."), source: Path | None = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    method = data.get("method")
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got {method!r}")
    fixtures = Path(data.get("fixtures", "."))
    fixtures = fixtures if fixtures.is_absolute() else base / fixtures
    geoms, coord = _geometries(data.get("geometries"), fixtures, data.get("coordinate"))

    raw_refs = data.get("references") or []
    refs = tuple(_csf(r, f"reference {i}") for i, r in enumerate(raw_refs))
    names = tuple(
        (r.get("name") if isinstance(r, dict) and r.get("name") else f"ref{i}") for i, r in enumerate(raw_refs)
    )
    lengths = {len(occ) for r in refs for occ, _ in r}
    if len(lengths) > 1:
        raise ConfigError(f"occupation strings have different lengths {sorted(lengths)}")
    _check_orthonormal(refs)
    if method != "fci" and not refs:
        raise ConfigError(f"method {method} needs references")
    if method == "qsceom" and len(refs) < 2:
        raise ConfigError("qsceom needs a ground reference and at least one manifold reference")

    weights = data.get("weights", "equal")
    if weights == "equal" or weights is None:
        weights = None
    else:
        weights = tuple(float(w) for w in weights)
        if len(weights) != len(refs) or min(weights) <= 0:
            raise ConfigError("weights must be positive, one per reference")

    stop = _stop(data.get("stop"), "stop")
    ground_stop = _stop(data.get("ground_stop"), "ground_stop") if "ground_stop" in data else stop
    for s, where in ((stop, "stop"), (ground_stop, "ground_stop")):
        if method != "fci" and s.max_ops is None and s.grad_norm is None and s.energy_change is None:
            raise ConfigError(f"{where}: set at least one of max_ops, grad_norm, energy_change")

    gref = data.get("ground_reference", 0)
    if gref != "lowest" and not (isinstance(gref, int) and 0 <= gref < max(len(refs), 1)):
        raise ConfigError("ground_reference must be 'lowest' or a reference index")

    opt = data.get("optimizer") or {}
    optimizer = Optimizer(
        gtol=float(opt.get("gtol", 1e-8)),
        max_iter=None if opt.get("max_iter") is None else int(opt["max_iter"]),
        recycle_hessian=bool(opt.get("recycle_hessian", True)),
    )
    output = Path(data.get("output", "out"))
    output = output if output.is_absolute() else base / output
    sector = data.get("sector", "auto")
    if not (sector in ("auto", "all") or isinstance(sector, list)):
        raise ConfigError("sector must be 'auto', 'all' or a list of irrep labels")
    fci_states = data.get("fci_states", 12 if method == "fci" else None)
    return RunConfig(
        name=str(data.get("name", source.stem if source else "scan")),
        method=method,
        geometries=geoms,
        references=refs,
        reference_names=names,
        weights=weights,
        sector=sector,
        stop=stop,
        ground_stop=ground_stop,
        ground_reference=gref,
        optimizer=optimizer,
        fci_states=None if fci_states is None else int(fci_states),
        coordinate_label=coord,
        output=output,
        plots=bool(data.get("plots", True)),
        source=source,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data, path.parent.resolve(), path)
