"""Scan driver: one method over a list of geometries, CSV tables out.

Per geometry (``<output>/<id>/``): ``energies.csv``, ``trace.csv``,
``properties.csv``. Per scan: ``curves.csv``, ``properties.csv``,
``summary.csv``, ``run.json`` and, when enabled, plots under ``plots/``.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import Geometry, RunConfig
from .estimators import AdaptVQE, FCISolver, MoreAdaptVQE, QscEOM
from .fci import assign_states
from .integral_io import read_fcidump, read_property_integrals
from .problem import Problem, build_problem, reference_irreps
from .properties import DEBYE_PER_AU, expectation_values, operator_in_state_basis, transition_dipole_sq
from .adapt import write_trace_csv

log = logging.getLogger(__name__)

ENERGY_COLUMNS = [
    "geometry", "coordinate", "state", "label", "irrep", "energy", "fci_index",
    "fci_energy", "error", "s2", "overlap", "ambiguous", "coupling_norm",
]
PROPERTY_COLUMNS = [
    "geometry", "coordinate", "i", "j", "label_i", "label_j",
    "mu2_x", "mu2_y", "mu2_z", "mu2_total", "s2_i", "s2_j",
]
SUMMARY_COLUMNS = [
    "geometry", "coordinate", "method", "n_states", "total_ops", "distinct_ops", "pool_size",
    "sector_dims", "bound", "basis_dim", "iterations", "stop_reason", "max_abs_error",
]


def fmt(x) -> str:
    """Deterministic text for CSV cells; floats get 12 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    if x is None:
        return ""
    return str(x)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


class StageError(RuntimeError):
    """A geometry failed; carries the geometry id and the stage that raised."""

    def __init__(self, geometry: str, stage: str, message: str):
        super().__init__(f"geometry {geometry}: {stage} failed: {message}")
        self.geometry = geometry
        self.stage = stage
        self.message = message

    def __reduce__(self):
        return (StageError, (self.geometry, self.stage, self.message))


@dataclass
class GeometryResult:
    geometry: str
    energies: list[dict] = field(default_factory=list)
    properties: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def spin_labels(s2: np.ndarray, energies: np.ndarray) -> list[str]:
    """S0, S1, ... for singlets, T1, T2, ... for triplets, Q1 ... for quintets."""
    mult = np.rint(np.sqrt(1.0 + 4.0 * np.maximum(s2, 0.0))).astype(int)  # 2s+1
    prefix = {1: "S", 2: "D", 3: "T", 4: "Qt", 5: "Q"}
    counts: dict[int, int] = {}
    labels = [""] * len(s2)
    for i in np.argsort(energies, kind="stable"):
        m = int(mult[i])
        n = counts.get(m, 0 if m == 1 else 1)
        counts[m] = n + 1
        labels[i] = f"{prefix.get(m, f'M{m}_')}{n}"
    return labels


def dominant_irreps(states: np.ndarray, problem: Problem) -> np.ndarray:
    irr = problem.basis.irreps()
    labels = np.unique(irr)
    w = np.stack([(states[irr == g] ** 2).sum(axis=0) for g in labels])
    return labels[np.argmax(w, axis=0)]


def _ground_index(cfg: RunConfig, problem: Problem) -> int:
    if cfg.ground_reference != "lowest":
        return int(cfg.ground_reference)
    # lowest <phi|H|phi> among references sharing the exact ground state's irrep and spin
    h = problem.h.matrix(problem.basis)
    s2 = problem.s_squared.matrix(problem.basis, project=True)
    spec = problem.fci()
    g_irrep, g_s2 = spec.irreps[0], spec.s2_values[0]
    refs = [problem.reference(r) for r in cfg.references]
    irreps = [reference_irreps([r], problem.integrals.orbital_irreps)[0] for r in cfg.references]
    e = np.array([float(v.coeffs @ (h @ v.coeffs)) for v in refs])
    ok = np.array(
        [g == g_irrep and abs(v.coeffs @ (s2 @ v.coeffs) - g_s2) < 0.5 for g, v in zip(irreps, refs)]
    )
    if ok.any():
        e = np.where(ok, e, np.inf)
    return int(np.argmin(e))


def _working_irreps(cfg: RunConfig, orbital_irreps):
    if cfg.sector == "all":
        return None
    if cfg.sector == "auto":
        return reference_irreps(cfg.references, orbital_irreps) if cfg.references else None
    return tuple(int(x) for x in cfg.sector)


def _adapt_kwargs(cfg: RunConfig, stop) -> dict:
    return dict(
        max_ops=stop.max_ops,
        grad_norm=stop.grad_norm,
        energy_change=stop.energy_change,
        target_tol=stop.fci_tol if stop.fci_tol is not None else 1e-10,
        gtol=cfg.optimizer.gtol,
        max_iter=cfg.optimizer.max_iter,
        recycle_hessian=cfg.optimizer.recycle_hessian,
    )


def run_geometry(cfg: RunConfig, geom: Geometry, outdir: Path) -> GeometryResult:
    stage = "read"
    try:
        mi = read_fcidump(geom.fcidump)
        props = None
        if geom.dipoles:
            props = [read_property_integrals(p, a) for p, a in zip(geom.dipoles, "xyz")]

        stage = "setup"
        problem = build_problem(mi, _working_irreps(cfg, mi.orbital_irreps), props)
        sector_dims = problem.sector_dims()
        ref_irreps = [reference_irreps([r], mi.orbital_irreps)[0] for r in cfg.references]

        stage = cfg.method
        trace = None
        coupling = None
        used_refs = list(range(len(cfg.references)))
        if cfg.method == "fci":
            est = FCISolver(cfg.fci_states and min(cfg.fci_states, len(problem.basis))).fit(problem)
            n_ops = distinct = 0
            iterations, reason = 0, "exact"
        elif cfg.method == "adapt":
            gi = _ground_index(cfg, problem)
            used_refs = [gi]
            if cfg.sector == "auto":
                problem = problem.restricted((ref_irreps[gi],))
            target = problem.fci().energies[0] if cfg.stop.fci_tol is not None else None
            est = AdaptVQE(**_adapt_kwargs(cfg, cfg.stop)).fit(problem, cfg.references[gi], target)
            trace, reason = est.trace_, est.stop_reason_
        elif cfg.method == "more_adapt":
            k = len(cfg.references)
            target = problem.fci().energies[:k] if cfg.stop.fci_tol is not None else None
            est = MoreAdaptVQE(**_adapt_kwargs(cfg, cfg.stop)).fit(problem, cfg.references, cfg.weights, target)
            trace, reason = est.trace_, est.stop_reason_
        else:
            gi = _ground_index(cfg, problem)
            target = None
            if cfg.ground_stop.fci_tol is not None:
                target = problem.restricted((ref_irreps[gi],)).fci().energies[0]
            est = QscEOM(ground=AdaptVQE(**_adapt_kwargs(cfg, cfg.ground_stop))).fit(
                problem, cfg.references[gi], [r for i, r in enumerate(cfg.references) if i != gi], target
            )
            trace, reason = est.ground_.trace_, est.ground_.stop_reason_
            coupling = est.coupling_norm_
        if cfg.method != "fci":
            n_ops, distinct = len(est.ansatz_), est.ansatz_.n_distinct()
            iterations = len(trace)

        stage = "properties"
        states = est.states()
        energies = np.asarray(est.energies_, dtype=float)
        spectrum = problem.fci()
        s2 = expectation_values(problem.s_squared, states, problem.basis)
        labels = spin_labels(s2, energies)
        irreps = dominant_irreps(states, problem)
        if cfg.method == "fci":
            mapping, overlaps = np.arange(len(energies)), np.ones(len(energies))
            ambiguous = np.zeros(len(energies), dtype=bool)
        else:
            a = assign_states(states, spectrum)
            mapping, overlaps, ambiguous = a.mapping, a.overlaps, a.ambiguous
        rows = []
        for i in range(len(energies)):
            fe = spectrum.energies[mapping[i]] if mapping[i] >= 0 else float("nan")
            rows.append(
                dict(
                    geometry=geom.id, coordinate=geom.coordinate, state=i, label=labels[i],
                    irrep=int(irreps[i]), energy=energies[i], fci_index=int(mapping[i]), fci_energy=fe,
                    error=energies[i] - fe, s2=s2[i], overlap=overlaps[i], ambiguous=bool(ambiguous[i]),
                    coupling_norm=coupling if i == 0 else None,
                )
            )
        prop_rows = []
        if problem.dipole is not None:
            mats = [operator_in_state_basis(d, states, problem.basis, a).matrix for d, a in zip(problem.dipole, "xyz")]
            for i in range(len(energies)):
                for j in range(i, len(energies)):
                    comps = [transition_dipole_sq(i, j, [m]) for m in mats]
                    prop_rows.append(
                        dict(
                            geometry=geom.id, coordinate=geom.coordinate, i=i, j=j, label_i=labels[i],
                            label_j=labels[j], mu2_x=comps[0], mu2_y=comps[1], mu2_z=comps[2],
                            mu2_total=transition_dipole_sq(i, j, mats), s2_i=s2[i], s2_j=s2[j],
                        )
                    )
        dims = [sector_dims.get(ref_irreps[i], 0) for i in used_refs]
        summary = dict(
            geometry=geom.id, coordinate=geom.coordinate, method=cfg.method, n_states=len(energies),
            total_ops=n_ops, distinct_ops=distinct, pool_size=len(problem.pool), sector_dims=";".join(map(str, dims)),
            bound=sum(dims), basis_dim=len(problem.basis), iterations=iterations, stop_reason=reason,
            max_abs_error=float(np.max(np.abs([r["error"] for r in rows]))) if rows else 0.0,
        )

        stage = "write"
        gdir = outdir / geom.id
        write_atomic(gdir / "energies.csv", _csv_text(ENERGY_COLUMNS, rows))
        write_atomic(gdir / "properties.csv", _csv_text(PROPERTY_COLUMNS, prop_rows))
        buf = io.StringIO()
        if trace is not None and len(trace):
            write_trace_csv(trace, buf)
        else:
            buf.write("iter,pool_id,max_grad,grad_norm,e_sa,vqe_iter,n_distinct_ops\n")
        write_atomic(gdir / "trace.csv", buf.getvalue())
        log.info("%s: %s done, %d ops, max |E-E_FCI| %.3e", geom.id, cfg.method, n_ops, summary["max_abs_error"])
        return GeometryResult(geom.id, rows, prop_rows, summary)
    except StageError:
        raise
    except Exception as exc:  # noqa: BLE001 - reported with geometry and stage
        raise StageError(geom.id, stage, f"{type(exc).__name__}: {exc}") from exc


def summarize_ansatz(results) -> str:
    """Summary CSV text: ops, distinct ops, pool size, sector dims and the linear bound."""
    return _csv_text(SUMMARY_COLUMNS, [r.summary for r in results])


@dataclass
class ScanReport:
    output: Path
    results: list[GeometryResult]
    failures: list[StageError]

    @property
    def ok(self) -> bool:
        return not self.failures


def _run_one(args):
    cfg, geom, outdir = args
    try:
        return run_geometry(cfg, geom, outdir)
    except StageError as exc:
        return exc


def run_scan(cfg: RunConfig, output: Path | None = None, jobs: int = 1) -> ScanReport:
    outdir = Path(output or cfg.output)
    outdir.mkdir(parents=True, exist_ok=True)
    tasks = [(cfg, g, outdir) for g in cfg.geometries]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            outcomes = list(ex.map(_run_one, tasks))
    else:
        outcomes = [_run_one(t) for t in tasks]
    results = [o for o in outcomes if isinstance(o, GeometryResult)]
    failures = [o for o in outcomes if isinstance(o, StageError)]
    for f in failures:
        log.error("%s", f)

    write_atomic(outdir / "curves.csv", _csv_text(ENERGY_COLUMNS, [r for g in results for r in g.energies]))
    write_atomic(outdir / "properties.csv", _csv_text(PROPERTY_COLUMNS, [r for g in results for r in g.properties]))
    write_atomic(outdir / "summary.csv", summarize_ansatz(results))
    run_info = {
        "name": cfg.name,
        "method": cfg.method,
        "geometries": [g.id for g in cfg.geometries],
        "coordinate": cfg.coordinate_label,
        "references": [list(map(list, r)) for r in cfg.references],
        "debye_per_au": DEBYE_PER_AU,
        "failed": [{"geometry": f.geometry, "stage": f.stage, "error": str(f)} for f in failures],
    }
    write_atomic(outdir / "run.json", json.dumps(run_info, indent=2) + "\n")
    if cfg.plots:
        from .plots import plot_scan

        plot_scan(outdir, cfg.coordinate_label, cfg.name)
    return ScanReport(outdir, results, failures)
