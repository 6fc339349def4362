"""Batch experiment runner and report comparison."""
from __future__ import annotations

import csv
import io
import json
import logging
import os
from importlib import metadata, resources
from pathlib import Path

from .basis import parity_close, seed_basis
from .config import ExperimentConfig, load_config
from .field_lab import SweepReport, sweep
from .kernels import BACKEND
from .system import ParticleSystem, build_transformation, internal_hamiltonian
from .variational import OptimizeOptions, optimize_nonlinear

log = logging.getLogger(__name__)

CSV_COLUMNS = ("epsilon", "energy", "mz_expectation", "hf_residual")


def package_version() -> str:
    try:
        return metadata.version("ecgfield")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def build_system(cfg: ExperimentConfig):
    sys = ParticleSystem.from_particles((p.mass, p.charge, p.label) for p in cfg.system.particles)
    T = build_transformation(sys, cfg.system.transformation)
    return internal_hamiltonian(sys, T)


def execute(cfg: ExperimentConfig) -> SweepReport:
    """Run one experiment in memory."""
    spec = build_system(cfg)
    b = cfg.basis
    basis = seed_basis(spec, b.K, b.placement, d=b.d, seed=b.seed, scale=b.scale, delta=b.delta)
    if b.parity_close:
        basis = parity_close(basis)
    o = cfg.optimization
    opts = OptimizeOptions(
        max_iters=o.max_iters,
        stat_tol=o.stat_tol,
        parity_constrained=o.parity_constrained,
        lin_dep_tol=o.lin_dep_tol,
    )
    if not o.reoptimize_per_field and o.max_iters > 0:
        basis, state = optimize_nonlinear(basis, spec, 0.0, opts)
        log.info("zero-field optimization: E=%.12f converged=%s", state.energy, state.converged)
    return sweep(
        basis,
        spec,
        cfg.sweep.resolved_fields(),
        reoptimize_per_field=o.reoptimize_per_field,
        opts=opts,
        powers=cfg.powers,
        fd_step=cfg.sweep.fd_step,
    )


def report_document(cfg: ExperimentConfig, rep: SweepReport) -> dict:
    return {
        "provenance": {
            "config_hash": cfg.config_hash(),
            "system_hash": cfg.system_hash(),
            "seed": cfg.basis.seed,
            "version": package_version(),
            "kernel_backend": BACKEND,
        },
        "config": cfg.model_dump(mode="json"),
        "report": rep.to_dict(),
    }


def sweep_csv(rep: SweepReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in zip(rep.fields, rep.energies, rep.dipole_expectations, rep.hf_residuals):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_outputs(cfg: ExperimentConfig, rep: SweepReport, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in cfg.output.formats:
        p = out_dir / "report.json"
        p.write_text(json.dumps(report_document(cfg, rep), indent=2) + "\n", encoding="utf-8")
        written.append(p)
    if "csv" in cfg.output.formats:
        p = out_dir / "sweep.csv"
        p.write_text(sweep_csv(rep), encoding="utf-8")
        written.append(p)
    return written


def check_writable(path: Path) -> None:
    probe = path
    while not probe.exists():
        probe = probe.parent
    if not probe.is_dir():
        raise NotADirectoryError(f"output path {path} lies below a regular file {probe}")
    if not os.access(probe, os.W_OK):
        raise PermissionError(f"output directory {path} is not writable")


# --- presets -----------------------------------------------------------------


def preset_names() -> list[str]:
    root = resources.files("ecgfield") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def preset_config(name: str) -> dict:
    root = resources.files("ecgfield") / "presets"
    path = root / f"{name}.json"
    if not path.is_file():
        raise KeyError(f"no preset named {name!r}; known: {preset_names()}")
    return json.loads(path.read_text())


def resolve_config(source: str) -> ExperimentConfig:
    """A config path, a report.json with embedded config, or a preset name."""
    p = Path(source)
    if not p.exists() and source in preset_names():
        return load_config(preset_config(source))
    return load_config(p)


# --- comparison --------------------------------------------------------------


class ReportMismatch(ValueError):
    pass


_COMPARE_ROWS = (
    ("e1", lambda r: r["e1"]),
    ("e2", lambda r: r["e2"]),
    ("dipole mu_z", lambda r: r["dipole"]["mu_z"] if r["dipole"] else 0.0),
    ("mz_at_zero", lambda r: r["parity_diag"]["mz_at_zero"]),
    ("parity_overlap", lambda r: r["parity_diag"]["parity_overlap"]),
    ("max hf_residual", lambda r: max(r["hf_residuals"])),
)


def compare_documents(a: dict, b: dict) -> list[tuple[str, float, float, float]]:
    """Rows of (quantity, a, b, |a|/|b|); raises if the systems differ."""
    if a["provenance"]["system_hash"] != b["provenance"]["system_hash"]:
        raise ReportMismatch("reports describe different particle systems")
    rows = []
    for name, get in _COMPARE_ROWS:
        va, vb = float(get(a["report"])), float(get(b["report"]))
        if va == vb:
            ratio = 1.0
        elif vb == 0.0:
            ratio = float("inf")
        else:
            ratio = abs(va) / abs(vb)
        rows.append((name, va, vb, ratio))
    return rows


def format_comparison(rows, label_a="A", label_b="B") -> str:
    lines = [f"{'quantity':<16} {label_a:>24} {label_b:>24} {'|A|/|B|':>12}"]
    for name, va, vb, ratio in rows:
        lines.append(f"{name:<16} {va:>24.15e} {vb:>24.15e} {ratio:>12.4g}")
    return "\n".join(lines)
