"""Experiment runner: every probe as a reproducible command.

    bergman-dpp sample --config cfg [--seed N] [--threads N] [--out DIR]
    bergman-dpp probe <name> --config cfg [...]
    bergman-dpp report DIR

Each run writes its fully-resolved config next to its outputs; rerunning
from that file reproduces every numeric output byte for byte.  Exit
codes: 0 pass, 1 probe fail, 2 config error, 3 numeric contract
violation.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import PROBE_NAMES, ExperimentConfig, parse_config, resolved_text
from .conditional import (
    conditional_kernel,
    conditional_oracle,
    deletion_tolerance_probe,
    number_insertion_probe,
)
from .coupling import difference_trace_bound, domination_check, monotone_coupling
from .discretize import (
    DppKernel,
    Grid,
    basis_projection_kernel,
    build_grid,
    grid_to_csv,
    kernel_matrix,
    zero_block,
)
from .dpp import RngSeed, exact_distribution, sample, total_variation
from .errors import (
    BergmanDppError,
    ConfigError,
    ContractViolationError,
    DominationError,
    DomainError,
    GridTooCoarseError,
    LatticePointError,
    SingularMatrixError,
    SingularResolventError,
    UndefinedPalmError,
)
from .gaf import intensity_compare, roots, sample_gaf
from .kernels import Annulus, annulus_laurent_extended, dimension, eval_kernel
from .palm import palm_distribution_oracle, palm_kernel
from .reports import atomic_write_text, csv_text, json_text, svg_scatter

EXIT_OK, EXIT_PROBE_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

_NUMERIC_ERRORS = (
    ContractViolationError,
    SingularMatrixError,
    GridTooCoarseError,
    UndefinedPalmError,
    SingularResolventError,
    LatticePointError,
    DomainError,
)

ORACLE_SIZE_LIMIT = 10


def select_block(grid: Grid, rule: str) -> tuple:
    """Indices picked by a declarative rule: 'radius < X' or 'indices i,j,k'."""
    text = rule.strip()
    low = text.lower().replace("disk_radius", "radius")
    if low.startswith("indices"):
        rest = text.split(None, 1)[1] if len(text.split(None, 1)) > 1 else ""
        rest = rest.lstrip(":").strip()
        if not rest:
            raise ConfigError(f"empty index list in b_rule {rule!r}")
        return tuple(sorted(set(int(tok) for tok in rest.split(","))))
    if low.startswith("radius"):
        op_part = low[len("radius"):].strip()
        if not op_part.startswith("<"):
            raise ConfigError(f"b_rule {rule!r} must use 'radius < X'")
        try:
            cutoff = float(op_part[1:].strip())
        except ValueError as exc:
            raise ConfigError(f"bad radius cutoff in b_rule {rule!r}") from exc
        norms = np.sqrt(np.sum(np.abs(grid.points) ** 2, axis=1))
        return tuple(int(i) for i in np.flatnonzero(norms < cutoff))
    raise ConfigError(f"unrecognized b_rule {rule!r}")


def build_kernel(cfg: ExperimentConfig) -> tuple[DppKernel, Grid, tuple]:
    spec = cfg.domain_spec()
    grid = build_grid(spec, cfg.grid_resolution, cfg.grid_inset)
    if cfg.kernel_mode == "basis":
        kernel = basis_projection_kernel(cfg.domain_alpha, cfg.kernel_basis_rank, grid)
    else:
        kernel = kernel_matrix(spec, grid, cfg.kernel_clamp_delta)
    block = select_block(grid, cfg.probe_b_rule)
    if any(i >= grid.size for i in block):
        raise ConfigError(f"b_rule selects indices beyond grid size {grid.size}")
    if cfg.kernel_zero_block_on_b:
        kernel = zero_block(kernel, block)
    return kernel, grid, block


def _seed(cfg: ExperimentConfig) -> RngSeed:
    return RngSeed(cfg.probe_seed, cfg.probe_stream)


def _require_oracle_size(kernel: DppKernel) -> None:
    if kernel.size > ORACLE_SIZE_LIMIT:
        raise ConfigError(
            f"oracle probes need a ground set of size <= {ORACLE_SIZE_LIMIT}, "
            f"got {kernel.size}; lower grid.resolution"
        )


def _palm_tuple(cfg: ExperimentConfig, kernel: DppKernel) -> tuple:
    p = cfg.probe_palm_indices
    if not p:
        raise ConfigError("probe.palm_indices must be nonempty for this probe")
    if any(i < 0 or i >= kernel.size for i in p):
        raise ConfigError(f"palm indices {p} outside ground set of {kernel.size}")
    return tuple(p)


def run_probe(name: str, cfg: ExperimentConfig, threads: int) -> dict:
    rng = _seed(cfg)
    if name == "deletion":
        kernel, _, block = build_kernel(cfg)
        if not block:
            raise ConfigError("b_rule selected no sites")
        return deletion_tolerance_probe(
            kernel, block, cfg.probe_samples, rng, threads
        ).to_dict()
    if name == "insertion":
        kernel, _, block = build_kernel(cfg)
        if not block:
            raise ConfigError("b_rule selected no sites")
        return number_insertion_probe(
            kernel, block, cfg.probe_samples, rng, threads
        ).to_dict()
    if name == "palm-oracle":
        kernel, _, _ = build_kernel(cfg)
        _require_oracle_size(kernel)
        p = _palm_tuple(cfg, kernel)
        tv = total_variation(
            palm_distribution_oracle(kernel, p),
            exact_distribution(palm_kernel(kernel, p)),
        )
        return {
            "probe": name,
            "palm_indices": list(p),
            "tv_distance": tv,
            "tolerance": 1e-8,
            "seed": [rng.seed, rng.stream],
            "pass": tv <= 1e-8,
        }
    if name == "conditional-oracle":
        kernel, _, block = build_kernel(cfg)
        _require_oracle_size(kernel)
        if not block or len(block) >= kernel.size:
            raise ConfigError("conditional oracle needs a proper nonempty window")
        tvs = []
        for i in range(cfg.probe_samples):
            cfg_sample = sample(kernel, rng.shifted(i))
            ext = tuple(j for j in cfg_sample if j not in set(block))
            kc = conditional_kernel(kernel, block, ext)
            pmf_kc = {
                tuple(block[i] for i in c): m
                for c, m in exact_distribution(kc).items()
            }
            tvs.append(total_variation(pmf_kc, conditional_oracle(kernel, block, ext)))
        return {
            "probe": name,
            "samples": cfg.probe_samples,
            "max_tv": max(tvs),
            "tolerance": 1e-8,
            "seed": [rng.seed, rng.stream],
            "pass": max(tvs) <= 1e-8,
        }
    if name in ("coupling", "trace-bound"):
        kernel, _, _ = build_kernel(cfg)
        _require_oracle_size(kernel)
        p = _palm_tuple(cfg, kernel)
        palm = palm_kernel(kernel, p)
        try:
            table = monotone_coupling(
                exact_distribution(kernel), exact_distribution(palm)
            )
        except DominationError as exc:
            return {
                "probe": name,
                "palm_indices": list(p),
                "seed": [rng.seed, rng.stream],
                "pass": False,
                "violation": exc.violation,
                "certificate_size": len(exc.certificate or ()),
            }
        if name == "coupling":
            return {
                "probe": name,
                "palm_indices": list(p),
                "pairs": len(table.pairs),
                "total_mass": table.total_mass(),
                "mean_size_difference": table.mean_size_difference(),
                "seed": [rng.seed, rng.stream],
                "pass": True,
            }
        report = difference_trace_bound(kernel, palm, table).to_dict()
        report.update(
            {"probe": name, "palm_indices": list(p), "seed": [rng.seed, rng.stream]}
        )
        return report
    if name == "domination":
        kernel, _, _ = build_kernel(cfg)
        p = _palm_tuple(cfg, kernel)
        palm = palm_kernel(kernel, p)
        if kernel.size <= ORACLE_SIZE_LIMIT:
            report = domination_check(kernel, palm).to_dict()
        else:
            report = domination_check(kernel, palm, cfg.probe_samples, rng).to_dict()
        report.update(
            {"probe": name, "palm_indices": list(p), "seed": [rng.seed, rng.stream]}
        )
        return report
    if name == "gaf":
        report = intensity_compare(
            cfg.gaf_n_coeff, cfg.gaf_radius, cfg.gaf_bins, cfg.gaf_trials, rng
        )
        return report.to_dict()
    if name == "annulus-check":
        if cfg.domain_kind != "annulus":
            raise ConfigError("annulus-check needs domain.kind = annulus")
        rho = cfg.domain_rho
        spec = Annulus(rho)
        gen = rng.generator()
        max_err = 0.0
        for _ in range(cfg.check_pairs):
            radii = np.sqrt(gen.uniform(rho**2, 1.0, size=2))
            angles = gen.uniform(0.0, 2.0 * np.pi, size=2)
            z = radii[0] * np.exp(1j * angles[0])
            w = radii[1] * np.exp(1j * angles[1])
            ref = annulus_laurent_extended(rho, complex(z), complex(w))
            err = abs(eval_kernel(spec, z, w) - ref) / abs(ref)
            max_err = max(max_err, err)
        return {
            "probe": name,
            "rho": rho,
            "pairs": cfg.check_pairs,
            "max_rel_error": max_err,
            "tolerance": 1e-8,
            "seed": [rng.seed, rng.stream],
            "pass": max_err <= 1e-8,
        }
    raise ConfigError(f"unknown probe '{name}'")


def cmd_probe(name: str, cfg: ExperimentConfig, threads: int) -> int:
    out = Path(cfg.output_dir)
    report = run_probe(name, cfg, threads)
    report["version"] = __version__
    atomic_write_text(out / "resolved_config.cfg", resolved_text(cfg))
    atomic_write_text(out / "report.json", json_text(report))
    if name == "gaf":
        _write_gaf_extras(cfg, report, out)
    return EXIT_OK if report.get("pass") else EXIT_PROBE_FAIL


def _write_gaf_extras(cfg: ExperimentConfig, report: dict, out: Path) -> None:
    if "csv" in cfg.output_formats:
        rows = [
            (
                b["r_lo"],
                b["r_hi"],
                repr(b["expected"]),
                repr(b["observed_mean"]),
                repr(b["z_score"]),
            )
            for b in report["bins"]
        ]
        atomic_write_text(
            out / "intensity.csv",
            csv_text(("bin_lo", "bin_hi", "expected", "observed_mean", "z_score"), rows),
        )
    if "svg" in cfg.output_formats:
        coeffs = sample_gaf(cfg.gaf_n_coeff, _seed(cfg))
        zeros = roots(coeffs).roots
        inside = zeros[np.abs(zeros) < cfg.gaf_radius]
        atomic_write_text(
            out / "zeros.svg",
            svg_scatter(inside, outline_radius=cfg.gaf_radius, title="gaf zeros"),
        )


def cmd_sample(cfg: ExperimentConfig, threads: int) -> int:
    kernel, grid, _ = build_kernel(cfg)
    rng = _seed(cfg)
    configs = [sample(kernel, rng.shifted(i)) for i in range(cfg.probe_samples)]
    counts = np.array([len(c) for c in configs], dtype=float)
    out = Path(cfg.output_dir)
    atomic_write_text(out / "resolved_config.cfg", resolved_text(cfg))
    payload = {
        "version": __version__,
        "seed": [rng.seed, rng.stream],
        "count": cfg.probe_samples,
        "kernel_trace": kernel.trace(),
        "mean_count": float(counts.mean()),
        "configurations": [list(c) for c in configs],
    }
    atomic_write_text(out / "configurations.json", json_text(payload))
    if "csv" in cfg.output_formats:
        d = dimension(grid.spec)
        header = ["sample", "index"]
        for j in range(d):
            header += [f"x{j}", f"y{j}"]
        rows = []
        for s, c in enumerate(configs):
            for i in c:
                row = [s, i]
                for j in range(d):
                    row += [repr(grid.points[i, j].real), repr(grid.points[i, j].imag)]
                rows.append(row)
        atomic_write_text(out / "points.csv", csv_text(header, rows))
        atomic_write_text(out / "grid.csv", grid_to_csv(grid))
    if "svg" in cfg.output_formats and dimension(grid.spec) == 1:
        first = next((c for c in configs if c), ())
        pts = grid.points[list(first), 0] if first else np.zeros(0, dtype=complex)
        atomic_write_text(
            out / "scatter.svg", svg_scatter(pts, outline_radius=1.0, title="sample")
        )
    return EXIT_OK


def cmd_report(directory: str) -> int:
    root = Path(directory)
    rows = []
    corrupt = []
    any_fail = False
    for path in sorted(root.rglob("report.json")):
        import json as _json

        try:
            data = _json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError):
            corrupt.append(str(path.relative_to(root)))
            continue
        probe = data.get("probe", "?")
        passed = bool(data.get("pass", False))
        any_fail = any_fail or not passed
        seed = data.get("seed", "-")
        rows.append(
            f"| {path.relative_to(root)} | {probe} | "
            f"{'PASS' if passed else 'FAIL'} | {seed} |"
        )
    lines = ["| report | probe | verdict | seed |", "|---|---|---|---|"] + rows
    if corrupt:
        lines += ["", "Unreadable reports:"] + [f"- {c}" for c in corrupt]
    text = "\n".join(lines) + "\n"
    atomic_write_text(root / "summary.md", text)
    sys.stdout.write(text)
    return EXIT_PROBE_FAIL if any_fail else EXIT_OK


def _load_config(args) -> ExperimentConfig:
    path = Path(args.config)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = parse_config(text, origin=str(path))
    if args.seed is not None:
        cfg = replace(cfg, probe_seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bergman-dpp",
        description="determinantal point processes from weighted Bergman kernels",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="draw configurations, write files")
    p_probe = sub.add_parser("probe", help="run a verification probe")
    p_probe.add_argument("probe_name", choices=PROBE_NAMES)
    for p in (p_sample, p_probe):
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", default=None)

    p_report = sub.add_parser("report", help="summarize report.json files")
    p_report.add_argument("directory")

    args = parser.parse_args(argv)
    try:
        if args.command == "sample":
            return cmd_sample(_load_config(args), args.threads)
        if args.command == "probe":
            return cmd_probe(args.probe_name, _load_config(args), args.threads)
        return cmd_report(args.directory)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as exc:
        print(f"numeric contract violation: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
