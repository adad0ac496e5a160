"""Flat key=value experiment configs with dotted sections.

The format is deliberately primitive: one `section.key = value` per
line, full-line # comments, no quoting.  Unknown keys are rejected with
their line number.  `resolved_text` emits a canonical dump that parses
back to an identical config, which is what every run writes next to its
outputs so that reruns are reproducible from the output directory alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import List, Tuple

from .errors import ConfigError
from .kernels import Annulus, Ball, Disk, DomainSpec, Polydisk

_ALLOWED_FORMATS = ("json", "csv", "svg")
PROBE_NAMES = (
    "deletion",
    "insertion",
    "palm-oracle",
    "conditional-oracle",
    "coupling",
    "domination",
    "trace-bound",
    "gaf",
    "annulus-check",
)


@dataclass(frozen=True)
class ExperimentConfig:
    domain_kind: str = "disk"
    domain_alpha: float = 0.0
    domain_rho: float = 0.5
    domain_d: int = 1
    grid_resolution: int = 16
    grid_inset: float = 0.15
    kernel_mode: str = "quadrature"
    kernel_basis_rank: int = 6
    kernel_clamp_delta: float = 1e-6
    kernel_zero_block_on_b: bool = False
    probe_b_rule: str = "radius < 0.3"
    probe_palm_indices: Tuple[int, ...] = (0,)
    probe_samples: int = 100
    probe_seed: int = 0
    probe_stream: int = 0
    gaf_n_coeff: int = 120
    gaf_radius: float = 0.8
    gaf_bins: int = 8
    gaf_trials: int = 10000
    check_pairs: int = 50
    output_dir: str = "out"
    output_formats: Tuple[str, ...] = ("json", "csv")

    def domain_spec(self) -> DomainSpec:
        kind = self.domain_kind
        if kind == "disk":
            return Disk(self.domain_alpha)
        if kind == "annulus":
            return Annulus(self.domain_rho)
        if kind == "polydisk":
            return Polydisk(self.domain_d)
        if kind == "ball":
            return Ball(self.domain_d)
        raise ConfigError(f"unknown domain.kind '{kind}'")


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_list(text: str) -> Tuple[int, ...]:
    t = text.strip()
    if not t:
        return ()
    return tuple(int(tok) for tok in t.split(","))


def _parse_formats(text: str) -> Tuple[str, ...]:
    out = tuple(tok.strip() for tok in text.split(",") if tok.strip())
    for fmt in out:
        if fmt not in _ALLOWED_FORMATS:
            raise ValueError(f"unknown output format {fmt!r}")
    return out


_KEYS = {
    "domain.kind": ("domain_kind", str),
    "domain.alpha": ("domain_alpha", float),
    "domain.rho": ("domain_rho", float),
    "domain.d": ("domain_d", int),
    "grid.resolution": ("grid_resolution", int),
    "grid.inset": ("grid_inset", float),
    "kernel.mode": ("kernel_mode", str),
    "kernel.basis_rank": ("kernel_basis_rank", int),
    "kernel.clamp_delta": ("kernel_clamp_delta", float),
    "kernel.zero_block_on_b": ("kernel_zero_block_on_b", _parse_bool),
    "probe.b_rule": ("probe_b_rule", str),
    "probe.palm_indices": ("probe_palm_indices", _parse_int_list),
    "probe.samples": ("probe_samples", int),
    "probe.seed": ("probe_seed", int),
    "probe.stream": ("probe_stream", int),
    "gaf.n_coeff": ("gaf_n_coeff", int),
    "gaf.radius": ("gaf_radius", float),
    "gaf.bins": ("gaf_bins", int),
    "gaf.trials": ("gaf_trials", int),
    "check.pairs": ("check_pairs", int),
    "output.dir": ("output_dir", str),
    "output.formats": ("output_formats", _parse_formats),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _) in _KEYS.items()}


def parse_config(text: str, origin: str = "<config>") -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KEYS:
            raise ConfigError(f"{origin}:{lineno}: unknown key '{key}'")
        attr, parser = _KEYS[key]
        try:
            values[attr] = parser(value.strip())
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{origin}:{lineno}: bad value for '{key}': {exc}") from exc
    cfg = ExperimentConfig(**values)
    _validate(cfg, origin)
    return cfg


def _validate(cfg: ExperimentConfig, origin: str) -> None:
    if cfg.domain_kind not in ("disk", "annulus", "polydisk", "ball"):
        raise ConfigError(f"{origin}: unknown domain.kind '{cfg.domain_kind}'")
    if cfg.kernel_mode not in ("quadrature", "basis"):
        raise ConfigError(f"{origin}: kernel.mode must be quadrature or basis")
    if cfg.kernel_mode == "basis" and cfg.domain_kind != "disk":
        raise ConfigError(f"{origin}: basis kernels are defined on the disk only")
    if not 0.0 < cfg.grid_inset < 1.0:
        raise ConfigError(f"{origin}: grid.inset must be in (0, 1)")
    if cfg.grid_resolution < 2:
        raise ConfigError(f"{origin}: grid.resolution must be >= 2")
    if cfg.probe_samples < 1:
        raise ConfigError(f"{origin}: probe.samples must be >= 1")
    try:
        cfg.domain_spec()
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"{origin}: {exc}") from exc


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def resolved_text(cfg: ExperimentConfig) -> str:
    """Canonical dump; parse_config(resolved_text(cfg)) == cfg."""
    lines = []
    for f in sorted(fields(cfg), key=lambda f: _ATTR_TO_KEY[f.name]):
        lines.append(f"{_ATTR_TO_KEY[f.name]} = {_format_value(getattr(cfg, f.name))}")
    return "\n".join(lines) + "\n"
