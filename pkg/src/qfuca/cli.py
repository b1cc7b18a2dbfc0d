"""Batch command-line front end.

Every command reads a flat key = value config file (INI, single [run]
section), applies flag overrides, and writes schema-stable CSV tables plus
static SVG figures into the output directory.  Defaults reproduce the
reference experiment setup: 5.8 GHz, beta = 1, 100 m link, 4 m aperture
radius, 15 dB receiver SNR, uniform power.

Commands
--------
layouts         enumerate all layouts for the element budget; one layout
                description file + drawing per candidate, plus a summary CSV
build           realize and validate one layout; element table + drawing
simulate        one end-to-end noisy transmission on a layout
sweep-snr       spectral efficiency vs SNR per scheme
sweep-distance  spectral efficiency vs link distance per scheme (noise
                calibration stays pinned to the configured reference
                distance)
optimize        exhaustive search for the best layout at the element budget
eoal-table      per-element efficiency table across several budgets

Exit codes: 0 success, 2 configuration error, 3 infeasible layout,
4 numerical failure, 5 I/O failure.  The QFUCA_OUTPUT_DIR environment
variable overrides the output directory.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .capacity import sigma2_for_snr, spectral_efficiency, uniform_power_allocation
from .channel import ChannelParams, assemble_H
from .geometry import (DimensionSpec, EnumerationCaps, LayoutError, LayoutType,
                       PairRelation, ToleranceError, build_geometry,
                       enumerate_layouts, layout_svg, load_layout, pair_witnesses,
                       radii_from_witnesses, save_layout, validate_geometrically,
                       _tag_for_witness, _i_max)
from .modem import NoiseModel, ReconstructionError, derive_precoding, end_to_end
from .search import ledger_csv_lines, optimize_layout
from .svgfig import bar_chart, line_chart

__all__ = ["RunConfig", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5

OUTPUT_DIR_ENV = "QFUCA_OUTPUT_DIR"


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """All experiment knobs; defaults mirror the reference setup."""

    frequency_hz: float = 5.8e9
    beta: float = 1.0
    distance_m: float = 100.0
    r_total_m: float = 4.0
    snr_db: float = 15.0
    total_power_w: float = 1.0
    budget: int = 25
    layout_file: Optional[str] = None
    cells: Optional[tuple[int, ...]] = None
    witnesses: Optional[tuple[int, ...]] = None
    distance_model: str = "exact"
    correlated_noise: bool = False
    seed: int = 0
    snr_grid_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    distance_grid_m: tuple[float, ...] = (50.0, 100.0, 200.0)
    budgets: tuple[int, ...] = (9, 16, 25)
    types: tuple[str, ...] = ("type1", "type2", "type3", "type4")
    max_dimension: int = 4
    max_cells: int = 25
    max_modes: int = 512
    workers: int = 1
    output_dir: str = "qfuca_out"

    def __post_init__(self) -> None:
        for name in ("frequency_hz", "beta", "distance_m", "r_total_m",
                     "total_power_w"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")
        if self.distance_model not in ("exact", "approx", "separable"):
            raise ConfigError(f"unknown distance model {self.distance_model!r}")

    def params(self, distance: Optional[float] = None) -> ChannelParams:
        return ChannelParams.from_frequency(
            self.frequency_hz, self.beta,
            self.distance_m if distance is None else distance)

    def caps(self) -> EnumerationCaps:
        return EnumerationCaps(max_dimension=self.max_dimension,
                               max_cells=self.max_cells,
                               max_modes=self.max_modes)

    def layout_types(self) -> set[LayoutType]:
        try:
            return {LayoutType(t) for t in self.types}
        except ValueError as exc:
            raise ConfigError(f"bad layout type: {exc}") from exc

    def sigma2(self) -> float:
        return sigma2_for_snr(self.snr_db, self.params(), self.total_power_w)


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _parse_list(text: str, cast):
    return tuple(cast(x.strip()) for x in text.split(",") if x.strip())


def load_config(path: Optional[str]) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    cp = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if "run" not in cp:
        raise ConfigError("config file needs a [run] section")
    sec = cp["run"]
    kw = {}
    simple = {
        "frequency_hz": float, "beta": float, "distance_m": float,
        "r_total_m": float, "snr_db": float, "total_power_w": float,
        "budget": int, "seed": int, "max_dimension": int, "max_cells": int,
        "max_modes": int, "workers": int,
        "layout_file": str, "distance_model": str, "output_dir": str,
    }
    try:
        for key, cast in simple.items():
            if key in sec:
                kw[key] = cast(sec[key])
        if "correlated_noise" in sec:
            kw["correlated_noise"] = _BOOL[sec["correlated_noise"].strip().lower()]
        if "cells" in sec:
            kw["cells"] = _parse_list(sec["cells"], int)
        if "witnesses" in sec:
            kw["witnesses"] = _parse_list(sec["witnesses"], int)
        if "snr_grid_db" in sec:
            kw["snr_grid_db"] = _parse_list(sec["snr_grid_db"], float)
        if "distance_grid_m" in sec:
            kw["distance_grid_m"] = _parse_list(sec["distance_grid_m"], float)
        if "budgets" in sec:
            kw["budgets"] = _parse_list(sec["budgets"], int)
        if "types" in sec:
            kw["types"] = _parse_list(sec["types"], str)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    return replace(cfg, **kw)


def _apply_flags(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    kw = {}
    for key in ("frequency_hz", "beta", "distance_m", "r_total_m", "snr_db",
                "total_power_w", "budget", "seed", "max_dimension", "max_cells",
                "max_modes", "workers", "layout_file", "distance_model",
                "output_dir"):
        val = getattr(args, key, None)
        if val is not None:
            kw[key] = val
    if getattr(args, "correlated_noise", None):
        kw["correlated_noise"] = True
    for key, cast in (("cells", int), ("witnesses", int), ("snr_grid_db", float),
                      ("distance_grid_m", float), ("budgets", int), ("types", str)):
        val = getattr(args, key, None)
        if val is not None:
            kw[key] = _parse_list(val, cast)
    cfg = replace(cfg, **kw)
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        cfg = replace(cfg, output_dir=env_dir)
    return cfg


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: Path, lines: Sequence[str]) -> None:
    _atomic_write(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# layout resolution
# ---------------------------------------------------------------------------

def _inline_spec(cfg: RunConfig) -> DimensionSpec:
    cells = cfg.cells
    if len(cells) == 1:
        return DimensionSpec.plain_1d(cells[0], cfg.r_total_m)
    wits = cfg.witnesses
    if wits is None:
        wits = []
        for n in range(len(cells) - 1):
            feas = pair_witnesses(cells[n], cells[n + 1])
            if not feas:
                raise LayoutError(
                    f"no sharing layout exists for pair {cells[n]}/{cells[n + 1]}")
            wits.append(_i_max(cells[n], cells[n + 1]))  # shared-centre chain
        wits = tuple(wits)
    if len(wits) != len(cells) - 1:
        raise ConfigError("need one witness per adjacent level pair")
    for n in range(len(cells) - 1):
        if wits[n] not in pair_witnesses(cells[n], cells[n + 1]):
            raise LayoutError(
                f"witness {wits[n]} infeasible for pair {cells[n]}/{cells[n + 1]}")
    pairs = tuple(PairRelation(_tag_for_witness(cells[n], cells[n + 1], wits[n]),
                               wits[n])
                  for n in range(len(cells) - 1))
    return DimensionSpec(cells=cells,
                         radii=radii_from_witnesses(cells, wits, cfg.r_total_m),
                         pairs=pairs)


def _resolve_layout(cfg: RunConfig) -> DimensionSpec:
    if cfg.layout_file:
        try:
            return load_layout(cfg.layout_file)
        except OSError as exc:
            raise ConfigError(f"cannot read layout file: {exc}") from exc
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad layout file: {exc}") from exc
    if cfg.cells:
        return _inline_spec(cfg)
    raise ConfigError("command needs layout_file or cells (inline spec)")


def _scheme_label(spec: DimensionSpec) -> str:
    return f"{spec.n_levels}D({'|'.join(str(k) for k in spec.cells)})"


def _schemes(cfg: RunConfig) -> list[DimensionSpec]:
    """Layouts swept by the sweep commands: the explicit layout when one is
    configured, otherwise the best layout per dimension at the budget."""
    if cfg.layout_file or cfg.cells:
        return [_resolve_layout(cfg)]
    specs = enumerate_layouts(cfg.budget, types=cfg.layout_types(),
                              caps=cfg.caps(), r_total=cfg.r_total_m)
    params = cfg.params()
    sigma2 = cfg.sigma2()
    best: dict[int, tuple[float, DimensionSpec]] = {}
    for spec in specs:
        se = _se_of(spec, params, cfg, sigma2)
        prev = best.get(spec.n_levels)
        if prev is None or se > prev[0]:
            best[spec.n_levels] = (se, spec)
    return [best[n][1] for n in sorted(best)]


def _se_of(spec: DimensionSpec, params: ChannelParams, cfg: RunConfig,
           sigma2: float) -> float:
    h = assemble_H(spec, params, cfg.distance_model)
    ps = derive_precoding(h, spec.cells)
    gains = np.where(ps.dead, 0.0, ps.gains)
    powers = uniform_power_allocation(cfg.total_power_w, spec.n_modes)
    return spectral_efficiency(gains, powers, sigma2, dims=spec.cells).se_total


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_layouts(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    specs = enumerate_layouts(cfg.budget, types=cfg.layout_types(),
                              caps=cfg.caps(), r_total=cfg.r_total_m)
    lines = ["index,dimension,cells,family,witnesses,n_elements,n_modes"]
    for i, spec in enumerate(specs):
        geo = build_geometry(spec)
        save_layout(spec, out / f"layout_{i:03d}.ini")
        _atomic_write(out / f"layout_{i:03d}.svg", layout_svg(geo))
        wits = "|".join(str(p.witness) if p.witness is not None else "-"
                        for p in spec.pairs) or "-"
        cells = "|".join(str(k) for k in spec.cells)
        lines.append(f"{i},{spec.n_levels},{cells},{spec.family().value},"
                     f"{wits},{geo.n_elements},{spec.n_modes}")
        print(f"[{i:03d}] {spec.n_levels}D cells={cells:12s} "
              f"family={spec.family().value:7s} elements={geo.n_elements} "
              f"modes={spec.n_modes}")
    _write_csv(out / "layouts.csv", lines)
    print(f"{len(specs)} layout(s) with {cfg.budget} elements -> {out}")
    return EXIT_OK


def cmd_build(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    spec = _resolve_layout(cfg)
    if not validate_geometrically(spec):
        print("layout does not realize its declared sharing pattern",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    geo = build_geometry(spec)
    lines = ["flat_index,logical_index,element_id,x_m,y_m"]
    for flat, tup in enumerate(spec.index_tuples()):
        eid = int(geo.logical_map[flat])
        x, y = geo.physical[eid]
        lines.append(f"{flat},{'|'.join(str(k) for k in tup)},{eid},"
                     f"{x:.12g},{y:.12g}")
    _write_csv(out / "geometry.csv", lines)
    _atomic_write(out / "layout.svg", layout_svg(geo))
    save_layout(spec, out / "layout.ini")
    print(f"{spec.n_levels}D layout cells={list(spec.cells)}: "
          f"{geo.n_elements} elements, {spec.n_modes} modes -> {out}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    spec = _resolve_layout(cfg)
    params = cfg.params()
    sigma2 = cfg.sigma2()
    rng = np.random.default_rng(cfg.seed)
    n_modes = spec.n_modes
    scale = math.sqrt(cfg.total_power_w / n_modes)
    s = scale * np.exp(2j * np.pi * rng.random(n_modes))
    noise = NoiseModel(sigma2=sigma2, correlated=cfg.correlated_noise,
                       seed=cfg.seed)
    result = end_to_end(spec, params, noise, s,
                        distance_model=cfg.distance_model, rng=rng)
    geo = build_geometry(spec)
    gains = np.where(result.dead, 0.0, result.gains)
    report = spectral_efficiency(
        gains, uniform_power_allocation(cfg.total_power_w, n_modes), sigma2,
        dims=spec.cells, n_elements=geo.n_elements)
    report.to_csv(out / "se_report.csv")
    err = np.abs(result.s_hat - s)
    lines = ["flat_index,s_re,s_im,s_hat_re,s_hat_im,abs_error"]
    for i in range(n_modes):
        lines.append(f"{i},{s[i].real:.12g},{s[i].imag:.12g},"
                     f"{result.s_hat[i].real:.12g},{result.s_hat[i].imag:.12g},"
                     f"{err[i]:.12g}")
    _write_csv(out / "simulate.csv", lines)
    print(f"SE={report.se_total:.6g} bits/s/Hz  EOAL={report.eoal:.6g}  "
          f"residual_interference={result.residual_interference:.3e}  "
          f"leakage={result.precoding.leakage:.3e}")
    return EXIT_OK


def cmd_sweep_snr(cfg: RunConfig) -> int:
    if not cfg.snr_grid_db:
        raise ConfigError("snr grid is empty")
    out = _outdir(cfg)
    params = cfg.params()
    schemes = _schemes(cfg)
    # gains do not depend on the SNR knob; factor them out of the grid loop
    gains = {}
    for spec in schemes:
        h = assemble_H(spec, params, cfg.distance_model)
        ps = derive_precoding(h, spec.cells)
        gains[_scheme_label(spec)] = (spec, np.where(ps.dead, 0.0, ps.gains))
    lines = ["snr_db,scheme,se_bits_per_hz"]
    series = {label: ([], []) for label in gains}
    for snr in cfg.snr_grid_db:
        sigma2 = sigma2_for_snr(snr, params, cfg.total_power_w)
        for label, (spec, g) in gains.items():
            powers = uniform_power_allocation(cfg.total_power_w, spec.n_modes)
            se = spectral_efficiency(g, powers, sigma2, dims=spec.cells).se_total
            lines.append(f"{snr:.12g},{label},{se:.12g}")
            series[label][0].append(snr)
            series[label][1].append(se)
    _write_csv(out / "sweep_snr.csv", lines)
    _atomic_write(out / "sweep_snr.svg",
                  line_chart(series, "Spectral efficiency vs SNR",
                             "SNR (dB)", "SE (bits/s/Hz)"))
    print(f"swept {len(cfg.snr_grid_db)} SNR point(s) x {len(gains)} scheme(s) "
          f"-> {out / 'sweep_snr.csv'}")
    return EXIT_OK


def cmd_sweep_distance(cfg: RunConfig) -> int:
    if not cfg.distance_grid_m:
        raise ConfigError("distance grid is empty")
    out = _outdir(cfg)
    sigma2 = cfg.sigma2()   # pinned at the reference distance
    schemes = _schemes(cfg)
    lines = ["distance_m,scheme,se_bits_per_hz"]
    series = {_scheme_label(s): ([], []) for s in schemes}
    for dist in cfg.distance_grid_m:
        params = cfg.params(distance=dist)
        for spec in schemes:
            label = _scheme_label(spec)
            h = assemble_H(spec, params, cfg.distance_model)
            ps = derive_precoding(h, spec.cells)
            g = np.where(ps.dead, 0.0, ps.gains)
            powers = uniform_power_allocation(cfg.total_power_w, spec.n_modes)
            se = spectral_efficiency(g, powers, sigma2, dims=spec.cells).se_total
            lines.append(f"{dist:.12g},{label},{se:.12g}")
            series[label][0].append(dist)
            series[label][1].append(se)
    _write_csv(out / "sweep_distance.csv", lines)
    _atomic_write(out / "sweep_distance.svg",
                  line_chart(series, "Spectral efficiency vs link distance",
                             "distance (m)", "SE (bits/s/Hz)"))
    print(f"swept {len(cfg.distance_grid_m)} distance(s) x {len(schemes)} "
          f"scheme(s) -> {out / 'sweep_distance.csv'}")
    return EXIT_OK


def cmd_optimize(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    result = optimize_layout(cfg.budget, types=cfg.layout_types(),
                             caps=cfg.caps(), params=cfg.params(),
                             snr_db=cfg.snr_db, total_power=cfg.total_power_w,
                             r_total=cfg.r_total_m,
                             distance_model=cfg.distance_model,
                             workers=cfg.workers)
    save_layout(result.best_spec, out / "best_layout.ini")
    _write_csv(out / "ledger.csv", ledger_csv_lines(result))
    labels = [f"{c.spec.n_levels}D {'|'.join(str(k) for k in c.spec.cells)}"
              for c in result.ledger]
    _atomic_write(out / "eoal.svg",
                  bar_chart(labels, [c.eoal for c in result.ledger],
                            f"Layout efficiency at {cfg.budget} elements",
                            "EOAL (bits/s/Hz per element)"))
    best = result.best
    print(f"best: {best.spec.n_levels}D cells={list(best.spec.cells)} "
          f"family={best.family.value} SE={best.se:.6g} EOAL={best.eoal:.6g} "
          f"({result.n_feasible} candidate(s))")
    return EXIT_OK


def cmd_eoal_table(cfg: RunConfig) -> int:
    if not cfg.budgets:
        raise ConfigError("budgets list is empty")
    out = _outdir(cfg)
    lines = ["budget,dimension,cells,family,n_elements,n_modes,"
             "se_bits_per_hz,eoal_bits_per_hz_per_element"]
    labels, values = [], []
    for budget in cfg.budgets:
        result = optimize_layout(budget, types=cfg.layout_types(),
                                 caps=cfg.caps(), params=cfg.params(),
                                 snr_db=cfg.snr_db,
                                 total_power=cfg.total_power_w,
                                 r_total=cfg.r_total_m,
                                 distance_model=cfg.distance_model,
                                 workers=cfg.workers)
        for c in result.ledger:
            cells = "|".join(str(k) for k in c.spec.cells)
            lines.append(f"{budget},{c.spec.n_levels},{cells},{c.family.value},"
                         f"{c.n_elements},{c.n_modes},{c.se:.12g},{c.eoal:.12g}")
            labels.append(f"{c.spec.n_levels}D/{budget}el")
            values.append(c.eoal)
    _write_csv(out / "eoal_table.csv", lines)
    _atomic_write(out / "eoal_table.svg",
                  bar_chart(labels, values, "Layout efficiency by budget",
                            "EOAL (bits/s/Hz per element)"))
    print(f"eoal table for budgets {list(cfg.budgets)} -> "
          f"{out / 'eoal_table.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfuca",
        description="quasi-fractal circular-array multiplexing simulator")
    parser.add_argument("--config", help="INI config file ([run] section)")
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--frequency-hz", dest="frequency_hz", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--distance-m", dest="distance_m", type=float)
    parser.add_argument("--r-total-m", dest="r_total_m", type=float)
    parser.add_argument("--snr-db", dest="snr_db", type=float)
    parser.add_argument("--total-power-w", dest="total_power_w", type=float)
    parser.add_argument("--budget", type=int)
    parser.add_argument("--budgets", help="comma list for eoal-table")
    parser.add_argument("--layout-file", dest="layout_file")
    parser.add_argument("--cells", help="inline layout, comma list K_1..K_N")
    parser.add_argument("--witnesses", help="comma list, one per level pair")
    parser.add_argument("--distance-model", dest="distance_model",
                        choices=("exact", "approx", "separable"))
    parser.add_argument("--correlated-noise", dest="correlated_noise",
                        action="store_true", default=None)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--snr-grid-db", dest="snr_grid_db")
    parser.add_argument("--distance-grid-m", dest="distance_grid_m")
    parser.add_argument("--types", help="comma list of layout families")
    parser.add_argument("--max-dimension", dest="max_dimension", type=int)
    parser.add_argument("--max-cells", dest="max_cells", type=int)
    parser.add_argument("--max-modes", dest="max_modes", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("command",
                        choices=("layouts", "build", "simulate", "sweep-snr",
                                 "sweep-distance", "optimize", "eoal-table"))
    return parser


_COMMANDS = {
    "layouts": cmd_layouts,
    "build": cmd_build,
    "simulate": cmd_simulate,
    "sweep-snr": cmd_sweep_snr,
    "sweep-distance": cmd_sweep_distance,
    "optimize": cmd_optimize,
    "eoal-table": cmd_eoal_table,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _apply_flags(load_config(args.config), args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LayoutError, ToleranceError) as exc:
        print(f"infeasible layout: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ReconstructionError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
