"""Sweep orchestration: config parsing, presets, CSV and plot-script output.

Config files are line-oriented ``key = value`` text; ``#`` starts a comment.
Keys, units, and defaults are documented in ``ris-fas run --help``. One run
sweeps a single axis and writes one CSV row per axis value; identical spec
and seed give a byte-identical CSV.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, replace

from .channel_model import SystemConfig
from .fas_geometry import PortGrid, SpatialCorrelation, build_correlation_matrix, \
    validate_correlation_mc_detailed
from .metrics import SweepRecord, delay_outage_rate, outage_probability, tas_baseline
from .monte_carlo import McRun, simulate_dor, simulate_op

AXES = ("tx_power_dbm", "ris_elements", "ports_n", "aperture_w",
        "bandwidth_hz", "data_bits")

_CSV_COLUMNS = ("axis", "op", "op_se", "dor", "dor_se",
                "mc_op", "mc_op_lo", "mc_op_hi",
                "mc_dor", "mc_dor_lo", "mc_dor_hi",
                "tas_op", "tas_dor", "clt_warning", "error")

# Config keys -> (python type, SystemConfig field or special handling).
_BASE_KEYS = {
    "tx_power_dbm": float, "noise_dbm": float, "pathloss_exp": float,
    "d_bs_ris_m": float, "d_ris_mu_m": float, "ris_elements": int,
    "snr_threshold_db": float, "delay_threshold_s": float,
    "data_bits": float, "bandwidth_hz": float,
}
_GRID_KEYS = {"n1": int, "n2": int, "w1": float, "w2": float}
_MC_KEYS = {"mc_trials": int, "mc_seed": int, "mc_batch": int}
_OTHER_KEYS = {"axis": str, "values": str, "seed": int, "output_path": str}

_CONFIG_HELP = """\
config file format: one `key = value` per line, `#` comments, blank lines ok.

  axis             sweep axis, one of: tx_power_dbm, ris_elements, ports_n,
                   aperture_w, bandwidth_hz, data_bits     (required)
  values           comma-separated axis values, strictly monotone (required)
  output_path      CSV destination (default sweep.csv; --out overrides)
  seed             base seed; point i uses seed + i        (default 0)

  tx_power_dbm     transmit power P, dBm                   (default 15)
  noise_dbm        noise power sigma^2, dBm                (default -120)
  pathloss_exp     path loss exponent alpha, > 2           (default 2.5)
  d_bs_ris_m       BS-RIS distance, meters                 (default 2000)
  d_ris_mu_m       RIS-user distance, meters               (default 2000)
  ris_elements     RIS element count M                     (default 125)
  snr_threshold_db SNR threshold gamma_th, dB              (default 0)
  delay_threshold_s delay threshold T_th, seconds          (default 3e-3)
  data_bits        payload R, bits                         (default 3000)
  bandwidth_hz     bandwidth B, Hz                         (default 2e6)

  n1, n2           port counts per axis                    (default 5, 5)
  w1, w2           aperture side lengths, wavelengths      (default 1, 1)

  mc_trials        enable Monte Carlo with this many trials per point
  mc_seed          MC base seed (default: seed)
  mc_batch         MC trials per block (default 2000)

axis notes: ports_n values must be perfect squares (the grid stays square,
sqrt(N) x sqrt(N)); aperture_w sets both side lengths to the value, in
wavelengths. Powers are dBm, all internal math is linear.
"""


class ConfigError(ValueError):
    """Config parse/validation failure (exit code 1)."""


@dataclass
class SweepSpec:
    """One sweep: a base configuration, an axis, and its values."""

    base: SystemConfig
    axis: str
    values: list
    seed: int = 0
    mc: McRun | None = None
    output_path: str = "sweep.csv"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"axis must be one of {', '.join(AXES)}; got {self.axis!r}")
        if not self.values:
            raise ConfigError("values must be nonempty")
        diffs = [b - a for a, b in zip(self.values, self.values[1:])]
        if diffs and not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
            raise ConfigError("values must be strictly monotone")
        for v in self.values:
            self._check_axis_value(v)

    def _check_axis_value(self, v):
        if self.axis in ("ris_elements", "ports_n"):
            if v != int(v) or v < 1:
                raise ConfigError(f"{self.axis} values must be positive integers; got {v!r}")
            if self.axis == "ports_n" and int(math.isqrt(int(v))) ** 2 != int(v):
                raise ConfigError(f"ports_n values must be perfect squares; got {int(v)}")
        elif self.axis == "aperture_w":
            if v <= 0:
                raise ConfigError(f"aperture_w values must be > 0; got {v!r}")
        elif self.axis in ("bandwidth_hz", "data_bits"):
            if v <= 0:
                raise ConfigError(f"{self.axis} values must be > 0; got {v!r}")


def parse_config(path: str) -> SweepSpec:
    """Read and fully validate a sweep config file.

    Unknown and duplicate keys are hard errors with their line number.
    Unset keys take the defaults listed in --help.
    """
    known = {**_BASE_KEYS, **_GRID_KEYS, **_MC_KEYS, **_OTHER_KEYS}
    raw: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected `key = value`, got {text!r}")
        key, value = (part.strip() for part in text.split("=", 1))
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value

    def take(key, caster):
        if key not in raw:
            return None
        try:
            if caster is int:
                return int(raw[key], 10)
            return caster(raw[key])
        except ValueError as exc:
            raise ConfigError(f"invalid value for {key!r}: {raw[key]!r}") from exc

    def take_or(key, caster, default):
        value = take(key, caster)
        return default if value is None else value

    try:
        grid = PortGrid(take_or("n1", int, 5), take_or("n2", int, 5),
                        take_or("w1", float, 1.0), take_or("w2", float, 1.0))
        base_kwargs = {k: take(k, c) for k, c in _BASE_KEYS.items() if k in raw}
        base = SystemConfig(grid=grid, **base_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if "axis" not in raw:
        raise ConfigError("axis is required (one of "
                          f"{', '.join(AXES)})")
    if "values" not in raw:
        raise ConfigError("values is required")
    try:
        values = [float(v) for v in raw["values"].split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"invalid values list: {raw['values']!r}") from exc

    seed = take_or("seed", int, 0)
    mc = None
    if "mc_trials" in raw:
        try:
            mc = McRun(take("mc_trials", int),
                       take_or("mc_seed", int, seed),
                       take_or("mc_batch", int, 2000))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return SweepSpec(base, raw["axis"], values, seed, mc,
                     raw.get("output_path", "sweep.csv"))


def config_at(spec: SweepSpec, value) -> SystemConfig:
    """The base configuration with one axis value applied."""
    base = spec.base
    if spec.axis == "tx_power_dbm":
        return replace(base, tx_power_dbm=float(value))
    if spec.axis == "ris_elements":
        return replace(base, ris_elements=int(value))
    if spec.axis == "ports_n":
        side = math.isqrt(int(value))
        return replace(base, grid=PortGrid(side, side, base.grid.w1, base.grid.w2))
    if spec.axis == "aperture_w":
        w = float(value)
        return replace(base, grid=PortGrid(base.grid.n1, base.grid.n2, w, w))
    if spec.axis == "bandwidth_hz":
        return replace(base, bandwidth_hz=float(value))
    return replace(base, data_bits=float(value))


def run_sweep(spec: SweepSpec) -> list[SweepRecord]:
    """Evaluate every sweep point; per-point failures land in the record."""
    records = []
    corr_cache: dict[PortGrid, SpatialCorrelation] = {}
    n_points = len(spec.values)
    for i, value in enumerate(spec.values):
        config = spec.base
        try:
            config = config_at(spec, value)
            corr = corr_cache.get(config.grid)
            if corr is None:
                corr = build_correlation_matrix(config.grid)
                corr_cache[config.grid] = corr
            point_seed = spec.seed + i
            op, op_se = outage_probability(config, corr, seed=point_seed)
            dor, dor_se = delay_outage_rate(config, corr, seed=point_seed)
            t_op, t_dor = tas_baseline(config)
            record = SweepRecord(float(value), config, op, op_se, dor, dor_se,
                                 t_op, t_dor, config.clt_warning)
            if spec.mc is not None:
                run = McRun(spec.mc.trials, spec.mc.seed + i, spec.mc.batch)
                mc_op = simulate_op(config, corr, run)
                mc_dor = simulate_dor(config, corr, run)
                record.mc_op, record.mc_op_lo, record.mc_op_hi = \
                    mc_op.estimate, mc_op.ci_lo, mc_op.ci_hi
                record.mc_dor, record.mc_dor_lo, record.mc_dor_hi = \
                    mc_dor.estimate, mc_dor.ci_lo, mc_dor.ci_hi
            records.append(record)
            print(f"[{i + 1}/{n_points}] {spec.axis}={value:g} "
                  f"op={op:.6e} dor={dor:.6e}", file=sys.stderr)
        except Exception as exc:  # record and continue with the next point
            records.append(SweepRecord(float(value), config,
                                       error=f"{type(exc).__name__}: {exc}"))
            print(f"[{i + 1}/{n_points}] {spec.axis}={value:g} "
                  f"FAILED: {exc}", file=sys.stderr)
    return records


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float) and math.isnan(value):
        return ""
    return f"{value:.17g}"


def emit_csv(records: list[SweepRecord], path: str) -> None:
    """Stable columns, 17 significant digits, UTF-8, LF line endings."""
    if not records:
        raise ValueError("no records to write")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(_CSV_COLUMNS)
            for r in records:
                writer.writerow([
                    _fmt(r.axis_value), _fmt(r.op), _fmt(r.op_se),
                    _fmt(r.dor), _fmt(r.dor_se),
                    _fmt(r.mc_op), _fmt(r.mc_op_lo), _fmt(r.mc_op_hi),
                    _fmt(r.mc_dor), _fmt(r.mc_dor_lo), _fmt(r.mc_dor_hi),
                    _fmt(r.tas_op), _fmt(r.tas_dor),
                    _fmt(r.clt_warning), r.error or "",
                ])
    except OSError as exc:
        raise RuntimeError(f"cannot write CSV {path}: {exc}") from exc


def emit_plot_script(csv_path: str, script_path: str, axis: str) -> None:
    """gnuplot companion: OP/DOR and TAS curves against the swept axis."""
    text = f"""# gnuplot script generated alongside {csv_path}
set datafile separator ","
set key autotitle columnhead
set logscale y
set format y "10^{{%T}}"
set xlabel "{axis}"
set ylabel "probability"
set grid
plot "{csv_path}" using 1:2 with linespoints lw 2 title "OP (analytical)", \\
     "" using 1:4 with linespoints lw 2 title "DOR (analytical)", \\
     "" using 1:12 with lines dt 2 title "OP (TAS)", \\
     "" using 1:13 with lines dt 2 title "DOR (TAS)"
pause -1 "press enter to close"
"""
    with open(script_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _preset_specs() -> dict[str, SweepSpec]:
    """Sweeps mirroring the result-figure families.

    Power-axis presets use the defaults; fixed-power presets run at reduced
    power so the outage waterfall is visible on the swept axis (at the full
    default power the analytical values sit many orders below any plotting
    or simulation floor for large M).
    """
    g44 = PortGrid(4, 4, 1.0, 1.0)
    g55_1 = PortGrid(5, 5, 1.0, 1.0)
    g55_3 = PortGrid(5, 5, 3.0, 3.0)
    p_vals = [float(v) for v in range(0, 21, 2)]
    m_vals = [25.0, 50.0, 75.0, 100.0, 125.0, 150.0]
    b_vals = [0.5e6, 1.0e6, 1.5e6, 2.0e6, 2.5e6, 3.0e6]
    r_vals = [1000.0, 2000.0, 3000.0, 4000.0, 5000.0, 6000.0]
    return {
        # OP vs transmit power, port-count emphasis / aperture emphasis.
        "fig2a": SweepSpec(SystemConfig(grid=g44), "tx_power_dbm", p_vals),
        "fig2b": SweepSpec(SystemConfig(grid=g55_3), "tx_power_dbm", p_vals),
        # OP vs N (fixed W), vs W (fixed N), vs M at both geometries.
        "fig3a": SweepSpec(SystemConfig(tx_power_dbm=5.0, grid=g55_1),
                           "ports_n", [1.0, 4.0, 9.0, 16.0, 25.0]),
        "fig3b": SweepSpec(SystemConfig(tx_power_dbm=5.0, grid=g55_1),
                           "aperture_w", [1.0, 1.5, 2.0, 2.5, 3.0]),
        "fig3c": SweepSpec(SystemConfig(tx_power_dbm=9.0, grid=g44),
                           "ris_elements", m_vals),
        "fig3d": SweepSpec(SystemConfig(tx_power_dbm=9.0, grid=g55_3),
                           "ris_elements", m_vals),
        # DOR vs bandwidth and vs payload at both geometries. The effective
        # threshold spans ~10 dB across each axis, so the fixed power is
        # chosen per grid to keep every point above the double-precision
        # floor while the top of the curve stays visible.
        "fig4a": SweepSpec(SystemConfig(tx_power_dbm=1.0, grid=g44),
                           "bandwidth_hz", b_vals),
        "fig4b": SweepSpec(SystemConfig(tx_power_dbm=0.0, grid=g55_3),
                           "bandwidth_hz", b_vals),
        "fig4c": SweepSpec(SystemConfig(tx_power_dbm=4.0, grid=g44),
                           "data_bits", r_vals),
        "fig4d": SweepSpec(SystemConfig(tx_power_dbm=-1.0, grid=g55_3),
                           "data_bits", r_vals),
    }


def preset_spec(name: str) -> SweepSpec:
    specs = _preset_specs()
    if name not in specs:
        raise ConfigError(f"unknown preset {name!r}; available: "
                          + ", ".join(sorted(specs)))
    return specs[name]


def _apply_flags(spec: SweepSpec, args) -> SweepSpec:
    if args.seed is not None:
        spec.seed = args.seed
        if spec.mc is not None:
            spec.mc = McRun(spec.mc.trials, args.seed, spec.mc.batch)
    if args.mc_trials is not None:
        seed = spec.mc.seed if spec.mc is not None else spec.seed
        batch = spec.mc.batch if spec.mc is not None else 2000
        spec.mc = McRun(args.mc_trials, seed, batch)
    if args.out is not None:
        spec.output_path = args.out
    return spec


def _finish_sweep(spec: SweepSpec, args) -> None:
    records = run_sweep(spec)
    emit_csv(records, spec.output_path)
    print(f"wrote {spec.output_path} ({len(records)} rows)", file=sys.stderr)
    if args.plot_script:
        script = spec.output_path + ".gp"
        emit_plot_script(spec.output_path, script, spec.axis)
        print(f"wrote {script}", file=sys.stderr)


def _cmd_run(args) -> int:
    spec = _apply_flags(parse_config(args.config), args)
    _finish_sweep(spec, args)
    return 0


def _cmd_preset(args) -> int:
    spec = preset_spec(args.name)
    if args.out is None:
        spec.output_path = f"{args.name}.csv"
    _finish_sweep(_apply_flags(spec, args), args)
    return 0


def _cmd_validate_corr(args) -> int:
    if args.samples < 10_000:
        raise ConfigError("--samples must be >= 10000")
    spec = parse_config(args.config) if args.config else None
    grid = spec.base.grid if spec else PortGrid(5, 5, 1.0, 1.0)
    seed = args.seed if args.seed is not None else (spec.seed if spec else 0)
    corr = build_correlation_matrix(grid)
    est, imag, se = validate_correlation_mc_detailed(grid, args.samples, seed)
    err = abs(est - corr.matrix).max()
    imag_max = abs(imag).max()
    print(f"grid {grid.n1}x{grid.n2}, aperture {grid.w1}x{grid.w2} wavelengths, "
          f"{args.samples} samples", file=sys.stderr)
    print(f"max |MC - closed form| = {err:.3e}", file=sys.stderr)
    print(f"max |imaginary part|   = {imag_max:.3e}", file=sys.stderr)
    print(f"max standard error     = {se.max():.3e}", file=sys.stderr)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            for row in est:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ris-fas",
        description="Outage probability and delay outage rate sweeps for a "
                    "RIS-aided fluid-antenna receiver.",
        epilog=_CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="override the base seed (analytic and MC)")
        p.add_argument("--mc-trials", type=int, default=None,
                       help="enable/override Monte Carlo with this trial count")
        p.add_argument("--plot-script", action="store_true",
                       help="emit a gnuplot companion script next to the CSV")
        p.add_argument("--out", default=None, help="CSV output path")

    p_run = sub.add_parser("run", help="run a sweep from a config file",
                           epilog=_CONFIG_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
    p_run.add_argument("config")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_pre = sub.add_parser("preset", help="run a built-in figure-family sweep")
    p_pre.add_argument("name", help="fig2a fig2b fig3a fig3b fig3c fig3d "
                                    "fig4a fig4b fig4c fig4d")
    common(p_pre)
    p_pre.set_defaults(func=_cmd_preset)

    p_val = sub.add_parser("validate-corr",
                           help="Monte Carlo check of the correlation matrix")
    p_val.add_argument("config", nargs="?", default=None,
                       help="config file supplying the grid (default 5x5, 1x1)")
    p_val.add_argument("--samples", type=int, default=1_000_000)
    p_val.add_argument("--seed", type=int, default=None)
    p_val.add_argument("--out", default=None, help="write MC estimates as CSV")
    p_val.set_defaults(func=_cmd_validate_corr)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
