"""Command-line front end: ``rydosc {simulate,eigens,spectrum,sweep,models,feasibility}``."""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import pipeline as pl
from .config import ConfigError, RunConfig
from .evolve import AccuracyError, IterationLimitError
from .feasibility import HardwareConstraints, ScheduleError
from .hamiltonian import ClassificationError, IntegrityError
from .meson import DependencyError
from .model import ParameterError

log = logging.getLogger("rydosc")

EXIT_CONFIG, EXIT_NUMERICAL, EXIT_DEPENDENCY = 2, 3, 4

PLOT_SCRIPT = '''\
"""Plot spectrum CSVs written by rydosc with the omega_lv guide lines."""
import json
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

run = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
report = json.loads((run / "peaks.json").read_text())
fig, ax = plt.subplots(figsize=(6, 4))
files = sorted(run.glob("spectrum_tstop*.csv"), key=lambda p: float(p.stem.split("tstop")[1]))
for alpha, path in zip(np.linspace(0.3, 1.0, len(files)), files):
    data = np.loadtxt(path, delimiter=",", skiprows=2)
    ax.semilogy(data[:, 0], data[:, 2], color="k", alpha=alpha, lw=0.8, label=path.stem)
for w in report["lines"]:
    ax.axvline(abs(w), color="0.6", lw=0.6, ls="--" if w > 0 else ":")
ax.set_xlim(0, 30)
ax.set_xlabel(r"$\\omega$ (rad/$\\mu$s)")
ax.set_ylabel(r"$|\\tilde M_T(\\omega)|$")
ax.legend()
fig.savefig(run / "spectrum.png", dpi=150)
'''


def resolve_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    changes = {}
    if args.out:
        changes["out_dir"] = args.out
    if args.beta is not None:
        changes["beta"] = args.beta
    if args.tstop:
        changes["t_stops"] = tuple(args.tstop)
    if args.layout:
        changes["layout"] = args.layout
    if args.basis:
        changes["basis"] = args.basis
    return cfg.replace(**changes) if changes else cfg


def _outdir(cfg: RunConfig, beta: float) -> Path:
    out = Path(cfg.out_dir) / pl.run_tag(beta)
    out.mkdir(parents=True, exist_ok=True)
    cfg.save(out / "config.ini")
    return out


def cmd_simulate(cfg: RunConfig, beta: float | None = None) -> Path:
    beta = cfg.beta if beta is None else beta
    out = _outdir(cfg, beta)
    series = pl.simulate(cfg, beta)
    pl.write_timeseries(out / "timeseries.csv", series, cfg)
    log.info("wrote %s", out / "timeseries.csv")
    return out


def cmd_eigens(cfg: RunConfig, beta: float | None = None) -> Path:
    beta = cfg.beta if beta is None else beta
    out = _outdir(cfg, beta)
    pl.write_eigens(out, pl.solve_eigens(cfg, beta), cfg, beta)
    log.info("wrote %s", out / "eigens.json")
    return out


def load_series(cfg: RunConfig, beta: float):
    return pl.read_timeseries(Path(cfg.out_dir) / pl.run_tag(beta) / "timeseries.csv", cfg.omega)


def cmd_spectrum(cfg: RunConfig, beta: float | None = None, plot_script: bool = False) -> dict:
    beta = cfg.beta if beta is None else beta
    out = _outdir(cfg, beta)
    series = load_series(cfg, beta)
    for stop, spectrum in pl.spectra(cfg, series).items():
        pl.write_spectrum(out / f"spectrum_tstop{stop:g}.csv", spectrum, cfg)
    analysis = pl.analyse(cfg, beta, series)
    payload = analysis.report.to_dict()
    payload["reference"] = analysis.reference
    payload["bin_width"] = analysis.spectrum.bin_width
    pl.write_json(out / "peaks.json", payload, cfg)
    if plot_script:
        (out / "plot_spectrum.py").write_text(PLOT_SCRIPT)
    return pl.trend_row(analysis)


def _sweep_point(cfg: RunConfig, beta: float) -> dict:
    cmd_simulate(cfg, beta)
    cmd_eigens(cfg, beta)
    return cmd_spectrum(cfg, beta)


def cmd_sweep(cfg: RunConfig, betas, threads: int = 1) -> Path:
    betas = list(betas)
    if not betas:
        raise ConfigError("sweep needs at least one beta")
    if threads > 1:
        with ProcessPoolExecutor(threads) as pool:
            rows = list(pool.map(_sweep_point, [cfg] * len(betas), betas))
    else:
        rows = [_sweep_point(cfg, b) for b in betas]
    out = Path(cfg.out_dir)
    header = ("beta", "dominant_omega", "secondary_centroid", "secondary_spread", "n_secondary",
              "secondary_omegas")
    pl.write_csv(out / "peak_trends.csv", header, ([r[h] for h in header] for r in rows),
                 cfg.digest())
    return out / "peak_trends.csv"


def cmd_models(cfg: RunConfig, beta: float | None = None) -> Path:
    beta = cfg.beta if beta is None else beta
    out = _outdir(cfg, beta)
    summary = pl.solve_eigens(cfg, beta)
    analysis = None
    ts = out / "timeseries.csv"
    if ts.exists():
        analysis = pl.analyse(cfg, beta, load_series(cfg, beta), summary)
    pl.write_json(out / "models.json", pl.model_reports(cfg, beta, summary, analysis), cfg)
    return out / "models.json"


DEFAULT_CONSTRAINTS = Path(__file__).with_name("data") / "constraints.ini"


def load_constraints(path: str | Path | None = None) -> HardwareConstraints:
    """Read a ``[constraints]`` file; the shipped device limits by default."""
    path = path or DEFAULT_CONSTRAINTS
    parser = configparser.ConfigParser()
    try:
        parser.read_string(Path(path).read_text())
        sec = parser["constraints"]

        def pair(key, default):
            return tuple(float(x) for x in sec.get(key, default).split(","))

        return HardwareConstraints(
            t_max=sec.getfloat("t_max", 4.0),
            a_min=sec.getfloat("a_min", 4.0),
            field_of_view=pair("field_of_view", "75.0, 76.0"),
            omega_range=pair("omega_range", "0.0, 15.8"),
            delta_glob_range=pair("delta_glob_range", "-125.0, 125.0"),
        )
    except (OSError, KeyError, ValueError, configparser.Error) as exc:
        raise ConfigError(f"bad constraints file {path}: {exc}") from exc


def cmd_feasibility(cfg: RunConfig, constraints_path: str | None = None) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = pl.feasibility_report(cfg, load_constraints(constraints_path))
    pl.write_json(out / "feasibility.json", report, cfg)
    return out / "feasibility.json"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run config file ([run] section)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--beta", type=float, help="local detuning ratio Delta_loc / Delta_glob")
    common.add_argument("--tstop", type=float, action="append",
                        help="stop time in units of 2 pi / Omega (repeatable)")
    common.add_argument("--layout", choices=["ring-chord", "modular-1d"])
    common.add_argument("--basis", choices=["full", "blockade-restricted"])
    common.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rydosc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="prepare, quench and evolve")
    sub.add_parser("eigens", parents=[common], help="momentum-resolved eigenstructure")
    p = sub.add_parser("spectrum", parents=[common], help="Fourier spectra and peak matching")
    p.add_argument("--plot-script", action="store_true", help="also emit a matplotlib script")
    p = sub.add_parser("sweep", parents=[common], help="simulate + eigens + spectrum over betas")
    p.add_argument("--betas", type=float, nargs="+", help="defaults to sweep_betas in the config")
    sub.add_parser("models", parents=[common], help="classical and perturbative model reports")
    p = sub.add_parser("feasibility", parents=[common], help="hardware accessibility arithmetic")
    p.add_argument("--constraints", help="constraints file ([constraints] section)")
    sub.add_parser("write-config", parents=[common], help="print the resolved config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    stage = args.command
    try:
        cfg = resolve_config(args)
        if stage == "simulate":
            print(cmd_simulate(cfg))
        elif stage == "eigens":
            print(cmd_eigens(cfg))
        elif stage == "spectrum":
            print(cmd_spectrum(cfg, plot_script=args.plot_script))
        elif stage == "sweep":
            print(cmd_sweep(cfg, args.betas or cfg.sweep_betas, args.threads))
        elif stage == "models":
            print(cmd_models(cfg))
        elif stage == "feasibility":
            print(cmd_feasibility(cfg, args.constraints))
        elif stage == "write-config":
            sys.stdout.write(cfg.to_text())
    except (ConfigError, ParameterError, ScheduleError) as exc:
        print(f"{stage}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AccuracyError, IterationLimitError, IntegrityError, ClassificationError) as exc:
        print(f"{stage}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DependencyError as exc:
        print(f"{stage}: missing input: {exc}", file=sys.stderr)
        return EXIT_DEPENDENCY
    return 0


if __name__ == "__main__":
    sys.exit(main())
