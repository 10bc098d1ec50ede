"""Command-line front end.

Subcommands: keyrate, optimize-mu, tc, qber, figure, simulate,
decoy-estimate.  Parameters resolve with precedence flags > config file >
defaults; the config file is flat ``key=value`` text mirroring the long
flag names.  Curve data is written as CSV (one file per curve, a header
row and one ``#`` metadata comment recording command, version and seed);
scalar reports print as text or JSON (``--json``).  Figure commands also
render a PNG of the written curves unless ``--no-plot`` is given.

Exit codes: 0 success, 2 usage error, 3 numeric failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .figures import FIGURES, build_figure, render_figure
from .montecarlo import SimConfig, estimate_conditional_distribution, simulate_session
from .states import ProtocolParams, conditional_distribution, mutual_information
from .strategies import (
    IllConditionedSystemError,
    budget_strategy,
    critical_qber,
    critical_transmission,
    critical_transmission_asymptotic,
    decoy_yield_estimation,
    dsp_allocation,
    dsp_keyrate,
    observed_yield,
    optimize_mu,
    qber_keyrate,
)

__all__ = ["main", "RunReport"]


@dataclass
class RunReport:
    """Echo of one CLI invocation: inputs used, scalar outputs, files written."""

    command: str
    inputs: dict
    outputs: dict
    artifacts: list = field(default_factory=list)
    timing: float = 0.0


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def write_csv(path, columns, rows, command_line: str, seed) -> str:
    with open(path, "w", newline="") as handle:
        handle.write(f"# command: {command_line} | version: {__version__} | seed: {seed}\n")
        handle.write(",".join(columns) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(v) for v in row) + "\n")
    return str(path)


def _read_config(path: str) -> dict:
    values = {}
    with open(path) as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line {line!r} is not key=value")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    return values


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _as_bool(text: str) -> bool:
    low = text.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"cannot parse boolean from {text!r}")


class Settings:
    """Resolves each parameter as flag > config > default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = _read_config(args.config) if getattr(args, "config", None) else {}
        self.resolved = {}

    def get(self, name: str, cast, default=None, required: bool = False):
        flag = getattr(self.args, name.replace("-", "_"), None)
        if flag is not None:
            value = flag if cast is None else cast(flag) if isinstance(flag, str) else flag
        elif name in self.config:
            value = _as_bool(self.config[name]) if cast is bool else cast(self.config[name])
        else:
            value = default
        if value is None and required:
            raise ValueError(f"missing required parameter --{name}")
        self.resolved[name] = value
        return value

    def transmission(self, required: bool = True) -> float:
        t = self.get("transmission", float)
        att = self.get("attenuation-db", float)
        if t is None and att is not None:
            t = 10.0 ** (-att / 10.0)
            self.resolved["transmission"] = t
        if t is None:
            if required:
                raise ValueError("missing required parameter --transmission (or --attenuation-db)")
            return None
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"transmission must lie in [0, 1], got {t}")
        return t


def _m_list(text: str) -> list[int]:
    return [int(tok) for tok in str(text).split(",") if tok != ""]


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--m", help="number of protocol states (comma list for figures)")
    parser.add_argument("--mu", help="mean photon number")
    parser.add_argument("--transmission", help="channel transmission T in [0, 1]")
    parser.add_argument("--attenuation-db", help="channel attenuation in dB (alternative to --transmission)")
    parser.add_argument("--dsp", action="store_true", default=None, help="assume decoy states pin every Y_n")
    parser.add_argument("--epsilon", help="error rate of the visibility model")
    parser.add_argument("--seed", help="RNG seed / metadata seed")
    parser.add_argument("--out", help="directory for written artifacts")
    parser.add_argument("--json", action="store_true", default=None, help="print the report as JSON")
    parser.add_argument("--config", help="key=value config file (flags override)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="siftless", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"siftless {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("keyrate", help="keyrate for one (m, mu, T) point")
    _add_common(p)
    p.add_argument("--breakdown", action="store_true", default=None,
                   help="write and print the per-photon-class table")

    p = sub.add_parser("optimize-mu", help="optimal mean photon number at fixed T")
    _add_common(p)
    p.add_argument("--strategy", choices=("budget", "dsp", "bb84-dsp", "bb84"), default="dsp")

    p = sub.add_parser("tc", help="critical transmission, exact and asymptotic")
    _add_common(p)

    p = sub.add_parser("qber", help="single-photon critical error rate")
    _add_common(p)

    p = sub.add_parser("figure", help="write the dataset (and PNG) behind one report figure")
    p.add_argument("name", help=f"one of {', '.join(sorted(FIGURES))}")
    _add_common(p)
    p.add_argument("--t-min", help="lower end of the transmission grid")
    p.add_argument("--t-max", help="upper end of the transmission grid")
    p.add_argument("--points", help="number of grid points")
    p.add_argument("--n", help="photon class for fig2")
    p.add_argument("--n-top", help="largest photon number for fig3/nkn")
    p.add_argument("--no-plot", action="store_true", default=None, help="skip the PNG rendering")

    p = sub.add_parser("simulate", help="Monte Carlo session and empirical-vs-analytic table")
    _add_common(p)
    p.add_argument("--pulses", help="number of simulated pulses")
    p.add_argument("--eve", action="store_true", default=None,
                   help="apply the budget-strategy attack plan for (m, mu, T)")

    p = sub.add_parser("decoy-estimate", help="solve decoy yields from an intensity,yield CSV")
    p.add_argument("file", help="CSV with intensity,yield rows")
    _add_common(p)

    return parser


def _print_report(report: RunReport, as_json: bool):
    if as_json:
        print(json.dumps(report.__dict__, default=lambda o: o.item() if hasattr(o, "item") else str(o), indent=2))
        return
    print(f"command: {report.command}")
    inputs = " ".join(f"{k}={_fmt(v)}" for k, v in report.inputs.items() if v is not None)
    print(f"inputs: {inputs}")
    for key, value in report.outputs.items():
        if isinstance(value, (list, tuple, np.ndarray)):
            print(f"{key}: {' '.join(_fmt(v) for v in value)}")
        else:
            print(f"{key}: {_fmt(value)}")
    for path in report.artifacts:
        print(f"wrote: {path}")
    print(f"timing_s: {report.timing:.3f}")


_BREAKDOWN_COLS = ["n", "p_poisson", "irud_prob", "keyrate_n", "marginal", "yield_n", "blocked", "usd", "pns"]


def _cmd_keyrate(settings: Settings, cmdline: str) -> RunReport:
    m = settings.get("m", int, 4)
    mu = settings.get("mu", float, required=True)
    t = settings.transmission()
    use_dsp = settings.get("dsp", bool, False)
    seed = settings.get("seed", int, 12345)
    out_dir = settings.get("out", str, ".")
    breakdown = settings.get("breakdown", bool, False)

    if use_dsp:
        allocation = dsp_allocation(m, mu, t) if breakdown else None
        keyrate = allocation.keyrate if allocation else dsp_keyrate(m, mu, t)
    else:
        allocation = budget_strategy(m, mu, t)
        keyrate = allocation.keyrate
    outputs = {
        "keyrate": keyrate,
        "keyrate_over_t": keyrate / t if t > 0 else 0.0,
        "yield": observed_yield(t, mu),
    }
    report = RunReport("keyrate", settings.resolved, outputs)
    if breakdown and allocation is not None:
        rows = [
            [c.n, c.p_poisson, c.irud_prob, c.keyrate_n, c.marginal, c.yield_n, c.blocked, c.usd, c.pns]
            for c in allocation.classes
        ]
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "keyrate_breakdown.csv")
        report.artifacts.append(write_csv(path, _BREAKDOWN_COLS, rows, cmdline, seed))
    return report


def _cmd_optimize_mu(settings: Settings, cmdline: str) -> RunReport:
    strategy = settings.args.strategy
    settings.resolved["strategy"] = strategy
    m = settings.get("m", int, 4)
    t = settings.transmission()
    result = optimize_mu(strategy, m, t)
    outputs = {
        "mu_opt": result.mu_opt,
        "keyrate": result.keyrate,
        "keyrate_over_t": result.keyrate / t,
        "all_zero": result.all_zero,
    }
    return RunReport("optimize-mu", settings.resolved, outputs)


def _cmd_tc(settings: Settings, cmdline: str) -> RunReport:
    m = settings.get("m", int, 4)
    mu = settings.get("mu", float, required=True)
    exact = critical_transmission(m, mu)
    approx = critical_transmission_asymptotic(m, mu)
    outputs = {
        "tc_exact": exact,
        "tc_asymptotic": approx,
        "relative_gap": abs(exact - approx) / exact if exact > 0 else math.inf,
    }
    return RunReport("tc", settings.resolved, outputs)


def _cmd_qber(settings: Settings, cmdline: str) -> RunReport:
    m = settings.get("m", int, 4)
    eps = settings.get("epsilon", float)
    outputs = {"epsilon_critical": critical_qber(m)}
    if eps is not None:
        outputs["keyrate_at_epsilon"] = qber_keyrate(m, eps)
    return RunReport("qber", settings.resolved, outputs)


def _cmd_figure(settings: Settings, cmdline: str) -> RunReport:
    name = settings.args.name
    settings.resolved["name"] = name
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}, expected one of {sorted(FIGURES)}")
    seed = settings.get("seed", int, 12345)
    out_dir = settings.get("out", str, ".")
    no_plot = settings.get("no-plot", bool, False)

    kwargs = {}
    m_val = settings.get("m", str)
    if m_val is not None:
        m_list = _m_list(m_val)
        if name in ("fig2", "fig3"):
            kwargs["m"] = m_list[0]
        elif name == "fig1":
            kwargs["m"] = m_list[0]
        else:
            kwargs["m_list"] = tuple(m_list)
    mu = settings.get("mu", float)
    if mu is not None and name in ("fig4", "fig6"):
        kwargs["mu"] = mu
    for key, kw in (("t-min", "t_min"), ("t-max", "t_max")):
        val = settings.get(key, float)
        if val is not None:
            kwargs[kw] = val
    points = settings.get("points", int)
    if points is not None:
        kwargs["points"] = points
    n_class = settings.get("n", int)
    if n_class is not None and name == "fig2":
        kwargs["n"] = n_class
    n_top = settings.get("n-top", int)
    if n_top is not None and name in ("fig3", "nkn"):
        kwargs["n_top"] = n_top

    data = build_figure(name, **kwargs)
    os.makedirs(out_dir, exist_ok=True)
    report = RunReport("figure", settings.resolved, {"curves": len(data.curves)})
    for curve in data.curves:
        path = os.path.join(out_dir, f"{name}_{curve.name}.csv")
        report.artifacts.append(write_csv(path, curve.columns, curve.rows, cmdline, seed))
    if not no_plot:
        png = os.path.join(out_dir, f"{name}.png")
        render_figure(data, png)
        report.artifacts.append(png)
    return report


def _cmd_simulate(settings: Settings, cmdline: str) -> RunReport:
    m = settings.get("m", int, 4)
    mu = settings.get("mu", float, required=True)
    t = settings.transmission()
    eps = settings.get("epsilon", float, 0.0)
    seed = settings.get("seed", int, 12345)
    pulses = settings.get("pulses", int, 10**6)
    with_eve = settings.get("eve", bool, False)
    out_dir = settings.get("out", str, ".")

    plan = budget_strategy(m, mu, t) if with_eve else None
    config = SimConfig(ProtocolParams(m, mu, t), n_pulses=pulses, seed=seed,
                       epsilon=eps, eve_plan=plan)
    stats = simulate_session(config)

    analytic_eps = 0.0 if with_eve else eps
    analytic = conditional_distribution(m, analytic_eps)
    outputs = {
        "n_clicks": stats.n_clicks,
        "empirical_yield": stats.empirical_yield(),
        "analytic_yield": plan.total_yield if plan else observed_yield(t, mu),
        "estimated_qber": stats.estimated_qber,
        "estimated_mutual_info": stats.estimated_mutual_info,
        "analytic_mutual_info": mutual_information(m, analytic_eps),
    }
    report = RunReport("simulate", settings.resolved, outputs)
    try:
        empirical, stderr = estimate_conditional_distribution(stats)
    except ValueError:
        outputs["comparison_table"] = "skipped (too few clicks)"
        return report
    rows = []
    for x in range(m):
        for y in range(m):
            emp = empirical.table[x, y]
            ana = analytic.table[x, y]
            err = stderr[x, y]
            sigmas = abs(emp - ana) / err if err > 0 else 0.0
            rows.append([x, y, emp, ana, err, sigmas])
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "simulate_comparison.csv")
    cols = ["x", "y", "empirical_p", "analytic_p", "stderr", "sigma_distance"]
    report.artifacts.append(write_csv(path, cols, rows, cmdline, seed))
    return report


def _cmd_decoy_estimate(settings: Settings, cmdline: str) -> RunReport:
    path = settings.args.file
    settings.resolved["file"] = path
    intensities, yields = [], []
    with open(path) as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) < 2:
                raise ValueError(f"decoy CSV line {line!r} is not intensity,yield")
            try:
                intensities.append(float(parts[0]))
                yields.append(float(parts[1]))
            except ValueError:
                continue  # header row
    if not intensities:
        raise ValueError(f"no intensity,yield rows found in {path}")
    estimate = decoy_yield_estimation(intensities, yields)
    outputs = {
        "intensities": list(estimate.intensities),
        "estimated_yields": list(estimate.estimated_yields),
        "residual": estimate.residual,
        "condition": estimate.condition,
        "clamped": estimate.clamped,
    }
    return RunReport("decoy-estimate", settings.resolved, outputs)


_COMMANDS = {
    "keyrate": _cmd_keyrate,
    "optimize-mu": _cmd_optimize_mu,
    "tc": _cmd_tc,
    "qber": _cmd_qber,
    "figure": _cmd_figure,
    "simulate": _cmd_simulate,
    "decoy-estimate": _cmd_decoy_estimate,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    cmdline = "siftless " + " ".join(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        settings = Settings(args)
        started = time.perf_counter()
        report = _COMMANDS[args.cmd](settings, cmdline)
        report.timing = time.perf_counter() - started
        _print_report(report, bool(settings.resolved.get("json") or settings.get("json", bool, False)))
        return 0
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except IllConditionedSystemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
