"""Datasets behind the standard report figures, plus matplotlib rendering.

Each builder returns a ``FigureData``: a list of named curves (columns plus
rows of plain floats) and enough axis metadata to render a quick-look PNG.
The CSV files written from these curves are the primary output; the PNG is
a convenience rendering of the same data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .attacks import irud_success_probability, marginal_keyrate, pulse_class_keyrate, attack_fractions
from .strategies import (
    KeyrateCurvePoint,
    asymptotic_no_dsp,
    bb84_keyrate,
    budget_strategy,
    critical_transmission,
    critical_transmission_asymptotic,
    dsp_keyrate,
    optimize_mu,
)

__all__ = ["FIGURES", "FigureData", "Curve", "build_figure", "render_figure"]


@dataclass
class Curve:
    name: str
    columns: list[str]
    rows: list[list[float]]

    def column(self, key: str) -> np.ndarray:
        i = self.columns.index(key)
        return np.array([r[i] for r in self.rows], dtype=float)


@dataclass
class FigureData:
    name: str
    curves: list[Curve]
    x: str
    y: str
    xscale: str = "linear"
    yscale: str = "linear"
    xlabel: str = ""
    ylabel: str = ""
    vlines: list[float] = field(default_factory=list)
    dashed: tuple[str, ...] = ()


def _t_grid(t_min: float, t_max: float, points: int) -> np.ndarray:
    if not 0.0 < t_min <= t_max <= 1.0:
        raise ValueError(f"need 0 < t-min <= t-max <= 1, got [{t_min}, {t_max}]")
    return np.logspace(math.log10(t_min), math.log10(t_max), points)


def _point_row(pt: KeyrateCurvePoint) -> list[float]:
    return [pt.transmission, pt.attenuation_db, pt.mu, pt.keyrate, pt.keyrate_over_t]


_POINT_COLS = ["transmission", "attenuation_db", "mu", "keyrate", "keyrate_over_t"]


def fig1_class_contribution(m: int = 5, n_list=(1, 2, 3, 4, 5, 6), points: int = 101, **_) -> FigureData:
    """Per-class contribution p_n*K_n as a function of the class yield."""
    grid = np.linspace(0.0, 1.0, points)
    curves = []
    for n in n_list:
        p_delta = irud_success_probability(n, m)
        k_n = pulse_class_keyrate(n, m)
        rows = [[y, max(y - p_delta, 0.0) / (1.0 - p_delta) * k_n] for y in grid]
        curves.append(Curve(f"n{n}", ["yield_n", "contribution"], rows))
    return FigureData(
        "fig1", curves, x="yield_n", y="contribution",
        xlabel="per-class yield Y_n", ylabel="p_n K_n (bits/pulse)",
    )


def fig2_partition(m: int = 5, n: int = 4, points: int = 101, **_) -> FigureData:
    """Partition of one photon class into blocked / USD / PNS fractions."""
    grid = np.linspace(0.0, 1.0, points)
    rows = []
    for y in grid:
        b = 1.0 - y
        u, p = attack_fractions(b, n, m)
        rows.append([y, b, u, p])
    curve = Curve(f"n{n}", ["yield_n", "blocked", "usd", "pns"], rows)
    fd = FigureData(
        "fig2", [curve], x="yield_n", y="pns",
        xlabel="per-class yield Y_n", ylabel="fraction",
    )
    return fd


def fig3_class_rates(m: int = 4, n_top: int = 15, **_) -> FigureData:
    """K_n, the marginal keyrate, and the IRUD probability versus n."""
    rows = [
        [n, pulse_class_keyrate(n, m), marginal_keyrate(n, m), irud_success_probability(n, m)]
        for n in range(1, n_top + 1)
    ]
    curve = Curve(f"m{m}", ["n", "keyrate_n", "marginal", "irud_prob"], rows)
    return FigureData(
        "fig3", [curve], x="n", y="marginal",
        xlabel="photon number n", ylabel="bits / probability",
    )


def fig4_keyrates_fixed_mu(m_list=(3, 4, 5, 6), mu: float = 0.1,
                           t_min: float = 1e-4, t_max: float = 1.0, points: int = 41, **_) -> FigureData:
    """No-decoy keyrates at fixed mu, with BB84 and the critical transmissions."""
    grid = _t_grid(t_min, t_max, points)
    curves = []
    vlines = []
    tc_rows = []
    for m in m_list:
        rows = [_point_row(KeyrateCurvePoint.make(t, mu, budget_strategy(m, mu, t).keyrate)) for t in grid]
        curves.append(Curve(f"m{m}", _POINT_COLS, rows))
        tc = critical_transmission(m, mu)
        vlines.append(tc)
        tc_rows.append([m, tc, critical_transmission_asymptotic(m, mu)])
    bb_rows = [_point_row(KeyrateCurvePoint.make(t, mu, bb84_keyrate(mu, t))) for t in grid]
    curves.append(Curve("bb84", _POINT_COLS, bb_rows))
    curves.append(Curve("tc", ["m", "tc_exact", "tc_asymptotic"], tc_rows))
    return FigureData(
        "fig4", curves, x="transmission", y="keyrate",
        xscale="log", yscale="log",
        xlabel="transmission T", ylabel="keyrate (bits/pulse)", vlines=vlines,
    )


def fig5_keyrates_optimized(m_list=(4, 16), t_min: float = 1e-4, t_max: float = 1.0,
                            points: int = 21, **_) -> FigureData:
    """No-decoy keyrates with mu optimized per point; dashed small-T asymptotics."""
    grid = _t_grid(t_min, t_max, points)
    curves = []
    dashed = []
    for m in m_list:
        rows = []
        for t in grid:
            opt = optimize_mu("budget", m, t)
            rows.append(_point_row(KeyrateCurvePoint.make(t, opt.mu_opt, opt.keyrate)))
        curves.append(Curve(f"m{m}", _POINT_COLS, rows))
        asym_rows = []
        for t in grid:
            approx = asymptotic_no_dsp(m, t)
            asym_rows.append(_point_row(KeyrateCurvePoint.make(t, approx.mu_opt, approx.keyrate)))
        name = f"m{m}_asymptotic"
        curves.append(Curve(name, _POINT_COLS, asym_rows))
        dashed.append(name)
    bb_rows = []
    for t in grid:
        opt = optimize_mu("bb84", 4, t)
        bb_rows.append(_point_row(KeyrateCurvePoint.make(t, opt.mu_opt, opt.keyrate)))
    curves.append(Curve("bb84", _POINT_COLS, bb_rows))
    return FigureData(
        "fig5", curves, x="transmission", y="keyrate",
        xscale="log", yscale="log",
        xlabel="transmission T", ylabel="keyrate (bits/pulse)", dashed=tuple(dashed),
    )


def fig6_dsp_fixed_mu(m_list=(3, 4, 5, 6), mu: float = 1.0,
                      t_min: float = 1e-4, t_max: float = 1.0, points: int = 41, **_) -> FigureData:
    """Decoy-state keyrates over transmission at fixed mu, plotted as K/T."""
    grid = _t_grid(t_min, t_max, points)
    curves = []
    for m in m_list:
        rows = [_point_row(KeyrateCurvePoint.make(t, mu, dsp_keyrate(m, mu, t))) for t in grid]
        curves.append(Curve(f"m{m}", _POINT_COLS, rows))
    bb_rows = [_point_row(KeyrateCurvePoint.make(t, mu, bb84_keyrate(mu, t, dsp=True))) for t in grid]
    curves.append(Curve("bb84", _POINT_COLS, bb_rows))
    return FigureData(
        "fig6", curves, x="attenuation_db", y="keyrate_over_t",
        xlabel="attenuation (dB)", ylabel="K/T (bits/pulse)",
    )


def fig7_dsp_optimized(m_list=(4, 16), t_min: float = 1e-4, t_max: float = 1.0,
                       points: int = 21, **_) -> FigureData:
    """Decoy-state keyrates with mu optimized per point, plotted as K/T."""
    grid = _t_grid(t_min, t_max, points)
    curves = []
    for m in m_list:
        rows = []
        for t in grid:
            opt = optimize_mu("dsp", m, t)
            rows.append(_point_row(KeyrateCurvePoint.make(t, opt.mu_opt, opt.keyrate)))
        curves.append(Curve(f"m{m}", _POINT_COLS, rows))
    bb_rows = []
    for t in grid:
        opt = optimize_mu("bb84-dsp", 4, t)
        bb_rows.append(_point_row(KeyrateCurvePoint.make(t, opt.mu_opt, opt.keyrate)))
    curves.append(Curve("bb84", _POINT_COLS, bb_rows))
    return FigureData(
        "fig7", curves, x="attenuation_db", y="keyrate_over_t",
        xlabel="attenuation (dB)", ylabel="K/T (bits/pulse)",
    )


def fig8_mu_optimum(m_list=(4, 16, 64, 128), t_min: float = 1e-4, t_max: float = 1.0,
                    points: int = 17, **_) -> FigureData:
    """Optimal mean photon number of the decoy-state protocol versus attenuation."""
    grid = _t_grid(t_min, t_max, points)
    curves = []
    for m in m_list:
        rows = []
        for t in grid:
            opt = optimize_mu("dsp", m, t)
            att = -10.0 * math.log10(t)
            rows.append([t, att, opt.mu_opt])
        curves.append(Curve(f"m{m}", ["transmission", "attenuation_db", "mu_opt"], rows))
    bb_rows = [[t, -10.0 * math.log10(t), 1.0] for t in grid]
    curves.append(Curve("bb84", ["transmission", "attenuation_db", "mu_opt"], bb_rows))
    return FigureData(
        "fig8", curves, x="attenuation_db", y="mu_opt",
        xlabel="attenuation (dB)", ylabel="optimal mu",
    )


def nkn_product(m_list=(4, 16, 64), n_top: int = 60, **_) -> FigureData:
    """Product n * K_n versus n; roughly flat up to n ~ m - 2 for large m."""
    curves = []
    for m in m_list:
        rows = [[n, n * pulse_class_keyrate(n, m)] for n in range(1, n_top + 1)]
        curves.append(Curve(f"m{m}", ["n", "n_times_keyrate"], rows))
    return FigureData(
        "nkn", curves, x="n", y="n_times_keyrate",
        xlabel="photon number n", ylabel="n K_n (bits)",
    )


FIGURES = {
    "fig1": fig1_class_contribution,
    "fig2": fig2_partition,
    "fig3": fig3_class_rates,
    "fig4": fig4_keyrates_fixed_mu,
    "fig5": fig5_keyrates_optimized,
    "fig6": fig6_dsp_fixed_mu,
    "fig7": fig7_dsp_optimized,
    "fig8": fig8_mu_optimum,
    "nkn": nkn_product,
}


def build_figure(name: str, **kwargs) -> FigureData:
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}, expected one of {sorted(FIGURES)}")
    return FIGURES[name](**kwargs)


def render_figure(fig: FigureData, path: str):
    """Render a quick-look PNG of the figure's curves to ``path``."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    f, ax = plt.subplots(figsize=(6.4, 4.2))
    for curve in fig.curves:
        if fig.x not in curve.columns or fig.y not in curve.columns:
            continue  # side tables (e.g. critical transmissions) are not plotted
        xs = curve.column(fig.x)
        if fig.name == "fig2":
            b = curve.column("blocked")
            u = curve.column("usd")
            p = curve.column("pns")
            ax.stackplot(xs, b, u, p, labels=["blocked", "usd", "pns"], alpha=0.8)
            continue
        style = "--" if curve.name in fig.dashed else "-"
        ys = curve.column(fig.y)
        if fig.yscale == "log":
            mask = ys > 0
            xs, ys = xs[mask], ys[mask]
        ax.plot(xs, ys, style, label=curve.name)
    for v in fig.vlines:
        ax.axvline(v, color="grey", lw=0.8, ls=":")
    ax.set_xscale(fig.xscale)
    ax.set_yscale(fig.yscale)
    ax.set_xlabel(fig.xlabel or fig.x)
    ax.set_ylabel(fig.ylabel or fig.y)
    ax.legend(fontsize=8)
    ax.set_title(fig.name)
    f.tight_layout()
    f.savefig(path, dpi=150, metadata={"Date": None})
    plt.close(f)
