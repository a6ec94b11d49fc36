"""Figures for a finished run: a gnuplot script over the CSV outputs and
matplotlib renderings of the same panels."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def gnuplot_script(result) -> str:
    sc = result.scenario
    title = sc.config.name or f"{sc.config.initial}, zeta = {sc.config.horizon}"
    lines = [
        "# gnuplot script; run from this directory: gnuplot plot.gp",
        "set datafile separator ','",
        "set terminal pngcairo size 900,700",
        "",
        "set output 'heatmap_gp.png'",
        f"set title '{title}: top view'",
        "set xlabel 'x'; set ylabel 't'",
        "set view map",
        "set pm3d map",
        "splot 'solution.csv' using 2:1:3 every ::1 with pm3d notitle",
        "",
        "set output 'surface_gp.png'",
        f"set title '{title}: 3D view'",
        "unset view; set view 60,30",
        "set dgrid3d 60,60",
        "set zlabel 'u'",
        "splot 'solution.csv' using 2:1:3 every ::1 with lines notitle",
        "unset dgrid3d",
    ]
    for s in result.series:
        stem = Path(s.filename).stem
        lines += [
            "",
            f"set output '{stem}_gp.png'",
            f"set title '{s.quantity} at x = {s.location:g} ({s.method})'",
            "set xlabel 't'; set ylabel 'jump'",
            f"plot '{s.filename}' using 1:2 every ::1 with lines notitle",
        ]
    return "\n".join(lines) + "\n"


def _grid(result):
    sc = result.scenario
    w0, w1 = sc.window_nodes
    x = sc.grid.x[w0:w1 + 1]
    t = np.asarray(result.snapshots.times)
    U = result.snapshots.as_array()[:, w0:w1 + 1]
    return x, t, U


def render_figures(result, out_dir) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    x, t, U = _grid(result)
    name = result.scenario.config.name or "scenario"
    files = []

    fig, ax = plt.subplots(figsize=(6, 4.5))
    mesh = ax.pcolormesh(x, t, U, shading="auto", cmap="jet")
    fig.colorbar(mesh, ax=ax, label="u")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(f"{name}: top view")
    fig.tight_layout()
    files.append(out / "heatmap.png")
    fig.savefig(files[-1], dpi=120)
    plt.close(fig)

    # thin the surface so the 3D view stays light
    ts = max(1, len(t) // 60)
    xs = max(1, len(x) // 200)
    X, Tm = np.meshgrid(x[::xs], t[::ts])
    fig = plt.figure(figsize=(6, 4.5))
    ax = fig.add_subplot(projection="3d")
    ax.plot_surface(X, Tm, U[::ts, ::xs], cmap="jet", linewidth=0, antialiased=False)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_zlabel("u")
    ax.set_title(f"{name}: 3D view")
    files.append(out / "surface.png")
    fig.savefig(files[-1], dpi=120)
    plt.close(fig)

    if result.series:
        locations = sorted({s.location for s in result.series})
        fig, axes = plt.subplots(1, len(locations), figsize=(4 * len(locations), 3.5),
                                 squeeze=False)
        styles = {"m1_quotient": ("r", "-"), "m2_analytic": ("b", "--"),
                  "local_characteristic": ("b", ":")}
        for ax, loc in zip(axes[0], locations):
            for s in result.series:
                if s.location != loc:
                    continue
                color, ls = styles[s.method]
                ax.plot(s.times, s.values, color=color, ls=ls, label=s.method)
            ax.set_title(f"{result.series[0].quantity} at x = {loc:g}")
            ax.set_xlabel("t")
            ax.legend(fontsize=8)
        fig.tight_layout()
        files.append(out / "jumps.png")
        fig.savefig(files[-1], dpi=120)
        plt.close(fig)
    return files
