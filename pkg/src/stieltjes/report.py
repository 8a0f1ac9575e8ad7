"""Reproduction report: per-check JSON verdicts, a summary table and figures.

Figures need matplotlib (the ``plots`` extra); without it the JSON and
CSV outputs are still written and the figure step is skipped.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .checks import CheckResult, run_checks
from .kernels import Kernel

FIGSIZE = (5.0, 3.4)


def write_summary(results: list[CheckResult], out_dir: Path) -> None:
    with (out_dir / "summary.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check", "group", "passed", "metric", "threshold"])
        for r in results:
            w.writerow([r.name, r.group, str(r.passed).lower(), format(r.metric, ".6e"), format(r.threshold, ".6e")])
    width = max((len(r.name) for r in results), default=5)
    lines = [f"{'check':<{width}}  result  {'metric':>12}  {'threshold':>12}"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.metric:>12.3e}  {r.threshold:>12.3e}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} passed")
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n")


def write_repro(out_dir, only=None, cfg=None, seed: int = 0, figures: bool = True, progress=None):
    out_dir = Path(out_dir)
    (out_dir / "checks").mkdir(parents=True, exist_ok=True)
    results = run_checks(only=only, cfg=cfg, seed=seed, progress=progress)
    for r in results:
        path = out_dir / "checks" / f"{r.name}.json"
        path.write_text(json.dumps(r.to_json(), indent=2) + "\n")
    write_summary(results, out_dir)
    if figures:
        try:
            render_figures(results, out_dir / "figures")
        except ImportError:
            (out_dir / "figures.skipped").write_text("matplotlib is not installed\n")
    return results


# --------------------------------------------------------------------------
# figures


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({
        "font.size": 8,
        "axes.labelsize": 9,
        "legend.fontsize": 7,
        "lines.linewidth": 1.0,
        "savefig.dpi": 150,
        "svg.hashsalt": "stieltjes",
    })
    return plt


def _save(fig, path: Path):
    # no timestamps in the metadata, so reruns give identical files
    fig.savefig(path, metadata={"Software": None})


def plot_region_map(ax):
    """Kernel selected for E_k as a function of (Re alpha, k)."""
    from .solver import select_kernel
    from .errors import RegionBoundary

    a = np.linspace(-0.5, 0.5, 201)
    k = np.linspace(0.0025, 0.9975, 200)
    code = {Kernel.R1: 0, Kernel.R2: 1, Kernel.R3: 2}
    img = np.full((k.size, a.size), np.nan)
    for j, av in enumerate(a):
        for i, kv in enumerate(k):
            try:
                img[i, j] = code[select_kernel(av, kv)]
            except RegionBoundary:
                pass
    cmap = _pyplot().get_cmap("Pastel1", 3)
    ax.pcolormesh(a, k, img, cmap=cmap, vmin=-0.5, vmax=2.5, shading="auto")
    ax.plot(a, np.clip(1 - a, 0, 1), "k-", lw=0.8)
    ax.plot(a[a >= 0], a[a >= 0], "k-", lw=0.8)
    for name, (x, y) in {"R1": (-0.2, 0.5), "R2": (0.35, 0.85), "R3": (0.35, 0.15)}.items():
        ax.text(x, y, name, ha="center", va="center")
    ax.set_xlabel(r"Re $\alpha$")
    ax.set_ylabel("k")
    ax.set_title("kernel selection for $E_k$")


def plot_residuals(ax, result: CheckResult):
    grid = np.asarray(result.details["grid"], dtype=float)
    for row in result.details["cases"]:
        res = np.maximum(np.asarray(row["rel_residual"], dtype=float), 1e-18)
        lam = complex(row["lambda"])
        lab = f"{row['g']}, $\\lambda$={lam.real:.3g}" + (f"{lam.imag:+.2g}i" if lam.imag else "")
        ax.loglog(grid, res, marker=".", ms=2, label=lab)
    ax.axhline(result.threshold, color="k", ls="--", lw=0.8)
    ax.set_ylim(top=result.threshold * 1e5)  # headroom for the legend
    ax.set_xlabel("x")
    ax.set_ylabel("relative residual")
    ax.legend(ncol=2, frameon=False, loc="upper center")


def plot_growth(ax, lam: complex = 0.25):
    from .analysis import fit_growth
    from .functions import expneg
    from .solver import solve_E

    sol = solve_E(expneg(), lam)
    x = np.logspace(-7, 7, 57)
    v = np.abs(sol.particular(x))
    fit = fit_growth(sol.particular)
    ax.loglog(x, v, "k.", ms=3, label="|g + lam R g|")
    for (lo, hi), e in zip(fit.windows, (fit.eps_hat, fit.eta_hat)):
        xs = np.logspace(np.log10(lo), np.log10(hi), 10)
        ref = np.abs(sol.particular(np.array([np.sqrt(lo * hi)])))[0]
        ax.loglog(xs, ref * (xs / np.sqrt(lo * hi)) ** (-e), lw=1.5, label=f"slope {-e:.3f}")
    a = sol.param.alpha.real
    ax.set_title(f"growth of the particular solution, Re alpha = {a:.4f}")
    ax.set_xlabel("x")
    ax.legend(frameon=False)


def plot_exponent_selection(ax, alpha: float = 0.3):
    from .analysis import select_growth_exponents

    e = np.linspace(0.01, 0.99, 197)
    et, ht = zip(*(select_growth_exponents(alpha, v, v) for v in e))
    ax.plot(e, et, label=r"$\tilde\varepsilon(\varepsilon)$")
    ax.plot(e, ht, label=r"$\tilde\eta(\eta)$")
    ax.axvline(alpha, color="0.6", lw=0.6)
    ax.axvline(1 - alpha, color="0.6", lw=0.6)
    ax.set_xlabel(r"$\varepsilon$ or $\eta$")
    ax.set_ylabel("selected exponent")
    ax.set_title(f"exponents after the blended resolvent, alpha = {alpha}")
    ax.legend(frameon=False)


def render_figures(results: list[CheckResult], fig_dir: Path) -> list[Path]:
    plt = _pyplot()
    fig_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name, draw):
        fig, ax = plt.subplots(figsize=FIGSIZE, layout="constrained")
        draw(ax)
        path = fig_dir / name
        _save(fig, path)
        plt.close(fig)
        written.append(path)

    emit("region_map.png", plot_region_map)
    emit("exponent_selection.png", plot_exponent_selection)
    by_name = {r.name: r for r in results}
    if "solution_residuals" in by_name and "grid" in by_name["solution_residuals"].details:
        emit("residuals.png", lambda ax: plot_residuals(ax, by_name["solution_residuals"]))
    if "growth_exponents" in by_name:
        emit("growth.png", plot_growth)
    return written
