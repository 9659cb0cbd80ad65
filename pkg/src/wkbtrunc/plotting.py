"""Optional matplotlib renderings of the CSV tables.

The CSV files are the data contract; figures are a convenience written next
to them.  Values are converted to float only here, for display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {
    "figure.figsize": (6.4, 4.0),
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.markersize": 4,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _save(fig, path):
    fig.savefig(path)
    plt.close(fig)


def plot_norms(rows, path):
    """Semilog sup-norms of S_n' against the sqrt(3) K2^n n^n comparison."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        n = [r[0] for r in rows]
        ax.semilogy(n, [float(r[1]) for r in rows], "o", label=r"$\|S_n'\|_\infty$")
        ax.semilogy(n, [float(r[2]) for r in rows], "--", label=r"$\sqrt{3}K_2^n n^n$")
        ax.set_xlabel("n")
        ax.legend()
        _save(fig, path)


def plot_sweep(rows, path):
    """Log-log sup-error against eps, one line per truncation order."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for N in sorted({r[1] for r in rows}):
            pts = [(float(r[0]), float(r[2])) for r in rows if r[1] == N]
            ax.loglog(*zip(*pts), "o-", label=f"N={N}")
        ax.set_xlabel(r"$\varepsilon$")
        ax.set_ylabel("sup-error")
        ax.legend()
        _save(fig, path)


def plot_nopt(rows, path):
    """Optimal order and optimal error against eps, side by side."""
    style = dict(_STYLE, **{"figure.figsize": (9.6, 4.0)})
    with plt.rc_context(style):
        fig, (left, right) = plt.subplots(1, 2)
        eps = [float(r[0]) for r in rows]
        left.loglog(eps, [max(r[1], 1) for r in rows], "o-")
        left.set_xlabel(r"$\varepsilon$")
        left.set_ylabel(r"$N_{opt}$")
        right.loglog(eps, [float(r[2]) for r in rows], "o-", label="optimal error")
        right.loglog(eps, [float(r[3]) for r in rows], "--", label=r"$\frac{1}{5\varepsilon^2}e^{-6/(5\varepsilon)}$")
        right.set_xlabel(r"$\varepsilon$")
        right.legend()
        _save(fig, path)


def plot_solution(rows, path):
    """Real and imaginary parts of phi_N^WKB."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        x = [float(r[0]) for r in rows]
        ax.plot(x, [float(r[1]) for r in rows], label=r"Re $\varphi$")
        ax.plot(x, [float(r[2]) for r in rows], label=r"Im $\varphi$")
        ax.set_xlabel("x")
        ax.legend()
        _save(fig, path)
