"""Static SVG figures of fidelity decays, parameter grids and entanglement growth.

Text is rendered as paths, so the files need no fonts or other assets, and
the SVG id salt and date are pinned so equal inputs give equal files.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.fonttype": "path", "svg.hashsalt": "rydchain", "font.size": 9}


def _save(fig, path):
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def plot_fidelity(times, F, path, t_heisenberg=None, fit=None, label=None):
    """Log-log survival probability with the Heisenberg time and a fitted power law.

    ``fit`` is a :class:`~rydchain.analysis.DecayFit` or a dict with
    ``gamma`` and ``window``; the fitted line is anchored at the mean of
    ``ln F`` over the window.
    """
    with matplotlib.rc_context(_RC):
        t = np.asarray(times, dtype=float)
        F = np.asarray(F, dtype=float)
        ok = (t > 0) & (F > 0)
        fig, ax = plt.subplots(figsize=(4.5, 3.4))
        ax.loglog(t[ok], F[ok], color="k", lw=1.2, label=label or "F(t)")
        if t_heisenberg is not None and np.isfinite(t_heisenberg):
            ax.axvline(t_heisenberg, color="tab:blue", ls="--", lw=1, label="t_H")
        gamma, window = _fit_parts(fit)
        if gamma is not None and window is not None:
            sel = ok & (t >= window[0]) & (t <= window[1])
            if sel.any():
                lt = np.log(t[sel])
                b = np.mean(np.log(F[sel]) + gamma * lt)
                ax.loglog(t[sel], np.exp(b - gamma * lt), color="tab:red", lw=1.5,
                          label=f"gamma = {gamma:.3g}")
        ax.set_xlabel("t (natural units)")
        ax.set_ylabel("F(t)")
        ax.legend(frameon=False, loc="lower left")
        fig.tight_layout()
    return _save(fig, path)


def _fit_parts(fit):
    if fit is None:
        return None, None
    if isinstance(fit, dict):
        g, w = fit.get("gamma"), fit.get("window")
    else:
        g, w = fit.gamma, fit.fit_window
    if g is None or not np.isfinite(g):
        return None, None
    return float(g), w


def plot_grid(d_values, w_values, values, path, quantity="gamma", labels=None):
    """Intensity table of a per-cell quantity over spacing (rows) and disorder (columns).

    ``values`` has shape ``(len(d_values), len(w_values))``; missing cells
    are NaN. ``labels`` optionally overrides the annotation text per cell.
    """
    with matplotlib.rc_context(_RC):
        v = np.asarray(values, dtype=float)
        fig, ax = plt.subplots(figsize=(1.0 + 0.8 * len(w_values), 1.0 + 0.5 * len(d_values)))
        im = ax.pcolormesh(np.arange(len(w_values) + 1) - 0.5, np.arange(len(d_values) + 1) - 0.5,
                           np.ma.masked_invalid(v), cmap="viridis")
        ax.set_xticks(range(len(w_values)), [f"{w:g}" for w in w_values])
        ax.set_yticks(range(len(d_values)), [f"{d:g}" for d in d_values])
        ax.set_xlabel("disorder w")
        ax.set_ylabel("spacing d (um)")
        fin = v[np.isfinite(v)]
        mid = 0.5 * (fin.min() + fin.max()) if fin.size else 0.0
        for i in range(len(d_values)):
            for j in range(len(w_values)):
                text = labels[i][j] if labels is not None else (
                    "n/a" if not np.isfinite(v[i, j]) else f"{v[i, j]:.3g}")
                color = "k" if np.isfinite(v[i, j]) and v[i, j] > mid else "w"
                ax.text(j, i, text, ha="center", va="center", fontsize=7, color=color)
        fig.colorbar(im, ax=ax, label=quantity)
        fig.tight_layout()
    return _save(fig, path)


def grid_from_summary(summary, quantity="gamma"):
    """``(d_values, w_values, table, labels)`` from a ``summary.csv`` column dict.

    Rapidly collapsing cells have no exponent; they are labelled by their
    classification instead.
    """
    d = np.asarray(summary["d_um"], dtype=float)
    w = np.asarray(summary["w"], dtype=float)
    q = np.asarray(summary[quantity], dtype=float)
    ds, ws = np.unique(d), np.unique(w)
    table = np.full((len(ds), len(ws)), np.nan)
    labels = [["n/a"] * len(ws) for _ in ds]
    cls = summary.get("classification")
    for k in range(len(d)):
        i, j = np.searchsorted(ds, d[k]), np.searchsorted(ws, w[k])
        table[i, j] = q[k]
        if np.isfinite(q[k]):
            labels[i][j] = f"{q[k]:.3g}"
        elif cls is not None:
            labels[i][j] = str(cls[k])
    return ds, ws, table, labels


def plot_ee(times, S, path, split=1.0, ylabel="S / ln D_A"):
    """Entanglement entropy in two windows: linear time up to ``split`` and
    logarithmic time after it."""
    with matplotlib.rc_context(_RC):
        t = np.asarray(times, dtype=float)
        S = np.asarray(S, dtype=float)
        fig, (a, b) = plt.subplots(1, 2, figsize=(6.5, 3.0), sharey=True)
        early = t <= split
        late = (t >= split) & (t > 0)
        a.plot(t[early], S[early], color="k")
        a.set_xlabel("t (natural units)")
        a.set_ylabel(ylabel)
        b.semilogx(t[late], S[late], color="k")
        b.set_xlabel("t (natural units)")
        fig.tight_layout()
    return _save(fig, path)


def plot_series(times, columns, path, logx=True):
    """Several time series on one axis (e.g. fidelity and normalized s)."""
    with matplotlib.rc_context(_RC):
        t = np.asarray(times, dtype=float)
        fig, ax = plt.subplots(figsize=(4.5, 3.4))
        pos = t > 0 if logx else np.ones(len(t), bool)
        for name, y in columns.items():
            ax.plot(t[pos], np.asarray(y)[pos], label=name)
        if logx:
            ax.set_xscale("log")
        ax.set_xlabel("t (natural units)")
        ax.legend(frameon=False)
        fig.tight_layout()
    return _save(fig, path)
