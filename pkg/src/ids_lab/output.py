"""CSV, JSON and SVG writers.  CSVs are the source of truth; plots are a convenience."""

from __future__ import annotations

import json
import numbers
import os


def _cell(x) -> str:
    if isinstance(x, (bool, str)):
        return str(x)
    if isinstance(x, numbers.Integral):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header, rows, digest: str):
    """Comment line with the config hash, header row, then LF-terminated rows."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_sha256={digest}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(x) for x in row) + "\n")


def read_csv(path):
    """Return ``(comment, header, rows)``; values are parsed as floats."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    comment, header = lines[0], lines[1].split(",")
    rows = [[float(v) for v in line.split(",")] for line in lines[2:] if line]
    return comment, header, rows


def write_json(path, obj):
    with open(path, "w", newline="") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "ids-lab"
    return plt


def _save(plt, fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_curves(path, curves, title, xlabel="lambda", ylabel="N(lambda)"):
    """``curves`` is a list of ``(label, x, y)``."""
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, x, y in curves:
        ax.plot(x, y, label=label, drawstyle="steps-post" if len(x) > 2 else "default")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize="small")
    _save(plt, fig, path)


def plot_wegner(path, table):
    import numpy as np

    plt = _figure()
    fig, ax = plt.subplots(figsize=(6, 4))
    fit = table.fit
    for size in sorted({r.size for r in table.rows}):
        rows = [r for r in table.rows if r.size == size and r.mean_trace > 0]
        if not rows:
            continue
        eps = np.array([r.epsilon for r in rows])
        line = ax.loglog(eps, [r.mean_trace for r in rows], "o", label=f"|J|={size}")[0]
        ax.loglog(eps, np.exp(fit.log_c) * eps**fit.alpha * size**fit.beta, "-", color=line.get_color())
    ax.set_xlabel("epsilon")
    ax.set_ylabel("mean trace")
    ax.set_title(f"E={table.energy}: alpha={fit.alpha:.3f}, beta={fit.beta:.3f}")
    ax.legend(fontsize="small")
    _save(plt, fig, path)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
