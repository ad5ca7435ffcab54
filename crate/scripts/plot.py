#!/usr/bin/env python3
"""Render figures from mg-cavity CSV outputs.

    plot.py series    OUT/series_seed*.csv
    plot.py histogram OUT/histogram_seed*.csv [--theory OUT/solution.json]
    plot.py volatility OUT/simulate_sweep.csv [...] [--theory OUT/sweep.csv]
    plot.py sweep     OUT/sweep.csv --column b
    plot.py scores    OUT/trajectories_seed*.csv [--agent 0]

Needs numpy and matplotlib. Figures go next to the first input as PNG.
"""
import argparse
import json
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def read_csv(path):
    lines = [l for l in Path(path).read_text().splitlines() if not l.startswith("#")]
    head = lines[0].split(",")
    cols = {h: [] for h in head}
    for l in lines[1:]:
        for h, v in zip(head, l.split(",")):
            cols[h].append(v)
    out = {}
    for h, v in cols.items():
        try:
            out[h] = np.array([float(x) for x in v])
        except ValueError:
            out[h] = np.array(v)
    return out


def save(fig, first, name):
    p = Path(first).with_name(name)
    fig.savefig(p, dpi=150, bbox_inches="tight")
    print(p)


def series(args):
    d = read_csv(args.files[0])
    fig, ax = plt.subplots()
    ax.plot(d["t"], d["A"], lw=0.2)
    ax.set_xlabel("t")
    ax.set_ylabel("A(t)")
    save(fig, args.files[0], "series.png")


def histogram(args):
    fig, ax = plt.subplots()
    for f in args.files:
        d = read_csv(f)
        ax.step(d["bin_center"], d["density"], where="mid", label=Path(f).stem)
    if args.theory:
        s = json.loads(Path(args.theory).read_text())["data"]
        mu, sd = s["predicted_a_mean"], s["predicted_a_sd"]
        x = np.linspace(mu - 4 * sd, mu + 4 * sd, 400)
        ax.plot(x, np.exp(-0.5 * ((x - mu) / sd) ** 2) / (sd * math.sqrt(2 * math.pi)), "k--", label="theory")
    ax.set_xlabel("A")
    ax.set_ylabel("density")
    ax.legend(fontsize=7)
    save(fig, args.files[0], "histogram.png")


def volatility(args):
    fig, ax = plt.subplots()
    for f in args.files:
        d = read_csv(f)
        ax.errorbar(d["alpha"], d["sigma"], yerr=d["sigma_se"], fmt="o", ms=3, label=Path(f).parent.name)
    if args.theory:
        t = read_csv(args.theory)
        ok = t["converged"] == "true"
        ax.plot(t["alpha"][ok], t["sigma"][ok], "k-", label="theory")
    ax.axhline(1.0, ls=":", c="gray")
    ax.set_xscale("log")
    ax.set_xlabel("alpha")
    ax.set_ylabel("sigma")
    ax.legend(fontsize=7)
    save(fig, args.files[0], "volatility.png")


def sweep(args):
    d = read_csv(args.files[0])
    x = list(d)[0]
    ok = d["converged"] == "true"
    fig, ax = plt.subplots()
    ax.plot(d[x][ok], d[args.column][ok], "o-", ms=3)
    ax.set_xlabel(x)
    ax.set_ylabel(args.column)
    save(fig, args.files[0], f"sweep_{args.column}.png")


def scores(args):
    d = read_csv(args.files[0])
    m = d["agent_id"] == args.agent
    t, u = d["t"][m], d["U"][m]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    spans = [t.max() / 1000, t.max() / 30, t.max()]
    for ax, span in zip(axes, spans):
        k = t <= span
        ax.plot(t[k], u[k], lw=0.6)
        r = np.linspace(1, span, 200)
        ax.plot(r, np.sqrt(r), "k:", r, -np.sqrt(r), "k:")
        ax.set_xlabel("t")
    axes[0].set_ylabel("U")
    save(fig, args.files[0], f"scores_agent{args.agent}.png")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("kind", choices=["series", "histogram", "volatility", "sweep", "scores"])
    ap.add_argument("files", nargs="+")
    ap.add_argument("--theory")
    ap.add_argument("--column", default="sigma")
    ap.add_argument("--agent", type=int, default=0)
    a = ap.parse_args()
    globals()[a.kind](a)


if __name__ == "__main__":
    sys.exit(main())
