"""Render benchmark CSV tables into figures.

Every plotted number is a mean or std of CSV values, grouped per policy
over runs (or reps); there is no smoothing or fitting. Schemas are
validated by header inspection before any parsing of values.
"""

from __future__ import annotations

import dataclasses
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

KINDS = ("regret", "reward_ratio", "param_error", "eps_sweep", "arm_change")

# kind -> (required columns, x column, value column)
SCHEMAS = {
    "regret": (("run_id", "policy", "t", "cum_regret"), "t", "cum_regret"),
    "reward_ratio": (("run_id", "policy", "t", "reward_ratio"), "t", "reward_ratio"),
    "param_error": (("run_id", "policy", "t", "param_error"), "t", "param_error"),
    "eps_sweep": (("run_id", "policy", "epsilon", "final_regret"), "epsilon", "final_regret"),
    "arm_change": (("policy", "change_point", "rep", "changed_arms"),
                   "change_point", "changed_arms"),
}

AXIS_LABELS = {
    "regret": ("Iteration", "Cumulative regret"),
    "reward_ratio": ("Iteration", "Reward ratio"),
    "param_error": ("Iteration", "Parameter error"),
    "eps_sweep": ("Privacy budget ε", "Final cumulative regret"),
    "arm_change": ("Change point", "Changed arms"),
}

FIGSIZE = (6.4, 4.8)
DPI = 150


class DataError(ValueError):
    """The input CSV is missing, malformed, schema-incompatible, or empty."""


@dataclasses.dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    kind: str
    out_path: str
    band: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError("unknown figure kind %r, valid: %r" % (self.kind, KINDS))


def load_table(spec: FigureSpec) -> pd.DataFrame:
    """Read the CSV, check the header for the kind's schema, and drop
    rows whose value cell is empty (ratios before the normalizer has
    collected reward, parameter errors of reward-blind policies)."""
    if not os.path.exists(spec.input_csv):
        raise DataError("input CSV not found: %s" % (spec.input_csv,))
    try:
        df = pd.read_csv(spec.input_csv)
    except pd.errors.EmptyDataError:
        raise DataError("input CSV has no header: %s" % (spec.input_csv,))
    except pd.errors.ParserError as exc:
        raise DataError("input CSV failed to parse: %s" % (exc,))
    required, _, value = SCHEMAS[spec.kind]
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise DataError("CSV does not match kind %r: missing column(s) %s"
                        % (spec.kind, ", ".join(missing)))
    df = df.dropna(subset=[value])
    if df.empty:
        raise DataError("no data rows in %s" % (spec.input_csv,))
    return df


def aggregate(df: pd.DataFrame, kind: str) -> dict:
    """Per policy: x values with mean and population std of the value
    column across runs/reps. Policies sort lexicographically so colors
    and legend order are stable."""
    _, x_col, value = SCHEMAS[kind]
    out = {}
    for policy in sorted(df["policy"].unique()):
        grouped = df[df["policy"] == policy].groupby(x_col)[value]
        mean = grouped.mean()
        std = grouped.std(ddof=0).fillna(0.0)  # single sample: zero-width band
        out[str(policy)] = (mean.index.to_numpy(), mean.to_numpy(), std.to_numpy())
    return out


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib figure without saving it."""
    series = aggregate(load_table(spec), spec.kind)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    if spec.kind == "arm_change":
        _grouped_bars(ax, series)
    else:
        for policy, (xs, mean, std) in series.items():
            ax.plot(xs, mean, label=policy,
                    marker="o" if spec.kind == "eps_sweep" else None)
            if spec.band:
                ax.fill_between(xs, mean - std, mean + std, alpha=0.25)
    xlabel, ylabel = AXIS_LABELS[spec.kind]
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    return fig


def _grouped_bars(ax, series):
    policies = list(series)
    points = sorted({x for xs, _, _ in series.values() for x in xs})
    width = 0.8 / len(policies)
    for i, policy in enumerate(policies):
        xs, mean, std = series[policy]
        by_x = dict(zip(xs, zip(mean, std)))
        heights = [by_x.get(p, (0.0, 0.0))[0] for p in points]
        errs = [by_x.get(p, (0.0, 0.0))[1] for p in points]
        offsets = np.arange(len(points)) + (i - (len(policies) - 1) / 2) * width
        ax.bar(offsets, heights, width=width, yerr=errs, capsize=3, label=policy)
    ax.set_xticks(np.arange(len(points)))
    ax.set_xticklabels([str(p) for p in points])


def render(spec: FigureSpec) -> str:
    """Write the figure as a PNG and return its path."""
    fig = build_figure(spec)
    out_dir = os.path.dirname(spec.out_path)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    fig.savefig(spec.out_path, dpi=DPI)
    plt.close(fig)
    return spec.out_path
