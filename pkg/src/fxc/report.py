"""Trace export: CSV, text summary, two-column plot data and SVG charts."""

from __future__ import annotations

import html
from pathlib import Path
from typing import Sequence

import numpy as np

from .bounds import settling_bound
from .engine import Scenario, SimTrace, hold_violations, tracking_metrics, trigger_stats
from .errors import ConditionViolated


def csv_header(n: int) -> list[str]:
    return (
        ["t", "agent"]
        + [f"x{k + 1}" for k in range(n)]
        + [f"xhat{k + 1}" for k in range(n)]
        + ["gamma1"]
        + [f"phihat{k + 1}" for k in range(n)]
        + ["alpha_n", "w", "u_held", "event"]
    )


def write_trace_csv(trace: SimTrace, path) -> None:
    """One row per (step, follower); followers are numbered from 1."""
    K, N, n = trace.x.shape
    cols = [
        np.repeat(trace.t, N)[:, None],
        np.tile(np.arange(1, N + 1), K)[:, None],
        trace.x.reshape(K * N, n),
        trace.xhat.reshape(K * N, n),
        trace.gamma1.reshape(K * N, 1),
        trace.phi_hat.reshape(K * N, n),
        trace.alpha_n.reshape(K * N, 1),
        trace.w.reshape(K * N, 1),
        trace.u_held.reshape(K * N, 1),
        trace.event.reshape(K * N, 1).astype(float),
    ]
    data = np.hstack(cols)
    fmt = ["%.17g", "%d"] + ["%.17g"] * (3 * n + 4) + ["%d"]
    np.savetxt(path, data, fmt=fmt, delimiter=",", header=",".join(csv_header(n)), comments="")


def summary(trace: SimTrace, scn: Scenario, tail_start: float = 5.0, margin: float = 0.1) -> dict:
    kappa1 = [c.kappa[0] for c in scn.controllers]
    stats = trigger_stats(trace)
    tail_start = min(tail_start, float(trace.t[-1]))
    track = tracking_metrics(trace, kappa1, tail_start, margin)
    viol = hold_violations(trace)
    out = {
        "dt": trace.dt,
        "t_final": trace.t_final,
        "mode": trace.mode,
        "steps": int(trace.t.size),
        "coupling": trace.metadata.get("coupling"),
        "tail_start": tail_start,
        "agents": [
            {**stats[i], **track[i], "hold_violations": int(viol[i])} for i in range(trace.n_agents)
        ],
    }
    if scn.bound is not None:
        try:
            out["settling_bound"] = settling_bound(scn.bound)
        except ConditionViolated as exc:
            out["settling_bound"] = f"condition violated: {exc}"
    return out


def format_summary(s: dict) -> str:
    lines = [
        f"dt: {s['dt']:g}",
        f"t_final: {s['t_final']:g}",
        f"mode: {s['mode']}",
        f"steps: {s['steps']}",
        f"coupling: {', '.join(f'{c:g}' for c in s['coupling'])}",
        f"tail_start: {s['tail_start']:g}",
    ]
    if "settling_bound" in s:
        sb = s["settling_bound"]
        lines.append(f"settling_bound: {sb:.6g}" if isinstance(sb, float) else f"settling_bound: {sb}")
    for i, a in enumerate(s["agents"], start=1):
        lines.append(f"agent {i}:")
        lines.append(f"  trigger_count: {a['count']}")
        lines.append(f"  min_inter_event: {a['min_inter_event']:.6g}")
        lines.append(f"  mean_inter_event: {a['mean_inter_event']:.6g}")
        lines.append(f"  max_tail_gamma1: {a['max_tail_gamma1']:.6g}")
        lines.append(f"  max_tail_output_error: {a['max_tail_output_error']:.6g}")
        lines.append(f"  observer_error_sup: {a['observer_error_sup']:.6g}")
        lines.append(f"  within_bound: {'yes' if a['within_bound'] else 'no'}")
        lines.append(f"  hold_violations: {a['hold_violations']}")
    total = sum(a["count"] for a in s["agents"])
    lines.append(f"total_triggers: {total}")
    return "\n".join(lines) + "\n"


def write_plot_data(trace: SimTrace, outdir) -> list[Path]:
    """Two-column ``t value`` files for every plotted series."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name, a, b):
        p = outdir / name
        np.savetxt(p, np.column_stack([a, b]), fmt="%.10g")
        written.append(p)

    put("leader_y0.dat", trace.t, trace.leader)
    for i in range(trace.n_agents):
        put(f"agent{i + 1}_y.dat", trace.t, trace.x[:, i, 0])
        put(f"agent{i + 1}_yhat.dat", trace.t, trace.xhat[:, i, 0])
        put(f"agent{i + 1}_gamma1.dat", trace.t, trace.gamma1[:, i])
        put(f"agent{i + 1}_u_held.dat", trace.t, trace.u_held[:, i])
        times = trace.event_times(i)
        put(f"agent{i + 1}_events.dat", times, np.full(times.size, i + 1))
    return written


# ---------------------------------------------------------------------------
# SVG

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]
_W, _H, _ML, _MR, _MT, _MB = 720, 400, 60, 130, 36, 44


def _decimate(t, y, limit=1500):
    step = max(1, int(np.ceil(t.size / limit)))
    return t[::step], y[::step]


def _frame(title, xlim, ylim, xlabel, ylabel):
    pw, ph = _W - _ML - _MR, _H - _MT - _MB
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_ML + pw / 2}" y="20" text-anchor="middle" font-size="14">{html.escape(title)}</text>',
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    for frac in np.linspace(0, 1, 6):
        xv = xlim[0] + frac * (xlim[1] - xlim[0])
        yv = ylim[0] + frac * (ylim[1] - ylim[0])
        px, py = _ML + frac * pw, _MT + ph - frac * ph
        parts.append(f'<text x="{px:.1f}" y="{_MT + ph + 16}" text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<text x="{_ML - 6}" y="{py + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
        parts.append(f'<line x1="{_ML}" x2="{_ML + pw}" y1="{py:.1f}" y2="{py:.1f}" stroke="#eee"/>')
    parts.append(f'<text x="{_ML + pw / 2}" y="{_H - 8}" text-anchor="middle">{html.escape(xlabel)}</text>')
    parts.append(
        f'<text x="14" y="{_MT + ph / 2}" text-anchor="middle" transform="rotate(-90 14 {_MT + ph / 2})">'
        f"{html.escape(ylabel)}</text>"
    )
    return parts, pw, ph


def line_chart(series: Sequence[tuple[str, np.ndarray, np.ndarray]], title: str, xlabel="t [s]", ylabel="") -> str:
    """Render labelled ``(label, x, y)`` series as an SVG line chart."""
    xs = np.concatenate([s[1] for s in series])
    ys = np.concatenate([s[2] for s in series])
    xlim = (float(xs.min()), float(xs.max()) if xs.max() > xs.min() else float(xs.min()) + 1)
    lo, hi = float(ys.min()), float(ys.max())
    pad = 0.05 * (hi - lo) if hi > lo else 1.0
    ylim = (lo - pad, hi + pad)
    parts, pw, ph = _frame(title, xlim, ylim, xlabel, ylabel)
    for k, (label, x, y) in enumerate(series):
        x, y = _decimate(np.asarray(x), np.asarray(y))
        px = _ML + (x - xlim[0]) / (xlim[1] - xlim[0]) * pw
        py = _MT + ph - (y - ylim[0]) / (ylim[1] - ylim[0]) * ph
        pts = " ".join(f"{a:.1f},{b:.1f}" for a, b in zip(px, py))
        color = _PALETTE[k % len(_PALETTE)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        ly = _MT + 14 + 16 * k
        parts.append(f'<line x1="{_W - _MR + 10}" x2="{_W - _MR + 30}" y1="{ly - 4}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{_W - _MR + 36}" y="{ly}">{html.escape(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def event_raster(trace: SimTrace, title="Trigger events") -> str:
    N = trace.n_agents
    xlim = (0.0, float(trace.t_final))
    parts, pw, ph = _frame(title, xlim, (0.5, N + 0.5), "t [s]", "follower")
    for i in range(N):
        color = _PALETTE[i % len(_PALETTE)]
        y = _MT + ph - (i + 1 - 0.5) / N * ph
        times = trace.event_times(i)
        px = _ML + times / xlim[1] * pw
        d = " ".join(f"M{a:.1f} {y - 0.3 * ph / N:.1f}v{0.6 * ph / N:.1f}" for a in px)
        parts.append(f'<path d="{d}" stroke="{color}" stroke-width="0.4"/>')
        parts.append(f'<text x="{_W - _MR + 10}" y="{y + 4:.1f}">agent {i + 1}: {times.size}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svgs(trace: SimTrace, outdir) -> list[Path]:
    """Tracking curves, outputs versus estimates, and the event raster."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    N = trace.n_agents
    tracking = [("leader", trace.t, trace.leader)] + [
        (f"agent {i + 1}", trace.t, trace.x[:, i, 0]) for i in range(N)
    ]
    states = []
    for i in range(N):
        states.append((f"x{i + 1},1", trace.t, trace.x[:, i, 0]))
        states.append((f"xhat{i + 1},1", trace.t, trace.xhat[:, i, 0]))
    files = {
        "tracking.svg": line_chart(tracking, "Tracking curves", ylabel="output"),
        "states.svg": line_chart(states, "States and estimates", ylabel="x_{i,1}"),
        "events.svg": event_raster(trace),
    }
    written = []
    for name, text in files.items():
        p = outdir / name
        p.write_text(text, encoding="utf-8")
        written.append(p)
    return written
