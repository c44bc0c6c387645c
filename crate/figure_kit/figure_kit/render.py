"""Work-precision, speedup and scaled-stability plots."""

from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .schema import read_csv  # noqa: E402

KINDS = ("work-precision", "seq-work-precision", "speedup-vs-threads", "scaled-stability")


def theory_speedup(p):
    """S = (p^2 + 4) / (4 p) for midpoint extrapolation of even order p."""
    return (p * p + 4) / (4 * p)


@dataclass
class FigureSpec:
    kind: str
    csv: list
    out: str
    title: str = ""
    theory_order: int = None
    series: dict = field(default_factory=dict)


def _ok(rows):
    return [r for r in rows if r.get("failed", "0") == "0" and r.get("error", "") != ""]


def _work_precision(spec, rows, cost):
    by_method = defaultdict(list)
    for r in _ok(rows):
        by_method[r["method"]].append((float(r["error"]), float(r[cost])))
    fig, ax = plt.subplots()
    for method, pts in sorted(by_method.items()):
        pts.sort()
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], marker="o", label=method)
        spec.series[method] = pts
    ax.set_xlabel("absolute error")
    ax.set_ylabel("function evaluations" if cost == "f_evals" else "sequential function evaluations")
    ax.legend()
    return fig


def _speedup(spec, rows):
    by_method = defaultdict(lambda: defaultdict(list))
    for r in _ok(rows):
        by_method[r["method"]][int(r["workers"])].append(float(r["wall_time"]))
    fig, ax = plt.subplots()
    for method, per in sorted(by_method.items()):
        if 1 not in per:
            continue
        base = sum(per[1]) / len(per[1])
        pts = sorted((w, base / (sum(t) / len(t))) for w, t in per.items())
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=method)
        spec.series[method] = pts
    if spec.theory_order:
        s = theory_speedup(spec.theory_order)
        ax.axhline(s, linestyle=":", color="k", label=f"theory {s:.2f}")
        spec.series["theory"] = s
    ax.set_xlabel("threads")
    ax.set_ylabel("speedup")
    ax.legend()
    return fig


def _scaled_stability(spec, rows):
    labels = [r["label"] for r in rows]
    real = [float(r["I_real"]) / float(r["s"]) for r in rows]
    imag = [float(r["I_imag"]) / float(r["s"]) for r in rows]
    fig, ax = plt.subplots()
    x = range(len(labels))
    ax.bar([i - 0.2 for i in x], real, width=0.4, label="I_real / s")
    ax.bar([i + 0.2 for i in x], imag, width=0.4, label="I_imag / s")
    ax.set_xticks(list(x), labels, rotation=45, ha="right")
    ax.legend()
    spec.series = {"real": dict(zip(labels, real)), "imag": dict(zip(labels, imag))}
    return fig


def render(spec):
    """Writes one image for `spec`; nothing is written when a CSV is unusable."""
    if spec.kind not in KINDS:
        raise ValueError(f"unknown figure kind {spec.kind!r}; expected one of {', '.join(KINDS)}")
    kind = "analyze" if spec.kind == "scaled-stability" else "bench"
    rows = [r for path in spec.csv for r in read_csv(path, kind)]
    if spec.kind == "work-precision":
        fig = _work_precision(spec, rows, "f_evals")
    elif spec.kind == "seq-work-precision":
        fig = _work_precision(spec, rows, "f_evals_seq")
    elif spec.kind == "speedup-vs-threads":
        fig = _speedup(spec, rows)
    else:
        fig = _scaled_stability(spec, rows)
    if spec.title:
        fig.axes[0].set_title(spec.title)
    fig.tight_layout()
    Path(spec.out).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out)
    plt.close(fig)
    return spec.out
