"""Exponent formulas of the upper bounds, and log-log scaling fits of exact counts."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .counting import CountReport, count_gamma
from .errors import PreconditionError

SLACK = 0.2
VARIANTS = ("thm-main", "thm-generic", "cor-threshold")


@dataclass(frozen=True)
class BoundSpec:
    variant: str
    k: int
    tau: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "tau", Fraction(self.tau))
        if self.variant not in VARIANTS:
            raise PreconditionError(f"unknown variant {self.variant!r}")
        if self.k < 5:
            raise PreconditionError("the bounds are stated for k >= 5")
        if self.variant != "cor-threshold" and self.tau < 2:
            raise PreconditionError("the bounds are stated for tau >= 2")


def bound_terms(k: int, tau) -> list[Fraction]:
    """The four exponents of the general bound, with epsilon = 0."""
    t = Fraction(tau)
    return [
        Fraction(9, 4) / t + 1 - t / k,
        2 - t / 4,
        2 + Fraction(27, 20) / t - Fraction(9, 20) * t,
        Fraction(3, 2) / t + Fraction(2, 3),
    ]


def tangent_exponent(tau, nu: int) -> Fraction:
    """Exponent of the contribution of the flex tangent lines, 2 - tau/nu."""
    return 2 - Fraction(tau) / nu


def bound_exponents(spec: BoundSpec):
    """Largest exponent of the bound (exact), or the tau threshold for o(B) counts."""
    if spec.variant == "cor-threshold":
        if spec.k <= 9:
            return Fraction(9, 2)
        r = math.isqrt(spec.k)
        if r * r == spec.k:
            return Fraction(3 * r, 2)
        return 1.5 * math.sqrt(spec.k)
    terms = bound_terms(spec.k, spec.tau)
    if spec.variant == "thm-generic":
        terms = [terms[0], terms[3]]
    return max(terms)


@dataclass
class ExponentFit:
    samples: list
    slope: float
    intercept: float
    residual: float

    def to_dict(self) -> dict:
        return {
            "samples": [[b, n] for b, n in self.samples],
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
        }


def fit_exponent(samples) -> ExponentFit:
    """Least-squares line through (log2 B, log2 max(N, 1))."""
    samples = sorted((int(b), int(n)) for b, n in samples)
    if len(samples) < 3 or len({b for b, _ in samples}) != len(samples):
        raise PreconditionError("need at least 3 samples with distinct B")
    x = np.array([math.log2(b) for b, _ in samples])
    y = np.array([math.log2(max(n, 1)) for _, n in samples])
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), res, _, _ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([slope, icpt]) - y) ** 2)))
    return ExponentFit(samples, float(slope), float(icpt), resid)


def _svg(fit: ExponentFit, title: str, bound: float | None) -> str:
    """A standalone scatter plot of log2 N against log2 B with the fitted line."""
    W, H, pad = 480, 320, 48
    xs = [math.log2(b) for b, _ in fit.samples]
    ys = [math.log2(max(n, 1)) for _, n in fit.samples]
    x0, x1 = min(xs), max(xs)
    fy = [fit.slope * x + fit.intercept for x in (x0, x1)]
    y0, y1 = min(ys + fy), max(ys + fy)
    if y1 == y0:
        y1 = y0 + 1

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (W - 2 * pad)

    def py(y):
        return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad)

    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">\n')
    out.write(f"<title>{title}</title>\n<desc>\nlog2B,log2N\n")
    for x, y in zip(xs, ys):
        out.write(f"{x:.6f},{y:.6f}\n")
    out.write(f"slope={fit.slope:.6f} intercept={fit.intercept:.6f}")
    if bound is not None:
        out.write(f" bound={bound:.6f}")
    out.write("\n</desc>\n")
    out.write(f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>\n')
    out.write(f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>\n')
    out.write(f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>\n')
    out.write(f'<line x1="{px(x0):.2f}" y1="{py(fy[0]):.2f}" x2="{px(x1):.2f}" y2="{py(fy[1]):.2f}" stroke="steelblue"/>\n')
    for x, y in zip(xs, ys):
        out.write(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="firebrick"/>\n')
    out.write(f'<text x="{W / 2:.0f}" y="{H - 12}" text-anchor="middle" font-size="12">log2 B</text>\n')
    out.write(f'<text x="14" y="{H / 2:.0f}" font-size="12" transform="rotate(-90 14 {H / 2:.0f})">log2 N</text>\n')
    out.write(f'<text x="{W / 2:.0f}" y="20" text-anchor="middle" font-size="13">{title} slope {fit.slope:.3f}</text>\n')
    out.write("</svg>\n")
    return out.getvalue()


@dataclass
class ScalingResult:
    fit: ExponentFit
    reports: list
    bound: Fraction | None
    csv: str
    slack: float = SLACK

    @property
    def within(self) -> bool | None:
        if self.bound is None:
            return None
        return self.fit.slope <= float(self.bound) + self.slack


def fit_and_report(plan, flexes=None, csv_path=None, plot_path=None, threads: int = 1,
                   timing: bool = False, form_id: str = "", slack: float = SLACK) -> ScalingResult:
    """Count each query (ascending B), fit the exponent and write CSV (and SVG).

    With a flex report the fit uses N*, otherwise N. If a count fails, the rows
    done so far are still written before the error propagates.
    """
    plan = sorted(plan, key=lambda q: q.B)
    if not plan:
        raise PreconditionError("empty plan")
    F, gamma = plan[0].F, plan[0].gamma
    if any(q.F != F or q.gamma != gamma for q in plan):
        raise PreconditionError("all queries must share F and gamma")
    if len({q.B for q in plan}) < 3:
        raise PreconditionError("need at least 3 distinct B values")
    lines = [CountReport.CSV_HEADER]
    reports = []

    def flush():
        text = "\n".join(lines) + "\n"
        if csv_path is not None:
            Path(csv_path).write_text(text)
        return text

    try:
        for q in plan:
            r = count_gamma(q, flexes, threads=threads, form_id=form_id, timing=timing)
            reports.append(r)
            lines.append(r.csv_row())
    except Exception:
        flush()
        raise
    text = flush()
    samples = [(r.B, r.N if r.N_star is None else r.N_star) for r in reports]
    fit = fit_exponent(samples)
    tau = plan[0].tau
    bound = None
    if F.degree >= 5 and tau >= 2:
        bound = bound_exponents(BoundSpec("thm-main", F.degree, tau))
    if plot_path is not None:
        title = f"{form_id or 'F'} tau={tau}"
        Path(plot_path).write_text(_svg(fit, title, None if bound is None else float(bound)))
    return ScalingResult(fit, reports, bound, text, slack)
