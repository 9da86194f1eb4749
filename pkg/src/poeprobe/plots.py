"""Static SVG figures: ln S_n with its fit, fit residuals, and residual overlays.

Output is plain text with fixed-precision coordinates and no timestamps, so the
same inputs always give the same bytes.
"""
from __future__ import annotations

import logging
import math
from html import escape
from typing import Optional, Sequence

import numpy as np

from .writers import atomic_write_text

log = logging.getLogger(__name__)

WIDTH = 640
PANEL_H = 260
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 30, 40
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _c(x: float) -> str:
    return f"{x:.2f}"


class _Panel:
    def __init__(self, top: float, xs: Sequence[float], ys: Sequence[float], title: str, ylabel: str):
        self.top = top
        self.title = title
        self.ylabel = ylabel
        self.x0, self.x1 = _span(xs)
        self.y0, self.y1 = _span(ys)
        self.parts: list[str] = []

    def px(self, x: float) -> float:
        return MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)

    def py(self, y: float) -> float:
        h = PANEL_H - MARGIN_T - MARGIN_B
        return self.top + MARGIN_T + (self.y1 - y) / (self.y1 - self.y0) * h

    def frame(self) -> None:
        left, right = MARGIN_L, WIDTH - MARGIN_R
        top, bottom = self.top + MARGIN_T, self.top + PANEL_H - MARGIN_B
        self.parts.append(
            f'<rect x="{left}" y="{_c(top)}" width="{right - left}" height="{_c(bottom - top)}" '
            'fill="none" stroke="#333" stroke-width="1"/>'
        )
        self.parts.append(
            f'<text x="{WIDTH / 2:.2f}" y="{_c(self.top + 18)}" text-anchor="middle" '
            f'font-size="14">{escape(self.title)}</text>'
        )
        for tick in np.linspace(self.x0, self.x1, 6):
            self.parts.append(
                f'<text x="{_c(self.px(tick))}" y="{_c(bottom + 16)}" text-anchor="middle" '
                f'font-size="10">{tick:.4g}</text>'
            )
        for tick in np.linspace(self.y0, self.y1, 5):
            self.parts.append(
                f'<text x="{left - 6}" y="{_c(self.py(tick) + 3)}" text-anchor="end" '
                f'font-size="10">{tick:.4g}</text>'
            )
        self.parts.append(
            f'<text x="{WIDTH / 2:.2f}" y="{_c(bottom + 32)}" text-anchor="middle" font-size="11">n</text>'
        )
        mid = (top + bottom) / 2
        self.parts.append(
            f'<text x="14" y="{_c(mid)}" text-anchor="middle" font-size="11" '
            f'transform="rotate(-90 14 {_c(mid)})">{escape(self.ylabel)}</text>'
        )

    def points(self, xs, ys, color: str) -> None:
        for x, y in zip(xs, ys):
            self.parts.append(f'<circle cx="{_c(self.px(x))}" cy="{_c(self.py(y))}" r="3" fill="{color}"/>')

    def line(self, xs, ys, color: str, dashed: bool = False) -> None:
        pts = " ".join(f"{_c(self.px(x))},{_c(self.py(y))}" for x, y in zip(xs, ys))
        dash = ' stroke-dasharray="4 3"' if dashed else ""
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')

    def note(self, text: str, row: int = 0, color: str = "#333") -> None:
        self.parts.append(
            f'<text x="{WIDTH - MARGIN_R - 6}" y="{_c(self.top + MARGIN_T + 14 + 13 * row)}" '
            f'text-anchor="end" font-size="10" fill="{color}">{escape(text)}</text>'
        )


def _span(vals) -> tuple[float, float]:
    vals = [v for v in vals if math.isfinite(v)]
    lo, hi = (min(vals), max(vals)) if vals else (0.0, 1.0)
    if hi - lo < 1e-12:
        pad = max(abs(hi), 1.0) * 0.05
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def _document(panels: list[_Panel]) -> str:
    height = PANEL_H * len(panels)
    body = "\n".join(p for panel in panels for p in panel.parts)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}">\n'
        f'<rect width="{WIDTH}" height="{height}" fill="white"/>\n{body}\n</svg>\n'
    )


def series_svg(analysis, title: str = "") -> Optional[str]:
    """Two panels: ``ln S_n`` with the fit line, and the fit residuals in ppt."""
    s = analysis.series
    positive = s.values > 0
    if len(s) == 0 or not np.any(positive):
        return None
    label = "T" if s.kind == "T" else "S"
    n = s.n[positive].astype(float)
    ln_s = np.log(s.values[positive])
    fit = analysis.fit
    has_fit = fit.n_used.size > 0

    top = _Panel(0, list(n), list(ln_s), title or f"ln {label}_n", f"ln {label}_n")
    fit_x = np.array(fit.fit_window, dtype=float) if has_fit else np.array([])
    fit_y = fit.intercept + fit.slope * fit_x if has_fit else np.array([])
    top.y0, top.y1 = _span(list(ln_s) + list(fit_y))
    top.frame()
    top.points(n, ln_s, PALETTE[0])
    if has_fit:
        top.line(fit_x, fit_y, PALETTE[1])
        top.note(f"slope {fit.slope:.6g}, intercept {fit.intercept:.6g}")
        top.note(f"max |data - fit| {fit.max_abs_residual_ppt:.3g} ppt", row=1)
        top.note(analysis.verdict.status, row=2)
    else:
        top.note("insufficient data for a fit")

    panels = [top]
    if has_fit:
        units = "ppt" if fit.residual_units == "absolute" else "ppt of fit"
        bottom = _Panel(PANEL_H, list(fit.n_used), list(fit.residuals_ppt) + [0.0], "fit residual", f"residual ({units})")
        bottom.frame()
        bottom.line([bottom.x0, bottom.x1], [0.0, 0.0], "#999", dashed=True)
        bottom.points(fit.n_used, fit.residuals_ppt, PALETTE[0])
        panels.append(bottom)
    return _document(panels)


def overlay_svg(entries: Sequence[tuple[str, object]], title: str = "fit residuals") -> Optional[str]:
    """Residuals of several runs on one axis, one colour per run."""
    fitted = [(label, a) for label, a in entries if a.fit.n_used.size > 0]
    if not fitted:
        return None
    xs = [float(n) for _, a in fitted for n in a.fit.n_used]
    ys = [float(r) for _, a in fitted for r in a.fit.residuals_ppt] + [0.0]
    panel = _Panel(0, xs, ys, title, "residual (ppt)")
    panel.frame()
    panel.line([panel.x0, panel.x1], [0.0, 0.0], "#999", dashed=True)
    for i, (label, a) in enumerate(fitted):
        color = PALETTE[i % len(PALETTE)]
        panel.line(a.fit.n_used, a.fit.residuals_ppt, color)
        panel.points(a.fit.n_used, a.fit.residuals_ppt, color)
        panel.note(f"{label}: max {a.fit.max_abs_residual_ppt:.3g} ppt", row=i, color=color)
    return _document([panel])


def emit_plot(svg: Optional[str], path) -> bool:
    """Write ``svg`` to ``path``; returns False (and warns) when there is nothing to draw."""
    if svg is None:
        log.warning("nothing to plot for %s; no file written", path)
        return False
    atomic_write_text(path, svg)
    return True
