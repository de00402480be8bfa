"""Plot data for 2-D instances: region boundaries, cut lines, samples.

``plot_rows`` produces the delimited records and ``render_png`` draws the
same records with matplotlib so the CSV and the figure never disagree.
"""

from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence

import numpy as np

from .polyhedron import LinearCut, LinearSystem

CSV_HEADER = ("layer", "id", "seq", "x", "y")
GRID = 121
TC_GRID = 41


def clip_polygon(poly: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon to {y : a.y <= b}."""
    out = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        fp, fq = a @ p - b, a @ q - b
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
    return np.array(out).reshape(-1, 2)


def box_polygon(box: np.ndarray) -> np.ndarray:
    (x0, x1), (y0, y1) = box
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)


def polyhedron_polygon(system: LinearSystem, box: np.ndarray) -> np.ndarray:
    poly = box_polygon(box)
    G, h = system.ge_rows()
    for g, hh in zip(G, h):
        if len(poly) == 0:
            break
        poly = clip_polygon(poly, -g, -hh)
    return poly


def cut_segment(a: np.ndarray, b: float, box: np.ndarray):
    """The piece of the line a.y = b inside the box, or None."""
    poly = box_polygon(box)
    pts = []
    for i in range(4):
        p, q = poly[i], poly[(i + 1) % 4]
        fp, fq = a @ p - b, a @ q - b
        if abs(fp) < 1e-12:
            pts.append(p)
        elif fp * fq < 0:
            t = fp / (fp - fq)
            pts.append(p + t * (q - p))
    if len(pts) < 2:
        return None
    pts = np.array(pts)
    # farthest pair, so corner duplicates collapse
    d = np.linalg.norm(pts[:, None] - pts[None], axis=2)
    i, j = np.unravel_index(np.argmax(d), d.shape)
    if d[i, j] < 1e-12:
        return None
    return np.array([pts[i], pts[j]])


def level_contours(fn, box: np.ndarray, level: float = 0.0, grid: int = GRID) -> list[np.ndarray]:
    """Polylines of {fn = level} over the box by marching squares."""
    import contourpy

    xs = np.linspace(box[0, 0], box[0, 1], grid)
    ys = np.linspace(box[1, 0], box[1, 1], grid)
    X, Y = np.meshgrid(xs, ys)
    Z = np.array([[fn(np.array([x, y])) for x in xs] for y in ys])
    gen = contourpy.contour_generator(X, Y, Z)
    return [np.asarray(seg) for seg in gen.lines(level) if len(seg) > 1]


def original_cut(cut: LinearCut, cone) -> tuple[np.ndarray, float]:
    """Original-space (a, b) with the cut read as one side of a.y = b."""
    if cut.space == "original":
        return cut.coef, cut.rhs
    L, l = cone.coord_map()
    return cut.coef @ L, cut.rhs - cut.coef @ l


def plot_rows(system: LinearSystem, body, box, cuts: Sequence[tuple[str, np.ndarray, float]], samples: np.ndarray,
              extra_regions: Iterable[tuple[str, list]] = ()) -> list[tuple]:
    box = np.asarray(box, dtype=float)
    rows = []
    poly = polyhedron_polygon(system, box)
    for s, p in enumerate(poly):
        rows.append(("P_boundary", 0, s, p[0], p[1]))
    for cid, line in enumerate(level_contours(body.level, box)):
        for s, p in enumerate(line):
            rows.append(("C_boundary", cid, s, p[0], p[1]))
    for layer, lines in extra_regions:
        for cid, line in enumerate(lines):
            for s, p in enumerate(line):
                rows.append((layer, cid, s, p[0], p[1]))
    for cid, (name, a, b) in enumerate(cuts):
        seg = cut_segment(np.asarray(a, dtype=float), float(b), box)
        if seg is None:
            continue
        for s, p in enumerate(seg):
            rows.append((f"cut:{name}", cid, s, p[0], p[1]))
    for s, p in enumerate(np.atleast_2d(samples)):
        if len(p):
            rows.append(("sample", 0, s, p[0], p[1]))
    return rows


def rows_to_csv(rows: Sequence[tuple]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for layer, cid, s, x, y in rows:
        w.writerow((layer, cid, s, f"{x:.10g}", f"{y:.10g}"))
    return buf.getvalue()


def render_png(rows: Sequence[tuple], box, path, title: str = "") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    box = np.asarray(box, dtype=float)
    groups: dict = {}
    for layer, cid, _, x, y in rows:
        groups.setdefault((layer, cid), []).append((x, y))
    fig, ax = plt.subplots(figsize=(5, 5))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    cut_i = 0
    for (layer, cid), pts in groups.items():
        pts = np.array(pts)
        if layer == "P_boundary":
            ax.fill(pts[:, 0], pts[:, 1], color="0.9", zorder=0, label="P")
        elif layer == "C_boundary":
            ax.plot(pts[:, 0], pts[:, 1], color="k", lw=1.2, label="boundary of C" if cid == 0 else None)
        elif layer == "sample":
            ax.scatter(pts[:, 0], pts[:, 1], s=2, color="0.4", zorder=1, label="P minus C")
        elif layer.startswith("cut:"):
            ax.plot(pts[:, 0], pts[:, 1], lw=1.5, ls="--", color=colors[cut_i % len(colors)], label=layer[4:])
            cut_i += 1
        else:
            ax.plot(pts[:, 0], pts[:, 1], lw=1.0, ls=":", color="tab:purple", label=layer if cid == 0 else None)
    ax.set_xlim(*box[0])
    ax.set_ylim(*box[1])
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    if title:
        ax.set_title(title, fontsize=9)
    ax.legend(fontsize=6, loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
