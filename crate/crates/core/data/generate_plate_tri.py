"""Triangle-centroid clouds for the quarter plate with a circular hole.

Writes plate_tri_L{0..3}.txt next to this script in the node-cloud format
`id x y volume kind`. Each meshfree node is the centroid of a Delaunay
triangle and carries its area.

Vertices come from two equilateral lattices, one per side of the diagonal
y = x, oriented so a row of rhombi straddles each symmetry axis. The two
triangles of each rhombus have their centroid exactly on the axis; the
material node owns the half inside the quarter. Interior vertices are
jittered, the hole boundary is resolved by vertices on the circle, and the
triangulation extends past every edge to provide the collars: free surface
inside the hole, natural-bc elsewhere outside the quarter.

Usage: python3 generate_plate_tri.py [levels]
"""

import sys
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

A = 1.0
L = 5.0
SEED = 20
# triangle area over squared vertex spacing for equilateral triangles
AREA_FACTOR = np.sqrt(3.0) / 4.0
# widest horizon is (1.25 + 3) h; keep one more spacing of margin
COLLAR = 4.25 + 1.0


def axis_lattice(s, lo, hi, rng):
    """Equilateral lattice with vertical columns and a row on y = 0.

    Even columns hold y = j s, odd columns y = (j + 1/2) s. Vertices on the
    rows y = 0 and y = +-s/2 stay exact; the others are jittered.
    """
    e = s * np.sqrt(3.0) / 2.0
    cols = np.arange(np.floor((lo - A) / e) - 1, np.ceil((hi - A) / e) + 2)
    pts = []
    for k in cols:
        x = A + k * e
        off = 0.5 * s if int(k) % 2 else 0.0
        ys = np.arange(np.floor(lo / s) - 1, np.ceil(hi / s) + 2) * s + off
        for y in ys:
            pts.append((x, y))
    pts = np.array(pts)
    exact = np.abs(pts[:, 1]) <= 0.5 * s + 1e-12
    jitter = rng.uniform(-0.15 * s, 0.15 * s, size=pts.shape)
    jitter[exact] = 0.0
    return pts + jitter, exact


def vertices(h, rng):
    s = np.sqrt(h * h / AREA_FACTOR)
    w = COLLAR * h + 2.0 * s
    lo, hi = -w, L + w
    a_pts, a_exact = axis_lattice(s, lo, hi, rng)
    keep = a_pts[:, 1] < a_pts[:, 0] - 0.3 * s
    a_pts, a_exact = a_pts[keep], a_exact[keep]
    b_pts, b_exact = axis_lattice(s, lo, hi, rng)
    b_pts = b_pts[:, ::-1]
    keep = b_pts[:, 0] < b_pts[:, 1] - 0.3 * s
    b_pts, b_exact = b_pts[keep], b_exact[keep]
    d = np.arange(np.floor(lo / s), np.ceil(hi / s) + 1) * s / np.sqrt(2.0)
    seam = np.stack([d, d], axis=1)
    pts = np.vstack([a_pts, b_pts, seam])
    exact = np.concatenate([a_exact, b_exact, np.zeros(len(seam), bool)])
    # conform to the hole: vertices on the circle, none too close to it
    n_arc = int(np.ceil(2.0 * np.pi * A / s))
    t = 2.0 * np.pi * np.arange(n_arc) / n_arc
    circle = np.stack([A * np.cos(t), A * np.sin(t)], axis=1)
    r = np.hypot(pts[:, 0], pts[:, 1])
    near = (np.abs(r - A) < 0.45 * s) & ~exact
    pts = np.vstack([pts[~near], circle])
    # drop circle vertices that crowd an exact axis vertex
    _, idx = np.unique(np.round(pts / (1e-9 * s)), axis=0, return_index=True)
    pts = pts[np.sort(idx)]
    r = np.hypot(pts[:, 0], pts[:, 1])
    inside = (pts >= lo).all(axis=1) & (pts <= hi).all(axis=1) & (r > A - w)
    return pts[inside], s


def classify(c):
    """Node kind of a triangle with centroid c."""
    x, y = c
    r = np.hypot(x, y)
    if r < A:
        return "freesurface"
    if x < 0.0 or y < 0.0 or x > L or y > L:
        return "natural"
    return "bulk"


def cloud(h, rng):
    pts, s = vertices(h, rng)
    tri = Delaunay(pts)
    p = pts[tri.simplices]
    cen = p.mean(axis=1)
    area = 0.5 * np.abs(
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
    )
    reach = COLLAR * h
    rows = []
    for c, v, corners in zip(cen, area, p):
        # skip slivers along the convex hull
        if v < 1e-3 * s * s:
            continue
        x, y = c
        if x < -reach or y < -reach or x > L + reach or y > L + reach:
            continue
        if np.hypot(x, y) < A - reach:
            continue
        kind = classify(c)
        for k in (0, 1):
            lo_side = corners[:, k].min() < 0.0 < corners[:, k].max()
            if lo_side and np.hypot(x, y) >= A and -reach <= c[1 - k] <= L + reach:
                if c[k] != 0.0:
                    raise RuntimeError(f"axis-straddling triangle with centroid {c}")
                if kind == "bulk":
                    v = 0.5 * v
        rows.append((x, y, v, kind))
    return rows


def write(path, rows, h):
    bulk = [r[2] for r in rows if r[3] == "bulk"]
    with open(path, "w") as f:
        f.write(f"# quarter plate with hole, a = {A}, L = {L}, target h = {h}\n")
        f.write(f"# {len(rows)} nodes, {len(bulk)} bulk, h = {np.sqrt(np.mean(bulk)):.6f}\n")
        for i, (x, y, v, kind) in enumerate(rows):
            f.write(f"{i} {float(x)!r} {float(y)!r} {float(v)!r} {kind}\n")


def main():
    levels = int(sys.argv[1]) if len(sys.argv) > 1 else 4
    here = Path(__file__).resolve().parent
    for level in range(levels):
        h = 0.2 / 2**level
        rng = np.random.default_rng(SEED + level)
        rows = cloud(h, rng)
        write(here / f"plate_tri_L{level}.txt", rows, h)
        bulk = [r for r in rows if r[3] == "bulk"]
        print(f"L{level}: {len(rows)} nodes, {len(bulk)} bulk, area {sum(r[2] for r in bulk):.4f}")


if __name__ == "__main__":
    main()
