#!/usr/bin/env python3
"""Writes the shipped floorplans to data/plans/*.json.

Textures: 0 flat, 1 brick, 2 stripe, 3 noise, 4 door panel, 5 furniture grain.
"""
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parents[2] / "data" / "plans"
WALL_CYCLE = [1, 3, 2, 0, 3, 1, 2, 3]


class Plan:
    def __init__(self, name):
        self.name = name
        self.segments = []
        self.spawn = []
        self._cycle = 0

    def seg(self, a, b, material="wall", tex=None):
        if tex is None:
            tex = {"wall": 1, "glass": 0, "furniture": 5}[material]
        self.segments.append({"a": list(a), "b": list(b), "material": material, "texture_id": tex})

    def wall(self, a, b, piece=4.0, tex=None):
        """Straight wall split into pieces of about `piece` meters with cycling textures."""
        (x0, y0), (x1, y1) = a, b
        length = ((x1 - x0) ** 2 + (y1 - y0) ** 2) ** 0.5
        n = max(1, round(length / piece))
        for i in range(n):
            t0, t1 = i / n, (i + 1) / n
            t = tex if tex is not None else WALL_CYCLE[self._cycle % len(WALL_CYCLE)]
            self._cycle += 1
            self.seg((x0 + t0 * (x1 - x0), y0 + t0 * (y1 - y0)), (x0 + t1 * (x1 - x0), y0 + t1 * (y1 - y0)), "wall", t)

    def glass(self, a, b, panel=1.2):
        """Glass wall split into framed panels of about `panel` meters."""
        (x0, y0), (x1, y1) = a, b
        length = ((x1 - x0) ** 2 + (y1 - y0) ** 2) ** 0.5
        n = max(1, round(length / panel))
        for i in range(n):
            t0, t1 = i / n, (i + 1) / n
            self.seg((x0 + t0 * (x1 - x0), y0 + t0 * (y1 - y0)), (x0 + t1 * (x1 - x0), y0 + t1 * (y1 - y0)), "glass", 0)

    def box(self, x0, y0, x1, y1, material="furniture", tex=5):
        pts = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        for i in range(4):
            self.seg(pts[i], pts[(i + 1) % 4], material, tex)

    def polyline(self, pts, closed=False, piece=4.0, tex=None):
        for i in range(len(pts) - (0 if closed else 1)):
            self.wall(pts[i], pts[(i + 1) % len(pts)], piece, tex)

    def spawn_region(self, x0, y0, x1, y1):
        self.spawn.append([x0, y0, x1, y1])

    def write(self):
        doc = {"format_version": 1, "name": self.name, "segments": self.segments, "spawn_regions": self.spawn}
        (OUT / f"{self.name}.json").write_text(json.dumps(doc, indent=1) + "\n")


def hallway(name, chairs):
    p = Plan(name)
    # 2 m x 40 m corridor, dead ends on both sides.
    p.wall((0, 0), (40, 0))
    p.wall((40, 2), (0, 2))
    p.wall((0, 0), (0, 2), tex=4)
    p.wall((40, 0), (40, 2), tex=4)
    if chairs:
        # (x0, y0, x1, y1); paired chairs leave gaps of 0.95 m and 0.92 m.
        for c in [(7, 0, 7.5, 0.55), (12, 1.45, 12.5, 2), (17, 0, 17.5, 0.5), (17, 1.45, 17.5, 2),
                  (23, 1.5, 23.5, 2), (28, 0, 28.5, 0.55), (33, 0, 33.5, 0.5), (33, 1.42, 33.5, 2)]:
            p.box(*c)
        for r in [(13, 0.75, 16.5, 1.25), (19, 0.75, 22, 1.25), (24.5, 0.75, 27, 1.25)]:
            p.spawn_region(*r)
    else:
        p.spawn_region(12, 0.7, 28, 1.3)
    p.write()


def glass_door():
    p = Plan("glass_door")
    # Ring corridor 2.5 m wide around a block; every corridor runs into a
    # glass panel at its far corner with a closed room behind.
    W, H, w = 16.0, 12.0, 2.5
    p.box(w, w, W - w, H - w, "wall", 1)
    # outer walls with glass at the four corridor ends
    p.wall((w, 0), (W, 0))              # south, east of the SW glass
    p.wall((W, w), (W, H))              # east, north of the SE glass
    p.wall((W - w, H), (0, H))          # north, west of the NE glass
    p.wall((0, H - w), (0, 0))          # west, south of the NW glass
    p.glass((W, 0), (W, w))             # bottom corridor runs east into this
    p.glass((W - w, H), (W, H))         # right corridor runs north into this
    p.glass((0, H - w), (0, H))         # top corridor runs west into this
    p.glass((0, 0), (w, 0))             # left corridor runs south into this
    # rooms behind the glass
    p.polyline([(W, 0), (W, -2), (W + 6, -2), (W + 6, w + 2), (W, w + 2), (W, w)], tex=0)
    p.polyline([(W - w, H), (W - w - 2, H), (W - w - 2, H + 6), (W + 2, H + 6), (W + 2, H), (W, H)], tex=2)
    p.polyline([(0, H - w), (-6, H - w - 2), (-6, H + 2), (0, H + 2), (0, H)], tex=3)
    p.polyline([(0, 0), (-2, 0), (-2, -6), (w + 2, -6), (w + 2, 0), (w, 0)], tex=1)
    for r in [(4, 0.9, 12, 1.6), (W - 1.6, 4, W - 0.9, 8), (4, H - 1.6, 12, H - 0.9), (0.9, 4, 1.6, 8)]:
        p.spawn_region(*r)
    p.write()


def office_floor():
    p = Plan("office_floor")
    # 2.2 m corridors: an outer loop and a cross corridor, offices behind
    # walls with glass fronts in places.
    W, H, w = 24.0, 16.0, 2.2
    p.polyline([(0, 0), (W, 0), (W, H), (0, H)], closed=True, piece=3.0)
    cx0, cx1 = W / 2 - w / 2, W / 2 + w / 2
    # block A: [w, cx0] x [w, H - w]; block B: [cx1, W - w] x [w, H - w]
    for (x0, x1) in [(w, cx0), (cx1, W - w)]:
        y0, y1 = w, H - w
        # south face: office doors
        p.wall((x0, y0), (x0 + 2.5, y0), tex=4)
        p.wall((x0 + 2.5, y0), (x1, y0), piece=3.0)
        # north face
        p.wall((x1, y1), (x1 - 3.0, y1), tex=0)
        p.glass((x1 - 3.0, y1), (x1 - 6.0, y1))
        p.wall((x1 - 6.0, y1), (x0, y1), piece=3.0)
        # side faces
        p.wall((x0, y1), (x0, y0), piece=3.0)
        p.wall((x1, y0), (x1, y1), piece=3.0)
        # office partitions inside the block
        p.wall((x0, (y0 + y1) / 2), (x1, (y0 + y1) / 2), tex=0)
    # furniture in corridor nooks: a printer and a bin
    p.box(W - 0.6, 6.0, W, 6.8)
    p.box(cx0 + 0.05, 7.6, cx0 + 0.45, 8.0)
    for r in [(2.5, 0.7, 8, 1.5), (14, 0.7, 21, 1.5), (0.7, 3, 1.5, 13), (cx0 + 0.7, 2.5, cx1 - 0.7, 6.5),
              (W - 1.5, 8.5, W - 0.7, 13), (3, H - 1.5, 9, H - 0.7),
              (cx0 + 0.5, 0.5, cx1 - 0.5, w - 0.5), (0.5, 0.5, w - 0.5, w - 0.5), (W - w + 0.5, H - w + 0.5, W - 0.5, H - 0.5)]:
        p.spawn_region(*r)
    p.write()


def entrance_atrium():
    p = Plan("entrance_atrium")
    # 5 m entry hall flanked by glass walls, opening into a cluttered atrium.
    lo, hi = -0.5, 4.5
    p.wall((0, lo), (0, hi), tex=4)
    p.wall((0, lo), (2, lo))
    p.glass((2, lo), (9, lo))
    p.wall((9, lo), (10, lo), tex=0)
    p.wall((0, hi), (2, hi))
    p.glass((2, hi), (9, hi))
    p.wall((9, hi), (10, hi), tex=0)
    # shallow planters behind the glass
    p.polyline([(0, lo), (0, lo - 2.5), (10, lo - 2.5), (10, -6)], tex=3)
    p.polyline([(0, hi), (0, hi + 2.5), (10, hi + 2.5), (10, 10)], tex=2)
    # atrium [10, 24] x [-6, 10]
    p.wall((10, lo), (10, -6), tex=1)
    p.wall((10, -6), (24, -6), piece=3.5)
    p.wall((24, -6), (24, 0))
    p.glass((24, 0), (24, 6))  # curtain wall to the street
    p.wall((24, 6), (24, 10))
    p.wall((24, 10), (10, 10), piece=3.5)
    p.wall((10, 10), (10, hi), tex=1)
    p.polyline([(24, 0), (30, 0), (30, 6), (24, 6)], tex=0)
    # tables (1.2 x 0.8) with chairs (0.45 x 0.45)
    tables = [(13, -3.5), (13, 6.5), (17, -1), (17, 5), (21, -3.5), (21, 7.5), (20.5, 2)]
    for (tx, ty) in tables:
        p.box(tx - 0.6, ty - 0.4, tx + 0.6, ty + 0.4)
        p.box(tx - 0.25, ty + 0.55, tx + 0.2, ty + 1.0)
        p.box(tx - 0.2, ty - 1.0, tx + 0.25, ty - 0.55)
    p.box(14.5, 1.6, 15.1, 2.2, "wall", 2)  # pillar
    for r in [(1, 0.6, 8, 3.4), (11, 0.5, 13.5, 3.5), (15.5, -5.3, 19, -3.5), (15.5, 8.5, 19.5, 9.5)]:
        p.spawn_region(*r)
    p.write()


def wean():
    p = Plan("wean")
    # Long 3 m corridors joined at right angles around a block, glass exit
    # doors at two corridor ends, benches and pillars along the walls.
    W, H, w = 40.0, 24.0, 3.0
    p.box(w, w, W - w, H - w, "wall", 1)
    p.wall((0, 0), (W, 0), piece=5.0)
    p.wall((W, 0), (W, H - w), piece=5.0)
    p.glass((W, H - w), (W, H))  # top corridor's east end: exit door
    p.wall((W, H), (w, H), piece=5.0)
    p.glass((0, H), (w, H))      # left corridor's north end: exit door
    p.wall((0, H), (0, 0), piece=5.0)
    p.polyline([(W, H - w), (W + 5, H - w - 1), (W + 5, H + 1), (W, H + 1), (W, H)], tex=0)
    p.polyline([(0, H), (-1, H), (-1, H + 5), (w + 1, H + 5), (w + 1, H), (w, H)], tex=3)
    # benches against the outer walls, pillars on the block side
    for b in [(10, 0, 12, 0.45), (25, 0, 27, 0.45), (W - 0.45, 8, W, 10), (16, H - 0.45, 18, H),
              (0, 12, 0.45, 14)]:
        p.box(*b)
    for (x, y) in [(18, w), (30, w), (W - w, 14), (22, H - w), (w, 9)]:
        p.box(x - 0.2, y - 0.2 if y == w else y - 0.2, x + 0.2, y + 0.2, "wall", 0)
    for r in [(5, 1.1, 9, 1.9), (20, 1.1, 24, 1.9), (W - 1.9, 12, W - 1.1, 17), (25, H - 1.9, 31, H - 1.1),
              (1.1, 15, 1.9, 19), (0.8, 0.8, 2.2, 2.2), (W - 2.2, 0.8, W - 0.8, 2.2)]:
        p.spawn_region(*r)
    p.write()


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    hallway("hallway", chairs=False)
    hallway("hallway_chairs", chairs=True)
    glass_door()
    office_floor()
    entrance_atrium()
    wean()
