#!/usr/bin/env python3
"""Regenerates the bundled map fixtures in data/maps.

Each world starts solid and has free rectangles carved into it. Coordinates
are meters; the grid resolution is 0.1 m with the origin at (0, 0).
"""

import argparse
import pathlib

RES = 0.1


class World:
    def __init__(self, width, height):
        self.cols = round(width / RES)
        self.rows = round(height / RES)
        self.cells = [["#"] * self.cols for _ in range(self.rows)]

    def _fill(self, x0, y0, x1, y1, ch):
        c0, c1 = round(x0 / RES), round(x1 / RES)
        r0, r1 = round(y0 / RES), round(y1 / RES)
        for r in range(max(r0, 0), min(r1, self.rows)):
            for c in range(max(c0, 0), min(c1, self.cols)):
                self.cells[r][c] = ch

    def free(self, x0, y0, x1, y1):
        self._fill(x0, y0, x1, y1, ".")
        return self

    def wall(self, x0, y0, x1, y1):
        self._fill(x0, y0, x1, y1, "#")
        return self

    def room(self, x0, y0, x1, y1, door):
        """Free room plus a door rectangle joining it to a neighbouring space."""
        self.free(x0, y0, x1, y1)
        self.free(*door)
        return self

    def text(self):
        lines = ["resolution 0.1", "origin 0 0"]
        for r in reversed(range(self.rows)):
            lines.append("".join(self.cells[r]))
        return "\n".join(lines) + "\n"


def corridor():
    return World(32, 4).free(1, 1, 31, 3)


def corridor_gap():
    w = World(32, 7).free(1, 1, 31, 3)
    w.free(10, 3.2, 30, 6)
    w.free(15.5, 3, 18, 3.2)
    return w


def loop():
    # Two parallel hallways of different widths, joined at both ends and by a
    # middle passage, with rooms of assorted sizes.
    w = World(42, 26)
    w.free(2, 2, 40, 4).free(2, 19, 34, 21.5)
    w.free(2, 2, 4, 21.5).free(37.5, 2, 40, 16).free(30, 14, 40, 16).free(30, 14, 32.2, 21.5)
    w.free(15, 4, 17, 19)
    w.room(6, 5, 11, 9.5, (8, 4, 9.2, 5))
    w.room(20, 5, 28, 10.5, (21, 4, 22.2, 5))
    w.room(33, 5, 36.5, 8, (34, 4, 35.2, 5))
    w.room(5, 14.5, 12, 18, (10, 18, 11.2, 19))
    w.room(19, 12, 25, 18, (23, 18, 24.2, 19))
    w.room(8, 22.5, 20, 25, (12, 21.5, 13.2, 22.5))
    w.room(18, 6, 24, 11, (17, 8, 18, 9.2)).free(17, 8, 18, 9.2)
    return w


def office():
    # Central corridor with unevenly sized rooms and a cross corridor.
    w = World(40, 32)
    w.free(2, 14, 38, 16.5).free(18, 2, 20.5, 30)
    w.room(3, 9, 7, 13, (4, 13, 5.2, 14))
    w.room(8, 10, 15, 13, (13, 13, 14.2, 14))
    w.room(22, 8, 26, 13, (23, 13, 24.2, 14))
    w.room(27, 11, 37, 13, (33, 13, 34.2, 14))
    w.room(3, 17.5, 10, 21.5, (8, 16.5, 9.2, 17.5))
    w.room(11, 17.5, 16, 23, (12, 16.5, 13.2, 17.5))
    w.room(23, 17.5, 30, 20, (26, 16.5, 27.2, 17.5))
    w.room(31, 17.5, 37, 24, (32, 16.5, 33.2, 17.5))
    w.room(3, 24, 16, 29, (14, 23, 15.2, 24))
    w.room(22, 3, 37, 7, (20.5, 5, 22, 6.2))
    w.room(22, 25, 28, 30, (20.5, 27, 22, 28.2))
    return w


def wing():
    # Open hall feeding three long corridors.
    w = World(46, 32)
    w.free(2, 10, 14, 22)
    w.free(14, 15, 44, 17.2)
    w.free(6, 22, 8.2, 30).free(8.2, 27.8, 44, 30)
    w.free(6, 2, 8.2, 10).free(8.2, 2, 44, 4.2)
    w.free(41.8, 4.2, 44, 27.8)
    for x in (18, 26, 34):
        w.room(x, 19, x + 5, 25, (x + 2, 17.2, x + 3.2, 19))
        w.room(x, 7, x + 5, 13, (x + 2, 13, x + 3.2, 15))
    for cx, cy in ((5, 13), (11, 13), (5, 19), (11, 19)):
        w.wall(cx - 0.3, cy - 0.3, cx + 0.3, cy + 0.3)
    return w


def lattice():
    # Regular grid of corridors.
    w = World(34, 34)
    for v in (2, 11, 20, 29):
        w.free(v, 2, v + 2.2, 31.2).free(2, v, 31.2, v + 2.2)
    return w


def atrium():
    # Large rooms chained by short passages.
    w = World(40, 28)
    w.free(2, 2, 14, 12).free(18, 2, 38, 12).free(2, 16, 20, 26).free(24, 16, 38, 26)
    w.free(14, 6, 18, 7.5).free(7, 12, 8.5, 16).free(30, 12, 31.5, 16).free(20, 20, 24, 21.5)
    return w


MAPS = {
    "corridor": corridor,
    "corridor_gap": corridor_gap,
    "loop": loop,
    "office": office,
    "wing": wing,
    "lattice": lattice,
    "atrium": atrium,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "maps"))
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, build in MAPS.items():
        (out / f"{name}.map").write_text(build().text())
        print(out / f"{name}.map")


if __name__ == "__main__":
    main()
