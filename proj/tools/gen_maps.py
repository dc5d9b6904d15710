#!/usr/bin/env python3
"""Regenerates the bundled warehouse layouts under assets/maps/.

All layouts share the same shelving pattern: one-cell aisles of storage
endpoints (E) separated by two-cell shelf blocks (@), an open floor below the
shelving and a row of loading endpoints (L) along the bottom edge.
"""
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "assets" / "maps"


def shelving_row(width, aisle_first, aisle_last, fill):
    row = []
    for x in range(width):
        if aisle_first <= x <= aisle_last and (x - aisle_first) % 3 == 0:
            row.append("E")
        else:
            row.append(fill(x))
    return "".join(row)


def floor_rows(width, rows, loading_first, loading_last):
    out = ["." * width for _ in range(rows - 1)]
    out.append("".join("L" if loading_first <= x <= loading_last and x % 2 == 0 else "."
                       for x in range(width)))
    return out


def restricted(width=50, height=27, floor=7):
    shelf = height - floor
    aisle_last = width - 5
    rows = ["@" * width]
    rows += [shelving_row(width, 3, aisle_last, lambda x: "@") for _ in range(shelf - 1)]
    rows += floor_rows(width, floor, 4, width - 6)
    return rows


def open_top(width=50, height=27, floor=7):
    shelf = height - floor
    aisle_last = width - 5
    rows = ["." * width, "." * width]
    rows += [shelving_row(width, 3, aisle_last, lambda x: "@") for _ in range(shelf - 2)]
    rows += floor_rows(width, floor, 4, width - 6)
    return rows


def open_grid(width=50, height=27, floor=7):
    shelf = height - floor
    aisle_last = width - 5
    side = lambda x: "." if x < 2 or x > aisle_last + 1 else "@"
    rows = ["." * width]
    for y in range(1, shelf):
        rows.append("." * width if y % 6 == 0 else shelving_row(width, 3, aisle_last, side))
    rows += floor_rows(width, floor, 4, width - 6)
    return rows


def write(name, rows):
    text = f"height {len(rows)}\nwidth {len(rows[0])}\nmap\n" + "\n".join(rows) + "\n"
    (OUT / f"{name}.map").write_text(text)


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    write("restricted", restricted())
    write("open_top", open_top())
    write("open", open_grid())
    write("restricted_large", restricted(width=100, height=61, floor=9))
