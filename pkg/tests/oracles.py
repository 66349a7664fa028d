"""Independent brute-force references the tests check the library against.

Everything here is deliberately naive: plain Python loops over lists, no
shared code with the implementation under test.
"""

from fractions import Fraction


def naive_window_cost(left_px, right_px, x, y, d, radius, method):
    """Double-loop window cost over plain nested lists."""
    total = 0
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            diff = left_px[y + dy][x + dx] - right_px[y + dy][x - d + dx]
            total += abs(diff) if method == "sad" else diff * diff
    return total


def naive_disparity(left_px, right_px, radius, max_disparity, method):
    """Quadruple-loop winner-takes-all reference.

    A pixel is valid only if the window fits in the left image and in the
    right image at every candidate disparity; ties keep the smallest d.
    Returns (disparities, valid) as nested lists.
    """
    h = len(left_px)
    w = len(left_px[0])
    disp = [[0] * w for _ in range(h)]
    valid = [[False] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            best_cost = None
            best_d = 0
            in_bounds = True
            for d in range(max_disparity + 1):
                if (
                    y - radius < 0
                    or y + radius >= h
                    or x - radius < 0
                    or x + radius >= w
                    or x - d - radius < 0
                    or x - d + radius >= w
                ):
                    in_bounds = False
                    break
                cost = naive_window_cost(left_px, right_px, x, y, d, radius, method)
                if best_cost is None or cost < best_cost:
                    best_cost = cost
                    best_d = d
            if in_bounds:
                disp[y][x] = best_d
                valid[y][x] = True
    return disp, valid


def naive_downscale(px, factor):
    """Block means with exact rational arithmetic, rounded half away from zero."""
    h = len(px)
    w = len(px[0])
    oh = (h + factor - 1) // factor
    ow = (w + factor - 1) // factor
    out = []
    for by in range(oh):
        row = []
        for bx in range(ow):
            vals = [
                px[y][x]
                for y in range(by * factor, min((by + 1) * factor, h))
                for x in range(bx * factor, min((bx + 1) * factor, w))
            ]
            mean = Fraction(sum(vals), len(vals))
            row.append(int(mean + Fraction(1, 2)) if mean >= 0 else None)
        out.append(row)
    return out


def naive_mean_abs_change(prev_disp, prev_valid, curr_disp, curr_valid):
    """Mean absolute disparity difference over commonly valid pixels."""
    total = 0
    count = 0
    for y in range(len(prev_disp)):
        for x in range(len(prev_disp[0])):
            if prev_valid[y][x] and curr_valid[y][x]:
                total += abs(prev_disp[y][x] - curr_disp[y][x])
                count += 1
    return total / count if count else 0.0


def all_simple_paths(adjacency, src, dst):
    """Every simple path between two nodes, by exhaustive DFS."""
    paths = []

    def walk(node, seen, path):
        if node == dst:
            paths.append(list(path))
            return
        for nxt in adjacency.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                path.append(nxt)
                walk(nxt, seen, path)
                path.pop()
                seen.remove(nxt)

    walk(src, {src}, [src])
    return paths


def count_rle_records(disp_rows, valid_rows, max_run=0xFFFF):
    """Number of run records a row-wise encoder must emit."""
    records = 0
    for drow, vrow in zip(disp_rows, valid_rows):
        x = 0
        while x < len(drow):
            key = (drow[x], vrow[x])
            run = 0
            while x < len(drow) and (drow[x], vrow[x]) == key:
                run += 1
                x += 1
            records += (run + max_run - 1) // max_run
    return records
