"""Crossbar addressability of defect patterns for lattice surgery.

Driving row set ``R`` and column set ``C`` of one crossbar deactivates every
data qubit in ``R x C``. With ``x`` crossbars the deactivated set is the union
of ``x`` such products, so asking whether a pattern is realizable is asking
whether its bipartite row/column graph is an exact union of ``x`` bicliques.
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Iterable
from dataclasses import dataclass

Cell = tuple[int, int]
Grid = tuple[int, int]
ORACLE_MAX_GRID = 4
ORACLE_MAX_X = 3


class OracleSizeError(ValueError):
    """Grid or crossbar count too large for exhaustive enumeration."""


@dataclass(frozen=True)
class DefectPattern:
    cells: frozenset[Cell]

    @classmethod
    def of(cls, cells: Iterable[Cell], grid: Grid | None = None) -> DefectPattern:
        p = cls(frozenset((int(r), int(c)) for r, c in cells))
        if grid is not None:
            p.check(grid)
        return p

    def check(self, grid: Grid) -> None:
        rows, cols = grid
        for r, c in self.cells:
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError(f"cell {(r, c)} outside the {rows}x{cols} data-qubit grid")

    def __len__(self) -> int:
        return len(self.cells)

    def to_json(self) -> list[list[int]]:
        return [list(c) for c in sorted(self.cells)]


@dataclass(frozen=True)
class CrossbarAssignment:
    """Per-crossbar (rows, cols); unused crossbars have both sets empty."""

    crossbars: tuple[tuple[frozenset[int], frozenset[int]], ...]

    def to_json(self) -> list[dict]:
        return [{"rows": sorted(r), "cols": sorted(c)} for r, c in self.crossbars]

    @classmethod
    def from_json(cls, obj: list[dict]) -> CrossbarAssignment:
        return cls(tuple((frozenset(e["rows"]), frozenset(e["cols"])) for e in obj))


def crossbar_activation(assignment: CrossbarAssignment, grid: Grid | None = None) -> DefectPattern:
    cells = set()
    for rows, cols in assignment.crossbars:
        if grid is not None:
            if any(not 0 <= r < grid[0] for r in rows) or any(not 0 <= c < grid[1] for c in cols):
                raise ValueError(f"crossbar lines outside the {grid[0]}x{grid[1]} grid")
        cells.update(itertools.product(rows, cols))
    return DefectPattern(frozenset(cells))


Rect = tuple[tuple[int, ...], tuple[int, ...]]


def maximal_rectangles(allowed: frozenset[Cell]) -> list[Rect]:
    """All maximal products ``R x C`` contained in ``allowed``, sorted.

    Column sets of maximal rectangles are exactly the nonempty intersections
    of row neighbourhoods, so closing the neighbourhoods under intersection
    enumerates them.
    """
    nbr: dict[int, frozenset[int]] = {}
    for r, c in allowed:
        nbr[r] = nbr.get(r, frozenset()) | {c}
    closed: set[frozenset[int]] = set()
    for cols in nbr.values():
        new = {cols} | {s & cols for s in closed if s & cols}
        closed |= new
    rects = []
    for cols in closed:
        rows = tuple(sorted(r for r, n in nbr.items() if cols <= n))
        rects.append((rows, tuple(sorted(cols))))
    return sorted(rects)


def _assignment(rects: list[Rect], x: int) -> CrossbarAssignment:
    parts = [(frozenset(r), frozenset(c)) for r, c in rects]
    parts += [(frozenset(), frozenset())] * (x - len(parts))
    return CrossbarAssignment(tuple(parts))


def realizable(
    pattern: DefectPattern, x: int, grid: Grid, protected: Iterable[Cell] | None = None
) -> CrossbarAssignment | None:
    """Find at most ``x`` products whose union is ``pattern``, or return None.

    By default activation must be exact. Passing ``protected`` switches to the
    relaxed mode: extra activations are tolerated anywhere except on the
    protected cells (which must not intersect the pattern).

    Branches on the lexicographically first uncovered cell and tries the
    maximal rectangles containing it in sorted order, so the first solution
    found is deterministic.
    """
    if x < 1:
        raise ValueError("x must be >= 1")
    pattern.check(grid)
    target = pattern.cells
    if protected is None:
        allowed = target
    else:
        prot = frozenset(protected)
        if prot & target:
            raise ValueError("protected cells overlap the defect pattern")
        allowed = frozenset(itertools.product(range(grid[0]), range(grid[1]))) - prot
    if not target:
        return _assignment([], x)
    rects = maximal_rectangles(allowed)
    covers = [frozenset(itertools.product(r, c)) for r, c in rects]
    by_cell: dict[Cell, list[int]] = {}
    for i, cov in enumerate(covers):
        for cell in cov & target:
            by_cell.setdefault(cell, []).append(i)

    def search(uncovered: frozenset[Cell], chosen: list[int]) -> list[int] | None:
        if not uncovered:
            return chosen
        if len(chosen) == x:
            return None
        first = min(uncovered)
        for i in by_cell.get(first, ()):
            found = search(uncovered - covers[i], chosen + [i])
            if found is not None:
                return found
        return None

    found = search(target, [])
    if found is None:
        return None
    return _assignment([rects[i] for i in found], x)


def realizable_oracle(
    pattern: DefectPattern, x: int, grid: Grid, protected: Iterable[Cell] | None = None
) -> CrossbarAssignment | None:
    """Exhaustive ground truth for small grids.

    Enumerates every product of a nonempty row subset and a nonempty column
    subset, keeps those that avoid forbidden cells, and tries every
    combination of up to ``x`` of them.
    """
    rows, cols = grid
    if rows > ORACLE_MAX_GRID or cols > ORACLE_MAX_GRID or x > ORACLE_MAX_X:
        raise OracleSizeError(f"oracle supports grids up to {ORACLE_MAX_GRID}x{ORACLE_MAX_GRID} and x <= {ORACLE_MAX_X}")
    pattern.check(grid)
    target = pattern.cells
    if protected is None:
        forbidden = frozenset(itertools.product(range(rows), range(cols))) - target
    else:
        forbidden = frozenset(protected)
    if not target:
        return _assignment([], x)

    def subsets(n: int):
        for k in range(1, n + 1):
            yield from itertools.combinations(range(n), k)

    usable = []
    for rs in subsets(rows):
        for cs in subsets(cols):
            cov = frozenset(itertools.product(rs, cs))
            if not cov & forbidden:
                usable.append(((rs, cs), cov))
    for k in range(1, x + 1):
        for combo in itertools.combinations(usable, k):
            union = frozenset().union(*(cov for _, cov in combo))
            if target <= union:
                return _assignment([rect for rect, _ in combo], x)
    return None


def one_defect_per_crossbar(pattern: DefectPattern, x: int) -> bool:
    """The narrow reading where each crossbar addresses a single qubit."""
    return len(pattern) <= x


def load_pattern(text: str, grid: Grid | None = None) -> DefectPattern:
    data = json.loads(text)
    if not isinstance(data, list) or any(not isinstance(c, list) or len(c) != 2 for c in data):
        raise ValueError("pattern must be a JSON list of [row, col] pairs")
    return DefectPattern.of([tuple(c) for c in data], grid)
