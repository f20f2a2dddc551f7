"""Quadriculated disks: parsing, validation, and cell/adjacency structure.

A disk is a finite union of unit grid squares that is edge-connected, has no
holes, and carries the fixed checkerboard coloring in which a cell (x, y) is
black exactly when x + y is odd.  All balanced such regions are accepted; the
rest of the engine builds on the cell ordering and adjacency exposed here.

Text format: '#' marks a cell, '.' or ' ' marks empty space, one text row per
grid row.  The first text line is the row y = 0 and y grows downward; parsed
disks are translated so that min x = min y = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import Disconnected, Empty, InvalidInput, NotSimplyConnected, Unbalanced


@dataclass(frozen=True, order=True)
class Cell:
    x: int
    y: int

    @property
    def is_black(self) -> bool:
        return (self.x + self.y) % 2 == 1

    @property
    def color(self) -> str:
        return "black" if self.is_black else "white"


class Disk:
    """Immutable validated region.

    Cells are stored sorted by (x, y); all other modules address cells by
    their index in that order.  `neighbors[i]` lists the indices of the
    edge-adjacent cells of cell i, and `edges` lists each adjacent pair once
    as (i, j) with i < j.
    """

    def __init__(self, coords):
        coords = sorted(set((int(x), int(y)) for x, y in coords))
        if not coords:
            raise Empty("region has no cells")
        dx = min(x for x, _ in coords)
        dy = min(y for _, y in coords)
        coords = [(x - dx, y - dy) for x, y in coords]

        self.cells: tuple[Cell, ...] = tuple(Cell(x, y) for x, y in coords)
        self.n_cells: int = len(coords)
        self.index: dict[tuple[int, int], int] = {c: i for i, c in enumerate(coords)}

        nbrs = []
        edges = []
        for i, (x, y) in enumerate(coords):
            adj = []
            for xx, yy in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                j = self.index.get((xx, yy))
                if j is not None:
                    adj.append(j)
                    if i < j:
                        edges.append((i, j))
            nbrs.append(tuple(sorted(adj)))
        self.neighbors: tuple[tuple[int, ...], ...] = tuple(nbrs)
        self.edges: tuple[tuple[int, int], ...] = tuple(edges)

        self.is_black: tuple[bool, ...] = tuple(c.is_black for c in self.cells)
        self.n_black: int = sum(self.is_black)
        self.n_white: int = self.n_cells - self.n_black
        self.width: int = 1 + max(x for x, _ in coords)
        self.height: int = 1 + max(y for _, y in coords)

        self._validate()
        self.nontrivial: bool = self.n_cells >= 6 and any(
            len(a) >= 3 for a in self.neighbors
        )

    def _validate(self):
        # connectivity: BFS over cell adjacency
        seen = {0}
        queue = [0]
        while queue:
            i = queue.pop()
            for j in self.neighbors[i]:
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        if len(seen) != self.n_cells:
            raise Disconnected(
                f"region splits into pieces ({len(seen)} of {self.n_cells} reachable)"
            )

        # no holes: Euler characteristic V - E + F of the square complex is 1
        # for a disk, 1 - (number of holes) otherwise.
        verts = set()
        edges = set()
        for c in self.cells:
            x, y = c.x, c.y
            verts.update(((x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)))
            edges.update((
                ((x, y), (x + 1, y)),
                ((x, y + 1), (x + 1, y + 1)),
                ((x, y), (x, y + 1)),
                ((x + 1, y), (x + 1, y + 1)),
            ))
        chi = len(verts) - len(edges) + self.n_cells
        if chi != 1:
            raise NotSimplyConnected(f"Euler characteristic {chi} != 1")

        if self.n_white != self.n_black:
            raise Unbalanced(f"{self.n_white} white vs {self.n_black} black cells")

    def cell(self, i: int) -> Cell:
        return self.cells[i]

    def coords(self) -> list[tuple[int, int]]:
        return [(c.x, c.y) for c in self.cells]

    def __len__(self):
        return self.n_cells

    def __eq__(self, other):
        return isinstance(other, Disk) and self.coords() == other.coords()

    def __hash__(self):
        return hash(tuple(self.coords()))

    def __repr__(self):
        return f"Disk({self.n_cells} cells, {self.width}x{self.height} box)"


def parse_disk(text: str) -> Disk:
    """Parse an ASCII grid ('#' = cell, '.'/' ' = empty) into a validated Disk."""
    coords = []
    for y, line in enumerate(text.splitlines()):
        for x, ch in enumerate(line.rstrip("\n")):
            if ch == "#":
                coords.append((x, y))
            elif ch not in ". \t":
                raise InvalidInput(f"unexpected character {ch!r} in region text")
    return Disk(coords)


def render_disk(d: Disk) -> str:
    """Canonical ASCII form; parse_disk(render_disk(d)) == d."""
    grid = [["."] * d.width for _ in range(d.height)]
    for c in d.cells:
        grid[c.y][c.x] = "#"
    return "\n".join("".join(row) for row in grid) + "\n"


def reflect_disk(d: Disk) -> Disk:
    """Mirror image across a vertical axis; colors re-derived from parity."""
    w = d.width - 1
    return Disk((w - c.x, c.y) for c in d.cells)


def rectangle(nx: int, ny: int) -> Disk:
    """Convenience constructor for an nx-wide, ny-tall rectangle."""
    return Disk((x, y) for x in range(nx) for y in range(ny))
