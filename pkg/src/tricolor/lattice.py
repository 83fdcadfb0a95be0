"""Triangular color-code patches on the honeycomb lattice.

The patch is a distance-d triangle of hexagonal plaquettes with three colored
boundaries.  Data qubits sit on lattice vertices; every face carries one
X-type and one Z-type stabilizer over the same support (the code is CSS and
self-dual) plus a single auxiliary qubit used for syndrome extraction.

Geometry convention: integer coordinates (x, y) with y growing downward.
Every face is a "vertical brick" anchored at (A, B) with A + B even,
occupying columns A..A+1 and rows B..B+2.  Its six vertex positions are
numbered clockwise starting from the top-left corner:

        slot 0 -- slot 1
        slot 5    slot 2
        slot 4 -- slot 3

Boundary faces keep 4 of those 6 positions.  Face colors cycle with the
anchor row; the red boundary is the left staircase of the triangle and the
logical representatives are supported on it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Color",
    "FaceKind",
    "Face",
    "Patch",
    "build_patch",
    "min_logical_weight",
    "syndrome_parity_bfs",
    "fault_signature",
    "patch_to_text",
]


class Color(enum.IntEnum):
    RED = 0
    GREEN = 1
    BLUE = 2

    @property
    def letter(self) -> str:
        return self.name[0]

    @classmethod
    def from_letter(cls, s: str) -> "Color":
        for c in cls:
            if s.upper() in (c.letter, c.name):
                return c
        raise ValueError(f"not a color: {s!r}")


class FaceKind(enum.Enum):
    BULK = "bulk"
    TRAPEZOID = "trapezoid"
    CORNER = "corner"


# Clockwise offsets of the six slot positions relative to the face anchor.
_SLOT_OFFSETS = ((0, 0), (1, 0), (1, 1), (1, 2), (0, 2), (0, 1))


@dataclass(frozen=True)
class Face:
    """One plaquette: a stabilizer support plus its auxiliary qubit."""

    id: int
    color: Color
    aux_qubit: int
    slots: tuple  # length 6, data-qubit id or None at each clockwise position
    kind: FaceKind
    anchor: tuple  # (A, B) of the enclosing brick

    @property
    def data_slots(self) -> tuple:
        """Surviving data qubits in clockwise slot order (length 6 or 4)."""
        return tuple(q for q in self.slots if q is not None)

    @property
    def slot_positions(self) -> tuple:
        """Slot indices (0..5) that survive, parallel to ``data_slots``."""
        return tuple(i for i, q in enumerate(self.slots) if q is not None)

    @property
    def weight(self) -> int:
        return len(self.data_slots)

    def lattice_edge_pairs(self) -> set:
        """Unordered qubit pairs of this face that are honeycomb edges.

        Consecutive surviving slot positions are edges; pairs that wrap
        across removed positions (the trapezoid long side) are not.
        """
        edges = set()
        for i in range(6):
            a, b = self.slots[i], self.slots[(i + 1) % 6]
            if a is not None and b is not None:
                edges.add(frozenset((a, b)))
        return edges


class Patch:
    """Immutable distance-d triangular color-code patch."""

    def __init__(self, distance, data_coords, faces, edges, boundaries):
        self.distance = distance
        self.data_coords = data_coords  # qubit id -> (x, y)
        self.data_qubits = sorted(data_coords)
        self.faces = faces
        self.edges = edges  # list of (frozenset{a, b}, Color)
        self.boundaries = boundaries  # Color -> ordered tuple of qubit ids
        self.num_data = len(data_coords)
        self.num_faces = len(faces)
        self.num_qubits = self.num_data + self.num_faces

        self.qubit_faces = {q: [] for q in self.data_qubits}
        for f in faces:
            for q in f.data_slots:
                self.qubit_faces[q].append(f.id)

        self.logical_z_support = frozenset(boundaries[Color.RED])
        self.logical_x_support = frozenset(boundaries[Color.RED])

    @property
    def aux_qubits(self):
        return tuple(f.aux_qubit for f in self.faces)

    def aux_coord(self, face: Face) -> tuple:
        ax, ay = face.anchor
        return (ax + 0.5, ay + 1.0)

    def syndrome_of(self, qubits) -> int:
        """Bitmask over faces flipped by an X error on ``qubits``."""
        mask = 0
        for q in qubits:
            for fid in self.qubit_faces[q]:
                mask ^= 1 << fid
        return mask

    def logical_parity_of(self, qubits) -> int:
        return len(set(qubits) & self.logical_z_support) & 1


def _row_lengths(d: int) -> list:
    if d == 3:
        return [3, 2, 1, 1]
    return [d, d - 1, d - 2] + _row_lengths(d - 2)


def _row_shift(r: int) -> int:
    return (r + 2) // 3


def build_patch(distance: int) -> Patch:
    """Construct the distance-``distance`` triangular patch.

    Yields (3d^2 + 1)/4 data qubits and (n - 1)/2 faces; every face has
    weight 6 (bulk) or 4 (boundary trapezoids and the three corners).
    """
    if distance < 3 or distance % 2 == 0:
        raise ValueError("distance must be odd and at least 3")

    rows = _row_lengths(distance)
    coord_of = {}  # (x, y) -> qubit id
    data_coords = {}
    qid = 0
    for r, length in enumerate(rows):
        for c in range(length):
            xy = (c + _row_shift(r), r)
            coord_of[xy] = qid
            data_coords[qid] = xy
            qid += 1

    num_data = qid
    faces = []
    for r, length in enumerate(rows):
        shift = _row_shift(r)
        if r % 3 == 0:
            n_max = (length - 2) // 2
        else:
            n_max = (length - 1) // 2
        for n in range(max(n_max + 1, 0)):
            if r % 3 == 2:
                anchor_a = 2 * n + shift
            elif r % 3 == 1:
                anchor_a = 2 * n - 1 + shift
            else:
                anchor_a = 2 * n + 1 + shift
            anchor = (anchor_a, r - 1)
            slots = tuple(
                coord_of.get((anchor_a + dx, r - 1 + dy)) for dx, dy in _SLOT_OFFSETS
            )
            present = [q for q in slots if q is not None]
            if len(present) < 3:
                continue
            fid = len(faces)
            faces.append(
                Face(
                    id=fid,
                    color=Color(r % 3),
                    aux_qubit=num_data + fid,
                    slots=slots,
                    kind=FaceKind.BULK,  # fixed up below
                    anchor=anchor,
                )
            )

    for f in faces:
        if f.weight not in (4, 6):
            raise AssertionError(f"face {f.id} has weight {f.weight}")

    # Boundary of color c = data qubits not covered by any c-colored face.
    colors_at = {q: set() for q in data_coords}
    for f in faces:
        for q in f.data_slots:
            colors_at[q].add(f.color)
    boundaries = {}
    for c in Color:
        members = [q for q in data_coords if c not in colors_at[q]]
        members.sort(key=lambda q: (data_coords[q][1], data_coords[q][0]))
        boundaries[c] = tuple(members)

    # Corner faces touch two boundaries; other weight-4 faces are trapezoids.
    boundary_colors_of_face = {}
    for f in faces:
        touched = {
            c for c in Color if set(f.data_slots) & set(boundaries[c])
        }
        boundary_colors_of_face[f.id] = touched
    fixed = []
    for f in faces:
        touched = boundary_colors_of_face[f.id]
        if f.weight == 6:
            kind = FaceKind.BULK
        elif len(touched) >= 2:
            kind = FaceKind.CORNER
        else:
            kind = FaceKind.TRAPEZOID
        fixed.append(
            Face(f.id, f.color, f.aux_qubit, f.slots, kind, f.anchor)
        )
    faces = fixed

    # Edges, colored by the unique color absent from both flanking faces:
    # horizontal bond at row y -> y mod 3, vertical bond below row y -> y+2.
    edge_map = {}
    for f in faces:
        for pair in f.lattice_edge_pairs():
            a, b = sorted(pair)
            (xa, ya), (xb, yb) = data_coords[a], data_coords[b]
            if ya == yb:
                color = Color(ya % 3)
            else:
                color = Color((min(ya, yb) + 2) % 3)
            edge_map[frozenset((a, b))] = color
    edges = sorted(edge_map.items(), key=lambda kv: sorted(kv[0]))
    edges = [(pair, color) for pair, color in edges]

    return Patch(distance, data_coords, faces, edges, boundaries)


def fault_signature(patch: Patch, qubits) -> int:
    """Combined (syndrome, logical-parity) state for an X error on ``qubits``.

    Bits 0..f-1 hold the Z-stabilizer syndrome, bit f the logical-Z parity.
    """
    return patch.syndrome_of(qubits) | (
        patch.logical_parity_of(qubits) << patch.num_faces
    )


def syndrome_parity_bfs(signatures, num_bits: int, with_parents: bool = False):
    """Breadth-first search over the (syndrome, parity) group.

    Each generator costs 1; states are reached by XORing generator
    signatures.  Returns the distance array (uint8, 255 = unreached) and,
    optionally, the index of the first generator used to discover each state
    (int32, -1 = unreached) for witness reconstruction.
    """
    size = 1 << num_bits
    sigs = np.asarray(signatures, dtype=np.int64)
    dist = np.full(size, 255, dtype=np.uint8)
    via = np.full(size, -1, dtype=np.int32) if with_parents else None
    dist[0] = 0
    frontier = np.zeros(1, dtype=np.int64)
    depth = 0
    while frontier.size:
        depth += 1
        nxt = []
        for start in range(0, frontier.size, 1 << 14):
            chunk = frontier[start : start + (1 << 14)]
            cand = (chunk[:, None] ^ sigs[None, :]).ravel()
            fresh_mask = dist[cand] == 255
            if not fresh_mask.any():
                continue
            fresh = cand[fresh_mask]
            uniq, first = np.unique(fresh, return_index=True)
            dist[uniq] = depth
            if with_parents:
                via[uniq] = fresh_mask.nonzero()[0][first] % sigs.size
            nxt.append(uniq)
        frontier = np.concatenate(nxt) if nxt else np.zeros(0, dtype=np.int64)
    if with_parents:
        return dist, via
    return dist


def min_logical_weight(patch: Patch) -> int:
    """Minimum weight of a logical-X operator, by BFS with single-qubit
    X generators over the (Z-syndrome, logical-parity) space."""
    sigs = [fault_signature(patch, (q,)) for q in patch.data_qubits]
    dist = syndrome_parity_bfs(sigs, patch.num_faces + 1)
    target = 1 << patch.num_faces
    w = int(dist[target])
    if w == 255:
        raise AssertionError("logical state unreachable; patch is broken")
    return w


def patch_to_text(patch: Patch) -> str:
    """Line-oriented dump: Q <id> <x> <y> / F <id> <color> <aux> <slots...> /
    B <color> <ids...>.  Face slots are listed in clockwise order, absent
    positions omitted."""
    lines = []
    for q in patch.data_qubits:
        x, y = patch.data_coords[q]
        lines.append(f"Q {q} {x} {y}")
    for f in patch.faces:
        slot_str = " ".join(str(q) for q in f.data_slots)
        lines.append(f"F {f.id} {f.color.letter} {f.aux_qubit} {slot_str}")
    for c in Color:
        ids = " ".join(str(q) for q in patch.boundaries[c])
        lines.append(f"B {c.letter} {ids}")
    return "\n".join(lines) + "\n"
