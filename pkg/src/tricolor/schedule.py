"""Per-color gate schedules for parallel syndrome extraction.

A schedule assigns, for each plaquette color, the order in which the six
two-qubit gates visit the slot positions of a face.  Boundary faces reuse
the bulk order of their color with the gates to absent slots omitted, so
their gates keep the original time steps.

Valid schedules must be conflict-free (no data qubit touched twice in one
time step), keep every bulk hook benign, and steer the boundary trapezoids'
weight-2 hooks onto their diagonals rather than their lattice edges.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .lattice import Color, Face, FaceKind, Patch

__all__ = [
    "Schedule",
    "ScheduleReport",
    "check_conflicts",
    "evaluate_schedule",
    "search_schedules",
    "default_schedule",
    "uniform_schedule",
    "worst_uniform_schedule",
    "schedule_to_text",
    "parse_schedule_text",
    "resolve_schedule",
]

NUM_STEPS = 6


@dataclass(frozen=True)
class Schedule:
    """Map from color to the slot visited at each of the six time steps."""

    orders: dict
    name: str = "custom"

    def __post_init__(self):
        for c in Color:
            order = self.orders[c]
            if sorted(order) != list(range(NUM_STEPS)):
                raise ValueError(f"{c.name} order is not a permutation: {order}")

    def order(self, color: Color) -> tuple:
        return tuple(self.orders[color])

    def face_sequence(self, face: Face) -> tuple:
        """Data qubits of ``face`` in gate order (absent slots omitted)."""
        return tuple(
            face.slots[s] for s in self.orders[face.color] if face.slots[s] is not None
        )

    def face_steps(self, face: Face) -> tuple:
        """(time step, data qubit) pairs of the gates applied to ``face``."""
        return tuple(
            (t, face.slots[s])
            for t, s in enumerate(self.orders[face.color])
            if face.slots[s] is not None
        )

    def is_uniform(self) -> bool:
        orders = {self.orders[c] for c in Color}
        return len(orders) == 1


@dataclass
class ScheduleReport:
    """Outcome of validating a schedule against a patch.  Flags left as
    ``None`` were not evaluated."""

    conflict_free: bool = None
    bulk_benign: bool = None
    boundary_diagonal: bool = None
    witnesses: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            bool(self.conflict_free)
            and bool(self.bulk_benign)
            and bool(self.boundary_diagonal)
        )


def check_conflicts(patch: Patch, schedule: Schedule) -> ScheduleReport:
    """Scan the six time steps for data qubits touched by two faces at once."""
    report = ScheduleReport()
    witnesses = []
    for t in range(NUM_STEPS):
        used = {}
        for face in patch.faces:
            slot = schedule.orders[face.color][t]
            q = face.slots[slot]
            if q is None:
                continue
            if q in used:
                witnesses.append(f"step {t}: qubit {q} hit by faces {used[q]} and {face.id}")
            else:
                used[q] = face.id
    report.conflict_free = not witnesses
    report.witnesses.extend(witnesses)
    return report


def _trapezoid_hook_ok(face: Face, order) -> bool:
    """Boundary-diagonal rule: the mid-sequence hook of a four-qubit face
    must not coincide with a lattice edge, in either representative."""
    seq_slots = [s for s in order if face.slots[s] is not None]
    first = frozenset(face.slots[s] for s in seq_slots[:2])
    second = frozenset(face.slots[s] for s in seq_slots[2:])
    edges = face.lattice_edge_pairs()
    return first not in edges and second not in edges


def check_boundary_diagonal(patch: Patch, schedule: Schedule) -> ScheduleReport:
    report = ScheduleReport()
    witnesses = []
    for face in patch.faces:
        if face.kind is not FaceKind.TRAPEZOID:
            continue
        if not _trapezoid_hook_ok(face, schedule.orders[face.color]):
            witnesses.append(f"trapezoid {face.id}: weight-2 hook lies on an edge")
    report.boundary_diagonal = not witnesses
    report.witnesses.extend(witnesses)
    return report


def check_bulk_benign(patch: Patch, schedule: Schedule) -> ScheduleReport:
    from . import analysis

    report = ScheduleReport()
    hooks = analysis.bulk_hooks(patch, schedule)
    if not hooks:
        report.bulk_benign = True
        return report
    result = analysis.hook_augmented_distance(patch, hooks)
    report.bulk_benign = result.value == patch.distance
    if not report.bulk_benign:
        report.witnesses.append(
            f"bulk hooks reduce distance to {result.value}: {result.witness}"
        )
    return report


def evaluate_schedule(patch: Patch, schedule: Schedule) -> ScheduleReport:
    """Run all three checks and merge the verdicts."""
    parts = [
        check_conflicts(patch, schedule),
        check_bulk_benign(patch, schedule),
        check_boundary_diagonal(patch, schedule),
    ]
    merged = ScheduleReport(
        conflict_free=parts[0].conflict_free,
        bulk_benign=parts[1].bulk_benign,
        boundary_diagonal=parts[2].boundary_diagonal,
    )
    for part in parts:
        merged.witnesses.extend(part.witnesses)
    return merged


def _conflict_pairs(patch: Patch):
    """For each ordered color pair, the slot pairs that must differ in time:
    some data qubit sits at those slots of two faces of those colors."""
    pairs = {}
    for q in patch.data_qubits:
        placements = []
        for fid in patch.qubit_faces[q]:
            face = patch.faces[fid]
            placements.append((face.color, face.slots.index(q)))
        for (c1, s1), (c2, s2) in itertools.combinations(placements, 2):
            pairs.setdefault((c1, c2), set()).add((s1, s2))
    return pairs


def _per_color_candidates(patch, color, bulk_benign, boundary_diagonal):
    from . import analysis

    bulk_faces = [f for f in patch.faces if f.kind is FaceKind.BULK and f.color is color]
    traps = [f for f in patch.faces if f.kind is FaceKind.TRAPEZOID and f.color is color]
    malign = {f.id: analysis.malign_slot_pairs(patch, f) for f in bulk_faces}

    out = []
    for perm in itertools.permutations(range(NUM_STEPS)):
        if bulk_benign:
            head = frozenset(perm[:2])
            tail = frozenset(perm[4:])
            if any(head in malign[f.id] or tail in malign[f.id] for f in bulk_faces):
                continue
        if boundary_diagonal and not all(_trapezoid_hook_ok(f, perm) for f in traps):
            continue
        out.append(perm)
    return out


def search_schedules(
    patch: Patch,
    conflict_free: bool = True,
    bulk_benign: bool = True,
    boundary_diagonal: bool = True,
    limit: int = None,
) -> list:
    """Enumerate schedules satisfying the requested constraints, in
    lexicographic order of the (red, green, blue) permutations.

    Candidate permutations are prefiltered per color (individual bulk hooks
    benign, trapezoid hooks on diagonals), conflict-checked as triples, and
    finally confirmed with the full hook-augmented distance so that bulk
    hooks stay benign in combination as well.
    """
    if patch.distance < 5 and bulk_benign:
        bulk_benign = False  # no bulk faces below d=5
    from . import analysis

    cands = {
        c: _per_color_candidates(patch, c, bulk_benign, boundary_diagonal)
        for c in Color
    }
    conf = _conflict_pairs(patch) if conflict_free else {}

    def compatible(c1, t1, c2, t2):
        for s1, s2 in conf.get((c1, c2), ()):
            if t1[s1] == t2[s2]:
                return False
        for s2, s1 in conf.get((c2, c1), ()):
            if t2[s2] == t1[s1]:
                return False
        return True

    def times(perm):
        t = [0] * NUM_STEPS
        for step, slot in enumerate(perm):
            t[slot] = step
        return t

    results = []
    for pr in cands[Color.RED]:
        tr = times(pr)
        for pg in cands[Color.GREEN]:
            tg = times(pg)
            if conflict_free and not compatible(Color.RED, tr, Color.GREEN, tg):
                continue
            for pb in cands[Color.BLUE]:
                tb = times(pb)
                if conflict_free and not (
                    compatible(Color.RED, tr, Color.BLUE, tb)
                    and compatible(Color.GREEN, tg, Color.BLUE, tb)
                ):
                    continue
                sched = Schedule(
                    {Color.RED: pr, Color.GREEN: pg, Color.BLUE: pb},
                    name="searched",
                )
                if bulk_benign:
                    hooks = analysis.bulk_hooks(patch, sched)
                    if hooks:
                        res = analysis.hook_augmented_distance(patch, hooks)
                        if res.value != patch.distance:
                            continue
                results.append(sched)
                if limit is not None and len(results) >= limit:
                    return results
    return results


# Pinned output of search_schedules(build_patch(7)): the lexicographically
# first (red, green, blue) triple passing all three checks.  Stable across
# releases; tests re-derive it.
_DEFAULT_ORDERS = None  # set below once computed


def default_schedule() -> Schedule:
    """The repository's pinned color-dependent schedule."""
    return Schedule({c: _DEFAULT_ORDERS[c] for c in Color}, name="default")


def uniform_schedule(perm, name=None) -> Schedule:
    perm = tuple(perm)
    return Schedule(
        {c: perm for c in Color},
        name=name or "uniform:" + "".join(map(str, perm)),
    )


def worst_uniform_schedule(patch: Patch) -> Schedule:
    """The uniform schedule whose bulk hooks drop the hook-augmented
    distance the most (ties broken lexicographically)."""
    from . import analysis

    best = None
    for perm in itertools.permutations(range(NUM_STEPS)):
        sched = uniform_schedule(perm)
        hooks = analysis.bulk_hooks(patch, sched)
        value = analysis.hook_augmented_distance(patch, hooks).value
        if best is None or value < best[0]:
            best = (value, sched)
    return best[1]


def schedule_to_text(schedule: Schedule) -> str:
    lines = []
    for c in Color:
        lines.append(f"S {c.letter} " + " ".join(map(str, schedule.orders[c])))
    return "\n".join(lines) + "\n"


def parse_schedule_text(text: str) -> Schedule:
    orders = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] != "S" or len(parts) != 8:
            raise ValueError(f"bad schedule line: {line!r}")
        orders[Color.from_letter(parts[1])] = tuple(int(p) for p in parts[2:])
    missing = [c.name for c in Color if c not in orders]
    if missing:
        raise ValueError(f"schedule text is missing colors: {missing}")
    return Schedule(orders, name="parsed")


def resolve_schedule(source: str) -> Schedule:
    """CLI schedule source: ``default``, ``uniform:<perm>``, or a filename."""
    if source == "default":
        return default_schedule()
    if source.startswith("uniform:"):
        digits = source.split(":", 1)[1].replace(",", "")
        return uniform_schedule(tuple(int(ch) for ch in digits))
    with open(source) as fh:
        return parse_schedule_text(fh.read())
