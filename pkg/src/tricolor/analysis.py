"""Hook-error propagation, malignancy, and distance certification.

A hook is a Pauli fault on a plaquette's auxiliary qubit partway through its
two-qubit gate sequence.  It propagates through the gates applied after that
point (equivalently, up to the face stabilizer, through those applied before
it) and lands as a correlated error on the data qubits.  Whether a given hook
shortens a logical operator is decided operationally here: a hook (set) is
malign when adding it as a unit-cost generator drops the minimum logical
weight below the patch distance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    Face,
    FaceKind,
    Patch,
    fault_signature,
    syndrome_parity_bfs,
)
from .schedule import Schedule

__all__ = [
    "HookError",
    "DistanceResult",
    "propagate_hooks",
    "bulk_hooks",
    "hook_augmented_distance",
    "is_malign",
    "malign_slot_pairs",
    "circuit_distance",
    "find_fractional_hook_witness",
    "phenomenological_dem",
]


@dataclass(frozen=True)
class HookError:
    """A mid-schedule auxiliary fault and the data error it induces."""

    face: int
    pauli_type: str  # "X" or "Z": which extraction round hosts the fault
    offset: int  # fault occurs after this many gates of the face's sequence
    induced_error: tuple  # minimal-weight representative, data-qubit ids

    def __repr__(self):
        qs = ",".join(map(str, self.induced_error))
        return f"Hook(f{self.face}:{self.pauli_type}@{self.offset}->[{qs}])"


@dataclass
class DistanceResult:
    value: int | None
    witness: list | None
    max_weight: int | None = None

    @property
    def exceeded(self) -> bool:
        return self.value is None

    def __repr__(self):
        if self.exceeded:
            return f"DistanceResult(> {self.max_weight})"
        return f"DistanceResult({self.value}, witness={self.witness})"


def _hook_reps(sequence, offset):
    """Prefix/suffix data-error representatives for a fault after gate
    ``offset`` of ``sequence``; equivalent modulo the face stabilizer."""
    prefix = tuple(sorted(sequence[:offset]))
    suffix = tuple(sorted(sequence[offset:]))
    return prefix, suffix


def _canonical_rep(prefix, suffix):
    # minimal-weight representative; ties keep the suffix
    if len(prefix) < len(suffix):
        return prefix
    return suffix


def propagate_hooks(patch: Patch, schedule: Schedule, pauli_types=("X", "Z")):
    """Enumerate hook errors of every face under ``schedule``.

    Offsets run over the fault positions whose induced error has weight at
    least 2: after gates 2, 3, 4 on six-gate faces (weights 2, 3, 2) and
    after gate 2 on four-gate boundary faces (weight 2).  X-round hooks
    induce X data errors, Z-round hooks Z data errors; by self-duality the
    supports coincide.
    """
    hooks = []
    for face in patch.faces:
        seq = schedule.face_sequence(face)
        if len(seq) == 6:
            offsets = (2, 3, 4)
        else:
            offsets = (2,)
        for k in offsets:
            rep = _canonical_rep(*_hook_reps(seq, k))
            for pt in pauli_types:
                hooks.append(HookError(face.id, pt, k, rep))
    return hooks


def bulk_hooks(patch: Patch, schedule: Schedule):
    """X-round hooks of the bulk (six-qubit) faces only."""
    return [
        h
        for h in propagate_hooks(patch, schedule, pauli_types=("X",))
        if patch.faces[h.face].kind is FaceKind.BULK
    ]


def _base_distances(patch: Patch) -> np.ndarray:
    """Distance from the trivial state to every (syndrome, parity) state
    using single-qubit X generators.  Memoized on the patch."""
    cached = getattr(patch, "_base_dist", None)
    if cached is None:
        sigs = [fault_signature(patch, (q,)) for q in patch.data_qubits]
        cached = syndrome_parity_bfs(sigs, patch.num_faces + 1)
        patch._base_dist = cached
    return cached


def logical_target(patch: Patch) -> int:
    return 1 << patch.num_faces


def is_malign(patch: Patch, error_qubits) -> bool:
    """Does a unit-cost correlated error on ``error_qubits`` shorten some
    logical operator below the patch distance?"""
    dist = _base_distances(patch)
    residual = logical_target(patch) ^ fault_signature(patch, error_qubits)
    return 1 + int(dist[residual]) < patch.distance


def malign_slot_pairs(patch: Patch, face: Face):
    """Slot-position pairs of ``face`` whose weight-2 correlated error is
    malign.  Pairs are frozensets of slot indices (0..5)."""
    out = set()
    for a, b in itertools.combinations(face.slot_positions, 2):
        qa, qb = face.slots[a], face.slots[b]
        if is_malign(patch, (qa, qb)):
            out.add(frozenset((a, b)))
    return out


def hook_augmented_distance(patch: Patch, hooks) -> DistanceResult:
    """Minimum number of unit-cost generators (single-qubit X errors plus
    the given hooks' induced errors) forming a logical operator, by BFS
    over the (Z-syndrome, logical-parity) space."""
    if patch.distance > 7:
        raise ValueError("state space too large; distance must be <= 7")
    gens = [("data", q) for q in patch.data_qubits]
    seen = []
    for h in hooks:
        gens.append(("hook", h))
    sigs = []
    for kind, obj in gens:
        if kind == "data":
            sigs.append(fault_signature(patch, (obj,)))
        else:
            sigs.append(fault_signature(patch, obj.induced_error))
    dist, via = syndrome_parity_bfs(sigs, patch.num_faces + 1, with_parents=True)
    target = logical_target(patch)
    w = int(dist[target])
    if w == 255:
        raise AssertionError("logical state unreachable")
    witness = []
    state = target
    while state:
        g = int(via[state])
        witness.append(gens[g])
        state ^= sigs[g]
    assert len(witness) == w
    return DistanceResult(w, witness)


def _class_signature(cls, num_detectors: int) -> int:
    sig = 0
    for det in cls.detectors:
        sig |= 1 << det
    if cls.observable:
        sig |= 1 << num_detectors
    return sig


def _subset_xors(sigs, k):
    """Yield (signature-xor, index-tuple) over k-subsets, lexicographically."""
    n = len(sigs)
    for idx in itertools.combinations(range(n), k):
        acc = 0
        for i in idx:
            acc ^= sigs[i]
        yield acc, idx


def _witnesses_of_weight(sigs, target, w):
    """Yield index tuples of w-subsets XORing to ``target`` (meet in the
    middle).  Assumes no subset of weight < w solves, which makes any
    colliding halves automatically disjoint."""
    k_hash = w // 2
    k_probe = w - k_hash
    if k_hash == 0:
        for acc, idx in _subset_xors(sigs, k_probe):
            if acc == target:
                yield idx
        return
    table = {}
    for acc, idx in _subset_xors(sigs, k_hash):
        table.setdefault(acc, idx)
    for acc, idx in _subset_xors(sigs, k_probe):
        other = table.get(acc ^ target)
        if other is not None and not set(other) & set(idx):
            yield tuple(sorted(other + idx))


def circuit_distance(dem, max_weight: int) -> DistanceResult:
    """Minimum-cardinality fault-class subset with zero detector XOR and an
    observable flip, searched by meet-in-the-middle of increasing weight.

    Returns a result with ``value=None`` when no witness of weight at most
    ``max_weight`` exists (the noiseless model reports that immediately).
    """
    if max_weight > 6:
        raise ValueError("meet-in-the-middle beyond weight 6 is not desk-scale")
    classes = dem.fault_classes
    sigs = [_class_signature(c, dem.num_detectors) for c in classes]
    target = 1 << dem.num_detectors
    for w in range(1, max_weight + 1):
        for idx in _witnesses_of_weight(sigs, target, w):
            return DistanceResult(w, [classes[i] for i in idx])
    return DistanceResult(None, None, max_weight=max_weight)


def _minimal_witnesses(dem, weight):
    classes = dem.fault_classes
    sigs = [_class_signature(c, dem.num_detectors) for c in classes]
    target = 1 << dem.num_detectors
    for idx in _witnesses_of_weight(sigs, target, weight):
        yield [classes[i] for i in idx]


def phenomenological_dem(patch: Patch, schedule: Schedule, p: float = 1e-3):
    """Fault model with one detector per face: single-qubit X errors plus
    every hook's induced error, all at probability ``p``.  Suitable for
    distance search at sizes where the full circuit model is out of reach.
    """
    from .noise import DetectorErrorModel, FaultClass

    classes = []
    for q in patch.data_qubits:
        dets = frozenset(patch.qubit_faces[q])
        obs = bool(patch.logical_parity_of((q,)))
        classes.append(FaultClass(p, dets, obs, sources=(("data", q),)))
    for h in propagate_hooks(patch, schedule, pauli_types=("X",)):
        qs = h.induced_error
        dets = frozenset(
            fid
            for fid in range(patch.num_faces)
            if patch.syndrome_of(qs) >> fid & 1
        )
        obs = bool(patch.logical_parity_of(qs))
        classes.append(FaultClass(p, dets, obs, sources=(("hook", h),)))
    return DetectorErrorModel(patch.num_faces, classes)


def fault_class_kind(cls) -> str:
    """Classify a fault class as ``hook`` (an auxiliary fault spreading to
    two or more data qubits contributes to it) or ``data``."""
    for src in cls.sources:
        tag = src[0]
        if tag == "hook":
            return "hook"
        if tag == "channel" and src[-1] == "hook":
            return "hook"
    return "data"


def find_fractional_hook_witness(patch: Patch, schedule: Schedule, dem=None):
    """A minimal undetectable-logical witness mixing hook and data faults.

    For d=5 the witness is searched on the full uniform-depolarizing circuit
    model with d rounds; for d=7 the per-face fault model stands in, since
    weight-6 meet-in-the-middle over the circuit model is out of desk reach.
    """
    if patch.distance < 5:
        raise ValueError("fractional hooks need distance >= 5")
    if dem is None:
        if patch.distance == 5:
            from .circuit import build_memory_circuit
            from .noise import NoiseModelSpec, annotate, compile_dem

            circ = build_memory_circuit(
                patch, schedule, rounds=patch.distance, variant="xz"
            )
            noisy = annotate(circ, NoiseModelSpec("uniform", 1e-3))
            dem = compile_dem(noisy).restricted_to_x_faults()
        else:
            dem = phenomenological_dem(patch, schedule)
    expect = patch.distance - (patch.distance + 3) // 6
    for witness in _minimal_witnesses(dem, expect):
        kinds = {fault_class_kind(c) for c in witness}
        if kinds == {"hook", "data"}:
            return witness
    raise AssertionError("no mixed hook/data witness at the formula weight")
