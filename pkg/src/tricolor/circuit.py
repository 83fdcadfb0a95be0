"""Memory-experiment circuits: resets, scheduled two-qubit gates, detectors.

Each syndrome-extraction block resets the auxiliaries, applies six parallel
gate steps following the color-dependent schedule, and measures the
auxiliaries.  The XZ variant runs an X block then a Z block every round; the
XYZ variant measures a single stabilizer type per round, cycling X, Y, Z,
using the self-duality of the code (the per-face product of the three
stabilizer types is a constant, so any three consecutive measurements of a
face form a deterministic parity).

Detector bits are reference-relative: a detector fires when its measurement
parity deviates from the noiseless value, so a noiseless run reads all zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lattice import Patch
from .schedule import NUM_STEPS, Schedule, check_conflicts

__all__ = [
    "Reset",
    "Gate2",
    "Measure",
    "Tick",
    "TICK",
    "Depolarize1",
    "Depolarize2",
    "PauliChannel",
    "Detector",
    "CircuitIR",
    "build_memory_circuit",
    "export_circuit",
    "parse_circuit",
]


@dataclass(frozen=True)
class Reset:
    qubit: int
    basis: str  # "Z" or "X"


@dataclass(frozen=True)
class Gate2:
    kind: str  # "CX" or "CY"
    control: int
    target: int


@dataclass(frozen=True)
class Measure:
    qubit: int
    basis: str


@dataclass(frozen=True)
class Tick:
    pass


TICK = Tick()


@dataclass(frozen=True)
class Depolarize1:
    p: float
    qubit: int
    source: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class Depolarize2:
    p: float
    a: int
    b: int
    source: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class PauliChannel:
    basis: str  # "X" or "Z"
    p: float
    qubit: int
    source: tuple = field(default=(), compare=False)


NOISE_KINDS = (Depolarize1, Depolarize2, PauliChannel)
OP_KINDS = (Reset, Gate2, Measure)


@dataclass(frozen=True)
class Detector:
    measurements: tuple  # absolute measurement indices
    coord: tuple
    # internal metadata, not part of the text format
    basis: str = field(default=None, compare=False)


class CircuitIR:
    """Time-ordered instruction list plus detector/observable annotations."""

    def __init__(self, num_qubits, instructions, detectors, observable,
                 qubit_coords=None):
        self.num_qubits = num_qubits
        self.instructions = list(instructions)
        self.detectors = list(detectors)
        self.observable = tuple(observable)
        self.qubit_coords = dict(qubit_coords or {})
        self.num_measurements = sum(
            1 for ins in self.instructions if isinstance(ins, Measure)
        )
        for det in self.detectors:
            for m in det.measurements:
                if not 0 <= m < self.num_measurements:
                    raise ValueError(f"detector references measurement {m}")
        for m in self.observable:
            if not 0 <= m < self.num_measurements:
                raise ValueError(f"observable references measurement {m}")

    @property
    def num_detectors(self) -> int:
        return len(self.detectors)

    def has_noise(self) -> bool:
        return any(isinstance(ins, NOISE_KINDS) for ins in self.instructions)

    def noise_channels(self):
        """Noise instructions in circuit order; the position in this list is
        the channel index used for counter-based sampling."""
        return [ins for ins in self.instructions if isinstance(ins, NOISE_KINDS)]

    def layers(self):
        """Split instructions into TICK-delimited layers."""
        out, cur = [], []
        for ins in self.instructions:
            if isinstance(ins, Tick):
                out.append(cur)
                cur = []
            else:
                cur.append(ins)
        if cur:
            out.append(cur)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, CircuitIR)
            and self.num_qubits == other.num_qubits
            and self.instructions == other.instructions
            and self.detectors == other.detectors
            and self.observable == other.observable
            and self.qubit_coords == other.qubit_coords
        )


def _xyz_cycle(r: int) -> str:
    return "XYZ"[(r - 1) % 3]


def build_memory_circuit(
    patch: Patch,
    schedule: Schedule,
    rounds: int,
    variant: str = "xz",
    basis: str = "z",
) -> CircuitIR:
    """Z-basis memory experiment: reset data, run syndrome extraction for
    ``rounds`` rounds, then measure all data transversally."""
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if basis.lower() != "z":
        raise ValueError("only Z-basis memory experiments are supported")
    variant = variant.lower()
    if variant not in ("xz", "xyz"):
        raise ValueError(f"unknown variant {variant!r}")
    conflicts = check_conflicts(patch, schedule)
    if not conflicts.conflict_free:
        raise ValueError("schedule has gate conflicts: " + "; ".join(conflicts.witnesses))

    instructions = []
    meas_count = 0
    face_meas = {f.id: [] for f in patch.faces}  # (pauli, round, meas index)

    def extraction(pauli: str, round_no: int):
        nonlocal meas_count
        aux_basis = "Z" if pauli == "Z" else "X"
        for f in patch.faces:
            instructions.append(Reset(f.aux_qubit, aux_basis))
        instructions.append(TICK)
        for t in range(NUM_STEPS):
            for f in patch.faces:
                q = f.slots[schedule.orders[f.color][t]]
                if q is None:
                    continue
                if pauli == "X":
                    instructions.append(Gate2("CX", f.aux_qubit, q))
                elif pauli == "Y":
                    instructions.append(Gate2("CY", f.aux_qubit, q))
                else:
                    instructions.append(Gate2("CX", q, f.aux_qubit))
            instructions.append(TICK)
        for f in patch.faces:
            instructions.append(Measure(f.aux_qubit, aux_basis))
            face_meas[f.id].append((pauli, round_no, meas_count))
            meas_count += 1
        instructions.append(TICK)

    for q in patch.data_qubits:
        instructions.append(Reset(q, "Z"))
    instructions.append(TICK)

    for r in range(1, rounds + 1):
        if variant == "xz":
            extraction("X", r)
            extraction("Z", r)
        else:
            extraction(_xyz_cycle(r), r)

    data_meas = {}
    for q in patch.data_qubits:
        instructions.append(Measure(q, "Z"))
        data_meas[q] = meas_count
        meas_count += 1

    detectors = []
    for f in patch.faces:
        ax, ay = patch.aux_coord(f)
        recs = tuple(sorted(data_meas[q] for q in f.data_slots))
        ms = face_meas[f.id]
        if variant == "xz":
            zs = [m for p, _, m in ms if p == "Z"]
            xs = [m for p, _, m in ms if p == "X"]
            detectors.append(Detector((zs[0],), (ax, ay, 1), "Z"))
            for r in range(1, rounds):
                detectors.append(Detector((xs[r - 1], xs[r]), (ax, ay, r + 1), "X"))
                detectors.append(Detector((zs[r - 1], zs[r]), (ax, ay, r + 1), "Z"))
            detectors.append(Detector(recs + (zs[-1],), (ax, ay, rounds + 1), "Z"))
        else:
            seq = [m for _, _, m in ms]
            if rounds >= 2:
                detectors.append(Detector((seq[0], seq[1]), (ax, ay, 2), None))
            for r in range(3, rounds + 1):
                detectors.append(
                    Detector((seq[r - 3], seq[r - 2], seq[r - 1]), (ax, ay, r), None)
                )
            last = _xyz_cycle(rounds)
            if last == "Z":
                extra = (seq[-1],)
            elif last == "X":
                extra = (seq[-2],) if rounds >= 2 else ()
            else:  # Y: the X, Y, Z-reconstruction triple stays deterministic
                extra = (seq[-2], seq[-1])
            detectors.append(Detector(recs + extra, (ax, ay, rounds + 1), None))

    observable = tuple(
        sorted(data_meas[q] for q in sorted(patch.logical_z_support))
    )
    coords = dict(patch.data_coords)
    for f in patch.faces:
        coords[f.aux_qubit] = patch.aux_coord(f)

    return CircuitIR(patch.num_qubits, instructions, detectors, observable, coords)


# ---------------------------------------------------------------------------
# interchange text format (stim-compatible subset)

_GATE_NAMES = {"CX", "CY"}


def export_circuit(circuit: CircuitIR) -> str:
    """Emit the line-oriented interchange format.  Consecutive instructions
    of the same kind are grouped onto one line; detector and observable
    annotations come last with measurement references counted from the end.
    """
    lines = []
    for q in sorted(circuit.qubit_coords):
        x, y = circuit.qubit_coords[q]
        lines.append(f"QUBIT_COORDS({_fmt(x)}, {_fmt(y)}) {q}")

    def flush(group):
        if not group:
            return
        head = group[0]
        if isinstance(head, Reset):
            name = "R" if head.basis == "Z" else "RX"
            lines.append(name + " " + " ".join(str(i.qubit) for i in group))
        elif isinstance(head, Measure):
            name = "M" if head.basis == "Z" else "MX"
            lines.append(name + " " + " ".join(str(i.qubit) for i in group))
        elif isinstance(head, Gate2):
            targets = " ".join(f"{i.control} {i.target}" for i in group)
            lines.append(f"{head.kind} {targets}")
        elif isinstance(head, Depolarize1):
            qs = " ".join(str(i.qubit) for i in group)
            lines.append(f"DEPOLARIZE1({_fmt(head.p)}) {qs}")
        elif isinstance(head, Depolarize2):
            qs = " ".join(f"{i.a} {i.b}" for i in group)
            lines.append(f"DEPOLARIZE2({_fmt(head.p)}) {qs}")
        elif isinstance(head, PauliChannel):
            name = "X_ERROR" if head.basis == "X" else "Z_ERROR"
            qs = " ".join(str(i.qubit) for i in group)
            lines.append(f"{name}({_fmt(head.p)}) {qs}")
        else:
            raise ValueError(f"cannot export instruction {head!r}")

    group = []
    for ins in circuit.instructions:
        if isinstance(ins, Tick):
            flush(group)
            group = []
            lines.append("TICK")
            continue
        if group and not _same_group(group[0], ins):
            flush(group)
            group = []
        group.append(ins)
    flush(group)

    m = circuit.num_measurements
    for det in circuit.detectors:
        coord = ", ".join(_fmt(c) for c in det.coord)
        recs = " ".join(f"rec[{i - m}]" for i in det.measurements)
        lines.append(f"DETECTOR({coord}) {recs}")
    if circuit.observable:
        recs = " ".join(f"rec[{i - m}]" for i in circuit.observable)
        lines.append(f"OBSERVABLE_INCLUDE(0) {recs}")
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return repr(v)


def _same_group(a, b) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Reset) or isinstance(a, Measure):
        return a.basis == b.basis
    if isinstance(a, Gate2):
        return a.kind == b.kind
    if isinstance(a, (Depolarize1, Depolarize2)):
        return a.p == b.p
    if isinstance(a, PauliChannel):
        return a.basis == b.basis and a.p == b.p
    return False


def parse_circuit(text: str) -> CircuitIR:
    """Parse the interchange format back into a CircuitIR (inverse of
    :func:`export_circuit` up to noise-source tags, which are not textual)."""
    instructions = []
    detectors = []
    observable = ()
    coords = {}
    num_meas = 0
    pending = []  # (kind, args, coord) for detector lines, resolved at end

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, args = _split_instruction(line)
        if name == "QUBIT_COORDS":
            q = int(args["targets"][0])
            coords[q] = tuple(args["params"])
        elif name == "TICK":
            instructions.append(TICK)
        elif name in ("R", "RX"):
            basis = "Z" if name == "R" else "X"
            instructions.extend(Reset(int(t), basis) for t in args["targets"])
        elif name in ("M", "MX"):
            basis = "Z" if name == "M" else "X"
            for t in args["targets"]:
                instructions.append(Measure(int(t), basis))
                num_meas += 1
        elif name in _GATE_NAMES:
            ts = [int(t) for t in args["targets"]]
            if len(ts) % 2:
                raise ValueError(f"odd target count in {line!r}")
            for c, t in zip(ts[::2], ts[1::2]):
                instructions.append(Gate2(name, c, t))
        elif name == "DEPOLARIZE1":
            p = args["params"][0]
            instructions.extend(Depolarize1(p, int(t)) for t in args["targets"])
        elif name == "DEPOLARIZE2":
            p = args["params"][0]
            ts = [int(t) for t in args["targets"]]
            for a, b in zip(ts[::2], ts[1::2]):
                instructions.append(Depolarize2(p, a, b))
        elif name in ("X_ERROR", "Z_ERROR"):
            p = args["params"][0]
            basis = name[0]
            instructions.extend(PauliChannel(basis, p, int(t)) for t in args["targets"])
        elif name == "DETECTOR":
            pending.append(("det", args["recs"], tuple(args["params"])))
        elif name == "OBSERVABLE_INCLUDE":
            pending.append(("obs", args["recs"], ()))
        else:
            raise ValueError(f"unknown instruction {name!r}")

    for kind, recs, coord in pending:
        meas = tuple(num_meas + r for r in recs)
        if kind == "det":
            detectors.append(Detector(meas, coord))
        else:
            observable = meas

    qubits = set(coords)
    for ins in instructions:
        for attr in ("qubit", "control", "target", "a", "b"):
            if hasattr(ins, attr):
                qubits.add(getattr(ins, attr))
    num_qubits = max(qubits) + 1 if qubits else 0
    return CircuitIR(num_qubits, instructions, detectors, observable, coords)


def _split_instruction(line: str):
    """Break ``NAME(p1, p2) t1 t2 rec[-1]`` into name, params, targets."""
    params = []
    if "(" in line:
        name, rest = line.split("(", 1)
        inner, rest = rest.split(")", 1)
        params = [_num(tok.strip()) for tok in inner.split(",") if tok.strip()]
    else:
        parts = line.split(None, 1)
        name, rest = parts[0], parts[1] if len(parts) > 1 else ""
    targets, recs = [], []
    for tok in rest.split():
        if tok.startswith("rec["):
            recs.append(int(tok[4:-1]))
        else:
            targets.append(tok)
    return name.strip(), {"params": params, "targets": targets, "recs": recs}


def _num(tok: str):
    v = float(tok)
    if v.is_integer() and "." not in tok and "e" not in tok.lower():
        return int(tok)
    return v
