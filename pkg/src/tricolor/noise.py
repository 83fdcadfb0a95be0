"""Circuit-level noise models and detector-error-model compilation.

Three models, each driven by a single rate p:

* ``si1000``      superconducting-inspired: idle depolarization p/10 (plus an
                  additional 2p while other qubits are measured or reset),
                  two-qubit depolarization p after each two-qubit gate,
                  measurement flips 5p, reset flips 2p.
* ``uniform``     the same probability p at every circuit location: each idle
                  qubit per layer, each two-qubit gate, each measurement,
                  each reset.
* ``noisy_cnot``  two-qubit depolarization p after every two-qubit gate and
                  nothing else; still excites every fault class the other
                  models produce, at first order in p.

Measurement flips are realized as a Pauli channel immediately before the
measurement (an X error before a Z-basis readout, a Z error before an X-basis
readout); every auxiliary is reset before reuse, so this is equivalent to a
classical flip of the record.

``compile_dem`` walks the circuit backward, maintaining for every qubit the
detector/observable signature of an X and a Z error at the current position,
and resolves each noise channel into first-order fault classes that are then
deduplicated by signature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import (
    CircuitIR,
    Depolarize1,
    Depolarize2,
    Gate2,
    Measure,
    NOISE_KINDS,
    PauliChannel,
    Reset,
)

__all__ = [
    "NoiseModelSpec",
    "FaultClass",
    "DetectorErrorModel",
    "annotate",
    "compile_dem",
    "dem_to_text",
    "parse_dem_text",
]

KINDS = ("si1000", "uniform", "noisy_cnot")


@dataclass(frozen=True)
class NoiseModelSpec:
    kind: str
    p: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise model {self.kind!r}")
        if not 0.0 <= self.p <= 0.1:
            raise ValueError("p must lie in [0, 0.1]")


def _layer_kind(layer):
    kinds = set()
    for ins in layer:
        if isinstance(ins, Reset):
            kinds.add("reset")
        elif isinstance(ins, Gate2):
            kinds.add("gate")
        elif isinstance(ins, Measure):
            kinds.add("meas")
        elif isinstance(ins, NOISE_KINDS):
            raise ValueError("circuit already carries noise")
    if len(kinds) > 1:
        raise ValueError(f"mixed layer kinds: {kinds}")
    return kinds.pop() if kinds else None


def _busy_qubits(layer):
    busy = set()
    for ins in layer:
        for attr in ("qubit", "control", "target"):
            if hasattr(ins, attr):
                busy.add(getattr(ins, attr))
    return busy


def _tag_gates(circuit: CircuitIR):
    """Per Gate2 instruction: (aux, data, extraction type, ordinal, total),
    where ordinal counts the gates of that auxiliary's current extraction
    block (delimited by its resets) and total is the block's gate count.
    Auxiliaries are recognized as the qubits that get reset mid-circuit and
    measured in the same block; for circuits built here they are simply the
    ids at or above the data-qubit count, which equals the smallest reset
    target of any second reset layer.  We detect them as the control of CX
    gates whose partner is also the target of a Measure in the same block,
    which reduces to: the qubit of the gate that is reset most recently."""
    last_reset = {}
    order = []  # parallel to instructions: tag or None
    blocks = {}  # (aux, reset stamp) -> list of positions into `order`
    stamp = {}
    for pos, ins in enumerate(circuit.instructions):
        if isinstance(ins, Reset):
            stamp[ins.qubit] = pos
            order.append(None)
        elif isinstance(ins, Gate2):
            c, t = ins.control, ins.target
            # the auxiliary was reset later than the data qubit in its block
            if stamp.get(c, -1) >= stamp.get(t, -1):
                aux, data = c, t
            else:
                aux, data = t, c
            if ins.kind == "CY":
                ext = "Y"
            elif aux == ins.control:
                ext = "X"
            else:
                ext = "Z"
            key = (aux, stamp.get(aux, -1))
            blocks.setdefault(key, []).append(pos)
            order.append((aux, data, ext, len(blocks[key])))
        else:
            order.append(None)
    totals = {key: len(positions) for key, positions in blocks.items()}
    tags = {}
    for key, positions in blocks.items():
        for pos in positions:
            aux, data, ext, ordinal = order[pos]
            tags[pos] = ("gate", ext, aux, data, ordinal, totals[key])
    return tags


def annotate(circuit: CircuitIR, spec: NoiseModelSpec) -> CircuitIR:
    """Insert the channels that ``spec`` prescribes; rejects circuits that
    already carry noise."""
    from .circuit import TICK

    if circuit.has_noise() or getattr(circuit, "noise_spec", None) is not None:
        raise ValueError("circuit is already annotated")
    p = spec.p
    all_qubits = set(range(circuit.num_qubits))
    gate_tags = _tag_gates(circuit)

    pos = 0
    new_layers = []
    for layer in circuit.layers():
        kind = _layer_kind(layer)
        idle = sorted(all_qubits - _busy_qubits(layer)) if layer else []
        before, after = [], []

        if p > 0 and kind == "gate":
            for offset, ins in enumerate(layer):
                after.append(
                    Depolarize2(
                        p, ins.control, ins.target, source=gate_tags[pos + offset]
                    )
                )
            if spec.kind == "uniform":
                after += [Depolarize1(p, q, source=("idle",)) for q in idle]
            elif spec.kind == "si1000":
                after += [Depolarize1(p / 10, q, source=("idle",)) for q in idle]
        elif p > 0 and kind == "reset" and spec.kind != "noisy_cnot":
            flip_p = p if spec.kind == "uniform" else 2 * p
            after += [
                PauliChannel(
                    "X" if ins.basis == "Z" else "Z",
                    flip_p,
                    ins.qubit,
                    source=("reset",),
                )
                for ins in layer
            ]
            after += _idle_channels(spec, p, idle)
        elif p > 0 and kind == "meas" and spec.kind != "noisy_cnot":
            flip_p = p if spec.kind == "uniform" else 5 * p
            before += [
                PauliChannel(
                    "X" if ins.basis == "Z" else "Z",
                    flip_p,
                    ins.qubit,
                    source=("meas",),
                )
                for ins in layer
            ]
            after += _idle_channels(spec, p, idle)

        new_layers.append(before + list(layer) + after)
        pos += len(layer) + 1  # account for the TICK

    out = []
    for i, layer in enumerate(new_layers):
        if i:
            out.append(TICK)
        out.extend(layer)

    noisy = CircuitIR(
        circuit.num_qubits,
        out,
        circuit.detectors,
        circuit.observable,
        circuit.qubit_coords,
    )
    noisy.noise_spec = spec
    return noisy


def _idle_channels(spec, p, idle):
    """Idle noise during a measurement/reset layer: the uniform model keeps
    its flat p, SI1000 stacks the 2p penalty on top of the p/10 baseline."""
    if spec.kind == "uniform":
        return [Depolarize1(p, q, source=("idle",)) for q in idle]
    out = [Depolarize1(p / 10, q, source=("idle",)) for q in idle]
    out += [Depolarize1(2 * p, q, source=("idle_mr",)) for q in idle]
    return out


@dataclass(frozen=True)
class FaultClass:
    probability: float
    detectors: frozenset
    observable: bool
    sources: tuple = field(default=(), compare=False)

    def signature(self, num_detectors: int) -> int:
        sig = 0
        for d in self.detectors:
            sig |= 1 << d
        if self.observable:
            sig |= 1 << num_detectors
        return sig


class DetectorErrorModel:
    """Deduplicated first-order fault classes of a noisy circuit."""

    def __init__(self, num_detectors, fault_classes, detector_bases=None):
        self.num_detectors = num_detectors
        self.fault_classes = tuple(
            sorted(
                fault_classes,
                key=lambda c: (sorted(c.detectors), c.observable),
            )
        )
        self.detector_bases = detector_bases

    def __len__(self):
        return len(self.fault_classes)

    def restricted_to_x_faults(self) -> "DetectorErrorModel":
        """Sub-model of classes touching no X-basis detector.  For CX-only
        circuits the X and Z error components propagate independently, so
        the minimum undetectable-logical weight is unchanged by projecting
        onto the Z-detector + observable support."""
        if self.detector_bases is None:
            raise ValueError("detector bases unknown; cannot restrict")
        xdets = {
            i for i, b in enumerate(self.detector_bases) if b == "X"
        }
        keep = [
            c for c in self.fault_classes if not (set(c.detectors) & xdets)
        ]
        return DetectorErrorModel(self.num_detectors, keep, self.detector_bases)


_PAULIS1 = ("X", "Y", "Z")
_PAULIS2 = tuple(
    (a, b)
    for a in ("I", "X", "Y", "Z")
    for b in ("I", "X", "Y", "Z")
    if (a, b) != ("I", "I")
)


def _combine(a: float, b: float) -> float:
    return a * (1 - b) + b * (1 - a)


def compile_dem(circuit: CircuitIR) -> DetectorErrorModel:
    """Propagate every channel's single-fault outcomes through the rest of
    the circuit and deduplicate by (detector set, observable flip)."""
    num_det = circuit.num_detectors
    obs_bit = 1 << num_det

    meas_mask = {}
    for d, det in enumerate(circuit.detectors):
        for m in det.measurements:
            meas_mask[m] = meas_mask.get(m, 0) ^ (1 << d)
    for m in circuit.observable:
        meas_mask[m] = meas_mask.get(m, 0) ^ obs_bit

    sig_x = [0] * circuit.num_qubits
    sig_z = [0] * circuit.num_qubits

    merged = {}  # signature -> [prob, sources list, hook flag]

    def record(sig, prob, source, hook):
        if sig == 0 or prob == 0.0:
            return
        entry = merged.get(sig)
        if entry is None:
            merged[sig] = [prob, [source], hook]
        else:
            entry[0] = _combine(entry[0], prob)
            entry[1].append(source)
            entry[2] = entry[2] or hook

    def pauli_sig(p, q):
        if p == "X":
            return sig_x[q]
        if p == "Z":
            return sig_z[q]
        if p == "Y":
            return sig_x[q] ^ sig_z[q]
        return 0

    meas_index = circuit.num_measurements
    for ins in reversed(circuit.instructions):
        if isinstance(ins, Measure):
            meas_index -= 1
            mask = meas_mask.get(meas_index, 0)
            if ins.basis == "Z":
                sig_x[ins.qubit] ^= mask
            else:
                sig_z[ins.qubit] ^= mask
        elif isinstance(ins, Reset):
            sig_x[ins.qubit] = 0
            sig_z[ins.qubit] = 0
        elif isinstance(ins, Gate2):
            c, t = ins.control, ins.target
            if ins.kind == "CX":
                sig_x[c] ^= sig_x[t]
                sig_z[t] ^= sig_z[c]
            else:  # CY
                new_xc = sig_x[c] ^ sig_x[t] ^ sig_z[t]
                new_xt = sig_x[t] ^ sig_z[c]
                new_zt = sig_z[t] ^ sig_z[c]
                sig_x[c], sig_x[t], sig_z[t] = new_xc, new_xt, new_zt
        elif isinstance(ins, Depolarize1):
            for i, p in enumerate(_PAULIS1):
                record(
                    pauli_sig(p, ins.qubit),
                    ins.p / 3,
                    ("channel", ins.source, p, "data"),
                    False,
                )
        elif isinstance(ins, Depolarize2):
            hookable = ins.source and ins.source[0] == "gate"
            for pa, pb in _PAULIS2:
                sig = pauli_sig(pa, ins.a) ^ pauli_sig(pb, ins.b)
                hook = hookable and _is_hook_outcome(ins.source, ins.a, ins.b, pa, pb)
                record(
                    sig,
                    ins.p / 15,
                    ("channel", ins.source, pa + pb, "hook" if hook else "data"),
                    hook,
                )
        elif isinstance(ins, PauliChannel):
            record(
                pauli_sig(ins.basis, ins.qubit),
                ins.p,
                ("channel", ins.source, ins.basis, "data"),
                False,
            )

    classes = [
        FaultClass(
            prob,
            frozenset(i for i in range(num_det) if sig >> i & 1),
            bool(sig & obs_bit),
            sources=tuple(sources),
        )
        for sig, (prob, sources, hook) in merged.items()
    ]
    bases = tuple(det.basis for det in circuit.detectors)
    if any(b is None for b in bases):
        bases = None
    return DetectorErrorModel(num_det, classes, bases)


def _is_hook_outcome(source, a, b, pa, pb) -> bool:
    """Does this two-qubit depolarizing outcome act as a hook: an auxiliary
    fault mid-sequence whose induced data error has weight >= 2?

    ``source`` is ("gate", extraction, aux, data, ordinal, total).  The
    spreading Pauli on the auxiliary after gate k covers the remaining
    total - k data slots; a matching component on the gate's own data qubit
    extends that to the slot just gated, shifting the effective offset to
    k - 1.  Weight >= 2 on both representatives means 2 <= offset <= L - 2.
    """
    _, ext, aux, data, g, total = source[:6]
    pauli_aux = pa if a == aux else pb
    pauli_data = pb if a == aux else pa
    if ext in ("X", "Y"):
        spreading = pauli_aux in ("X", "Y")
        merges = pauli_data in ("X", "Y")
    else:
        spreading = pauli_aux in ("Z", "Y")
        merges = pauli_data in ("Z", "Y")
    if not spreading:
        return False
    k = g - 1 if merges else g
    return 2 <= k <= total - 2


def dem_to_text(dem: DetectorErrorModel) -> str:
    """One line per class: ``E(<prob>) D<i> D<j> ... L0``.  A leading comment
    records the detector count so empty-signature models stay parseable."""
    lines = [f"# num_detectors = {dem.num_detectors}"]
    for c in dem.fault_classes:
        parts = [f"E({c.probability!r})"]
        parts += [f"D{d}" for d in sorted(c.detectors)]
        if c.observable:
            parts.append("L0")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def parse_dem_text(text: str) -> DetectorErrorModel:
    num_det = 0
    classes = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if "num_detectors" in line:
                num_det = int(line.split("=")[1])
            continue
        if not line.startswith("E("):
            raise ValueError(f"bad DEM line: {line!r}")
        prob = float(line[2 : line.index(")")])
        dets, obs = set(), False
        for tok in line[line.index(")") + 1 :].split():
            if tok.startswith("D"):
                dets.add(int(tok[1:]))
            elif tok == "L0":
                obs = True
            else:
                raise ValueError(f"bad DEM target: {tok!r}")
        classes.append(FaultClass(prob, frozenset(dets), obs))
    num_det = max([num_det] + [max(c.detectors, default=-1) + 1 for c in classes])
    return DetectorErrorModel(num_det, classes)
