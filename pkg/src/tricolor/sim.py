"""Pauli-frame Monte Carlo sampling of noisy stabilizer circuits.

The sampler tracks, per shot, the X and Z error masks accumulated relative
to a noiseless reference execution.  Clifford gates move the masks around,
measurements record whether the outcome is flipped, and detectors XOR those
flips.  Shots are processed in bit-parallel blocks as boolean numpy arrays.

Randomness is counter-based: the draw for (seed, shot, channel) is a hash of
those three values, so records are reproducible shot-by-shot no matter how
shots are blocked or distributed across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    CircuitIR,
    Depolarize1,
    Depolarize2,
    Gate2,
    Measure,
    PauliChannel,
    Reset,
    Tick,
)

__all__ = [
    "PauliFrame",
    "ShotRecord",
    "ShotBatch",
    "sample",
    "propagate_faults",
    "run_frame",
    "write_shots",
    "read_shots",
]


@dataclass
class PauliFrame:
    """Single-shot error record: bit q of each mask marks an X/Z component
    on qubit q; measurement flips append in measurement order."""

    x_mask: int = 0
    z_mask: int = 0
    measurement_flips: list = field(default_factory=list)


@dataclass(frozen=True)
class ShotRecord:
    detector_bits: int  # bit d set = detector d fired
    observable_bit: int


class ShotBatch:
    """Sequence of ShotRecords, stored bit-packed."""

    def __init__(self, packed, observable, num_detectors):
        self.packed = packed  # (shots, ceil(D/8)) uint8, little bit order
        self.observable = observable  # (shots,) uint8
        self.num_detectors = num_detectors

    def __len__(self):
        return self.packed.shape[0]

    def __getitem__(self, i) -> ShotRecord:
        row = self.packed[i]
        return ShotRecord(
            int.from_bytes(row.tobytes(), "little"), int(self.observable[i])
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def detector_ints(self):
        rows = self.packed
        for i in range(rows.shape[0]):
            yield int.from_bytes(rows[i].tobytes(), "little")

    @property
    def nonzero_fraction(self) -> float:
        return float((self.packed.any(axis=1)).mean()) if len(self) else 0.0


# --- counter-based RNG -------------------------------------------------------

_MASK = (1 << 64) - 1
_C0 = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB


def _mix_int(v: int) -> int:
    v = (v + _C0) & _MASK
    v = ((v ^ (v >> 30)) * _C1) & _MASK
    v = ((v ^ (v >> 27)) * _C2) & _MASK
    return v ^ (v >> 31)


def _mix_array(v):
    with np.errstate(over="ignore"):
        v = v + np.uint64(_C0)
        v = (v ^ (v >> np.uint64(30))) * np.uint64(_C1)
        v = (v ^ (v >> np.uint64(27))) * np.uint64(_C2)
        return v ^ (v >> np.uint64(31))


def channel_uniforms(seed: int, channel: int, shot0: int, count: int):
    """Uniform [0, 1) draws for shots shot0..shot0+count-1 of one channel."""
    key = _mix_int(_mix_int(seed & _MASK) ^ ((channel + 1) * _C0 & _MASK))
    idx = np.arange(shot0, shot0 + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        v = _mix_array(idx ^ np.uint64(key))
        v = _mix_array(v + np.uint64(_mix_int(key)))
    return (v >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


# outcome lookup tables: index 0..14 picks a two-qubit Pauli, 15 = no fault
_P2 = [
    (a, b)
    for a in ("I", "X", "Y", "Z")
    for b in ("I", "X", "Y", "Z")
    if (a, b) != ("I", "I")
]
_LUT_AX = np.array([p[0] in "XY" for p in _P2] + [False])
_LUT_AZ = np.array([p[0] in "YZ" for p in _P2] + [False])
_LUT_BX = np.array([p[1] in "XY" for p in _P2] + [False])
_LUT_BZ = np.array([p[1] in "YZ" for p in _P2] + [False])
_LUT1_X = np.array([True, True, False, False])  # X, Y, Z, none
_LUT1_Z = np.array([False, True, True, False])


def _compile(circuit: CircuitIR):
    ops = []
    meas_index = 0
    channel_index = 0
    for ins in circuit.instructions:
        if isinstance(ins, Tick):
            continue
        if isinstance(ins, Reset):
            ops.append(("reset", ins.qubit))
        elif isinstance(ins, Measure):
            ops.append(("meas", ins.qubit, ins.basis, meas_index))
            meas_index += 1
        elif isinstance(ins, Gate2):
            ops.append(("cx" if ins.kind == "CX" else "cy", ins.control, ins.target))
        else:
            ops.append(("chan", channel_index, ins))
            channel_index += 1
    return ops, meas_index


def sample(circuit: CircuitIR, shots: int, seed: int, block_size: int = 16384) -> ShotBatch:
    """Monte Carlo sample of detector and observable flips.

    Deterministic in (seed, shot index); blocks are an implementation detail.
    """
    ops, num_meas = _compile(circuit)
    dets = [np.array(d.measurements, dtype=np.intp) for d in circuit.detectors]
    obs = np.array(circuit.observable, dtype=np.intp)
    nq = circuit.num_qubits
    ndet = circuit.num_detectors

    packed_blocks = []
    obs_blocks = []
    for shot0 in range(0, shots, block_size):
        s = min(block_size, shots - shot0)
        x = np.zeros((nq, s), dtype=bool)
        z = np.zeros((nq, s), dtype=bool)
        meas = np.zeros((num_meas, s), dtype=bool)
        for op in ops:
            tag = op[0]
            if tag == "cx":
                _, c, t = op
                x[t] ^= x[c]
                z[c] ^= z[t]
            elif tag == "chan":
                _, ci, ins = op
                _apply_channel(ins, x, z, seed, ci, shot0, s)
            elif tag == "meas":
                _, q, basis, k = op
                meas[k] = x[q] if basis == "Z" else z[q]
            elif tag == "reset":
                _, q = op
                x[q] = False
                z[q] = False
            else:  # cy
                _, c, t = op
                z[c] ^= x[t] ^ z[t]
                x[t] ^= x[c]
                z[t] ^= x[c]
        det_rows = np.zeros((ndet, s), dtype=bool)
        for j, refs in enumerate(dets):
            det_rows[j] = np.bitwise_xor.reduce(meas[refs], axis=0)
        obs_row = (
            np.bitwise_xor.reduce(meas[obs], axis=0)
            if obs.size
            else np.zeros(s, dtype=bool)
        )
        packed_blocks.append(
            np.packbits(det_rows.T, axis=1, bitorder="little")
            if ndet
            else np.zeros((s, 0), dtype=np.uint8)
        )
        obs_blocks.append(obs_row.astype(np.uint8))

    packed = np.concatenate(packed_blocks) if packed_blocks else np.zeros((0, 0), np.uint8)
    observable = np.concatenate(obs_blocks) if obs_blocks else np.zeros(0, np.uint8)
    return ShotBatch(packed, observable, ndet)


def _apply_channel(ins, x, z, seed, ci, shot0, s):
    p = ins.p
    if p <= 0.0:
        return
    u = channel_uniforms(seed, ci, shot0, s)
    fire = u < p
    if isinstance(ins, PauliChannel):
        if ins.basis == "X":
            x[ins.qubit] ^= fire
        else:
            z[ins.qubit] ^= fire
    elif isinstance(ins, Depolarize1):
        idx = np.where(fire, np.minimum((u * (3.0 / p)).astype(np.int8), 2), 3)
        x[ins.qubit] ^= _LUT1_X[idx]
        z[ins.qubit] ^= _LUT1_Z[idx]
    else:
        idx = np.where(fire, np.minimum((u * (15.0 / p)).astype(np.int8), 14), 15)
        x[ins.a] ^= _LUT_AX[idx]
        z[ins.a] ^= _LUT_AZ[idx]
        x[ins.b] ^= _LUT_BX[idx]
        z[ins.b] ^= _LUT_BZ[idx]


def run_frame(circuit: CircuitIR, faults) -> PauliFrame:
    """Propagate forced Pauli faults through the circuit, ignoring stochastic
    channels.  ``faults`` holds (position, qubit, pauli) triples; the fault
    is applied just before ``circuit.instructions[position]``."""
    pending = {}
    for pos, q, pauli in faults:
        pending.setdefault(pos, []).append((q, pauli))
    frame = PauliFrame()
    for pos, ins in enumerate(list(circuit.instructions) + [None]):
        for q, pauli in pending.get(pos, ()):
            if pauli in ("X", "Y"):
                frame.x_mask ^= 1 << q
            if pauli in ("Z", "Y"):
                frame.z_mask ^= 1 << q
        if ins is None or isinstance(ins, (Tick,) + (Depolarize1, Depolarize2, PauliChannel)):
            continue
        if isinstance(ins, Reset):
            frame.x_mask &= ~(1 << ins.qubit)
            frame.z_mask &= ~(1 << ins.qubit)
        elif isinstance(ins, Measure):
            mask = frame.x_mask if ins.basis == "Z" else frame.z_mask
            frame.measurement_flips.append(mask >> ins.qubit & 1)
        elif isinstance(ins, Gate2):
            c, t = ins.control, ins.target
            xc = frame.x_mask >> c & 1
            xt = frame.x_mask >> t & 1
            zc = frame.z_mask >> c & 1
            zt = frame.z_mask >> t & 1
            if ins.kind == "CX":
                if xc:
                    frame.x_mask ^= 1 << t
                if zt:
                    frame.z_mask ^= 1 << c
            else:  # CY
                if xt ^ zt:
                    frame.z_mask ^= 1 << c
                if xc:
                    frame.x_mask ^= 1 << t
                    frame.z_mask ^= 1 << t
    return frame


def propagate_faults(circuit: CircuitIR, faults) -> ShotRecord:
    """ShotRecord produced by a forced fault set (no stochastic noise)."""
    frame = run_frame(circuit, faults)
    flips = frame.measurement_flips
    det_bits = 0
    for j, det in enumerate(circuit.detectors):
        parity = 0
        for m in det.measurements:
            parity ^= flips[m]
        det_bits |= parity << j
    obs = 0
    for m in circuit.observable:
        obs ^= flips[m]
    return ShotRecord(det_bits, obs)


# --- binary shot dump --------------------------------------------------------

_MAGIC = b"TCSHOT01"


def write_shots(batch: ShotBatch, fh) -> None:
    """Layout: magic, u32 shots, u32 detectors, then per shot ceil(D/8)
    detector bytes (little bit order) followed by one observable byte."""
    close = False
    if isinstance(fh, (str, bytes)):
        fh = open(fh, "wb")
        close = True
    try:
        n = len(batch)
        fh.write(_MAGIC)
        fh.write(n.to_bytes(4, "little"))
        fh.write(batch.num_detectors.to_bytes(4, "little"))
        nbytes = batch.packed.shape[1]
        for i in range(n):
            fh.write(batch.packed[i].tobytes())
            fh.write(bytes([batch.observable[i]]))
    finally:
        if close:
            fh.close()


def read_shots(fh) -> ShotBatch:
    close = False
    if isinstance(fh, (str, bytes)):
        fh = open(fh, "rb")
        close = True
    try:
        if fh.read(8) != _MAGIC:
            raise ValueError("not a shot dump")
        n = int.from_bytes(fh.read(4), "little")
        ndet = int.from_bytes(fh.read(4), "little")
        nbytes = (ndet + 7) // 8
        packed = np.zeros((n, nbytes), dtype=np.uint8)
        observable = np.zeros(n, dtype=np.uint8)
        for i in range(n):
            packed[i] = np.frombuffer(fh.read(nbytes), dtype=np.uint8)
            observable[i] = fh.read(1)[0]
        return ShotBatch(packed, observable, ndet)
    finally:
        if close:
            fh.close()
