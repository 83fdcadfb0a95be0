"""Stabilizer-tableau reference simulator.

Full Aaronson-Gottesman tableau over destabilizer/stabilizer rows.  Slow and
small, used as the ground-truth oracle for the frame sampler: forced Pauli
faults are applied as sign flips, measurements report whether their outcome
was deterministic, and randomness is resolved canonically (outcome 0) or by
a supplied RNG.

Detector and observable parities are deterministic in both the clean and the
faulted execution, so XORing the parities of two canonical runs yields the
exact flip record of the fault set regardless of how the intermediate random
outcomes were resolved.
"""

from __future__ import annotations

import numpy as np

from .circuit import CircuitIR, Gate2, Measure, Reset, Tick
from .sim import ShotRecord

__all__ = ["TableauSimulator", "tableau_reference", "measurement_determinism"]


class TableauSimulator:
    def __init__(self, num_qubits: int, max_qubits: int = 40):
        if num_qubits > max_qubits:
            raise ValueError(
                f"{num_qubits} qubits exceeds the tableau limit of {max_qubits}"
            )
        n = self.n = num_qubits
        # rows 0..n-1 destabilizers, n..2n-1 stabilizers, 2n scratch
        self.x = np.zeros((2 * n + 1, n), dtype=np.int8)
        self.z = np.zeros((2 * n + 1, n), dtype=np.int8)
        self.r = np.zeros(2 * n + 1, dtype=np.int8)
        for i in range(n):
            self.x[i, i] = 1
            self.z[n + i, i] = 1

    # -- elementary updates --

    def _rowsum(self, h: int, i: int) -> None:
        x1, z1 = self.x[i], self.z[i]
        x2, z2 = self.x[h], self.z[h]
        # phase exponent of multiplying row i into row h, mod 4
        g = np.where(
            (x1 == 1) & (z1 == 1),
            z2.astype(np.int32) - x2,
            np.where(
                (x1 == 1) & (z1 == 0),
                z2 * (2 * x2 - 1),
                np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2), 0),
            ),
        ).sum()
        tot = 2 * int(self.r[h]) + 2 * int(self.r[i]) + int(g)
        assert tot % 2 == 0
        self.r[h] = (tot % 4) // 2
        self.x[h] ^= x1
        self.z[h] ^= z1

    def h(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def cx(self, c: int, t: int) -> None:
        self.r ^= self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def cy(self, c: int, t: int) -> None:
        # CY = S_t CX(c,t) S_t^dagger
        self.s(t)
        self.s(t)
        self.s(t)
        self.cx(c, t)
        self.s(t)

    def pauli(self, q: int, kind: str) -> None:
        if kind in ("Z", "Y"):
            self.r ^= self.x[:, q]
        if kind in ("X", "Y"):
            self.r ^= self.z[:, q]

    # -- measurement and reset --

    def measure_z(self, q: int, rng=None):
        n = self.n
        anti = np.nonzero(self.x[n : 2 * n, q])[0]
        if anti.size:
            p = n + int(anti[0])
            for i in np.nonzero(self.x[:, q])[0]:
                if i != p and i < 2 * n:
                    self._rowsum(int(i), p)
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r[p - n] = self.r[p]
            self.x[p] = 0
            self.z[p] = 0
            self.z[p, q] = 1
            outcome = int(rng.integers(2)) if rng is not None else 0
            self.r[p] = outcome
            return outcome, False
        self.x[2 * n] = 0
        self.z[2 * n] = 0
        self.r[2 * n] = 0
        for i in range(n):
            if self.x[i, q]:
                self._rowsum(2 * n, i + n)
        return int(self.r[2 * n]), True

    def measure_x(self, q: int, rng=None):
        self.h(q)
        out = self.measure_z(q, rng)
        self.h(q)
        return out

    def reset_z(self, q: int, rng=None) -> None:
        m, _ = self.measure_z(q, rng)
        if m:
            self.pauli(q, "X")

    def reset_x(self, q: int, rng=None) -> None:
        m, _ = self.measure_x(q, rng)
        if m:
            self.pauli(q, "Z")


def _run(circuit: CircuitIR, faults, rng=None, max_qubits: int = 40):
    """Execute, applying forced (position, qubit, pauli) faults; returns
    measurement bits and determinism flags."""
    sim = TableauSimulator(circuit.num_qubits, max_qubits=max_qubits)
    pending = {}
    for pos, q, pauli in faults:
        pending.setdefault(pos, []).append((q, pauli))
    bits, flags = [], []
    for pos, ins in enumerate(list(circuit.instructions) + [None]):
        for q, pauli in pending.get(pos, ()):
            sim.pauli(q, pauli)
        if ins is None or isinstance(ins, Tick):
            continue
        if isinstance(ins, Reset):
            if ins.basis == "Z":
                sim.reset_z(ins.qubit, rng)
            else:
                sim.reset_x(ins.qubit, rng)
        elif isinstance(ins, Measure):
            m, det = (
                sim.measure_z(ins.qubit, rng)
                if ins.basis == "Z"
                else sim.measure_x(ins.qubit, rng)
            )
            bits.append(m)
            flags.append(det)
        elif isinstance(ins, Gate2):
            if ins.kind == "CX":
                sim.cx(ins.control, ins.target)
            else:
                sim.cy(ins.control, ins.target)
        else:
            raise ValueError(
                "tableau oracle expects a noiseless circuit; "
                f"found {type(ins).__name__}"
            )
    return bits, flags


def _parities(circuit: CircuitIR, bits):
    det_bits = 0
    for j, det in enumerate(circuit.detectors):
        parity = 0
        for m in det.measurements:
            parity ^= bits[m]
        det_bits |= parity << j
    obs = 0
    for m in circuit.observable:
        obs ^= bits[m]
    return det_bits, obs


def tableau_reference(circuit: CircuitIR, forced_faults=(), max_qubits: int = 40) -> ShotRecord:
    """Exact detector/observable flip record of a forced fault set.

    Both the clean and the faulted execution resolve random outcomes
    canonically; detector and observable parities are deterministic, so
    their XOR is the fault record."""
    clean_bits, _ = _run(circuit, (), max_qubits=max_qubits)
    fault_bits, _ = _run(circuit, forced_faults, max_qubits=max_qubits)
    cd, co = _parities(circuit, clean_bits)
    fd, fo = _parities(circuit, fault_bits)
    return ShotRecord(cd ^ fd, co ^ fo)


def measurement_determinism(circuit: CircuitIR, max_qubits: int = 40):
    """Per-measurement determinism flags of the noiseless circuit."""
    _, flags = _run(circuit, (), max_qubits=max_qubits)
    return flags


def detector_parities_are_deterministic(
    circuit: CircuitIR, trials: int = 20, seed: int = 0, max_qubits: int = 40
) -> bool:
    """Randomized check that every detector parity (and the observable) is
    constant across runs with independently resolved random outcomes."""
    ref = None
    for t in range(trials):
        rng = np.random.default_rng(seed + t)
        bits, _ = _run(circuit, (), rng=rng, max_qubits=max_qubits)
        par = _parities(circuit, bits)
        if ref is None:
            ref = par
        elif par != ref:
            return False
    return True
