"""Dense state-vector simulator, unitary builder, and equivalence oracle.

This is the ground truth every transform in the toolkit is checked against:
exact gate matrices, exact Born-rule outcome distributions (no shot noise),
and circuit equivalence up to global phase in three modes (statevector,
unitary, distribution).

Index convention (fixed, see README): qubit 0 is the least significant bit of
a basis-state index, and classical bit 0 is the rightmost character of an
outcome bitstring. Multi-qubit gate matrices are given in operand order with
operand 0 as the most significant local bit (CX: first operand control,
second target; CCX: first two operands control).
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .ir import (
    Circuit,
    GateApp,
    GateKind,
    GateSequence,
    UNITARY_KINDS,
)

MAX_SIM_QUBITS = 24
MAX_UNITARY_QUBITS = 10

#: |inner product| threshold for statevector-mode equivalence
SV_TOL = 1e-9
#: max aligned entry deviation for unitary-mode equivalence
UNITARY_TOL = 1e-9
#: total-variation threshold for distribution-mode equivalence
DIST_TOL = 1e-9


class SimulationError(Exception):
    """Raised for contract violations: size caps, measurement misuse, mismatched circuits."""


_SQRT1_2 = 1.0 / math.sqrt(2.0)
_T_PHASE = np.exp(1j * np.pi / 4)

_MATRICES: dict[GateKind, np.ndarray] = {
    GateKind.H: _SQRT1_2 * np.array([[1, 1], [1, -1]], dtype=complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.SDG: np.array([[1, 0], [0, -1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, _T_PHASE]], dtype=complex),
    GateKind.TDG: np.array([[1, 0], [0, np.conj(_T_PHASE)]], dtype=complex),
    GateKind.SWAP: np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
    GateKind.CX: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.CY: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, -1j], [0, 0, 1j, 0]], dtype=complex
    ),
}

_ccx = np.eye(8, dtype=complex)
_ccx[[6, 7]] = _ccx[[7, 6]]
_MATRICES[GateKind.CCX] = _ccx
del _ccx


def gate_matrix(kind: GateKind) -> np.ndarray:
    """Textbook matrix of a unitary gate kind, in operand order (see module docs)."""
    if kind not in UNITARY_KINDS:
        raise SimulationError(f"{kind.value} has no unitary matrix")
    return _MATRICES[kind].copy()


def _as_gate_apps(obj: Circuit | GateSequence | Iterable[GateApp]) -> tuple[tuple[GateApp, ...], int | None]:
    """Normalize the accepted inputs to a gate list plus an implied qubit count."""
    if isinstance(obj, Circuit):
        return obj.gates, obj.n_qubits
    if isinstance(obj, GateSequence):
        gates = tuple(GateApp(kind, slots) for kind, slots in obj.gates)
        return gates, obj.n_slots
    gates = tuple(obj)
    implied = 1 + max((q for g in gates for q in g.qubits), default=0)
    return gates, implied


def _fix(view: np.ndarray, axis: int, value: int) -> np.ndarray:
    """Length-1 slice along one axis: always a writable view, never a scalar,
    and no axis is dropped (so axis numbering stays stable under nesting)."""
    idx: list = [slice(None)] * view.ndim
    idx[axis] = slice(value, value + 1)
    return view[tuple(idx)]


def _apply_1q(view: np.ndarray, axis: int, kind: GateKind) -> None:
    """In-place single-qubit gate on one tensor axis.

    Deliberately built from elementwise slice arithmetic instead of matrix
    contraction: permutations and sign/phase flips are exact, and the H
    combinations (a + b) / (a - b) cancel equal amplitudes to an exact float
    zero. BLAS-backed contractions fuse multiply-adds and lose that property,
    which the exact Born distributions rely on.
    """
    a = _fix(view, axis, 0)
    b = _fix(view, axis, 1)
    if kind is GateKind.Z:
        b *= -1
    elif kind is GateKind.S:
        b *= 1j
    elif kind is GateKind.SDG:
        b *= -1j
    elif kind is GateKind.T:
        b *= _T_PHASE
    elif kind is GateKind.TDG:
        b *= np.conj(_T_PHASE)
    elif kind is GateKind.X:
        tmp = a.copy()
        a[...] = b
        b[...] = tmp
    elif kind is GateKind.Y:
        tmp = a.copy()
        a[...] = -1j * b
        b[...] = 1j * tmp
    elif kind is GateKind.H:
        plus = (a + b) * _SQRT1_2
        minus = (a - b) * _SQRT1_2
        a[...] = plus
        b[...] = minus
    else:  # pragma: no cover - guarded by the dispatch table
        raise SimulationError(f"not a single-qubit gate: {kind.value}")


_CONTROLLED: dict[GateKind, tuple[int, GateKind]] = {
    GateKind.CX: (1, GateKind.X),
    GateKind.CY: (1, GateKind.Y),
    GateKind.CZ: (1, GateKind.Z),
    GateKind.CCX: (2, GateKind.X),
}


def _apply_gates(state: np.ndarray, gates: Sequence[GateApp], n: int) -> np.ndarray:
    """Apply unitary gates in circuit order to a tensor of shape (2,)*n (+ batch axes).

    Mutates ``state`` in place and returns it. BARRIER is a no-op; MEASURE is
    rejected. Trailing batch axes ride along untouched, which is how the
    multi-initial statevector check and the full-unitary builder are computed.
    """
    for g in gates:
        if g.kind is GateKind.BARRIER:
            continue
        if g.kind is GateKind.MEASURE:
            raise SimulationError(
                "circuit contains measurements; use measure_distribution"
            )
        axes = [n - 1 - q for q in g.qubits]
        if g.kind is GateKind.SWAP:
            ax1, ax2 = axes
            v01 = _fix(_fix(state, ax1, 0), ax2, 1)
            v10 = _fix(_fix(state, ax1, 1), ax2, 0)
            tmp = v01.copy()
            v01[...] = v10
            v10[...] = tmp
        elif g.kind in _CONTROLLED:
            n_ctl, base = _CONTROLLED[g.kind]
            view = state
            for ax in axes[:n_ctl]:
                view = _fix(view, ax, 1)
            _apply_1q(view, axes[n_ctl], base)
        else:
            _apply_1q(state, axes[0], g.kind)
    return state


def simulate(circuit: Circuit, initial: int = 0) -> np.ndarray:
    """Statevector after applying the circuit's gates to basis state ``initial``.

    The circuit must contain no measurements and at most MAX_SIM_QUBITS qubits.
    """
    n = circuit.n_qubits
    if n > MAX_SIM_QUBITS:
        raise SimulationError(f"{n} qubits exceeds the {MAX_SIM_QUBITS}-qubit simulator cap")
    if not 0 <= initial < 2**n:
        raise SimulationError(f"initial basis index {initial} out of range for {n} qubits")
    state = np.zeros(2**n, dtype=complex)
    state[initial] = 1.0
    state = _apply_gates(state.reshape((2,) * n), circuit.gates, n).reshape(-1)
    return state


def unitary_of(obj: Circuit | GateSequence | Iterable[GateApp], n_qubits: int | None = None) -> np.ndarray:
    """Full 2^n x 2^n matrix of a gate list in application order.

    The matrix for "A then B" is B @ A. Capped at MAX_UNITARY_QUBITS qubits.
    """
    gates, implied = _as_gate_apps(obj)
    n = n_qubits if n_qubits is not None else implied
    if n is None or n < 1:
        raise SimulationError("cannot infer qubit count; pass n_qubits")
    if implied is not None and n < implied:
        raise SimulationError(f"gates touch qubit {implied - 1}, beyond n_qubits={n}")
    if n > MAX_UNITARY_QUBITS:
        raise SimulationError(f"{n} qubits exceeds the {MAX_UNITARY_QUBITS}-qubit unitary cap")
    dim = 2**n
    # Batch all basis-state columns through the gate applier at once.
    basis = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    return _apply_gates(basis, gates, n).reshape(dim, dim)


def strip_measures(circuit: Circuit) -> Circuit:
    """Copy of the circuit without MEASURE gates (barriers kept)."""
    return circuit.with_gates(g for g in circuit.gates if g.kind is not GateKind.MEASURE)


def measured_pairs(circuit: Circuit) -> list[tuple[int, int]]:
    """(qubit, classical bit) measurement pairs in circuit order."""
    return [
        (g.qubits[0], g.cbit)
        for g in circuit.gates
        if g.kind is GateKind.MEASURE and g.cbit is not None
    ]


def measure_distribution(circuit: Circuit) -> dict[str, float]:
    """Exact Born-rule outcome distribution over the measured classical bits.

    No sampling: probabilities are computed from the final statevector and
    normalized by their total, so analytically exact values (0.5, 2**-n, 0)
    come out exact. Outcomes with probability exactly zero are omitted; absent
    keys read as probability 0. Bitstring convention: the lowest measured
    classical index is the rightmost character.

    Measurements may appear mid-circuit; because no gate may touch a qubit
    after it is measured (an IR invariant), deferring them to the end is exact.
    """
    pairs = measured_pairs(circuit)
    if not pairs:
        raise SimulationError("circuit has no measurements")
    if len({c for _, c in pairs}) != len(pairs):
        raise SimulationError("a classical bit is measured more than once")
    n = circuit.n_qubits
    state = simulate(strip_measures(circuit))
    probs = np.abs(state) ** 2
    del state
    probs = probs.reshape((2,) * n)
    # order measured qubits so the highest classical bit is the leftmost axis
    by_cbit = sorted(pairs, key=lambda qc: qc[1], reverse=True)
    keep_axes = [n - 1 - q for q, _ in by_cbit]
    drop_axes = tuple(ax for ax in range(n) if ax not in keep_axes)
    if drop_axes:
        probs = probs.sum(axis=drop_axes)
        keep_axes = [ax - sum(1 for d in drop_axes if d < ax) for ax in keep_axes]
    marginal = np.transpose(probs, keep_axes).reshape(-1)
    k = len(pairs)
    (nonzero,) = np.nonzero(marginal)
    # fsum gives the exact total with one final rounding, so analytically
    # clean values (0.5, 2**-n) survive the normalizing division exactly;
    # naive pairwise accumulation does not guarantee that
    total = math.fsum(float(marginal[i]) for i in nonzero)
    return {format(i, f"0{k}b"): float(marginal[i]) / total for i in nonzero}


def _phase_aligned(mat: np.ndarray) -> np.ndarray:
    """Divide by the phase of the first entry with modulus > 1e-8 (row-major scan)."""
    flat = mat.ravel()
    idx = int(np.argmax(np.abs(flat) > 1e-8))
    pivot = flat[idx]
    if abs(pivot) <= 1e-8:
        return mat
    return mat / (pivot / abs(pivot))


def proportional(u: np.ndarray, v: np.ndarray, tol: float = UNITARY_TOL) -> tuple[bool, complex]:
    """Is u == phase * v for a unit-modulus scalar phase? Returns (ok, phase)."""
    if u.shape != v.shape:
        return False, 0j
    flat_v = v.ravel()
    idx = int(np.argmax(np.abs(flat_v) > 1e-8))
    pivot = flat_v[idx]
    if abs(pivot) <= 1e-8:
        return bool(np.max(np.abs(u)) <= tol), 1 + 0j
    phase = complex(u.ravel()[idx] / pivot)
    ok = abs(abs(phase) - 1) <= tol and float(np.max(np.abs(u - phase * v))) <= tol
    return ok, phase


def _statevector_check(c1: Circuit, c2: Circuit) -> tuple[bool, float]:
    n = c1.n_qubits
    if n > MAX_SIM_QUBITS:
        raise SimulationError(f"{n} qubits exceeds the {MAX_SIM_QUBITS}-qubit simulator cap")
    step = (2**n) // 16
    indices = sorted({0} | {k * step for k in range(16)})
    dim = 2**n
    # chunk the batched initial states so memory stays bounded at large n
    per_chunk = max(1, 2**22 // dim)
    fidelity = 1.0
    for lo in range(0, len(indices), per_chunk):
        chunk = indices[lo : lo + per_chunk]
        batch = np.zeros((dim, len(chunk)), dtype=complex)
        for col, idx in enumerate(chunk):
            batch[idx, col] = 1.0
        shaped = batch.reshape((2,) * n + (len(chunk),))
        out1 = _apply_gates(shaped.copy(), c1.gates, n).reshape(dim, len(chunk))
        out2 = _apply_gates(shaped, c2.gates, n).reshape(dim, len(chunk))
        overlaps = np.abs(np.sum(np.conj(out1) * out2, axis=0))
        fidelity = min(fidelity, float(overlaps.min()))
    return fidelity >= 1.0 - SV_TOL, fidelity


def _unitary_check(c1: Circuit, c2: Circuit) -> tuple[bool, float]:
    n = c1.n_qubits
    if n > MAX_UNITARY_QUBITS:
        raise SimulationError(
            f"unitary mode needs <= {MAX_UNITARY_QUBITS} qubits, got {n}"
        )
    u1 = unitary_of(c1)
    u2 = unitary_of(c2)
    deviation = float(np.max(np.abs(_phase_aligned(u1) - _phase_aligned(u2))))
    fidelity = float(abs(np.trace(u1.conj().T @ u2)) / 2**n)
    return deviation <= UNITARY_TOL, fidelity


def _distribution_check(c1: Circuit, c2: Circuit) -> tuple[bool, float]:
    d1 = measure_distribution(c1)
    d2 = measure_distribution(c2)
    keys = set(d1) | set(d2)
    tv = 0.5 * sum(abs(d1.get(k, 0.0) - d2.get(k, 0.0)) for k in keys)
    return tv <= DIST_TOL, 1.0 - tv


def equivalent(c1: Circuit, c2: Circuit, mode: str = "statevector") -> tuple[bool, float]:
    """Decide circuit equivalence up to global phase; returns (equal, fidelity).

    Modes:
      * ``statevector`` - |<psi1|psi2>| >= 1 - 1e-9 from |0...0> and from 16
        deterministic additional basis states (indices k * floor(2**n / 16));
        measurements are stripped first. Fidelity is the worst overlap.
      * ``unitary``     - max entry deviation after global-phase alignment
        <= 1e-9 (n <= 10); fidelity is |tr(U1^dagger U2)| / 2**n.
      * ``distribution`` - total-variation distance of exact outcome
        distributions <= 1e-9; fidelity is 1 - TV.
    """
    if c1.n_qubits != c2.n_qubits:
        raise SimulationError(
            f"qubit-count mismatch: {c1.n_qubits} vs {c2.n_qubits}"
        )
    if mode == "statevector":
        return _statevector_check(strip_measures(c1), strip_measures(c2))
    if mode == "unitary":
        return _unitary_check(strip_measures(c1), strip_measures(c2))
    if mode == "distribution":
        return _distribution_check(c1, c2)
    raise SimulationError(f"unknown equivalence mode {mode!r}")
