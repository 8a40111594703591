"""Circuit intermediate representation shared by every transform and oracle.

A Circuit is an immutable ordered list of gate applications over flat qubit
and classical-bit index spaces (registers are flattened on parse). Provenance
tags (original / inserted / substituted), composite-box ids and substitution
groups are internal metadata: they never survive QASM emission, and exist so
tests can check that transforms only touch what they claim to touch.

Conventions:
  * qubit 0 is the least significant bit of a basis-state index;
  * BARRIER is variadic (any number of distinct qubits) and is not a unitary:
    it forces a layer boundary in ``depth`` and is excluded from gate totals.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping

from .diagnostics import Diagnostic


class GateKind(Enum):
    H = "h"
    X = "x"
    Y = "y"
    Z = "z"
    S = "s"
    SDG = "sdg"
    T = "t"
    TDG = "tdg"
    SWAP = "swap"
    CX = "cx"
    CZ = "cz"
    CY = "cy"
    CCX = "ccx"
    MEASURE = "measure"
    BARRIER = "barrier"


#: qubit arity per kind; BARRIER is variadic (None).
ARITY: dict[GateKind, int | None] = {
    GateKind.H: 1,
    GateKind.X: 1,
    GateKind.Y: 1,
    GateKind.Z: 1,
    GateKind.S: 1,
    GateKind.SDG: 1,
    GateKind.T: 1,
    GateKind.TDG: 1,
    GateKind.SWAP: 2,
    GateKind.CX: 2,
    GateKind.CZ: 2,
    GateKind.CY: 2,
    GateKind.CCX: 3,
    GateKind.MEASURE: 1,
    GateKind.BARRIER: None,
}

UNITARY_KINDS = frozenset(
    k for k in GateKind if k not in (GateKind.MEASURE, GateKind.BARRIER)
)

ORIGINS = ("original", "inserted", "substituted")


@dataclass(frozen=True)
class GateApp:
    """One gate application.

    ``cbit`` is set only for MEASURE. ``box`` groups gates into a composite
    box (emitted as comment markers); ``group`` ties substituted gates back to
    the original gate they replaced (see Circuit.subst_originals).
    """

    kind: GateKind
    qubits: tuple[int, ...]
    cbit: int | None = None
    origin: str = "original"
    box: int | None = None
    group: int | None = None

    @property
    def signature(self) -> tuple:
        """Structural identity: kind, operands, classical target."""
        return (self.kind, self.qubits, self.cbit)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    n_cbits: int = 0
    gates: tuple[GateApp, ...] = ()
    boxes: Mapping[int, str] = field(default_factory=dict)
    #: substitution-group id -> the original gate the group replaced
    subst_originals: Mapping[int, GateApp] = field(default_factory=dict)

    def with_gates(self, gates: Iterable[GateApp], **updates) -> "Circuit":
        return replace(self, gates=tuple(gates), **updates)


@dataclass(frozen=True)
class GateSequence:
    """A named gate sequence over relative qubit slots.

    Used for insertion pairs, composite blocks, substitution replacements and
    delayed wrappers. ``gates`` entries are (kind, slot tuple); slot indices
    are remapped onto concrete qubits when the sequence is applied.
    """

    name: str
    gates: tuple[tuple[GateKind, tuple[int, ...]], ...]

    @property
    def n_slots(self) -> int:
        return 1 + max(s for _, slots in self.gates for s in slots)


@dataclass(frozen=True)
class GateCounts:
    counts: Mapping[GateKind, int]
    total: int

    def of(self, kind: GateKind) -> int:
        return self.counts.get(kind, 0)


def validate(circuit: Circuit) -> list[Diagnostic]:
    """Check all structural invariants; returns [] iff the circuit is well formed.

    Violations are reported, not raised, so malformed circuits can be
    inspected. Checks: index ranges, operand arity and distinctness, MEASURE
    classical targets (present, in range, written once), and that no gate
    touches a qubit after that qubit has been measured.
    """
    diags: list[Diagnostic] = []

    def err(msg: str) -> None:
        diags.append(Diagnostic("error", msg))

    if circuit.n_qubits < 1:
        err(f"circuit must declare at least one qubit (got {circuit.n_qubits})")
    if circuit.n_cbits < 0:
        err(f"negative classical register size {circuit.n_cbits}")

    measured: set[int] = set()
    written_cbits: set[int] = set()
    for pos, g in enumerate(circuit.gates):
        where = f"gate {pos} ({g.kind.value})"
        arity = ARITY[g.kind]
        if arity is not None and len(g.qubits) != arity:
            err(f"{where}: expected {arity} qubit operand(s), got {len(g.qubits)}")
        if g.kind is GateKind.BARRIER and not g.qubits:
            err(f"{where}: barrier needs at least one qubit")
        if len(set(g.qubits)) != len(g.qubits):
            err(f"{where}: duplicate qubit operand")
        for q in g.qubits:
            if not 0 <= q < circuit.n_qubits:
                err(f"{where}: qubit index {q} out of range [0, {circuit.n_qubits})")
            elif q in measured and g.kind is not GateKind.BARRIER:
                err(f"{where}: gate after measurement of qubit {q}")
        if g.kind is GateKind.MEASURE:
            if g.cbit is None:
                err(f"{where}: measurement without classical target")
            elif not 0 <= g.cbit < circuit.n_cbits:
                err(f"{where}: classical index {g.cbit} out of range [0, {circuit.n_cbits})")
            elif g.cbit in written_cbits:
                err(f"{where}: classical bit {g.cbit} measured twice")
            else:
                written_cbits.add(g.cbit)
            measured.update(q for q in g.qubits if 0 <= q < circuit.n_qubits)
        elif g.cbit is not None:
            err(f"{where}: classical target on a non-measurement gate")
        if g.box is not None and g.box not in circuit.boxes:
            err(f"{where}: box id {g.box} missing from box table")
    return diags


def depth(circuit: Circuit) -> int:
    """Greedy layer-packed circuit depth.

    Gates touching disjoint qubits share a layer; MEASURE costs one layer on
    its qubit; BARRIER synchronizes its qubits' timelines without occupying a
    layer itself.
    """
    clocks = [0] * circuit.n_qubits
    for g in circuit.gates:
        if g.kind is GateKind.BARRIER:
            sync = max(clocks[q] for q in g.qubits)
            for q in g.qubits:
                clocks[q] = sync
        else:
            layer = 1 + max(clocks[q] for q in g.qubits)
            for q in g.qubits:
                clocks[q] = layer
    return max(clocks, default=0)


def gate_count(circuit: Circuit) -> GateCounts:
    """Histogram of gate kinds. BARRIER appears in the map but not the total."""
    counts = Counter(g.kind for g in circuit.gates)
    total = sum(n for k, n in counts.items() if k is not GateKind.BARRIER)
    return GateCounts(counts=dict(counts), total=total)


def flatten(circuit: Circuit) -> Circuit:
    """Drop all composite-box grouping; gate order and identity are unchanged."""
    if not circuit.boxes and all(g.box is None for g in circuit.gates):
        return circuit
    return replace(
        circuit,
        gates=tuple(replace(g, box=None) for g in circuit.gates),
        boxes={},
    )


def same_gates(a: Circuit, b: Circuit) -> bool:
    """Gate-for-gate structural equality, ignoring provenance and boxes."""
    return (
        a.n_qubits == b.n_qubits
        and a.n_cbits == b.n_cbits
        and len(a.gates) == len(b.gates)
        and all(x.signature == y.signature for x, y in zip(a.gates, b.gates))
    )
