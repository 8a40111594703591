"""Benchmark circuits used by the evaluation scripts and the test suite.

All three stay inside the front end's closed gate alphabet, so rotation-style
layers are pinned to Clifford angles that have exact gate spellings (an
S-conjugated CX pair for a ZZ quarter-turn, a plain X for a half-turn mixer).
"""

from __future__ import annotations

from .ir import Circuit, GateApp, GateKind

_K = GateKind


def bernstein_vazirani(secret: str = "101101") -> Circuit:
    """Hidden-string circuit over len(secret) data qubits plus one ancilla.

    secret[i] == "1" links data qubit i to the ancilla. Data qubits are
    measured; the ancilla is left in |->.
    """
    if not secret or set(secret) - {"0", "1"}:
        raise ValueError("secret must be a non-empty bitstring")
    n = len(secret)
    anc = n
    gates: list[GateApp] = [GateApp(_K.X, (anc,)), GateApp(_K.H, (anc,))]
    gates += [GateApp(_K.H, (q,)) for q in range(n)]
    gates += [GateApp(_K.CX, (q, anc)) for q in range(n) if secret[q] == "1"]
    gates += [GateApp(_K.H, (q,)) for q in range(n)]
    gates += [GateApp(_K.MEASURE, (q,), cbit=q) for q in range(n)]
    return Circuit(n_qubits=n + 1, n_cbits=n, gates=tuple(gates))


def qaoa_ring(n: int = 4) -> Circuit:
    """Depth-1 alternating-operator circuit on an n-qubit ring at fixed
    Clifford angles: the cost layer applies a ZZ quarter-turn (CX-S-CX) per
    ring edge and the mixer layer is a half-turn (X, equal to the rotation up
    to global phase) per qubit.
    """
    if n < 3:
        raise ValueError("ring needs at least 3 qubits")
    gates: list[GateApp] = [GateApp(_K.H, (q,)) for q in range(n)]
    for a in range(n):
        b = (a + 1) % n
        gates += [
            GateApp(_K.CX, (a, b)),
            GateApp(_K.S, (b,)),
            GateApp(_K.CX, (a, b)),
        ]
    gates += [GateApp(_K.X, (q,)) for q in range(n)]
    gates += [GateApp(_K.MEASURE, (q,), cbit=q) for q in range(n)]
    return Circuit(n_qubits=n, n_cbits=n, gates=tuple(gates))


def period_toy() -> Circuit:
    """Seven-qubit toy period-finding circuit: three counting qubits drive
    controlled register permutations (controlled swaps built from CCX
    triples), followed by a small interference layer and counting-register
    measurement. Covers most of the gate alphabet.
    """
    gates: list[GateApp] = [
        GateApp(_K.X, (3,)),
        GateApp(_K.H, (0,)),
        GateApp(_K.H, (1,)),
        GateApp(_K.H, (2,)),
        # controlled swaps: counting qubit k shuffles the register
        GateApp(_K.CCX, (0, 3, 4)),
        GateApp(_K.CCX, (0, 4, 3)),
        GateApp(_K.CCX, (0, 3, 4)),
        GateApp(_K.CCX, (1, 4, 5)),
        GateApp(_K.CCX, (1, 5, 4)),
        GateApp(_K.CCX, (1, 4, 5)),
        GateApp(_K.CCX, (2, 5, 6)),
        GateApp(_K.CCX, (2, 6, 5)),
        GateApp(_K.CCX, (2, 5, 6)),
        GateApp(_K.CY, (2, 6)),
        GateApp(_K.X, (5,)),
        # interference layer on the counting register
        GateApp(_K.H, (2,)),
        GateApp(_K.CZ, (1, 2)),
        GateApp(_K.TDG, (2,)),
        GateApp(_K.H, (1,)),
        GateApp(_K.CZ, (0, 1)),
        GateApp(_K.T, (1,)),
        GateApp(_K.H, (0,)),
        GateApp(_K.SDG, (0,)),
        GateApp(_K.SWAP, (0, 2)),
        GateApp(_K.BARRIER, (0, 1, 2)),
        GateApp(_K.MEASURE, (0,), cbit=0),
        GateApp(_K.MEASURE, (1,), cbit=1),
        GateApp(_K.MEASURE, (2,), cbit=2),
    ]
    return Circuit(n_qubits=7, n_cbits=3, gates=tuple(gates))


def standard_fixtures() -> dict[str, Circuit]:
    """The three evaluation fixtures keyed by short name."""
    return {
        "bv6": bernstein_vazirani("101101"),
        "qaoa_ring4": qaoa_ring(4),
        "period7": period_toy(),
    }
