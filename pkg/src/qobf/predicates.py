"""Quantum opaque-predicate generators.

Each generator returns a PredicateCircuit: the circuit itself plus an
analytic outcome model (which measurement keys are live, dead, or trigger a
restart, or which amplitudes must be present). The model is oracle-checked at
construction time, so a PredicateCircuit in hand is already proven to behave
as advertised.

Four kinds:
  * bell       - one entangled pair; keys 00/11 live with probability 1/2
                 each, 01/10 dead (probability exactly zero)
  * multi_pair - n independent entangled pairs; the all-ones key has
                 probability exactly 2**-n and backs a restart/false branch
  * shroud     - one qubit in equal superposition, never measured; branches
                 guard on the amplitudes directly, so both are always live
  * branch     - a five-qubit circuit in two disconnected segments whose
                 interference forces the (c2, c3) key to "11" deterministically
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .ir import Circuit, GateApp, GateKind
from .sim import measure_distribution, simulate, strip_measures

PREDICATE_KINDS = ("bell", "multi_pair", "shroud", "branch")

MODEL_TOL = 1e-12

#: key used in outcome->branch maps for "every other outcome"
ELSE_KEY = "else"


class PredicateError(ValueError):
    """Bad generator parameters."""


class ModelMismatchError(AssertionError):
    """The oracle-computed behavior disagrees with the analytic model: a construction bug."""


@dataclass(frozen=True)
class BranchSemantics:
    """Analytic outcome model of a predicate.

    For ``kind == "measured"``, keys are bitstrings over ``key_cbits`` (lowest
    classical index rightmost). ``real_outcomes`` of None means "every key not
    listed as dead or restart" (an else-branch). Dead keys have probability
    exactly zero; restart keys may have nonzero probability (multi_pair's
    all-ones branch). For ``kind == "amplitude_read"`` the model instead
    records the expected statevector amplitudes; all amplitude-guarded
    branches are live.
    """

    kind: str  # "measured" | "amplitude_read"
    key_cbits: tuple[int, ...] = ()
    real_outcomes: frozenset[str] | None = None
    dead_outcomes: frozenset[str] = frozenset()
    restart_outcomes: frozenset[str] = frozenset()
    amplitudes: tuple[complex, ...] | None = None


@dataclass(frozen=True)
class PredicateCircuit:
    circuit: Circuit
    kind: str
    semantics: BranchSemantics
    params: Mapping[str, int]


def key_marginal(dist: dict[str, float], key_cbits: tuple[int, ...],
                 measured_cbits: tuple[int, ...]) -> dict[str, float]:
    """Marginalize a measured distribution onto a subset of classical bits.

    Key strings follow the same convention as distributions: the lowest
    classical index in ``key_cbits`` is the rightmost character.
    """
    order = sorted(measured_cbits, reverse=True)
    positions = {c: i for i, c in enumerate(order)}
    wanted = sorted(key_cbits, reverse=True)
    out: dict[str, float] = {}
    for outcome, p in dist.items():
        key = "".join(outcome[positions[c]] for c in wanted)
        out[key] = out.get(key, 0.0) + p
    return out


def _measured_cbits(circuit: Circuit) -> tuple[int, ...]:
    return tuple(g.cbit for g in circuit.gates if g.kind is GateKind.MEASURE)


def _check_measured_model(p: PredicateCircuit) -> dict[str, float]:
    dist = measure_distribution(p.circuit)
    sem = p.semantics
    keyed = key_marginal(dist, sem.key_cbits, _measured_cbits(p.circuit))
    for dead in sem.dead_outcomes:
        if keyed.get(dead, 0.0) != 0.0:
            raise ModelMismatchError(f"dead key {dead!r} has probability {keyed[dead]}")
    live_total = sum(v for k, v in keyed.items() if k not in sem.restart_outcomes)
    restart_total = sum(keyed.get(k, 0.0) for k in sem.restart_outcomes)
    if abs(live_total + restart_total - 1.0) > MODEL_TOL:
        raise ModelMismatchError("keyed probabilities do not sum to 1")
    if sem.real_outcomes is not None:
        covered = sum(keyed.get(k, 0.0) for k in sem.real_outcomes) + restart_total
        if abs(covered - 1.0) > MODEL_TOL:
            raise ModelMismatchError("live keys do not carry all probability")
    return dist


def _check_amplitude_model(p: PredicateCircuit) -> tuple[complex, ...]:
    state = simulate(strip_measures(p.circuit))
    expected = p.semantics.amplitudes
    if expected is None or len(expected) != len(state):
        raise ModelMismatchError("amplitude model missing or of wrong length")
    if float(np.max(np.abs(state - np.array(expected)))) > MODEL_TOL:
        raise ModelMismatchError("amplitudes disagree with the analytic model")
    return tuple(state)


def outcome_model(p: PredicateCircuit) -> dict[str, float] | tuple[complex, ...]:
    """Recompute the predicate's behavior with the simulator and cross-check
    it against the stored semantics; any disagreement beyond 1e-12 raises
    ModelMismatchError. Returns the exact distribution (measured kinds) or the
    statevector amplitudes (shroud).
    """
    if p.semantics.kind == "measured":
        return _check_measured_model(p)
    return _check_amplitude_model(p)


def bell_predicate() -> PredicateCircuit:
    """Entangle one pair and measure it: outcomes 00 and 11 only, equal odds."""
    circuit = Circuit(
        n_qubits=2,
        n_cbits=2,
        gates=(
            GateApp(GateKind.H, (0,)),
            GateApp(GateKind.CX, (0, 1)),
            GateApp(GateKind.MEASURE, (0,), cbit=0),
            GateApp(GateKind.MEASURE, (1,), cbit=1),
        ),
    )
    sem = BranchSemantics(
        kind="measured",
        key_cbits=(0, 1),
        real_outcomes=frozenset({"00", "11"}),
        dead_outcomes=frozenset({"01", "10"}),
    )
    p = PredicateCircuit(circuit, "bell", sem, {})
    outcome_model(p)
    return p


def multi_pair_predicate(n_pairs: int) -> PredicateCircuit:
    """n independent entangled pairs, all qubits measured.

    P(all bits 1) = 2**-n exactly; that key backs the false/restart branch
    while every other observable key is live. Keys with a broken pair (01 or
    10 within a pair) are dead with probability exactly zero.
    """
    if not 1 <= n_pairs <= 12:
        raise PredicateError(f"n_pairs must be in 1..12, got {n_pairs}")
    gates: list[GateApp] = []
    for i in range(n_pairs):
        gates.append(GateApp(GateKind.H, (2 * i,)))
        gates.append(GateApp(GateKind.CX, (2 * i, 2 * i + 1)))
    for q in range(2 * n_pairs):
        gates.append(GateApp(GateKind.MEASURE, (q,), cbit=q))
    circuit = Circuit(n_qubits=2 * n_pairs, n_cbits=2 * n_pairs, gates=tuple(gates))
    sem = BranchSemantics(
        kind="measured",
        key_cbits=tuple(range(2 * n_pairs)),
        real_outcomes=None,  # else-branch: anything that is not all ones
        restart_outcomes=frozenset({"1" * (2 * n_pairs)}),
    )
    p = PredicateCircuit(circuit, "multi_pair", sem, {"n_pairs": n_pairs})
    dist = outcome_model(p)
    assert isinstance(dist, dict)
    if dist.get("1" * (2 * n_pairs)) != 2.0**-n_pairs:
        raise ModelMismatchError("all-ones probability is not exactly 2**-n")
    return p


def shroud_predicate() -> PredicateCircuit:
    """One qubit in equal superposition, never measured.

    Consumers read the statevector amplitudes instead of measuring, so code
    guarded on the presence of the |0> component and code guarded on the |1>
    component both run.
    """
    amp = 1.0 / math.sqrt(2.0)
    circuit = Circuit(n_qubits=1, gates=(GateApp(GateKind.H, (0,)),))
    sem = BranchSemantics(
        kind="amplitude_read",
        real_outcomes=frozenset({"0", "1"}),
        amplitudes=(complex(amp), complex(amp)),
    )
    p = PredicateCircuit(circuit, "shroud", sem, {})
    outcome_model(p)
    return p


_DECOY_1Q = (GateKind.H, GateKind.X, GateKind.Y, GateKind.Z,
             GateKind.S, GateKind.SDG, GateKind.T, GateKind.TDG)
_DECOY_2Q = (GateKind.SWAP, GateKind.CX, GateKind.CZ, GateKind.CY)


def branch_predicate(seed: int = 0) -> PredicateCircuit:
    """Five-qubit deterministic-branch predicate in two disconnected segments.

    The core segment on q2, q3, q4 sandwiches Z(q4) and two CNOTs onto the
    ancilla q4 between Hadamard walls; interference cancels every outcome
    except q2 = q3 = 1, so the (c2, c3) key is "11" with probability one. The
    decoy segment on q0, q1 is 4-8 seeded random gates, measured but ignored
    (never touching q2, q3 or q4). The ancilla q4 stays unmeasured.
    """
    rng = random.Random(seed)
    gates: list[GateApp] = []
    for _ in range(rng.randint(4, 8)):
        if rng.random() < 0.5:
            gates.append(GateApp(rng.choice(_DECOY_1Q), (rng.randrange(2),)))
        else:
            a, b = rng.sample((0, 1), 2)
            gates.append(GateApp(rng.choice(_DECOY_2Q), (a, b)))
    gates += [
        GateApp(GateKind.H, (2,)),
        GateApp(GateKind.H, (3,)),
        GateApp(GateKind.H, (4,)),
        GateApp(GateKind.Z, (4,)),
        GateApp(GateKind.CX, (2, 4)),
        GateApp(GateKind.CX, (3, 4)),
        GateApp(GateKind.H, (2,)),
        GateApp(GateKind.H, (3,)),
        GateApp(GateKind.H, (4,)),
    ]
    for q in range(4):
        gates.append(GateApp(GateKind.MEASURE, (q,), cbit=q))
    circuit = Circuit(n_qubits=5, n_cbits=4, gates=tuple(gates))
    sem = BranchSemantics(
        kind="measured",
        key_cbits=(2, 3),
        real_outcomes=frozenset({"11"}),
        dead_outcomes=frozenset({"00", "01", "10"}),
    )
    p = PredicateCircuit(circuit, "branch", sem, {"seed": seed})
    outcome_model(p)
    return p


def make_predicate(kind: str, params: Mapping[str, int] | None = None) -> PredicateCircuit:
    """Build a predicate by kind name (used by the wrapper and the CLI)."""
    params = dict(params or {})
    if kind == "bell":
        return bell_predicate()
    if kind == "multi_pair":
        return multi_pair_predicate(int(params.get("n_pairs", 8)))
    if kind == "shroud":
        return shroud_predicate()
    if kind == "branch":
        return branch_predicate(int(params.get("seed", 0)))
    raise PredicateError(f"unknown predicate kind {kind!r}")
