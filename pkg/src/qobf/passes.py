"""Circuit-level obfuscation passes, all proven equivalence-preserving.

Four transforms, each a seeded deterministic Circuit -> Circuit function:

  * inverse_gates_pass   - insert adjacent (G, G_inverse) pairs at random sites
  * composite_gates_pass - insert an auxiliary/restore block pair (product is
    the identity) as composite boxes, plus decoy boxes around original gates
  * cloaked_gates_pass   - replace gates with oracle-verified equivalent
    substitution sequences
  * delayed_gates_pass   - wrap a gate block B in a sequence D on both sides;
    committed only when the oracle confirms D.B.D acts like B up to global
    phase

Insertion sites are chosen by an independent coin per site with probability
equal to ``intensity``, drawn from a generator seeded by ``seed``, so a given
(input, config) always produces byte-identical output. Gates are never placed
on a qubit after that qubit has been measured.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .ir import (
    ARITY,
    Circuit,
    GateApp,
    GateKind,
    GateSequence,
    UNITARY_KINDS,
)
from .sim import proportional, unitary_of

METHODS = ("inverse", "composite", "cloaked", "delayed")

COMMIT_TOL = 1e-9
RULE_TOL = 1e-10
MAX_DRAWS = 32


class PassWarning(UserWarning):
    """A pass could not act (no eligible site / no committable insertion)."""


class RulesetError(ValueError):
    """An unverified or malformed substitution rule reached a pass."""


@dataclass(frozen=True)
class ObfuscationConfig:
    seed: int
    intensity: float = 1.0
    method: str = "inverse"

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if not 0 < self.intensity <= 1:
            raise ValueError("intensity must lie in (0, 1]")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


def _seq(name: str, *gates: tuple[GateKind, tuple[int, ...]]) -> GateSequence:
    return GateSequence(name, tuple(gates))


def _g1(kind: GateKind) -> tuple[GateKind, tuple[int, ...]]:
    return (kind, (0,))


#: gate / inverse-gate insertion pairs (each two-gate sequence multiplies to I)
INVERSE_PAIRS: tuple[GateSequence, ...] = (
    _seq("h-h", _g1(GateKind.H), _g1(GateKind.H)),
    _seq("x-x", _g1(GateKind.X), _g1(GateKind.X)),
    _seq("z-z", _g1(GateKind.Z), _g1(GateKind.Z)),
    _seq("s-sdg", _g1(GateKind.S), _g1(GateKind.SDG)),
    _seq("t-tdg", _g1(GateKind.T), _g1(GateKind.TDG)),
    _seq("cx-cx", (GateKind.CX, (0, 1)), (GateKind.CX, (0, 1))),
    _seq("cz-cz", (GateKind.CZ, (0, 1)), (GateKind.CZ, (0, 1))),
    _seq("cy-cy", (GateKind.CY, (0, 1)), (GateKind.CY, (0, 1))),
    _seq("ccx-ccx", (GateKind.CCX, (0, 1, 2)), (GateKind.CCX, (0, 1, 2))),
)

#: the auxiliary block and the restore block that undoes it
AUXILIARY_SEQUENCE = _seq(
    "auxiliary",
    _g1(GateKind.H), _g1(GateKind.H), _g1(GateKind.Z),
    _g1(GateKind.X), _g1(GateKind.Z), _g1(GateKind.X),
)
RESTORE_SEQUENCE = _seq(
    "restore",
    _g1(GateKind.X), _g1(GateKind.Z), _g1(GateKind.X),
    _g1(GateKind.Z), _g1(GateKind.H), _g1(GateKind.H),
)

#: wrapper sequences for the delayed-cancellation pass
DELAYED_SEQUENCES: tuple[GateSequence, ...] = (
    _seq("y-s-y", _g1(GateKind.Y), _g1(GateKind.S), _g1(GateKind.Y)),
    _seq("h-s-h-s-h", *( _g1(k) for k in (GateKind.H, GateKind.S, GateKind.H, GateKind.S, GateKind.H))),
    _seq("x-h-z-h-x", *( _g1(k) for k in (GateKind.X, GateKind.H, GateKind.Z, GateKind.H, GateKind.X))),
    _seq("h-t-t-h-t-t-h", *( _g1(k) for k in (GateKind.H, GateKind.T, GateKind.T, GateKind.H, GateKind.T, GateKind.T, GateKind.H))),
    _seq("z-h-y-h-z", *( _g1(k) for k in (GateKind.Z, GateKind.H, GateKind.Y, GateKind.H, GateKind.Z))),
    _seq("s-z-sdg", _g1(GateKind.S), _g1(GateKind.Z), _g1(GateKind.SDG)),
    _seq("t-s-tdg", _g1(GateKind.T), _g1(GateKind.S), _g1(GateKind.TDG)),
    _seq("swap-x-swap", (GateKind.SWAP, (0, 1)), _g1(GateKind.X), (GateKind.SWAP, (0, 1))),
    _seq("y-x-y-x-y", *( _g1(k) for k in (GateKind.Y, GateKind.X, GateKind.Y, GateKind.X, GateKind.Y))),
)


@dataclass(frozen=True)
class SubstitutionRule:
    target: GateKind
    replacement: GateSequence
    verified: bool
    phase_factor: complex


@dataclass(frozen=True)
class RejectedRule:
    target: GateKind
    replacement: GateSequence
    effective: np.ndarray  # the computed unitary that failed the check


@dataclass(frozen=True)
class RulesetReport:
    accepted: tuple[SubstitutionRule, ...]
    rejected: tuple[RejectedRule, ...]

    def summary(self) -> str:
        lines = []
        for rule in self.accepted:
            lines.append(
                f"accepted {rule.target.value} <- {rule.replacement.name}"
                f" (phase {rule.phase_factor:.3g})"
            )
        for rej in self.rejected:
            lines.append(
                f"rejected {rej.target.value} <- {rej.replacement.name}:"
                f" effective unitary {np.round(rej.effective, 6).tolist()}"
            )
        return "\n".join(lines)


def effective_unitary(seq: GateSequence) -> np.ndarray:
    """Matrix of a slot sequence in application order (computed, never trusted)."""
    if seq.n_slots > 3:
        raise RulesetError(f"sequence {seq.name!r} uses {seq.n_slots} slots; at most 3 allowed")
    return unitary_of(seq)


def verify_ruleset(rules: Iterable[tuple[GateKind, GateSequence]]) -> RulesetReport:
    """Oracle-check every rule: replacement must equal the target up to a
    unit-modulus global phase within 1e-10. Rules that fail come back in
    ``rejected`` together with their computed effective unitary, and are never
    applied by any pass.
    """
    accepted: list[SubstitutionRule] = []
    rejected: list[RejectedRule] = []
    for target, seq in rules:
        if target not in UNITARY_KINDS:
            raise RulesetError(f"rule target {target.value!r} is not a unitary gate")
        arity = ARITY[target]
        n = max(arity, seq.n_slots)
        effective = unitary_of(seq, n_qubits=n) if seq.n_slots <= 3 else None
        if effective is None:
            raise RulesetError(f"sequence {seq.name!r} uses more than 3 slots")
        target_u = unitary_of([GateApp(target, tuple(range(arity)))], n_qubits=n)
        ok, phase = proportional(effective, target_u, tol=RULE_TOL)
        if ok:
            accepted.append(SubstitutionRule(target, seq, True, phase))
        else:
            rejected.append(RejectedRule(target, seq, effective))
    return RulesetReport(tuple(accepted), tuple(rejected))


def load_ruleset(path: str | Path | None = None) -> list[tuple[GateKind, GateSequence]]:
    """Read substitution rules from a text file: one rule per line,
    ``target: gate gate ...``. Multi-qubit gates in a replacement take an
    explicit slot list, e.g. ``cx(0,1)``; a bare name means slots 0..arity-1.
    ``#`` starts a comment. Passing None loads the shipped default file.
    """
    if path is None:
        path = Path(__file__).parent / "data" / "rules" / "default_cloaked.rules"
    text = Path(path).read_text(encoding="utf-8")
    names = {k.value: k for k in GateKind}
    rules: list[tuple[GateKind, GateSequence]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise RulesetError(f"{path}:{lineno}: expected 'target: gate gate ...'")
        target_name, rhs = line.split(":", 1)
        target_name = target_name.strip().lower()
        if target_name not in names or names[target_name] not in UNITARY_KINDS:
            raise RulesetError(f"{path}:{lineno}: unknown target gate {target_name!r}")
        target = names[target_name]
        gates: list[tuple[GateKind, tuple[int, ...]]] = []
        for tok in rhs.split():
            name, _, slot_text = tok.partition("(")
            name = name.strip().lower()
            if name not in names or names[name] not in UNITARY_KINDS:
                raise RulesetError(f"{path}:{lineno}: unknown gate {name!r}")
            kind = names[name]
            if slot_text:
                slots = tuple(int(s) for s in slot_text.rstrip(")").split(","))
            else:
                slots = tuple(range(ARITY[kind]))
            if len(slots) != ARITY[kind]:
                raise RulesetError(f"{path}:{lineno}: {name} takes {ARITY[kind]} slot(s)")
            gates.append((kind, slots))
        if not gates:
            raise RulesetError(f"{path}:{lineno}: empty replacement sequence")
        rules.append((target, GateSequence("-".join(rhs.split()), tuple(gates))))
    return rules


def default_verified_rules() -> RulesetReport:
    """Verify and return the shipped default ruleset."""
    return verify_ruleset(load_ruleset())


# --------------------------------------------------------------------------
# shared pass machinery
# --------------------------------------------------------------------------


def _measured_before(circuit: Circuit) -> list[set[int]]:
    """For each insertion site s (0..len(gates)), the qubits measured before s."""
    sites: list[set[int]] = [set()]
    seen: set[int] = set()
    for g in circuit.gates:
        if g.kind is GateKind.MEASURE:
            seen = seen | set(g.qubits)
        sites.append(seen)
    return sites


def _instantiate(seq: GateSequence, qubits: Sequence[int], origin: str,
                 box: int | None = None, group: int | None = None) -> list[GateApp]:
    return [
        GateApp(kind, tuple(qubits[s] for s in slots), origin=origin, box=box, group=group)
        for kind, slots in seq.gates
    ]


def _next_box_id(circuit: Circuit) -> int:
    return 1 + max(circuit.boxes.keys(), default=-1)


def _next_group_id(circuit: Circuit) -> int:
    return 1 + max(circuit.subst_originals.keys(), default=-1)


def inverse_gates_pass(circuit: Circuit, cfg: ObfuscationConfig) -> Circuit:
    """Insert adjacent gate/inverse pairs between existing gates.

    Every boundary between consecutive gate positions (including before the
    first and after the last gate) is a candidate site. An empty circuit has
    no sites and is returned unchanged with a warning.
    """
    rng = random.Random(cfg.seed)
    if not circuit.gates:
        warnings.warn("inverse pass: no eligible insertion site", PassWarning)
        return circuit
    measured = _measured_before(circuit)
    n_sites = len(circuit.gates) + 1
    if all(len(measured[s]) >= circuit.n_qubits for s in range(n_sites)):
        warnings.warn("inverse pass: no eligible insertion site", PassWarning)
        return circuit
    out: list[GateApp] = []
    for site in range(n_sites):
        if rng.random() < cfg.intensity:
            available = [q for q in range(circuit.n_qubits) if q not in measured[site]]
            if available:
                for _ in range(MAX_DRAWS):
                    pair = rng.choice(INVERSE_PAIRS)
                    if pair.n_slots > len(available):
                        continue  # redraw: no qubits of the required arity here
                    qubits = rng.sample(available, pair.n_slots)
                    out.extend(_instantiate(pair, qubits, origin="inserted"))
                    break
        if site < len(circuit.gates):
            out.append(circuit.gates[site])
    return circuit.with_gates(out)


def composite_gates_pass(circuit: Circuit, cfg: ObfuscationConfig) -> Circuit:
    """Insert auxiliary+restore composite boxes and wrap decoy boxes.

    At each selected site the auxiliary sequence and its restore sequence go
    in as two adjacent boxes on one random qubit (their product is the
    identity). Afterwards random runs of 2-4 consecutive box-free original
    gates are grouped into decoy boxes so inserted and original boxes look
    alike. Unlike the inverse pass, an empty circuit still has one site, so a
    bare identity block can be produced.
    """
    rng = random.Random(cfg.seed)
    measured = _measured_before(circuit)
    n_sites = len(circuit.gates) + 1
    if all(len(measured[s]) >= circuit.n_qubits for s in range(n_sites)):
        warnings.warn("composite pass: no eligible insertion site", PassWarning)
        return circuit
    boxes = dict(circuit.boxes)
    next_box = _next_box_id(circuit)

    # decoy boxes first, over runs of 2-4 consecutive box-free original gates,
    # so identity insertions afterwards cannot break the runs apart
    grouped: list[GateApp] = list(circuit.gates)
    i = 0
    while i < len(grouped):
        eligible = grouped[i].origin == "original" and grouped[i].box is None
        if eligible and rng.random() < cfg.intensity:
            run_len = rng.randint(2, 4)
            j = i
            while (
                j < len(grouped)
                and j - i < run_len
                and grouped[j].origin == "original"
                and grouped[j].box is None
            ):
                j += 1
            if j - i >= 2:
                box_id = next_box
                next_box += 1
                boxes[box_id] = f"grp{box_id}"
                for k in range(i, j):
                    grouped[k] = replace(grouped[k], box=box_id)
                i = j
                continue
        i += 1

    def splits_a_box(site: int) -> bool:
        if site == 0 or site == len(grouped):
            return False
        left, right = grouped[site - 1].box, grouped[site].box
        return left is not None and left == right

    out: list[GateApp] = []
    for site in range(n_sites):
        if not splits_a_box(site) and rng.random() < cfg.intensity:
            available = [q for q in range(circuit.n_qubits) if q not in measured[site]]
            if available:
                q = rng.choice(available)
                aux_box, restore_box = next_box, next_box + 1
                next_box += 2
                boxes[aux_box] = f"grp{aux_box}"
                boxes[restore_box] = f"grp{restore_box}"
                out.extend(_instantiate(AUXILIARY_SEQUENCE, [q], "inserted", box=aux_box))
                out.extend(_instantiate(RESTORE_SEQUENCE, [q], "inserted", box=restore_box))
        if site < len(grouped):
            out.append(grouped[site])
    return circuit.with_gates(out, boxes=boxes)


def cloaked_gates_pass(
    circuit: Circuit, cfg: ObfuscationConfig, ruleset: Sequence[SubstitutionRule]
) -> Circuit:
    """Replace gates with verified substitution sequences.

    Each gate whose kind matches some verified rule is replaced with
    probability ``intensity`` by a randomly chosen matching rule's sequence
    mapped onto the gate's qubits. Any rule with verified=False is refused
    outright: only the oracle decides what is equivalent. Phase factors are
    global by the verification invariant, so every verified rule is safe.
    """
    for rule in ruleset:
        if not rule.verified:
            raise RulesetError(
                f"unverified rule {rule.target.value} <- {rule.replacement.name} in ruleset"
            )
    by_target: dict[GateKind, list[SubstitutionRule]] = {}
    for rule in ruleset:
        by_target.setdefault(rule.target, []).append(rule)
    rng = random.Random(cfg.seed)
    subst = dict(circuit.subst_originals)
    next_group = _next_group_id(circuit)
    out: list[GateApp] = []
    for g in circuit.gates:
        rules = by_target.get(g.kind)
        if rules and rng.random() < cfg.intensity:
            rule = rng.choice(rules)
            subst[next_group] = g
            out.extend(
                _instantiate(
                    rule.replacement, g.qubits, origin="substituted",
                    box=g.box, group=next_group,
                )
            )
            next_group += 1
        else:
            out.append(g)
    return circuit.with_gates(out, subst_originals=subst)


def _delayed_commit_check(
    wrapper: GateSequence, wrapper_qubits: Sequence[int], block: Sequence[GateApp]
) -> bool:
    """Oracle test: does wrapper . block . wrapper equal block up to global phase?"""
    touched: list[int] = []
    for g in block:
        for q in g.qubits:
            if q not in touched:
                touched.append(q)
    for q in wrapper_qubits:
        if q not in touched:
            touched.append(q)
    if len(touched) > 3:
        return False
    local = {q: i for i, q in enumerate(touched)}
    m = len(touched)
    block_local = [GateApp(g.kind, tuple(local[q] for q in g.qubits)) for g in block]
    wrapper_local = [
        GateApp(kind, tuple(local[wrapper_qubits[s]] for s in slots))
        for kind, slots in wrapper.gates
    ]
    u_block = unitary_of(block_local, n_qubits=m)
    u_wrap = unitary_of(wrapper_local, n_qubits=m)
    combined = u_wrap @ u_block @ u_wrap
    ok, _ = proportional(combined, u_block, tol=COMMIT_TOL)
    return ok


def delayed_gates_pass(circuit: Circuit, cfg: ObfuscationConfig) -> Circuit:
    """Wrap contiguous blocks of 1-3 original gates in a delayed sequence.

    For each candidate block start (coin per original unitary gate), up to
    MAX_DRAWS (wrapper, block, qubit-mapping) combinations are tried; an
    insertion is committed only when the oracle confirms the wrapped block
    still acts like the block alone, up to global phase, within 1e-9. Sites
    are processed right to left so committed insertions do not shift pending
    candidate positions.
    """
    rng = random.Random(cfg.seed)
    if not circuit.gates:
        warnings.warn("delayed pass: no eligible insertion site", PassWarning)
        return circuit
    work: list[GateApp] = list(circuit.gates)
    committed = 0
    for start in range(len(work) - 1, -1, -1):
        g = work[start]
        if g.origin != "original" or g.kind not in UNITARY_KINDS:
            continue
        if rng.random() >= cfg.intensity:
            continue
        # qubits measured before this position (insertion happens around it)
        measured: set[int] = set()
        for prior in work[:start]:
            if prior.kind is GateKind.MEASURE:
                measured.update(prior.qubits)
        free = [q for q in range(circuit.n_qubits) if q not in measured]
        for _ in range(MAX_DRAWS):
            length = rng.randint(1, 3)
            block: list[GateApp] = []
            for g2 in work[start : start + length]:
                if g2.origin != "original" or g2.kind not in UNITARY_KINDS:
                    break
                block.append(g2)
            if not block:
                break
            wrapper = rng.choice(DELAYED_SEQUENCES)
            block_qubits: list[int] = []
            for b in block:
                for q in b.qubits:
                    if q not in block_qubits:
                        block_qubits.append(q)
            need = wrapper.n_slots
            if need <= len(block_qubits):
                wrapper_qubits = rng.sample(block_qubits, need)
            else:
                extras = [q for q in free if q not in block_qubits]
                if not extras:
                    continue
                wrapper_qubits = block_qubits + rng.sample(extras, need - len(block_qubits))
            if not _delayed_commit_check(wrapper, wrapper_qubits, block):
                continue
            before = _instantiate(wrapper, wrapper_qubits, origin="inserted")
            after = _instantiate(wrapper, wrapper_qubits, origin="inserted")
            work[start:start] = before
            work[start + len(before) + len(block) : start + len(before) + len(block)] = after
            committed += 1
            break
    if committed == 0:
        warnings.warn("delayed pass: no committable insertion found", PassWarning)
        return circuit
    return circuit.with_gates(work)


def apply_pass(
    method: str,
    circuit: Circuit,
    cfg: ObfuscationConfig,
    ruleset: Sequence[SubstitutionRule] | None = None,
) -> Circuit:
    """Dispatch a pass by method name (CLI entry point)."""
    if method == "inverse":
        return inverse_gates_pass(circuit, cfg)
    if method == "composite":
        return composite_gates_pass(circuit, cfg)
    if method == "cloaked":
        if ruleset is None:
            ruleset = default_verified_rules().accepted
        return cloaked_gates_pass(circuit, cfg, ruleset)
    if method == "delayed":
        return delayed_gates_pass(circuit, cfg)
    raise ValueError(f"unknown method {method!r}")


def undo(circuit: Circuit) -> Circuit:
    """Provenance rollback: drop inserted gates, collapse substitution groups
    back to their recorded original gates, and clear box grouping. Rolls all
    the way back to the unobfuscated circuit even for stacked pass outputs (a
    substituted group whose recorded original was itself an inserted gate is
    dropped like any other insertion).
    """
    out: list[GateApp] = []
    seen_groups: set[int] = set()
    for g in circuit.gates:
        if g.group is not None:
            if g.group not in seen_groups:
                seen_groups.add(g.group)
                original = circuit.subst_originals[g.group]
                if original.origin != "inserted":
                    out.append(replace(original, box=None))
            continue
        if g.origin == "inserted":
            continue
        out.append(replace(g, box=None))
    remaining = {
        gid: g for gid, g in circuit.subst_originals.items() if gid not in seen_groups
    }
    return circuit.with_gates(out, boxes={}, subst_originals=remaining)
