"""Source-to-source control-flow wrapping behind quantum opaque predicates.

``wrap`` takes an opaque payload (never parsed as a language) and emits a
program, built from a data-file template, whose execution path is guarded by
one of the predicate circuits: the payload lands byte-exact (modulo one
uniform indent prefix) in the live branch(es), dead branches get generated
decoys shaped like the payload, and the multi-pair false branch gets restart
logic. A manifest describes every branch so the whole construction can be
checked, and branches resolved, without ever executing the emitted program.

Templates are text files with exactly five placeholders:
{PREDICATE_CIRCUIT_QASM}, {BRANCH_TABLE}, {PAYLOAD}, {DECOYS}, {INDENT}.
"""

from __future__ import annotations

import hashlib
import keyword
import math
import os
import random
import re
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .predicates import (
    ELSE_KEY,
    PredicateCircuit,
    key_marginal,
    make_predicate,
)
from .qasm import emit
from .sim import measure_distribution
from .ir import GateKind

MANIFEST_SCHEMA = "qobf.wrap-manifest/1"
TEMPLATE_ENV_VAR = "QOBF_TEMPLATE_DIR"
INDENT = "    "
END_MARKER = "# :: end branch"

_PLACEHOLDERS = frozenset(
    {"PREDICATE_CIRCUIT_QASM", "BRANCH_TABLE", "PAYLOAD", "DECOYS", "INDENT"}
)
_PLACEHOLDER_RE = re.compile(r"\{(PREDICATE_CIRCUIT_QASM|BRANCH_TABLE|PAYLOAD|DECOYS|INDENT)\}")

#: the decoy-policy mode each predicate kind supports
REQUIRED_MODE = {
    "bell": "duplicate_payload",
    "multi_pair": "restart",
    "branch": "dead_decoy",
    "shroud": "dead_decoy",
}


class WrapError(ValueError):
    """Invalid wrap request: bad template, policy/kind mismatch, marker collision."""


class TemplateWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SourceBlock:
    """The payload: raw source text held byte-exact, plus an informational tag."""

    text: str
    language_tag: str = "python"

    def __post_init__(self) -> None:
        if not self.text:
            raise WrapError("payload text must be non-empty")

    @property
    def line_count(self) -> int:
        return len(self.text.splitlines())

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class DecoyPolicy:
    mode: str  # duplicate_payload | dead_decoy | restart
    decoy_seed: int = 0
    decoy_statement_count: int = 2

    def __post_init__(self) -> None:
        if self.mode not in ("duplicate_payload", "dead_decoy", "restart"):
            raise WrapError(f"unknown decoy mode {self.mode!r}")
        if self.decoy_statement_count < 0:
            raise WrapError("decoy_statement_count must be non-negative")


@dataclass(frozen=True)
class Template:
    id: str
    text: str
    description: str


@dataclass(frozen=True)
class BranchSpec:
    id: str
    role: str  # live | dead | restart
    outcome: str  # key bitstring, ELSE_KEY, or amplitude index for shroud


@dataclass(frozen=True)
class WrapManifest:
    template: str
    predicate_kind: str
    predicate_params: Mapping[str, int]
    payload_sha256: str
    payload_newline_terminated: bool
    payload_split: tuple[str, ...]
    indent: str
    key_cbits: tuple[int, ...]
    policy: DecoyPolicy
    branches: tuple[BranchSpec, ...]

    def to_dict(self) -> dict:
        return {
            "schema": MANIFEST_SCHEMA,
            "template": self.template,
            "predicate": {
                "kind": self.predicate_kind,
                "params": dict(self.predicate_params),
            },
            "payload": {
                "sha256": self.payload_sha256,
                "newline_terminated": self.payload_newline_terminated,
                "split": list(self.payload_split),
            },
            "indent": self.indent,
            "key_cbits": list(self.key_cbits),
            "policy": {
                "mode": self.policy.mode,
                "decoy_seed": self.policy.decoy_seed,
                "decoy_statement_count": self.policy.decoy_statement_count,
            },
            "branches": [
                {"id": b.id, "role": b.role, "outcome": b.outcome} for b in self.branches
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "WrapManifest":
        if data.get("schema") != MANIFEST_SCHEMA:
            raise WrapError(f"unsupported manifest schema {data.get('schema')!r}")
        return cls(
            template=data["template"],
            predicate_kind=data["predicate"]["kind"],
            predicate_params=dict(data["predicate"]["params"]),
            payload_sha256=data["payload"]["sha256"],
            payload_newline_terminated=data["payload"]["newline_terminated"],
            payload_split=tuple(data["payload"]["split"]),
            indent=data["indent"],
            key_cbits=tuple(data["key_cbits"]),
            policy=DecoyPolicy(**data["policy"]),
            branches=tuple(BranchSpec(**b) for b in data["branches"]),
        )


# --------------------------------------------------------------------------
# templates
# --------------------------------------------------------------------------


def _template_dir(override: str | Path | None = None) -> Path:
    if override is not None:
        return Path(override)
    env = os.environ.get(TEMPLATE_ENV_VAR)
    if env:
        return Path(env)
    return Path(__file__).parent / "data" / "templates"


def _read_description(text: str) -> str:
    parts: list[str] = []
    collecting = False
    for line in text.splitlines():
        if line.startswith("# description:"):
            parts.append(line[len("# description:") :].strip())
            collecting = True
        elif collecting and line.startswith("# "):
            parts.append(line[2:].strip())
        elif collecting:
            break
    return " ".join(parts)


def list_templates(template_dir: str | Path | None = None) -> list[tuple[str, str]]:
    """(id, description) for every template file found; missing override
    directories yield an empty list plus a warning instead of an error."""
    directory = _template_dir(template_dir)
    if not directory.is_dir():
        warnings.warn(f"template directory {directory} does not exist", TemplateWarning)
        return []
    out = []
    for path in sorted(directory.glob("*.tmpl")):
        out.append((path.stem, _read_description(path.read_text(encoding="utf-8"))))
    return out


def load_template(template_id: str, template_dir: str | Path | None = None) -> Template:
    path = _template_dir(template_dir) / f"{template_id}.tmpl"
    if not path.is_file():
        raise WrapError(f"unknown template {template_id!r} (no file {path})")
    text = path.read_text(encoding="utf-8")
    found = set(_PLACEHOLDER_RE.findall(text))
    if found != _PLACEHOLDERS:
        missing = sorted(_PLACEHOLDERS - found)
        raise WrapError(f"template {template_id!r} placeholder set wrong; missing {missing}")
    return Template(template_id, text, _read_description(text))


# --------------------------------------------------------------------------
# decoys
# --------------------------------------------------------------------------

_IDENT_RE = re.compile(r"\b[A-Za-z_][A-Za-z0-9_]*\b")
_NUMBER_RE = re.compile(r"(?<![\w.])(\d+\.\d+|\d+)(?![\w.])")
_PY_KEYWORDS = frozenset(keyword.kwlist)


def generate_decoy(src: SourceBlock, policy: DecoyPolicy) -> str:
    """Dead-code text shaped like the payload but never byte-equal to it.

    Identifiers are renamed through a seeded permutation of the payload's own
    identifier set (keywords untouched), numeric literals are perturbed, and
    the line count stays within decoy_statement_count of the payload's.
    Deterministic under decoy_seed.
    """
    if policy.mode != "dead_decoy":
        raise WrapError("decoy generation requires a policy with mode='dead_decoy'")
    rng = random.Random(policy.decoy_seed)
    text = src.text
    idents = sorted(set(_IDENT_RE.findall(text)) - _PY_KEYWORDS)
    shuffled = idents[:]
    rng.shuffle(shuffled)
    mapping = dict(zip(idents, shuffled))

    def rename(m: re.Match) -> str:
        return mapping.get(m.group(0), m.group(0))

    out = _IDENT_RE.sub(rename, text)

    def perturb(m: re.Match) -> str:
        lit = m.group(0)
        if "." in lit:
            return repr(float(lit) + rng.randint(1, 9))
        return str(int(lit) + rng.randint(1, 9))

    out = _NUMBER_RE.sub(perturb, out)
    if out == text:
        filler = f"_d{rng.randrange(1 << 16)} = {rng.randrange(1 << 16)}"
        lines = out.split("\n")
        if policy.decoy_statement_count >= 1:
            lines.append(filler)
        else:
            if lines[0] == filler:
                filler += " _"
            lines[0] = filler
        out = "\n".join(lines)
    # never let a decoy line collide with the branch end marker
    out = "\n".join(ln + " _" if ln == END_MARKER else ln for ln in out.split("\n"))
    return out


# --------------------------------------------------------------------------
# branch planning and emission
# --------------------------------------------------------------------------


def _fn_name(branch_id: str) -> str:
    return "_branch_" + re.sub(r"[^0-9a-zA-Z]+", "_", branch_id)


def _plan_branches(pred: PredicateCircuit) -> list[BranchSpec]:
    kind = pred.kind
    if kind == "bell":
        return [
            BranchSpec(f"bell-{key}", "live" if key in ("00", "11") else "dead", key)
            for key in ("00", "01", "10", "11")
        ]
    if kind == "branch":
        return [
            BranchSpec(f"superpos-{key}", "live" if key == "11" else "dead", key)
            for key in ("00", "01", "10", "11")
        ]
    if kind == "multi_pair":
        all_ones = "1" * (2 * pred.params["n_pairs"])
        return [
            BranchSpec("pairs-allones", "restart", all_ones),
            BranchSpec("pairs-live", "live", ELSE_KEY),
        ]
    if kind == "shroud":
        return [BranchSpec("shroud-0", "live", "0"), BranchSpec("shroud-1", "live", "1")]
    raise WrapError(f"unknown predicate kind {kind!r}")


def _emit_body(body_text: str, indent: str) -> str:
    lines = body_text.splitlines(keepends=True)
    out = "".join(indent + ln for ln in lines)
    if body_text and not body_text.endswith("\n"):
        out += "\n"
    return out


def _branch_def(branch: BranchSpec, body_text: str, indent: str) -> str:
    head = f"def {_fn_name(branch.id)}():  # branch {branch.id} [{branch.role}]\n"
    return head + _emit_body(body_text, indent) + indent + END_MARKER + "\n"


def _key_expr(key_cbits: tuple[int, ...]) -> str:
    desc = sorted(key_cbits, reverse=True)
    inner = ", ".join(str(b) for b in desc)
    if len(desc) == 1:
        inner += ","
    return (
        '_key = "".join(_outcome[len(_outcome) - 1 - _b] for _b in (' + inner + "))"
    )


def _branch_table(pred: PredicateCircuit, branches: Sequence[BranchSpec]) -> str:
    lines = ["_outcome, _amplitudes = _evaluate_predicate()"]
    if pred.kind == "shroud":
        for i, branch in enumerate(branches):
            lines.append(f"if abs(_amplitudes[{i}]) > 1e-09:")
            lines.append(f"{INDENT}{_fn_name(branch.id)}()")
        return "\n".join(lines)
    lines.append(_key_expr(pred.semantics.key_cbits))
    explicit = [b for b in branches if b.outcome != ELSE_KEY]
    fallback = [b for b in branches if b.outcome == ELSE_KEY]
    for i, branch in enumerate(explicit):
        guard = "if" if i == 0 else "elif"
        lines.append(f'{guard} _key == "{branch.outcome}":')
        lines.append(f"{INDENT}{_fn_name(branch.id)}()")
    for branch in fallback:
        lines.append("else:")
        lines.append(f"{INDENT}{_fn_name(branch.id)}()")
    return "\n".join(lines)


def _check_marker_collision(text: str, what: str) -> None:
    for line in text.split("\n"):
        if line == END_MARKER:
            raise WrapError(f"payload collides with template markers ({what})")


def _split_payload(text: str, n_parts: int) -> list[str]:
    """Split at line boundaries into n_parts consecutive pieces (some may be
    empty); concatenation is the identity."""
    lines = text.splitlines(keepends=True)
    cut = math.ceil(len(lines) / n_parts) if lines else 0
    parts = []
    for i in range(n_parts):
        parts.append("".join(lines[i * cut : (i + 1) * cut]))
    return parts


def wrap(
    src: SourceBlock,
    kind: str,
    params: Mapping[str, int] | None = None,
    policy: DecoyPolicy | None = None,
    template_id: str = "qobf-inline",
    template_dir: str | Path | None = None,
) -> tuple[str, WrapManifest]:
    """Emit a predicate-guarded program around the payload.

    Live branches carry the payload byte-exact under one uniform indent (for
    shroud it is split across the two always-live branches: part 1 defines,
    part 2 activates). Dead branches carry seeded decoys; the multi-pair
    false branch carries restart logic. Returns the emitted program text and
    the manifest describing every branch.
    """
    template = load_template(template_id, template_dir)
    pred = make_predicate(kind, params)
    policy = policy or DecoyPolicy(mode=REQUIRED_MODE[kind])
    if policy.mode != REQUIRED_MODE[kind]:
        raise WrapError(
            f"policy mode {policy.mode!r} is invalid for kind {kind!r}"
            f" (expected {REQUIRED_MODE[kind]!r})"
        )
    _check_marker_collision(src.text, "payload")
    branches = _plan_branches(pred)
    live = [b for b in branches if b.role == "live"]
    if kind == "shroud":
        parts = _split_payload(src.text, len(live))
        bodies = dict(zip((b.id for b in live), parts))
        payload_split = tuple(b.id for b in live)
    else:
        bodies = {b.id: src.text for b in live}
        payload_split = (live[0].id,)
    decoy_defs: list[str] = []
    payload_defs: list[str] = []
    for i, branch in enumerate(branches):
        if branch.role == "live":
            payload_defs.append(_branch_def(branch, bodies[branch.id], INDENT))
        elif branch.role == "restart":
            decoy_defs.append(_branch_def(branch, "_restart()\n", INDENT))
        else:
            decoy_policy = DecoyPolicy(
                mode="dead_decoy",
                decoy_seed=policy.decoy_seed + i,
                decoy_statement_count=policy.decoy_statement_count,
            )
            decoy = generate_decoy(src, decoy_policy)
            _check_marker_collision(decoy, f"decoy {branch.id}")
            decoy_defs.append(_branch_def(branch, decoy, INDENT))
    fills = {
        "PREDICATE_CIRCUIT_QASM": emit(pred.circuit),
        "BRANCH_TABLE": _branch_table(pred, branches),
        "PAYLOAD": "\n".join(payload_defs).rstrip("\n"),
        "DECOYS": "\n".join(decoy_defs).rstrip("\n"),
        "INDENT": INDENT,
    }
    emitted = _PLACEHOLDER_RE.sub(lambda m: fills[m.group(1)], template.text)
    manifest = WrapManifest(
        template=template.id,
        predicate_kind=kind,
        predicate_params=dict(pred.params),
        payload_sha256=src.sha256,
        payload_newline_terminated=src.text.endswith("\n"),
        payload_split=payload_split,
        indent=INDENT,
        key_cbits=tuple(pred.semantics.key_cbits),
        policy=policy,
        branches=tuple(branches),
    )
    return emitted, manifest


# --------------------------------------------------------------------------
# inspection without execution
# --------------------------------------------------------------------------


def extract_branch_body(emitted: str, manifest: WrapManifest, branch_id: str) -> str:
    """Recover one branch's body text: the lines between its def line and its
    end marker, with the uniform indent removed. Exact inverse of emission
    except for the single newline added when a payload did not end with one.
    """
    indent = manifest.indent
    needle = f"# branch {branch_id} ["
    lines = emitted.splitlines(keepends=True)
    starts = [i for i, ln in enumerate(lines) if needle in ln]
    if len(starts) != 1:
        raise WrapError(f"branch {branch_id!r} appears {len(starts)} times in emitted text")
    body: list[str] = []
    for ln in lines[starts[0] + 1 :]:
        if ln.rstrip("\n") == indent + END_MARKER:
            return "".join(body)
        if not ln.startswith(indent):
            raise WrapError(f"branch {branch_id!r} body line lost its indent: {ln!r}")
        body.append(ln[len(indent) :])
    raise WrapError(f"branch {branch_id!r} has no end marker")


def extract_payload(emitted: str, manifest: WrapManifest) -> str:
    """Reassemble the original payload bytes from the live branches."""
    text = "".join(
        extract_branch_body(emitted, manifest, bid) for bid in manifest.payload_split
    )
    if not manifest.payload_newline_terminated:
        if not text.endswith("\n"):
            raise WrapError("expected the emission-added trailing newline")
        text = text[:-1]
    return text


def resolve_branches(manifest: WrapManifest) -> dict[str, float]:
    """Exact execution probability of every branch, via the in-process oracle.

    The predicate is rebuilt from the manifest and its exact outcome
    distribution marginalized onto the branch key; emitted programs are never
    executed. Shroud branches are always-live and both report 1.0.
    """
    if manifest.predicate_kind == "shroud":
        return {b.id: 1.0 for b in manifest.branches}
    pred = make_predicate(manifest.predicate_kind, manifest.predicate_params)
    dist = measure_distribution(pred.circuit)
    measured = tuple(
        g.cbit for g in pred.circuit.gates if g.kind is GateKind.MEASURE
    )
    keyed = key_marginal(dist, manifest.key_cbits, measured)
    out: dict[str, float] = {}
    explicit_total = 0.0
    for branch in manifest.branches:
        if branch.outcome != ELSE_KEY:
            p = keyed.get(branch.outcome, 0.0)
            out[branch.id] = p
            explicit_total += p
    for branch in manifest.branches:
        if branch.outcome == ELSE_KEY:
            out[branch.id] = 1.0 - explicit_total
    return out
