"""qobf: quantum circuit and control-flow obfuscation with a built-in oracle.

The package splits into:
  * :mod:`qobf.qasm`       - OpenQASM 2.0 subset parser and canonical emitter
  * :mod:`qobf.ir`         - the circuit IR, validation, and structural metrics
  * :mod:`qobf.sim`        - exact statevector simulator and equivalence oracle
  * :mod:`qobf.passes`     - the four circuit obfuscation passes
  * :mod:`qobf.predicates` - quantum opaque-predicate generators
  * :mod:`qobf.wrapper`    - predicate-guarded source wrapping
  * :mod:`qobf.metrics`    - overhead reports
  * :mod:`qobf.cli`        - the ``qobf`` command line tool
"""

__version__ = "0.1.0"

from .ir import (  # noqa: E402
    Circuit,
    GateApp,
    GateKind,
    GateSequence,
    depth,
    flatten,
    gate_count,
    same_gates,
    validate,
)
from .qasm import ParseResult, QasmError, emit, loads, parse, tokenize  # noqa: E402
from .sim import (  # noqa: E402
    SimulationError,
    equivalent,
    gate_matrix,
    measure_distribution,
    simulate,
    strip_measures,
    unitary_of,
)
from .passes import (  # noqa: E402
    ObfuscationConfig,
    apply_pass,
    cloaked_gates_pass,
    composite_gates_pass,
    default_verified_rules,
    delayed_gates_pass,
    effective_unitary,
    inverse_gates_pass,
    load_ruleset,
    undo,
    verify_ruleset,
)
from .predicates import (  # noqa: E402
    PredicateCircuit,
    bell_predicate,
    branch_predicate,
    make_predicate,
    multi_pair_predicate,
    outcome_model,
    shroud_predicate,
)
from .wrapper import (  # noqa: E402
    DecoyPolicy,
    SourceBlock,
    WrapManifest,
    extract_branch_body,
    extract_payload,
    generate_decoy,
    list_templates,
    resolve_branches,
    wrap,
)
from .metrics import Report, measure_circuit_run, measure_wrap_run, render_report  # noqa: E402

__all__ = [
    "__version__",
    "Circuit", "GateApp", "GateKind", "GateSequence",
    "depth", "flatten", "gate_count", "same_gates", "validate",
    "ParseResult", "QasmError", "emit", "loads", "parse", "tokenize",
    "SimulationError", "equivalent", "gate_matrix", "measure_distribution",
    "simulate", "strip_measures", "unitary_of",
    "ObfuscationConfig", "apply_pass", "cloaked_gates_pass",
    "composite_gates_pass", "default_verified_rules", "delayed_gates_pass",
    "effective_unitary", "inverse_gates_pass", "load_ruleset", "undo",
    "verify_ruleset",
    "PredicateCircuit", "bell_predicate", "branch_predicate", "make_predicate",
    "multi_pair_predicate", "outcome_model", "shroud_predicate",
    "DecoyPolicy", "SourceBlock", "WrapManifest", "extract_branch_body",
    "extract_payload", "generate_decoy", "list_templates", "resolve_branches",
    "wrap",
    "Report", "measure_circuit_run", "measure_wrap_run", "render_report",
]
