"""OpenQASM 2.0 subset front end: tokenizer, parser, canonical emitter.

Accepted grammar (a deliberately closed subset; anything else is rejected
with a spanned diagnostic naming the construct):

    program    := header include? statement*
    header     := "OPENQASM" "2" "." "0" ";"
    include    := "include" '"qelib1.inc"' ";"
    statement  := qreg | creg | gate_app | measure | barrier
    qreg       := "qreg" ID "[" INT "]" ";"
    creg       := "creg" ID "[" INT "]" ";"
    gate_app   := GATE operand ("," operand)* ";"
    measure    := "measure" operand "->" operand ";"
    barrier    := "barrier" operand ("," operand)* ";"
    operand    := ID "[" INT "]"

GATE is one of: h x y z s sdg t tdg swap cx cz cy ccx. Operands must be fully
indexed (register broadcast such as ``h q;`` is rejected). ``//`` comments are
skipped; LF and CRLF input are both accepted and LF is emitted. Registers are
flattened to contiguous indices in declaration order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import Diagnostic, SourceSpan
from .ir import ARITY, Circuit, GateApp, GateKind, validate

KEYWORDS = frozenset(
    {"OPENQASM", "include", "qreg", "creg", "measure", "barrier", "gate", "opaque", "if", "reset"}
)

GATE_NAMES: dict[str, GateKind] = {
    k.value: k for k in GateKind if k not in (GateKind.MEASURE, GateKind.BARRIER)
}

_SYMBOLS = frozenset("[];,.(){}=<>-+*")


@dataclass(frozen=True)
class Token:
    kind: str  # "keyword" | "identifier" | "integer" | "symbol"
    lexeme: str
    line: int
    col: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.col, self.line, self.col + len(self.lexeme) - 1)


class QasmError(Exception):
    """Carries the diagnostics that stopped tokenizing or parsing."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


@dataclass
class ParseResult:
    circuit: Circuit | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.circuit is not None and not any(d.is_error for d in self.diagnostics)


def tokenize(source: str) -> list[Token]:
    """Lex the source into tokens, skipping whitespace and ``//`` comments.

    Quoted strings (only used by ``include``) are lexed as a single symbol
    token whose lexeme keeps the quotes. Raises QasmError on an illegal
    character, with a span pointing at it.
    """
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch == '"':
            j = source.find('"', i + 1)
            if j == -1 or "\n" in source[i:j]:
                raise QasmError(
                    [Diagnostic("error", "unterminated string literal", SourceSpan(line, col, line, col))]
                )
            lexeme = source[i : j + 1]
            tokens.append(Token("symbol", lexeme, line, start_col))
            i = j + 1
            col += len(lexeme)
            continue
        if ch == "-" and i + 1 < n and source[i + 1] == ">":
            tokens.append(Token("symbol", "->", line, start_col))
            i += 2
            col += 2
            continue
        if ch in _SYMBOLS:
            tokens.append(Token("symbol", ch, line, start_col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("integer", source[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            lexeme = source[i:j]
            kind = "keyword" if lexeme in KEYWORDS else "identifier"
            tokens.append(Token(kind, lexeme, line, start_col))
            col += j - i
            i = j
            continue
        raise QasmError(
            [Diagnostic("error", f"illegal character {ch!r}", SourceSpan(line, col, line, col))]
        )
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], source: str):
        self.tokens = tokens
        self.source = source
        self.pos = 0
        self.diags: list[Diagnostic] = []
        self.qregs: dict[str, tuple[int, int]] = {}  # name -> (offset, size)
        self.cregs: dict[str, tuple[int, int]] = {}
        self.n_qubits = 0
        self.n_cbits = 0
        self.gates: list[GateApp] = []

    # --- token helpers -------------------------------------------------

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def advance(self) -> Token | None:
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def last_span(self) -> SourceSpan:
        if self.tokens:
            idx = min(self.pos, len(self.tokens) - 1)
            return self.tokens[idx].span
        return SourceSpan(1, 1, 1, 1)

    def error(self, message: str, span: SourceSpan | None = None) -> None:
        self.diags.append(Diagnostic("error", message, span or self.last_span()))

    def expect(self, kind: str, lexeme: str | None = None) -> Token | None:
        tok = self.peek()
        if tok is None:
            self.error(f"unexpected end of input, expected {lexeme or kind}")
            return None
        if tok.kind != kind or (lexeme is not None and tok.lexeme != lexeme):
            self.error(f"expected {lexeme or kind}, found {tok.lexeme!r}", tok.span)
            return None
        return self.advance()

    def skip_statement(self) -> None:
        """Error recovery: skip to just past the next ';' (or matching '}')."""
        depth = 0
        while True:
            tok = self.advance()
            if tok is None:
                return
            if tok.lexeme == "{":
                depth += 1
            elif tok.lexeme == "}":
                if depth <= 1:
                    return
                depth -= 1
            elif tok.lexeme == ";" and depth == 0:
                return

    # --- grammar -------------------------------------------------------

    def parse_program(self) -> None:
        self.parse_header()
        tok = self.peek()
        if tok is not None and tok.lexeme == "include":
            self.parse_include()
        while self.peek() is not None:
            self.parse_statement()
        if self.n_qubits == 0 and not any(d.is_error for d in self.diags):
            self.error("no quantum register declared", SourceSpan(1, 1, 1, 1))

    def parse_header(self) -> None:
        tok = self.peek()
        if tok is None or tok.lexeme != "OPENQASM":
            self.error("missing 'OPENQASM 2.0;' header")
            return
        self.advance()
        major = self.peek()
        if major is not None and major.kind == "integer" and major.lexeme != "2":
            self.error(f"OpenQASM {major.lexeme} unsupported; only 2.0 is accepted", major.span)
            self.skip_statement()
            return
        if (
            self.expect("integer", "2") is None
            or self.expect("symbol", ".") is None
            or self.expect("integer", "0") is None
            or self.expect("symbol", ";") is None
        ):
            self.skip_statement()

    def parse_include(self) -> None:
        self.advance()  # 'include'
        tok = self.peek()
        if tok is None or tok.kind != "symbol" or not tok.lexeme.startswith('"'):
            self.error("expected a quoted include path")
            self.skip_statement()
            return
        if tok.lexeme != '"qelib1.inc"':
            self.error(f"unsupported include {tok.lexeme}", tok.span)
        self.advance()
        self.expect("symbol", ";")

    def parse_statement(self) -> None:
        tok = self.peek()
        assert tok is not None
        if tok.lexeme in ("qreg", "creg"):
            self.parse_register(tok.lexeme)
        elif tok.lexeme == "measure":
            self.parse_measure()
        elif tok.lexeme == "barrier":
            self.parse_barrier()
        elif tok.lexeme == "gate":
            self.error("user-defined gate unsupported", tok.span)
            self.skip_statement()
        elif tok.lexeme == "opaque":
            self.error("opaque declaration unsupported", tok.span)
            self.skip_statement()
        elif tok.lexeme == "if":
            self.error("classical conditional unsupported", tok.span)
            self.skip_statement()
        elif tok.lexeme == "reset":
            self.error("reset unsupported", tok.span)
            self.skip_statement()
        elif tok.lexeme == "OPENQASM":
            self.error("duplicate OPENQASM header", tok.span)
            self.skip_statement()
        elif tok.kind == "identifier" and tok.lexeme in GATE_NAMES:
            self.parse_gate_app(GATE_NAMES[tok.lexeme])
        elif tok.kind == "identifier":
            self.error(f"unsupported gate or statement {tok.lexeme!r}", tok.span)
            self.skip_statement()
        else:
            self.error(f"unexpected {tok.lexeme!r}", tok.span)
            self.skip_statement()

    def parse_register(self, which: str) -> None:
        self.advance()
        name_tok = self.expect("identifier")
        if name_tok is None:
            self.skip_statement()
            return
        if self.expect("symbol", "[") is None:
            self.skip_statement()
            return
        size_tok = self.expect("integer")
        if size_tok is None:
            self.skip_statement()
            return
        if self.expect("symbol", "]") is None or self.expect("symbol", ";") is None:
            self.skip_statement()
            return
        size = int(size_tok.lexeme)
        if size < 1:
            self.error(f"register size must be positive, got {size}", size_tok.span)
            return
        table = self.qregs if which == "qreg" else self.cregs
        if name_tok.lexeme in self.qregs or name_tok.lexeme in self.cregs:
            self.error(f"register {name_tok.lexeme!r} already declared", name_tok.span)
            return
        if which == "qreg":
            table[name_tok.lexeme] = (self.n_qubits, size)
            self.n_qubits += size
        else:
            table[name_tok.lexeme] = (self.n_cbits, size)
            self.n_cbits += size

    def parse_operand(self, classical: bool = False) -> int | None:
        """A fully indexed register reference, flattened to an absolute index."""
        name_tok = self.expect("identifier")
        if name_tok is None:
            return None
        table = self.cregs if classical else self.qregs
        regs = "classical" if classical else "quantum"
        if name_tok.lexeme not in table:
            if name_tok.lexeme in (self.qregs | self.cregs):
                self.error(f"expected a {regs} register, got {name_tok.lexeme!r}", name_tok.span)
            else:
                self.error(f"unknown register {name_tok.lexeme!r}", name_tok.span)
            return None
        nxt = self.peek()
        if nxt is None or nxt.lexeme != "[":
            self.error(
                f"broadcast operand unsupported: {name_tok.lexeme!r} must be indexed",
                name_tok.span,
            )
            return None
        self.advance()
        idx_tok = self.expect("integer")
        if idx_tok is None or self.expect("symbol", "]") is None:
            return None
        offset, size = table[name_tok.lexeme]
        idx = int(idx_tok.lexeme)
        if idx >= size:
            self.error(
                f"index {idx} out of range for {name_tok.lexeme}[{size}]", idx_tok.span
            )
            return None
        return offset + idx

    def parse_operand_list(self) -> list[int] | None:
        ops = []
        first = self.parse_operand()
        if first is None:
            return None
        ops.append(first)
        while True:
            tok = self.peek()
            if tok is not None and tok.lexeme == ",":
                self.advance()
                nxt = self.parse_operand()
                if nxt is None:
                    return None
                ops.append(nxt)
            else:
                return ops

    def parse_gate_app(self, kind: GateKind) -> None:
        name_tok = self.advance()
        assert name_tok is not None
        tok = self.peek()
        if tok is not None and tok.lexeme == "(":
            self.error(f"parameterized gates unsupported ({name_tok.lexeme})", tok.span)
            self.skip_statement()
            return
        operands = self.parse_operand_list()
        if operands is None:
            self.skip_statement()
            return
        if self.expect("symbol", ";") is None:
            self.skip_statement()
            return
        arity = ARITY[kind]
        if len(operands) != arity:
            self.error(
                f"{name_tok.lexeme} expects {arity} operand(s), got {len(operands)}",
                name_tok.span,
            )
            return
        if len(set(operands)) != len(operands):
            self.error("duplicate qubit operand", name_tok.span)
            return
        self.gates.append(GateApp(kind, tuple(operands)))

    def parse_measure(self) -> None:
        head = self.advance()
        assert head is not None
        qubit = self.parse_operand()
        if qubit is None:
            self.skip_statement()
            return
        if self.expect("symbol", "->") is None:
            self.skip_statement()
            return
        cbit = self.parse_operand(classical=True)
        if cbit is None:
            self.skip_statement()
            return
        if self.expect("symbol", ";") is None:
            self.skip_statement()
            return
        self.gates.append(GateApp(GateKind.MEASURE, (qubit,), cbit=cbit))

    def parse_barrier(self) -> None:
        head = self.advance()
        assert head is not None
        operands = self.parse_operand_list()
        if operands is None:
            self.skip_statement()
            return
        if self.expect("symbol", ";") is None:
            self.skip_statement()
            return
        if len(set(operands)) != len(operands):
            self.error("duplicate qubit operand", head.span)
            return
        self.gates.append(GateApp(GateKind.BARRIER, tuple(operands)))


def parse(source: str) -> ParseResult:
    """Parse QASM text into a Circuit, or into error diagnostics.

    Never raises on bad input: all problems come back as spanned diagnostics
    in the result, and ``result.circuit`` is None whenever any error occurred.
    Comments (including emitted composite-box markers) are discarded, so
    parse(emit(c)) reproduces flatten(c).
    """
    try:
        tokens = tokenize(source)
    except QasmError as exc:
        return ParseResult(None, exc.diagnostics)
    parser = _Parser(tokens, source)
    parser.parse_program()
    if any(d.is_error for d in parser.diags):
        return ParseResult(None, parser.diags)
    circuit = Circuit(
        n_qubits=parser.n_qubits,
        n_cbits=parser.n_cbits,
        gates=tuple(parser.gates),
    )
    return ParseResult(circuit, parser.diags)


def loads(source: str) -> Circuit:
    """Parse, raising QasmError on any error diagnostic."""
    result = parse(source)
    if result.circuit is None:
        raise QasmError(result.diagnostics)
    return result.circuit


def _operand(q: int) -> str:
    return f"q[{q}]"


def _statement(g: GateApp) -> str:
    if g.kind is GateKind.MEASURE:
        return f"measure q[{g.qubits[0]}] -> c[{g.cbit}];"
    if g.kind is GateKind.BARRIER:
        return f"barrier {','.join(_operand(q) for q in g.qubits)};"
    return f"{g.kind.value} {','.join(_operand(q) for q in g.qubits)};"


def emit(circuit: Circuit) -> str:
    """Canonical QASM text: one statement per line, LF endings, registers
    named q/c. Composite boxes are emitted flattened between a
    ``// begin composite <name>`` / ``// end composite`` comment pair; the
    markers are regenerated from IR structure and are discarded on re-parse,
    so emit/parse round trips to the flattened circuit.
    """
    problems = [d for d in validate(circuit) if d.is_error]
    if problems:
        raise ValueError(
            "refusing to emit an invalid circuit: " + "; ".join(d.message for d in problems)
        )
    lines = ['OPENQASM 2.0;', 'include "qelib1.inc";', f"qreg q[{circuit.n_qubits}];"]
    if circuit.n_cbits > 0:
        lines.append(f"creg c[{circuit.n_cbits}];")
    open_box: int | None = None
    for g in circuit.gates:
        if g.box != open_box:
            if open_box is not None:
                lines.append("// end composite")
            if g.box is not None:
                lines.append(f"// begin composite {circuit.boxes.get(g.box, f'box{g.box}')}")
            open_box = g.box
        lines.append(_statement(g))
    if open_box is not None:
        lines.append("// end composite")
    return "\n".join(lines) + "\n"
