"""Syntax objects: variable references, constraints, guards and process forms.

Everything here is an immutable dataclass so process trees can be shared
between cloned spaces and compared structurally. Constraints and guards are
written over operands that are either plain ints, resolved store variables
(VarId) or named references (VarRef); the kernel resolves names to VarIds
before posting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .errors import ArityError

REL_OPS = ("=", "!=", "<", "<=", ">", ">=")

FLIP = {"=": "=", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}
NEGATE = {"=": "!=", "!=": "=", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


@dataclass(frozen=True)
class VarId:
    """A variable slot in a concrete space. kind: int | bool | set."""

    kind: str
    index: int

    def __repr__(self) -> str:
        return f"{self.kind}#{self.index}"


@dataclass(frozen=True)
class VarRef:
    """A named variable, optionally indexed into a declared array."""

    name: str
    idx: int | None = None

    def __repr__(self) -> str:
        return self.name if self.idx is None else f"{self.name}[{self.idx}]"


Operand = Union[int, VarId, VarRef]


def show_operand(x: Operand) -> str:
    return str(x) if isinstance(x, int) else repr(x)


# ---------------------------------------------------------------- constraints


@dataclass(frozen=True)
class Rel:
    """lhs op rhs over integer operands."""

    lhs: Operand
    op: str
    rhs: Operand

    def __post_init__(self):
        if self.op not in REL_OPS:
            raise ArityError(f"unknown relational operator {self.op!r}")

    def __repr__(self) -> str:
        return f"{show_operand(self.lhs)} {self.op} {show_operand(self.rhs)}"


@dataclass(frozen=True)
class Member:
    """elt in S (or elt not in S when negated); elt is a constant."""

    elt: int
    sv: Operand
    negated: bool = False

    def __repr__(self) -> str:
        rel = "not in" if self.negated else "in"
        return f"{self.elt} {rel} {show_operand(self.sv)}"


@dataclass(frozen=True)
class SetDomEq:
    """S equals the interval set {lo..hi}."""

    sv: Operand
    lo: int
    hi: int

    def __repr__(self) -> str:
        return f"{show_operand(self.sv)} = {{{self.lo}..{self.hi}}}"


Constraint = Union[Rel, Member, SetDomEq]


# global constraint specs (posted on the store, not told by processes)


@dataclass(frozen=True)
class Linear:
    coeffs: tuple[int, ...]
    xs: tuple[Operand, ...]
    op: str
    rhs: int


@dataclass(frozen=True)
class Distinct:
    xs: tuple[Operand, ...]
    offsets: tuple[int, ...] | None = None


@dataclass(frozen=True)
class Count:
    """|{i : xs[i] = value}| op rhs."""

    xs: tuple[Operand, ...]
    value: int
    op: str
    rhs: int


@dataclass(frozen=True)
class SetMinus:
    """c = a \\ b over set variables."""

    a: Operand
    b: Operand
    c: Operand


GlobalSpec = Union[Linear, Distinct, Count, SetMinus]


# --------------------------------------------------------------------- guards


@dataclass(frozen=True)
class GTrue:
    def __repr__(self) -> str:
        return "true"


@dataclass(frozen=True)
class Eq:
    lhs: Operand
    rhs: Operand

    def __repr__(self) -> str:
        return f"{show_operand(self.lhs)} = {show_operand(self.rhs)}"


@dataclass(frozen=True)
class Gq:
    """lhs >= rhs."""

    lhs: Operand
    rhs: Operand

    def __repr__(self) -> str:
        return f"{show_operand(self.lhs)} >= {show_operand(self.rhs)}"


@dataclass(frozen=True)
class Gt:
    """lhs > rhs."""

    lhs: Operand
    rhs: Operand

    def __repr__(self) -> str:
        return f"{show_operand(self.lhs)} > {show_operand(self.rhs)}"


@dataclass(frozen=True)
class SetIn:
    """elt in S, elt a constant."""

    elt: int
    sv: Operand

    def __repr__(self) -> str:
        return f"{self.elt} in {show_operand(self.sv)}"


@dataclass(frozen=True)
class And:
    gs: tuple["Guard", ...]

    def __repr__(self) -> str:
        return "(" + " and ".join(map(repr, self.gs)) + ")"


@dataclass(frozen=True)
class Or:
    gs: tuple["Guard", ...]

    def __repr__(self) -> str:
        return "(" + " or ".join(map(repr, self.gs)) + ")"


@dataclass(frozen=True)
class Not:
    g: "Guard"

    def __repr__(self) -> str:
        return f"(not {self.g!r})"


Guard = Union[GTrue, Eq, Gq, Gt, SetIn, And, Or, Not]


# -------------------------------------------------------- simple expressions
# Used by the DSL for procedure bodies and by cell update functions.


@dataclass(frozen=True)
class Num:
    v: int


@dataclass(frozen=True)
class Name:
    s: str


@dataclass(frozen=True)
class Bin:
    op: str  # + - *
    a: "Expr"
    b: "Expr"


Expr = Union[Num, Name, Bin]


def eval_expr(e: Expr, env: dict[str, int]) -> int:
    if isinstance(e, Num):
        return e.v
    if isinstance(e, Name):
        return env[e.s]
    if isinstance(e, Bin):
        a, b = eval_expr(e.a, env), eval_expr(e.b, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        raise ArityError(f"unknown arithmetic operator {e.op!r}")
    raise ArityError(f"not an expression: {e!r}")


@dataclass(frozen=True)
class CellFn:
    """A total unary integer function given as an expression in one formal."""

    param: str
    expr: Expr

    def __call__(self, x: int) -> int:
        return eval_expr(self.expr, {self.param: x})

    @staticmethod
    def add(k: int) -> "CellFn":
        return CellFn("v", Bin("+", Name("v"), Num(k)))

    @staticmethod
    def const(k: int) -> "CellFn":
        return CellFn("v", Num(k))

    @staticmethod
    def identity() -> "CellFn":
        return CellFn("v", Name("v"))


# ------------------------------------------------------------------ processes


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Tell:
    c: Constraint


@dataclass(frozen=True)
class When:
    g: Guard
    body: "Process"


@dataclass(frozen=True)
class Par:
    children: tuple["Process", ...]


@dataclass(frozen=True)
class LocalDecl:
    name: str
    kind: str = "int"  # int | bool | set
    lo: int = 0
    hi: int = 65535


@dataclass(frozen=True)
class Local:
    decls: tuple[LocalDecl, ...]
    body: "Process"


@dataclass(frozen=True)
class NextN:
    n: int
    body: "Process"

    def __post_init__(self):
        if self.n < 1:
            raise ArityError("next offset must be >= 1")


@dataclass(frozen=True)
class Unless:
    """Runs body in the next unit if g is not entailed at this unit's end."""

    g: Guard
    body: "Process"


@dataclass(frozen=True)
class Bang:
    """Replication: run body in this and every following unit."""

    body: "Process"


@dataclass(frozen=True)
class Star:
    """Run body in one unit drawn from the remaining horizon."""

    body: "Process"


@dataclass(frozen=True)
class Sum:
    """Non-deterministic choice among guarded branches."""

    branches: tuple[tuple[Guard, "Process"], ...]


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[int, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class CellNew:
    """Create cell name with initial value, visible from the current unit."""

    name: str
    init: int


@dataclass(frozen=True)
class CellAssign:
    """Next unit's cell value becomes fn(current value)."""

    name: str
    fn: CellFn


@dataclass(frozen=True)
class CellExch:
    """Next unit: x becomes fn(current x), y receives current x."""

    x: str
    y: str
    fn: CellFn


@dataclass(frozen=True)
class PersistentTell:
    """Tell c in every unit after the current one (engine-managed)."""

    c: Constraint


CCP_FORMS = (Skip, Tell, When, Par, Local)
TIMED_FORMS = (NextN, Unless, Bang, Star, Sum, Call, CellNew, CellAssign, CellExch, PersistentTell)

Process = Union[
    Skip, Tell, When, Par, Local,
    NextN, Unless, Bang, Star, Sum, Call,
    CellNew, CellAssign, CellExch, PersistentTell,
]
