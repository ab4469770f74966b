"""S-expression spec language: parse, print, elaborate, lint.

A spec file holds declarations, procedure definitions and a main process:

    (declare-var go int 0 16)
    (declare-array S int 16 -2 16)
    (defproc Sync (i)
      (par (when (and (v>= S[(- i 1)] -1) (v>= go i))
             (par (call Add i) (next (call Sync (+ i 1)))))
           (unless (and (v>= S[(- i 1)] -1) (v>= go i))
             (call Sync i))))
    (main (call Sync 1))

Procedure bodies are templates: parameters are substituted at call time and
arithmetic over them folds to constants, so guards like (= 3 5) disappear
before the store ever sees them. Guards over variables are never folded.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

from .engine import ProcedureDef, VariableRegistry
from .errors import ArityError, DimensionError, DslSyntaxError, UnknownName, UnknownProcedure
from .syntax import (
    And,
    Bang,
    Bin,
    Call,
    CellAssign,
    CellExch,
    CellFn,
    CellNew,
    Eq,
    Expr,
    Gq,
    Gt,
    GTrue,
    Local,
    LocalDecl,
    Member,
    Name,
    NextN,
    Not,
    Num,
    Or,
    Par,
    PersistentTell,
    Process,
    Rel,
    SetIn,
    Skip,
    Star,
    Sum,
    Tell,
    Unless,
    VarRef,
    When,
)

LOCAL_LO, LOCAL_HI = 0, 65535

TELL_OPS = {"=": "=", ">=": ">=", ">": ">", "/=": "!=", "<": "<", "<=": "<="}
ARITH = {"+", "-", "*"}
KEYWORDS = {
    "par", "||", "tell", "when", "unless", "next", "nextn", "nextnp", "!",
    "*", "sum", "+", "local", "call", "cell", "assign", "exch", "ptell", "skip",
}


# ------------------------------------------------------------------- reading

@dataclass(frozen=True)
class SAtom:
    value: Union[int, str]
    line: int = 0
    col: int = 0
    end_col: int = 0


@dataclass(frozen=True)
class SIndex:
    name: str
    index: "SNode"
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int = 0
    col: int = 0


SNode = Union[SAtom, SIndex, SList]

_DELIMS = set("()[];")


def _lex(text: str):
    toks = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()[]":
            toks.append((ch, line, col, col + 1))
            col += 1
            i += 1
        else:
            start_col = col
            j = i
            while j < n and not text[j].isspace() and text[j] not in _DELIMS:
                j += 1
            toks.append((text[i:j], line, start_col, start_col + (j - i)))
            col += j - i
            i = j
    return toks


def _atom(tok):
    text, line, col, end = tok
    try:
        return SAtom(int(text), line, col, end)
    except ValueError:
        return SAtom(text, line, col, end)


class _Reader:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise DslSyntaxError("unexpected end of input", 0, 0)
        self.pos += 1
        return tok

    def read(self) -> SNode:
        tok = self.next()
        text, line, col, end = tok
        if text == "(":
            items = []
            while True:
                nxt = self.peek()
                if nxt is None:
                    raise DslSyntaxError("unclosed '('", line, col)
                if nxt[0] == ")":
                    self.next()
                    return SList(tuple(items), line, col)
                items.append(self.read())
        if text in (")", "]"):
            raise DslSyntaxError(f"unexpected {text!r}", line, col)
        if text == "[":
            raise DslSyntaxError("'[' must follow a name", line, col)
        node = _atom(tok)
        nxt = self.peek()
        if (
            isinstance(node.value, str)
            and nxt is not None
            and nxt[0] == "["
            and nxt[1] == line
            and nxt[2] == end
        ):
            self.next()
            index = self.read()
            closing = self.next()
            if closing[0] != "]":
                raise DslSyntaxError("expected ']'", closing[1], closing[2])
            return SIndex(node.value, index, line, col)
        return node


def read_all(text: str) -> tuple:
    reader = _Reader(text)
    forms = []
    while reader.peek() is not None:
        forms.append(reader.read())
    return tuple(forms)


def strip_spans(node: SNode):
    """Structure only, for AST equality in round-trip checks."""
    if isinstance(node, SAtom):
        return node.value
    if isinstance(node, SIndex):
        return (node.name, "[", strip_spans(node.index))
    return tuple(strip_spans(item) for item in node.items)


# ----------------------------------------------------------------- spec AST

@dataclass(frozen=True)
class DeclVar:
    name: str
    kind: str
    lo: int
    hi: int
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class DeclArray:
    name: str
    kind: str
    dim: int
    lo: int
    hi: int
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class DefProc:
    name: str
    params: tuple
    body: SNode
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class SpecAst:
    decls: tuple
    procs: tuple
    main: SNode | None
    main_span: tuple = (0, 0)


def _want(cond, msg, node):
    if not cond:
        line = getattr(node, "line", 0)
        col = getattr(node, "col", 0)
        raise DslSyntaxError(msg, line, col)


def _sym(node, what="a name") -> str:
    _want(isinstance(node, SAtom) and isinstance(node.value, str), f"expected {what}", node)
    return node.value


def _int(node, what="an integer") -> int:
    _want(isinstance(node, SAtom) and isinstance(node.value, int), f"expected {what}", node)
    return node.value


def parse(text: str) -> SpecAst:
    decls, procs = [], []
    main = None
    main_span = (0, 0)
    for form in read_all(text):
        _want(isinstance(form, SList) and form.items, "expected a top-level form", form)
        head = form.items[0]
        name = head.value if isinstance(head, SAtom) else None
        rest = form.items[1:]
        if name == "declare-var":
            _want(len(rest) in (2, 4), "declare-var takes: name kind [lo hi]", form)
            kind = _sym(rest[1], "a kind (int/bool/set)")
            _want(kind in ("int", "bool", "set"), f"unknown kind {kind!r}", rest[1])
            if len(rest) == 2:
                _want(kind == "bool", "lo/hi bounds required for int and set", form)
                lo, hi = 0, 1
            else:
                lo, hi = _int(rest[2]), _int(rest[3])
            decls.append(DeclVar(_sym(rest[0]), kind, lo, hi, form.line, form.col))
        elif name == "declare-array":
            _want(len(rest) in (3, 5), "declare-array takes: name kind dim [lo hi]", form)
            kind = _sym(rest[1], "a kind (int/bool/set)")
            _want(kind in ("int", "bool", "set"), f"unknown kind {kind!r}", rest[1])
            dim = _int(rest[2], "an array dimension")
            _want(dim > 0, "array dimension must be positive", rest[2])
            if len(rest) == 3:
                _want(kind == "bool", "lo/hi bounds required for int and set", form)
                lo, hi = 0, 1
            else:
                lo, hi = _int(rest[3]), _int(rest[4])
            decls.append(DeclArray(_sym(rest[0]), kind, dim, lo, hi, form.line, form.col))
        elif name == "defproc":
            _want(len(rest) == 3, "defproc takes: Name (params) body", form)
            pnames = rest[1]
            _want(isinstance(pnames, SList), "defproc parameter list", pnames if not isinstance(pnames, SList) else form)
            params = tuple(_sym(p, "a parameter name") for p in pnames.items)
            procs.append(DefProc(_sym(rest[0]), params, rest[2], form.line, form.col))
        elif name == "main":
            _want(len(rest) == 1, "main takes one body", form)
            _want(main is None, "duplicate main", form)
            main = rest[0]
            main_span = (form.line, form.col)
        else:
            raise DslSyntaxError(f"unknown top-level form {name!r}", form.line, form.col)
    return SpecAst(tuple(decls), tuple(procs), main, main_span)


# ----------------------------------------------------------------- printing

def _print_node(node: SNode, indent: int, out: list):
    text = _node_text(node)
    if len(text) + indent <= 92 or isinstance(node, (SAtom, SIndex)):
        out.append(" " * indent + text)
        return
    items = node.items
    head = _node_text(items[0])
    out.append(" " * indent + "(" + head)
    for item in items[1:]:
        _print_node(item, indent + 2, out)
    out[-1] += ")"


def _node_text(node: SNode) -> str:
    if isinstance(node, SAtom):
        return str(node.value)
    if isinstance(node, SIndex):
        return f"{node.name}[{_node_text(node.index)}]"
    return "(" + " ".join(_node_text(item) for item in node.items) + ")"


def print_spec(ast: SpecAst) -> str:
    out = []
    for d in ast.decls:
        if isinstance(d, DeclVar):
            out.append(f"(declare-var {d.name} {d.kind} {d.lo} {d.hi})")
        else:
            out.append(f"(declare-array {d.name} {d.kind} {d.dim} {d.lo} {d.hi})")
    for p in ast.procs:
        out.append(f"(defproc {p.name} ({' '.join(p.params)})")
        body = []
        _print_node(p.body, 2, body)
        out.extend(body)
        out[-1] += ")"
    if ast.main is not None:
        out.append("(main")
        body = []
        _print_node(ast.main, 2, body)
        out.extend(body)
        out[-1] += ")"
    return "\n".join(out) + "\n"


def ast_equal(a: SpecAst, b: SpecAst) -> bool:
    def canon(ast):
        return (
            tuple((type(d).__name__,) + tuple(getattr(d, f) for f in ("name", "kind") )
                  + ((d.dim,) if isinstance(d, DeclArray) else ()) + (d.lo, d.hi)
                  for d in ast.decls),
            tuple((p.name, p.params, strip_spans(p.body)) for p in ast.procs),
            strip_spans(ast.main) if ast.main is not None else None,
        )
    return canon(a) == canon(b)


# -------------------------------------------------------------- elaboration

class _Sym:
    """Placeholder for a parameter during the structural (no-values) pass."""

    __slots__ = ()


_SYM = _Sym()


class _Elab:
    def __init__(self, registry: VariableRegistry, proc_arity: dict):
        self.registry = registry
        self.proc_arity = proc_arity

    # expressions ----------------------------------------------------------

    def expr(self, node: SNode, env: dict):
        """Fold to int, a _Sym marker (structural pass), or a VarRef."""
        if isinstance(node, SAtom):
            v = node.value
            if isinstance(v, int):
                return v
            if v in env:
                return env[v]
            if v in self.registry.decls:
                d = self.registry.decls[v]
                if d.dim is not None:
                    raise DimensionError(f"{v} is an array; index required")
                return VarRef(v)
            raise UnknownName(f"unknown name {v!r} at line {node.line}")
        if isinstance(node, SIndex):
            d = self.registry.decls.get(node.name)
            if d is None:
                raise UnknownName(f"unknown array {node.name!r} at line {node.line}")
            if d.dim is None:
                raise DimensionError(f"{node.name} is a scalar; indexed access at line {node.line}")
            idx = self.const(node.index, env, "array index")
            if idx is _SYM:
                return VarRef(node.name, None)
            if not 0 <= idx < d.dim:
                raise DimensionError(
                    f"index {idx} outside [0, {d.dim}) for {node.name} at line {node.line}"
                )
            return VarRef(node.name, idx)
        if isinstance(node, SList) and node.items:
            op = node.items[0]
            if isinstance(op, SAtom) and op.value in ARITH:
                args = [self.const(a, env, "arithmetic") for a in node.items[1:]]
                _want(args, f"({op.value}) needs arguments", node)
                if any(a is _SYM for a in args):
                    return _SYM
                if op.value == "+":
                    return sum(args)
                if op.value == "*":
                    acc = 1
                    for a in args:
                        acc *= a
                    return acc
                if len(args) == 1:
                    return -args[0]
                acc = args[0]
                for a in args[1:]:
                    acc -= a
                return acc
        raise DslSyntaxError("expected an expression", getattr(node, "line", 0), getattr(node, "col", 0))

    def const(self, node: SNode, env: dict, what: str):
        v = self.expr(node, env)
        if isinstance(v, VarRef):
            raise DslSyntaxError(
                f"{what} must be a constant; {v!r} is a variable",
                getattr(node, "line", 0), getattr(node, "col", 0),
            )
        return v

    def operand(self, node: SNode, env: dict):
        return self.expr(node, env)

    def lambda_expr(self, node: SNode, env: dict, param: str) -> Expr:
        if isinstance(node, SAtom):
            v = node.value
            if isinstance(v, int):
                return Num(v)
            if v == param:
                return Name(v)
            if v in env:
                bound = env[v]
                if isinstance(bound, VarRef):
                    raise DslSyntaxError(
                        f"cell functions cannot read variable {v!r}", node.line, node.col
                    )
                return Num(bound if bound is not _SYM else 0)
            raise UnknownName(f"unknown name {v!r} in cell function at line {node.line}")
        if isinstance(node, SList) and node.items:
            op = node.items[0]
            if isinstance(op, SAtom) and op.value in ARITH:
                args = [self.lambda_expr(a, env, param) for a in node.items[1:]]
                _want(args, f"({op.value}) needs arguments", node)
                if op.value == "-" and len(args) == 1:
                    return Bin("-", Num(0), args[0])
                acc = args[0]
                for a in args[1:]:
                    acc = Bin(op.value, acc, a)
                return acc
        raise DslSyntaxError(
            "cell functions are single-parameter integer arithmetic",
            getattr(node, "line", 0), getattr(node, "col", 0),
        )

    # guards ---------------------------------------------------------------

    def guard(self, node: SNode, env: dict):
        """Returns a guard, or True/False when it folds to a constant."""
        if isinstance(node, SAtom) and node.value == "true":
            return True
        _want(isinstance(node, SList) and node.items, "expected a guard", node)
        head = _sym(node.items[0], "a guard operator")
        rest = node.items[1:]
        if head == "and":
            parts = []
            for sub in rest:
                g = self.guard(sub, env)
                if g is False:
                    return False
                if g is not True:
                    parts.append(g)
            if not parts:
                return True
            return parts[0] if len(parts) == 1 else And(tuple(parts))
        if head == "or":
            parts = []
            for sub in rest:
                g = self.guard(sub, env)
                if g is True:
                    return True
                if g is not False:
                    parts.append(g)
            if not parts:
                return False
            return parts[0] if len(parts) == 1 else Or(tuple(parts))
        if head == "not":
            _want(len(rest) == 1, "not takes one guard", node)
            g = self.guard(rest[0], env)
            if isinstance(g, bool):
                return not g
            return Not(g)
        if head == "in":
            _want(len(rest) == 2, "in takes: element set-var", node)
            elt = self.const(rest[0], env, "set element")
            sv = self.operand(rest[1], env)
            _want(isinstance(sv, VarRef) or sv is _SYM, "in needs a set variable", rest[1])
            if elt is _SYM or sv is _SYM:
                elt = 0
            if isinstance(sv, VarRef):
                self._expect_kind(sv, "set", rest[1])
            return SetIn(elt, sv)
        if head in ("=", "v>=", "v>"):
            _want(len(rest) == 2, f"{head} takes two sides", node)
            a = self.operand(rest[0], env)
            b = self.operand(rest[1], env)
            if a is _SYM or b is _SYM:
                return Eq(0, 0) if head == "=" else (Gq(0, 0) if head == "v>=" else Gt(0, 0))
            if isinstance(a, int) and isinstance(b, int):
                return {"=": a == b, "v>=": a >= b, "v>": a > b}[head]
            return {"=": Eq, "v>=": Gq, "v>": Gt}[head](a, b)
        raise DslSyntaxError(f"unknown guard operator {head!r}", node.line, node.col)

    def _expect_kind(self, ref: VarRef, kind: str, node):
        d = self.registry.decls.get(ref.name)
        if d is not None and d.kind != kind:
            raise DslSyntaxError(
                f"{ref.name} is {d.kind}, expected {kind}",
                getattr(node, "line", 0), getattr(node, "col", 0),
            )

    # constraints ----------------------------------------------------------

    def constraint(self, node: SNode, env: dict):
        _want(isinstance(node, SList) and node.items, "expected a constraint", node)
        head = _sym(node.items[0], "a relation")
        rest = node.items[1:]
        if head == "in":
            _want(len(rest) == 2, "in takes: element set-var", node)
            elt = self.const(rest[0], env, "set element")
            sv = self.operand(rest[1], env)
            _want(isinstance(sv, VarRef) or sv is _SYM, "in needs a set variable", rest[1])
            if elt is _SYM or sv is _SYM:
                return None
            self._expect_kind(sv, "set", rest[1])
            return Member(elt, sv)
        op = TELL_OPS.get(head)
        if op is None:
            raise DslSyntaxError(f"unknown relation {head!r}", node.line, node.col)
        _want(len(rest) == 2, f"{head} takes two sides", node)
        lhs = self.operand(rest[0], env)
        rhs = self.operand(rest[1], env)
        if lhs is _SYM or rhs is _SYM:
            return None
        return Rel(lhs, op, rhs)

    # processes ------------------------------------------------------------

    def process(self, node: SNode, env: dict, locals_: frozenset = frozenset()) -> Process:
        _want(isinstance(node, SList) and node.items, "expected a process", node)
        head = node.items[0]
        name = head.value if isinstance(head, SAtom) and isinstance(head.value, str) else None
        rest = node.items[1:]
        if name in ("par", "||"):
            children = tuple(self.process(p, env, locals_) for p in rest)
            if not children:
                return Skip()
            return children[0] if len(children) == 1 else Par(children)
        if name == "skip":
            _want(not rest, "skip takes no arguments", node)
            return Skip()
        if name == "tell":
            _want(len(rest) == 1, "tell takes one constraint", node)
            c = self.constraint(rest[0], env)
            return Tell(c) if c is not None else Skip()
        if name == "ptell":
            _want(len(rest) == 1, "ptell takes one constraint", node)
            c = self.constraint(rest[0], env)
            return PersistentTell(c) if c is not None else Skip()
        if name == "when":
            _want(len(rest) == 2, "when takes: guard process", node)
            g = self.guard(rest[0], env)
            body = self.process(rest[1], env, locals_)
            if g is True:
                return body
            if g is False:
                return Skip()
            return When(g, body)
        if name == "unless":
            _want(len(rest) == 2, "unless takes: guard process", node)
            g = self.guard(rest[0], env)
            body = self.process(rest[1], env, locals_)
            if g is True:
                return Skip()
            if g is False:
                return NextN(1, body)
            return Unless(g, body)
        if name in ("next", "nextn", "nextnp"):
            if name == "nextn" or (name == "nextnp" and len(rest) == 2):
                _want(len(rest) == 2, "nextn takes: units process", node)
                k = self.const(rest[0], env, "next count")
                body = self.process(rest[1], env, locals_)
                if k is _SYM:
                    k = 1
                _want(k >= 1, "next count must be >= 1", rest[0])
                return NextN(k, body)
            _want(len(rest) == 1, f"{name} takes one process", node)
            return NextN(1, self.process(rest[0], env, locals_))
        if name == "!":
            _want(len(rest) == 1, "! takes one process", node)
            return Bang(self.process(rest[0], env, locals_))
        if name == "*":
            _want(len(rest) == 1, "* takes one process", node)
            return Star(self.process(rest[0], env, locals_))
        if name == "sum":
            branches = []
            for br in rest:
                _want(isinstance(br, SList) and len(br.items) == 2, "sum branch: (guard process)", br)
                g = self.guard(br.items[0], env)
                if g is False:
                    continue
                body = self.process(br.items[1], env, locals_)
                branches.append((GTrue() if g is True else g, body))
            if not branches:
                return Skip()
            if len(branches) == 1 and isinstance(branches[0][0], GTrue):
                return branches[0][1]
            return Sum(tuple(branches))
        if name == "+":
            branches = tuple((GTrue(), self.process(p, env, locals_)) for p in rest)
            if not branches:
                return Skip()
            return branches[0][1] if len(branches) == 1 else Sum(branches)
        if name == "local":
            _want(len(rest) == 2, "local takes: (names) process", node)
            _want(isinstance(rest[0], SList), "local variable list", rest[0])
            decls = []
            names = set()
            for item in rest[0].items:
                if isinstance(item, SAtom):
                    decls.append(LocalDecl(_sym(item), "int", LOCAL_LO, LOCAL_HI))
                else:
                    _want(isinstance(item, SList) and len(item.items) == 3,
                          "local entry: name or (name lo hi)", item)
                    lo = self.const(item.items[1], env, "local bound")
                    hi = self.const(item.items[2], env, "local bound")
                    if lo is _SYM or hi is _SYM:
                        lo, hi = LOCAL_LO, LOCAL_HI
                    decls.append(LocalDecl(_sym(item.items[0]), "int", lo, hi))
                names.add(decls[-1].name)
            inner = {k: v for k, v in env.items() if k not in names}
            for n in names:
                inner[n] = VarRef(n)  # shadows params and declarations alike
            body = self.process(rest[1], inner, locals_ | names)
            return Local(tuple(decls), body)
        if name == "call" or (name is not None and name not in KEYWORDS):
            if name == "call":
                _want(len(rest) >= 1, "call takes: Name args...", node)
                callee = _sym(rest[0], "a procedure name")
                args = rest[1:]
            else:
                callee = name
                args = rest
            arity = self.proc_arity.get(callee)
            if arity is None:
                raise UnknownProcedure(f"unknown procedure {callee!r} at line {node.line}")
            if len(args) != arity:
                raise ArityError(f"{callee} takes {arity} arguments, got {len(args)} at line {node.line}")
            values = tuple(self.const(a, env, "call argument") for a in args)
            if any(v is _SYM for v in values):
                values = tuple(0 for _ in values)
            return Call(callee, values)
        if name == "cell":
            _want(len(rest) == 2, "cell takes: name init", node)
            init = self.const(rest[1], env, "cell initial value")
            return CellNew(_sym(rest[0]), 0 if init is _SYM else init)
        if name in ("assign", "exch"):
            lam = rest[-1]
            _want(isinstance(lam, SList) and len(lam.items) == 3
                  and isinstance(lam.items[0], SAtom) and lam.items[0].value == "lambda",
                  f"{name} ends with (lambda (v) expr)", lam)
            plist = lam.items[1]
            _want(isinstance(plist, SList) and len(plist.items) == 1, "lambda takes one parameter", plist)
            param = _sym(plist.items[0], "a lambda parameter")
            fn = CellFn(param, self.lambda_expr(lam.items[2], env, param))
            if name == "assign":
                _want(len(rest) == 2, "assign takes: cell (lambda (v) expr)", node)
                return CellAssign(_sym(rest[0]), fn)
            _want(len(rest) == 3, "exch takes: src dst (lambda (v) expr)", node)
            return CellExch(_sym(rest[0]), _sym(rest[1]), fn)
        raise DslSyntaxError(f"unknown process form {name!r}", node.line, node.col)


@dataclass(frozen=True)
class ElaboratedSpec:
    registry: VariableRegistry
    procedures: dict
    main: Process


def _call_edges(body: SNode, proc_names: set) -> tuple:
    """(callee, guarded) pairs; guarded = behind next/nextn or in an unless body."""
    edges = []

    def walk(node, guarded):
        if isinstance(node, SIndex):
            return
        if not isinstance(node, SList) or not node.items:
            return
        head = node.items[0]
        name = head.value if isinstance(head, SAtom) else None
        if name in ("next", "nextn", "nextnp", "unless"):
            for item in node.items[1:]:
                walk(item, True)
            return
        if name == "call" and len(node.items) > 1 and isinstance(node.items[1], SAtom):
            edges.append((node.items[1].value, guarded))
        elif isinstance(name, str) and name not in KEYWORDS and name in proc_names:
            edges.append((name, guarded))
        for item in node.items[1:]:
            walk(item, guarded)

    walk(body, False)
    return tuple(edges)


def elaborate(ast: SpecAst, main_args: tuple = ()) -> ElaboratedSpec:
    registry = VariableRegistry()
    for d in ast.decls:
        if isinstance(d, DeclVar):
            registry.declare(d.name, d.kind, d.lo, d.hi)
        else:
            registry.declare(d.name, d.kind, d.lo, d.hi, dim=d.dim)
    proc_arity = {p.name: len(p.params) for p in ast.procs}
    elab = _Elab(registry, proc_arity)
    proc_names = set(proc_arity)

    procedures = {}
    for p in ast.procs:
        # structural pass: arity, names and dimensions checked without values
        elab.process(p.body, {q: _SYM for q in p.params})

        def instantiate(args, _body=p.body, _params=p.params):
            return elab.process(_body, dict(zip(_params, args)))

        cached = lru_cache(maxsize=512)(instantiate)
        builder = (lambda *args, _c=cached: _c(tuple(args)))
        procedures[p.name] = ProcedureDef(
            p.name, p.params, builder, _call_edges(p.body, proc_names)
        )

    if ast.main is None:
        main = Skip()
    else:
        env = {f"arg{i}": int(v) for i, v in enumerate(main_args)}
        main = elab.process(ast.main, env)
    return ElaboratedSpec(registry, procedures, main)


# ------------------------------------------------------------------ process -> DSL

_OP_OUT = {"=": "=", ">=": ">=", ">": ">", "!=": "/=", "<": "<", "<=": "<="}


def _ref_text(x) -> str:
    if isinstance(x, int):
        return str(x)
    if isinstance(x, VarRef):
        return x.name if x.idx is None else f"{x.name}[{x.idx}]"
    raise DslSyntaxError(f"cannot print operand {x!r}", 0, 0)


def _guard_text(g) -> str:
    if isinstance(g, GTrue):
        return "true"
    if isinstance(g, Eq):
        return f"(= {_ref_text(g.lhs)} {_ref_text(g.rhs)})"
    if isinstance(g, Gq):
        return f"(v>= {_ref_text(g.lhs)} {_ref_text(g.rhs)})"
    if isinstance(g, Gt):
        return f"(v> {_ref_text(g.lhs)} {_ref_text(g.rhs)})"
    if isinstance(g, SetIn):
        return f"(in {g.elt} {_ref_text(g.sv)})"
    if isinstance(g, And):
        return "(and " + " ".join(_guard_text(x) for x in g.gs) + ")"
    if isinstance(g, Or):
        return "(or " + " ".join(_guard_text(x) for x in g.gs) + ")"
    if isinstance(g, Not):
        return f"(not {_guard_text(g.g)})"
    raise DslSyntaxError(f"cannot print guard {g!r}", 0, 0)


def _constraint_text(c) -> str:
    if isinstance(c, Rel):
        return f"({_OP_OUT[c.op]} {_ref_text(c.lhs)} {_ref_text(c.rhs)})"
    if isinstance(c, Member) and not c.negated:
        return f"(in {c.elt} {_ref_text(c.sv)})"
    raise DslSyntaxError(f"cannot print constraint {c!r}", 0, 0)


def _expr_text(e: Expr) -> str:
    if isinstance(e, Num):
        return str(e.v)
    if isinstance(e, Name):
        return e.s
    return f"({e.op} {_expr_text(e.a)} {_expr_text(e.b)})"


def print_process(p: Process) -> str:
    """Render a host process tree as DSL text (the inverse of elaborate)."""
    kind = type(p)
    if kind is Skip:
        return "(skip)"
    if kind is Tell:
        return f"(tell {_constraint_text(p.c)})"
    if kind is PersistentTell:
        return f"(ptell {_constraint_text(p.c)})"
    if kind is When:
        return f"(when {_guard_text(p.g)} {print_process(p.body)})"
    if kind is Unless:
        return f"(unless {_guard_text(p.g)} {print_process(p.body)})"
    if kind is Par:
        return "(par " + " ".join(print_process(q) for q in p.children) + ")"
    if kind is NextN:
        return f"(next {print_process(p.body)})" if p.n == 1 else f"(nextn {p.n} {print_process(p.body)})"
    if kind is Bang:
        return f"(! {print_process(p.body)})"
    if kind is Star:
        return f"(* {print_process(p.body)})"
    if kind is Sum:
        body = " ".join(f"({_guard_text(g)} {print_process(q)})" for g, q in p.branches)
        return f"(sum {body})"
    if kind is Local:
        names = " ".join(
            d.name if (d.lo, d.hi) == (LOCAL_LO, LOCAL_HI) else f"({d.name} {d.lo} {d.hi})"
            for d in p.decls
        )
        return f"(local ({names}) {print_process(p.body)})"
    if kind is Call:
        return f"(call {p.name}" + "".join(f" {a}" for a in p.args) + ")"
    if kind is CellNew:
        return f"(cell {p.name} {p.init})"
    if kind is CellAssign:
        return f"(assign {p.name} (lambda ({p.fn.param}) {_expr_text(p.fn.expr)}))"
    if kind is CellExch:
        return f"(exch {p.x} {p.y} (lambda ({p.fn.param}) {_expr_text(p.fn.expr)}))"
    raise DslSyntaxError(f"cannot print process {p!r}", 0, 0)


# ---------------------------------------------------------------------- lint

@dataclass(frozen=True)
class LintFinding:
    rule: str
    message: str
    line: int
    col: int


def _walk(node: SNode):
    yield node
    if isinstance(node, SList):
        for item in node.items:
            yield from _walk(item)
    elif isinstance(node, SIndex):
        yield from _walk(node.index)


def _head(node) -> str | None:
    if isinstance(node, SList) and node.items and isinstance(node.items[0], SAtom):
        v = node.items[0].value
        return v if isinstance(v, str) else None
    return None


def _choice_tells(node: SNode):
    """(var, value) pairs told by equality directly inside a choice branch."""
    stack = [node]
    while stack:
        q = stack.pop()
        h = _head(q)
        if h == "tell" and len(q.items) == 2:
            c = q.items[1]
            if _head(c) == "=" and len(c.items) == 3:
                lhs, rhs = c.items[1], c.items[2]
                if isinstance(rhs, SAtom) and isinstance(rhs.value, int):
                    yield strip_spans(lhs), rhs.value
        elif h in ("par", "||", "!", "local"):
            stack.extend(q.items[1:])


def lint(ast: SpecAst) -> list[LintFinding]:
    out = []
    reachable = set()

    def bodies():
        for p in ast.procs:
            yield p.body
        if ast.main is not None:
            yield ast.main

    # replicated choice telling one variable several values
    for body in bodies():
        for node in _walk(body):
            if _head(node) != "!":
                continue
            inner = node.items[1] if len(node.items) == 2 else None
            if _head(inner) == "!":
                continue  # the innermost replication reports

            if _head(inner) not in ("+", "sum"):
                continue
            branches = inner.items[1:]
            if _head(inner) == "sum":
                branches = tuple(b.items[1] for b in branches
                                 if isinstance(b, SList) and len(b.items) == 2)
            told = {}
            for br in branches:
                for var, val in _choice_tells(br):
                    told.setdefault(var, set()).add(val)
            for var, vals in told.items():
                if len(vals) > 1:
                    out.append(LintFinding(
                        "inconsistent-replicated-choice",
                        f"replicated choice tells {var!r} each of {sorted(vals)}; "
                        f"the replicas contradict each other",
                        node.line, node.col,
                    ))

    # persistent tells that would need structure copied across units
    for body in bodies():
        for node in _walk(body):
            if _head(node) != "ptell" or len(node.items) != 2:
                continue
            c = node.items[1]
            ch = _head(c)
            if ch == "in":
                out.append(LintFinding(
                    "persistent-structured-tell",
                    "persistent set membership would need the set bound copied between units",
                    node.line, node.col,
                ))
            elif ch in TELL_OPS and ch != "=" and len(c.items) == 3:
                sides = c.items[1:]
                if all(not (isinstance(s, SAtom) and isinstance(s.value, int)) for s in sides):
                    out.append(LintFinding(
                        "persistent-structured-tell",
                        "persistent inter-variable inequality cannot be carried across units",
                        node.line, node.col,
                    ))

    # dimension and declaration checks on statically known accesses
    decls = {d.name: d for d in ast.decls}
    for p in ast.procs:
        params = set(p.params)
        _lint_names(p.body, decls, params, out)
    if ast.main is not None:
        _lint_names(ast.main, decls, set(), out)

    # call graph: unguarded cycles and unused procedures
    proc_names = {p.name for p in ast.procs}
    edges = {p.name: _call_edges(p.body, proc_names) for p in ast.procs}
    unguarded = {n: sorted({c for c, g in e if not g and c in proc_names}) for n, e in edges.items()}
    color = {}

    def visit(n, path):
        color[n] = 1
        for m in unguarded.get(n, ()):
            if color.get(m) == 1:
                cyc = path[path.index(m):] + [m] if m in path else [n, m]
                out.append(LintFinding(
                    "unguarded-recursion",
                    "call cycle with no next between the calls: " + " -> ".join(cyc),
                    0, 0,
                ))
            elif color.get(m, 0) == 0:
                visit(m, path + [m])
        color[n] = 2

    for n in sorted(proc_names):
        if color.get(n, 0) == 0:
            visit(n, [n])

    if ast.main is not None:
        roots = {c for c, _ in _call_edges(ast.main, proc_names)}
        reachable = set()
        frontier = list(roots)
        while frontier:
            n = frontier.pop()
            if n in reachable:
                continue
            reachable.add(n)
            frontier.extend(c for c, _ in edges.get(n, ()) if c in proc_names)
        for p in ast.procs:
            if p.name not in reachable:
                out.append(LintFinding(
                    "unused-procedure",
                    f"{p.name} is never called from main",
                    p.line, p.col,
                ))
    return out


_VAR_HEADS = {"tell", "ptell"}


def _lint_names(body: SNode, decls: dict, params: set, out: list):
    locals_ = set()
    for node in _walk(body):
        h = _head(node)
        if h == "local" and len(node.items) == 3 and isinstance(node.items[1], SList):
            for item in node.items[1].items:
                if isinstance(item, SAtom):
                    locals_.add(item.value)
                elif isinstance(item, SList) and item.items and isinstance(item.items[0], SAtom):
                    locals_.add(item.items[0].value)
    for node in _walk(body):
        if isinstance(node, SIndex):
            if node.name in locals_:
                continue
            d = decls.get(node.name)
            if d is None:
                out.append(LintFinding("undeclared", f"no declaration for {node.name!r}",
                                       node.line, node.col))
            elif not isinstance(d, DeclArray):
                out.append(LintFinding("dimension", f"{node.name} is a scalar; indexed access",
                                       node.line, node.col))
            elif isinstance(node.index, SAtom) and isinstance(node.index.value, int):
                if not 0 <= node.index.value < d.dim:
                    out.append(LintFinding(
                        "dimension",
                        f"index {node.index.value} outside [0, {d.dim}) for {node.name}",
                        node.line, node.col,
                    ))
        elif _head(node) in _VAR_HEADS and len(node.items) == 2:
            c = node.items[1]
            if not (isinstance(c, SList) and len(c.items) == 3):
                continue
            lhs = c.items[1] if _head(c) != "in" else c.items[2]
            if isinstance(lhs, SAtom) and isinstance(lhs.value, str):
                name = lhs.value
                if name in params or name in locals_ or name == "true":
                    continue
                d = decls.get(name)
                if d is None:
                    out.append(LintFinding("undeclared", f"no declaration for {name!r}",
                                           lhs.line, lhs.col))
                elif isinstance(d, DeclArray):
                    out.append(LintFinding("dimension", f"{name} is an array; index required",
                                           lhs.line, lhs.col))


# ------------------------------------------------------------------- loading

def load(text: str, main_args: tuple = ()) -> ElaboratedSpec:
    return elaborate(parse(text), main_args)
