"""Spec language: reader, elaboration, printing, lint."""

from pathlib import Path

import pytest

from tellask import dsl
from tellask.errors import ArityError, BoundsError, DimensionError, DslSyntaxError, UnknownName
from tellask.syntax import Bang, Call, CellAssign, CellFn, Par, Rel, Tell, VarRef, When

SPEC_DIR = Path(__file__).resolve().parents[1] / "specs"
SPEC_FILES = sorted(SPEC_DIR.glob("*.ntcc"))


def test_spec_corpus_present():
    assert len(SPEC_FILES) >= 20


def test_parse_shape():
    ast = dsl.parse(
        """
        (declare-var x int 0 9)
        (defproc tick () (tell (= x 1)))
        (main (call tick))
        """
    )
    assert [d.name for d in ast.decls] == ["x"]
    assert [p.name for p in ast.procs] == ["tick"]
    assert ast.main is not None


@pytest.mark.parametrize(
    "text",
    [
        "(declare-var x int 0 9",      # unclosed list
        "(declare-var x int 0 9))",    # stray closer
        "(tell (= x 1))",              # process at top level
        "(main (tell (= x 1)) (skip))",  # main takes one body
    ],
)
def test_reader_rejects_malformed_input(text):
    with pytest.raises((DslSyntaxError,)):
        dsl.load(text)


def test_empty_declared_range_is_rejected():
    with pytest.raises(BoundsError):
        dsl.load("(declare-var x int 9 0)\n(main (skip))")


def test_syntax_errors_carry_positions():
    try:
        dsl.load("(declare-var x int 0 9)\n(main (when))")
    except DslSyntaxError as exc:
        assert exc.line == 2
        assert exc.col >= 1
    else:
        raise AssertionError("expected a syntax error")


def test_index_adjacency_rule():
    text = "(declare-array S int 4 0 9)\n(main (tell (= S[3] 1)))"
    spec = dsl.load(text)
    assert spec.main == Tell(Rel(VarRef("S", 3), "=", 1))

    with pytest.raises(DslSyntaxError):
        dsl.parse("(declare-array S int 4 0 9)\n(main (tell (= S [3] 1)))")


def test_index_expressions_fold_to_constants():
    text = "(declare-array A int 8 0 9)\n(main (tell (= A[(+ 1 2)] 5)))"
    spec = dsl.load(text)
    assert spec.main == Tell(Rel(VarRef("A", 3), "=", 5))


def test_out_of_range_index_is_rejected():
    with pytest.raises(DimensionError):
        dsl.load("(declare-array A int 3 0 9)\n(main (tell (= A[7] 5)))")


def test_call_arity_checked():
    text = """
    (declare-var x int 0 9)
    (defproc p (a b) (tell (= x a)))
    (main (call p 1))
    """
    with pytest.raises(ArityError):
        dsl.load(text)


def test_undeclared_name_is_rejected():
    with pytest.raises(UnknownName):
        dsl.load("(declare-var x int 0 9)\n(main (tell (= y 1)))")


def test_cell_functions_cannot_read_variables():
    # a declared variable is simply unknown inside the lambda
    text = """
    (declare-var c int 0 9)
    (declare-var x int 0 9)
    (main (par (cell c 0) (assign c (lambda (v) (+ v x)))))
    """
    with pytest.raises(UnknownName):
        dsl.load(text)
    # and a local is rejected explicitly: its value is not a number
    text = """
    (declare-var c int 0 9)
    (main (local (w) (par (cell c 0) (assign c (lambda (v) (+ v w))))))
    """
    with pytest.raises(DslSyntaxError):
        dsl.load(text)


def test_main_args_are_substituted():
    text = """
    (declare-var x int 0 99)
    (main (tell (= x (+ arg0 arg1))))
    """
    spec = dsl.load(text, (2, 3))
    assert spec.main == Tell(Rel(VarRef("x"), "=", 5))


def test_local_names_shadow_declarations():
    text = """
    (declare-var x int 0 9)
    (main (local ((x 0 5)) (tell (= x 2))))
    """
    spec = dsl.load(text)  # must not complain about the outer x
    assert type(spec.main).__name__ == "Local"


@pytest.mark.parametrize("path", SPEC_FILES, ids=lambda p: p.stem)
def test_print_parse_round_trip(path):
    text = path.read_text()
    ast = dsl.parse(text)
    again = dsl.parse(dsl.print_spec(ast))
    assert dsl.ast_equal(ast, again)


@pytest.mark.parametrize("path", SPEC_FILES, ids=lambda p: p.stem)
def test_corpus_elaborates(path):
    args = (2, 3) if "arg0" in path.read_text() else ()
    spec = dsl.load(path.read_text(), args)
    assert spec.main is not None


def test_print_process_matches_surface_syntax():
    cases = [
        (Tell(Rel(VarRef("x"), "=", 5)), "(tell (= x 5))"),
        (Bang(Tell(Rel(VarRef("x"), "!=", 2))), "(! (tell (/= x 2)))"),
        (Call("p", (1, 2)), "(call p 1 2)"),
        (
            CellAssign("c", CellFn("v", dsl.Bin("+", dsl.Name("v"), dsl.Num(1)))
                       if hasattr(dsl, "Bin") else CellFn.add(1)),
            "(assign c (lambda (v) (+ v 1)))",
        ),
    ]
    for proc, expected in cases:
        assert dsl.print_process(proc) == expected


def test_printed_process_reloads():
    spec = dsl.load(SPEC_FILES[0].read_text())
    body = dsl.print_process(spec.main)
    # re-wrap with the original declarations
    decls = [ln for ln in SPEC_FILES[0].read_text().splitlines()
             if ln.strip().startswith("(declare")]
    text = "\n".join(decls) + f"\n(main {body})"
    spec2 = dsl.load(text)
    assert spec2.main == spec.main


# --------------------------------------------------------------------- lint


def test_lint_flags_contradictory_replicated_choice_once():
    text = "(declare-var A int 0 9)\n(main (! (! (+ (tell (= A 1)) (tell (= A 2))))))"
    findings = dsl.lint(dsl.parse(text))
    assert len(findings) == 1
    f = findings[0]
    assert f.rule == "inconsistent-replicated-choice"
    assert (f.line, f.col) == (2, 10)


def test_lint_passes_consistent_choice():
    text = "(declare-var A int 0 9)\n(main (! (+ (tell (= A 1)) (tell (= A 1)))))"
    assert dsl.lint(dsl.parse(text)) == []


def test_lint_flags_unused_procedure():
    text = """
    (declare-var x int 0 9)
    (defproc used () (tell (= x 1)))
    (defproc orphan () (tell (= x 2)))
    (main (call used))
    """
    findings = dsl.lint(dsl.parse(text))
    assert [f.rule for f in findings] == ["unused-procedure"]
    assert "orphan" in findings[0].message


def test_lint_flags_unguarded_recursion():
    text = """
    (declare-var x int 0 9)
    (defproc spin () (par (tell (= x 1)) (call spin)))
    (main (call spin))
    """
    rules = [f.rule for f in dsl.lint(dsl.parse(text))]
    assert "unguarded-recursion" in rules


def test_lint_accepts_next_guarded_recursion():
    text = """
    (declare-var x int 0 9)
    (defproc tick () (par (tell (= x 1)) (next (call tick))))
    (main (call tick))
    """
    assert dsl.lint(dsl.parse(text)) == []


def test_lint_flags_undeclared_and_dimension_errors():
    text = """
    (declare-var x int 0 9)
    (declare-array A int 3 0 9)
    (main (par
      (tell (= ghost 1))
      (tell (= x[2] 1))
      (tell (= A[5] 1))))
    """
    rules = sorted(f.rule for f in dsl.lint(dsl.parse(text)))
    assert rules == ["dimension", "dimension", "undeclared"]


def test_lint_flags_persistent_structured_tells():
    text = """
    (declare-var x int 0 9)
    (declare-var y int 0 9)
    (declare-var S set 0 9)
    (main (par (ptell (in 3 S)) (ptell (< x y))))
    """
    rules = sorted(f.rule for f in dsl.lint(dsl.parse(text)))
    assert rules == ["persistent-structured-tell", "persistent-structured-tell"]


@pytest.mark.parametrize("path", SPEC_FILES, ids=lambda p: p.stem)
def test_corpus_lints_clean(path):
    assert dsl.lint(dsl.parse(path.read_text())) == []
