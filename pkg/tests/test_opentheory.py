import pytest

from holtrans import hol
from holtrans import opentheory as ot


def run_lines(*lines):
    return ot.run_text("\n".join(lines) + "\n")


MINIMAL = ("6", "version")


# ---------------------------------------------------------------------------
# parsing


def test_parse_minimal_preamble():
    cmds = ot.parse_article("6\nversion\n")
    assert cmds == [ot.IntLiteral(6), ot.Keyword("version")]


def test_parse_string_literal():
    assert ot.parse_article('"bool"\n') == [ot.StringLiteral("bool")]


def test_parse_comment_skipped():
    assert ot.parse_article("# comment\nnil\n") == [ot.Keyword("nil")]


def test_parse_escapes():
    cmds = ot.parse_article('"a\\"b\\\\c"\n')
    assert cmds == [ot.StringLiteral('a"b\\c')]


def test_parse_malformed_string():
    with pytest.raises(ot.MalformedString):
        ot.parse_article('"unterminated\n')


def test_parse_unknown_command():
    with pytest.raises(ot.UnknownCommand) as exc:
        ot.parse_article("6\nversion\nfrobnicate\n")
    assert "line 3" in str(exc.value)


def test_parse_negative_number():
    assert ot.parse_article("-3\n") == [ot.IntLiteral(-3)]


def test_parse_byte_order_mark():
    assert ot.parse_article(b"\xef\xbb\xbf6\nversion\n") == [
        ot.IntLiteral(6),
        ot.Keyword("version"),
    ]


# ---------------------------------------------------------------------------
# single steps


def test_step_refl():
    state = run_lines(*MINIMAL, '"A"', "varType", '"x"', "1", "def", "pop", "0", "def")
    # stack now holds the type; build var and refl by further steps
    state = run_lines(
        *MINIMAL,
        '"A"', "varType", "0", "def", "pop",
        '"x"', "0", "ref", "var", "varTerm", "refl",
    )
    thm = state.stack[0]
    assert isinstance(thm, ot.OThm)
    assert isinstance(thm.proof, hol.Refl)
    x = hol.Var("x", hol.TyVar("A"))
    assert thm.sequent.alpha_eq(hol.make_sequent((), hol.mk_eq(x, x)))


def test_step_eqmp_stack_order():
    # {p=q, p} |- q : the equality theorem is pushed first (deeper)
    state = run_lines(
        *MINIMAL,
        '"bool"', "typeOp", "nil", "opType", "0", "def", "pop",
        '"p"', "0", "ref", "var", "1", "def", "pop",
        '"q"', "0", "ref", "var", "2", "def", "pop",
        '"->"', "typeOp", "0", "ref", "0", "ref", "nil", "cons", "cons", "opType", "3", "def", "pop",
        '"->"', "typeOp", "0", "ref", "3", "ref", "nil", "cons", "cons", "opType", "4", "def", "pop",
        '"="', "const", "4", "ref", "constTerm", "5", "def", "pop",
        "5", "ref", "1", "ref", "varTerm", "appTerm", "2", "ref", "varTerm", "appTerm",
        "assume",
        "1", "ref", "varTerm", "assume",
        "eqMp",
    )
    thm = state.stack[0]
    assert thm.sequent.concl == hol.Var("q", hol.BOOL)
    assert len(thm.sequent.hyps) == 2


def test_trans_desugars_to_congruence_composition():
    a = hol.TyVar("A")
    x, y, z = hol.Var("x", a), hol.Var("y", a), hol.Var("z", a)
    d1 = hol.Assume(hol.mk_eq(x, y))
    d2 = hol.Assume(hol.mk_eq(y, z))
    p = ot.trans_proof(d1, hol.check_proof(d1), d2)
    assert isinstance(p, hol.EqMp)
    assert isinstance(p.eq, hol.AppThm)
    assert isinstance(p.eq.fun, hol.Refl)
    assert p.prem is d1
    seq = hol.check_proof(p)
    assert hol.alpha_equal(seq.concl, hol.mk_eq(x, z))


def test_sym_desugaring():
    a = hol.TyVar("A")
    x, y = hol.Var("x", a), hol.Var("y", a)
    d = hol.Assume(hol.mk_eq(x, y))
    p = ot.sym_proof(d, hol.check_proof(d))
    seq = hol.check_proof(p)
    assert hol.alpha_equal(seq.concl, hol.mk_eq(y, x))


def test_prove_hyp_desugaring():
    p, q = hol.Var("p", hol.BOOL), hol.Var("q", hol.BOOL)
    d_phi = hol.Assume(p)
    d_psi = hol.EqMp(hol.Assume(hol.mk_eq(p, q)), hol.Assume(p))
    out = hol.check_proof(ot.prove_hyp_proof(d_phi, d_psi))
    keys = {hol.term_key(h) for h in out.hyps}
    assert keys == {hol.term_key(p), hol.term_key(hol.mk_eq(p, q))}
    assert out.concl == q


# ---------------------------------------------------------------------------
# whole runs


def test_run_minimal():
    state = run_lines(*MINIMAL)
    assert state.theorems == () and state.assumptions == ()


def test_run_empty_fails():
    with pytest.raises(ot.UnsupportedVersion):
        ot.run([])


def test_run_requires_version_first():
    with pytest.raises(ot.UnsupportedVersion):
        run_lines("nil")


def test_run_rejects_other_versions():
    with pytest.raises(ot.UnsupportedVersion):
        run_lines("5", "version")


def test_run_rejects_duplicate_version():
    with pytest.raises(ot.UnsupportedVersion):
        run_lines("6", "version", "6", "version")


def test_identity_article(corpus_paths):
    path = next(p for p in corpus_paths if p.name == "01_identity.art")
    state = ot.run_text(path.read_text())
    assert len(state.theorems) == 1
    seq, proof = state.theorems[0]
    assert hol.check_proof(proof).alpha_eq(seq)


def test_remove_of_undefined_key_fails():
    with pytest.raises(ot.VMError) as exc:
        run_lines(*MINIMAL, "3", "remove")
    assert getattr(exc.value, "command_index", None) == 3


def test_dictionary_discipline():
    state = run_lines(*MINIMAL, '"bool"', "typeOp", "nil", "opType", "0", "def")
    stored = state.dictionary[0]
    state2 = ot.step(state, ot.IntLiteral(0))
    state2 = ot.step(state2, ot.Keyword("ref"))
    assert state2.stack[0] == stored
    # remove pushes the object and deletes the key
    state3 = ot.step(ot.step(state, ot.IntLiteral(0)), ot.Keyword("remove"))
    assert 0 not in state3.dictionary
    with pytest.raises(ot.VMError):
        ot.step(ot.step(state3, ot.IntLiteral(0)), ot.Keyword("ref"))


def test_stack_underflow():
    with pytest.raises(ot.StackUnderflow):
        run_lines(*MINIMAL, "refl")


def test_type_error_on_stack():
    with pytest.raises(ot.TypeErrorOnStack):
        run_lines(*MINIMAL, "6", "refl")


def test_thm_sequent_mismatch():
    # prove |- x = x but state |- y = y
    with pytest.raises(ot.SequentMismatch):
        run_lines(
            *MINIMAL,
            '"A"', "varType", "0", "def", "pop",
            '"x"', "0", "ref", "var", "varTerm", "1", "def", "pop",
            '"y"', "0", "ref", "var", "varTerm", "2", "def", "pop",
            "1", "ref", "refl",
            "nil",
            '"bool"', "typeOp", "nil", "opType", "3", "def", "pop",
            '"->"', "typeOp", "0", "ref", "3", "ref", "nil", "cons", "cons", "opType", "4", "def", "pop",
            '"->"', "typeOp", "0", "ref", "4", "ref", "nil", "cons", "cons", "opType", "5", "def", "pop",
            '"="', "const", "5", "ref", "constTerm",
            "2", "ref", "appTerm", "2", "ref", "appTerm",
            "thm",
        )


def test_pragma_pops_and_ignores():
    state = run_lines(*MINIMAL, '"debug"', "pragma")
    assert state.stack == ()


def test_axiom_recorded_in_assumptions(corpus_paths):
    path = next(p for p in corpus_paths if p.name == "11_axiom.art")
    state = ot.run_text(path.read_text())
    assert len(state.assumptions) == 1
    assert len(state.assumptions[0].hyps) == 1


def test_define_const_registers_generic():
    state = run_lines(
        *MINIMAL,
        '"bool"', "typeOp", "nil", "opType", "0", "def", "pop",
        '"x"', "0", "ref", "var", "1", "def", "pop",
        '"c.new"', "1", "ref", "1", "ref", "varTerm", "absTerm", "defineConst",
    )
    assert state.constants["c.new"] == hol.fn(hol.BOOL, hol.BOOL)
    thm = state.stack[0]
    assert isinstance(thm, ot.OThm) and isinstance(thm.proof, hol.DefineConst)
    const_obj = state.stack[1]
    assert const_obj == ot.OConst("c.new")


def test_duplicate_constant_definition_fails():
    with pytest.raises(ot.VMError):
        run_lines(
            *MINIMAL,
            '"bool"', "typeOp", "nil", "opType", "0", "def", "pop",
            '"x"', "0", "ref", "var", "1", "def", "pop",
            '"="', "1", "ref", "1", "ref", "varTerm", "absTerm", "defineConst",
        )


def test_auto_declared_constant_widens_to_generalization():
    # the first use fixes a provisional type; an incompatible second use
    # widens it so both instances match the final generic
    state = run_lines(
        *MINIMAL,
        '"bool"', "typeOp", "nil", "opType", "0", "def", "pop",
        '"ind"', "typeOp", "nil", "opType", "1", "def", "pop",
        '"mystery"', "const", "2", "def", "pop",
        "2", "ref", "0", "ref", "constTerm", "pop",
        "2", "ref", "1", "ref", "constTerm",
    )
    generic = state.externals["mystery"]
    assert isinstance(generic, hol.TyVar)
    assert hol.match_type(generic, hol.BOOL) is not None
    assert hol.match_type(generic, hol.IND) is not None


def test_builtin_constant_instance_checked_strictly():
    with pytest.raises(ot.TypeErrorOnStack):
        run_lines(
            *MINIMAL,
            '"bool"', "typeOp", "nil", "opType", "0", "def", "pop",
            '"="', "const", "0", "ref", "constTerm",
        )


def test_vm_soundness_on_corpus(corpus_paths):
    for path in corpus_paths:
        state = ot.run_text(path.read_text())
        for seq, proof in state.theorems:
            assert hol.check_proof(proof).alpha_eq(seq)


def test_run_is_deterministic(corpus_paths):
    text = corpus_paths[0].read_text()
    s1 = ot.run_text(text)
    s2 = ot.run_text(text)
    assert s1 == s2


def test_reserialization_roundtrip(corpus_paths):
    for path in corpus_paths:
        state = ot.run_text(path.read_text())
        regenerated = ot.serialize_article(state)
        state2 = ot.run_text(regenerated)
        assert len(state2.theorems) == len(state.theorems)
        for (s1, _), (s2, _) in zip(state.theorems, state2.theorems):
            assert s1.alpha_eq(s2)
