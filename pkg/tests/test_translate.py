import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holtrans import dkfile, hol
from holtrans import kernel as k
from holtrans import translate as tr

from conftest import HolGen, env_signature, make_env

A = hol.TyVar("A")
B = hol.TyVar("B")
TERM, PROOF, EQ = k.Const("term"), k.Const("proof"), k.Const("eq")
ARROW, BOOL = k.Const("arrow"), k.Const("bool")


# ---------------------------------------------------------------------------
# base signatures


def test_base_q0_checks_and_has_one_rule(q0):
    k.check_signature(q0)
    assert len(q0.rules) == 1


def test_base_pts_checks_and_has_three_rules(pts):
    k.check_signature(pts)
    assert len(pts.rules) == 3


# ---------------------------------------------------------------------------
# types


def test_trans_type_bool():
    env = make_env()
    assert tr.trans_type_term(env, hol.BOOL) == BOOL


def test_trans_type_arrow():
    env = make_env()
    got = tr.trans_type_term(env, hol.fn(A, hol.BOOL))
    assert got == k.app(ARROW, tr.tyvar_ref("A"), BOOL)


def test_trans_type_operator_applied():
    env = make_env()
    from conftest import LIST_OP

    got = tr.trans_type_term(env, hol.TyOp(LIST_OP, (hol.BOOL,)))
    assert got == k.App(k.Const("ty." + LIST_OP), BOOL)


def test_trans_type_undeclared_operator():
    env = tr.TranslationEnv()
    with pytest.raises(tr.UndeclaredTypeOp):
        tr.trans_type_term(env, hol.TyOp("nope", ()))


def test_trans_type_as_type():
    env = make_env()
    assert tr.trans_type_type(env, hol.BOOL) == k.App(TERM, BOOL)
    assert tr.trans_type_type(env, hol.IND) == k.App(TERM, k.Const("ind"))


def test_trans_type_arrow_convertible_to_function_space(q0):
    env = make_env()
    got = tr.trans_type_type(env, hol.fn(A, B))
    fn_space = k.arrow(
        k.App(TERM, tr.tyvar_ref("A")), k.App(TERM, tr.tyvar_ref("B"))
    )
    assert k.convertible(q0, got, fn_space)


# ---------------------------------------------------------------------------
# terms


def test_trans_term_variable():
    env = make_env()
    x = hol.Var("x", A)
    assert tr.trans_term(env, x) == env.termvar(x)


def test_trans_term_equality_instance():
    env = make_env()
    eq_bool = hol.eq_const(hol.BOOL)
    assert tr.trans_term(env, eq_bool) == k.App(EQ, BOOL)


def test_trans_term_section4_example(q0):
    env = make_env()
    x = hol.Var("x", A)
    got = tr.trans_term(env, hol.App(hol.Abs(x, x), x))
    lam = k.lam("x", k.App(TERM, tr.tyvar_ref("A")), k.Var("placeholder"))
    # the binder closes its own occurrence: body is the bound variable
    lam = k.Abs("x", k.App(TERM, tr.tyvar_ref("A")), k.BVar(0))
    assert got == k.App(lam, env.termvar(x))
    assert k.normalize(q0, got) == env.termvar(x)


def test_trans_term_undeclared_constant():
    env = make_env()
    with pytest.raises(tr.UndeclaredConstant):
        tr.trans_term(env, hol.Const("mystery", hol.BOOL))


def test_trans_term_instance_match_failure():
    env = make_env()
    # k.f is generic over A -> bool; an ind-codomain instance cannot match
    with pytest.raises(tr.InstanceMatchFailure):
        tr.trans_term(env, hol.Const("k.f", hol.fn(hol.BOOL, hol.IND)))


def test_trans_prop_and_context():
    env = make_env()
    x, y = hol.Var("x", A), hol.Var("y", A)
    prop = hol.mk_eq(x, y)
    got = tr.trans_prop_type(env, prop)
    want = k.App(
        PROOF, k.app(EQ, tr.tyvar_ref("A"), env.termvar(x), env.termvar(y))
    )
    assert got == want
    assert len(tr.trans_context(env, ())) == 0
    ctx = tr.trans_context(env, (prop,))
    assert list(ctx) == [(tr.hyp_name(prop), got)]
    with pytest.raises(tr.NotAProposition):
        tr.trans_prop_type(env, x)


# ---------------------------------------------------------------------------
# declarations


def test_declare_type_op_shapes():
    env = tr.TranslationEnv()
    decl = tr.declare_type_op(env, "list", 1)
    assert decl.type == k.arrow(k.Const("type"), k.Const("type"))
    decl0 = tr.declare_type_op(env, "zeroary", 0)
    assert decl0.type == k.Const("type")
    with pytest.raises(tr.DuplicateDeclaration):
        tr.declare_type_op(env, "list", 1)


def test_declare_constant_generalizes():
    env = tr.TranslationEnv()
    decl = tr.declare_constant(env, "id", hol.fn(A, A))
    a = k.Var("'A")
    want = k.Prod(
        "A",
        k.Const("type"),
        k.close(k.App(TERM, k.app(ARROW, a, a)), "'A"),
    )
    assert decl.type == want
    with pytest.raises(tr.DuplicateDeclaration):
        tr.declare_constant(env, "id", hol.fn(A, A))


# ---------------------------------------------------------------------------
# proofs


def test_trans_refl_clause():
    env = make_env()
    x = hol.Var("x", A)
    got = tr.trans_proof(env, hol.Refl(x))
    assert got == k.app(k.Const("Refl"), tr.tyvar_ref("A"), env.termvar(x))


def test_trans_beta_clause():
    env = make_env()
    x = hol.Var("x", A)
    f = hol.Var("f", hol.fn(A, B))
    proof = hol.Beta(x, hol.App(f, x))
    got = tr.trans_proof(env, proof)
    want = k.app(
        k.Const("Refl"),
        tr.tyvar_ref("B"),
        k.App(env.termvar(f), env.termvar(x)),
    )
    assert got == want


def _example2():
    x, y, z = hol.Var("x", A), hol.Var("y", A), hol.Var("z", A)
    d1 = hol.Assume(hol.mk_eq(x, y))
    d2 = hol.Assume(hol.mk_eq(y, z))
    congr = hol.AppThm(hol.Refl(hol.App(hol.eq_const(A), x)), d2)
    return hol.EqMp(congr, d1), (x, y, z)


def test_example2_checks_at_translated_conclusion(q0):
    env = make_env()
    proof, (x, _, z) = _example2()
    ctx = tr.completeness_context(env, proof)
    term = tr.trans_proof(env, proof)
    ty = k.infer_type(q0, ctx, term)
    assert k.convertible(q0, ty, tr.trans_prop_type(env, hol.mk_eq(x, z)))


def test_eta_axiom_discharged_via_funext(q0):
    env = make_env()
    f = hol.Var("f", hol.fn(A, B))
    x = hol.Var("x", A)
    ax = hol.Axiom((), hol.mk_eq(hol.Abs(x, hol.App(f, x)), f))
    term = tr.trans_proof(env, ax)
    head = k.spine(term)[0]
    assert head == k.Const("FunExt")
    assert not env.decls or all(
        not d.name.startswith("ax.") for d in env.decls if isinstance(d, k.ConstDecl)
    )
    ctx = tr.completeness_context(env, ax)
    ty = k.infer_type(q0, ctx, term)
    want = tr.trans_prop_type(env, hol.check_proof(ax).concl)
    assert k.convertible(q0, ty, want)


def test_other_axioms_become_premised_constants(q0):
    env = make_env()
    p, q = hol.Var("p", hol.BOOL), hol.Var("q", hol.BOOL)
    ax = hol.Axiom((p,), q)
    term = tr.trans_proof(env, ax)
    head = k.spine(term)[0]
    assert isinstance(head, k.Const) and head.name.startswith("ax.")
    assert any(
        isinstance(d, k.ConstDecl) and d.name == head.name for d in env.decls
    )
    ctx = tr.completeness_context(env, ax)
    ty = k.infer_type(env_signature(env), ctx, term)
    assert k.convertible(q0, ty, tr.trans_prop_type(env, q))


def test_subst_translation_instantiates_types_first(q0):
    env = make_env()
    x = hol.Var("x", A)
    s = hol.HolSubst(
        theta=(("A", hol.BOOL),),
        sigma=((hol.Var("x", hol.BOOL), hol.Var("y", hol.BOOL)),),
    )
    proof = hol.Subst(s, hol.Refl(x))
    term = tr.trans_proof(env, proof)
    # outermost application argument chain starts with the type image
    head, args = k.spine(term)
    assert isinstance(head, k.Abs)
    assert args[0] == BOOL
    ctx = tr.completeness_context(env, proof)
    ty = k.infer_type(q0, ctx, term)
    y = hol.Var("y", hol.BOOL)
    assert k.convertible(q0, ty, tr.trans_prop_type(env, hol.mk_eq(y, y)))


def test_define_const_emits_declaration_and_axiom(q0):
    env = make_env()
    x = hol.Var("x", hol.BOOL)
    tr.declare_constant(env, "c.id", hol.fn(hol.BOOL, hol.BOOL))
    proof = hol.DefineConst("c.id", hol.Abs(x, x))
    term = tr.trans_proof(env, proof)
    names = {d.name for d in env.decls if isinstance(d, k.ConstDecl)}
    assert "tm.c.id" in names and "tm.c.id.def" in names
    ctx = tr.completeness_context(env, proof)
    ty = k.infer_type(env_signature(env), ctx, term)
    want = tr.trans_prop_type(env, hol.check_proof(proof).concl)
    assert k.convertible(env_signature(env), ty, want)


# ---------------------------------------------------------------------------
# conversion-proof compression


def _conversion_tower():
    bb = hol.fn(hol.BOOL, hol.BOOL)
    f, g = hol.Var("f", bb), hol.Var("g", bb)
    x = hol.Var("x", hol.BOOL)
    beta = hol.Beta(x, x)
    inner = hol.AppThm(hol.Refl(g), beta)
    return hol.AppThm(hol.Refl(f), inner), (f, g, x)


def test_compression_collapses_conversion_tower(q0):
    proof, (f, g, x) = _conversion_tower()
    assert len(_nodes(proof)) == 5
    compressed = tr.compress_conversions(proof)
    assert isinstance(compressed, hol.ConvRefl)
    want = hol.App(f, hol.App(g, x))
    assert hol.alpha_equal(compressed.normal, want)
    # both translations check at the original statement
    env = make_env()
    ctx = tr.completeness_context(env, proof)
    want_ty = tr.trans_prop_type(env, hol.check_proof(proof).concl)
    for p in (proof, compressed):
        ty = k.infer_type(q0, ctx, tr.trans_proof(env, p))
        assert k.convertible(q0, ty, want_ty)
    # and the compressed term is smaller
    assert k.term_size(tr.trans_proof(env, compressed)) < k.term_size(
        tr.trans_proof(env, proof)
    )


def _nodes(proof):
    out = [proof]
    if isinstance(proof, hol.AppThm):
        out += _nodes(proof.fun) + _nodes(proof.arg)
    elif isinstance(proof, hol.AbsThm):
        out += _nodes(proof.sub)
    elif isinstance(proof, hol.EqMp):
        out += _nodes(proof.eq) + _nodes(proof.prem)
    elif isinstance(proof, hol.DeductAntiSym):
        out += _nodes(proof.lhs) + _nodes(proof.rhs)
    elif isinstance(proof, hol.Subst):
        out += _nodes(proof.sub)
    return out


def test_compression_identity_on_refl():
    x = hol.Var("x", A)
    proof = hol.Refl(x)
    assert tr.compress_conversions(proof) is proof


def test_compression_skips_non_conversion_children():
    p, q = hol.Var("p", hol.BOOL), hol.Var("q", hol.BOOL)
    e1 = hol.EqMp(hol.Assume(hol.mk_eq(p, q)), hol.Assume(p))
    e2 = hol.EqMp(hol.Assume(hol.mk_eq(hol.mk_eq(p, q), hol.mk_eq(q, p))),
                  hol.Assume(hol.mk_eq(p, q)))
    proof = hol.AppThm(e2, hol.Refl(p))
    out = tr.compress_conversions(proof)
    assert isinstance(out, hol.AppThm)
    assert isinstance(out.fun, hol.EqMp)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_compression_soundness(seed):
    q0 = tr.base_signature("q0")
    gen = HolGen(seed)
    proof = gen.proof(3)
    compressed = tr.compress_conversions(proof)
    env = make_env()
    ctx = tr.completeness_context(env, proof)
    want = tr.trans_prop_type(env, hol.check_proof(proof).concl)
    term = tr.trans_proof(env, compressed)
    sig = env_signature(env)
    ty = k.infer_type(sig, ctx, term, fuel=10**6)
    assert k.convertible(sig, ty, want)


# ---------------------------------------------------------------------------
# alternative mode


def test_pts_definitions_check_at_stated_types(pts):
    # Defn checking inside check_signature already enforces this; assert the
    # types directly as well
    p, q = k.Var("p"), k.Var("q")
    tb = k.App(TERM, BOOL)
    pf = lambda t: k.App(PROOF, t)
    imp_intro = next(it for it in pts.items if isinstance(it, k.Defn) and it.name == "imp_intro")
    want = k.pi("p", tb, k.pi("q", tb,
        k.arrow(k.arrow(pf(p), pf(q)), pf(k.app(k.Const("imp"), p, q)))))
    assert imp_intro.type == want
    got = k.infer_type(pts, k.Context(), imp_intro.body)
    assert k.convertible(pts, got, want)
    imp_elim = next(it for it in pts.items if isinstance(it, k.Defn) and it.name == "imp_elim")
    want_elim = k.pi("p", tb, k.pi("q", tb,
        k.arrow(pf(k.app(k.Const("imp"), p, q)), pf(p), pf(q))))
    assert imp_elim.type == want_elim
    got = k.infer_type(pts, k.Context(), imp_elim.body)
    assert k.convertible(pts, got, want_elim)


def test_pts_provability_rewrites(pts):
    p, q = k.Var("p"), k.Var("q")
    pf = lambda t: k.App(PROOF, t)
    got = k.normalize(pts, pf(k.app(k.Const("imp"), p, q)))
    assert got == k.arrow(pf(p), pf(q))
    got = k.normalize(pts, pf(k.app(k.Const("forall"), k.Var("a"), p)))
    want = k.pi("x", k.App(TERM, k.Var("a")), pf(k.App(p, k.Var("x"))))
    assert got == want


def test_mode_agreement_on_example2(pts):
    env = make_env("pts")
    proof, (x, _, z) = _example2()
    ctx = tr.completeness_context(env, proof)
    ty = k.infer_type(pts, ctx, tr.trans_proof(env, proof))
    assert k.convertible(pts, ty, tr.trans_prop_type(env, hol.mk_eq(x, z)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 100_000))
def test_mode_agreement_on_random_proofs(seed):
    gen = HolGen(seed)
    proof = gen.proof(2)
    env = make_env("pts")
    ctx = tr.completeness_context(env, proof)
    term = tr.trans_proof(env, proof)
    sig = env_signature(env)
    ty = k.infer_type(sig, ctx, term, fuel=10**7)
    want = tr.trans_prop_type(env, hol.check_proof(proof).concl)
    assert k.convertible(sig, ty, want)


# ---------------------------------------------------------------------------
# sharing


def _big_type_doc():
    # two definitions both mentioning the same large closed type
    ty = k.App(TERM, k.app(ARROW, k.app(ARROW, BOOL, BOOL), k.app(ARROW, BOOL, BOOL)))
    d1 = k.Defn("t1", k.TYPE, ty)
    d2 = k.Defn("t2", k.TYPE, ty)
    return dkfile.DkDocument("m", (d1, d2)), ty


def test_share_hoists_repeated_subterm(q0):
    doc, ty = _big_type_doc()
    report = tr.share_document(doc, q0, min_size=8)
    defs = [it for it in report.document.items if isinstance(it, k.Defn)]
    hoisted = [d for d in defs if d.name.startswith("s")]
    assert len(hoisted) >= 1
    assert report.replaced >= 2
    # the hoisted definition appears before its first use
    names = [d.name for d in defs]
    assert names.index(hoisted[0].name) < names.index("t1")


def test_share_threshold_respected(q0):
    small = k.App(TERM, BOOL)  # 3 nodes, below the default threshold
    doc = dkfile.DkDocument("m", (k.Defn("t1", k.TYPE, small), k.Defn("t2", k.TYPE, small)))
    report = tr.share_document(doc, q0, min_size=8)
    assert report.hoisted == 0
    assert report.document == doc


def test_share_unfolding_recovers_document(q0, corpus_paths):
    from holtrans import opentheory as ot

    path = next(p for p in corpus_paths if p.name == "07_sym_trans.art")
    state = ot.run_text(path.read_text())
    plain = tr.translate_state(state, "m", sharing=False).document
    shared = tr.translate_state(state, "m", sharing=True, min_size=6).document
    tr.verify_document(shared)
    sig_plain = k.Signature(tuple(q0.items) + dkfile.signature_items(plain))
    sig_shared = k.Signature(tuple(q0.items) + dkfile.signature_items(shared))
    for item in plain.items:
        if isinstance(item, k.Defn):
            twin = next(
                it for it in shared.items if isinstance(it, k.Defn) and it.name == item.name
            )
            a = k.normalize(sig_plain, item.body, fuel=10**6)
            b = k.normalize(sig_shared, twin.body, fuel=10**6)
            assert a == b


# ---------------------------------------------------------------------------
# completeness and commutation properties


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 100_000))
def test_completeness_contexts_are_well_formed(seed):
    gen = HolGen(seed)
    proof = gen.proof(2)
    env = make_env()
    ctx = tr.completeness_context(env, proof)
    k.check_context(env_signature(env), ctx)


def test_corpus_translates_in_pts_mode(pts, corpus_paths):
    from holtrans import opentheory as ot

    for path in corpus_paths:
        state = ot.run_text(path.read_text())
        result = tr.translate_state(state, path.stem, mode="pts")
        tr.verify_document(result.document, mode="pts")
        compressed = tr.translate_state(state, path.stem, mode="pts", compress=True)
        tr.verify_document(compressed.document, mode="pts")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000))
def test_completeness_on_random_proofs(seed):
    gen = HolGen(seed)
    proof = gen.proof(3)
    env = make_env()
    ctx = tr.completeness_context(env, proof)
    term = tr.trans_proof(env, proof)
    sig = env_signature(env)  # after translation: axiom constants are lazy
    ty = k.infer_type(sig, ctx, term, fuel=10**6)
    want = tr.trans_prop_type(env, hol.check_proof(proof).concl)
    assert k.convertible(sig, ty, want)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_translated_types_live_in_type(seed):
    gen = HolGen(seed)
    ty = gen.type()
    env = make_env()
    ctx = k.Context()
    for name in sorted(hol.type_tyvars(ty)):
        ctx = ctx.extended(tr.tyvar_name(name), k.Const("type"))
    got = k.infer_type(env_signature(env), ctx, tr.trans_type_term(env, ty))
    assert got == k.Const("type")


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_translated_terms_live_in_translated_types(seed):
    gen = HolGen(seed)
    ty = gen.type()
    term = gen.term(ty, 3)
    env = make_env()
    sig = env_signature(env)
    kt = tr.trans_term(env, term)
    ctx = k.Context()
    for name in sorted(hol.term_tyvars(term)):
        ctx = ctx.extended(tr.tyvar_name(name), k.Const("type"))
    vs = sorted(hol.free_vars(term), key=lambda v: (v.name, repr(hol.type_key(v.type))))
    for v in vs:
        ctx = ctx.extended(tr.termvar_name(v), tr.trans_type_type(env, v.type))
    got = k.infer_type(sig, ctx, kt, fuel=10**6)
    assert k.convertible(sig, got, tr.trans_type_type(env, ty))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000))
def test_translation_commutes_with_substitution(seed):
    gen = HolGen(seed)
    ty = gen.type()
    term = gen.term(ty, 3)
    theta = {"A": gen.type(1), "B": gen.type(1)}
    sigma_pairs = []
    for v in sorted(hol.free_vars(term), key=lambda v: v.name):
        if gen.rng.random() < 0.5:
            key = hol.Var(v.name, hol.type_subst(theta, v.type))
            sigma_pairs.append((key, gen.term(key.type, 1)))
    s = hol.HolSubst(tuple(theta.items()), tuple(sigma_pairs))
    env = make_env()
    sig = env_signature(env)
    lhs = tr.trans_term(env, hol.apply_subst(s, term))
    mapping = {tr.tyvar_name(n): tr.trans_type_term(env, t) for n, t in theta.items()}
    for v in hol.free_vars(term):
        v_post = hol.Var(v.name, hol.type_subst(theta, v.type))
        image = dict(sigma_pairs).get(v_post, v_post)
        mapping[tr.termvar_name(v)] = tr.trans_term(env, image)
    rhs = k.substitute(tr.trans_term(env, term), mapping)
    assert k.convertible(sig, lhs, rhs, fuel=10**6)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000))
def test_reduction_preserved_on_beta_redexes(seed):
    gen = HolGen(seed)
    arg_ty = gen.type(1)
    body_ty = gen.type(1)
    v = hol.Var("x", arg_ty)
    body = gen.term(body_ty, 2, (v,))
    arg = gen.term(arg_ty, 2)
    redex = hol.App(hol.Abs(v, body), arg)
    reduct = hol.subst_vars({v: arg}, body)
    env = make_env()
    sig = env_signature(env)
    a = k.normalize(sig, tr.trans_term(env, redex), fuel=10**6)
    b = k.normalize(sig, tr.trans_term(env, reduct), fuel=10**6)
    assert a == b
