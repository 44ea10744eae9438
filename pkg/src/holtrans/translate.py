"""Translation of HOL types, terms, contexts and proofs into the encoding.

The base signature declares a type of object-level types, a decoding
function ``term`` with one rewrite rule identifying ``term (arrow a b)``
with ``term a -> term b``, a provability predicate ``proof``, and one
proof constant per primitive derivation rule.  Because the embedding is
shallow, beta-equal HOL terms have convertible translations, so beta steps
are proved by reflexivity and substitution is expressed by application.

Two modes are supported: the equality-primitive one (``q0``) and an
alternative (``pts``) where implication and universal quantification are
primitive and provability itself is defined by rewriting; in the latter,
equality and several derivation rules become definitions.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Optional

from . import dkfile, hol, kernel
from .kernel import (
    TYPE,
    Abs,
    App,
    ConstDecl,
    Const,
    Context,
    Defn,
    Prod,
    RewriteRule,
    Signature,
    Term,
    Var,
    app,
    arrow,
    close,
    lam,
    pi,
)


class TranslateError(Exception):
    pass


class UndeclaredTypeOp(TranslateError):
    pass


class UndeclaredConstant(TranslateError):
    pass


class InstanceMatchFailure(TranslateError):
    pass


class NotAProposition(TranslateError):
    pass


class DuplicateDeclaration(TranslateError):
    pass


# ---------------------------------------------------------------------------
# Kernel-side names.  Three disjoint namespaces for free variables keep HOL
# type variables, term variables (which are name+type pairs) and hypothesis
# references from ever colliding; binder hints keep the raw names for display.

_T = Const("type")
_BOOL = Const("bool")
_IND = Const("ind")
_ARROW = Const("arrow")
_TERM = Const("term")
_EQ = Const("eq")
_SELECT = Const("select")
_PROOF = Const("proof")
_IMP = Const("imp")
_FORALL = Const("forall")

BASE_CONSTS = (
    "type",
    "bool",
    "ind",
    "arrow",
    "term",
    "eq",
    "select",
    "proof",
    "Refl",
    "FunExt",
    "AppThm",
    "PropExt",
    "EqMp",
    "imp",
    "forall",
    "imp_intro",
    "imp_elim",
)


def tyvar_name(name: str) -> str:
    return "'" + name


def termvar_name(v: hol.Var) -> str:
    return "$" + v.name + "#" + hol.type_hash(v.type)


def hyp_name(prop: hol.HolTerm) -> str:
    return "h#" + hol.term_hash(prop)


def tyvar_ref(name: str) -> Var:
    return Var(tyvar_name(name))


def _tm(t: Term) -> Term:
    return App(_TERM, t)


def _pf(t: Term) -> Term:
    return App(_PROOF, t)


def _arr(a: Term, b: Term) -> Term:
    return app(_ARROW, a, b)


def _eqt(a: Term, x: Term, y: Term) -> Term:
    return app(_EQ, a, x, y)


# ---------------------------------------------------------------------------
# Base signatures


def _q0_items() -> list:
    a, b = Var("a"), Var("b")
    f, g, x, y = Var("f"), Var("g"), Var("x"), Var("y")
    p, q = Var("p"), Var("q")
    return [
        ConstDecl("type", TYPE),
        ConstDecl("bool", _T),
        ConstDecl("ind", _T),
        ConstDecl("arrow", arrow(_T, _T, _T)),
        ConstDecl("term", arrow(_T, TYPE)),
        ConstDecl("eq", pi("a", _T, _tm(_arr(a, _arr(a, _BOOL))))),
        ConstDecl("select", pi("a", _T, _tm(_arr(_arr(a, _BOOL), a)))),
        RewriteRule(
            (("a", _T), ("b", _T)),
            _tm(_arr(a, b)),
            arrow(_tm(a), _tm(b)),
        ),
        ConstDecl("proof", arrow(_tm(_BOOL), TYPE)),
        ConstDecl(
            "Refl",
            pi("a", _T, pi("x", _tm(a), _pf(_eqt(a, x, x)))),
        ),
        ConstDecl(
            "FunExt",
            pi("a", _T, pi("b", _T, pi("f", _tm(_arr(a, b)), pi("g", _tm(_arr(a, b)),
                arrow(
                    pi("x", _tm(a), _pf(_eqt(b, App(f, x), App(g, x)))),
                    _pf(_eqt(_arr(a, b), f, g)),
                ))))),
        ),
        ConstDecl(
            "AppThm",
            pi("a", _T, pi("b", _T, pi("f", _tm(_arr(a, b)), pi("g", _tm(_arr(a, b)),
                pi("x", _tm(a), pi("y", _tm(a),
                    arrow(
                        _pf(_eqt(_arr(a, b), f, g)),
                        _pf(_eqt(a, x, y)),
                        _pf(_eqt(b, App(f, x), App(g, y))),
                    ))))))),
        ),
        ConstDecl(
            "PropExt",
            pi("p", _tm(_BOOL), pi("q", _tm(_BOOL),
                arrow(
                    arrow(_pf(q), _pf(p)),
                    arrow(_pf(p), _pf(q)),
                    _pf(_eqt(_BOOL, p, q)),
                ))),
        ),
        ConstDecl(
            "EqMp",
            pi("p", _tm(_BOOL), pi("q", _tm(_BOOL),
                arrow(_pf(_eqt(_BOOL, p, q)), _pf(p), _pf(q)))),
        ),
    ]


def _pts_items() -> list:
    a, b = Var("a"), Var("b")
    f, g, x, y = Var("f"), Var("g"), Var("x"), Var("y")
    p, q = Var("p"), Var("q")
    bool_pred = _tm(_arr(_BOOL, _BOOL))

    eq_type = pi("a", _T, _tm(_arr(a, _arr(a, _BOOL))))
    eq_body = lam("a", _T, lam("x", _tm(a), lam("y", _tm(a),
        app(
            _FORALL,
            _arr(a, _BOOL),
            lam("p", _tm(_arr(a, _BOOL)),
                app(_IMP, App(p, x), App(p, y))),
        ))))

    refl_type = pi("a", _T, pi("x", _tm(a), _pf(_eqt(a, x, x))))
    refl_body = lam("a", _T, lam("x", _tm(a),
        lam("q", _tm(_arr(a, _BOOL)), lam("h", _pf(App(q, x)), Var("h")))))

    eqmp_type = pi("p", _tm(_BOOL), pi("q", _tm(_BOOL),
        arrow(_pf(_eqt(_BOOL, p, q)), _pf(p), _pf(q))))
    eqmp_body = lam("p", _tm(_BOOL), lam("q", _tm(_BOOL),
        lam("h", _pf(_eqt(_BOOL, p, q)), lam("hp", _pf(p),
            app(Var("h"), lam("b", _tm(_BOOL), Var("b")), Var("hp"))))))

    appthm_type = pi("a", _T, pi("b", _T, pi("f", _tm(_arr(a, b)), pi("g", _tm(_arr(a, b)),
        pi("x", _tm(a), pi("y", _tm(a),
            arrow(
                _pf(_eqt(_arr(a, b), f, g)),
                _pf(_eqt(a, x, y)),
                _pf(_eqt(b, App(f, x), App(g, y))),
            )))))))
    appthm_body = lam("a", _T, lam("b", _T, lam("f", _tm(_arr(a, b)), lam("g", _tm(_arr(a, b)),
        lam("x", _tm(a), lam("y", _tm(a),
            lam("hf", _pf(_eqt(_arr(a, b), f, g)), lam("hx", _pf(_eqt(a, x, y)),
                lam("q", _tm(_arr(b, _BOOL)), lam("h", _pf(App(q, App(f, x))),
                    app(
                        Var("hf"),
                        lam("k", _tm(_arr(a, b)), App(q, App(Var("k"), y))),
                        app(
                            Var("hx"),
                            lam("z", _tm(a), App(q, App(f, Var("z")))),
                            Var("h"),
                        ),
                    )))))))))))

    return [
        ConstDecl("type", TYPE),
        ConstDecl("bool", _T),
        ConstDecl("ind", _T),
        ConstDecl("arrow", arrow(_T, _T, _T)),
        ConstDecl("term", arrow(_T, TYPE)),
        RewriteRule(
            (("a", _T), ("b", _T)),
            _tm(_arr(a, b)),
            arrow(_tm(a), _tm(b)),
        ),
        ConstDecl("proof", arrow(_tm(_BOOL), TYPE)),
        ConstDecl("imp", _tm(_arr(_BOOL, _arr(_BOOL, _BOOL)))),
        ConstDecl("forall", pi("a", _T, _tm(_arr(_arr(a, _BOOL), _BOOL)))),
        RewriteRule(
            (("p", _tm(_BOOL)), ("q", _tm(_BOOL))),
            _pf(app(_IMP, p, q)),
            arrow(_pf(p), _pf(q)),
        ),
        RewriteRule(
            (("a", _T), ("p", _tm(_arr(a, _BOOL)))),
            _pf(app(_FORALL, a, p)),
            pi("x", _tm(a), _pf(App(p, x))),
        ),
        Defn(
            "imp_intro",
            pi("p", _tm(_BOOL), pi("q", _tm(_BOOL),
                arrow(arrow(_pf(p), _pf(q)), _pf(app(_IMP, p, q))))),
            lam("p", _tm(_BOOL), lam("q", _tm(_BOOL),
                lam("h", arrow(_pf(p), _pf(q)), Var("h")))),
        ),
        Defn(
            "imp_elim",
            pi("p", _tm(_BOOL), pi("q", _tm(_BOOL),
                arrow(_pf(app(_IMP, p, q)), _pf(p), _pf(q)))),
            lam("p", _tm(_BOOL), lam("q", _tm(_BOOL),
                lam("h", _pf(app(_IMP, p, q)), lam("x", _pf(p),
                    App(Var("h"), Var("x")))))),
        ),
        Defn("eq", eq_type, eq_body),
        ConstDecl("select", pi("a", _T, _tm(_arr(_arr(a, _BOOL), a)))),
        Defn("Refl", refl_type, refl_body),
        Defn("EqMp", eqmp_type, eqmp_body),
        Defn("AppThm", appthm_type, appthm_body),
        ConstDecl(
            "FunExt",
            pi("a", _T, pi("b", _T, pi("f", _tm(_arr(a, b)), pi("g", _tm(_arr(a, b)),
                arrow(
                    pi("x", _tm(a), _pf(_eqt(b, App(f, x), App(g, x)))),
                    _pf(_eqt(_arr(a, b), f, g)),
                ))))),
        ),
        ConstDecl(
            "PropExt",
            pi("p", _tm(_BOOL), pi("q", _tm(_BOOL),
                arrow(
                    arrow(_pf(q), _pf(p)),
                    arrow(_pf(p), _pf(q)),
                    _pf(_eqt(_BOOL, p, q)),
                ))),
        ),
    ]


_BASE_CACHE: dict[str, Signature] = {}


def base_signature(mode: str = "q0") -> Signature:
    if mode not in ("q0", "pts"):
        raise TranslateError(f"unknown mode {mode!r}")
    sig = _BASE_CACHE.get(mode)
    if sig is None:
        sig = Signature(_q0_items() if mode == "q0" else _pts_items())
        _BASE_CACHE[mode] = sig
    return sig


def pts_base() -> Signature:
    """The alternative-mode base with provability defined by rewriting."""
    return base_signature("pts")


def base_document(mode: str = "q0") -> dkfile.DkDocument:
    items: list = [dkfile.Comment(f"base signature, mode {mode}")]
    items.extend(base_signature(mode).items)
    return dkfile.DkDocument("hol", tuple(items))


# ---------------------------------------------------------------------------
# Translation environment


@dataclass
class TypeOpInfo:
    arity: int
    kname: str


@dataclass
class ConstInfo:
    generic: hol.HolType
    tyvars: tuple[str, ...]
    kname: str


def _tyvars_in_order(ty: hol.HolType, acc: Optional[list[str]] = None) -> list[str]:
    """Free type variables in first-occurrence order."""
    if acc is None:
        acc = []
    if isinstance(ty, hol.TyVar):
        if ty.name not in acc:
            acc.append(ty.name)
    else:
        for a in ty.args:
            _tyvars_in_order(a, acc)
    return acc


class TranslationEnv:
    """Declared operators and constants plus everything accumulated while
    translating: axiom constants, definition axioms, and memo tables."""

    def __init__(self, mode: str = "q0", compress: bool = False):
        if mode not in ("q0", "pts"):
            raise TranslateError(f"unknown mode {mode!r}")
        self.mode = mode
        self.compress = compress
        self.typeops: dict[str, TypeOpInfo] = {}
        self.constants: dict[str, ConstInfo] = {}
        self.decls: list = []  # article-level kernel items, emission order
        self._axioms: dict = {}  # sequent key -> (kname, tyvars, termvars)
        self._def_axioms: dict[str, str] = {}
        self._typeop_axioms: dict[int, tuple[str, str]] = {}
        self._seq_memo: dict = {}
        self._trans_memo: dict = {}
        self._termvars: dict[str, hol.Var] = {}

    @classmethod
    def from_vm(cls, state, mode: str = "q0", compress: bool = False) -> "TranslationEnv":
        env = cls(mode, compress)
        for name, arity in state.typeops.items():
            if name not in hol.BUILTIN_TYPE_ARITY:
                declare_type_op(env, name, arity)
        for name, generic in state.constants.items():
            if name not in (hol.EQ, hol.SELECT):
                declare_constant(env, name, generic)
        for name, generic in state.externals.items():
            declare_constant(env, name, generic)
        return env

    def sequent_of(self, proof: hol.Proof) -> hol.Sequent:
        return hol.check_proof(proof, self._seq_memo)

    def termvar(self, v: hol.Var) -> Var:
        n = termvar_name(v)
        self._termvars[n] = v
        return Var(n)


def declare_type_op(env: TranslationEnv, name: str, arity: int):
    if name in env.typeops or name in hol.BUILTIN_TYPE_ARITY:
        raise DuplicateDeclaration(f"type operator {name} already declared")
    kname = "ty." + name
    decl = ConstDecl(kname, arrow(*([_T] * arity + [_T])) if arity else _T)
    env.typeops[name] = TypeOpInfo(arity, kname)
    env.decls.append(decl)
    return decl


def declare_constant(env: TranslationEnv, name: str, generic: hol.HolType):
    if name in env.constants or name in (hol.EQ, hol.SELECT):
        raise DuplicateDeclaration(f"constant {name} already declared")
    tyvars = tuple(_tyvars_in_order(generic))
    kname = "tm." + name
    ty = trans_type_type_with(env, generic)
    for n in reversed(tyvars):
        ty = Prod(n, _T, close(ty, tyvar_name(n)))
    decl = ConstDecl(kname, ty)
    env.constants[name] = ConstInfo(generic, tyvars, kname)
    env.decls.append(decl)
    return decl


# ---------------------------------------------------------------------------
# Type and term translation


def trans_type_term(env: TranslationEnv, ty: hol.HolType) -> Term:
    if isinstance(ty, hol.TyVar):
        return tyvar_ref(ty.name)
    assert isinstance(ty, hol.TyOp)
    if ty.op == "bool":
        return _BOOL
    if ty.op == "ind":
        return _IND
    if ty.op == "->":
        return _arr(trans_type_term(env, ty.args[0]), trans_type_term(env, ty.args[1]))
    info = env.typeops.get(ty.op)
    if info is None:
        raise UndeclaredTypeOp(f"type operator {ty.op} not declared")
    if len(ty.args) != info.arity:
        raise UndeclaredTypeOp(f"type operator {ty.op} used at the wrong arity")
    return app(Const(info.kname), *(trans_type_term(env, a) for a in ty.args))


def trans_type_type_with(env: TranslationEnv, ty: hol.HolType) -> Term:
    return _tm(trans_type_term(env, ty))


# spec-facing alias
def trans_type_type(env: TranslationEnv, ty: hol.HolType) -> Term:
    return trans_type_type_with(env, ty)


def _instance_args(env: TranslationEnv, generic: hol.HolType, tyvars: tuple[str, ...], instance: hol.HolType) -> list[Term]:
    theta = hol.match_type(generic, instance)
    if theta is None:
        raise InstanceMatchFailure(f"{instance} is not an instance of {generic}")
    return [trans_type_term(env, theta[n]) for n in tyvars]


def trans_term(env: TranslationEnv, t: hol.HolTerm) -> Term:
    if isinstance(t, hol.Var):
        return env.termvar(t)
    if isinstance(t, hol.Const):
        if t.name == hol.EQ:
            (arg,) = _instance_args(env, hol.eq_generic(), ("A",), t.type)
            return App(_EQ, arg)
        if t.name == hol.SELECT:
            (arg,) = _instance_args(env, hol.select_generic(), ("A",), t.type)
            return App(_SELECT, arg)
        info = env.constants.get(t.name)
        if info is None:
            raise UndeclaredConstant(f"constant {t.name} not declared")
        args = _instance_args(env, info.generic, info.tyvars, t.type)
        return app(Const(info.kname), *args)
    if isinstance(t, hol.Abs):
        body = trans_term(env, t.body)
        return Abs(t.var.name, trans_type_type_with(env, t.var.type), close(body, termvar_name(t.var)))
    assert isinstance(t, hol.App)
    return App(trans_term(env, t.fn), trans_term(env, t.arg))


def trans_prop_type(env: TranslationEnv, prop: hol.HolTerm) -> Term:
    if hol.infer_type(prop) != hol.BOOL:
        raise NotAProposition(f"not a proposition: {prop}")
    return _pf(trans_term(env, prop))


def trans_context(env: TranslationEnv, props: Iterable[hol.HolTerm]) -> Context:
    ctx = Context()
    for prop in props:
        ctx = ctx.extended(hyp_name(prop), trans_prop_type(env, prop))
    return ctx


# ---------------------------------------------------------------------------
# Proof translation


@dataclass
class Closure:
    """Everything a derivation's translation depends on, in binding order."""

    tyvars: list[str]
    termvars: list[hol.Var]
    hyps: tuple[hol.HolTerm, ...]
    core: Term
    sequent: hol.Sequent


def trans_proof(env: TranslationEnv, proof: hol.Proof) -> Term:
    hit = env._trans_memo.get(id(proof))
    if hit is not None:
        return hit[1]
    t = _trans_proof(env, proof)
    env._trans_memo[id(proof)] = (proof, t)
    return t


def _trans_proof(env: TranslationEnv, proof: hol.Proof) -> Term:
    if isinstance(proof, hol.Refl):
        a = hol.infer_type(proof.term)
        return app(Const("Refl"), trans_type_term(env, a), trans_term(env, proof.term))

    if isinstance(proof, hol.ConvRefl):
        b = hol.infer_type(proof.normal)
        return app(Const("Refl"), trans_type_term(env, b), trans_term(env, proof.normal))

    if isinstance(proof, hol.Beta):
        b = hol.infer_type(proof.body)
        return app(Const("Refl"), trans_type_term(env, b), trans_term(env, proof.body))

    if isinstance(proof, hol.Assume):
        return Var(hyp_name(proof.prop))

    if isinstance(proof, hol.AppThm):
        s1 = env.sequent_of(proof.fun)
        s2 = env.sequent_of(proof.arg)
        f, g = hol.dest_eq(s1.concl)
        m, n = hol.dest_eq(s2.concl)
        a, b = hol.dest_fn(hol.infer_type(f))
        return app(
            Const("AppThm"),
            trans_type_term(env, a),
            trans_type_term(env, b),
            trans_term(env, f),
            trans_term(env, g),
            trans_term(env, m),
            trans_term(env, n),
            trans_proof(env, proof.fun),
            trans_proof(env, proof.arg),
        )

    if isinstance(proof, hol.AbsThm):
        s = env.sequent_of(proof.sub)
        m, n = hol.dest_eq(s.concl)
        a = proof.var.type
        b = hol.infer_type(m)
        lam_m = hol.Abs(proof.var, m)
        lam_n = hol.Abs(proof.var, n)
        body = close(trans_proof(env, proof.sub), termvar_name(proof.var))
        return app(
            Const("FunExt"),
            trans_type_term(env, a),
            trans_type_term(env, b),
            trans_term(env, lam_m),
            trans_term(env, lam_n),
            Abs(proof.var.name, trans_type_type_with(env, a), body),
        )

    if isinstance(proof, hol.EqMp):
        s1 = env.sequent_of(proof.eq)
        phi, psi = hol.dest_eq(s1.concl)
        return app(
            Const("EqMp"),
            trans_term(env, phi),
            trans_term(env, psi),
            trans_proof(env, proof.eq),
            trans_proof(env, proof.prem),
        )

    if isinstance(proof, hol.DeductAntiSym):
        s1 = env.sequent_of(proof.lhs)
        s2 = env.sequent_of(proof.rhs)
        phi, psi = s1.concl, s2.concl
        left = Abs("h", trans_prop_type(env, psi), close(trans_proof(env, proof.lhs), hyp_name(psi)))
        right = Abs("h", trans_prop_type(env, phi), close(trans_proof(env, proof.rhs), hyp_name(phi)))
        return app(
            Const("PropExt"),
            trans_term(env, phi),
            trans_term(env, psi),
            left,
            right,
        )

    if isinstance(proof, hol.Subst):
        return _trans_subst(env, proof)

    if isinstance(proof, hol.Axiom):
        return _trans_axiom(env, proof)

    if isinstance(proof, hol.DefineConst):
        kname = _defconst_axiom(env, proof)
        info = env.constants[proof.name]
        return app(Const(kname), *(tyvar_ref(n) for n in info.tyvars))

    if isinstance(proof, (hol.AbsRepThm, hol.RepAbsThm)):
        abs_k, rep_k = _typeop_axioms(env, proof.defn)
        kname = abs_k if isinstance(proof, hol.AbsRepThm) else rep_k
        return app(Const(kname), *(tyvar_ref(n) for n in proof.defn.tyvars))

    raise TranslateError(f"untranslatable proof node {proof!r}")


def closure_of(env: TranslationEnv, proof: hol.Proof) -> Closure:
    """The derivation's free type variables, term variables and hypotheses,
    in the fixed binding order (types first), plus the translated core."""
    core = trans_proof(env, proof)
    seq = env.sequent_of(proof)
    tyvars = set(hol.sequent_tyvars(seq))
    termvars: dict[str, hol.Var] = {}
    for v in hol.sequent_free_vars(seq):
        termvars[termvar_name(v)] = v
    for name in kernel.free_names(core):
        if name.startswith("'"):
            tyvars.add(name[1:])
        elif name.startswith("$"):
            termvars[name] = env._termvars[name]
    vs = sorted(termvars.values(), key=lambda v: (v.name, repr(hol.type_key(v.type))))
    for v in vs:
        hol.type_tyvars(v.type, tyvars)
    return Closure(sorted(tyvars), vs, seq.hyps, core, seq)


def _close_over(env: TranslationEnv, c: Closure, body: Term) -> Term:
    for prop in reversed(c.hyps):
        body = Abs("h", trans_prop_type(env, prop), close(body, hyp_name(prop)))
    for v in reversed(c.termvars):
        body = Abs(v.name, trans_type_type_with(env, v.type), close(body, termvar_name(v)))
    for n in reversed(c.tyvars):
        body = Abs(n, _T, close(body, tyvar_name(n)))
    return body


def _pi_over(env: TranslationEnv, c: Closure, ty: Term) -> Term:
    for prop in reversed(c.hyps):
        ty = Prod("h", trans_prop_type(env, prop), close(ty, hyp_name(prop)))
    for v in reversed(c.termvars):
        ty = Prod(v.name, trans_type_type_with(env, v.type), close(ty, termvar_name(v)))
    for n in reversed(c.tyvars):
        ty = Prod(n, _T, close(ty, tyvar_name(n)))
    return ty


def closed_theorem(env: TranslationEnv, proof: hol.Proof) -> tuple[Term, Term]:
    """A theorem as a self-contained definition: the closed statement type
    and the closed proof term."""
    c = closure_of(env, proof)
    ty = _pi_over(env, c, trans_prop_type(env, c.sequent.concl))
    body = _close_over(env, c, c.core)
    return ty, body


def completeness_context(env: TranslationEnv, proof: hol.Proof) -> Context:
    """The open-form context: type variables, term variables, hypotheses."""
    c = closure_of(env, proof)
    ctx = Context()
    for n in c.tyvars:
        ctx = ctx.extended(tyvar_name(n), _T)
    for v in c.termvars:
        ctx = ctx.extended(termvar_name(v), trans_type_type_with(env, v.type))
    for prop in c.hyps:
        ctx = ctx.extended(hyp_name(prop), trans_prop_type(env, prop))
    return ctx


def _trans_subst(env: TranslationEnv, proof: hol.Subst) -> Term:
    """Substitution as a beta redex: close the sub-derivation over everything
    it depends on (type variables outermost, so types are instantiated
    first), then apply to the images."""
    c = closure_of(env, proof.sub)
    fn = _close_over(env, c, c.core)
    theta = proof.subst.theta_dict()
    sigma = dict(proof.subst.sigma)
    args: list[Term] = []
    for n in c.tyvars:
        if n in theta:
            args.append(trans_type_term(env, theta[n]))
        else:
            args.append(tyvar_ref(n))
    for v in c.termvars:
        v_post = hol.Var(v.name, hol.type_subst(theta, v.type))
        args.append(trans_term(env, sigma.get(v_post, v_post)))
    for prop in c.hyps:
        args.append(Var(hyp_name(hol.apply_subst(proof.subst, prop))))
    return app(fn, *args)


def _trans_axiom(env: TranslationEnv, proof: hol.Axiom) -> Term:
    seq = env.sequent_of(proof)
    eta = hol.eta_instance(seq)
    if eta is not None:
        x, m = eta
        a = x.type
        b = hol.dest_fn(hol.infer_type(m))[1]
        body = app(
            Const("Refl"),
            trans_type_term(env, b),
            App(trans_term(env, m), env.termvar(x)),
        )
        return app(
            Const("FunExt"),
            trans_type_term(env, a),
            trans_type_term(env, b),
            trans_term(env, hol.Abs(x, hol.App(m, x))),
            trans_term(env, m),
            Abs(x.name, trans_type_type_with(env, a), close(body, termvar_name(x))),
        )
    kname, tyvars, termvars = _axiom_const(env, seq)
    args: list[Term] = [tyvar_ref(n) for n in tyvars]
    args.extend(env.termvar(v) for v in termvars)
    args.extend(Var(hyp_name(h)) for h in seq.hyps)
    return app(Const(kname), *args)


def _axiom_const(env: TranslationEnv, seq: hol.Sequent):
    key = (tuple(hol.term_key(h) for h in seq.hyps), hol.term_key(seq.concl))
    hit = env._axioms.get(key)
    if hit is not None:
        return hit
    kname = "ax." + hashlib.sha1(repr(key).encode()).hexdigest()[:12]
    tyvars = sorted(hol.sequent_tyvars(seq))
    termvars = sorted(
        hol.sequent_free_vars(seq), key=lambda v: (v.name, repr(hol.type_key(v.type)))
    )
    ty = trans_prop_type(env, seq.concl)
    for h in reversed(seq.hyps):
        ty = arrow(trans_prop_type(env, h), ty)
    for v in reversed(termvars):
        ty = Prod(v.name, trans_type_type_with(env, v.type), close(ty, termvar_name(v)))
    for n in reversed(tyvars):
        ty = Prod(n, _T, close(ty, tyvar_name(n)))
    env.decls.append(ConstDecl(kname, ty))
    env._axioms[key] = (kname, tyvars, termvars)
    return env._axioms[key]


def _defconst_axiom(env: TranslationEnv, proof: hol.DefineConst) -> str:
    hit = env._def_axioms.get(proof.name)
    if hit is not None:
        return hit
    info = env.constants.get(proof.name)
    if info is None:
        raise UndeclaredConstant(f"constant {proof.name} not declared")
    kname = info.kname + ".def"
    seq = env.sequent_of(proof)
    ty = trans_prop_type(env, seq.concl)
    for n in reversed(info.tyvars):
        ty = Prod(n, _T, close(ty, tyvar_name(n)))
    env.decls.append(ConstDecl(kname, ty))
    env._def_axioms[proof.name] = kname
    return kname


def _typeop_axioms(env: TranslationEnv, defn: hol.TypeOpDef) -> tuple[str, str]:
    hit = env._typeop_axioms.get(id(defn))
    if hit is not None:
        return hit
    names = []
    for node, suffix in ((hol.AbsRepThm(defn), "abs_rep"), (hol.RepAbsThm(defn), "rep_abs")):
        seq = env.sequent_of(node)
        kname = f"ty.{defn.op}.{suffix}"
        ty = trans_prop_type(env, seq.concl)
        for n in reversed(defn.tyvars):
            ty = Prod(n, _T, close(ty, tyvar_name(n)))
        env.decls.append(ConstDecl(kname, ty))
        names.append(kname)
    env._typeop_axioms[id(defn)] = (names[0], names[1])
    return env._typeop_axioms[id(defn)]


# ---------------------------------------------------------------------------
# Conversion-proof compression

def _pure_conversion(proof: hol.Proof, memo: dict) -> bool:
    # the congruence fragment; substitution instances of beta-equalities are
    # still beta-equalities, and the article VM encodes its beta-conversion
    # command as a substituted Beta node
    hit = memo.get(id(proof))
    if hit is not None:
        return hit[1]
    if isinstance(proof, (hol.Refl, hol.Beta, hol.ConvRefl)):
        ok = True
    elif isinstance(proof, hol.AppThm):
        ok = _pure_conversion(proof.fun, memo) and _pure_conversion(proof.arg, memo)
    elif isinstance(proof, hol.AbsThm):
        ok = _pure_conversion(proof.sub, memo)
    elif isinstance(proof, hol.Subst):
        ok = _pure_conversion(proof.sub, memo)
    else:
        ok = False
    memo[id(proof)] = (proof, ok)
    return ok


def compress_conversions(proof: hol.Proof, _memo: Optional[dict] = None, _pure: Optional[dict] = None) -> hol.Proof:
    """Collapse maximal congruence-only subtrees into single reflexivity steps.

    Such subtrees prove beta-equalities, so a ``ConvRefl`` node at the common
    beta-normal form proves the same sequent; the translation then emits one
    reflexivity constant instead of the whole congruence tower.
    """
    if _memo is None:
        _memo = {}
    if _pure is None:
        _pure = {}
    hit = _memo.get(id(proof))
    if hit is not None:
        return hit[1]
    out = _compress(proof, _memo, _pure)
    _memo[id(proof)] = (proof, out)
    return out


def _compress(proof: hol.Proof, memo: dict, pure: dict) -> hol.Proof:
    if _pure_conversion(proof, pure):
        if isinstance(proof, hol.Refl):
            return proof
        seq = hol.check_proof(proof)
        lhs, rhs = hol.dest_eq(seq.concl)
        return hol.ConvRefl(lhs, rhs, hol.beta_normalize(rhs))
    if isinstance(proof, hol.AppThm):
        return hol.AppThm(
            compress_conversions(proof.fun, memo, pure),
            compress_conversions(proof.arg, memo, pure),
        )
    if isinstance(proof, hol.AbsThm):
        return hol.AbsThm(proof.var, compress_conversions(proof.sub, memo, pure))
    if isinstance(proof, hol.EqMp):
        return hol.EqMp(
            compress_conversions(proof.eq, memo, pure),
            compress_conversions(proof.prem, memo, pure),
        )
    if isinstance(proof, hol.DeductAntiSym):
        return hol.DeductAntiSym(
            compress_conversions(proof.lhs, memo, pure),
            compress_conversions(proof.rhs, memo, pure),
        )
    if isinstance(proof, hol.Subst):
        return hol.Subst(proof.subst, compress_conversions(proof.sub, memo, pure))
    return proof


# ---------------------------------------------------------------------------
# Sharing


@dataclass
class ShareReport:
    document: dkfile.DkDocument
    hoisted: int
    replaced: int


def _escape_level(t: Term, memo: dict) -> int:
    """Number of binder levels the term's dangling indices escape (0 = closed)."""
    hit = memo.get(id(t))
    if hit is not None:
        return hit[1]
    if isinstance(t, kernel.BVar):
        out = t.index + 1
    elif isinstance(t, App):
        out = max(_escape_level(t.fn, memo), _escape_level(t.arg, memo))
    elif isinstance(t, Abs):
        out = max(_escape_level(t.domain, memo), _escape_level(t.body, memo) - 1)
    elif isinstance(t, Prod):
        out = max(_escape_level(t.domain, memo), _escape_level(t.codomain, memo) - 1)
    else:
        out = 0
    memo[id(t)] = (t, out)
    return out


def share_document(
    doc: dkfile.DkDocument,
    base: Optional[Signature] = None,
    min_size: int = 8,
    fuel: Optional[int] = None,
) -> ShareReport:
    """Hoist repeated closed subterms into definitions emitted before first use."""
    if base is None:
        base = base_signature("q0")
    esc: dict = {}
    counts: dict[Term, int] = {}

    def scan(t: Term) -> None:
        stack = [t]
        while stack:
            u = stack.pop()
            if isinstance(u, (kernel.Sort, Var, kernel.BVar, Const)):
                continue
            if (
                _escape_level(u, esc) == 0
                and not kernel.free_names(u)
                and kernel.term_size(u) >= min_size
            ):
                counts[u] = counts.get(u, 0) + 1
            if isinstance(u, App):
                stack.append(u.fn)
                stack.append(u.arg)
            else:
                stack.append(u.domain)
                stack.append(u.body if isinstance(u, Abs) else u.codomain)

    for item in doc.items:
        if isinstance(item, ConstDecl):
            scan(item.type)
        elif isinstance(item, Defn):
            scan(item.type)
            scan(item.body)

    shared = {t for t, c in counts.items() if c >= 2}
    if not shared:
        return ShareReport(doc, 0, 0)

    taken = {it.name for it in doc.items if isinstance(it, (ConstDecl, Defn))}
    names: dict[Term, str] = {}
    counter = 0

    def new_name() -> str:
        nonlocal counter
        while True:
            cand = f"s{counter}"
            counter += 1
            if cand not in taken:
                taken.add(cand)
                return cand

    new_items: list = []
    sig = base
    emitted: set[str] = set()
    replaced = 0

    def emit_shared(t: Term) -> str:
        nonlocal sig
        name = names.get(t)
        if name is not None and name in emitted:
            return name
        body = rewrite(t, skip_self=True)
        name = names.setdefault(t, new_name())
        ty = kernel.infer_type(sig, Context(), body, fuel)
        item = Defn(name, ty, body)
        new_items.append(item)
        sig = sig.extended(item)
        emitted.add(name)
        return name

    def rewrite(t: Term, skip_self: bool = False) -> Term:
        nonlocal replaced
        if not skip_self and t in shared:
            name = emit_shared(t)
            replaced += 1
            return Const(name)
        if isinstance(t, App):
            return App(rewrite(t.fn), rewrite(t.arg))
        if isinstance(t, Abs):
            return Abs(t.hint, rewrite(t.domain), rewrite(t.body))
        if isinstance(t, Prod):
            return Prod(t.hint, rewrite(t.domain), rewrite(t.codomain))
        return t

    for item in doc.items:
        if isinstance(item, ConstDecl):
            item = ConstDecl(item.name, rewrite(item.type))
        elif isinstance(item, Defn):
            item = Defn(item.name, rewrite(item.type), rewrite(item.body))
        new_items.append(item)
        if isinstance(item, (ConstDecl, Defn, RewriteRule)):
            sig = sig.extended(item)

    return ShareReport(
        dkfile.DkDocument(doc.module, tuple(new_items)), len(emitted), replaced
    )


def share(doc: dkfile.DkDocument, base: Optional[Signature] = None, min_size: int = 8) -> dkfile.DkDocument:
    return share_document(doc, base, min_size).document


# ---------------------------------------------------------------------------
# Whole-run translation


@dataclass
class TranslationResult:
    document: dkfile.DkDocument
    theorem_count: int
    share_hits: int


def translate_state(
    state,
    module: str,
    mode: str = "q0",
    compress: bool = False,
    sharing: bool = True,
    min_size: int = 8,
) -> TranslationResult:
    """Translate a finished VM run into a document referencing the base file."""
    env = TranslationEnv.from_vm(state, mode, compress)
    theorems: list[tuple[Term, Term]] = []
    for seq, proof in state.theorems:
        p = compress_conversions(proof) if compress else proof
        theorems.append(closed_theorem(env, p))

    items: list = [dkfile.Comment(f"module {module}: generated from {module}.art")]
    items.append(dkfile.Comment("requires hol.dk (base signature)"))
    items.extend(env.decls)
    for k, (ty, body) in enumerate(theorems):
        items.append(Defn(f"thm_{k}", ty, body))

    namer = dkfile.DkNamer(reserved=BASE_CONSTS)
    doc = dkfile.rename_document(dkfile.DkDocument(module, tuple(items)), namer)

    share_hits = 0
    if sharing:
        report = share_document(doc, base_signature(mode), min_size)
        doc = report.document
        share_hits = report.replaced
    return TranslationResult(doc, len(state.theorems), share_hits)


def verify_document(doc: dkfile.DkDocument, mode: str = "q0", fuel: Optional[int] = None) -> None:
    """Type-check a generated document against the base signature."""
    items = tuple(base_signature(mode).items) + dkfile.signature_items(doc)
    kernel.check_signature(Signature(items), fuel)
