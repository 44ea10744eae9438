"""OpenTheory article parser and virtual machine.

An article is a newline-delimited command stream (format version 6).  The
VM executes it over a stack and a sharing dictionary, building explicit
derivation trees for every theorem object.  Derived commands (``sym``,
``trans``, ``proveHyp``, ``betaConv``) are expanded into compositions of
the primitive rules at construction time, so the proof checker stays
minimal.  ``serialize_article`` regenerates an article from a finished run
for round-trip testing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Union

from . import hol
from .hol import (
    Abs,
    AbsRepThm,
    AbsThm,
    App,
    AppThm,
    Assume,
    Axiom,
    Beta,
    Const,
    DeductAntiSym,
    DefineConst,
    EqMp,
    HolSubst,
    HolTerm,
    HolType,
    Proof,
    Refl,
    RepAbsThm,
    Sequent,
    Subst,
    TyOp,
    TypeOpDef,
    TyVar,
    Var,
    check_proof,
    make_sequent,
)


class ArticleError(Exception):
    pass


class UnknownCommand(ArticleError):
    pass


class MalformedString(ArticleError):
    pass


class VMError(ArticleError):
    pass


class StackUnderflow(VMError):
    pass


class TypeErrorOnStack(VMError):
    pass


class SequentMismatch(VMError):
    pass


class UnsupportedVersion(VMError):
    pass


# ---------------------------------------------------------------------------
# Commands

KEYWORDS = frozenset(
    """absTerm absThm appTerm appThm assume axiom betaConv cons const constTerm
    deductAntisym def defineConst defineTypeOp eqMp nil opType pop pragma
    proveHyp ref refl remove subst sym thm trans typeOp var varTerm varType
    version""".split()
)


@dataclass(frozen=True, slots=True)
class IntLiteral:
    value: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True, slots=True)
class StringLiteral:
    value: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True, slots=True)
class Keyword:
    name: str
    line: int = field(default=0, compare=False)


ArticleCommand = Union[IntLiteral, StringLiteral, Keyword]

_INT_RE = re.compile(r"-?[0-9]+\Z")


def _parse_quoted(line: str, lineno: int) -> str:
    if len(line) < 2 or not line.endswith('"'):
        raise MalformedString(f"line {lineno}: unterminated string")
    out: list[str] = []
    i = 1
    end = len(line) - 1
    while i < end:
        ch = line[i]
        if ch == '"':
            raise MalformedString(f"line {lineno}: unescaped quote inside string")
        if ch == "\\":
            if i + 1 >= end:
                raise MalformedString(f"line {lineno}: dangling escape")
            nxt = line[i + 1]
            # only quote and backslash are escapes; keep anything else verbatim
            out.append(nxt if nxt in ('"', "\\") else "\\" + nxt)
            i += 2
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def parse_article(data: Union[str, bytes]) -> list[ArticleCommand]:
    """One command per non-comment line; ``#`` lines and blank lines are skipped."""
    text = data.decode("utf-8-sig") if isinstance(data, bytes) else data
    commands: list[ArticleCommand] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        if line.startswith('"'):
            commands.append(StringLiteral(_parse_quoted(line, lineno), lineno))
        elif _INT_RE.match(line):
            commands.append(IntLiteral(int(line), lineno))
        elif line in KEYWORDS:
            commands.append(Keyword(line, lineno))
        else:
            raise UnknownCommand(f"line {lineno}: unknown command {line!r}")
    return commands


# ---------------------------------------------------------------------------
# Stack objects


@dataclass(frozen=True, slots=True)
class ONum:
    value: int


@dataclass(frozen=True, slots=True)
class OName:
    value: str


@dataclass(frozen=True, slots=True)
class OList:
    items: tuple = ()


@dataclass(frozen=True, slots=True)
class OTypeOp:
    name: str


@dataclass(frozen=True, slots=True)
class OType:
    type: HolType


@dataclass(frozen=True, slots=True)
class OConst:
    name: str


@dataclass(frozen=True, slots=True)
class OVar:
    var: Var


@dataclass(frozen=True, slots=True)
class OTerm:
    term: HolTerm


@dataclass(frozen=True, slots=True)
class OThm:
    proof: Proof
    sequent: Sequent


StackObject = Union[ONum, OName, OList, OTypeOp, OType, OConst, OVar, OTerm, OThm]


@dataclass(frozen=True)
class VMState:
    """One article run's state; structurally shared, never mutated in place.

    ``constants`` holds authoritative generic types (built-ins and defined
    constants, checked strictly); ``externals`` holds provisional generics
    for undefined imported constants, widened by anti-unification as new
    instances appear.
    """

    stack: tuple = ()
    dictionary: dict = field(default_factory=dict)
    assumptions: tuple = ()
    theorems: tuple = ()
    constants: dict = field(default_factory=dict)  # name -> generic HolType
    externals: dict = field(default_factory=dict)  # name -> provisional generic
    typeops: dict = field(default_factory=dict)  # name -> arity
    versioned: bool = False

    def constant_generic(self, name: str):
        hit = self.constants.get(name)
        return hit if hit is not None else self.externals.get(name)


def initial_state() -> VMState:
    return VMState(
        constants={hol.EQ: hol.eq_generic(), hol.SELECT: hol.select_generic()},
        typeops=dict(hol.BUILTIN_TYPE_ARITY),
    )


def _pop(stack: tuple, cls, cmd: str):
    if not stack:
        raise StackUnderflow(f"{cmd}: stack underflow")
    top = stack[0]
    if cls is not None and not isinstance(top, cls):
        want = cls.__name__ if isinstance(cls, type) else "/".join(c.__name__ for c in cls)
        raise TypeErrorOnStack(f"{cmd}: expected {want}, found {type(top).__name__}")
    return top, stack[1:]


def _name_list(obj: OList, cmd: str) -> list[str]:
    names = []
    for it in obj.items:
        if not isinstance(it, OName):
            raise TypeErrorOnStack(f"{cmd}: expected a list of names")
        names.append(it.value)
    return names


def _term_list(obj: OList, cmd: str) -> list[HolTerm]:
    terms = []
    for it in obj.items:
        if not isinstance(it, OTerm):
            raise TypeErrorOnStack(f"{cmd}: expected a list of terms")
        terms.append(it.term)
    return terms


# Derived-rule expansions (kept out of the proof checker).


def sym_proof(d: Proof, seq: Sequent) -> Proof:
    m, _ = hol.dest_eq(seq.concl)
    a = hol.infer_type(m)
    eq = hol.eq_const(a)
    congr = AppThm(AppThm(Refl(eq), d), Refl(m))  # |- (m=m) = (n=m)
    return EqMp(congr, Refl(m))


def trans_proof(d1: Proof, seq1: Sequent, d2: Proof) -> Proof:
    x, _ = hol.dest_eq(seq1.concl)
    a = hol.infer_type(x)
    congr = AppThm(Refl(App(hol.eq_const(a), x)), d2)  # |- (x=y) = (x=z)
    return EqMp(congr, d1)


def prove_hyp_proof(d_phi: Proof, d_psi: Proof) -> Proof:
    return EqMp(DeductAntiSym(d_phi, d_psi), d_phi)


def beta_conv_proof(redex: HolTerm) -> Proof:
    if not (isinstance(redex, App) and isinstance(redex.fn, Abs)):
        raise TypeErrorOnStack("betaConv: term is not a beta redex")
    lam = redex.fn
    return Subst(HolSubst(sigma=((lam.var, redex.arg),)), Beta(lam.var, lam.body))


def _auto_const(state: VMState, name: str, ty: HolType, cmd: str) -> VMState:
    """Check a constant instance.

    Authoritative constants are checked strictly.  Unknown imported
    constants adopt the first-seen type; a later incompatible instance
    widens the provisional generic to the least general generalization, so
    every instance seen during the run matches the final generic.
    """
    generic = state.constants.get(name)
    if generic is not None:
        if hol.match_type(generic, ty) is None:
            raise TypeErrorOnStack(f"{cmd}: {name} at {ty} is not an instance of {generic}")
        return state
    provisional = state.externals.get(name)
    if provisional is None:
        new = ty
    elif hol.match_type(provisional, ty) is not None:
        return state
    else:
        new = hol.anti_unify(provisional, ty)
    ext = dict(state.externals)
    ext[name] = new
    return _replace(state, externals=ext)


def _replace(state: VMState, **kw) -> VMState:
    fields = dict(
        stack=state.stack,
        dictionary=state.dictionary,
        assumptions=state.assumptions,
        theorems=state.theorems,
        constants=state.constants,
        externals=state.externals,
        typeops=state.typeops,
        versioned=state.versioned,
    )
    fields.update(kw)
    return VMState(**fields)


def _push_thm(state: VMState, proof: Proof, memo: dict, stack: tuple) -> VMState:
    seq = check_proof(proof, memo)
    return _replace(state, stack=(OThm(proof, seq),) + stack)


def step(state: VMState, cmd: ArticleCommand, memo: Optional[dict] = None) -> VMState:
    """Execute one command; returns the successor state."""
    if memo is None:
        memo = {}
    if isinstance(cmd, IntLiteral):
        return _replace(state, stack=(ONum(cmd.value),) + state.stack)
    if isinstance(cmd, StringLiteral):
        return _replace(state, stack=(OName(cmd.value),) + state.stack)
    assert isinstance(cmd, Keyword)
    if not state.versioned and cmd.name != "version":
        raise UnsupportedVersion(f"{cmd.name}: article must begin with a version")
    handler = _HANDLERS.get(cmd.name)
    if handler is None:
        raise UnknownCommand(f"unknown command {cmd.name}")
    return handler(state, memo)


def _cmd_version(state: VMState, memo: dict) -> VMState:
    n, stack = _pop(state.stack, ONum, "version")
    if state.versioned:
        raise UnsupportedVersion("duplicate version command")
    if n.value != 6:
        raise UnsupportedVersion(f"unsupported article version {n.value}")
    return _replace(state, stack=stack, versioned=True)


def _cmd_abs_term(state: VMState, memo: dict) -> VMState:
    b, stack = _pop(state.stack, OTerm, "absTerm")
    v, stack = _pop(stack, OVar, "absTerm")
    return _replace(state, stack=(OTerm(Abs(v.var, b.term)),) + stack)


def _cmd_abs_thm(state: VMState, memo: dict) -> VMState:
    t, stack = _pop(state.stack, OThm, "absThm")
    v, stack = _pop(stack, OVar, "absThm")
    return _push_thm(state, AbsThm(v.var, t.proof), memo, stack)


def _cmd_app_term(state: VMState, memo: dict) -> VMState:
    x, stack = _pop(state.stack, OTerm, "appTerm")
    f, stack = _pop(stack, OTerm, "appTerm")
    return _replace(state, stack=(OTerm(App(f.term, x.term)),) + stack)


def _cmd_app_thm(state: VMState, memo: dict) -> VMState:
    x, stack = _pop(state.stack, OThm, "appThm")
    f, stack = _pop(stack, OThm, "appThm")
    return _push_thm(state, AppThm(f.proof, x.proof), memo, stack)


def _cmd_assume(state: VMState, memo: dict) -> VMState:
    t, stack = _pop(state.stack, OTerm, "assume")
    return _push_thm(state, Assume(t.term), memo, stack)


def _cmd_axiom(state: VMState, memo: dict) -> VMState:
    t, stack = _pop(state.stack, OTerm, "axiom")
    l, stack = _pop(stack, OList, "axiom")
    node = Axiom(tuple(_term_list(l, "axiom")), t.term)
    seq = check_proof(node, memo)
    return _replace(
        state,
        stack=(OThm(node, seq),) + stack,
        assumptions=state.assumptions + (seq,),
    )


def _cmd_beta_conv(state: VMState, memo: dict) -> VMState:
    t, stack = _pop(state.stack, OTerm, "betaConv")
    return _push_thm(state, beta_conv_proof(t.term), memo, stack)


def _cmd_cons(state: VMState, memo: dict) -> VMState:
    tail, stack = _pop(state.stack, OList, "cons")
    head, stack = _pop(stack, None, "cons")
    return _replace(state, stack=(OList((head,) + tail.items),) + stack)


def _cmd_const(state: VMState, memo: dict) -> VMState:
    n, stack = _pop(state.stack, OName, "const")
    return _replace(state, stack=(OConst(n.value),) + stack)


def _cmd_const_term(state: VMState, memo: dict) -> VMState:
    ty, stack = _pop(state.stack, OType, "constTerm")
    c, stack = _pop(stack, OConst, "constTerm")
    state = _auto_const(state, c.name, ty.type, "constTerm")
    return _replace(state, stack=(OTerm(Const(c.name, ty.type)),) + stack)


def _cmd_deduct_antisym(state: VMState, memo: dict) -> VMState:
    t2, stack = _pop(state.stack, OThm, "deductAntisym")
    t1, stack = _pop(stack, OThm, "deductAntisym")
    return _push_thm(state, DeductAntiSym(t1.proof, t2.proof), memo, stack)


def _cmd_def(state: VMState, memo: dict) -> VMState:
    n, stack = _pop(state.stack, ONum, "def")
    if not stack:
        raise StackUnderflow("def: no object to store")
    d = dict(state.dictionary)
    d[n.value] = stack[0]
    return _replace(state, stack=stack, dictionary=d)


def _cmd_define_const(state: VMState, memo: dict) -> VMState:
    t, stack = _pop(state.stack, OTerm, "defineConst")
    n, stack = _pop(stack, OName, "defineConst")
    if n.value in state.constants or n.value in state.externals:
        raise VMError(f"defineConst: constant {n.value} already declared")
    node = DefineConst(n.value, t.term)
    seq = check_proof(node, memo)
    consts = dict(state.constants)
    consts[n.value] = hol.infer_type(t.term)
    stack = (OThm(node, seq), OConst(n.value)) + stack
    return _replace(state, stack=stack, constants=consts)


def _cmd_define_type_op(state: VMState, memo: dict) -> VMState:
    t, stack = _pop(state.stack, OThm, "defineTypeOp")
    l, stack = _pop(stack, OList, "defineTypeOp")
    r, stack = _pop(stack, OName, "defineTypeOp")
    a, stack = _pop(stack, OName, "defineTypeOp")
    n, stack = _pop(stack, OName, "defineTypeOp")
    if n.value in state.typeops:
        raise VMError(f"defineTypeOp: type operator {n.value} already declared")
    for cname in (a.value, r.value):
        if cname in state.constants or cname in state.externals:
            raise VMError(f"defineTypeOp: constant {cname} already declared")
    tyvars = tuple(_name_list(l, "defineTypeOp"))
    defn = TypeOpDef(n.value, a.value, r.value, tyvars, t.proof)
    abs_node = AbsRepThm(defn)
    rep_node = RepAbsThm(defn)
    abs_seq = check_proof(abs_node, memo)
    rep_seq = check_proof(rep_node, memo)
    pred, carrier, new_ty = defn.pieces(check_proof(t.proof, memo))
    consts = dict(state.constants)
    consts[a.value] = defn.abs_type(carrier, new_ty)
    consts[r.value] = defn.rep_type(carrier, new_ty)
    ops = dict(state.typeops)
    ops[n.value] = len(tyvars)
    stack = (
        OThm(rep_node, rep_seq),
        OThm(abs_node, abs_seq),
        OConst(r.value),
        OConst(a.value),
        OTypeOp(n.value),
    ) + stack
    return _replace(state, stack=stack, constants=consts, typeops=ops)


def _cmd_eq_mp(state: VMState, memo: dict) -> VMState:
    t2, stack = _pop(state.stack, OThm, "eqMp")
    t1, stack = _pop(stack, OThm, "eqMp")
    return _push_thm(state, EqMp(t1.proof, t2.proof), memo, stack)


def _cmd_nil(state: VMState, memo: dict) -> VMState:
    return _replace(state, stack=(OList(),) + state.stack)


def _cmd_op_type(state: VMState, memo: dict) -> VMState:
    l, stack = _pop(state.stack, OList, "opType")
    op, stack = _pop(stack, OTypeOp, "opType")
    args = []
    for it in l.items:
        if not isinstance(it, OType):
            raise TypeErrorOnStack("opType: expected a list of types")
        args.append(it.type)
    arity = state.typeops.get(op.name)
    if arity is None:
        ops = dict(state.typeops)
        ops[op.name] = len(args)
        state = _replace(state, typeops=ops)
    elif arity != len(args):
        raise TypeErrorOnStack(f"opType: {op.name} expects {arity} arguments, got {len(args)}")
    return _replace(state, stack=(OType(TyOp(op.name, tuple(args))),) + stack)


def _cmd_pop(state: VMState, memo: dict) -> VMState:
    _, stack = _pop(state.stack, None, "pop")
    return _replace(state, stack=stack)


def _cmd_pragma(state: VMState, memo: dict) -> VMState:
    _, stack = _pop(state.stack, None, "pragma")
    return _replace(state, stack=stack)


def _cmd_prove_hyp(state: VMState, memo: dict) -> VMState:
    t2, stack = _pop(state.stack, OThm, "proveHyp")
    t1, stack = _pop(stack, OThm, "proveHyp")
    return _push_thm(state, prove_hyp_proof(t1.proof, t2.proof), memo, stack)


def _cmd_ref(state: VMState, memo: dict) -> VMState:
    n, stack = _pop(state.stack, ONum, "ref")
    if n.value not in state.dictionary:
        raise VMError(f"ref: undefined dictionary key {n.value}")
    return _replace(state, stack=(state.dictionary[n.value],) + stack)


def _cmd_refl(state: VMState, memo: dict) -> VMState:
    t, stack = _pop(state.stack, OTerm, "refl")
    return _push_thm(state, Refl(t.term), memo, stack)


def _cmd_remove(state: VMState, memo: dict) -> VMState:
    n, stack = _pop(state.stack, ONum, "remove")
    if n.value not in state.dictionary:
        raise VMError(f"remove: undefined dictionary key {n.value}")
    d = dict(state.dictionary)
    obj = d.pop(n.value)
    return _replace(state, stack=(obj,) + stack, dictionary=d)


def _parse_subst(obj: OList) -> HolSubst:
    if len(obj.items) != 2:
        raise TypeErrorOnStack("subst: expected a two-element list")
    theta_obj, sigma_obj = obj.items
    if not isinstance(theta_obj, OList) or not isinstance(sigma_obj, OList):
        raise TypeErrorOnStack("subst: expected a pair of lists")
    theta = []
    for entry in theta_obj.items:
        if (
            not isinstance(entry, OList)
            or len(entry.items) != 2
            or not isinstance(entry.items[0], OName)
            or not isinstance(entry.items[1], OType)
        ):
            raise TypeErrorOnStack("subst: malformed type substitution entry")
        theta.append((entry.items[0].value, entry.items[1].type))
    sigma = []
    for entry in sigma_obj.items:
        if (
            not isinstance(entry, OList)
            or len(entry.items) != 2
            or not isinstance(entry.items[0], OVar)
            or not isinstance(entry.items[1], OTerm)
        ):
            raise TypeErrorOnStack("subst: malformed term substitution entry")
        sigma.append((entry.items[0].var, entry.items[1].term))
    return HolSubst(tuple(theta), tuple(sigma))


def _cmd_subst(state: VMState, memo: dict) -> VMState:
    t, stack = _pop(state.stack, OThm, "subst")
    s, stack = _pop(stack, OList, "subst")
    return _push_thm(state, Subst(_parse_subst(s), t.proof), memo, stack)


def _cmd_sym(state: VMState, memo: dict) -> VMState:
    t, stack = _pop(state.stack, OThm, "sym")
    return _push_thm(state, sym_proof(t.proof, t.sequent), memo, stack)


def _cmd_thm(state: VMState, memo: dict) -> VMState:
    concl, stack = _pop(state.stack, OTerm, "thm")
    l, stack = _pop(stack, OList, "thm")
    t, stack = _pop(stack, OThm, "thm")
    stated = make_sequent(_term_list(l, "thm"), concl.term)
    if not t.sequent.alpha_eq(stated):
        raise SequentMismatch(
            f"thm: stated sequent differs from the proved one ({stated} vs {t.sequent})"
        )
    return _replace(state, stack=stack, theorems=state.theorems + ((stated, t.proof),))


def _cmd_trans(state: VMState, memo: dict) -> VMState:
    t2, stack = _pop(state.stack, OThm, "trans")
    t1, stack = _pop(stack, OThm, "trans")
    return _push_thm(state, trans_proof(t1.proof, t1.sequent, t2.proof), memo, stack)


def _cmd_type_op(state: VMState, memo: dict) -> VMState:
    n, stack = _pop(state.stack, OName, "typeOp")
    return _replace(state, stack=(OTypeOp(n.value),) + stack)


def _cmd_var(state: VMState, memo: dict) -> VMState:
    ty, stack = _pop(state.stack, OType, "var")
    n, stack = _pop(stack, OName, "var")
    return _replace(state, stack=(OVar(Var(n.value, ty.type)),) + stack)


def _cmd_var_term(state: VMState, memo: dict) -> VMState:
    v, stack = _pop(state.stack, OVar, "varTerm")
    return _replace(state, stack=(OTerm(v.var),) + stack)


def _cmd_var_type(state: VMState, memo: dict) -> VMState:
    n, stack = _pop(state.stack, OName, "varType")
    return _replace(state, stack=(OType(TyVar(n.value)),) + stack)


_HANDLERS: dict[str, Callable[[VMState, dict], VMState]] = {
    "absTerm": _cmd_abs_term,
    "absThm": _cmd_abs_thm,
    "appTerm": _cmd_app_term,
    "appThm": _cmd_app_thm,
    "assume": _cmd_assume,
    "axiom": _cmd_axiom,
    "betaConv": _cmd_beta_conv,
    "cons": _cmd_cons,
    "const": _cmd_const,
    "constTerm": _cmd_const_term,
    "deductAntisym": _cmd_deduct_antisym,
    "def": _cmd_def,
    "defineConst": _cmd_define_const,
    "defineTypeOp": _cmd_define_type_op,
    "eqMp": _cmd_eq_mp,
    "nil": _cmd_nil,
    "opType": _cmd_op_type,
    "pop": _cmd_pop,
    "pragma": _cmd_pragma,
    "proveHyp": _cmd_prove_hyp,
    "ref": _cmd_ref,
    "refl": _cmd_refl,
    "remove": _cmd_remove,
    "subst": _cmd_subst,
    "sym": _cmd_sym,
    "thm": _cmd_thm,
    "trans": _cmd_trans,
    "typeOp": _cmd_type_op,
    "var": _cmd_var,
    "varTerm": _cmd_var_term,
    "varType": _cmd_var_type,
    "version": _cmd_version,
}


def run(commands: Iterable[ArticleCommand]) -> VMState:
    """Fold ``step`` over the stream; step errors gain their command index."""
    state = initial_state()
    memo: dict = {}
    executed = False
    for i, cmd in enumerate(commands):
        executed = True
        try:
            state = step(state, cmd, memo)
        except (ArticleError, hol.HolError) as e:
            e.command_index = i  # type: ignore[attr-defined]
            e.command_line = getattr(cmd, "line", 0)  # type: ignore[attr-defined]
            raise
    if not executed:
        raise UnsupportedVersion("empty article")
    return state


def run_text(data: Union[str, bytes]) -> VMState:
    return run(parse_article(data))


# ---------------------------------------------------------------------------
# Article regeneration


class _Writer:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self.next_key = 0
        self.memo: dict[tuple[str, int], int] = {}
        self.typeop_memo: dict[int, tuple[int, int]] = {}
        self._keep: list = []  # keeps ids in memo alive

    def kw(self, name: str) -> None:
        self.lines.append(name)

    def num(self, n: int) -> None:
        self.lines.append(str(n))

    def name(self, s: str) -> None:
        quoted = s.replace("\\", "\\\\").replace('"', '\\"')
        self.lines.append(f'"{quoted}"')

    def _shared(self, kind: str, obj, build) -> None:
        key = self.memo.get((kind, id(obj)))
        if key is not None:
            self.num(key)
            self.kw("ref")
            return
        build(obj)
        key = self.next_key
        self.next_key += 1
        self.memo[(kind, id(obj))] = key
        self._keep.append(obj)
        self.num(key)
        self.kw("def")

    def list_of(self, items, emit_item) -> None:
        for it in items:
            emit_item(it)
        self.kw("nil")
        for _ in items:
            self.kw("cons")

    def type(self, ty: HolType) -> None:
        self._shared("ty", ty, self._type)

    def _type(self, ty: HolType) -> None:
        if isinstance(ty, TyVar):
            self.name(ty.name)
            self.kw("varType")
        else:
            assert isinstance(ty, TyOp)
            self.name(ty.op)
            self.kw("typeOp")
            self.list_of(ty.args, self.type)
            self.kw("opType")

    def var(self, v: Var) -> None:
        self._shared("var", v, self._var)

    def _var(self, v: Var) -> None:
        self.name(v.name)
        self.type(v.type)
        self.kw("var")

    def term(self, t: HolTerm) -> None:
        self._shared("tm", t, self._term)

    def _term(self, t: HolTerm) -> None:
        if isinstance(t, Var):
            self.var(t)
            self.kw("varTerm")
        elif isinstance(t, Const):
            self.name(t.name)
            self.kw("const")
            self.type(t.type)
            self.kw("constTerm")
        elif isinstance(t, Abs):
            self.var(t.var)
            self.term(t.body)
            self.kw("absTerm")
        else:
            assert isinstance(t, App)
            self.term(t.fn)
            self.term(t.arg)
            self.kw("appTerm")

    def proof(self, p: Proof) -> None:
        self._shared("pf", p, self._proof)

    def _typeop_def(self, defn: TypeOpDef) -> tuple[int, int]:
        keys = self.typeop_memo.get(id(defn))
        if keys is not None:
            return keys
        self.name(defn.op)
        self.name(defn.abs)
        self.name(defn.rep)
        self.list_of(defn.tyvars, self.name)
        self.proof(defn.sub)
        self.kw("defineTypeOp")
        rep_key = self.next_key
        self.next_key += 1
        self.num(rep_key)
        self.kw("def")
        self.kw("pop")
        abs_key = self.next_key
        self.next_key += 1
        self.num(abs_key)
        self.kw("def")
        for _ in range(4):
            self.kw("pop")
        self.typeop_memo[id(defn)] = (abs_key, rep_key)
        self._keep.append(defn)
        return abs_key, rep_key

    def _proof(self, p: Proof) -> None:
        if isinstance(p, Refl):
            self.term(p.term)
            self.kw("refl")
        elif isinstance(p, Assume):
            self.term(p.prop)
            self.kw("assume")
        elif isinstance(p, Beta):
            # no primitive command: re-enter through betaConv on the redex
            self.term(App(Abs(p.var, p.body), p.var))
            self.kw("betaConv")
        elif isinstance(p, AbsThm):
            self.var(p.var)
            self.proof(p.sub)
            self.kw("absThm")
        elif isinstance(p, AppThm):
            self.proof(p.fun)
            self.proof(p.arg)
            self.kw("appThm")
        elif isinstance(p, EqMp):
            self.proof(p.eq)
            self.proof(p.prem)
            self.kw("eqMp")
        elif isinstance(p, DeductAntiSym):
            self.proof(p.lhs)
            self.proof(p.rhs)
            self.kw("deductAntisym")
        elif isinstance(p, Subst):
            def theta_entry(e):
                self.name(e[0])
                self.type(e[1])
                self.kw("nil")
                self.kw("cons")
                self.kw("cons")

            def sigma_entry(e):
                self.var(e[0])
                self.term(e[1])
                self.kw("nil")
                self.kw("cons")
                self.kw("cons")

            self.list_of(p.subst.theta, theta_entry)
            self.list_of(p.subst.sigma, sigma_entry)
            self.kw("nil")
            self.kw("cons")
            self.kw("cons")
            self.proof(p.sub)
            self.kw("subst")
        elif isinstance(p, Axiom):
            self.list_of(p.hyps, self.term)
            self.term(p.concl)
            self.kw("axiom")
        elif isinstance(p, DefineConst):
            self.name(p.name)
            self.term(p.body)
            self.kw("defineConst")
            key = self.next_key
            self.next_key += 1
            self.num(key)
            self.kw("def")
            self.kw("pop")
            self.kw("pop")
            self.num(key)
            self.kw("ref")
        elif isinstance(p, AbsRepThm):
            abs_key, _ = self._typeop_def(p.defn)
            self.num(abs_key)
            self.kw("ref")
        elif isinstance(p, RepAbsThm):
            _, rep_key = self._typeop_def(p.defn)
            self.num(rep_key)
            self.kw("ref")
        else:
            raise ValueError(f"proof node not expressible as article commands: {p!r}")


def serialize_article(state: VMState) -> str:
    """Regenerate an article whose run exports alpha-equal sequents."""
    w = _Writer()
    w.lines.append("# regenerated article")
    w.num(6)
    w.kw("version")
    for seq, proof in state.theorems:
        w.proof(proof)
        w.list_of(seq.hyps, w.term)
        w.term(seq.concl)
        w.kw("thm")
    return "\n".join(w.lines) + "\n"
