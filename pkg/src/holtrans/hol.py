"""HOL source syntax and the derivation checker.

Types are variables or operator applications; terms are the simply typed
lambda calculus with typed variables and constant instances.  Proofs are
explicit derivation trees, one constructor per primitive rule plus nodes
for article-level axioms and the two definition commands.  ``check_proof``
recomputes the sequent a tree proves and is the trusted oracle that the
article virtual machine and the translator are tested against.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Optional


class HolError(Exception):
    pass


class ArityMismatch(HolError):
    pass


class AppTypeMismatch(HolError):
    pass


class RuleViolation(HolError):
    def __init__(self, rule: str, reason: str):
        super().__init__(f"{rule}: {reason}")
        self.rule = rule
        self.reason = reason


# ---------------------------------------------------------------------------
# Types

BUILTIN_TYPE_ARITY = {"bool": 0, "ind": 0, "->": 2}


class HolType:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class TyVar(HolType):
    name: str


@dataclass(frozen=True, slots=True)
class TyOp(HolType):
    op: str
    args: tuple[HolType, ...] = ()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        want = BUILTIN_TYPE_ARITY.get(self.op)
        if want is not None and len(self.args) != want:
            raise ArityMismatch(f"type operator {self.op} expects {want} arguments")


BOOL = TyOp("bool")
IND = TyOp("ind")


def fn(a: HolType, b: HolType) -> TyOp:
    return TyOp("->", (a, b))


def dest_fn(ty: HolType) -> tuple[HolType, HolType]:
    if isinstance(ty, TyOp) and ty.op == "->":
        return ty.args[0], ty.args[1]
    raise AppTypeMismatch(f"not a function type: {ty}")


def type_tyvars(ty: HolType, out: Optional[set[str]] = None) -> set[str]:
    if out is None:
        out = set()
    if isinstance(ty, TyVar):
        out.add(ty.name)
    else:
        assert isinstance(ty, TyOp)
        for a in ty.args:
            type_tyvars(a, out)
    return out


def type_subst(theta: dict[str, HolType], ty: HolType) -> HolType:
    if not theta:
        return ty
    if isinstance(ty, TyVar):
        return theta.get(ty.name, ty)
    assert isinstance(ty, TyOp)
    return TyOp(ty.op, tuple(type_subst(theta, a) for a in ty.args))


def match_type(generic: HolType, instance: HolType, bind: Optional[dict[str, HolType]] = None) -> Optional[dict[str, HolType]]:
    """First-order matching of ``instance`` against ``generic``; None on failure."""
    if bind is None:
        bind = {}
    if isinstance(generic, TyVar):
        prev = bind.get(generic.name)
        if prev is None:
            bind[generic.name] = instance
            return bind
        return bind if prev == instance else None
    assert isinstance(generic, TyOp)
    if not isinstance(instance, TyOp) or instance.op != generic.op or len(instance.args) != len(generic.args):
        return None
    for g, i in zip(generic.args, instance.args):
        if match_type(g, i, bind) is None:
            return None
    return bind


def anti_unify(a: HolType, b: HolType) -> HolType:
    """Least general generalization: both inputs are instances of the result.

    Distinct mismatching pairs get distinct fresh variables, equal pairs
    share one, so matching either input back recovers a substitution.
    """
    used = type_tyvars(a) | type_tyvars(b)
    table: dict[tuple, TyVar] = {}
    counter = [0]

    def fresh() -> TyVar:
        while True:
            name = f"g{counter[0]}"
            counter[0] += 1
            if name not in used:
                return TyVar(name)

    def go(x: HolType, y: HolType) -> HolType:
        if isinstance(x, TyOp) and isinstance(y, TyOp) and x.op == y.op and len(x.args) == len(y.args):
            return TyOp(x.op, tuple(go(p, q) for p, q in zip(x.args, y.args)))
        if x == y:
            return x
        key = (type_key(x), type_key(y))
        v = table.get(key)
        if v is None:
            v = fresh()
            table[key] = v
        return v

    return go(a, b)


# ---------------------------------------------------------------------------
# Terms

EQ = "="
SELECT = "select"


class HolTerm:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Var(HolTerm):
    name: str
    type: HolType


@dataclass(frozen=True, slots=True)
class Const(HolTerm):
    """A constant instance carrying its instantiated type."""

    name: str
    type: HolType


@dataclass(frozen=True, slots=True)
class Abs(HolTerm):
    var: Var
    body: HolTerm


@dataclass(frozen=True, slots=True)
class App(HolTerm):
    fn: HolTerm
    arg: HolTerm


def eq_generic() -> HolType:
    a = TyVar("A")
    return fn(a, fn(a, BOOL))


def select_generic() -> HolType:
    a = TyVar("A")
    return fn(fn(a, BOOL), a)


def eq_const(ty: HolType) -> Const:
    return Const(EQ, fn(ty, fn(ty, BOOL)))


def infer_type(t: HolTerm) -> HolType:
    """Simple-type inference; total on well-formed terms by structural recursion."""
    if isinstance(t, (Var, Const)):
        return t.type
    if isinstance(t, Abs):
        return fn(t.var.type, infer_type(t.body))
    assert isinstance(t, App)
    a, b = dest_fn(infer_type(t.fn))
    arg_ty = infer_type(t.arg)
    if arg_ty != a:
        raise AppTypeMismatch(f"argument has type {arg_ty}, function expects {a}")
    return b


def mk_eq(lhs: HolTerm, rhs: HolTerm) -> HolTerm:
    ty = infer_type(lhs)
    return App(App(eq_const(ty), lhs), rhs)


def dest_eq(t: HolTerm) -> tuple[HolTerm, HolTerm]:
    if (
        isinstance(t, App)
        and isinstance(t.fn, App)
        and isinstance(t.fn.fn, Const)
        and t.fn.fn.name == EQ
    ):
        return t.fn.arg, t.arg
    raise HolError(f"not an equality: {t}")


def is_eq(t: HolTerm) -> bool:
    try:
        dest_eq(t)
        return True
    except HolError:
        return False


def free_vars(t: HolTerm, bound: frozenset = frozenset()) -> frozenset:
    if isinstance(t, Var):
        return frozenset() if t in bound else frozenset((t,))
    if isinstance(t, Const):
        return frozenset()
    if isinstance(t, Abs):
        return free_vars(t.body, bound | {t.var})
    assert isinstance(t, App)
    return free_vars(t.fn, bound) | free_vars(t.arg, bound)


def term_tyvars(t: HolTerm, out: Optional[set[str]] = None) -> set[str]:
    if out is None:
        out = set()
    if isinstance(t, (Var, Const)):
        type_tyvars(t.type, out)
    elif isinstance(t, Abs):
        type_tyvars(t.var.type, out)
        term_tyvars(t.body, out)
    else:
        assert isinstance(t, App)
        term_tyvars(t.fn, out)
        term_tyvars(t.arg, out)
    return out


def type_key(ty: HolType):
    if isinstance(ty, TyVar):
        return ("v", ty.name)
    assert isinstance(ty, TyOp)
    return ("o", ty.op, tuple(type_key(a) for a in ty.args))


def term_key(t: HolTerm, _bound: Optional[dict] = None, _depth: int = 0):
    """Canonical, orderable form: equal keys iff alpha-equal terms."""
    if _bound is None:
        _bound = {}
    if isinstance(t, Var):
        k = (t.name, type_key(t.type))
        if k in _bound:
            return ("b", _depth - _bound[k] - 1)
        return ("f", t.name, type_key(t.type))
    if isinstance(t, Const):
        return ("c", t.name, type_key(t.type))
    if isinstance(t, Abs):
        inner = dict(_bound)
        inner[(t.var.name, type_key(t.var.type))] = _depth
        return ("l", type_key(t.var.type), term_key(t.body, inner, _depth + 1))
    assert isinstance(t, App)
    return ("a", term_key(t.fn, _bound, _depth), term_key(t.arg, _bound, _depth))


def alpha_equal(a: HolTerm, b: HolTerm) -> bool:
    return term_key(a) == term_key(b)


def term_hash(t: HolTerm, length: int = 12) -> str:
    return hashlib.sha1(repr(term_key(t)).encode()).hexdigest()[:length]


def type_hash(ty: HolType, length: int = 8) -> str:
    return hashlib.sha1(repr(type_key(ty)).encode()).hexdigest()[:length]


# ---------------------------------------------------------------------------
# Substitution


@dataclass(frozen=True)
class HolSubst:
    """Type substitution applied first, then a parallel term substitution.

    The sigma keys and images live in the already type-instantiated world:
    a key's type is the theta-instantiated type of the variable it replaces,
    and the image's type equals the key's.
    """

    theta: tuple[tuple[str, HolType], ...] = ()
    sigma: tuple[tuple[Var, HolTerm], ...] = ()

    def theta_dict(self) -> dict[str, HolType]:
        return dict(self.theta)


def map_types(theta: dict[str, HolType], t: HolTerm) -> HolTerm:
    if not theta:
        return t
    if isinstance(t, Var):
        return Var(t.name, type_subst(theta, t.type))
    if isinstance(t, Const):
        return Const(t.name, type_subst(theta, t.type))
    if isinstance(t, Abs):
        return Abs(Var(t.var.name, type_subst(theta, t.var.type)), map_types(theta, t.body))
    assert isinstance(t, App)
    return App(map_types(theta, t.fn), map_types(theta, t.arg))


def _free_names(t: HolTerm) -> set[str]:
    return {v.name for v in free_vars(t)}


def subst_vars(mapping: dict[Var, HolTerm], t: HolTerm) -> HolTerm:
    """Simultaneous capture-avoiding substitution; binders renamed as needed."""
    if not mapping:
        return t
    if isinstance(t, Var):
        return mapping.get(t, t)
    if isinstance(t, Const):
        return t
    if isinstance(t, App):
        return App(subst_vars(mapping, t.fn), subst_vars(mapping, t.arg))
    assert isinstance(t, Abs)
    live = {k: v for k, v in mapping.items() if k != t.var and k in free_vars(t.body)}
    if not live:
        return t
    image_names = set()
    for v in live.values():
        image_names |= _free_names(v)
    var = t.var
    body = t.body
    if var.name in image_names:
        taken = image_names | _free_names(body) | {k.name for k in live}
        new = var.name
        while new in taken:
            new += "'"
        fresh = Var(new, var.type)
        body = subst_vars({var: fresh}, body)
        var = fresh
    return Abs(var, subst_vars(live, body))


def apply_subst(s: HolSubst, t: HolTerm) -> HolTerm:
    """Type part applied once to the term, then the parallel term part."""
    out = map_types(s.theta_dict(), t)
    return subst_vars(dict(s.sigma), out)


def beta_step(t: HolTerm) -> Optional[HolTerm]:
    if isinstance(t, App):
        if isinstance(t.fn, Abs):
            return subst_vars({t.fn.var: t.arg}, t.fn.body)
        rf = beta_step(t.fn)
        if rf is not None:
            return App(rf, t.arg)
        ra = beta_step(t.arg)
        if ra is not None:
            return App(t.fn, ra)
        return None
    if isinstance(t, Abs):
        rb = beta_step(t.body)
        if rb is not None:
            return Abs(t.var, rb)
        return None
    return None


def beta_normalize(t: HolTerm) -> HolTerm:
    """Full beta-normal form; terminates because the terms are simply typed."""
    while True:
        r = beta_step(t)
        if r is None:
            return t
        t = r


def beta_equal(a: HolTerm, b: HolTerm) -> bool:
    return alpha_equal(beta_normalize(a), beta_normalize(b))


# ---------------------------------------------------------------------------
# Sequents


@dataclass(frozen=True)
class Sequent:
    hyps: tuple[HolTerm, ...]
    concl: HolTerm

    def alpha_eq(self, other: "Sequent") -> bool:
        if term_key(self.concl) != term_key(other.concl):
            return False
        return {term_key(h) for h in self.hyps} == {term_key(h) for h in other.hyps}


def make_sequent(hyps: Iterable[HolTerm], concl: HolTerm) -> Sequent:
    """Alpha-deduplicate the hypotheses and sort them by their canonical key."""
    by_key = {}
    for h in hyps:
        by_key.setdefault(term_key(h), h)
    ordered = tuple(by_key[k] for k in sorted(by_key))
    return Sequent(ordered, concl)


def _hyps_minus(hyps: tuple[HolTerm, ...], t: HolTerm) -> tuple[HolTerm, ...]:
    k = term_key(t)
    return tuple(h for h in hyps if term_key(h) != k)


def sequent_tyvars(seq: Sequent) -> set[str]:
    out: set[str] = set()
    for h in seq.hyps:
        term_tyvars(h, out)
    term_tyvars(seq.concl, out)
    return out


def sequent_free_vars(seq: Sequent) -> frozenset:
    out = free_vars(seq.concl)
    for h in seq.hyps:
        out |= free_vars(h)
    return out


# ---------------------------------------------------------------------------
# Proofs


class Proof:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Refl(Proof):
    term: HolTerm


@dataclass(frozen=True, slots=True)
class AbsThm(Proof):
    var: Var
    sub: Proof


@dataclass(frozen=True, slots=True)
class AppThm(Proof):
    fun: Proof
    arg: Proof


@dataclass(frozen=True, slots=True)
class Beta(Proof):
    var: Var
    body: HolTerm


@dataclass(frozen=True, slots=True)
class Assume(Proof):
    prop: HolTerm


@dataclass(frozen=True, slots=True)
class EqMp(Proof):
    eq: Proof
    prem: Proof


@dataclass(frozen=True, slots=True)
class DeductAntiSym(Proof):
    lhs: Proof
    rhs: Proof


@dataclass(frozen=True, slots=True)
class Subst(Proof):
    subst: HolSubst
    sub: Proof


@dataclass(frozen=True, slots=True)
class Axiom(Proof):
    hyps: tuple[HolTerm, ...]
    concl: HolTerm


@dataclass(frozen=True, slots=True)
class DefineConst(Proof):
    """Yields |- c = body and registers c; the body must be closed."""

    name: str
    body: HolTerm


@dataclass(frozen=True)
class TypeOpDef:
    """Shared payload of a type-operator definition.

    ``sub`` proves |- pred witness with no hypotheses; the new operator's
    arguments are ``tyvars`` in the given order.
    """

    op: str
    abs: str
    rep: str
    tyvars: tuple[str, ...]
    sub: Proof

    def pieces(self, sub_seq: Sequent) -> tuple[HolTerm, HolType, HolType]:
        """Return (pred, carrier type, new type) after validating the shape."""
        if sub_seq.hyps:
            raise RuleViolation("DefineTypeOp", "witness theorem has hypotheses")
        c = sub_seq.concl
        if not isinstance(c, App):
            raise RuleViolation("DefineTypeOp", "witness conclusion is not an application")
        pred = c.fn
        if free_vars(pred):
            raise RuleViolation("DefineTypeOp", "predicate has free term variables")
        if term_tyvars(pred) != set(self.tyvars):
            raise RuleViolation(
                "DefineTypeOp", "type variable list does not match the predicate"
            )
        if len(set(self.tyvars)) != len(self.tyvars):
            raise RuleViolation("DefineTypeOp", "duplicate type variable name")
        carrier = dest_fn(infer_type(pred))[0]
        new_ty = TyOp(self.op, tuple(TyVar(a) for a in self.tyvars))
        return pred, carrier, new_ty

    def abs_type(self, carrier: HolType, new_ty: HolType) -> HolType:
        return fn(carrier, new_ty)

    def rep_type(self, carrier: HolType, new_ty: HolType) -> HolType:
        return fn(new_ty, carrier)


@dataclass(frozen=True, slots=True)
class AbsRepThm(Proof):
    """|- (\\a. abs (rep a)) = (\\a. a)"""

    defn: TypeOpDef


@dataclass(frozen=True, slots=True)
class RepAbsThm(Proof):
    """|- (\\r. rep (abs r) = r) = (\\r. pred r)"""

    defn: TypeOpDef


@dataclass(frozen=True, slots=True)
class ConvRefl(Proof):
    """A compressed conversion subtree: concludes lhs = rhs given lhs, rhs
    beta-equal; carries their common beta-normal form."""

    lhs: HolTerm
    rhs: HolTerm
    normal: HolTerm


def check_proof(proof: Proof, memo: Optional[dict] = None) -> Sequent:
    """Recompute the sequent a derivation tree proves.

    ``memo`` (id-keyed) makes repeated checking of shared subtrees cheap;
    the same dictionary can be threaded through a whole article run.
    """
    if memo is None:
        memo = {}
    hit = memo.get(id(proof))
    if hit is not None:
        return hit[1]
    seq = _check(proof, memo)
    memo[id(proof)] = (proof, seq)
    return seq


def _require_bool(rule: str, t: HolTerm) -> None:
    if infer_type(t) != BOOL:
        raise RuleViolation(rule, f"not a proposition: {t}")


def _check(proof: Proof, memo: dict) -> Sequent:
    if isinstance(proof, Refl):
        infer_type(proof.term)
        return make_sequent((), mk_eq(proof.term, proof.term))

    if isinstance(proof, AbsThm):
        s = check_proof(proof.sub, memo)
        try:
            m, n = dest_eq(s.concl)
        except HolError:
            raise RuleViolation("AbsThm", "premise is not an equality")
        for h in s.hyps:
            if proof.var in free_vars(h):
                raise RuleViolation("AbsThm", f"{proof.var.name} is free in a hypothesis")
        return make_sequent(s.hyps, mk_eq(Abs(proof.var, m), Abs(proof.var, n)))

    if isinstance(proof, AppThm):
        s1 = check_proof(proof.fun, memo)
        s2 = check_proof(proof.arg, memo)
        try:
            f, g = dest_eq(s1.concl)
            m, n = dest_eq(s2.concl)
        except HolError:
            raise RuleViolation("AppThm", "premise is not an equality")
        try:
            a, _ = dest_fn(infer_type(f))
        except AppTypeMismatch:
            raise RuleViolation("AppThm", "function side has no arrow type")
        if infer_type(m) != a:
            raise RuleViolation("AppThm", "argument type does not match the domain")
        return make_sequent(s1.hyps + s2.hyps, mk_eq(App(f, m), App(g, n)))

    if isinstance(proof, Beta):
        redex = App(Abs(proof.var, proof.body), proof.var)
        infer_type(redex)
        return make_sequent((), mk_eq(redex, proof.body))

    if isinstance(proof, Assume):
        _require_bool("Assume", proof.prop)
        return make_sequent((proof.prop,), proof.prop)

    if isinstance(proof, EqMp):
        s1 = check_proof(proof.eq, memo)
        s2 = check_proof(proof.prem, memo)
        try:
            phi, psi = dest_eq(s1.concl)
        except HolError:
            raise RuleViolation("EqMp", "first premise is not an equality")
        if infer_type(phi) != BOOL:
            raise RuleViolation("EqMp", "equality is not between propositions")
        if not alpha_equal(phi, s2.concl):
            raise RuleViolation("EqMp", "second premise does not match the equality lhs")
        return make_sequent(s1.hyps + s2.hyps, psi)

    if isinstance(proof, DeductAntiSym):
        s1 = check_proof(proof.lhs, memo)
        s2 = check_proof(proof.rhs, memo)
        hyps = _hyps_minus(s1.hyps, s2.concl) + _hyps_minus(s2.hyps, s1.concl)
        return make_sequent(hyps, mk_eq(s1.concl, s2.concl))

    if isinstance(proof, Subst):
        s = check_proof(proof.sub, memo)
        for v, img in proof.subst.sigma:
            if infer_type(img) != v.type:
                raise RuleViolation(
                    "Subst", f"image for {v.name} has the wrong type"
                )
        hyps = tuple(apply_subst(proof.subst, h) for h in s.hyps)
        return make_sequent(hyps, apply_subst(proof.subst, s.concl))

    if isinstance(proof, Axiom):
        for h in proof.hyps:
            _require_bool("Axiom", h)
        _require_bool("Axiom", proof.concl)
        return make_sequent(proof.hyps, proof.concl)

    if isinstance(proof, DefineConst):
        if free_vars(proof.body):
            raise RuleViolation("DefineConst", "definiens has free term variables")
        ty = infer_type(proof.body)
        if not term_tyvars(proof.body) <= type_tyvars(ty):
            raise RuleViolation(
                "DefineConst", "definiens type variables exceed those of its type"
            )
        return make_sequent((), mk_eq(Const(proof.name, ty), proof.body))

    if isinstance(proof, (AbsRepThm, RepAbsThm)):
        d = proof.defn
        sub_seq = check_proof(d.sub, memo)
        pred, carrier, new_ty = d.pieces(sub_seq)
        abs_c = Const(d.abs, d.abs_type(carrier, new_ty))
        rep_c = Const(d.rep, d.rep_type(carrier, new_ty))
        if isinstance(proof, AbsRepThm):
            a = Var("a", new_ty)
            lhs = Abs(a, App(abs_c, App(rep_c, a)))
            rhs = Abs(a, a)
            return make_sequent((), mk_eq(lhs, rhs))
        r = Var("r", carrier)
        lhs = Abs(r, mk_eq(App(rep_c, App(abs_c, r)), r))
        rhs = Abs(r, App(pred, r))
        return make_sequent((), mk_eq(lhs, rhs))

    if isinstance(proof, ConvRefl):
        if not beta_equal(proof.lhs, proof.rhs):
            raise RuleViolation("ConvRefl", "sides are not beta-equal")
        if not beta_equal(proof.lhs, proof.normal):
            raise RuleViolation("ConvRefl", "stored normal form does not match")
        return make_sequent((), mk_eq(proof.lhs, proof.rhs))

    raise HolError(f"unknown proof node {proof!r}")


def eta_instance(seq: Sequent) -> Optional[tuple[Var, HolTerm]]:
    """Recognize |- (\\x. M x) = M with x not free in M; returns (x, M)."""
    if seq.hyps:
        return None
    try:
        lhs, rhs = dest_eq(seq.concl)
    except HolError:
        return None
    if (
        isinstance(lhs, Abs)
        and isinstance(lhs.body, App)
        and lhs.body.arg == lhs.var
        and alpha_equal(lhs.body.fn, rhs)
        and lhs.var not in free_vars(lhs.body.fn)
    ):
        return lhs.var, rhs
    return None
