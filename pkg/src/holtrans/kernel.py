"""The lambda-Pi calculus modulo rewriting.

Terms are locally nameless: bound variables are de Bruijn indices (``BVar``),
free variables carry names (``Var``).  Binder names survive only as display
hints and are ignored by equality and hashing, so ``==`` on terms is exactly
alpha-equivalence.

A ``Signature`` is an ordered sequence of constant declarations, definitions
and rewrite rules.  Conversion is beta-reduction plus rule rewriting plus
definition unfolding; ``infer_type`` is syntax-directed, with conversion
checks folded into the application rule.  Reduction is guarded by a step
budget (``Fuel``) because termination of user rule sets is not checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

DEFAULT_FUEL = 10_000_000


class KernelError(Exception):
    """Base for all typing, reduction and signature errors."""


class FuelExhausted(KernelError):
    """Reduction exceeded its step budget; the rule set likely diverges."""


class UnboundVariable(KernelError):
    pass


class UnboundConstant(KernelError):
    pass


class DomainMismatch(KernelError):
    """An actual type fails to convert to the expected one at an application."""


class NotAFunction(DomainMismatch):
    """Application head whose type exposes no product even after reduction.

    A special case of ``DomainMismatch`` so callers can treat every failure
    of the application rule uniformly.
    """


class IllegalSort(KernelError):
    pass


class DuplicateVariable(KernelError):
    pass


class NotAType(KernelError):
    pass


class DuplicateConstant(KernelError):
    pass


class IllTypedDeclaration(KernelError):
    pass


class RuleTypeMismatch(KernelError):
    pass


class NonPatternLhs(KernelError):
    pass


class UnboundRhsVariable(KernelError):
    pass


# ---------------------------------------------------------------------------
# Terms


class Term:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Sort(Term):
    name: str  # "Type" | "Kind"

    def __repr__(self) -> str:
        return self.name


TYPE = Sort("Type")
KIND = Sort("Kind")


@dataclass(frozen=True, slots=True)
class Var(Term):
    """A free (named) variable."""

    name: str


@dataclass(frozen=True, slots=True)
class BVar(Term):
    """A bound variable as a de Bruijn index; the hint is display-only."""

    index: int
    hint: str = field(default="x", compare=False)


@dataclass(frozen=True, slots=True)
class Const(Term):
    name: str


@dataclass(frozen=True, slots=True)
class Prod(Term):
    """Dependent product; the codomain binds index 0."""

    hint: str = field(compare=False)
    domain: Term = None  # type: ignore[assignment]
    codomain: Term = None  # type: ignore[assignment]


@dataclass(frozen=True, slots=True)
class Abs(Term):
    """Abstraction; the body binds index 0."""

    hint: str = field(compare=False)
    domain: Term = None  # type: ignore[assignment]
    body: Term = None  # type: ignore[assignment]


@dataclass(frozen=True, slots=True)
class App(Term):
    fn: Term
    arg: Term


def app(fn: Term, *args: Term) -> Term:
    for a in args:
        fn = App(fn, a)
    return fn


def spine(t: Term) -> tuple[Term, list[Term]]:
    """Split ``t`` into its head and the application arguments, left to right."""
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def close(t: Term, name: str, depth: int = 0) -> Term:
    """Turn free occurrences of ``name`` into the bound index ``depth``."""
    if isinstance(t, Var):
        return BVar(depth, name) if t.name == name else t
    if isinstance(t, App):
        return App(close(t.fn, name, depth), close(t.arg, name, depth))
    if isinstance(t, Abs):
        return Abs(t.hint, close(t.domain, name, depth), close(t.body, name, depth + 1))
    if isinstance(t, Prod):
        return Prod(t.hint, close(t.domain, name, depth), close(t.codomain, name, depth + 1))
    return t


def open_term(t: Term, value: Term, depth: int = 0) -> Term:
    """Replace bound index ``depth`` by ``value`` (which must be locally closed)."""
    if isinstance(t, BVar):
        if t.index == depth:
            return value
        if t.index > depth:
            return BVar(t.index - 1, t.hint)
        return t
    if isinstance(t, App):
        return App(open_term(t.fn, value, depth), open_term(t.arg, value, depth))
    if isinstance(t, Abs):
        return Abs(t.hint, open_term(t.domain, value, depth), open_term(t.body, value, depth + 1))
    if isinstance(t, Prod):
        return Prod(t.hint, open_term(t.domain, value, depth), open_term(t.codomain, value, depth + 1))
    return t


def lam(name: str, domain: Term, body: Term) -> Abs:
    """Abstraction binding the free variable ``name`` in ``body``."""
    return Abs(name, domain, close(body, name))


def pi(name: str, domain: Term, codomain: Term) -> Prod:
    """Product binding the free variable ``name`` in ``codomain``."""
    return Prod(name, domain, close(codomain, name))


def arrow(*types: Term) -> Term:
    """Right-associated non-dependent product chain."""
    if not types:
        raise ValueError("arrow needs at least one type")
    result = types[-1]
    for t in reversed(types[:-1]):
        result = Prod("_", t, result)
    return result


def free_names(t: Term) -> set[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            out.add(u.name)
        elif isinstance(u, App):
            stack.append(u.fn)
            stack.append(u.arg)
        elif isinstance(u, Abs):
            stack.append(u.domain)
            stack.append(u.body)
        elif isinstance(u, Prod):
            stack.append(u.domain)
            stack.append(u.codomain)
    return out


def const_names(t: Term) -> set[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Const):
            out.add(u.name)
        elif isinstance(u, App):
            stack.append(u.fn)
            stack.append(u.arg)
        elif isinstance(u, (Abs, Prod)):
            stack.append(u.domain)
            stack.append(u.body if isinstance(u, Abs) else u.codomain)
    return out


def substitute(t: Term, mapping: dict[str, Term]) -> Term:
    """Simultaneous substitution for free variables.

    Capture-avoidance is automatic in the locally nameless representation:
    binders bind indices, never names, so images can never be captured.
    """
    if not mapping:
        return t
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if isinstance(t, App):
        return App(substitute(t.fn, mapping), substitute(t.arg, mapping))
    if isinstance(t, Abs):
        return Abs(t.hint, substitute(t.domain, mapping), substitute(t.body, mapping))
    if isinstance(t, Prod):
        return Prod(t.hint, substitute(t.domain, mapping), substitute(t.codomain, mapping))
    return t


def alpha_equal(a: Term, b: Term) -> bool:
    return a == b


def term_size(t: Term) -> int:
    n = 0
    stack = [t]
    while stack:
        u = stack.pop()
        n += 1
        if isinstance(u, App):
            stack.append(u.fn)
            stack.append(u.arg)
        elif isinstance(u, Abs):
            stack.append(u.domain)
            stack.append(u.body)
        elif isinstance(u, Prod):
            stack.append(u.domain)
            stack.append(u.codomain)
    return n


def fresh_name(hint: str, taken: set[str]) -> str:
    base = hint or "x"
    if base not in taken:
        return base
    i = 1
    while f"{base}'{i}" in taken:
        i += 1
    return f"{base}'{i}"


def pretty(t: Term, _names: tuple[str, ...] = ()) -> str:
    """Readable rendering with raw names; for messages and debugging only."""

    def go(u: Term, names: tuple[str, ...], prec: int) -> str:
        # prec: 0 top, 1 arrow-left, 2 app-fn, 3 app-arg
        if isinstance(u, Sort):
            return u.name
        if isinstance(u, Var):
            return u.name
        if isinstance(u, Const):
            return u.name
        if isinstance(u, BVar):
            if u.index < len(names):
                return names[-1 - u.index]
            return f"#{u.index}"
        if isinstance(u, App):
            s = f"{go(u.fn, names, 2)} {go(u.arg, names, 3)}"
            return f"({s})" if prec >= 3 else s
        taken = set(names) | free_names(u)
        if isinstance(u, Abs):
            n = fresh_name(u.hint, taken)
            s = f"{n}: {go(u.domain, names, 1)} => {go(u.body, names + (n,), 0)}"
            return f"({s})" if prec >= 1 else s
        assert isinstance(u, Prod)
        if _uses_index(u.codomain, 0):
            n = fresh_name(u.hint, taken)
            s = f"{n}: {go(u.domain, names, 1)} -> {go(u.codomain, names + (n,), 0)}"
        else:
            s = f"{go(u.domain, names, 1)} -> {go(open_term(u.codomain, Var('_')), names, 0)}"
        return f"({s})" if prec >= 1 else s

    return go(t, _names, 0)


def _uses_index(t: Term, depth: int) -> bool:
    if isinstance(t, BVar):
        return t.index == depth
    if isinstance(t, App):
        return _uses_index(t.fn, depth) or _uses_index(t.arg, depth)
    if isinstance(t, Abs):
        return _uses_index(t.domain, depth) or _uses_index(t.body, depth + 1)
    if isinstance(t, Prod):
        return _uses_index(t.domain, depth) or _uses_index(t.codomain, depth + 1)
    return False


# ---------------------------------------------------------------------------
# Contexts and signatures


class Context:
    """Ordered variable bindings; no variable may be bound twice."""

    __slots__ = ("_bindings", "_types")

    def __init__(self, bindings: Iterable[tuple[str, Term]] = ()):
        self._bindings = tuple(bindings)
        self._types = {n: ty for n, ty in self._bindings}

    def extended(self, name: str, ty: Term) -> "Context":
        return Context(self._bindings + ((name, ty),))

    def lookup(self, name: str) -> Optional[Term]:
        return self._types.get(name)

    def names(self) -> set[str]:
        return set(self._types)

    def __iter__(self) -> Iterator[tuple[str, Term]]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __repr__(self) -> str:
        return "Context(" + ", ".join(f"{n}: {pretty(t)}" for n, t in self._bindings) + ")"


@dataclass(frozen=True, slots=True)
class ConstDecl:
    name: str
    type: Term


@dataclass(frozen=True, slots=True)
class Defn:
    """A transparent definition: behaves as a constant that unfolds to its body."""

    name: str
    type: Term
    body: Term


@dataclass(frozen=True)
class RewriteRule:
    """A typed rewrite rule; free variables of lhs/rhs live in the rule context."""

    context: tuple[tuple[str, Term], ...]
    lhs: Term
    rhs: Term

    @property
    def arity(self) -> int:
        return len(spine(self.lhs)[1])

    @property
    def head(self) -> Optional[str]:
        """Head constant name, or None when the lhs is not a pattern
        (check_signature reports that case; such a rule never fires)."""
        h = spine(self.lhs)[0]
        return h.name if isinstance(h, Const) else None


SigItem = Union[ConstDecl, Defn, RewriteRule]


class Signature:
    """Ordered declarations, definitions and rewrite rules; immutable."""

    __slots__ = ("_items", "_consts", "_defs", "_rules")

    def __init__(self, items: Iterable[SigItem] = ()):
        self._items: tuple[SigItem, ...] = tuple(items)
        self._consts: dict[str, Term] = {}
        self._defs: dict[str, Term] = {}
        self._rules: dict[str, list[RewriteRule]] = {}
        for it in self._items:
            if isinstance(it, ConstDecl):
                self._consts[it.name] = it.type
            elif isinstance(it, Defn):
                self._consts[it.name] = it.type
                self._defs[it.name] = it.body
            elif it.head is not None:
                self._rules.setdefault(it.head, []).append(it)

    @property
    def items(self) -> tuple[SigItem, ...]:
        return self._items

    @property
    def rules(self) -> list[RewriteRule]:
        return [it for it in self._items if isinstance(it, RewriteRule)]

    def extended(self, *items: SigItem) -> "Signature":
        return Signature(self._items + items)

    def const_type(self, name: str) -> Optional[Term]:
        return self._consts.get(name)

    def definition(self, name: str) -> Optional[Term]:
        return self._defs.get(name)

    def rules_for(self, head: str) -> list[RewriteRule]:
        return self._rules.get(head, [])

    def __contains__(self, name: str) -> bool:
        return name in self._consts

    def __repr__(self) -> str:
        return f"Signature({len(self._items)} items, {len(self.rules)} rules)"


# ---------------------------------------------------------------------------
# Reduction


class Fuel:
    __slots__ = ("left",)

    def __init__(self, steps: int = DEFAULT_FUEL):
        self.left = steps

    def spend(self, n: int = 1) -> None:
        self.left -= n
        if self.left < 0:
            raise FuelExhausted("reduction step budget exceeded")


def _as_fuel(fuel: Union[int, Fuel, None]) -> Fuel:
    if isinstance(fuel, Fuel):
        return fuel
    return Fuel(DEFAULT_FUEL if fuel is None else fuel)


def _match_syntactic(pat: Term, t: Term, bind: dict[str, Term]) -> bool:
    if isinstance(pat, Var):
        prev = bind.get(pat.name)
        if prev is None:
            bind[pat.name] = t
            return True
        return prev == t
    if isinstance(pat, Const):
        return t == pat
    if isinstance(pat, App):
        return (
            isinstance(t, App)
            and _match_syntactic(pat.fn, t.fn, bind)
            and _match_syntactic(pat.arg, t.arg, bind)
        )
    return False


def _match_reducing(sig: "Signature", pat: Term, t: Term, bind: dict[str, Term], fuel: Fuel) -> bool:
    """First-order matching that weak-head-normalizes the subject on demand."""
    if isinstance(pat, Var):
        prev = bind.get(pat.name)
        if prev is None:
            bind[pat.name] = t
            return True
        return prev == t or convertible(sig, prev, t, fuel)
    if isinstance(pat, Const):
        return whnf(sig, t, fuel) == pat
    if isinstance(pat, App):
        u = whnf(sig, t, fuel)
        return (
            isinstance(u, App)
            and _match_reducing(sig, pat.fn, u.fn, bind, fuel)
            and _match_reducing(sig, pat.arg, u.arg, bind, fuel)
        )
    return False


def _rewrite_head(sig: Signature, t: Term, fuel: Optional[Fuel]) -> Optional[Term]:
    """One rule or definition step at the root of ``t``, or None.

    With ``fuel`` the match may reduce proper subterms to expose rule
    patterns; without it the match is purely syntactic.  The root itself is
    destructured, never reduced, so this is safe to call from ``whnf``.
    """
    head, args = spine(t)
    if not isinstance(head, Const):
        return None
    for rule in sig.rules_for(head.name):
        if rule.arity != len(args):
            continue
        pats = spine(rule.lhs)[1]
        bind: dict[str, Term] = {}
        ok = True
        for p, a in zip(pats, args):
            if fuel is None:
                ok = _match_syntactic(p, a, bind)
            else:
                ok = _match_reducing(sig, p, a, bind, fuel)
            if not ok:
                break
        if ok:
            return substitute(rule.rhs, bind)
    body = sig.definition(head.name)
    if body is not None:
        return app(body, *args)
    return None


def whnf(sig: Signature, t: Term, fuel: Union[int, Fuel, None] = None) -> Term:
    """Weak head normal form under beta, the signature's rules, and unfolding."""
    fuel = _as_fuel(fuel)
    while True:
        if isinstance(t, App):
            fn = whnf(sig, t.fn, fuel)
            if isinstance(fn, Abs):
                fuel.spend()
                t = open_term(fn.body, t.arg)
                continue
            t2 = t if fn is t.fn else App(fn, t.arg)
            r = _rewrite_head(sig, t2, fuel)
            if r is None:
                return t2
            fuel.spend()
            t = r
        elif isinstance(t, Const):
            r = _rewrite_head(sig, t, fuel)
            if r is None:
                return t
            fuel.spend()
            t = r
        else:
            return t


def normalize(sig: Signature, t: Term, fuel: Union[int, Fuel, None] = None) -> Term:
    """Full beta-rule normal form; a fixed point of ``reduce_step``."""
    return _nf(sig, t, _as_fuel(fuel))


def _nf(sig: Signature, t: Term, fuel: Fuel) -> Term:
    t = whnf(sig, t, fuel)
    if isinstance(t, App):
        return App(_nf(sig, t.fn, fuel), _nf(sig, t.arg, fuel))
    if isinstance(t, Abs):
        x = fresh_name(t.hint, free_names(t.body))
        body = _nf(sig, open_term(t.body, Var(x)), fuel)
        return Abs(t.hint, _nf(sig, t.domain, fuel), close(body, x))
    if isinstance(t, Prod):
        x = fresh_name(t.hint, free_names(t.codomain))
        cod = _nf(sig, open_term(t.codomain, Var(x)), fuel)
        return Prod(t.hint, _nf(sig, t.domain, fuel), close(cod, x))
    return t


def contract_root(sig: Signature, t: Term) -> Optional[Term]:
    """Contract a beta redex, rule redex or definition at the root, syntactically."""
    if isinstance(t, App) and isinstance(t.fn, Abs):
        return open_term(t.fn.body, t.arg)
    return _rewrite_head(sig, t, None)


def reduce_step(sig: Signature, t: Term) -> Optional[Term]:
    """One leftmost-outermost reduction step, or None if ``t`` is normal."""
    r = contract_root(sig, t)
    if r is not None:
        return r
    if isinstance(t, App):
        rf = reduce_step(sig, t.fn)
        if rf is not None:
            return App(rf, t.arg)
        ra = reduce_step(sig, t.arg)
        if ra is not None:
            return App(t.fn, ra)
        return None
    if isinstance(t, Abs):
        rd = reduce_step(sig, t.domain)
        if rd is not None:
            return Abs(t.hint, rd, t.body)
        x = fresh_name(t.hint, free_names(t.body))
        rb = reduce_step(sig, open_term(t.body, Var(x)))
        if rb is not None:
            return Abs(t.hint, t.domain, close(rb, x))
        return None
    if isinstance(t, Prod):
        rd = reduce_step(sig, t.domain)
        if rd is not None:
            return Prod(t.hint, rd, t.codomain)
        x = fresh_name(t.hint, free_names(t.codomain))
        rc = reduce_step(sig, open_term(t.codomain, Var(x)))
        if rc is not None:
            return Prod(t.hint, t.domain, close(rc, x))
        return None
    return None


def convertible(sig: Signature, a: Term, b: Term, fuel: Union[int, Fuel, None] = None) -> bool:
    """Beta-rule conversion: alpha equality of the two normal forms."""
    if a == b:
        return True
    fuel = _as_fuel(fuel)
    return _nf(sig, a, fuel) == _nf(sig, b, fuel)


# ---------------------------------------------------------------------------
# Typing


def infer_type(
    sig: Signature,
    ctx: Context,
    t: Term,
    fuel: Union[int, Fuel, None] = None,
) -> Term:
    """Infer the type of ``t`` in ``ctx``; raises a ``KernelError`` subclass on failure."""
    return _infer(sig, ctx, t, _as_fuel(fuel))


def _infer(sig: Signature, ctx: Context, t: Term, fuel: Fuel) -> Term:
    if isinstance(t, Sort):
        if t == TYPE:
            return KIND
        raise IllegalSort("Kind has no type")
    if isinstance(t, Var):
        ty = ctx.lookup(t.name)
        if ty is None:
            raise UnboundVariable(f"unbound variable {t.name}")
        return ty
    if isinstance(t, BVar):
        raise KernelError(f"dangling bound variable #{t.index}")
    if isinstance(t, Const):
        ty = sig.const_type(t.name)
        if ty is None:
            raise UnboundConstant(f"unbound constant {t.name}")
        return ty
    if isinstance(t, Prod):
        _check_is_type(sig, ctx, t.domain, fuel)
        x = fresh_name(t.hint, ctx.names() | free_names(t.codomain))
        s = whnf(sig, _infer(sig, ctx.extended(x, t.domain), open_term(t.codomain, Var(x)), fuel), fuel)
        if not isinstance(s, Sort):
            raise IllegalSort(f"product codomain is not a type or kind: {pretty(t)}")
        return s
    if isinstance(t, Abs):
        _check_is_type(sig, ctx, t.domain, fuel)
        x = fresh_name(t.hint, ctx.names() | free_names(t.body))
        inner = ctx.extended(x, t.domain)
        body_ty = _infer(sig, inner, open_term(t.body, Var(x)), fuel)
        # the inferred product must itself be well-sorted (rules out kind-level bodies)
        s = whnf(sig, _infer(sig, inner, body_ty, fuel), fuel)
        if not isinstance(s, Sort):
            raise IllegalSort(f"abstraction body type is not well-sorted: {pretty(body_ty)}")
        return Prod(t.hint, t.domain, close(body_ty, x))
    assert isinstance(t, App)
    fn_ty = whnf(sig, _infer(sig, ctx, t.fn, fuel), fuel)
    if not isinstance(fn_ty, Prod):
        raise NotAFunction(
            f"application head has no product type: {pretty(t.fn)} : {pretty(fn_ty)}"
        )
    arg_ty = _infer(sig, ctx, t.arg, fuel)
    if arg_ty != fn_ty.domain and not convertible(sig, arg_ty, fn_ty.domain, fuel):
        nf_got = _nf(sig, arg_ty, fuel)
        nf_want = _nf(sig, fn_ty.domain, fuel)
        raise DomainMismatch(
            f"argument type mismatch: expected {pretty(nf_want)}, got {pretty(nf_got)}"
        )
    return open_term(fn_ty.codomain, t.arg)


def _check_is_type(sig: Signature, ctx: Context, a: Term, fuel: Fuel) -> None:
    s = whnf(sig, _infer(sig, ctx, a, fuel), fuel)
    if s != TYPE:
        raise IllegalSort(f"expected a type of sort Type: {pretty(a)} has sort {pretty(s)}")


def check_context(sig: Signature, ctx: Context, fuel: Union[int, Fuel, None] = None) -> None:
    """Validate each binding against its prefix; raises on the first failure."""
    fuel = _as_fuel(fuel)
    seen: set[str] = set()
    prefix = Context()
    for name, ty in ctx:
        if name in seen:
            raise DuplicateVariable(f"variable {name} bound twice")
        try:
            _check_is_type(sig, prefix, ty, fuel)
        except IllegalSort as e:
            raise NotAType(f"binding {name}: {e}") from e
        seen.add(name)
        prefix = prefix.extended(name, ty)


def _check_pattern(t: Term) -> None:
    head, args = spine(t)
    if not isinstance(head, Const):
        raise NonPatternLhs(f"rule head is not a constant: {pretty(t)}")
    for a in args:
        _check_pattern_arg(a)


def _check_pattern_arg(t: Term) -> None:
    if isinstance(t, (Var, Const)):
        return
    if isinstance(t, App):
        head, args = spine(t)
        if not isinstance(head, Const):
            raise NonPatternLhs(f"pattern argument with non-constant head: {pretty(t)}")
        for a in args:
            _check_pattern_arg(a)
        return
    raise NonPatternLhs(f"non-first-order pattern argument: {pretty(t)}")


def check_signature(sig: Signature, fuel: Union[int, Fuel, None] = None) -> None:
    """Validate every item against its prefix; raises on the first failure."""
    fuel = _as_fuel(fuel)
    prefix = Signature()
    for item in sig.items:
        if isinstance(item, (ConstDecl, Defn)):
            if item.name in prefix:
                raise DuplicateConstant(f"constant {item.name} declared twice")
            try:
                s = whnf(prefix, _infer(prefix, Context(), item.type, fuel), fuel)
            except KernelError as e:
                if isinstance(e, (DuplicateConstant, FuelExhausted)):
                    raise
                raise IllTypedDeclaration(f"declaration {item.name}: {e}") from e
            if not isinstance(s, Sort):
                raise IllTypedDeclaration(f"declaration {item.name}: type has no sort")
            if isinstance(item, Defn):
                try:
                    body_ty = _infer(prefix, Context(), item.body, fuel)
                except KernelError as e:
                    if isinstance(e, FuelExhausted):
                        raise
                    raise IllTypedDeclaration(f"definition {item.name}: {e}") from e
                if not convertible(prefix, body_ty, item.type, fuel):
                    raise IllTypedDeclaration(
                        f"definition {item.name}: body type {pretty(body_ty)} "
                        f"does not match declared {pretty(item.type)}"
                    )
        else:
            _check_rule(prefix, item, fuel)
        prefix = prefix.extended(item)


def _check_rule(prefix: Signature, rule: RewriteRule, fuel: Fuel) -> None:
    _check_pattern(rule.lhs)
    extra = free_names(rule.rhs) - free_names(rule.lhs)
    if extra:
        raise UnboundRhsVariable(
            f"rhs variables not bound on the lhs: {', '.join(sorted(extra))}"
        )
    ctx = Context(rule.context)
    check_context(prefix, ctx, fuel)
    try:
        lhs_ty = _infer(prefix, ctx, rule.lhs, fuel)
        rhs_ty = _infer(prefix, ctx, rule.rhs, fuel)
    except KernelError as e:
        if isinstance(e, FuelExhausted):
            raise
        raise RuleTypeMismatch(f"rule {pretty(rule.lhs)}: {e}") from e
    if not convertible(prefix, lhs_ty, rhs_ty, fuel):
        raise RuleTypeMismatch(
            f"rule sides disagree: lhs : {pretty(lhs_ty)}, rhs : {pretty(rhs_ty)}"
        )
