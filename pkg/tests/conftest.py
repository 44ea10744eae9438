import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
sys.setrecursionlimit(100_000)

from holtrans import hol, kernel, translate  # noqa: E402

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


@pytest.fixture(scope="session")
def q0():
    return translate.base_signature("q0")


@pytest.fixture(scope="session")
def pts():
    return translate.base_signature("pts")


@pytest.fixture(scope="session")
def corpus_paths():
    paths = sorted(CORPUS.glob("*.art"))
    assert len(paths) >= 10
    return paths


# ---------------------------------------------------------------------------
# Random well-typed HOL terms and proofs.
#
# The generator works over two type operators and three constants; every
# produced proof is validated with check_proof before it is returned, so a
# generator bug fails loudly rather than skewing the properties.

LIST_OP = "k.list"
PROD_OP = "k.prod"
CONSTS = {
    "k.f": hol.fn(hol.TyVar("A"), hol.BOOL),
    "k.e": hol.IND,
    "k.g": hol.fn(hol.TyVar("A"), hol.TyOp(LIST_OP, (hol.TyVar("A"),))),
}


def make_env(mode="q0", compress=False):
    env = translate.TranslationEnv(mode, compress)
    translate.declare_type_op(env, LIST_OP, 1)
    translate.declare_type_op(env, PROD_OP, 2)
    for name, generic in CONSTS.items():
        translate.declare_constant(env, name, generic)
    return env


def env_signature(env):
    """The base signature extended with the environment's declarations."""
    return kernel.Signature(
        tuple(translate.base_signature(env.mode).items) + tuple(env.decls)
    )


class HolGen:
    def __init__(self, seed: int, max_type_depth: int = 2):
        self.rng = random.Random(seed)
        self.max_type_depth = max_type_depth
        self.fresh = 0

    def type(self, depth=None) -> hol.HolType:
        if depth is None:
            depth = self.max_type_depth
        atoms = [hol.BOOL, hol.IND, hol.TyVar("A"), hol.TyVar("B")]
        if depth <= 0:
            return self.rng.choice(atoms)
        roll = self.rng.random()
        if roll < 0.45:
            return self.rng.choice(atoms)
        if roll < 0.75:
            return hol.fn(self.type(depth - 1), self.type(depth - 1))
        if roll < 0.9:
            return hol.TyOp(LIST_OP, (self.type(depth - 1),))
        return hol.TyOp(PROD_OP, (self.type(depth - 1), self.type(depth - 1)))

    def _fresh_var(self, ty: hol.HolType) -> hol.Var:
        self.fresh += 1
        return hol.Var(f"v{self.fresh}", ty)

    def term(self, ty: hol.HolType, depth: int, scope: tuple = ()) -> hol.HolTerm:
        candidates = [v for v in scope if v.type == ty]
        if depth <= 0:
            if candidates and self.rng.random() < 0.7:
                return self.rng.choice(candidates)
            const = self._const_at(ty)
            if const is not None and self.rng.random() < 0.3:
                return const
            return self._fresh_var(ty)
        roll = self.rng.random()
        if roll < 0.2 and candidates:
            return self.rng.choice(candidates)
        if roll < 0.45 and isinstance(ty, hol.TyOp) and ty.op == "->":
            v = self._fresh_var(ty.args[0])
            return hol.Abs(v, self.term(ty.args[1], depth - 1, scope + (v,)))
        if roll < 0.6 and ty == hol.BOOL:
            arg_ty = self.type(1)
            lhs = self.term(arg_ty, depth - 1, scope)
            rhs = self.term(arg_ty, depth - 1, scope)
            return hol.mk_eq(lhs, rhs)
        if roll < 0.85:
            arg_ty = self.type(1)
            fn_term = self.term(hol.fn(arg_ty, ty), depth - 1, scope)
            arg = self.term(arg_ty, depth - 1, scope)
            return hol.App(fn_term, arg)
        return self.term(ty, 0, scope)

    def _const_at(self, ty: hol.HolType):
        opts = []
        for name, generic in CONSTS.items():
            if hol.match_type(generic, ty) is not None:
                opts.append(hol.Const(name, ty))
        if hol.match_type(hol.eq_generic(), ty) is not None:
            opts.append(hol.Const(hol.EQ, ty))
        if hol.match_type(hol.select_generic(), ty) is not None:
            opts.append(hol.Const(hol.SELECT, ty))
        return self.rng.choice(opts) if opts else None

    def prop(self, depth: int, scope: tuple = ()) -> hol.HolTerm:
        return self.term(hol.BOOL, depth, scope)

    # -- proofs ------------------------------------------------------------

    def eq_proof(self, depth: int, ty=None) -> hol.Proof:
        """A derivation concluding an equality at ``ty``."""
        if ty is None:
            ty = self.type(1)
        if depth <= 0:
            roll = self.rng.random()
            if roll < 0.4:
                return hol.Refl(self.term(ty, 1))
            if roll < 0.7:
                dom = self.type(1)
                v = self._fresh_var(dom)
                return hol.Beta(v, self.term(ty, 1, (v,)))
            return hol.Assume(hol.mk_eq(self.term(ty, 1), self.term(ty, 1)))
        roll = self.rng.random()
        if roll < 0.5:
            arg_ty = self.type(1)
            fun = self.eq_proof(depth - 1, hol.fn(arg_ty, ty))
            arg = self.eq_proof(depth - 1, arg_ty)
            return hol.AppThm(fun, arg)
        if roll < 0.75 and isinstance(ty, hol.TyOp) and ty.op == "->":
            sub = self.eq_proof(depth - 1, ty.args[1])
            hyps = hol.check_proof(sub).hyps
            v = self._fresh_var(ty.args[0])
            while any(v in hol.free_vars(h) for h in hyps):
                v = self._fresh_var(ty.args[0])
            return hol.AbsThm(v, sub)
        return self.eq_proof(0, ty)

    def subst_for(self, sub: hol.Proof) -> hol.HolSubst:
        seq = hol.check_proof(sub)
        theta = []
        for name in sorted(hol.sequent_tyvars(seq)):
            if self.rng.random() < 0.6:
                theta.append((name, self.type(1)))
        theta_d = dict(theta)
        sigma = []
        for v in sorted(hol.sequent_free_vars(seq), key=lambda v: v.name):
            if self.rng.random() < 0.5:
                key = hol.Var(v.name, hol.type_subst(theta_d, v.type))
                image = self.term(key.type, 1)
                sigma.append((key, image))
        return hol.HolSubst(tuple(theta), tuple(sigma))

    def proof(self, depth: int) -> hol.Proof:
        p = self._proof(depth)
        hol.check_proof(p)  # generator invariant: everything produced checks
        return p

    def _proof(self, depth: int) -> hol.Proof:
        if depth <= 0:
            roll = self.rng.random()
            if roll < 0.5:
                return hol.Assume(self.prop(1))
            if roll < 0.8:
                return self.eq_proof(0)
            return hol.Axiom((self.prop(1),), self.prop(1))
        roll = self.rng.random()
        if roll < 0.35:
            return self.eq_proof(depth)
        if roll < 0.55:
            eq = self.eq_proof(depth - 1, hol.BOOL)
            phi = hol.dest_eq(hol.check_proof(eq).concl)[0]
            return hol.EqMp(eq, hol.Assume(phi))
        if roll < 0.75:
            return hol.DeductAntiSym(self._proof(depth - 1), self._proof(depth - 1))
        sub = self._proof(depth - 1)
        return hol.Subst(self.subst_for(sub), sub)


def random_hol_term(seed: int, depth: int = 3):
    gen = HolGen(seed)
    ty = gen.type()
    return gen.term(ty, depth), ty


def random_kernel_term(seed: int, env=None, depth: int = 3):
    """A well-typed kernel term over the base signature, via translation."""
    if env is None:
        env = make_env()
    term, _ = random_hol_term(seed, depth)
    return translate.trans_term(env, term), term
