"""Command-line driver: translate articles, check documents, report statistics.

Exit codes: 0 success, 1 proof or type failure, 2 usage or I/O failure.
"""

from __future__ import annotations

import argparse
import gzip
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import dkfile, hol, kernel, opentheory, translate

STATS_FILE = "stats.json"


@dataclass
class RunConfig:
    subcommand: str
    inputs: list = field(default_factory=list)
    outdir: str = "."
    mode: str = "q0"
    compress: bool = False
    sharing: bool = True
    fuel: Optional[int] = None
    share_min_size: int = 8
    as_json: bool = False
    verbose: int = 0


def _env_fuel() -> Optional[int]:
    raw = os.environ.get("HOLTRANS_FUEL")
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        return None


def _gz_size(data: bytes) -> int:
    return len(gzip.compress(data, mtime=0))


def _fail(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def cmd_translate(cfg: RunConfig) -> int:
    outdir = Path(cfg.outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        _fail(f"cannot create output directory: {e}")
        return 2
    base_doc = translate.base_document(cfg.mode)
    (outdir / "hol.dk").write_text(dkfile.emit(base_doc), encoding="utf-8")

    articles = []
    for raw_path in cfg.inputs:
        path = Path(raw_path)
        try:
            data = path.read_bytes()
        except OSError as e:
            _fail(f"{path}: {e}")
            return 2
        name = path.stem
        t0 = time.perf_counter()
        try:
            state = opentheory.run_text(data)
            result = translate.translate_state(
                state,
                name,
                mode=cfg.mode,
                compress=cfg.compress,
                sharing=cfg.sharing,
                min_size=cfg.share_min_size,
            )
        except (opentheory.ArticleError, hol.HolError, translate.TranslateError, kernel.KernelError) as e:
            idx = getattr(e, "command_index", None)
            where = f" (command {idx})" if idx is not None else ""
            _fail(f"{path}{where}: {type(e).__name__}: {e}")
            return 1
        t1 = time.perf_counter()
        try:
            translate.verify_document(result.document, mode=cfg.mode, fuel=cfg.fuel)
        except kernel.KernelError as e:
            _fail(f"{path}: generated document failed self-verification: {e}")
            return 1
        t2 = time.perf_counter()
        text = dkfile.emit(result.document).encode("utf-8")
        out_path = outdir / f"{name}.dk"
        out_path.write_text(text.decode("utf-8"), encoding="utf-8")
        row = {
            "name": name,
            "input": str(path),
            "output": str(out_path),
            "art_bytes": len(data),
            "art_gz": _gz_size(data),
            "dk_bytes": len(text),
            "dk_gz": _gz_size(text),
            "translate_s": round(t1 - t0, 4),
            "verify_s": round(t2 - t1, 4),
            "theorems": result.theorem_count,
            "share_hits": result.share_hits,
        }
        row["ratio_gz"] = round(row["dk_gz"] / row["art_gz"], 3) if row["art_gz"] else 0.0
        articles.append(row)
        if cfg.verbose:
            print(f"{path} -> {out_path} ({result.theorem_count} theorem(s))")

    stats = {"mode": cfg.mode, "compress": cfg.compress, "sharing": cfg.sharing, "articles": articles}
    (outdir / STATS_FILE).write_text(json.dumps(stats, indent=2), encoding="utf-8")
    return 0


def _documents_for_check(paths: list) -> list:
    """Resolve the file list, prepending each directory's base file once;
    duplicate entries are dropped."""
    out = []
    seen = set()

    def add(p: Path) -> None:
        key = p.resolve()
        if key not in seen:
            seen.add(key)
            out.append(p)

    for raw in paths:
        p = Path(raw)
        if p.name != "hol.dk":
            base = p.parent / "hol.dk"
            if base.exists():
                add(base)
        add(p)
    return out


def cmd_check(cfg: RunConfig) -> int:
    """Check each document against the base prefix.

    Base files (hol.dk) accumulate; other documents are independent modules
    (there is no inter-module linking), so each is checked on its own
    against the bases loaded so far.
    """
    base_items: list = []
    for path in _documents_for_check(cfg.inputs):
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            _fail(f"{path}: {e}")
            return 2
        try:
            doc = dkfile.parse(text)
        except dkfile.ParseError as e:
            _fail(f"{path}: {e}")
            return 1
        file_items = dkfile.signature_items(doc)
        try:
            kernel.check_signature(kernel.Signature(base_items + list(file_items)), cfg.fuel)
        except kernel.KernelError as e:
            _fail(f"{path}: {type(e).__name__}: {e}")
            return 1
        if Path(path).name == "hol.dk":
            base_items.extend(file_items)
        if cfg.verbose:
            print(f"{path}: ok")
    return 0


def _load_stats(paths: list) -> list:
    rows = []
    for raw in paths or ["."]:
        p = Path(raw)
        if p.is_dir():
            p = p / STATS_FILE
        if not p.exists():
            continue
        data = json.loads(p.read_text(encoding="utf-8"))
        rows.extend(data.get("articles", []))
    return rows


_COLUMNS = (
    ("Package", "name"),
    ("OT(kB)", "art_gz"),
    ("Dk(kB)", "dk_gz"),
    ("Ratio", "ratio_gz"),
    ("Trans(s)", "translate_s"),
    ("Verify(s)", "verify_s"),
    ("Thms", "theorems"),
    ("Shares", "share_hits"),
)


def cmd_stats(cfg: RunConfig) -> int:
    rows = _load_stats(cfg.inputs)
    if cfg.as_json:
        print(json.dumps({"articles": rows}, indent=2))
        return 0
    for row in rows:
        parts = [f"{key}={row.get(key)}" for _, key in _COLUMNS]
        print(" ".join(parts))
    table = []
    total = {key: 0 for _, key in _COLUMNS[1:]}
    for row in rows:
        cells = [str(row.get("name", "?"))]
        for _, key in _COLUMNS[1:]:
            v = row.get(key, 0)
            total[key] += v
            if key in ("art_gz", "dk_gz"):
                v = round(v / 1024, 2)
            cells.append(str(v))
        table.append(cells)
    total_cells = ["Total"]
    for _, key in _COLUMNS[1:]:
        v = total[key]
        if key in ("art_gz", "dk_gz"):
            v = round(v / 1024, 2)
        elif key == "ratio_gz":
            art = total["art_gz"]
            v = round(total["dk_gz"] / art, 3) if art else 0.0
        elif isinstance(v, float):
            v = round(v, 3)
        total_cells.append(str(v))
    table.append(total_cells)
    headers = [h for h, _ in _COLUMNS]
    widths = [max(len(headers[i]), *(len(r[i]) for r in table)) for i in range(len(headers))]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    for cells in table:
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    return 0


def _selftest_checks():
    def base_q0():
        kernel.check_signature(translate.base_signature("q0"))
        assert len(translate.base_signature("q0").rules) == 1

    def base_pts():
        kernel.check_signature(translate.base_signature("pts"))
        assert len(translate.base_signature("pts").rules) == 3

    def example_signature():
        alpha, c, f = kernel.Const("alpha"), kernel.Const("c"), kernel.Const("f")
        fy = kernel.App(f, kernel.Var("y"))
        rule = kernel.RewriteRule((), kernel.App(f, c), kernel.pi("y", alpha, kernel.arrow(fy, fy)))
        sig = kernel.Signature(
            [
                kernel.ConstDecl("alpha", kernel.TYPE),
                kernel.ConstDecl("c", alpha),
                kernel.ConstDecl("f", kernel.arrow(alpha, kernel.TYPE)),
                rule,
            ]
        )
        kernel.check_signature(sig)
        term = kernel.lam("x", kernel.App(f, c), kernel.app(kernel.Var("x"), c, kernel.Var("x")))
        ty = kernel.infer_type(sig, kernel.Context(), term)
        assert ty == kernel.arrow(kernel.App(f, c), kernel.App(f, c))

    def pts_rules():
        sig = translate.base_signature("pts")
        p, q = kernel.Var("p"), kernel.Var("q")
        proof, imp = kernel.Const("proof"), kernel.Const("imp")
        got = kernel.normalize(sig, kernel.App(proof, kernel.app(imp, p, q)))
        assert got == kernel.arrow(kernel.App(proof, p), kernel.App(proof, q))

    def pipeline():
        art = "\n".join(
            [
                "6", "version", '"A"', "varType", "0", "def", "pop",
                '"x"', "0", "ref", "var", "1", "def", "pop",
                "1", "ref", "varTerm", "2", "def", "pop",
                "2", "ref", "refl",
                '"bool"', "typeOp", "nil", "opType", "3", "def", "pop",
                '"->"', "typeOp", "0", "ref", "3", "ref", "nil", "cons", "cons", "opType", "4", "def", "pop",
                '"->"', "typeOp", "0", "ref", "4", "ref", "nil", "cons", "cons", "opType", "5", "def", "pop",
                '"="', "const", "5", "ref", "constTerm", "6", "def", "pop",
                "nil",
                "6", "ref", "2", "ref", "appTerm", "2", "ref", "appTerm",
                "thm",
            ]
        )
        state = opentheory.run_text(art)
        result = translate.translate_state(state, "selftest")
        translate.verify_document(result.document)

    return [
        ("base signature (q0)", base_q0),
        ("base signature (pts)", base_pts),
        ("rewrite-dependent typing example", example_signature),
        ("pts provability rules", pts_rules),
        ("article pipeline", pipeline),
    ]


def cmd_selftest(cfg: RunConfig) -> int:
    failures = 0
    for name, check in _selftest_checks():
        try:
            check()
            print(f"selftest {name}: ok")
        except Exception as e:  # noqa: BLE001 - report and continue
            failures += 1
            print(f"selftest {name}: FAILED: {type(e).__name__}: {e}")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holtrans",
        description="Replay HOL article proofs, translate them, and re-verify the output.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_tr = sub.add_parser("translate", help="translate .art files to .dk documents")
    p_tr.add_argument("inputs", nargs="+", metavar="FILE")
    p_tr.add_argument("--mode", choices=("q0", "pts"), default="q0")
    p_tr.add_argument("--compress", action="store_true", help="compress conversion proofs")
    p_tr.add_argument("--no-sharing", dest="sharing", action="store_false")
    p_tr.add_argument("--fuel", type=int, default=None)
    p_tr.add_argument("--share-min-size", type=int, default=8)
    p_tr.add_argument("-o", "--outdir", default=".")
    p_tr.add_argument("-v", "--verbose", action="count", default=0)

    p_ck = sub.add_parser("check", help="type-check .dk documents")
    p_ck.add_argument("inputs", nargs="+", metavar="FILE")
    p_ck.add_argument("--fuel", type=int, default=None)
    p_ck.add_argument("-v", "--verbose", action="count", default=0)

    p_st = sub.add_parser("stats", help="report translation statistics")
    p_st.add_argument("inputs", nargs="*", metavar="PATH")
    p_st.add_argument("--json", dest="as_json", action="store_true")

    sub.add_parser("selftest", help="run built-in sanity checks")
    return parser


def main(argv: Optional[list] = None) -> int:
    sys.setrecursionlimit(100_000)
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        subcommand=args.subcommand,
        inputs=getattr(args, "inputs", []),
        outdir=getattr(args, "outdir", "."),
        mode=getattr(args, "mode", "q0"),
        compress=getattr(args, "compress", False),
        sharing=getattr(args, "sharing", True),
        fuel=getattr(args, "fuel", None) or _env_fuel(),
        share_min_size=getattr(args, "share_min_size", 8),
        as_json=getattr(args, "as_json", False),
        verbose=getattr(args, "verbose", 0),
    )
    if cfg.subcommand == "translate":
        return cmd_translate(cfg)
    if cfg.subcommand == "check":
        return cmd_check(cfg)
    if cfg.subcommand == "stats":
        return cmd_stats(cfg)
    return cmd_selftest(cfg)


if __name__ == "__main__":
    sys.exit(main())
