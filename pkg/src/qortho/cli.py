"""Command-line surface tying together construction, verification,
reduction, pairing and the calculus reports.

One binary with subcommands:

  build-r   emit the R matrix for one dimension as canonical JSON
  verify    run a named check suite (or all of them) and report
  reduce    normal-form a word of the inhomogeneous algebra
  pair      evaluate the duality bracket of a functional word against
            an algebra word
  det       print the central quantum determinant of the rotation block
  lie       dump every q-Lie relation instance and the structure
            constants of a tangent basis as JSON

Exit codes: 0 when every requested check passes, 1 when a check fails,
2 on usage or input-schema errors, 3 when exact arithmetic leaves its
domain (a non-invertible denominator class, or a pole at a point that
should be regular).

All suites are deterministic; the --seed flag (default 0) is recorded
in JSON reports so identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from math import comb
from typing import List, Optional, Tuple

from .calculus import (adjoint_coaction_check, lie_rows, structure_constants,
                       tangent_basis, verify_qlie)
from .envelope import (EPS_WORD, pairing, tag_gen, word_functional,
                       verify_envelope_suite, verify_parameter_collapse,
                       verify_pairing_axioms)
from .itensor import (IndexGeometry, SparseTensor4, tensor_from_json,
                      tensor_to_json)
from .presentations import (build_presentation, check_confluence,
                            derive_rewrite_rules, element_from_json,
                            element_to_json, check_hopf_ideal,
                            hilbert_dimension, iso_normal_system,
                            merge_rewrite_systems, quantum_determinant,
                            reduce, word_element, word_key)
from .report import Report
from .rmatrix import build_R, build_bundle, decompose_embedding, \
    verify_rmatrix_suite
from .scalars import ScalarError, render_scalar, scalar_to_json, specialize

__all__ = ["run", "main", "io", "RunConfig", "SchemaError", "UsageError"]


class SchemaError(Exception):
    """A payload violated one of the JSON schemas; `pointer` locates the
    offending node."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        self.message = message
        super().__init__("%s at %r" % (message, pointer or "/"))


class UsageError(Exception):
    pass


class RunConfig:
    """Validated common options shared by the subcommands."""

    __slots__ = ("n", "series", "spec", "degree", "seed", "jobs", "fmt",
                 "out", "dump")

    def __init__(self, args):
        self.n = args.n
        if self.n is None or self.n < 3:
            raise UsageError("--n must be at least 3")
        self.series = args.series
        self.spec = _parse_spec(args.spec) if args.spec else {}
        self.degree = args.degree
        if self.degree is not None and self.degree < 1:
            raise UsageError("--degree must be at least 1")
        self.seed = args.seed
        self.jobs = args.jobs
        if self.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        self.fmt = args.format
        self.out = args.out
        self.dump = args.dump


def _parse_spec(text: str):
    out = {}
    for piece in text.split(","):
        if "=" not in piece:
            raise UsageError("--spec expects k=v pairs, got %r" % (piece,))
        k, v = piece.split("=", 1)
        try:
            val = Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            raise UsageError("--spec value %r is not a rational" % (v,))
        if val == 0:
            raise UsageError("--spec values must be nonzero")
        out[k.strip()] = val
    return out


def _dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _emit(cfg: RunConfig, text: str, payload) -> None:
    body = text + "\n" if cfg.fmt == "text" else _dumps(payload)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    if cfg.dump:
        with open(cfg.dump, "w") as fh:
            fh.write(_dumps(payload))


def _render_element(e) -> str:
    if not e.terms:
        return "0"
    parts = []
    for w in sorted(e.terms, key=word_key):
        parts.append("(%s) %s" % (render_scalar(e.terms[w]),
                                  e.alphabet.show_word(w)))
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# schema-checked payload io

def io(mode: str, path: str, kind: str, payload=None, context=None):
    """Save or load one of the canonical JSON payloads.

    Kinds: "tensor" (four-index tensors), "element" (algebra elements,
    context = (alphabet, params)), "functional" (regular-functional
    combinations, context = bundle).  Loading accepts non-canonical
    entry order, re-canonicalizes, and returns (object, notes) with a
    note flagging anything that was reordered.
    """
    if mode == "save":
        if kind == "tensor":
            doc = tensor_to_json(payload)
        elif kind == "element":
            doc = element_to_json(payload)
        elif kind == "functional":
            from .envelope import functional_to_json
            doc = functional_to_json(payload)
        else:
            raise ValueError("unknown payload kind %r" % (kind,))
        with open(path, "w") as fh:
            fh.write(_dumps(doc))
        return payload
    if mode != "load":
        raise ValueError("io mode must be save or load")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError("", "not valid JSON: %s" % exc)
    if kind == "tensor":
        return _load_tensor(doc)
    if kind == "element":
        alphabet, ps = context
        return _load_element(doc, alphabet, ps)
    if kind == "functional":
        return _load_functional(doc, context)
    raise ValueError("unknown payload kind %r" % (kind,))


def _want(doc, key, types, pointer):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(pointer, "missing key %r" % (key,))
    val = doc[key]
    if not isinstance(val, types):
        raise SchemaError(pointer + "/" + key, "wrong type %r"
                          % (type(val).__name__,))
    return val


def _load_tensor(doc) -> Tuple[SparseTensor4, List[str]]:
    dim = _want(doc, "dim", int, "")
    if dim < 3:
        raise SchemaError("/dim", "dimension below 3")
    geom = IndexGeometry(dim, embedded=bool(doc.get("embedded", False)))
    if "series" in doc and doc["series"] != geom.series:
        raise SchemaError("/series", "series %r inconsistent with dim %d"
                          % (doc["series"], dim))
    if "vars" in doc and list(doc["vars"]) != geom.params.vars:
        raise SchemaError("/vars", "unknown variable header %r"
                          % (doc["vars"],))
    entries = _want(doc, "entries", list, "")
    notes: List[str] = []
    keys = []
    for i, rec in enumerate(entries):
        ptr = "/entries/%d" % i
        idx = _want(rec, "idx", list, ptr)
        if len(idx) != 4 or not all(isinstance(x, int) for x in idx):
            raise SchemaError(ptr + "/idx", "expected four integers")
        if not all(1 <= x <= dim for x in idx):
            raise SchemaError(ptr + "/idx", "index out of range %r" % (idx,))
        _want(rec, "value", dict, ptr)
        keys.append(tuple(idx))
    if keys != sorted(keys):
        notes.append("entry list was not in canonical order; re-sorted")
    if len(set(keys)) != len(keys):
        raise SchemaError("/entries", "duplicate index tuple")
    try:
        tensor = tensor_from_json(doc)
    except (ValueError, KeyError, TypeError) as exc:
        raise SchemaError("/entries", str(exc))
    return tensor, notes


def _load_element(doc, alphabet, ps):
    if not isinstance(doc, list):
        raise SchemaError("", "element payload must be a list")
    notes: List[str] = []
    words = []
    for i, rec in enumerate(doc):
        ptr = "/%d" % i
        word = _want(rec, "word", list, ptr)
        for j, sym in enumerate(word):
            if not isinstance(sym, str) or sym not in alphabet.index:
                raise SchemaError("%s/word/%d" % (ptr, j),
                                  "unknown symbol %r" % (sym,))
        _want(rec, "coeff", dict, ptr)
        words.append(tuple(alphabet.index[s] for s in word))
    if words != sorted(words, key=word_key):
        notes.append("term list was not in canonical order; re-sorted")
    try:
        elem = element_from_json(alphabet, ps, doc)
    except (ValueError, KeyError, TypeError) as exc:
        raise SchemaError("", str(exc))
    return elem, notes


def _load_functional(doc, bundle):
    from .envelope import functional_from_json, word_key as fword_key
    if not isinstance(doc, list):
        raise SchemaError("", "functional payload must be a list")
    notes: List[str] = []
    words = []
    for i, rec in enumerate(doc):
        ptr = "/%d" % i
        word = _want(rec, "word", list, ptr)
        parsed = []
        for j, tag in enumerate(word):
            try:
                g = tag_gen(tag)
            except (ValueError, TypeError):
                raise SchemaError("%s/word/%d" % (ptr, j),
                                  "unknown functional tag %r" % (tag,))
            if g is not None:
                parsed.append(g)
        _want(rec, "coeff", dict, ptr)
        words.append(tuple(parsed))
    if words != sorted(words, key=fword_key):
        notes.append("term list was not in canonical order; re-sorted")
    try:
        f = functional_from_json(bundle, doc)
    except (ValueError, KeyError, TypeError) as exc:
        raise SchemaError("", str(exc))
    return f, notes


# ---------------------------------------------------------------------------
# suites

def _suite_rmatrix(cfg: RunConfig) -> List[Report]:
    return [verify_rmatrix_suite(IndexGeometry(cfg.n))]


def _suite_embedding(cfg: RunConfig) -> List[Report]:
    return [decompose_embedding(cfg.n)]


def _suite_presentation(cfg: RunConfig) -> List[Report]:
    n = cfg.n
    p = build_presentation("iso", n)
    rs = merge_rewrite_systems(derive_rewrite_rules(p, "plane"),
                               derive_rewrite_rules(p, "dilatation"))
    rep = Report("presentation suite for iso(%d)" % n)
    rep.extend(check_confluence(rs, p))
    dmax = cfg.degree if cfg.degree is not None else 4
    xs = ["x%d" % a for a in range(1, n + 1)]
    bad = None
    for d in range(dmax + 1):
        if hilbert_dimension(p, rs, d, letters=xs) != comb(n + d - 1, d):
            bad = d
            break
    rep.add("coordinate monomial counts match the commutative table",
            bad is None, "" if bad is None else "degree %d" % bad)
    rep.extend(check_hopf_ideal(n))
    return [rep]


def _suite_envelope(cfg: RunConfig) -> List[Report]:
    D = cfg.degree if cfg.degree is not None \
        else (3 if cfg.n == 3 else 2)
    return [verify_envelope_suite(cfg.n, D),
            verify_parameter_collapse(cfg.n),
            verify_pairing_axioms(cfg.n)]


def _suite_calculus_projected(cfg: RunConfig) -> List[Report]:
    D = cfg.degree if cfg.degree is not None else 2
    return [verify_qlie("projected", cfg.n, D), adjoint_coaction_check(cfg.n)]


def _suite_calculus_r1(cfg: RunConfig) -> List[Report]:
    D = cfg.degree if cfg.degree is not None else 2
    return [verify_qlie("r1", cfg.n, D)]


_SUITES = [
    ("rmatrix", _suite_rmatrix),
    ("embedding", _suite_embedding),
    ("presentation", _suite_presentation),
    ("envelope", _suite_envelope),
    ("calculus-projected", _suite_calculus_projected),
    ("calculus-r1", _suite_calculus_r1),
]


# ---------------------------------------------------------------------------
# subcommand handlers

def _cmd_build_r(cfg: RunConfig, args) -> int:
    geom = IndexGeometry(cfg.n)
    if cfg.series != "auto" and cfg.series != geom.series:
        raise UsageError("dimension %d belongs to series %s"
                         % (cfg.n, geom.series))
    R = build_R(geom)
    if cfg.spec:
        occurring = set()
        for v in R.entries.values():
            for m in list(v.num) + list(v.den):
                for i, e in enumerate(m):
                    if e:
                        occurring.add(geom.params.vars[i])
        unknown = set(cfg.spec) - set(geom.params.vars)
        if unknown:
            raise UsageError("--spec names unknown variables %s"
                             % sorted(unknown))
        missing = occurring - set(cfg.spec)
        if missing:
            raise UsageError("--spec misses variables %s" % sorted(missing))
        payload = {
            "dim": geom.dim,
            "series": geom.series,
            "spec": {k: str(v) for k, v in cfg.spec.items()},
            "entries": [{"idx": list(k), "value": str(specialize(
                R.entries[k], cfg.spec))} for k in sorted(R.entries)],
        }
    else:
        payload = tensor_to_json(R)
    text = _dumps(payload).rstrip("\n")
    _emit(cfg, text, payload)
    return 0


def _cmd_verify(cfg: RunConfig, args) -> int:
    wanted = args.suite
    reports: List[Report] = []
    for name, runner in _SUITES:
        if wanted in (name, "all"):
            reports.extend(runner(cfg))
    ok = all(rep.ok for rep in reports)
    checks = sum(len(rep.checks) for rep in reports)
    fails = sum(len(rep.failures()) for rep in reports)
    text = "\n\n".join(rep.render() for rep in reports)
    text += "\nsummary: %d checks, %d failures" % (checks, fails)
    payload = {
        "command": "verify", "suite": wanted, "n": cfg.n,
        "degree": cfg.degree, "seed": cfg.seed, "ok": ok,
        "reports": [rep.to_json() for rep in reports],
    }
    _emit(cfg, text, payload)
    return 0 if ok else 1


def _word_from_tokens(p, tokens):
    bad = [t for t in tokens if t not in p.alphabet.index]
    if bad:
        raise UsageError("unknown symbols %s; alphabet: %s"
                         % (bad, " ".join(p.alphabet.symbols)))
    return word_element(p.alphabet, p.params,
                        tuple(p.alphabet.index[t] for t in tokens))


def _cmd_reduce(cfg: RunConfig, args) -> int:
    tokens = args.word.split()
    p = build_presentation("iso", cfg.n)
    if args.algebra == "plane":
        xs = {"x%d" % a for a in range(1, cfg.n + 1)}
        if not set(tokens) <= xs:
            raise UsageError("the plane algebra only has the letters %s"
                             % " ".join(sorted(xs)))
        rs = derive_rewrite_rules(p, "plane")
    else:
        rs = iso_normal_system(p)
    e = _word_from_tokens(p, tokens)
    nf = reduce(e, rs)
    text = "%s -> %s" % (" ".join(tokens) or "I", _render_element(nf))
    payload = {"command": "reduce", "algebra": args.algebra, "n": cfg.n,
               "word": tokens, "normal_form": element_to_json(nf)}
    _emit(cfg, text, payload)
    return 0


def _cmd_pair(cfg: RunConfig, args) -> int:
    bundle = build_bundle(IndexGeometry(cfg.n + 2, embedded=True))
    tags = args.functional.split()
    if tags == ["eps"]:
        fword = EPS_WORD
    else:
        gens = []
        for t in tags:
            try:
                g = tag_gen(t)
            except ValueError as exc:
                raise UsageError(str(exc))
            if g is None:
                raise UsageError("eps can only stand alone")
            if not (1 <= g[1] <= cfg.n + 2 and 1 <= g[2] <= cfg.n + 2):
                raise UsageError("indices of %r out of range 1..%d"
                                 % (t, cfg.n + 2))
            gens.append(g)
        fword = tuple(gens)
    f = word_functional(bundle, fword)
    p = build_presentation("iso", cfg.n)
    pa = _word_from_tokens(p, args.word.split())
    val = pairing(f, pa)
    text = render_scalar(val)
    payload = {"command": "pair", "n": cfg.n, "functional": tags,
               "word": args.word.split(), "value": scalar_to_json(val)}
    _emit(cfg, text, payload)
    return 0


def _cmd_det(cfg: RunConfig, args) -> int:
    e = quantum_determinant(cfg.n)
    text = _render_element(e)
    payload = {"command": "det", "n": cfg.n,
               "element": element_to_json(e)}
    _emit(cfg, text, payload)
    return 0


def _cmd_lie(cfg: RunConfig, args) -> int:
    D = cfg.degree if cfg.degree is not None else 2
    basis = tangent_basis(args.kind, cfg.n)
    rows = lie_rows(args.kind, cfg.n, D)
    try:
        constants = [{"i": i, "j": j, "k": k,
                      "value": scalar_to_json(c)}
                     for i, j, k, c in structure_constants(basis)]
        closed = True
    except ValueError:
        constants = []
        closed = False
    ok = closed and all(row["status"] for row in rows)
    payload = {
        "command": "lie", "kind": args.kind, "n": cfg.n, "degree": D,
        "seed": cfg.seed, "labels": basis.labels, "relations": rows,
        "closed": closed, "structure_constants": constants, "ok": ok,
    }
    lines = ["tangent basis: %s" % " ".join(basis.labels)]
    for row in rows:
        lines.append("[%s] %s %r%s" % (
            "pass" if row["status"] else "fail", row["relation"],
            tuple(row["indices"]),
            " -- " + row["witness"] if "witness" in row else ""))
    lines.append("bracket closure: %s, %d nonzero structure constants"
                 % ("yes" if closed else "no", len(constants)))
    _emit(cfg, "\n".join(lines), payload)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, required=True,
                        help="dimension: the matrix size for build-r and "
                             "the rmatrix suite, the coordinate count "
                             "elsewhere (at least 3)")
    common.add_argument("--series", choices=["auto", "B", "D"],
                        default="auto",
                        help="odd/even series selector; auto derives it "
                             "from --n")
    common.add_argument("--spec", default=None,
                        help="parameter assignment k=v,... with nonzero "
                             "rational values")
    common.add_argument("--degree", type=int, default=None,
                        help="word-length bound for evaluation checks")
    common.add_argument("--seed", type=int, default=0,
                        help="seed recorded in JSON reports; the suites "
                             "themselves are deterministic (default 0)")
    common.add_argument("--jobs", type=int, default=1,
                        help="worker-pool size hint; report order does "
                             "not depend on it")
    common.add_argument("--format", choices=["text", "json"],
                        default="text", help="output format")
    common.add_argument("--out", default=None,
                        help="write the report here instead of stdout")
    common.add_argument("--dump", default=None,
                        help="additionally write the JSON payload to "
                             "this path")

    parser = argparse.ArgumentParser(
        prog="qortho",
        description="Exact constructions and checks for the "
                    "multiparametric orthogonal quantum groups.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("build-r", parents=[common],
                        help="emit the R matrix as canonical JSON")
    sp.set_defaults(handler=_cmd_build_r)

    sp = sub.add_parser("verify", parents=[common],
                        help="run a verification suite")
    sp.add_argument("--suite", required=True,
                    choices=[name for name, _ in _SUITES] + ["all"])
    sp.set_defaults(handler=_cmd_verify)

    sp = sub.add_parser("reduce", parents=[common],
                        help="normal-form a word")
    sp.add_argument("--algebra", choices=["iso", "plane"], default="iso")
    sp.add_argument("--word", required=True,
                    help="space-separated generator symbols")
    sp.set_defaults(handler=_cmd_reduce)

    sp = sub.add_parser("pair", parents=[common],
                        help="evaluate the duality bracket")
    sp.add_argument("--functional", required=True,
                    help="space-separated tags like 'L+[1,2] L-[5,5]', "
                         "or 'eps'")
    sp.add_argument("--word", required=True,
                    help="space-separated algebra symbols")
    sp.set_defaults(handler=_cmd_pair)

    sp = sub.add_parser("det", parents=[common],
                        help="print the quantum determinant")
    sp.set_defaults(handler=_cmd_det)

    sp = sub.add_parser("lie", parents=[common],
                        help="dump q-Lie relations and structure constants")
    sp.add_argument("--kind", choices=["projected", "r1"],
                    default="projected")
    sp.set_defaults(handler=_cmd_lie)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if not exc.code else 2
    try:
        cfg = RunConfig(args)
        return args.handler(cfg, args)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except SchemaError as exc:
        print("schema error: %s" % exc, file=sys.stderr)
        return 2
    except ScalarError as exc:
        print("exact arithmetic left its domain: %s" % exc, file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())
