"""Presentations of the quantum orthogonal and inhomogeneous groups.

The free algebras built here carry the matrix entries T^A_B of the
dimension-M orthogonal quantum group, the inhomogeneous generators
u, v, x^a, T^a_b obtained by projecting the dimension-(N+2) group to the
cone, the quantum-plane generators alone, and the exterior generators
dx^a.  Relations are stored as free-algebra elements, each read "= 0":

    so(M):       R^{AB}_{EF} T^E_C T^F_D - T^B_F T^A_E R^{EF}_{CD}
                 T^A_B C^{BC} T^D_C - C^{AD} I
                 T^A_B C_{AC} T^C_D - C_{BD} I
    iso(N):      the inner so(N) block of the above, plus
                 P_A{}^{ab}_{cd} x^c x^d
                 T^b_d x^a - (r/q_{d*}) R^{ab}_{ef} x^e T^f_d
                 T^b_d v - (q_{b*}/q_{d*}) v T^b_d,   x^b v - q_{b*} v x^b
                 u v - I,   v u - I
                 u x^b - q_{b*} x^b u,   u T^b_d - (q_{b*}/q_{d*}) T^b_d u
    plane(N):    P_A{}^{ab}_{cd} x^c x^d
    exterior(N): dx^a dx^b + r R^{ba}_{cd} dx^c dx^d

where q_{b*} is the deformation parameter pairing the inner index b with
the bullet cone index.  The iso(N) presentation also carries the derived
expressions

    y_b = -r^{N/2} T^a_b C_{ac} x^c u
    z   = -(r^{-N/2} + r^{N/2-2})^{-1} x^b C_{ba} x^a u

(the projections of T^o_b and T^o_*) as named elements, not generators.

Words are compared degree first, then lexicographically in the generator
order u < v < x^1 < ... < x^N < T[1,1] < T[1,2] < ... (row-major), so
normal words carry dilatations leftmost, then translations in
nondecreasing order, then matrix entries.  Rewrite rules come from
Gaussian elimination of a sector's degree-two relation span; every
sector except so-swap has a prescribed set of order-violating leading
words and derivation raises IncompleteRules if the elimination pivots
differ from it.  The so-swap system is partial by design: equality of
pure matrix-entry words is settled by bounded-degree ideal membership,
never by rewriting.
"""

from __future__ import annotations

import itertools
from typing import (Dict, Iterable, Iterator, List, Mapping, NamedTuple,
                    Optional, Sequence, Tuple)

from .itensor import IndexGeometry, MetricVec
from .report import Report
from .rmatrix import build_bundle, inner_lift
from .scalars import (ParamSpace, Scalar, canonical_q, scalar_from_json,
                      scalar_to_json)

__all__ = [
    "Alphabet", "Word", "AlgebraElement", "TensorElement", "Presentation",
    "RewriteSystem", "MembershipResult", "PresentationError",
    "IncompleteRules", "TopDegreeNotOneDimensional", "word_key",
    "build_presentation", "derive_rewrite_rules", "merge_rewrite_systems",
    "iso_normal_system", "reduce", "check_confluence", "hilbert_dimension",
    "costructure", "tensor_costructure", "project", "section",
    "ideal_membership", "expand_certificate", "check_hopf_ideal",
    "quantum_determinant", "all_words", "element_to_json",
    "element_from_json",
]

Word = Tuple[int, ...]
EMPTY: Word = ()


class PresentationError(Exception):
    pass


class IncompleteRules(PresentationError):
    pass


class TopDegreeNotOneDimensional(PresentationError):
    pass


def word_key(w: Word) -> Tuple[int, Word]:
    return (len(w), w)


class Alphabet:
    """Ordered generator symbols; position in .symbols is the sort key."""

    __slots__ = ("symbols", "index")

    def __init__(self, symbols: Sequence[str]):
        self.symbols = list(symbols)
        self.index = {s: i for i, s in enumerate(self.symbols)}
        if len(self.index) != len(self.symbols):
            raise ValueError("duplicate generator symbol")

    def word(self, *names: str) -> Word:
        return tuple(self.index[n] for n in names)

    def show_word(self, w: Word) -> str:
        if not w:
            return "I"
        return " ".join(self.symbols[i] for i in w)

    def __len__(self):
        return len(self.symbols)

    def __repr__(self):
        return "Alphabet(%d symbols)" % len(self.symbols)


def _same_alphabet(a: Alphabet, b: Alphabet) -> bool:
    return a is b or a.symbols == b.symbols


class AlgebraElement:
    """A finite Scalar combination of words in a free algebra."""

    __slots__ = ("alphabet", "ps", "terms")

    def __init__(self, alphabet: Alphabet, ps: ParamSpace,
                 terms: Mapping[Word, Scalar]):
        self.alphabet = alphabet
        self.ps = ps
        self.terms: Dict[Word, Scalar] = {w: c for w, c in terms.items() if c}

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return (isinstance(other, AlgebraElement)
                and _same_alphabet(self.alphabet, other.alphabet)
                and self.terms == other.terms)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        if not _same_alphabet(self.alphabet, other.alphabet):
            raise ValueError("elements over different alphabets")
        out = dict(self.terms)
        for w, c in other.terms.items():
            got = out.get(w)
            out[w] = c if got is None else got + c
        return AlgebraElement(self.alphabet, self.ps, out)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.alphabet, self.ps,
                              {w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-other)

    def scale(self, c: Scalar) -> "AlgebraElement":
        if not c:
            return AlgebraElement(self.alphabet, self.ps, {})
        return AlgebraElement(self.alphabet, self.ps,
                              {w: c * v for w, v in self.terms.items()})

    def __mul__(self, other) -> "AlgebraElement":
        if isinstance(other, Scalar):
            return self.scale(other)
        if not _same_alphabet(self.alphabet, other.alphabet):
            raise ValueError("elements over different alphabets")
        out: Dict[Word, Scalar] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                c = c1 * c2
                got = out.get(w)
                out[w] = c if got is None else got + c
        return AlgebraElement(self.alphabet, self.ps, out)

    def leading(self) -> Word:
        return max(self.terms, key=word_key)

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for w in sorted(self.terms, key=word_key):
            bits.append("(%r)*%s" % (self.terms[w], self.alphabet.show_word(w)))
            if len(bits) == 6 and len(self.terms) > 6:
                bits.append("... %d terms" % len(self.terms))
                break
        return " + ".join(bits)


def zero_element(alphabet: Alphabet, ps: ParamSpace) -> AlgebraElement:
    return AlgebraElement(alphabet, ps, {})


def unit_element(alphabet: Alphabet, ps: ParamSpace) -> AlgebraElement:
    return AlgebraElement(alphabet, ps, {EMPTY: ps.one})


def word_element(alphabet: Alphabet, ps: ParamSpace, w: Word,
                 coeff: Optional[Scalar] = None) -> AlgebraElement:
    return AlgebraElement(alphabet, ps, {w: ps.one if coeff is None else coeff})


def all_words(alphabet: Alphabet, degree: int,
              letters: Optional[Sequence[int]] = None) -> Iterator[Word]:
    pool = range(len(alphabet.symbols)) if letters is None else letters
    return itertools.product(pool, repeat=degree)


class TensorElement:
    """A Scalar combination of word tuples (tensor powers of the algebra)."""

    __slots__ = ("alphabet", "ps", "arity", "terms")

    def __init__(self, alphabet: Alphabet, ps: ParamSpace, arity: int,
                 terms: Mapping[Tuple[Word, ...], Scalar]):
        self.alphabet = alphabet
        self.ps = ps
        self.arity = arity
        self.terms: Dict[Tuple[Word, ...], Scalar] = {
            k: c for k, c in terms.items() if c}

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (isinstance(other, TensorElement)
                and self.arity == other.arity
                and _same_alphabet(self.alphabet, other.alphabet)
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.arity, frozenset(self.terms.items())))

    def __add__(self, other: "TensorElement") -> "TensorElement":
        if self.arity != other.arity:
            raise ValueError("tensor arities differ")
        out = dict(self.terms)
        for k, c in other.terms.items():
            got = out.get(k)
            out[k] = c if got is None else got + c
        return TensorElement(self.alphabet, self.ps, self.arity, out)

    def __neg__(self):
        return TensorElement(self.alphabet, self.ps, self.arity,
                             {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: Scalar) -> "TensorElement":
        if not c:
            return TensorElement(self.alphabet, self.ps, self.arity, {})
        return TensorElement(self.alphabet, self.ps, self.arity,
                             {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other: "TensorElement") -> "TensorElement":
        if isinstance(other, Scalar):
            return self.scale(other)
        if self.arity != other.arity:
            raise ValueError("tensor arities differ")
        out: Dict[Tuple[Word, ...], Scalar] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = tuple(w1 + w2 for w1, w2 in zip(k1, k2))
                c = c1 * c2
                got = out.get(k)
                out[k] = c if got is None else got + c
        return TensorElement(self.alphabet, self.ps, self.arity, out)

    def as_element(self) -> AlgebraElement:
        if self.arity != 1:
            raise ValueError("arity-%d tensor is not an element" % self.arity)
        return AlgebraElement(self.alphabet, self.ps,
                              {k[0]: c for k, c in self.terms.items()})

    def __repr__(self):
        return "TensorElement(arity=%d, terms=%d)" % (self.arity,
                                                      len(self.terms))


class Presentation:
    """A named free algebra with its relation list.

    kind is one of so / iso / plane / exterior.  For so the headline size
    is the matrix dimension M; for the others it is the number N of
    translation-like generators.  Embedded so presentations additionally
    know their cone labels and the 2N+1 generators of the ideal H.
    """

    __slots__ = ("kind", "name", "N", "geometry", "params", "alphabet",
                 "relations", "sectors", "derived", "h_symbols",
                 "small_geometry", "_cache")

    def __init__(self, kind, name, N, geometry, params, alphabet, relations,
                 sectors, derived, h_symbols, small_geometry):
        self.kind = kind
        self.name = name
        self.N = N
        self.geometry = geometry
        self.params = params
        self.alphabet = alphabet
        self.relations = relations
        self.sectors = sectors
        self.derived = derived
        self.h_symbols = h_symbols
        self.small_geometry = small_geometry
        self._cache: Dict = {}

    def element(self, terms: Mapping[Word, Scalar]) -> AlgebraElement:
        return AlgebraElement(self.alphabet, self.params, terms)

    def unit(self) -> AlgebraElement:
        return unit_element(self.alphabet, self.params)

    def t_symbol(self, a: int, b: int) -> str:
        if self.kind in ("so",):
            g = self.geometry
            return "T[%s,%s]" % (g.label(a), g.label(b))
        return "T[%d,%d]" % (a, b)

    def __repr__(self):
        return "Presentation(%s, %d generators, %d relations)" % (
            self.name, len(self.alphabet), len(self.relations))


_presentation_cache: Dict[Tuple[str, int, bool], Presentation] = {}


def build_presentation(kind: str, N: int, embedded: bool = False) -> Presentation:
    key = (kind, N, embedded)
    got = _presentation_cache.get(key)
    if got is None:
        if kind == "so":
            got = _build_so(N, embedded)
        elif kind == "iso":
            got = _build_iso(N)
        elif kind == "plane":
            got = _build_plane(N)
        elif kind == "exterior":
            got = _build_exterior(N)
        else:
            raise ValueError("unknown presentation kind %r" % (kind,))
        _presentation_cache[key] = got
    return got


def _accumulate(terms: Dict[Word, Scalar], w: Word, c: Scalar) -> None:
    got = terms.get(w)
    terms[w] = c if got is None else got + c


def _build_so(M: int, embedded: bool) -> Presentation:
    geom = IndexGeometry(M, embedded=embedded)
    bundle = build_bundle(geom)
    ps = geom.params
    idx = list(geom.indices())
    syms = ["T[%s,%s]" % (geom.label(A), geom.label(B))
            for A in idx for B in idx]
    alphabet = Alphabet(syms)

    def t(A: int, B: int) -> int:
        return (A - 1) * M + (B - 1)

    by_upper: Dict[Tuple[int, int], List] = {}
    by_lower: Dict[Tuple[int, int], List] = {}
    for (A, B, C, D), val in bundle.R.items():
        by_upper.setdefault((A, B), []).append(((C, D), val))
        by_lower.setdefault((C, D), []).append(((A, B), val))

    relations: List[AlgebraElement] = []
    for A in idx:
        for B in idx:
            upper = by_upper.get((A, B), ())
            for C in idx:
                for D in idx:
                    terms: Dict[Word, Scalar] = {}
                    for (E, F), val in upper:
                        _accumulate(terms, (t(E, C), t(F, D)), val)
                    for (E, F), val in by_lower.get((C, D), ()):
                        _accumulate(terms, (t(B, F), t(A, E)), -val)
                    row = AlgebraElement(alphabet, ps, terms)
                    if row:
                        relations.append(row)
    metric = bundle.C
    pr = geom.prime
    for A in idx:
        for D in idx:
            terms = {}
            for B in idx:
                _accumulate(terms, (t(A, B), t(D, pr(B))), metric.c(B))
            _accumulate(terms, EMPTY, -metric.upper(A, D))
            relations.append(AlgebraElement(alphabet, ps, terms))
    for B in idx:
        for D in idx:
            terms = {}
            for A in idx:
                _accumulate(terms, (t(A, B), t(pr(A), D)), metric.c(A))
            _accumulate(terms, EMPTY, -metric.lower(B, D))
            relations.append(AlgebraElement(alphabet, ps, terms))

    h_symbols: List[str] = []
    if embedded:
        for a in geom.inner():
            h_symbols.append(syms[t(a, geom.circ)])
        for b in geom.inner():
            h_symbols.append(syms[t(geom.bullet, b)])
        h_symbols.append(syms[t(geom.bullet, geom.circ)])

    return Presentation(
        kind="so", name="so(%d)" % M, N=M, geometry=geom, params=ps,
        alphabet=alphabet, relations=relations,
        sectors={"so-swap": list(relations)},
        derived={}, h_symbols=h_symbols, small_geometry=None)


def _build_iso(N: int) -> Presentation:
    if N < 3:
        raise ValueError("iso presentation needs N >= 3")
    big = IndexGeometry.embedded_from_inner(N)
    bps = big.params
    M = big.dim
    small = IndexGeometry(N)
    sbundle = build_bundle(small)
    lift = inner_lift(big)
    prs = small.prime

    syms = ["u", "v"] + ["x%d" % a for a in range(1, N + 1)]
    syms += ["T[%d,%d]" % (a, b)
             for a in range(1, N + 1) for b in range(1, N + 1)]
    alphabet = Alphabet(syms)
    iu, iv = 0, 1

    def x(a: int) -> int:
        return 1 + a

    def t(a: int, b: int) -> int:
        return 2 + N + (a - 1) * N + (b - 1)

    def q_bullet(a: int) -> Scalar:
        return canonical_q(bps, a + 1, M)

    Rs = {k: lift(v) for k, v in sbundle.R.items()}
    PA = {k: lift(v) for k, v in sbundle.P_A.items()}
    cs = {a: lift(sbundle.C.c(a)) for a in small.indices()}
    inner = list(range(1, N + 1))

    by_upper: Dict[Tuple[int, int], List] = {}
    by_lower: Dict[Tuple[int, int], List] = {}
    for (a, b, c, d), val in Rs.items():
        by_upper.setdefault((a, b), []).append(((c, d), val))
        by_lower.setdefault((c, d), []).append(((a, b), val))

    swap_rows: List[AlgebraElement] = []
    for a in inner:
        for b in inner:
            upper = by_upper.get((a, b), ())
            for c in inner:
                for d in inner:
                    terms: Dict[Word, Scalar] = {}
                    for (e, f), val in upper:
                        _accumulate(terms, (t(e, c), t(f, d)), val)
                    for (e, f), val in by_lower.get((c, d), ()):
                        _accumulate(terms, (t(b, f), t(a, e)), -val)
                    row = AlgebraElement(alphabet, bps, terms)
                    if row:
                        swap_rows.append(row)
    for a in inner:
        for d in inner:
            terms = {}
            for b in inner:
                _accumulate(terms, (t(a, b), t(d, prs(b))), cs[b])
            if d == prs(a):
                _accumulate(terms, EMPTY, -cs[a])
            swap_rows.append(AlgebraElement(alphabet, bps, terms))
    for b in inner:
        for d in inner:
            terms = {}
            for a in inner:
                _accumulate(terms, (t(a, b), t(prs(a), d)), cs[a])
            if d == prs(b):
                _accumulate(terms, EMPTY, -cs[b])
            swap_rows.append(AlgebraElement(alphabet, bps, terms))

    plane_rows: List[AlgebraElement] = []
    for a in inner:
        for b in inner:
            terms = {}
            for (aa, bb, c, d), val in PA.items():
                if (aa, bb) == (a, b):
                    _accumulate(terms, (x(c), x(d)), val)
            row = AlgebraElement(alphabet, bps, terms)
            if row:
                plane_rows.append(row)

    mixed_rows: List[AlgebraElement] = []
    r = bps.r
    for b in inner:
        for d in inner:
            coeff_d = r * q_bullet(d).inv()
            for a in inner:
                terms = {(t(b, d), x(a)): bps.one}
                for (e, f), val in by_upper.get((a, b), ()):
                    _accumulate(terms, (x(e), t(f, d)), -(coeff_d * val))
                mixed_rows.append(AlgebraElement(alphabet, bps, terms))
    for b in inner:
        for d in inner:
            ratio = q_bullet(b) * q_bullet(d).inv()
            mixed_rows.append(AlgebraElement(alphabet, bps, {
                (t(b, d), iv): bps.one, (iv, t(b, d)): -ratio}))
            mixed_rows.append(AlgebraElement(alphabet, bps, {
                (iu, t(b, d)): bps.one, (t(b, d), iu): -ratio}))

    dil_rows: List[AlgebraElement] = [
        AlgebraElement(alphabet, bps, {(iu, iv): bps.one, EMPTY: -bps.one}),
        AlgebraElement(alphabet, bps, {(iv, iu): bps.one, EMPTY: -bps.one}),
    ]
    for b in inner:
        qb = q_bullet(b)
        dil_rows.append(AlgebraElement(alphabet, bps, {
            (iu, x(b)): bps.one, (x(b), iu): -qb}))
        dil_rows.append(AlgebraElement(alphabet, bps, {
            (x(b), iv): bps.one, (iv, x(b)): -qb}))

    relations = swap_rows + plane_rows + mixed_rows + dil_rows
    sectors = {"plane": plane_rows, "iso-mixed": mixed_rows,
               "dilatation": dil_rows, "inner": swap_rows}

    derived: Dict[str, AlgebraElement] = {}
    minus_r_rho = -bps.s_pow(N)
    for b in inner:
        terms = {}
        for a in inner:
            terms[(t(a, b), x(prs(a)), iu)] = minus_r_rho * cs[a]
        derived["y%d" % b] = AlgebraElement(alphabet, bps, terms)
    zc = -(bps.s_pow(-N) + bps.s_pow(N - 4)).inv()
    terms = {}
    for b in inner:
        terms[(x(b), x(prs(b)), iu)] = zc * cs[b]
    derived["z"] = AlgebraElement(alphabet, bps, terms)

    return Presentation(
        kind="iso", name="iso(%d)" % N, N=N, geometry=big, params=bps,
        alphabet=alphabet, relations=relations, sectors=sectors,
        derived=derived, h_symbols=[], small_geometry=small)


def _build_plane(N: int) -> Presentation:
    geom = IndexGeometry(N)
    bundle = build_bundle(geom)
    ps = geom.params
    alphabet = Alphabet(["x%d" % a for a in range(1, N + 1)])
    rows: List[AlgebraElement] = []
    for a in geom.indices():
        for b in geom.indices():
            terms: Dict[Word, Scalar] = {}
            for (aa, bb, c, d), val in bundle.P_A.items():
                if (aa, bb) == (a, b):
                    _accumulate(terms, (c - 1, d - 1), val)
            row = AlgebraElement(alphabet, ps, terms)
            if row:
                rows.append(row)
    return Presentation(
        kind="plane", name="plane(%d)" % N, N=N, geometry=geom, params=ps,
        alphabet=alphabet, relations=rows, sectors={"plane": list(rows)},
        derived={}, h_symbols=[], small_geometry=None)


def _build_exterior(N: int) -> Presentation:
    geom = IndexGeometry(N)
    bundle = build_bundle(geom)
    ps = geom.params
    alphabet = Alphabet(["dx%d" % a for a in range(1, N + 1)])
    rows: List[AlgebraElement] = []
    r = ps.r
    for a in geom.indices():
        for b in geom.indices():
            terms: Dict[Word, Scalar] = {(a - 1, b - 1): ps.one}
            for (ba, ab, c, d), val in bundle.R.items():
                if (ba, ab) == (b, a):
                    _accumulate(terms, (c - 1, d - 1), r * val)
            row = AlgebraElement(alphabet, ps, terms)
            if row:
                rows.append(row)
    return Presentation(
        kind="exterior", name="exterior(%d)" % N, N=N, geometry=geom,
        params=ps, alphabet=alphabet, relations=rows,
        sectors={"exterior": list(rows)}, derived={}, h_symbols=[],
        small_geometry=None)


# --- rewrite systems --------------------------------------------------------

class RewriteSystem:
    __slots__ = ("alphabet", "ps", "rules", "order", "sector", "partial",
                 "letters", "_nf")

    def __init__(self, alphabet: Alphabet, ps: ParamSpace,
                 rules: Dict[Word, AlgebraElement], sector: str,
                 partial: bool):
        self.alphabet = alphabet
        self.ps = ps
        self.rules = rules
        self.order = "deglex"
        self.sector = sector
        self.partial = partial
        seen = set()
        for lw, rhs in rules.items():
            seen.update(lw)
            for w in rhs.terms:
                seen.update(w)
        self.letters = tuple(sorted(seen))
        self._nf: Dict[Word, AlgebraElement] = {}

    def __repr__(self):
        flavor = "partial " if self.partial else ""
        return "RewriteSystem(%s, %s%d rules)" % (self.sector, flavor,
                                                  len(self.rules))


_SECTOR_KINDS = {
    "plane": ("iso", "plane"),
    "dilatation": ("iso",),
    "iso-mixed": ("iso",),
    "exterior": ("exterior",),
    "so-swap": ("so",),
}


def _stair_insert(stair: Dict[Word, AlgebraElement], row: AlgebraElement) -> None:
    while row:
        lw = row.leading()
        pivot = stair.get(lw)
        if pivot is None:
            stair[lw] = row.scale(row.terms[lw].inv())
            return
        row = row - pivot.scale(row.terms[lw])


def _expected_leading(p: Presentation, sector: str) -> Optional[set]:
    A = p.alphabet
    if sector == "plane":
        xs = [A.index["x%d" % a] for a in range(1, p.N + 1)]
        return {(xs[b], xs[a]) for b in range(p.N) for a in range(b)}
    if sector == "dilatation":
        iu, iv = A.index["u"], A.index["v"]
        xs = [A.index["x%d" % a] for a in range(1, p.N + 1)]
        out = {(iu, iv), (iv, iu)}
        out.update((xa, iu) for xa in xs)
        out.update((xa, iv) for xa in xs)
        return out
    if sector == "iso-mixed":
        iu, iv = A.index["u"], A.index["v"]
        xs = [A.index["x%d" % a] for a in range(1, p.N + 1)]
        ts = [A.index["T[%d,%d]" % (a, b)]
              for a in range(1, p.N + 1) for b in range(1, p.N + 1)]
        out = set()
        out.update((tt, xa) for tt in ts for xa in xs)
        out.update((tt, iu) for tt in ts)
        out.update((tt, iv) for tt in ts)
        return out
    if sector == "exterior":
        dxs = [A.index["dx%d" % a] for a in range(1, p.N + 1)]
        return {(dxs[b], dxs[a]) for b in range(p.N) for a in range(b + 1)}
    return None


def derive_rewrite_rules(p: Presentation, sector: str,
                         order: str = "deglex") -> RewriteSystem:
    if order != "deglex":
        raise ValueError("unsupported term order %r" % (order,))
    kinds = _SECTOR_KINDS.get(sector)
    if kinds is None:
        raise ValueError("unknown sector %r" % (sector,))
    if p.kind not in kinds:
        raise ValueError("sector %s does not apply to %s" % (sector, p.name))
    rows = p.sectors.get(sector, [])
    stair: Dict[Word, AlgebraElement] = {}
    for row in sorted(rows, key=lambda e: word_key(e.leading())):
        _stair_insert(stair, row)
    partial = sector == "so-swap"
    expected = _expected_leading(p, sector)
    if expected is not None:
        got = set(stair)
        if got != expected:
            show = p.alphabet.show_word
            missing = sorted(expected - got, key=word_key)
            extra = sorted(got - expected, key=word_key)
            raise IncompleteRules(
                "%s sector of %s: missing rules for [%s], unexpected pivots "
                "at [%s]" % (sector, p.name,
                             ", ".join(show(w) for w in missing),
                             ", ".join(show(w) for w in extra)))
    rules: Dict[Word, AlgebraElement] = {}
    for lw, row in stair.items():
        tail = {w: -c for w, c in row.terms.items() if w != lw}
        rules[lw] = AlgebraElement(p.alphabet, p.params, tail)
    rs = RewriteSystem(p.alphabet, p.params, rules, sector, partial)
    reduced = {lw: reduce(rhs, rs) for lw, rhs in rules.items()}
    return RewriteSystem(p.alphabet, p.params, reduced, sector, partial)


def merge_rewrite_systems(*systems: RewriteSystem) -> RewriteSystem:
    if not systems:
        raise ValueError("nothing to merge")
    first = systems[0]
    rules: Dict[Word, AlgebraElement] = {}
    partial = False
    for rs in systems:
        if not _same_alphabet(rs.alphabet, first.alphabet):
            raise ValueError("rewrite systems over different alphabets")
        for lw, rhs in rs.rules.items():
            if lw in rules and rules[lw] != rhs:
                raise ValueError("conflicting rules for %s"
                                 % first.alphabet.show_word(lw))
            rules[lw] = rhs
        partial = partial or rs.partial
    sector = "+".join(rs.sector for rs in systems)
    return RewriteSystem(first.alphabet, first.ps, rules, sector, partial)


def iso_normal_system(p: Presentation) -> RewriteSystem:
    """The combined x/u/v normal-form rules of an iso presentation."""
    if p.kind != "iso":
        raise ValueError("iso_normal_system needs an iso presentation")
    got = p._cache.get("normal")
    if got is None:
        got = merge_rewrite_systems(
            derive_rewrite_rules(p, "plane"),
            derive_rewrite_rules(p, "dilatation"),
            derive_rewrite_rules(p, "iso-mixed"))
        p._cache["normal"] = got
    return got


def _normal_form(rs: RewriteSystem, w: Word) -> AlgebraElement:
    got = rs._nf.get(w)
    if got is not None:
        return got
    hit = None
    for i in range(len(w) - 1):
        rhs = rs.rules.get(w[i:i + 2])
        if rhs is not None:
            hit = (i, rhs)
            break
    if hit is None:
        out = AlgebraElement(rs.alphabet, rs.ps, {w: rs.ps.one})
    else:
        i, rhs = hit
        acc: Dict[Word, Scalar] = {}
        for w2, c2 in rhs.terms.items():
            sub = _normal_form(rs, w[:i] + w2 + w[i + 2:])
            for w3, c3 in sub.terms.items():
                _accumulate(acc, w3, c2 * c3)
        out = AlgebraElement(rs.alphabet, rs.ps, acc)
    rs._nf[w] = out
    return out


def reduce(e: AlgebraElement, rs: RewriteSystem) -> AlgebraElement:
    acc: Dict[Word, Scalar] = {}
    for w, c in e.terms.items():
        for w2, c2 in _normal_form(rs, w).terms.items():
            _accumulate(acc, w2, c * c2)
    return AlgebraElement(e.alphabet, e.ps, acc)


def check_confluence(rs: RewriteSystem, p: Presentation) -> Report:
    rep = Report("confluence of %s rules for %s" % (rs.sector, p.name))
    ordered = all(
        word_key(w) < word_key(lw)
        for lw, rhs in rs.rules.items() for w in rhs.terms)
    rep.add("every rule right side precedes its leading word", ordered)
    lead_lengths = {len(lw) for lw in rs.rules}
    rep.add("all leading words have degree 2", lead_lengths <= {2})
    examined = 0
    bad: List[Word] = []
    for w in all_words(rs.alphabet, 3, rs.letters):
        spots = [i for i in (0, 1) if w[i:i + 2] in rs.rules]
        if len(spots) < 2:
            continue
        examined += 1
        results = []
        for i in spots:
            rhs = rs.rules[w[i:i + 2]]
            stepped: Dict[Word, Scalar] = {}
            for w2, c2 in rhs.terms.items():
                _accumulate(stepped, w[:i] + w2 + w[i + 2:], c2)
            results.append(reduce(
                AlgebraElement(rs.alphabet, rs.ps, stepped), rs))
        if any(res != results[0] for res in results[1:]):
            bad.append(w)
    detail = "%d overlapping words examined" % examined
    if bad:
        detail += "; first failures: " + ", ".join(
            rs.alphabet.show_word(w) for w in bad[:4])
    rep.add("all degree-3 overlaps rejoin", not bad, detail)
    return rep


def hilbert_dimension(p: Presentation, rs: RewriteSystem, d: int,
                      letters: Optional[Sequence[str]] = None) -> int:
    if d < 0:
        raise ValueError("negative degree")
    if d == 0:
        return 1
    if letters is None:
        pool = list(rs.letters)
    else:
        pool = sorted(p.alphabet.index[s] for s in letters)
    if any(len(lw) != 2 for lw in rs.rules):
        raise ValueError("hilbert counting needs degree-2 leading words")
    vec = {g: 1 for g in pool}
    for _ in range(d - 1):
        vec = {g: sum(n for h, n in vec.items() if (g, h) not in rs.rules)
               for g in pool}
    return sum(vec.values())


# --- costructures -----------------------------------------------------------

def _so_letter_costructure(p: Presentation) -> Dict[str, list]:
    got = p._cache.get("costructure")
    if got is not None:
        return got
    geom = p.geometry
    ps = p.params
    M = geom.dim
    metric = build_bundle(geom).C
    pr = geom.prime
    cop: List[TensorElement] = []
    cou: List[Scalar] = []
    anti: List[AlgebraElement] = []
    for A in geom.indices():
        for B in geom.indices():
            terms = {(((A - 1) * M + (C - 1),), ((C - 1) * M + (B - 1),)):
                     ps.one for C in geom.indices()}
            cop.append(TensorElement(p.alphabet, ps, 2, terms))
            cou.append(ps.one if A == B else ps.zero)
            coeff = metric.c(A) * metric.c(pr(B))
            anti.append(AlgebraElement(p.alphabet, ps, {
                ((pr(B) - 1) * M + (pr(A) - 1),): coeff}))
    got = {"coproduct": cop, "counit": cou, "antipode": anti}
    p._cache["costructure"] = got
    return got


def _iso_letter_costructure(p: Presentation) -> Dict[str, list]:
    got = p._cache.get("costructure")
    if got is not None:
        return got
    big = build_presentation("so", p.N + 2, embedded=True)
    tables = _so_letter_costructure(big)
    lifted = _section_letters(p, big)
    proj = _projection_letters(p, big)
    cop: List[TensorElement] = []
    cou: List[Scalar] = []
    anti: List[AlgebraElement] = []
    for g in range(len(p.alphabet.symbols)):
        G = lifted[g]
        cou.append(tables["counit"][G])
        big_cop = tables["coproduct"][G]
        acc = TensorElement(p.alphabet, p.params, 2, {})
        for (wl, wr), c in big_cop.terms.items():
            left = _project_word(wl, proj, p)
            right = _project_word(wr, proj, p)
            if not left or not right:
                continue
            for w1, c1 in left.terms.items():
                for w2, c2 in right.terms.items():
                    acc = acc + TensorElement(
                        p.alphabet, p.params, 2, {(w1, w2): c * c1 * c2})
        cop.append(acc)
        big_anti = tables["antipode"][G]
        out = zero_element(p.alphabet, p.params)
        for w, c in big_anti.terms.items():
            out = out + _project_word(w, proj, p).scale(c)
        anti.append(out)
    got = {"coproduct": cop, "counit": cou, "antipode": anti}
    p._cache["costructure"] = got
    return got


def _letter_costructure(p: Presentation) -> Dict[str, list]:
    if p.kind == "so":
        return _so_letter_costructure(p)
    if p.kind == "iso":
        return _iso_letter_costructure(p)
    raise ValueError("no costructure on %s" % p.name)


def costructure(op: str, e: AlgebraElement, p: Presentation):
    """Apply a costructure map to a free-algebra element.

    coproduct returns an arity-2 TensorElement; counit and antipode
    return AlgebraElements (the counit lands on the identity word).
    The coproduct and counit extend multiplicatively, the antipode
    antimultiplicatively.
    """
    tables = _letter_costructure(p)
    ps = p.params
    if op == "coproduct":
        table = tables["coproduct"]
        acc: Dict[Tuple[Word, Word], Scalar] = {}
        for w, c in e.terms.items():
            prod = TensorElement(p.alphabet, ps, 2, {(EMPTY, EMPTY): ps.one})
            for g in w:
                prod = prod * table[g]
            for k, ck in prod.terms.items():
                _accumulate(acc, k, c * ck)
        return TensorElement(p.alphabet, ps, 2, acc)
    if op == "counit":
        table = tables["counit"]
        total = ps.zero
        for w, c in e.terms.items():
            val = c
            for g in w:
                val = val * table[g]
            total = total + val
        return AlgebraElement(p.alphabet, ps, {EMPTY: total})
    if op == "antipode":
        table = tables["antipode"]
        out: Dict[Word, Scalar] = {}
        for w, c in e.terms.items():
            prod = unit_element(p.alphabet, ps)
            for g in reversed(w):
                prod = prod * table[g]
            for w2, c2 in prod.terms.items():
                _accumulate(out, w2, c * c2)
        return AlgebraElement(p.alphabet, ps, out)
    raise ValueError("unknown costructure %r" % (op,))


def tensor_costructure(te: TensorElement, pos: int, op: str,
                       p: Presentation) -> TensorElement:
    """Apply a costructure map to one tensor factor.

    coproduct raises the arity by one, counit lowers it by one (the
    scalar folds into the coefficient), antipode keeps it."""
    if not 0 <= pos < te.arity:
        raise ValueError("factor position out of range")
    ps = te.ps
    if op == "coproduct":
        out_arity = te.arity + 1
    elif op == "counit":
        out_arity = te.arity - 1
    else:
        out_arity = te.arity
    acc: Dict[Tuple[Word, ...], Scalar] = {}
    for key, c in te.terms.items():
        factor = AlgebraElement(te.alphabet, ps, {key[pos]: ps.one})
        image = costructure(op, factor, p)
        if op == "coproduct":
            for (wl, wr), ci in image.terms.items():
                k = key[:pos] + (wl, wr) + key[pos + 1:]
                _accumulate(acc, k, c * ci)
        elif op == "counit":
            ci = image.terms.get(EMPTY, ps.zero)
            k = key[:pos] + key[pos + 1:]
            _accumulate(acc, k, c * ci)
        else:
            for w, ci in image.terms.items():
                k = key[:pos] + (w,) + key[pos + 1:]
                _accumulate(acc, k, c * ci)
    return TensorElement(te.alphabet, ps, out_arity, acc)


# --- the cone projection ----------------------------------------------------

def _section_letters(p: Presentation, big: Presentation) -> List[int]:
    """iso letter id -> embedded so letter id (the linear section of P)."""
    got = p._cache.get("section")
    if got is not None:
        return got
    geom = big.geometry
    M = geom.dim
    out: List[int] = []
    for sym in p.alphabet.symbols:
        if sym == "u":
            A, B = geom.circ, geom.circ
        elif sym == "v":
            A, B = geom.bullet, geom.bullet
        elif sym.startswith("x"):
            A, B = int(sym[1:]) + 1, geom.bullet
        else:
            a, b = sym[2:-1].split(",")
            A, B = int(a) + 1, int(b) + 1
        out.append((A - 1) * M + (B - 1))
    p._cache["section"] = out
    return out


def _projection_letters(p: Presentation, big: Presentation) -> List[AlgebraElement]:
    """embedded so letter id -> its image under P as an iso element."""
    got = p._cache.get("projection")
    if got is not None:
        return got
    geom = big.geometry
    M = geom.dim
    zero = zero_element(p.alphabet, p.params)
    out: List[AlgebraElement] = []
    for A in geom.indices():
        for B in geom.indices():
            a_inner = 2 <= A <= M - 1
            b_inner = 2 <= B <= M - 1
            if A == geom.circ:
                if B == geom.circ:
                    img = p.element({(p.alphabet.index["u"],): p.params.one})
                elif B == geom.bullet:
                    img = p.derived["z"]
                else:
                    img = p.derived["y%d" % (B - 1)]
            elif A == geom.bullet:
                img = (p.element({(p.alphabet.index["v"],): p.params.one})
                       if B == geom.bullet else zero)
            elif a_inner and B == geom.circ:
                img = zero
            elif a_inner and B == geom.bullet:
                img = p.element({(p.alphabet.index["x%d" % (A - 1)],):
                                 p.params.one})
            else:
                img = p.element({(p.alphabet.index["T[%d,%d]" % (A - 1, B - 1)],):
                                 p.params.one})
            out.append(img)
    p._cache["projection"] = out
    return out


def _project_word(w: Word, proj: List[AlgebraElement],
                  p: Presentation) -> AlgebraElement:
    out = unit_element(p.alphabet, p.params)
    for g in w:
        img = proj[g]
        if not img:
            return zero_element(p.alphabet, p.params)
        out = out * img
    return out


def project(e: AlgebraElement, target: Presentation) -> AlgebraElement:
    """Push an embedded so(N+2) element down to the iso(N) quotient."""
    if target.kind != "iso":
        raise ValueError("projection target must be an iso presentation")
    big = build_presentation("so", target.N + 2, embedded=True)
    if not _same_alphabet(e.alphabet, big.alphabet):
        raise ValueError("element is not over the embedded so alphabet")
    proj = _projection_letters(target, big)
    out = zero_element(target.alphabet, target.params)
    for w, c in e.terms.items():
        out = out + _project_word(w, proj, target).scale(c)
    return out


def section(e: AlgebraElement, source: Presentation) -> AlgebraElement:
    """The linear splitting of P: iso words back into embedded so words."""
    if source.kind != "iso":
        raise ValueError("section source must be an iso presentation")
    big = build_presentation("so", source.N + 2, embedded=True)
    if not _same_alphabet(e.alphabet, source.alphabet):
        raise ValueError("element is not over the iso alphabet")
    lifted = _section_letters(source, big)
    return AlgebraElement(
        big.alphabet, big.params,
        {tuple(lifted[g] for g in w): c for w, c in e.terms.items()})


def check_hopf_ideal(N: int) -> Report:
    """The ideal H killing the cone: coideal, counit and antipode checks
    on all 2N+1 generators of the embedded so(N+2) presentation."""
    p = build_presentation("so", N + 2, embedded=True)
    rep = Report("H is a Hopf ideal inside %s" % p.name)
    hset = {p.alphabet.index[s] for s in p.h_symbols}
    rep.add("H has 2N+1 generators", len(p.h_symbols) == 2 * N + 1,
            ", ".join(p.h_symbols))
    for sym in p.h_symbols:
        g = p.alphabet.index[sym]
        h = p.element({(g,): p.params.one})
        cop = costructure("coproduct", h, p)
        sides = []
        stray = []
        for (wl, wr), _c in cop.terms.items():
            left = wl and wl[0] in hset
            right = wr and wr[0] in hset
            label = "%s (x) %s" % (p.alphabet.show_word(wl),
                                   p.alphabet.show_word(wr))
            if left or right:
                sides.append("%s [%s]" % (label, "left" if left else "right"))
            else:
                stray.append(label)
        rep.add("coproduct of %s splits through H" % sym, not stray,
                "; ".join(sides) if not stray else
                "terms outside H: " + "; ".join(stray))
        eps = costructure("counit", h, p)
        rep.add("counit kills %s" % sym, not eps)
        kap = costructure("antipode", h, p)
        in_h = bool(kap.terms) and all(
            len(w) == 1 and w[0] in hset for w in kap.terms)
        rep.add("antipode keeps %s inside H" % sym, in_h,
                ", ".join("%s -> %s" % (sym, p.alphabet.show_word(w))
                          for w in kap.terms))
    return rep


# --- bounded-degree ideal membership ----------------------------------------

class MembershipResult(NamedTuple):
    member: bool
    residue: AlgebraElement
    certificate: Optional[List[Tuple[Scalar, int, Word, Word]]]


def _row_terms(rel: AlgebraElement, w1: Word, w2: Word) -> Dict[Word, Scalar]:
    return {w1 + w + w2: c for w, c in rel.terms.items()}


def _membership_staircase(p: Presentation, bound: int,
                          extra: Tuple[AlgebraElement, ...], track: bool):
    key = ("membership", bound, extra, track)
    got = p._cache.get(key)
    if got is not None:
        return got
    rels = list(p.relations) + list(extra)
    nlet = len(p.alphabet.symbols)
    rows: List[Tuple[Dict[Word, Scalar], Optional[Dict]]] = []
    for ridx, rel in enumerate(rels):
        if not rel:
            continue
        free = bound - rel.degree()
        if free < 0:
            continue
        for l1 in range(free + 1):
            for w1 in itertools.product(range(nlet), repeat=l1):
                for l2 in range(free - l1 + 1):
                    for w2 in itertools.product(range(nlet), repeat=l2):
                        row = _row_terms(rel, w1, w2)
                        combo = {(ridx, w1, w2): p.params.one} if track else None
                        rows.append((row, combo))
    # sparse rows first: single-word rows only normalize and make every
    # later reduction against their pivot a plain deletion
    rows.sort(key=lambda rc: (len(rc[0]), word_key(max(rc[0], key=word_key))))
    stair: Dict[Word, Tuple[Dict[Word, Scalar], Optional[Dict]]] = {}
    for row, combo in rows:
        _membership_insert(stair, row, combo)
    got = (rels, stair)
    p._cache[key] = got
    return got


def _membership_insert(stair, row: Dict[Word, Scalar],
                       combo: Optional[Dict]) -> None:
    while row:
        lw = max(row, key=word_key)
        hit = stair.get(lw)
        if hit is None:
            inv = row[lw].inv()
            row = {w: c * inv for w, c in row.items()}
            if combo is not None:
                combo = {k: c * inv for k, c in combo.items()}
            stair[lw] = (row, combo)
            return
        prow, pcombo = hit
        c = row.pop(lw)
        for w, v in prow.items():
            if w == lw:
                continue
            nv = row.get(w)
            nv = -c * v if nv is None else nv - c * v
            if nv:
                row[w] = nv
            elif w in row:
                del row[w]
        if combo is not None and pcombo is not None:
            for k, v in pcombo.items():
                nv = combo.get(k)
                nv = -c * v if nv is None else nv - c * v
                if nv:
                    combo[k] = nv
                elif k in combo:
                    del combo[k]


def ideal_membership(e: AlgebraElement, p: Presentation, bound: int = 3,
                     extra: Sequence[AlgebraElement] = (),
                     want_certificate: bool = True) -> MembershipResult:
    """Decide whether e lies in the two-sided ideal span at the given
    total degree bound.  A negative answer means only that no witness
    exists within the bound."""
    if e.degree() > bound:
        raise ValueError("element degree %d exceeds bound %d"
                         % (e.degree(), bound))
    extra_key = tuple(extra)
    rels, stair = _membership_staircase(p, bound, extra_key,
                                        want_certificate)
    res = dict(e.terms)
    combo: Dict = {}
    while res:
        cut = None
        for w in sorted(res, key=word_key, reverse=True):
            if w in stair:
                cut = w
                break
        if cut is None:
            break
        prow, pcombo = stair[cut]
        c = res.pop(cut)
        for w, v in prow.items():
            if w == cut:
                continue
            nv = res.get(w)
            nv = -c * v if nv is None else nv - c * v
            if nv:
                res[w] = nv
            elif w in res:
                del res[w]
        if want_certificate and pcombo is not None:
            for k, v in pcombo.items():
                nv = combo.get(k)
                nv = c * v if nv is None else nv + c * v
                if nv:
                    combo[k] = nv
                elif k in combo:
                    del combo[k]
    member = not res
    certificate = None
    if member and want_certificate:
        certificate = [(c, ridx, w1, w2)
                       for (ridx, w1, w2), c in sorted(
                           combo.items(),
                           key=lambda kv: (kv[0][0], kv[0][1], kv[0][2]))]
    return MembershipResult(member,
                            AlgebraElement(e.alphabet, e.ps, res),
                            certificate)


def expand_certificate(cert: Sequence[Tuple[Scalar, int, Word, Word]],
                       p: Presentation,
                       extra: Sequence[AlgebraElement] = ()) -> AlgebraElement:
    """Rebuild the combination named by a membership certificate."""
    rels = list(p.relations) + list(extra)
    acc: Dict[Word, Scalar] = {}
    for c, ridx, w1, w2 in cert:
        for w, v in _row_terms(rels[ridx], w1, w2).items():
            _accumulate(acc, w, c * v)
    return AlgebraElement(p.alphabet, p.params, acc)


# --- the quantum determinant ------------------------------------------------

def quantum_determinant(N: int) -> AlgebraElement:
    """The coefficient of the volume form in the coaction on dx^1...dx^N,
    as an element of the so(N) presentation."""
    ext = build_presentation("exterior", N)
    rs = derive_rewrite_rules(ext, "exterior")
    top = hilbert_dimension(ext, rs, N)
    if top != 1:
        raise TopDegreeNotOneDimensional(
            "exterior(%d) degree-%d component has dimension %d" % (N, N, top))
    vol: Word = tuple(range(N))
    sop = build_presentation("so", N)
    ps = sop.params
    acc: Dict[Word, Scalar] = {}
    for bs in itertools.product(range(N), repeat=N):
        nf = reduce(word_element(ext.alphabet, ext.params, bs), rs)
        if not nf:
            continue
        stray = [w for w in nf.terms if w != vol]
        if stray:
            raise TopDegreeNotOneDimensional(
                "normal form of %s leaves the volume line: %s"
                % (ext.alphabet.show_word(bs),
                   ext.alphabet.show_word(stray[0])))
        tword = tuple(a * N + bs[a] for a in range(N))
        _accumulate(acc, tword, nf.terms[vol])
    return AlgebraElement(sop.alphabet, ps, acc)


# --- serialization ----------------------------------------------------------

def element_to_json(e: AlgebraElement) -> list:
    out = []
    for w in sorted(e.terms, key=word_key):
        out.append({"word": [e.alphabet.symbols[g] for g in w],
                    "coeff": scalar_to_json(e.terms[w])})
    return out


def element_from_json(alphabet: Alphabet, ps: ParamSpace,
                      payload: Iterable[Mapping]) -> AlgebraElement:
    terms: Dict[Word, Scalar] = {}
    for rec in payload:
        w = tuple(alphabet.index[s] for s in rec["word"])
        c = scalar_from_json(ps, rec["coeff"])
        got = terms.get(w)
        terms[w] = c if got is None else got + c
    return AlgebraElement(alphabet, ps, terms)
