"""Index geometry and sparse rank-4 tensors over the exact scalar field.

Indices run 1..M externally, following the convention that primes the index
as a' = M+1-a and puts the rho weight vector at

    rho = (M/2 - 1, ..., 1/2, 0, -1/2, ..., -M/2 + 1)      (M odd)
    rho = (M/2 - 1, ..., 1, 0, 0, -1, ..., -M/2 + 1)       (M even)

stored as integer doubles so that r^{rho_a} = s^{rho2_a} needs no square
roots.  An embedded geometry of dimension N+2 labels its extremes as the
cone coordinates (circ, bullet): index 1 prints as "o", index N+2 prints
as "*", and the inner block 2..N+1 prints as 1..N, matching the split of
an index A into (o, a, *).

A rank-4 tensor X^{ab}_{cd} is a dict keyed by (a, b, c, d) with Scalar
values and no stored zeros; composition contracts the lower pair of the
left factor against the upper pair of the right factor.  Rank-6 objects
(for the Yang-Baxter check) are never densified: they stay dicts keyed by
6-tuples and are built by chaining sparse factor actions.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Tuple

from .scalars import (ParamSpace, Scalar, canonical_q, mono_inv, _canon)

Key4 = Tuple[int, int, int, int]


class GeometryMismatch(Exception):
    pass


class IndexGeometry:
    def __init__(self, dim: int, embedded: bool = False):
        if dim < 3:
            raise ValueError("index geometry needs dim >= 3")
        self.dim = dim
        self.embedded = embedded
        self.params = ParamSpace(dim)
        self.series = self.params.series
        self.n2 = (dim + 1) // 2 if self.series == "B" else None
        self.rho2 = [0] * (dim + 1)  # 1-based; rho2[a] = 2*rho_a
        for a in range(1, dim + 1):
            if 2 * a < dim:
                self.rho2[a] = dim - 2 * a
            elif 2 * a == dim or 2 * a == dim + 1 or 2 * a == dim + 2:
                self.rho2[a] = 0
            else:
                self.rho2[a] = dim + 2 - 2 * a
        if embedded:
            inner = [str(k) for k in range(1, dim - 1)]
            self.labels = ["∘"] + inner + ["•"]  # o ... *
            self.circ = 1
            self.bullet = dim
        else:
            self.labels = [str(k) for k in range(1, dim + 1)]
            self.circ = None
            self.bullet = None

    @classmethod
    def embedded_from_inner(cls, N: int) -> "IndexGeometry":
        return cls(N + 2, embedded=True)

    def prime(self, a: int) -> int:
        return self.dim + 1 - a

    def label(self, a: int) -> str:
        return self.labels[a - 1]

    def indices(self) -> range:
        return range(1, self.dim + 1)

    def inner(self) -> range:
        """The inner block of an embedded geometry, as 1-based indices."""
        if not self.embedded:
            raise ValueError("not an embedded geometry")
        return range(2, self.dim)

    def r_rho(self, a: int) -> Scalar:
        return self.params.s_pow(self.rho2[a])

    def q(self, a: int, b: int) -> Scalar:
        return canonical_q(self.params, a, b)

    def same(self, other: "IndexGeometry") -> bool:
        return self.dim == other.dim and self.embedded == other.embedded

    def __repr__(self):
        kind = "embedded " if self.embedded else ""
        return "IndexGeometry(%sdim=%d, series=%s)" % (kind, self.dim, self.series)


class SparseTensor4:
    __slots__ = ("geometry", "entries")

    def __init__(self, geometry: IndexGeometry, entries: Dict[Key4, Scalar]):
        self.geometry = geometry
        self.entries = {k: v for k, v in entries.items() if v}

    def get(self, key: Key4) -> Scalar:
        return self.entries.get(key, self.geometry.params.zero)

    def __len__(self):
        return len(self.entries)

    def items(self):
        return self.entries.items()

    def __repr__(self):
        return "SparseTensor4(dim=%d, nnz=%d)" % (self.geometry.dim,
                                                  len(self.entries))


def identity_tensor(geometry: IndexGeometry) -> SparseTensor4:
    one = geometry.params.one
    ent = {(a, b, a, b): one
           for a in geometry.indices() for b in geometry.indices()}
    return SparseTensor4(geometry, ent)


def tensor_scale(X: SparseTensor4, c: Scalar) -> SparseTensor4:
    return SparseTensor4(X.geometry, {k: c * v for k, v in X.items()})


def tensor_add(X: SparseTensor4, Y: SparseTensor4) -> SparseTensor4:
    if not X.geometry.same(Y.geometry):
        raise GeometryMismatch("%r vs %r" % (X.geometry, Y.geometry))
    ent = dict(X.entries)
    for k, v in Y.items():
        w = ent.get(k)
        v = v if w is None else w + v
        if v:
            ent[k] = v
        elif k in ent:
            del ent[k]
    return SparseTensor4(X.geometry, ent)


def tensor_sub(X: SparseTensor4, Y: SparseTensor4) -> SparseTensor4:
    minus_one = Y.geometry.params.from_rational(-1)
    return tensor_add(X, tensor_scale(Y, minus_one))


def tensor_compose(X: SparseTensor4, Y: SparseTensor4) -> SparseTensor4:
    """(X.Y)^{ab}_{cd} = sum_ef X^{ab}_{ef} Y^{ef}_{cd}."""
    if not X.geometry.same(Y.geometry):
        raise GeometryMismatch("%r vs %r" % (X.geometry, Y.geometry))
    by_upper: Dict[Tuple[int, int], List[Tuple[int, int, Scalar]]] = {}
    for (e, f, c, d), v in Y.items():
        by_upper.setdefault((e, f), []).append((c, d, v))
    out: Dict[Key4, Scalar] = {}
    for (a, b, e, f), xv in X.items():
        for c, d, yv in by_upper.get((e, f), ()):
            k = (a, b, c, d)
            w = out.get(k)
            v = xv * yv if w is None else w + xv * yv
            if v:
                out[k] = v
            elif k in out:
                del out[k]
    return SparseTensor4(X.geometry, out)


def _lift_positions(pos: int) -> Tuple[int, int]:
    # which two of the three tensor slots the factor acts on
    try:
        return {12: (0, 1), 23: (1, 2), 13: (0, 2)}[pos]
    except KeyError:
        raise ValueError("position must be one of 12, 23, 13; got %r" % (pos,))


def triple_compose(factors: Iterable[Tuple[SparseTensor4, int]]):
    """Product of operators lifted to V x V x V, as a sparse rank-6 dict.

    Each factor (X, pos) acts on the tensor slots named by pos, identity on
    the third; position 13 is realized by the same chaining as 12 and 23,
    skipping the middle slot in the index bookkeeping.  Returns a dict
    keyed by (a,b,c,d,e,f) for the entry X^{abc}_{def}.
    """
    factors = list(factors)
    if not factors:
        raise ValueError("need at least one factor")
    geom = factors[0][0].geometry
    cur: Optional[Dict[Tuple[int, ...], Scalar]] = None
    for X, pos in factors:
        if not X.geometry.same(geom):
            raise GeometryMismatch("%r vs %r" % (X.geometry, geom))
        i, j = _lift_positions(pos)
        by_upper: Dict[Tuple[int, int], List[Tuple[int, int, Scalar]]] = {}
        for (a, b, c, d), v in X.items():
            by_upper.setdefault((a, b), []).append((c, d, v))
        if cur is None:
            cur = {}
            rng = list(geom.indices())
            for (a, b), lows in by_upper.items():
                for c, d, v in lows:
                    for free in rng:
                        up = [free, free, free]
                        lo = [free, free, free]
                        up[i], up[j] = a, b
                        lo[i], lo[j] = c, d
                        cur[tuple(up) + tuple(lo)] = v
            continue
        nxt: Dict[Tuple[int, ...], Scalar] = {}
        for key, v in cur.items():
            lo = key[3:]
            hit = by_upper.get((lo[i], lo[j]))
            if hit is None:
                continue
            for c, d, xv in hit:
                newlo = list(lo)
                newlo[i], newlo[j] = c, d
                k = key[:3] + tuple(newlo)
                w = nxt.get(k)
                val = v * xv if w is None else w + v * xv
                if val:
                    nxt[k] = val
                elif k in nxt:
                    del nxt[k]
        cur = nxt
    return cur


def map_params(X: SparseTensor4, transform: str = "invert") -> SparseTensor4:
    """Entrywise substitution v -> v^{-1} for every variable (so q -> q^{-1},
    r -> r^{-1}), the only transform the identities need."""
    if transform != "invert":
        raise ValueError("unsupported transform %r" % (transform,))
    ps = X.geometry.params
    out: Dict[Key4, Scalar] = {}
    for k, v in X.items():
        num = {mono_inv(m): c for m, c in v.num.items()}
        den = {mono_inv(m): c for m, c in v.den.items()}
        out[k] = _canon(ps, num, den)
    return SparseTensor4(X.geometry, out)


def tensor_equal(X: SparseTensor4, Y: SparseTensor4):
    """Entrywise equality; returns (ok, witness) where witness is None or
    (index tuple, X value, Y value) at the first mismatch in index order."""
    if not X.geometry.same(Y.geometry):
        raise GeometryMismatch("%r vs %r" % (X.geometry, Y.geometry))
    for k in sorted(set(X.entries) | set(Y.entries)):
        xv, yv = X.get(k), Y.get(k)
        if xv != yv:
            return False, (k, xv, yv)
    return True, None


def rank6_equal(A: Dict[Tuple[int, ...], Scalar],
                B: Dict[Tuple[int, ...], Scalar]):
    for k in sorted(set(A) | set(B)):
        av, bv = A.get(k), B.get(k)
        if av is None or bv is None or av != bv:
            return False, (k, av, bv)
    return True, None


class MetricVec:
    """The antidiagonal metric C_ab = C_a delta_{a,b'} with C_a = r^{-rho_a};
    the inverse metric has the same components."""

    def __init__(self, geometry: IndexGeometry):
        self.geometry = geometry
        ps = geometry.params
        self.values = [None] + [ps.s_pow(-geometry.rho2[a])
                                for a in geometry.indices()]

    def c(self, a: int) -> Scalar:
        return self.values[a]

    def lower(self, a: int, b: int) -> Scalar:
        if b != self.geometry.prime(a):
            return self.geometry.params.zero
        return self.values[a]

    upper = lower  # C^{ab} = C_{ab} entrywise

    def trace_norm(self) -> Scalar:
        """C_{ab} C^{ab} = sum_a r^{-2 rho_a}."""
        ps = self.geometry.params
        total = ps.zero
        for a in self.geometry.indices():
            total = total + self.values[a] * self.values[a]
        return total


# --- serialization ---------------------------------------------------------

def tensor_to_json(X: SparseTensor4) -> dict:
    from .scalars import paramspace_header, scalar_to_json
    geom = X.geometry
    return {
        "dim": geom.dim,
        "series": geom.series,
        "vars": list(geom.params.vars),
        "embedded": geom.embedded,
        "entries": [
            {"idx": list(k), "value": scalar_to_json(X.entries[k])}
            for k in sorted(X.entries)
        ],
    }


def tensor_from_json(payload: dict) -> SparseTensor4:
    from .scalars import scalar_from_json
    geom = IndexGeometry(int(payload["dim"]),
                         embedded=bool(payload.get("embedded", False)))
    if payload.get("series", geom.series) != geom.series:
        raise ValueError("series %r inconsistent with dim" % (payload.get("series"),))
    if list(payload.get("vars", geom.params.vars)) != geom.params.vars:
        raise ValueError("variable ordering mismatch")
    entries: Dict[Key4, Scalar] = {}
    for rec in payload["entries"]:
        k = tuple(int(i) for i in rec["idx"])
        if len(k) != 4 or not all(1 <= i <= geom.dim for i in k):
            raise ValueError("bad index tuple %r" % (rec.get("idx"),))
        v = scalar_from_json(geom.params, rec["value"])
        if k in entries:
            raise ValueError("duplicate index tuple %r" % (rec.get("idx"),))
        if v:
            entries[k] = v
    return SparseTensor4(geom, entries)
