"""The multiparametric orthogonal R matrix and its identity suites.

build_R produces the sparse matrix with the following nonzero components
(no sums over repeated indices; lambda = r - r^{-1}; primes a' = M+1-a; n2
is the self-conjugate middle index, present only in odd dimension):

    R^{aa}_{aa}     = r                               a != n2
    R^{aa'}_{aa'}   = r^{-1}                          a != n2
    R^{n2n2}_{n2n2} = 1
    R^{ab}_{ab}     = r / q_ab                        a != b, a' != b
    R^{ab}_{ba}     = lambda                          a > b,  a' != b
    R^{aa'}_{a'a}   = lambda (1 - r^{rho_a - rho_a'}) a > a'
    R^{aa'}_{bb'}   = -lambda r^{rho_a - rho_b}       a > b,  a' != b

The sixth family sits at the cell where the generic swap and the seventh
family's b = a' case would coincide, and equals their sum.  The matrix is
upper triangular (R^{ab}_{cd} = 0 when a < c, or a = c with b < d) and its
inverse is obtained by inverting every deformation variable.

The middle index n2 does carry r/q and metric-pair entries (q_{n2,b} = r
resolves them to 1 and -lambda r^{-rho_b}); only the n2-diagonal value
itself is special.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Mapping, Tuple

from .itensor import (GeometryMismatch, IndexGeometry, Key4, MetricVec,
                      SparseTensor4, identity_tensor, map_params,
                      rank6_equal, tensor_add, tensor_compose, tensor_equal,
                      tensor_scale, tensor_sub, triple_compose)
from .report import Report
from .scalars import ParamSpace, Scalar, canonical_q, scalar_invert, specialize

__all__ = [
    "RMatrixBundle", "build_R", "build_metric", "build_projectors",
    "build_bundle", "verify_rmatrix_suite", "decompose_embedding",
    "inner_lift", "uniparametric_R", "specialized_rank",
]


def build_R(geometry: IndexGeometry) -> SparseTensor4:
    ps = geometry.params
    M = geometry.dim
    pr = geometry.prime
    rho2 = geometry.rho2
    r = ps.r
    rinv = ps.s_pow(-2)
    lam = ps.lam
    ent: Dict[Key4, Scalar] = {}
    for a in range(1, M + 1):
        ap = pr(a)
        if a == ap:
            ent[(a, a, a, a)] = ps.one
            continue
        ent[(a, a, a, a)] = r
        ent[(a, ap, a, ap)] = rinv
        if a > ap:
            ent[(a, ap, ap, a)] = lam * (ps.one - ps.s_pow(2 * rho2[a]))
    for a in range(1, M + 1):
        for b in range(1, M + 1):
            if a == b or pr(a) == b:
                continue
            ent[(a, b, a, b)] = r * scalar_invert(canonical_q(ps, a, b))
            if a > b:
                ent[(a, b, b, a)] = lam
                ent[(a, pr(a), b, pr(b))] = \
                    ps.monomial(-1, ps.mono(s=rho2[a] - rho2[b])) * lam
    return SparseTensor4(geometry, ent)


def build_metric(geometry: IndexGeometry) -> MetricVec:
    return MetricVec(geometry)


def build_projectors(bundle) -> Tuple[SparseTensor4, SparseTensor4, SparseTensor4]:
    """The symmetric / antisymmetric / trace projectors decomposing Rhat:

        P_S = (r+r^{-1})^{-1} [ Rhat + r^{-1} I - (r^{-1}+r^{1-N}) P_0 ]
        P_A = (r+r^{-1})^{-1} [ -Rhat + r I - (r-r^{1-N}) P_0 ]
        P_0 = (C_ab C^ab)^{-1} K,   K^{ab}_{cd} = C^{ab} C_{cd}.
    """
    geom = bundle.geometry
    ps = geom.params
    I = identity_tensor(geom)
    r = ps.r
    rinv = ps.s_pow(-2)
    r1N = ps.s_pow(2 * (1 - geom.dim))
    P0 = tensor_scale(bundle.K, scalar_invert(bundle.C.trace_norm()))
    coef = scalar_invert(r + rinv)
    PS = tensor_scale(
        tensor_add(tensor_add(bundle.Rhat, tensor_scale(I, rinv)),
                   tensor_scale(P0, -(rinv + r1N))),
        coef)
    PA = tensor_scale(
        tensor_add(tensor_sub(tensor_scale(I, r), bundle.Rhat),
                   tensor_scale(P0, -(r - r1N))),
        coef)
    return PS, PA, P0


class RMatrixBundle:
    """R and everything derived from it for one index geometry.

    Rinv is built by inverting every deformation variable and then certified
    by multiplication against R; Rhat^{ab}_{cd} = R^{ba}_{cd}; the
    functional-representation kernels are R+^{AC}_{BD} = R^{CA}_{DB} and
    R-^{AC}_{BD} = (R^{-1})^{AC}_{BD}.
    """

    def __init__(self, geometry: IndexGeometry):
        self.geometry = geometry
        self.R = build_R(geometry)
        self.C = build_metric(geometry)
        self.Rhat = SparseTensor4(
            geometry, {(b, a, c, d): v for (a, b, c, d), v in self.R.items()})
        self.Rinv = map_params(self.R)
        I = identity_tensor(geometry)
        ok_left, w = tensor_equal(tensor_compose(self.R, self.Rinv), I)
        ok_right, _ = tensor_equal(tensor_compose(self.Rinv, self.R), I)
        if not (ok_left and ok_right):
            raise ArithmeticError(
                "parameter-flipped matrix failed the inverse certificate: %r" % (w,))
        # Rhat^{-1} = R^{-1} with the lower pair swapped (hat conjugates by
        # the flip, and the flip squares to the identity)
        self.Rhatinv = SparseTensor4(
            geometry, {(a, b, d, c): v for (a, b, c, d), v in self.Rinv.items()})
        self.Rplus = SparseTensor4(
            geometry, {(b, a, d, c): v for (a, b, c, d), v in self.R.items()})
        self.Rminus = self.Rinv
        pr = geometry.prime
        self.K = SparseTensor4(
            geometry,
            {(a, pr(a), c, pr(c)): self.C.c(a) * self.C.c(c)
             for a in geometry.indices() for c in geometry.indices()})
        self.P_S, self.P_A, self.P_0 = build_projectors(self)
        self._assert_invariants()

    def _assert_invariants(self) -> None:
        for (a, b, c, d) in self.R.entries:
            if a < c or (a == c and b < d):
                raise ArithmeticError(
                    "triangularity violated at %r" % ((a, b, c, d),))
        I = identity_tensor(self.geometry)
        summed = tensor_add(tensor_add(self.P_S, self.P_A), self.P_0)
        ok, w = tensor_equal(summed, I)
        if not ok:
            raise ArithmeticError("projectors do not sum to identity: %r" % (w,))
        projectors = [self.P_S, self.P_A, self.P_0]
        for i, Pi in enumerate(projectors):
            for j, Pj in enumerate(projectors):
                prod = tensor_compose(Pi, Pj)
                target = Pi if i == j else SparseTensor4(self.geometry, {})
                ok, w = tensor_equal(prod, target)
                if not ok:
                    raise ArithmeticError(
                        "projector algebra broken at P_%d P_%d: %r" % (i, j, w))


_bundle_cache: Dict[Tuple[int, bool], RMatrixBundle] = {}


def build_bundle(geometry: IndexGeometry) -> RMatrixBundle:
    key = (geometry.dim, geometry.embedded)
    got = _bundle_cache.get(key)
    if got is None or got.geometry is not geometry and not got.geometry.same(geometry):
        got = RMatrixBundle(geometry)
        _bundle_cache[key] = got
    return got


def _witness(w) -> str:
    if w is None:
        return ""
    k, x, y = w
    return "at %r: %r vs %r" % (k, x, y)


def verify_rmatrix_suite(geometry: IndexGeometry) -> Report:
    bundle = build_bundle(geometry)
    geom = geometry
    ps = geom.params
    pr = geom.prime
    R, C = bundle.R, bundle.C
    rep = Report("R matrix identities, dim=%d series=%s" % (geom.dim, geom.series))

    lhs = triple_compose([(R, 12), (R, 13), (R, 23)])
    rhs = triple_compose([(R, 23), (R, 13), (R, 12)])
    ok, w = rank6_equal(lhs, rhs)
    rep.add("yang-baxter: R12 R13 R23 = R23 R13 R12", ok,
            "" if ok else "first mismatch at %r" % (w[0],))

    bad = [k for k in R.entries if k[0] < k[2] or (k[0] == k[2] and k[1] < k[3])]
    rep.add("upper triangularity", not bad,
            "" if not bad else "entry below the diagonal at %r" % (bad[0],))

    I = identity_tensor(geom)
    ok1, w1 = tensor_equal(tensor_compose(R, bundle.Rinv), I)
    ok2, w2 = tensor_equal(tensor_compose(bundle.Rinv, R), I)
    rep.add("inverse by inverting all parameters", ok1 and ok2,
            _witness(w1 or w2))

    # transposing both index pairs of R equals transposing the parameter
    # matrix (p_ab = q_ba), realized by the substitution g -> s^4 g^{-1}
    flipped = SparseTensor4(
        geom, {(d, c, b, a): _transpose_params(v) for (a, b, c, d), v in R.items()})
    ok, w = tensor_equal(R, flipped)
    rep.add("pair transpose = parameter transpose", ok, _witness(w))

    reflected = SparseTensor4(
        geom, {(pr(c), pr(d), pr(a), pr(b)): v for (a, b, c, d), v in R.items()})
    ok, w = tensor_equal(R, reflected)
    rep.info("index reflection R^{ab}_{cd} = R^{c'd'}_{a'b'} "
             "(candidate reading of a corrupted source identity): %s"
             % ("holds" if ok else "fails " + _witness(w)))

    for name, X, Y in (("Rhat", bundle.Rhat, bundle.Rhatinv),
                       ("Rhat-inverse", bundle.Rhatinv, bundle.Rhat)):
        lhs_d: Dict[Key4, Scalar] = {}
        for (b, c, d, e), v in X.items():
            lhs_d[(pr(b), c, d, e)] = C.c(pr(b)) * v
        rhs_d: Dict[Key4, Scalar] = {}
        for (c, f, a, d), v in Y.items():
            rhs_d[(a, c, d, pr(f))] = v * C.c(f)
        ok, w = _dict_equal(lhs_d, rhs_d)
        rep.add("metric conjugation (left) turns %s into its inverse" % name,
                ok, _witness(w))
        lhs_d = {}
        for (b, c, d, e), v in X.items():
            lhs_d[(b, c, d, pr(e))] = v * C.c(e)
        rhs_d = {}
        for (c, a, f, d), v in Y.items():
            rhs_d[(pr(f), c, d, a)] = C.c(pr(f)) * v
        ok, w = _dict_equal(lhs_d, rhs_d)
        rep.add("metric conjugation (right) turns %s into its inverse" % name,
                ok, _witness(w))

    r1N = ps.s_pow(2 * (1 - geom.dim))
    lhs_c: Dict[Tuple[int, int], Scalar] = {}
    for (a, b, c, d), v in bundle.Rhat.items():
        if b == pr(a):
            _acc(lhs_c, (c, d), C.c(a) * v)
    rhs_c = {(c, pr(c)): r1N * C.c(c) for c in geom.indices()}
    ok, w = _dict_equal(lhs_c, rhs_c)
    rep.add("metric row contraction: C_ab Rhat^{ab}_{cd} = r^{1-N} C_cd",
            ok, _witness(w))
    lhs_c = {}
    for (a, b, c, d), v in bundle.Rhat.items():
        if d == pr(c):
            _acc(lhs_c, (a, b), v * C.c(c))
    rhs_c = {(a, pr(a)): r1N * C.c(a) for a in geom.indices()}
    ok, w = _dict_equal(lhs_c, rhs_c)
    rep.add("metric column contraction: Rhat^{ab}_{cd} C^{cd} = r^{1-N} C^ab",
            ok, _witness(w))

    # strictly below the diagonal, rows against a metric column pair (and
    # columns against a metric row pair) only load the conjugate position:
    # R^{ab}_{cc'} = 0 unless b = a', and R^{aa'}_{cd} = 0 unless d = c'
    bad_row = [k for k in R.entries
               if k[0] > k[2] and k[3] == pr(k[2]) and k[1] != pr(k[0])]
    rep.add("below-diagonal entries on metric columns sit at b = a'",
            not bad_row, "" if not bad_row else "stray entry at %r" % (bad_row[0],))
    bad_col = [k for k in R.entries
               if k[0] > k[2] and k[1] == pr(k[0]) and k[3] != pr(k[2])]
    rep.add("below-diagonal entries on metric rows sit at d = c'",
            not bad_col, "" if not bad_col else "stray entry at %r" % (bad_col[0],))

    projs = [("P_S", bundle.P_S), ("P_A", bundle.P_A), ("P_0", bundle.P_0)]
    summed = tensor_add(tensor_add(bundle.P_S, bundle.P_A), bundle.P_0)
    ok, w = tensor_equal(summed, I)
    rep.add("projector completeness: P_S + P_A + P_0 = I", ok, _witness(w))
    all_ok, first = True, ""
    for i, (ni, Pi) in enumerate(projs):
        for j, (nj, Pj) in enumerate(projs):
            target = Pi if i == j else SparseTensor4(geom, {})
            ok, w = tensor_equal(tensor_compose(Pi, Pj), target)
            if not ok and all_ok:
                all_ok, first = False, "%s %s %s" % (ni, nj, _witness(w))
    rep.add("projector orthogonality and idempotence", all_ok, first)
    spectral = tensor_add(
        tensor_sub(tensor_scale(bundle.P_S, ps.r),
                   tensor_scale(bundle.P_A, ps.s_pow(-2))),
        tensor_scale(bundle.P_0, r1N))
    ok, w = tensor_equal(spectral, bundle.Rhat)
    rep.add("spectral form: Rhat = r P_S - r^{-1} P_A + r^{1-N} P_0",
            ok, _witness(w))
    return rep


def _acc(d: dict, k, v: Scalar) -> None:
    w = d.get(k)
    v = v if w is None else w + v
    if v:
        d[k] = v
    elif k in d:
        del d[k]


def _dict_equal(A: dict, B: dict):
    for k in sorted(set(A) | set(B)):
        av, bv = A.get(k), B.get(k)
        if av is None or bv is None or av != bv:
            return False, (k, av, bv)
    return True, None


def _transpose_params(v: Scalar) -> Scalar:
    # g_ab -> s^4 / g_ab on every variable, leaving s alone; this realizes
    # q_AB -> q_BA on all resolved parameter monomials
    ps = v.ps
    num = {}
    for m, c in v.num.items():
        num[(m[0] + 4 * sum(m[1:]),) + tuple(-e for e in m[1:])] = c
    # canonical denominators contain no g variables
    return Scalar(ps, num, v.den) if v.den == ps._one_den else \
        _retie(ps, num, v.den)


def _retie(ps, num, den):
    from .scalars import _canon
    return _canon(ps, num, den)


def uniparametric_R(geometry: IndexGeometry) -> SparseTensor4:
    """R with every independent parameter g_ab specialized to r = s^2."""
    ps = geometry.params
    R = build_R(geometry)
    out: Dict[Key4, Scalar] = {}
    for k, v in R.items():
        num = {}
        for m, c in v.num.items():
            key = (m[0] + 2 * sum(m[1:]),) + (0,) * (ps.nvars - 1)
            num[key] = num.get(key, 0) + c
        num = {m: c for m, c in num.items() if c}
        out[k] = _retie(ps, num, v.den)
    return SparseTensor4(geometry, out)


def specialized_rank(X: SparseTensor4, assignment: Mapping[str, object]) -> int:
    """Rank of the M^2 x M^2 matrix of X at a rational parameter point,
    by exact fraction Gaussian elimination."""
    M = X.geometry.dim
    rows: Dict[int, Dict[int, Fraction]] = {}
    for (a, b, c, d), v in X.items():
        val = specialize(v, assignment)
        if val:
            rows.setdefault((a - 1) * M + (b - 1), {})[(c - 1) * M + (d - 1)] = val
    rank = 0
    work = [dict(r) for r in rows.values() if r]
    while work:
        row = work.pop()
        if not row:
            continue
        piv = min(row)
        pval = row[piv]
        rank += 1
        reduced = []
        for other in work:
            if piv in other:
                f = other[piv] / pval
                for c, v in row.items():
                    nv = other.get(c, Fraction(0)) - f * v
                    if nv:
                        other[c] = nv
                    elif c in other:
                        del other[c]
            if other:
                reduced.append(other)
        work = reduced
    return rank


def inner_lift(big_geometry: IndexGeometry):
    """Return the renaming map from dimension-(M-2) scalars into the
    parameter space of the embedded dimension-M geometry.

    The inner small index a sits at big index a+1, so the independent
    deformation parameters match up as g_ab -> g_{a+1,b+1}; s is shared.
    The map is a pure variable renaming and therefore a field morphism.
    """
    if not big_geometry.embedded:
        raise ValueError("inner_lift needs an embedded geometry")
    bps = big_geometry.params
    sps = ParamSpace(big_geometry.dim - 2)
    slot = {0: 0}
    for i, (a, b) in enumerate(sps.pairs):
        slot[1 + i] = 1 + bps.pairs.index((a + 1, b + 1))

    def lift(x: Scalar) -> Scalar:
        if x.ps != sps:
            raise ValueError("scalar is not over the inner parameter space")

        def remap(p):
            out = {}
            for m, c in p.items():
                mm = [0] * bps.nvars
                for i, e in enumerate(m):
                    if e:
                        mm[slot[i]] = e
                out[tuple(mm)] = c
            return out
        return Scalar(bps, remap(x.num), remap(x.den))

    return lift


def decompose_embedding(N: int) -> Report:
    """Check that the dimension-(N+2) matrix splits into the documented
    block pattern over the cone coordinates: the inner block is the
    dimension-N matrix, the mixed blocks are r/q diagonals and lambda
    swaps, and the two off-corners are metric multiples of lambda r^{-rho}
    with rho = N/2."""
    if N < 3:
        raise ValueError("embedding needs N >= 3")
    big_geom = IndexGeometry(N + 2, embedded=True)
    small_geom = IndexGeometry(N)
    big = build_R(big_geom)
    small = build_R(small_geom)
    small_C = build_metric(small_geom)
    bps, sps = big_geom.params, small_geom.params
    M = big_geom.dim
    prb = big_geom.prime
    rep = Report("embedding of dim %d inside dim %d" % (N, M))

    lift = inner_lift(big_geom)

    ok, w = _dict_equal(
        {k: v for k, v in big.items()
         if all(2 <= i <= M - 1 for i in k)},
        {(a + 1, b + 1, c + 1, d + 1): lift(v)
         for (a, b, c, d), v in small.items()})
    rep.add("inner block equals the dimension-%d matrix" % N, ok, _witness(w))

    q_ok = all(canonical_q(bps, a + 1, b + 1) == lift(canonical_q(sps, a, b))
               for a in range(1, N + 1) for b in range(1, N + 1))
    rep.add("inner deformation parameters restrict", q_ok)

    lam = bps.lam
    r = bps.r
    rinv = bps.s_pow(-2)
    corner = bps.monomial(-1, bps.mono(s=-N)) * lam  # -lambda r^{-rho}
    inner = range(2, M)

    f_cell = big.get((M, 1, 1, M))
    f_expect = lam * (bps.one - bps.s_pow(-2 * N))
    rep.add("apex cell carries f(r) = lambda (1 - r^{-2 rho})",
            f_cell == f_expect,
            "" if f_cell == f_expect else "%r vs %r" % (f_cell, f_expect))

    ok, w = _dict_equal(
        {(c, d): v for (a, b, c, d), v in big.items()
         if (a, b) == (M, 1) and c in inner and d in inner},
        {(c, prb(c)): corner * lift(small_C.c(c - 1)) for c in inner})
    rep.add("corner row equals -C_cd lambda r^{-rho}", ok, _witness(w))

    ok, w = _dict_equal(
        {(a, b): v for (a, b, c, d), v in big.items()
         if (c, d) == (1, M) and a in inner and b in inner},
        {(a, prb(a)): corner * lift(small_C.c(prb(a) - 1)) for a in inner})
    rep.add("corner column equals -C^{ba} lambda r^{-rho}", ok, _witness(w))

    diag_ok, diag_w = True, ""
    for b in inner:
        for key, q in (((1, b, 1, b), (1, b)), ((b, 1, b, 1), (b, 1)),
                       ((M, b, M, b), (M, b)), ((b, M, b, M), (b, M))):
            want = r * scalar_invert(canonical_q(bps, *q))
            if big.get(key) != want and diag_ok:
                diag_ok, diag_w = False, "at %r" % (key,)
    rep.add("mixed diagonal blocks are r/q entries", diag_ok, diag_w)

    swap_ok = all(big.get((b, 1, 1, b)) == lam and big.get((M, b, b, M)) == lam
                  for b in inner)
    rep.add("mixed swap blocks are lambda delta entries", swap_ok)

    cone_ok = (big.get((1, 1, 1, 1)) == r and big.get((M, M, M, M)) == r
               and big.get((1, M, 1, M)) == rinv
               and big.get((M, 1, M, 1)) == rinv)
    rep.add("cone diagonal carries r and r^{-1}", cone_ok)

    classified = set()
    classified.update(k for k in big.entries if all(i in inner for i in k))
    classified.update([(M, 1, 1, M), (1, 1, 1, 1), (M, M, M, M),
                       (1, M, 1, M), (M, 1, M, 1)])
    for b in inner:
        classified.update([(M, 1, b, prb(b)), (b, prb(b), 1, M),
                           (1, b, 1, b), (b, 1, b, 1), (M, b, M, b),
                           (b, M, b, M), (b, 1, 1, b), (M, b, b, M)])
    stray = sorted(set(big.entries) - classified)
    rep.add("no entries outside the block template", not stray,
            "" if not stray else "stray entry at %r" % (stray[0],))

    big_C = build_metric(big_geom)
    metric_ok = (big_C.c(M) == bps.s_pow(N) and big_C.c(1) == bps.s_pow(-N)
                 and all(big_C.c(c) == lift(small_C.c(c - 1)) for c in inner))
    rep.add("cone metric components are r^{+-rho}, inner ones restrict",
            metric_ok)
    return rep
