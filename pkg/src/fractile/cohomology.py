"""Integer homological algebra for the tiling space.

The cell complex has the graph's interior vertices as 0-cells, glued
boundary-edge pairs (plus interior edges) as 1-cells, and the fractal
prototiles as 2-cells.  Cohomology of the complex is computed by exact
Smith normal form; the substitution induces maps whose direct limits give
the Cech cohomology of the tiling space, reported as sums of Z[1/k]
factors when the induced map diagonalizes over the integers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from fractile.field import ORIGIN, Point, scalar
from fractile.fractal import FractalPrototileSet, WordElement, substitute_word
from fractile.recurrent import RecurrentPair
from fractile.tiling import SubstitutionRule, point_on_segment


class CohomologyError(ValueError):
    pass


Matrix = list[list[int]]


def _zeros(r: int, c: int) -> Matrix:
    return [[0] * c for _ in range(r)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    out = _zeros(rows, cols)
    for i in range(rows):
        for k in range(inner):
            if a[i][k]:
                aik = a[i][k]
                for j in range(cols):
                    out[i][j] += aik * b[k][j]
    return out


def mat_eq(a: Matrix, b: Matrix) -> bool:
    return a == b


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(a: Matrix) -> Matrix:
    return [list(row) for row in zip(*a)] if a else []


# -- Smith normal form --------------------------------------------------------

def smith_normal_form(m: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """U, D, V with U m V = D diagonal, U and V unimodular, and the diagonal
    entries nonnegative with d1 | d2 | ...  Exact integer arithmetic."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    a = [row[:] for row in m]
    u = identity(rows)
    v = identity(cols)

    def row_op(i, j, k):  # row_i += k * row_j
        a[i] = [x + k * y for x, y in zip(a[i], a[j])]
        u[i] = [x + k * y for x, y in zip(u[i], u[j])]

    def col_op(i, j, k):  # col_i += k * col_j
        for r in range(rows):
            a[r][i] += k * a[r][j]
        for r in range(cols):
            v[r][i] += k * v[r][j]

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def col_swap(i, j):
        for r in range(rows):
            a[r][i], a[r][j] = a[r][j], a[r][i]
        for r in range(cols):
            v[r][i], v[r][j] = v[r][j], v[r][i]

    def row_negate(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    while t < min(rows, cols):
        # find pivot: smallest nonzero entry in the remaining block
        pivot = None
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j] and (best is None or abs(a[i][j]) < best):
                    best = abs(a[i][j])
                    pivot = (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        row_swap(t, pi)
        col_swap(t, pj)
        if a[t][t] < 0:
            row_negate(t)
        dirty = False
        for i in range(t + 1, rows):
            if a[i][t]:
                q = a[i][t] // a[t][t]
                row_op(i, t, -q)
                if a[i][t]:
                    dirty = True
        for j in range(t + 1, cols):
            if a[t][j]:
                q = a[t][j] // a[t][t]
                col_op(j, t, -q)
                if a[t][j]:
                    dirty = True
        if dirty:
            continue
        # divisibility of the remaining block
        bad = None
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j] % a[t][t]:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            row_op(t, bad, 1)
            continue
        t += 1
    return u, a, v


def snf_diagonal(m: Matrix) -> list[int]:
    _, d, _ = smith_normal_form(m)
    out = []
    for i in range(min(len(d), len(d[0]) if d else 0)):
        if d[i][i]:
            out.append(abs(d[i][i]))
    return out


def mat_rank(m: Matrix) -> int:
    return len(snf_diagonal(m))


def integer_kernel(m: Matrix) -> Matrix:
    """Columns form a basis of ker(m) over Z (saturated)."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    if rows == 0:
        return identity(cols)
    u, d, v = smith_normal_form(m)
    r = len([i for i in range(min(rows, cols)) if d[i][i]])
    # kernel basis: last cols - r columns of v
    basis = [[v[i][j] for j in range(r, cols)] for i in range(cols)]
    return basis


def _unimodular_inverse(u: Matrix) -> Matrix:
    """Exact inverse of a unimodular integer matrix."""
    n = len(u)
    aug = [[Fraction(u[i][j]) for j in range(n)] + [Fraction(int(i == k))
                                                    for k in range(n)]
           for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        scale = aug[col][col]
        aug[col] = [x / scale for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    inv = [[aug[i][n + j] for j in range(n)] for i in range(n)]
    out = [[int(x) for x in row] for row in inv]
    if any(Fraction(out[i][j]) != inv[i][j] for i in range(n) for j in range(n)):
        raise CohomologyError("matrix is not unimodular")
    return out


def solve_in_lattice(basis: Matrix, targets: Matrix) -> Matrix:
    """X with basis @ X = targets, where basis columns are independent and
    saturated; raises if a target leaves the lattice."""
    rows = len(basis)
    k = len(basis[0]) if rows else 0
    u, d, v = smith_normal_form(basis)
    ut = mat_mul(u, targets)
    r = len([i for i in range(min(rows, k)) if d[i][i]])
    if r != k:
        raise CohomologyError("basis columns are dependent")
    ncols = len(targets[0]) if targets and targets[0] is not None else 0
    y = _zeros(k, ncols)
    for j in range(ncols):
        for i in range(k):
            if ut[i][j] % d[i][i]:
                raise CohomologyError("target not in the sublattice")
            y[i][j] = ut[i][j] // d[i][i]
        for i in range(k, rows):
            if ut[i][j]:
                raise CohomologyError("target not in the span")
    return mat_mul(v, y)


# -- groups -------------------------------------------------------------------

@dataclass
class AbelianGroup:
    free_rank: int
    torsion: list[int] = field(default_factory=list)  # divisibility chain, each >= 2

    def __str__(self) -> str:
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " (+) ".join(parts) if parts else "0"


@dataclass
class CohomologyBasis:
    """A cohomology group with an explicit integer basis of its free part."""

    group: AbelianGroup
    ambient_dim: int
    kernel_basis: Matrix          # columns span ker(delta) in the ambient space
    free_vectors: Matrix          # columns: lifts of free generators (ambient)
    _proj: object = None          # callable ambient-vector -> free coordinates

    def project(self, vec: list[int]) -> list[int]:
        return self._proj(vec)


def _quotient(kernel_basis: Matrix, relation_vectors: Matrix,
              ambient: int) -> CohomologyBasis:
    """ker/im as a group with explicit free-part basis and projection."""
    k = len(kernel_basis[0]) if kernel_basis and kernel_basis[0] else 0
    if k == 0:
        return CohomologyBasis(AbelianGroup(0), ambient,
                               kernel_basis, [[] for _ in range(ambient)],
                               lambda vec: [])
    nrel = len(relation_vectors[0]) if relation_vectors and relation_vectors[0] else 0
    if nrel:
        coords = solve_in_lattice(kernel_basis, relation_vectors)
    else:
        coords = _zeros(k, 0)
    u, d, v = smith_normal_form(coords)
    r = len([i for i in range(min(k, nrel)) if d[i][i]]) if nrel else 0
    invariants = [d[i][i] for i in range(r)]
    torsion = [x for x in invariants if x > 1]
    free_rank = k - r
    uinv = _unimodular_inverse(u)
    # new basis of the kernel: columns of kernel_basis * uinv
    newbasis = mat_mul(kernel_basis, uinv)
    free_vectors = [[newbasis[i][j] for j in range(r, k)] for i in range(ambient)]

    def project(vec: list[int]) -> list[int]:
        coords_v = solve_in_lattice(kernel_basis, [[x] for x in vec])
        w = mat_mul(u, coords_v)
        return [w[i][0] for i in range(r, k)]

    return CohomologyBasis(AbelianGroup(free_rank, torsion), ambient,
                           kernel_basis, free_vectors, project)


def approximant_cohomology(delta0: Matrix, delta1: Matrix, n_faces: int):
    """H0, H1, H2 of 0 -> G0 -(d0)-> G1 -(d1)-> G2 -> 0 with explicit bases."""
    n0 = len(delta0[0]) if delta0 and delta0[0] else 0
    n1 = len(delta1[0]) if delta1 and delta1[0] else (len(delta0) if delta0 else 0)
    if delta0 and delta1 and any(any(row) for row in mat_mul(delta1, delta0)):
        raise CohomologyError("delta1 . delta0 != 0: not a cochain complex")
    h0_basis = integer_kernel(delta0) if n0 else identity(0)
    h0 = CohomologyBasis(AbelianGroup(len(h0_basis[0]) if h0_basis else 0),
                         n0, h0_basis, h0_basis,
                         None)
    h0._proj = lambda vec: [x[0] for x in solve_in_lattice(
        h0_basis, [[v] for v in vec])] if h0_basis and h0_basis[0] else []
    ker1 = integer_kernel(delta1) if n1 else identity(0)
    im0 = delta0 if n0 else _zeros(n1, 0)
    h1 = _quotient(ker1, im0, n1)
    h2 = _quotient(identity(n_faces), delta1 if n1 else _zeros(n_faces, 0), n_faces)
    return h0, h1, h2


def induced_map(basis: CohomologyBasis, action: Matrix) -> Matrix:
    """The action expressed on the free part of the cohomology basis.

    Raises if the action does not preserve the subquotient."""
    free = basis.free_vectors
    k = len(free[0]) if free and free[0] else 0
    out = _zeros(k, k)
    for j in range(k):
        vec = [free[i][j] for i in range(len(free))]
        image = [sum(action[i][l] * vec[l] for l in range(len(vec)))
                 for i in range(len(action))]
        try:
            coords = basis.project(image)
        except CohomologyError as exc:
            raise CohomologyError(
                f"substitution does not preserve the subquotient: {exc}") from exc
        for i in range(k):
            out[i][j] = coords[i]
    return out


# -- direct limits ------------------------------------------------------------

@dataclass
class LimitGroup:
    inverted: list[int] = field(default_factory=list)   # k with a Z[1/k] factor
    free_rank: int = 0
    torsion: list[int] = field(default_factory=list)
    fallback: Matrix | None = None
    eigenvector_index: int | None = None
    index_coprime: bool | None = None   # index coprime to the inverted primes

    def __str__(self) -> str:
        return format_group(self)


def format_group(g: LimitGroup) -> str:
    if g.fallback is not None:
        rows = "; ".join(",".join(str(x) for x in row) for row in g.fallback)
        return f"colim(Z^{len(g.fallback)}, [{rows}])"
    parts = []
    counted: dict[int, int] = {}
    for k in g.inverted:
        counted[k] = counted.get(k, 0) + 1
    for k in sorted(counted, reverse=True):
        mult = counted[k]
        parts.append(f"Z[1/{k}]" + (f"^{mult}" if mult > 1 else ""))
    if g.free_rank == 1:
        parts.append("Z")
    elif g.free_rank > 1:
        parts.append(f"Z^{g.free_rank}")
    parts.extend(f"Z/{d}" for d in g.torsion)
    return " (+) ".join(parts) if parts else "0"


def char_poly(m: Matrix) -> list[int]:
    """Coefficients of det(xI - m), leading first (Faddeev-LeVerrier)."""
    n = len(m)
    coeffs = [Fraction(1)]
    mk = identity(n)
    a = [[Fraction(x) for x in row] for row in m]
    mk = [[Fraction(x) for x in row] for row in mk]
    for k in range(1, n + 1):
        am = [[sum(a[i][l] * mk[l][j] for l in range(n)) for j in range(n)]
              for i in range(n)]
        c = -sum(am[i][i] for i in range(n)) / k
        coeffs.append(c)
        mk = [[am[i][j] + (c if i == j else 0) for j in range(n)]
              for i in range(n)]
    out = [int(c) for c in coeffs]
    if any(Fraction(o) != c for o, c in zip(out, coeffs)):
        raise CohomologyError("characteristic polynomial not integral")
    return out


def integer_roots(coeffs: list[int]) -> list[int] | None:
    """All roots with multiplicity if every root is a (possibly zero) integer."""
    roots: list[int] = []
    poly = coeffs[:]
    while len(poly) > 1:
        while poly[-1] == 0:
            roots.append(0)
            poly = poly[:-1]
            if len(poly) == 1:
                return roots
        const = abs(poly[-1])
        found = None
        divisors = {d for d in range(1, int(math.isqrt(const)) + 1) if const % d == 0}
        divisors |= {const // d for d in divisors}
        for cand in sorted(divisors):
            for r in (cand, -cand):
                if _poly_eval(poly, r) == 0:
                    found = r
                    break
            if found is not None:
                break
        if found is None:
            return None
        roots.append(found)
        poly = _synthetic_div(poly, found)
    return roots


def _poly_eval(poly: list[int], x: int) -> int:
    acc = 0
    for c in poly:
        acc = acc * x + c
    return acc


def _synthetic_div(poly: list[int], r: int) -> list[int]:
    out = [poly[0]]
    for c in poly[1:-1]:
        out.append(c + out[-1] * r)
    return out


def direct_limit(h: CohomologyBasis | AbelianGroup, a_star: Matrix) -> LimitGroup:
    group = h.group if isinstance(h, CohomologyBasis) else h
    n = group.free_rank
    if n == 0:
        return LimitGroup(torsion=list(group.torsion))
    if len(a_star) != n:
        raise CohomologyError("induced map has the wrong size")
    # eventual image rank
    power = a_star
    for _ in range(n):
        power = mat_mul(power, a_star)
    r = mat_rank(power)
    if r == 0:
        return LimitGroup(torsion=list(group.torsion))
    # saturated basis of the eventual image
    u, d, v = smith_normal_form(power)
    uinv = _unimodular_inverse(u)
    basis = [[uinv[i][j] for j in range(r)] for i in range(n)]
    image = mat_mul(a_star, basis)
    restricted = solve_in_lattice(basis, image)
    poly = char_poly(restricted)
    roots = integer_roots(poly)
    if roots is None or any(r0 == 0 for r0 in roots):
        return LimitGroup(fallback=restricted, torsion=list(group.torsion))
    distinct = sorted(set(roots))
    # diagonalizability: product of (C - lambda I) over distinct roots vanishes
    prod = identity(r)
    for lam in distinct:
        shifted = [[restricted[i][j] - (lam if i == j else 0) for j in range(r)]
                   for i in range(r)]
        prod = mat_mul(prod, shifted)
    if any(any(row) for row in prod):
        return LimitGroup(fallback=restricted, torsion=list(group.torsion))
    inverted = [abs(x) for x in roots if abs(x) >= 2]
    free = sum(1 for x in roots if abs(x) == 1)
    # eigenvector lattice index diagnostic
    eig_vectors: list[list[int]] = []
    for lam in distinct:
        shifted = [[restricted[i][j] - (lam if i == j else 0) for j in range(r)]
                   for i in range(r)]
        for col in transpose(integer_kernel(shifted)):
            eig_vectors.append(list(col))
    index = None
    coprime = None
    if len(eig_vectors) == r:
        det = _det_int(transpose(eig_vectors))
        index = abs(det)
        prod = 1
        for k in inverted:
            prod *= k
        coprime = math.gcd(index, prod) == 1 if prod > 1 else True
    return LimitGroup(sorted(inverted, reverse=True), free,
                      list(group.torsion), None, index, coprime)


def _det_int(m: Matrix) -> int:
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k]:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# -- the cell complex of a fractal realization --------------------------------

@dataclass(frozen=True)
class APEdge:
    """A 1-cell: either a glued boundary pair or an interior edge."""

    kind: str                       # "pair" | "interior"
    p1: int
    e1: int                         # skeleton edge index in p1
    p2: int | None = None
    e2: int | None = None
    delta: Point | None = None      # tile2 = p2 translated by delta next to p1


@dataclass
class APComplex:
    pair: RecurrentPair
    fps: FractalPrototileSet
    vertices: list[tuple[int, int]]          # (prototile, skeleton vertex id)
    edges: list[APEdge]
    d1: Matrix                               # |V| x |E|
    d2: Matrix                               # |E| x |F|
    a0: Matrix
    a1: Matrix
    a2: Matrix

    @property
    def delta0(self) -> Matrix:
        return transpose(self.d1)

    @property
    def delta1(self) -> Matrix:
        return transpose(self.d2)

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.fps.stars)


def build_ap_complex(pair: RecurrentPair, fps: FractalPrototileSet,
                     injectivity_passed: bool = True) -> APComplex:
    if not injectivity_passed:
        raise CohomologyError(
            "cell complex requires a pair satisfying the injectivity "
            "conditions (border forcing is only guaranteed then)")
    rule = pair.rule
    vertices: list[tuple[int, int]] = []
    for p in range(rule.m):
        for vid, sv in enumerate(pair.g.skeletons[p].vertices):
            if sv.kind == "interior":
                vertices.append((p, vid))
    vindex = {pv: i for i, pv in enumerate(vertices)}

    edges, pair_lookup = _ap_edges(pair)
    eindex = {key: i for i, key in pair_lookup.items()}

    d1 = _zeros(len(vertices), len(edges))
    for j, ap in enumerate(edges):
        tail, head = _ap_endpoints(pair, ap)
        d1[vindex[head]][j] += 1
        d1[vindex[tail]][j] -= 1

    d2 = _zeros(len(edges), len(fps.stars))
    for fi, word in enumerate(fps.words):
        for cls, sign in _word_to_classes(pair, pair_lookup, word, cyclic=True):
            d2[cls][fi] += sign

    a0 = _zeros(len(vertices), len(vertices))
    for i, (p, vid) in enumerate(vertices):
        svid = pair.psi.vertex_maps[p][vid]
        target = _s_vertex_source(pair, p, svid)
        a0[i][vindex[target]] += 1

    a1 = _zeros(len(edges), len(edges))
    for j, ap in enumerate(edges):
        word = _ap_edge_word(pair, ap)
        image = substitute_word(pair, word)
        for cls, sign in _word_to_classes(pair, pair_lookup, image, cyclic=False):
            a1[j][cls] += sign

    a2 = [row[:] for row in fps.a2]

    complex_ = APComplex(pair, fps, vertices, edges, d1, d2, a0, a1, a2)
    _verify_complex(complex_)
    return complex_


def _verify_complex(ap: APComplex) -> None:
    prod = mat_mul(ap.d1, ap.d2)
    if any(any(row) for row in prod):
        raise CohomologyError("d1 . d2 != 0")
    lhs = mat_mul(ap.delta1, ap.a1)
    rhs = mat_mul(ap.a2, ap.delta1)
    if lhs != rhs:
        raise CohomologyError("substitution is not cellular on 1-cells vs faces")
    lhs0 = mat_mul(ap.delta0, ap.a0)
    rhs0 = mat_mul(ap.a1, ap.delta0)
    if lhs0 != rhs0:
        raise CohomologyError("substitution is not cellular on vertices vs 1-cells")


def _ap_edges(pair: RecurrentPair):
    """Enumerate 1-cells; returns (edges, lookup) where lookup maps the
    canonical class key of a directed traversal to the edge index."""
    rule = pair.rule
    g = pair.g
    edges: list[APEdge] = []
    lookup: dict = {}

    def boundary_vertex_of(p, pt):
        skel = g.skeletons[p]
        for vid, sv in enumerate(skel.vertices):
            if sv.point == pt:
                return vid
        return None

    # interior edges
    for p in range(rule.m):
        skel = g.skeletons[p]
        for si, e in enumerate(skel.edges):
            if skel.vertices[e.a].kind == "interior" and \
               skel.vertices[e.b].kind == "interior":
                lookup[("interior", p, si)] = len(edges)
                edges.append(APEdge("interior", p, si))

    # glued boundary pairs, one per full-edge adjacency class
    for adj in rule.adjacency_classes:
        if not adj.segments:
            continue
        for a, b in adj.segments:
            found = None
            for vid, sv in enumerate(g.skeletons[adj.p1].vertices):
                if sv.kind == "boundary" and point_on_segment(sv.point, a, b):
                    found = sv.point
                    break
            if found is None:
                continue
            w2 = found - adj.delta
            e1 = _skel_edge_at(g.skeletons[adj.p1], found)
            e2 = _skel_edge_at(g.skeletons[adj.p2], w2)
            if e1 is None or e2 is None:
                raise CohomologyError(
                    f"boundary vertex {found} of prototile {adj.p1} is not "
                    f"matched across the adjacency")
            key_f = ("pair", adj.p1, e1, adj.p2, e2, _pk(adj.delta))
            key_b = ("pair", adj.p2, e2, adj.p1, e1, _pk(-adj.delta))
            if key_f in lookup or key_b in lookup:
                continue
            idx = len(edges)
            lookup[key_f] = idx
            edges.append(APEdge("pair", adj.p1, e1, adj.p2, e2, adj.delta))
    return edges, lookup


def _pk(p: Point):
    return (p.x.a, p.x.b, p.y.a, p.y.b)


def _skel_edge_at(skel, pt: Point) -> int | None:
    for si, e in enumerate(skel.edges):
        if skel.vertices[e.a].point == pt or skel.vertices[e.b].point == pt:
            if skel.vertices[e.a].kind == "boundary" and skel.vertices[e.a].point == pt:
                return si
            if skel.vertices[e.b].kind == "boundary" and skel.vertices[e.b].point == pt:
                return si
    return None


def _ap_endpoints(pair: RecurrentPair, ap: APEdge):
    """(tail, head) as (prototile, skeleton vertex id), for the canonical
    traversal of the 1-cell."""
    g = pair.g
    if ap.kind == "interior":
        e = g.skeletons[ap.p1].edges[ap.e1]
        return (ap.p1, e.a), (ap.p1, e.b)
    s1, s2 = g.skeletons[ap.p1], g.skeletons[ap.p2]
    e1, e2 = s1.edges[ap.e1], s2.edges[ap.e2]
    tail = e1.a if s1.vertices[e1.a].kind == "interior" else e1.b
    head = e2.a if s2.vertices[e2.a].kind == "interior" else e2.b
    return (ap.p1, tail), (ap.p2, head)


def _ap_edge_word(pair: RecurrentPair, ap: APEdge) -> list[WordElement]:
    """The canonical traversal as raw directed edge copies (tiles placed
    with p1 at the origin)."""
    g = pair.g
    if ap.kind == "interior":
        skel = g.skeletons[ap.p1]
        out = []
        for raw, fwd in skel.edges[ap.e1].pieces:
            out.append((ap.p1, ORIGIN, raw, fwd))
        return out
    s1, s2 = g.skeletons[ap.p1], g.skeletons[ap.p2]
    e1, e2 = s1.edges[ap.e1], s2.edges[ap.e2]
    word: list[WordElement] = []
    # traverse e1 from interior end to boundary end
    fwd1 = s1.vertices[e1.a].kind == "interior"
    pieces1 = e1.pieces if fwd1 else [(r, not f) for r, f in reversed(e1.pieces)]
    word.extend((ap.p1, ORIGIN, raw, f) for raw, f in pieces1)
    # then e2 from boundary end to interior end, in the glued tile
    fwd2 = s2.vertices[e2.a].kind == "boundary"
    pieces2 = e2.pieces if fwd2 else [(r, not f) for r, f in reversed(e2.pieces)]
    word.extend((ap.p2, ap.delta, raw, f) for raw, f in pieces2)
    return word


def _word_to_classes(pair: RecurrentPair, lookup, word: list[WordElement],
                     cyclic: bool):
    """Group a walk of raw directed edge copies into 1-cell traversals."""
    rule = pair.rule
    g = pair.g
    raw_maps = [_raw_skel_map(g.skeletons[p]) for p in range(rule.m)]
    # convert raw elements to skeleton-edge traversals (our graphs are reduced)
    items = []
    for p, x, raw, fwd in word:
        se, sfwd = raw_maps[p][raw]
        items.append((p, x, se, fwd == sfwd))
    out = []
    i = 0
    n = len(items)
    while i < n:
        p, x, se, fwd = items[i]
        skel = g.skeletons[p]
        e = skel.edges[se]
        start_kind = skel.vertices[e.a if fwd else e.b].kind
        end_kind = skel.vertices[e.b if fwd else e.a].kind
        if start_kind == "interior" and end_kind == "interior":
            key = ("interior", p, se)
            sign = 1 if fwd else -1
            out.append((lookup[key], sign))
            i += 1
            continue
        if end_kind == "boundary":
            # pair with the next element
            j = (i + 1) % n
            if not cyclic and j == 0:
                raise CohomologyError("walk ends inside a glued pair")
            p2, x2, se2, fwd2 = items[j]
            delta = x2 - x
            key_f = ("pair", p, se, p2, se2, _pk(delta))
            key_b = ("pair", p2, se2, p, se, _pk(-delta))
            if key_f in lookup:
                out.append((lookup[key_f], 1))
            elif key_b in lookup:
                out.append((lookup[key_b], -1))
            else:
                raise CohomologyError(
                    f"unknown glued pair {key_f}; adjacency scan incomplete?")
            i += 2
            continue
        raise CohomologyError("walk enters an edge at a boundary vertex")
    return out


def _raw_skel_map(skel):
    out = {}
    for si, e in enumerate(skel.edges):
        if len(e.pieces) == 1:
            raw, fwd = e.pieces[0]
            out[raw] = (si, fwd)
    return out


def _s_vertex_source(pair: RecurrentPair, p: int, svid: int) -> tuple[int, int]:
    """Which interior G vertex the S vertex is a scaled copy of."""
    pt = pair.s.skeletons[p].vertices[svid].point
    rule = pair.rule
    lam_n = rule.lam ** pair.n
    target = pt.scale(lam_n)
    for path, t, q in rule.digit_compositions(p, pair.n):
        local = target - t
        skel = pair.g.skeletons[q]
        for vid, sv in enumerate(skel.vertices):
            if sv.kind == "interior" and sv.point == local:
                return (q, vid)
    raise CohomologyError(f"S vertex at {pt} is not a contraction copy")


# -- matrix comparison up to relabelling ---------------------------------------

def simultaneous_permutation_match(a: Matrix, b: Matrix) -> list[int] | None:
    """Permutation sigma with a[sigma[i]][sigma[j]] == b[i][j], or None."""
    n = len(a)
    if n != len(b):
        return None

    def row_sig(m, i):
        return (sorted(m[i]), sorted(m[j][i] for j in range(n)), m[i][i])

    sig_a = [row_sig(a, i) for i in range(n)]
    sig_b = [row_sig(b, i) for i in range(n)]
    cands = [[j for j in range(n) if sig_a[j] == sig_b[i]] for i in range(n)]
    assign: list[int] = []

    def bt(i):
        if i == n:
            return True
        for j in cands[i]:
            if j in assign:
                continue
            ok = True
            for k in range(i):
                if a[j][assign[k]] != b[i][k] or a[assign[k]][j] != b[k][i]:
                    ok = False
                    break
            if ok and a[j][j] == b[i][i]:
                assign.append(j)
                if bt(i + 1):
                    return True
                assign.pop()
        return False

    if bt(0):
        return assign[:]
    return None


def signed_permutation_match(a: Matrix, b: Matrix) -> tuple[list[int], list[int]] | None:
    """(sigma, signs) with s_i s_j a[sigma[i]][sigma[j]] == b[i][j], or None."""
    n = len(a)
    if n != len(b):
        return None

    def row_sig(m, i):
        return (sorted(abs(x) for x in m[i]),
                sorted(abs(m[j][i]) for j in range(n)), abs(m[i][i]))

    sig_a = [row_sig(a, i) for i in range(n)]
    sig_b = [row_sig(b, i) for i in range(n)]
    cands = [[j for j in range(n) if sig_a[j] == sig_b[i]] for i in range(n)]
    assign: list[int] = []
    signs: list[int] = []

    def bt(i):
        if i == n:
            return True
        for j in cands[i]:
            if j in assign:
                continue
            for s in (1, -1):
                ok = a[j][j] == b[i][i]  # diagonal fixes nothing about sign
                if not ok:
                    continue
                good = True
                for k in range(i):
                    if s * signs[k] * a[j][assign[k]] != b[i][k] or \
                       signs[k] * s * a[assign[k]][j] != b[k][i]:
                        good = False
                        break
                if good:
                    assign.append(j)
                    signs.append(s)
                    if bt(i + 1):
                        return True
                    assign.pop()
                    signs.pop()
        return False

    if bt(0):
        return assign[:], signs[:]
    return None


# -- matrix fixtures -----------------------------------------------------------

def parse_matrix(text: str) -> Matrix:
    rows = []
    for line in text.strip().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        rows.append([int(tok) for tok in line.replace(",", " ").split()])
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise CohomologyError("ragged matrix fixture")
    return rows


def cohomology_from_matrices(delta0: Matrix, delta1: Matrix,
                             a0: Matrix, a1: Matrix, a2: Matrix):
    """The homological stage alone: groups of the complex and their limits."""
    n_faces = len(a2)
    h0, h1, h2 = approximant_cohomology(delta0, delta1, n_faces)
    a0_star = induced_map(h0, a0)
    a1_star = induced_map(h1, a1)
    a2_star = induced_map(h2, a2)
    lim0 = direct_limit(h0, a0_star)
    lim1 = direct_limit(h1, a1_star)
    lim2 = direct_limit(h2, a2_star)
    return {
        "approximant": (h0, h1, h2),
        "induced": (a0_star, a1_star, a2_star),
        "limits": (lim0, lim1, lim2),
    }


def ap_cohomology(ap: APComplex):
    return cohomology_from_matrices(ap.delta0, ap.delta1, ap.a0, ap.a1, ap.a2)
