"""Closed-form invariant evaluators: trace/power scalars, covariant
tensors, functional bases for every cataloged algebra, and the example
equation residuals.

All evaluators run on plain floats, complex numbers, or dual numbers, so
the same closure serves evaluation and exact differentiation.  Matrix
contractions follow the diagonal-metric summation convention: a repeated
index pair contributes the metric sign of that index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

from .dual import Dual, EvaluationError, dexp, dlog, magnitude, value_of
from .jetspace import (
    COMPLEX,
    REAL,
    FieldKind,
    JetPoint,
    Metric,
    d1_coord,
    d2_coord,
    enumerate_coords,
    euclidean,
    field_coord,
    minkowski,
)
from .liealg import AlgebraSpec, make_sampler

# --------------------------------------------------------------------------
# generic dense linear algebra over any scalar that supports + - * /


def mat_mul(a, b):
    n, p = len(a), len(b[0])
    q = len(b)
    return [[sum_prod(a[i], [b[k][j] for k in range(q)]) for j in range(p)]
            for i in range(n)]


def sum_prod(xs, ys):
    total = 0.0
    for x, y in zip(xs, ys):
        total = total + x * y
    return total


def mat_trace(a):
    total = 0.0
    for i in range(len(a)):
        total = total + a[i][i]
    return total


def g_premul(signs, a):
    """(G A)[i][j] = g_i A[i][j] for a diagonal metric."""
    return [[signs[i] * a[i][j] for j in range(len(a[i]))]
            for i in range(len(a))]


def solve_linear(a, b, context="linear system"):
    """Gaussian elimination with partial pivoting; scalars may be duals."""
    n = len(a)
    m = [list(row) + [b[i]] for i, row in enumerate(a)]
    scale = max(max(magnitude(v) for v in row[:n]) for row in m)
    if scale == 0.0:
        raise EvaluationError(f"degenerate {context}")
    for col in range(n):
        piv, best = col, magnitude(m[col][col])
        for r in range(col + 1, n):
            mag = magnitude(m[r][col])
            if mag > best:
                piv, best = r, mag
        if best <= 1e-12 * scale:
            raise EvaluationError(f"degenerate {context}")
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
        inv = 1.0 / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv
            for c in range(col, n + 1):
                m[r][c] = m[r][c] - f * m[col][c]
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        acc = m[i][n]
        for j in range(i + 1, n):
            acc = acc - m[i][j] * x[j]
        x[i] = acc / m[i][i]
    return x


def mat_inverse(a, context="matrix"):
    n = len(a)
    cols = []
    for j in range(n):
        e = [1.0 if i == j else 0.0 for i in range(n)]
        cols.append(solve_linear(a, e, context))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def determinant(a):
    n = len(a)
    m = [list(row) for row in a]
    det = 1.0
    for col in range(n):
        piv, best = col, magnitude(m[col][col])
        for r in range(col + 1, n):
            mag = magnitude(m[r][col])
            if mag > best:
                piv, best = r, mag
        if best == 0.0:
            return 0.0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det = det * m[col][col]
        inv = 1.0 / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv
            for c in range(col, n):
                m[r][c] = m[r][c] - f * m[col][c]
    return det


# --------------------------------------------------------------------------
# trace/power invariants of vectors and symmetric matrices


def power_trace(mat, metric: Metric, k: int):
    """Trace of the k-th metric power: tr((G M)^k)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    signs = metric.signs
    gm = g_premul(signs, mat)
    p = gm
    for _ in range(k - 1):
        p = mat_mul(p, gm)
    return mat_trace(p)


def power_form(vec, mat, metric: Metric, k: int):
    """Bilinear power form v^T G (M G)^(k-1) v."""
    if k < 1:
        raise ValueError("k must be at least 1")
    signs = metric.signs
    n = len(vec)
    t = list(vec)
    for _ in range(k - 1):
        t = [sum_prod(mat[i], [signs[j] * t[j] for j in range(n)])
             for i in range(n)]
    total = 0.0
    for i in range(n):
        total = total + vec[i] * signs[i] * t[i]
    return total


def mixed_power_trace(u, v, metric: Metric, j: int, k: int):
    """Mixed trace tr((G U)^j (G V)^(k-j))."""
    if not 0 <= j <= k:
        raise ValueError("need 0 <= j <= k")
    if k < 1:
        raise ValueError("k must be at least 1")
    if j == 0:
        return power_trace(v, metric, k)
    if j == k:
        return power_trace(u, metric, j)
    signs = metric.signs
    gu = g_premul(signs, u)
    gv = g_premul(signs, v)
    p = gu
    for _ in range(j - 1):
        p = mat_mul(p, gu)
    for _ in range(k - j):
        p = mat_mul(p, gv)
    return mat_trace(p)


# --------------------------------------------------------------------------
# jet views: plain evaluation and single-coordinate dual seeding


class _PlainView:
    __slots__ = ("p", "cache")

    def __init__(self, point):
        self.p = point
        self.cache = {}

    def x(self, i):
        return self.p.x[i]

    def u(self, r):
        return self.p.u[r - 1]

    def du(self, r, i):
        return self.p.du[r - 1][i]

    def ddu(self, r, i, j):
        return self.p.value(d2_coord(r, i, j))


class _SeedView:
    __slots__ = ("p", "c", "cache")

    def __init__(self, point, coord):
        self.p = point
        self.c = coord
        self.cache = {}

    def x(self, i):
        c = self.c
        seed = 1.0 if (c.kind == "base" and c.i == i) else 0.0
        return Dual(self.p.x[i], seed)

    def u(self, r):
        c = self.c
        seed = 1.0 if (c.kind == "field" and c.r == r) else 0.0
        return Dual(self.p.u[r - 1], seed)

    def du(self, r, i):
        c = self.c
        seed = 1.0 if (c.kind == "d1" and c.r == r and c.i == i) else 0.0
        return Dual(self.p.du[r - 1][i], seed)

    def ddu(self, r, i, j):
        lo, hi = (i, j) if i <= j else (j, i)
        c = self.c
        seed = 1.0 if (c.kind == "d2" and c.r == r
                       and c.i == lo and c.j == hi) else 0.0
        return Dual(self.p.value(d2_coord(r, lo, hi)), seed)


def plain_view(point):
    return _PlainView(point)


def seeded_view(point, coord):
    return _SeedView(point, coord)


# --------------------------------------------------------------------------
# scalar jet functions


@dataclass(frozen=True)
class JetSpace:
    """Sampling/evaluation domain for a family of jet functions."""

    n_base: int
    n_fields: int
    field_kind: FieldKind = REAL
    metric: Metric = None
    positive_fields: bool = False

    def sampler(self, seed: int = 0):
        return make_sampler(self.n_base, self.n_fields, self.field_kind,
                            seed=seed, positive_fields=self.positive_fields)

    def coords(self):
        return enumerate_coords(self.n_base, self.n_fields)


class ScalarJetFunction:
    """Differentiable map JetPoint -> scalar with a declared dependency set."""

    __slots__ = ("label", "fn", "deps", "space")

    def __init__(self, label, fn, deps, space):
        self.label = label
        self.fn = fn
        self.deps = tuple(deps)
        self.space = space

    def __repr__(self):
        return f"ScalarJetFunction({self.label})"

    def eval(self, point: JetPoint):
        return value_of(self.fn(_PlainView(point)))

    def grad(self, point: JetPoint, coords=None):
        """Gradient over ``coords`` (default: every jet coordinate;
        entries outside the dependency set are zero)."""
        deps = set(self.deps)
        if coords is None:
            coords = enumerate_coords(point.n_base, point.n_fields)
        out = []
        for c in coords:
            if c not in deps:
                out.append(0.0)
                continue
            res = self.fn(_SeedView(point, c))
            out.append(res.deriv if isinstance(res, Dual) else 0.0)
        return out


def _dep_coords(n_base, n_fields, kinds, rs=None):
    picked = []
    for c in enumerate_coords(n_base, n_fields):
        if c.kind not in kinds:
            continue
        if rs is not None and c.kind != "base" and c.r not in rs:
            continue
        picked.append(c)
    return tuple(picked)


# cached per-view builders ---------------------------------------------------


def _hess(view, r, idx):
    return [[view.ddu(r, i, j) for j in idx] for i in idx]


def _gvec(view, r, idx):
    return [view.du(r, i) for i in idx]


def _hess_power(view, r, idx, signs, k):
    """k-th power of (G * Hessian_r) over the index list, cached per view."""
    key = ("hp", r, idx)
    plist = view.cache.get(key)
    if plist is None:
        plist = [g_premul(signs, _hess(view, r, idx))]
        view.cache[key] = plist
    while len(plist) < k:
        plist.append(mat_mul(plist[-1], plist[0]))
    return plist[k - 1]


def _S(view, r, idx, signs, k):
    return mat_trace(_hess_power(view, r, idx, signs, k))


def _Sjk(view, r_first, r_second, idx, signs, j, k):
    if j == 0:
        return _S(view, r_second, idx, signs, k)
    if j == k:
        return _S(view, r_first, idx, signs, k)
    return mat_trace(mat_mul(_hess_power(view, r_first, idx, signs, j),
                             _hess_power(view, r_second, idx, signs, k - j)))


def _R(view, vec, r_mat, idx, signs, k):
    mat = [[view.ddu(r_mat, i, j) for j in idx] for i in idx]
    return power_form(vec, mat, _metric_stub(signs), k)


class _SignsMetric:
    __slots__ = ("signs",)

    def __init__(self, signs):
        self.signs = signs


def _metric_stub(signs):
    return _SignsMetric(tuple(signs))


def _tensor_cached(view, key, build):
    t = view.cache.get(key)
    if t is None:
        t = build(view)
        view.cache[key] = t
    return t


def _tensor_power(view, key, tensor_builder, signs, k):
    pkey = ("tp",) + key
    plist = view.cache.get(pkey)
    if plist is None:
        plist = [g_premul(signs, _tensor_cached(view, key, tensor_builder))]
        view.cache[pkey] = plist
    while len(plist) < k:
        plist.append(mat_mul(plist[-1], plist[0]))
    return plist[k - 1]


def _power(base, expo):
    """Generic power: integer exponents stay algebraic, otherwise exp/log."""
    if isinstance(expo, int) or float(expo).is_integer():
        e = int(expo)
        if e >= 0:
            out = 1.0
            for _ in range(e):
                out = out * base
            return out
        out = 1.0
        inv = 1.0 / base
        for _ in range(-e):
            out = out * inv
        return out
    return dexp(expo * dlog(base))


# --------------------------------------------------------------------------
# covariant tensors


@dataclass(frozen=True)
class TensorBuilder:
    """Named covariant tensor: builds a vector or symmetric matrix from a
    jet point (metric-aware); components are scalar jet functions."""

    label: str
    kind: str  # "vector" | "matrix"
    size: int
    space: JetSpace
    deps: tuple
    builder: callable = dc_field(compare=False)

    def build(self, point_or_view):
        view = (point_or_view if hasattr(point_or_view, "cache")
                else _PlainView(point_or_view))
        out = self.builder(view)
        if hasattr(point_or_view, "cache"):
            return out
        if self.kind == "vector":
            return [value_of(v) for v in out]
        return [[value_of(v) for v in row] for row in out]

    def components(self):
        key = ("tensorc", self.label)

        def cached(view):
            return _tensor_cached(view, key, self.builder)

        fns = []
        if self.kind == "vector":
            for a in range(self.size):
                fns.append(ScalarJetFunction(
                    f"{self.label}[{a}]",
                    (lambda a: lambda view: cached(view)[a])(a),
                    self.deps, self.space))
        else:
            for a in range(self.size):
                for b in range(self.size):
                    fns.append(ScalarJetFunction(
                        f"{self.label}[{a}][{b}]",
                        (lambda a, b: lambda view: cached(view)[a][b])(a, b),
                        self.deps, self.space))
        return fns


def covariant_tensor(name: str, n: int, lam: float = 1.0, mu: float = 1.0,
                     r: int = 1, m: int = 1) -> TensorBuilder:
    """Catalog of covariant tensors by name.

    Euclidean names use an n-dimensional space; Minkowski and Galilei names
    use n+1 base coordinates with index 0 timelike.
    """
    if name == "theta":
        space = JetSpace(n, m, REAL, euclidean(n), positive_fields=True)
        idx = tuple(range(n))
        deps = _dep_coords(n, m, ("field", "d1", "d2"))

        def build(view, r=r):
            u = view.u(r)
            du = _gvec(view, r, idx)
            sq = sum_prod(du, du)
            out = []
            for i in range(n):
                row = []
                for j in range(n):
                    val = lam * view.ddu(r, i, j) \
                        + (1.0 - lam) * du[i] * du[j] / u
                    if i == j:
                        val = val - sq / (2.0 * u)
                    row.append(val)
                out.append(row)
            return out

        return TensorBuilder(f"theta(lam={lam})", "matrix", n, space, deps, build)

    if name == "w":
        space = JetSpace(n, m, REAL, euclidean(n))
        idx = tuple(range(n))
        deps = _dep_coords(n, m, ("d1", "d2"))

        def build(view, r=r):
            du = _gvec(view, r, idx)
            sq = sum_prod(du, du)
            tr = 0.0
            for i in range(n):
                tr = tr + view.ddu(r, i, i)
            out = []
            for a in range(n):
                row = []
                for b in range(n):
                    val = sq * view.ddu(r, a, b)
                    if a == b:
                        val = val + sq * tr / (2.0 - n)
                    cross = 0.0
                    for c in range(n):
                        cross = cross + du[c] * (du[a] * view.ddu(r, b, c)
                                                 + du[b] * view.ddu(r, a, c))
                    row.append(val - cross)
                out.append(row)
            return out

        return TensorBuilder("w", "matrix", n, space, deps, build)

    if name in ("theta_minkowski", "w_minkowski", "theta_vector_minkowski",
                "eikonal_theta"):
        nb = n + 1
        met = minkowski(nb)
        signs = met.signs
        space = JetSpace(nb, m, REAL, met,
                         positive_fields=name.startswith("theta"))
        if name == "theta_minkowski":
            deps = _dep_coords(nb, m, ("field", "d1", "d2"))

            def build(view, r=r):
                u = view.u(r)
                du = [view.du(r, i) for i in range(nb)]
                sq = 0.0
                for i in range(nb):
                    sq = sq + signs[i] * du[i] * du[i]
                out = []
                for i in range(nb):
                    row = []
                    for j in range(nb):
                        val = lam * view.ddu(r, i, j) \
                            + (1.0 - lam) * du[i] * du[j] / u
                        if i == j:
                            val = val - signs[i] * sq / (2.0 * u)
                        row.append(val)
                    out.append(row)
                return out

            return TensorBuilder(f"theta_mink(lam={lam})", "matrix", nb,
                                 space, deps, build)

        if name == "theta_vector_minkowski":
            deps = _dep_coords(nb, m, ("field", "d1"))

            def build(view, r=r):
                u_r, u_1 = view.u(r), view.u(1)
                return [view.du(r, i) / u_r - view.du(1, i) / u_1
                        for i in range(nb)]

            return TensorBuilder(f"theta_vec(u{r})", "vector", nb, space,
                                 deps, build)

        if name == "w_minkowski":
            deps = _dep_coords(nb, m, ("d1", "d2"))

            def build(view, r=r):
                # normalized so that the metric trace equals the quasilinear
                # combination u.u/(1-n) tr - u.M.u used by the conformal
                # power equation
                du = [view.du(r, i) for i in range(nb)]
                sq = 0.0
                tr = 0.0
                for i in range(nb):
                    sq = sq + signs[i] * du[i] * du[i]
                    tr = tr + signs[i] * view.ddu(r, i, i)
                out = []
                for a in range(nb):
                    row = []
                    for b in range(nb):
                        val = sq * view.ddu(r, a, b)
                        if a == b:
                            val = val + signs[a] * sq * tr / (1.0 - n)
                        cross = 0.0
                        for c in range(nb):
                            cross = cross + signs[c] * du[c] * (
                                du[a] * view.ddu(r, b, c)
                                + du[b] * view.ddu(r, a, c))
                        row.append((val - cross) * 0.5)
                    out.append(row)
                return out

            return TensorBuilder("w_mink", "matrix", nb, space, deps, build)

        # eikonal_theta
        deps = _dep_coords(nb, m, ("d1", "d2"))

        def build(view, r=r):
            du = [view.du(r, i) for i in range(nb)]
            sq = 0.0
            tr = 0.0
            for i in range(nb):
                sq = sq + signs[i] * du[i] * du[i]
                tr = tr + signs[i] * view.ddu(r, i, i)
            mdu = [0.0] * nb  # (M G u)_a = sum_c u_{ac} g_c u_c
            for a in range(nb):
                acc = 0.0
                for c in range(nb):
                    acc = acc + signs[c] * view.ddu(r, a, c) * du[c]
                mdu[a] = acc
            out = []
            for i in range(nb):
                row = []
                for j in range(nb):
                    row.append(du[i] * mdu[j] + du[j] * mdu[i]
                               - du[i] * du[j] * tr - sq * view.ddu(r, i, j))
                out.append(row)
            return out

        return TensorBuilder("eikonal_theta", "matrix", nb, space, deps, build)

    if name in ("galilei_theta", "galilei_theta2", "galilei_h",
                "galilei_hhat_mu0", "implicit_theta", "hessian", "position"):
        return _galilei_tensor(name, n, lam=lam, mu=mu, r=r, m=m)

    raise ValueError(f"unknown covariant tensor {name!r}")


def _galilei_tensor(name, n, lam, mu, r, m):
    nb = n + 1
    spatial = tuple(range(1, nb))
    space = JetSpace(nb, m, REAL, euclidean(n))

    if name == "hessian":
        space = JetSpace(n, m, REAL, euclidean(n))
        deps = _dep_coords(n, m, ("d2",))

        def build(view, r=r):
            return [[view.ddu(r, i, j) for j in range(n)] for i in range(n)]

        return TensorBuilder("hessian", "matrix", n, space, deps, build)

    if name == "position":
        space = JetSpace(n, m, REAL, euclidean(n))
        deps = _dep_coords(n, m, ("base",))

        def build(view):
            return [view.x(i) for i in range(n)]

        return TensorBuilder("x", "vector", n, space, deps, build)

    if name == "galilei_theta":
        deps = _dep_coords(nb, m, ("d1", "d2"))

        def build(view, r=r):
            return [view.ddu(r, a, 0) * mu
                    + sum_prod([view.du(r, b) for b in spatial],
                               [view.ddu(r, a, b) for b in spatial])
                    for a in spatial]

        return TensorBuilder("galilei_theta", "vector", n, space, deps, build)

    if name == "galilei_theta2":
        deps = _dep_coords(nb, m, ("d1", "d2"))

        def build(view, r=r):
            du = [view.du(r, b) for b in spatial]
            scal = sum_prod(du, du) + mu * view.du(r, 0)
            out = []
            for ai, a in enumerate(spatial):
                row = []
                for bi, b in enumerate(spatial):
                    val = view.ddu(r, a, b)
                    if ai == bi:
                        val = val - 2.0 * scal / n
                    row.append(val)
                out.append(row)
            return out

        return TensorBuilder("galilei_theta2", "matrix", n, space, deps, build)

    if name == "galilei_h":
        deps = _dep_coords(nb, m, ("base", "d1"))

        def build(view, r=r):
            t = view.x(0)
            return [mu * view.x(a) - t * view.du(r, a) for a in spatial]

        return TensorBuilder("galilei_h", "vector", n, space, deps, build)

    if name == "galilei_hhat_mu0":
        deps = _dep_coords(nb, m, ("base", "d1", "d2"))

        def build(view, r=r):
            t = view.x(0)
            xs = [view.x(a) for a in spatial]
            du = [view.du(r, a) for a in spatial]
            phit = view.du(r, 0)
            xdotdu = sum_prod(xs, du)
            out = []
            for ai, a in enumerate(spatial):
                h = sum_prod(xs, [view.ddu(r, a, b) for b in spatial]) \
                    + t * view.ddu(r, a, 0)
                out.append(h / t + 2.0 * t * du[ai] * phit / n
                           + 4.0 * xdotdu * du[ai] / (n * t))
            return out

        return TensorBuilder("galilei_hhat", "vector", n, space, deps, build)

    # implicit_theta: theta solving Hess * theta = d/dt gradient
    deps = _dep_coords(nb, m, ("d2",))

    def build(view, r=r):
        key = ("implicit_theta", r)
        cached = view.cache.get(key)
        if cached is not None:
            return cached
        hess = [[view.ddu(r, a, b) for b in spatial] for a in spatial]
        rhs = [view.ddu(r, b, 0) for b in spatial]
        theta = solve_linear(hess, rhs, "Hessian")
        view.cache[key] = theta
        return theta

    return TensorBuilder("implicit_theta", "vector", n, space, deps, build)


# --------------------------------------------------------------------------
# functional bases


@dataclass(frozen=True)
class BasisFamily:
    """Named list of invariants with its expected cardinality."""

    label: str
    algebra: AlgebraSpec
    members: tuple
    expected_count: int
    space: JetSpace
    deps: tuple
    notes: str = ""

    def __post_init__(self):
        if len(self.members) != self.expected_count:
            raise ValueError(
                f"{self.label}: {len(self.members)} members but expected "
                f"{self.expected_count}")

    def labels(self):
        return [m.label for m in self.members]


def _mk(label, fn, deps, space):
    return ScalarJetFunction(label, fn, deps, space)


def basis(spec: AlgebraSpec, hat_variant: str = "printed") -> BasisFamily:
    """Functional basis (or printed generating set) for the algebra."""
    if hat_variant not in ("printed", "uniform"):
        raise ValueError("hat_variant must be 'printed' or 'uniform'")
    name = spec.name
    if name == "AO":
        return _basis_rotation(spec)
    if name == "AE":
        return _basis_euclid(spec)
    if name == "AE1":
        return _basis_extended_euclid(spec)
    if name == "AC":
        return _basis_conformal(spec)
    if name == "AP":
        return _basis_poincare(spec)
    if name == "APtilde":
        return _basis_extended_poincare(spec)
    if name == "AC1n":
        return _basis_conformal_minkowski(spec)
    if name in ("AG_I", "AG1_I", "AG2_I"):
        if spec.rep != "log":
            raise ValueError("Galilei bases act on log-substituted jets; "
                             "use rep='log'")
        if spec.mu != 0:
            return _basis_galilei_real(spec, hat_variant)
        return _basis_galilei_real_mu0(spec)
    if name in ("AG_II", "AG1_II", "AG2_II"):
        if spec.rep != "log":
            raise ValueError("Galilei bases act on log-substituted jets; "
                             "use rep='log'")
        if spec.mass != 0:
            return _basis_galilei_complex(spec, hat_variant)
        if name != "AG2_II":
            raise ValueError(f"no printed massless basis for {name}")
        return _basis_galilei_complex_mass0(spec)
    raise ValueError(f"no basis catalog for algebra {name!r}")


def _basis_euclid(spec):
    n, m = spec.n, spec.m
    met = euclidean(n)
    signs = met.signs
    idx = tuple(range(n))
    space = JetSpace(n, m, REAL, met)
    deps = _dep_coords(n, m, ("field", "d1", "d2"))
    members = []
    for r in range(1, m + 1):
        members.append(_mk(f"u{r}", (lambda r: lambda v: v.u(r))(r),
                           (field_coord(r),), space))
    for k in range(1, n + 1):
        members.append(_mk(
            f"S{k}(U1)",
            (lambda k: lambda v: _S(v, 1, idx, signs, k))(k), deps, space))
    for r in range(2, m + 1):
        for k in range(1, n + 1):
            for j in range(0, k):
                members.append(_mk(
                    f"S{j},{k}(U1,U{r})",
                    (lambda j, k, r: lambda v: _Sjk(v, 1, r, idx, signs, j, k))(j, k, r),
                    deps, space))
    for r in range(1, m + 1):
        for k in range(1, n + 1):
            members.append(_mk(
                f"R{k}(du{r},U1)",
                (lambda k, r: lambda v: _R(v, _gvec(v, r, idx), 1, idx, signs, k))(k, r),
                deps, space))
    expected = 2 * m * n + m + (m - 1) * n * (n - 1) // 2
    return BasisFamily(f"euclid n={n} m={m}", spec, tuple(members), expected,
                       space, deps)


def _basis_rotation(spec):
    """Rotation-only invariants: position vector joins the jet variables."""
    n, m = spec.n, spec.m
    met = euclidean(n)
    signs = met.signs
    idx = tuple(range(n))
    space = JetSpace(n, m, REAL, met)
    deps = _dep_coords(n, m, ("base", "field", "d1", "d2"))
    members = []
    for r in range(1, m + 1):
        members.append(_mk(f"u{r}", (lambda r: lambda v: v.u(r))(r),
                           (field_coord(r),), space))
    for k in range(1, n + 1):
        members.append(_mk(
            f"S{k}(U1)", (lambda k: lambda v: _S(v, 1, idx, signs, k))(k),
            deps, space))
    for r in range(2, m + 1):
        for k in range(1, n + 1):
            for j in range(0, k):
                members.append(_mk(
                    f"S{j},{k}(U1,U{r})",
                    (lambda j, k, r: lambda v: _Sjk(v, 1, r, idx, signs, j, k))(j, k, r),
                    deps, space))
    for r in range(1, m + 1):
        for k in range(1, n + 1):
            members.append(_mk(
                f"R{k}(du{r},U1)",
                (lambda k, r: lambda v: _R(v, _gvec(v, r, idx), 1, idx, signs, k))(k, r),
                deps, space))
    for k in range(1, n + 1):
        members.append(_mk(
            f"R{k}(x,U1)",
            (lambda k: lambda v: _R(v, [v.x(i) for i in idx], 1, idx, signs, k))(k),
            deps, space))
    expected = m + n + (m - 1) * n * (n + 1) // 2 + m * n + n
    return BasisFamily(f"rotation n={n} m={m}", spec, tuple(members),
                       expected, space, deps)


def _basis_extended_euclid(spec):
    n, m, lam = spec.n, spec.m, spec.lam
    met = euclidean(n)
    signs = met.signs
    idx = tuple(range(n))
    space = JetSpace(n, m, REAL, met, positive_fields=True)
    deps = _dep_coords(n, m, ("field", "d1", "d2"))
    members = []
    if m == 1:
        if lam != 0:
            for k in range(1, n + 1):
                expo = k * (1.0 - 2.0 / lam) + 1.0
                members.append(_mk(
                    f"R{k}/u^{expo:g}",
                    (lambda k, expo: lambda v: _R(v, _gvec(v, 1, idx), 1, idx, signs, k)
                     / _power(v.u(1), expo))(k, expo), deps, space))
            for k in range(1, n + 1):
                expo = k * (1.0 - 2.0 / lam)
                members.append(_mk(
                    f"S{k}/u^{expo:g}",
                    (lambda k, expo: lambda v: _S(v, 1, idx, signs, k)
                     / _power(v.u(1), expo))(k, expo), deps, space))
            expected = 2 * n
        else:
            members.append(_mk("u1", lambda v: v.u(1), (field_coord(1),), space))

            def tr1(v):
                return _S(v, 1, idx, signs, 1)

            for k in range(1, n + 1):
                members.append(_mk(
                    f"R{k}/tr^{k}",
                    (lambda k: lambda v: _R(v, _gvec(v, 1, idx), 1, idx, signs, k)
                     / _power(tr1(v), k))(k), deps, space))
            for k in range(2, n + 1):
                members.append(_mk(
                    f"S{k}/tr^{k}",
                    (lambda k: lambda v: _S(v, 1, idx, signs, k)
                     / _power(tr1(v), k))(k), deps, space))
            expected = 2 * n
        return BasisFamily(f"extended-euclid n={n} lam={lam:g}", spec,
                           tuple(members), expected, space, deps)
    # several fields
    if lam != 0:
        for r in range(2, m + 1):
            members.append(_mk(
                f"u{r}/u1", (lambda r: lambda v: v.u(r) / v.u(1))(r),
                deps, space))
        for k in range(1, n + 1):
            expo = k * (1.0 - 2.0 / lam)
            members.append(_mk(
                f"S{k}(U1)/u1^{expo:g}",
                (lambda k, expo: lambda v: _S(v, 1, idx, signs, k)
                 / _power(v.u(1), expo))(k, expo), deps, space))
        for r in range(2, m + 1):
            for k in range(1, n + 1):
                expo = k * (1.0 - 2.0 / lam)
                for j in range(0, k):
                    members.append(_mk(
                        f"S{j},{k}(U1,U{r})/u1^{expo:g}",
                        (lambda j, k, r, expo: lambda v:
                         _Sjk(v, 1, r, idx, signs, j, k) / _power(v.u(1), expo))(j, k, r, expo),
                        deps, space))
        for r in range(1, m + 1):
            for k in range(1, n + 1):
                expo = k * (1.0 - 2.0 / lam) + 1.0
                members.append(_mk(
                    f"R{k}(du{r})/u1^{expo:g}",
                    (lambda k, r, expo: lambda v:
                     _R(v, _gvec(v, r, idx), 1, idx, signs, k) / _power(v.u(1), expo))(k, r, expo),
                    deps, space))
        expected = len(members)
    else:
        def tr1(v):
            return _S(v, 1, idx, signs, 1)

        for r in range(1, m + 1):
            members.append(_mk(
                f"u{r}", (lambda r: lambda v: v.u(r))(r),
                (field_coord(r),), space))
        for r in range(1, m + 1):
            for k in range(1, n + 1):
                members.append(_mk(
                    f"R{k}(du{r})/tr^{k}",
                    (lambda k, r: lambda v: _R(v, _gvec(v, r, idx), 1, idx, signs, k)
                     / _power(tr1(v), k))(k, r), deps, space))
        for k in range(2, n + 1):
            members.append(_mk(
                f"S{k}(U1)/tr^{k}",
                (lambda k: lambda v: _S(v, 1, idx, signs, k)
                 / _power(tr1(v), k))(k), deps, space))
        for r in range(2, m + 1):
            for k in range(1, n + 1):
                for j in range(0, k):
                    members.append(_mk(
                        f"S{j},{k}(U1,U{r})/tr^{k}",
                        (lambda j, k, r: lambda v: _Sjk(v, 1, r, idx, signs, j, k)
                         / _power(tr1(v), k))(j, k, r), deps, space))
        expected = len(members)
    return BasisFamily(f"extended-euclid n={n} m={m} lam={lam:g}", spec,
                       tuple(members), expected, space, deps)


def _theta_builder_euclid(n, m, lam, r):
    tb = covariant_tensor("theta", n, lam=lam, r=r, m=m)
    return tb.builder


def _basis_conformal(spec):
    n, m, lam = spec.n, spec.m, spec.lam
    met = euclidean(n)
    signs = met.signs
    idx = tuple(range(n))
    space = JetSpace(n, m, REAL, met, positive_fields=True)
    deps = _dep_coords(n, m, ("field", "d1", "d2"))
    members = []
    if m == 1:
        if lam != 0:
            theta = _theta_builder_euclid(n, 1, lam, 1)
            for k in range(1, n + 1):
                expo = k * (2.0 / lam - 1.0)
                members.append(_mk(
                    f"S{k}(theta)*u^{expo:g}",
                    (lambda k, expo: lambda v:
                     mat_trace(_tensor_power(v, ("th", 1), theta, signs, k))
                     * _power(v.u(1), expo))(k, expo),
                    deps, space))
            expected = n
        else:
            w = covariant_tensor("w", n, r=1, m=1).builder
            members.append(_mk("u1", lambda v: v.u(1), (field_coord(1),), space))
            for k in range(1, n + 1):
                if k == n:
                    continue
                members.append(_mk(
                    f"S{k}(w)/(du.du)^{2 * k}",
                    (lambda k: lambda v:
                     mat_trace(_tensor_power(v, ("w", 1), w, signs, k))
                     / _power(sum_prod(_gvec(v, 1, idx), _gvec(v, 1, idx)), 2 * k))(k),
                    deps, space))
            expected = n
        return BasisFamily(f"conformal n={n} lam={lam:g}", spec,
                           tuple(members), expected, space, deps)
    # several fields
    if lam != 0:
        thetas = {r: _theta_builder_euclid(n, m, lam, r) for r in range(1, m + 1)}

        def tpow(v, r, k):
            return _tensor_power(v, ("th", r), thetas[r], signs, k)

        for r in range(2, m + 1):
            members.append(_mk(
                f"u{r}/u1", (lambda r: lambda v: v.u(r) / v.u(1))(r),
                deps, space))
        for k in range(1, n + 1):
            expo = k * (2.0 / lam - 1.0)
            members.append(_mk(
                f"S{k}(theta1)*u1^{expo:g}",
                (lambda k, expo: lambda v:
                 mat_trace(tpow(v, 1, k)) * _power(v.u(1), expo))(k, expo),
                deps, space))
        for r in range(2, m + 1):
            for k in range(1, n + 1):
                expo = k * (2.0 / lam - 1.0)
                for j in range(1, k + 1):
                    members.append(_mk(
                        f"S{j},{k}(theta{r},theta1)*u1^{expo:g}",
                        (lambda j, k, r, expo: lambda v:
                         (mat_trace(tpow(v, r, k)) if j == k else
                          mat_trace(mat_mul(tpow(v, r, j), tpow(v, 1, k - j))))
                         * _power(v.u(1), expo))(j, k, r, expo),
                        deps, space))
        for r in range(2, m + 1):
            for k in range(1, n + 1):
                expo = k * (2.0 / lam - 1.0) - 1.0
                members.append(_mk(
                    f"R{k}(thvec{r},theta1)*u1^{expo:g}",
                    (lambda k, r, expo: lambda v: power_form(
                        [v.du(r, i) / v.u(r) - v.du(1, i) / v.u(1) for i in idx],
                        _tensor_cached(v, ("th", 1), thetas[1]),
                        met, k) * _power(v.u(1), expo))(k, r, expo),
                    deps, space))
    else:
        ws = {r: covariant_tensor("w", n, r=r, m=m).builder
              for r in range(1, m + 1)}

        def wpow(v, r, k):
            return _tensor_power(v, ("w", r), ws[r], signs, k)

        def gradsq(v):
            g1 = _gvec(v, 1, idx)
            return sum_prod(g1, g1)

        for r in range(1, m + 1):
            members.append(_mk(
                f"u{r}", (lambda r: lambda v: v.u(r))(r),
                (field_coord(r),), space))
        for k in range(1, n + 1):
            if k == n:
                continue
            members.append(_mk(
                f"S{k}(w1)/(du.du)^{2 * k}",
                (lambda k: lambda v: mat_trace(wpow(v, 1, k))
                 / _power(gradsq(v), 2 * k))(k), deps, space))
        for r in range(2, m + 1):
            for k in range(1, n + 1):
                for j in range(0, k):
                    members.append(_mk(
                        f"S{j},{k}(w1,w{r})/(du.du)^{2 * k}",
                        (lambda j, k, r: lambda v:
                         (mat_trace(wpow(v, r, k)) if j == 0 else
                          mat_trace(mat_mul(wpow(v, 1, j), wpow(v, r, k - j))))
                         / _power(gradsq(v), 2 * k))(j, k, r),
                        deps, space))
        for r in range(2, m + 1):
            for k in range(1, n + 1):
                members.append(_mk(
                    f"R{k}(du{r},w1)*(du.du)^{1 - 2 * k}",
                    (lambda k, r: lambda v: power_form(
                        _gvec(v, r, idx), _tensor_cached(v, ("w", 1), ws[1]),
                        met, k) * _power(gradsq(v), 1 - 2 * k))(k, r),
                    deps, space))
    expected = len(members)
    return BasisFamily(f"conformal n={n} m={m} lam={lam:g}", spec,
                       tuple(members), expected, space, deps)


def _basis_poincare(spec):
    n, m = spec.n, spec.m
    nb = n + 1
    met = minkowski(nb)
    signs = met.signs
    idx = tuple(range(nb))
    space = JetSpace(nb, m, REAL, met)
    deps = _dep_coords(nb, m, ("field", "d1", "d2"))
    kmax = n + 1
    members = []
    for r in range(1, m + 1):
        members.append(_mk(f"u{r}", (lambda r: lambda v: v.u(r))(r),
                           (field_coord(r),), space))
    for k in range(1, kmax + 1):
        members.append(_mk(
            f"S{k}(U1)", (lambda k: lambda v: _S(v, 1, idx, signs, k))(k),
            deps, space))
    for r in range(2, m + 1):
        for k in range(1, kmax + 1):
            for j in range(1, k + 1):
                members.append(_mk(
                    f"S{j},{k}(U{r},U1)",
                    (lambda j, k, r: lambda v: _Sjk(v, r, 1, idx, signs, j, k))(j, k, r),
                    deps, space))
    for r in range(1, m + 1):
        for k in range(1, kmax + 1):
            members.append(_mk(
                f"R{k}(du{r},U1)",
                (lambda k, r: lambda v: _R(v, [v.du(r, i) for i in idx],
                                           1, idx, signs, k))(k, r),
                deps, space))
    expected = m * (2 * n + 3) + (m - 1) * n * (n + 1) // 2
    return BasisFamily(f"poincare n={n} m={m}", spec, tuple(members),
                       expected, space, deps)


def _basis_extended_poincare(spec):
    n, m, lam = spec.n, spec.m, spec.lam
    nb = n + 1
    met = minkowski(nb)
    signs = met.signs
    idx = tuple(range(nb))
    space = JetSpace(nb, m, REAL, met, positive_fields=True)
    deps = _dep_coords(nb, m, ("field", "d1", "d2"))
    kmax = n + 1
    members = []
    if lam == 0:
        def tr1(v):
            return _S(v, 1, idx, signs, 1)

        for r in range(1, m + 1):
            members.append(_mk(f"u{r}", (lambda r: lambda v: v.u(r))(r),
                               (field_coord(r),), space))
        for k in range(2, kmax + 1):
            members.append(_mk(
                f"S{k}(U1)/tr^{k}",
                (lambda k: lambda v: _S(v, 1, idx, signs, k)
                 / _power(tr1(v), k))(k), deps, space))
        for r in range(2, m + 1):
            for k in range(1, kmax + 1):
                for j in range(1, k + 1):
                    members.append(_mk(
                        f"S{j},{k}(U{r},U1)/tr^{k}",
                        (lambda j, k, r: lambda v: _Sjk(v, r, 1, idx, signs, j, k)
                         / _power(tr1(v), k))(j, k, r), deps, space))
        for r in range(1, m + 1):
            for k in range(1, kmax + 1):
                members.append(_mk(
                    f"R{k}(du{r},U1)/tr^{k}",
                    (lambda k, r: lambda v: _R(v, [v.du(r, i) for i in idx],
                                               1, idx, signs, k)
                     / _power(tr1(v), k))(k, r), deps, space))
    else:
        for r in range(2, m + 1):
            members.append(_mk(
                f"u{r}/u1", (lambda r: lambda v: v.u(r) / v.u(1))(r),
                deps, space))
        for k in range(1, kmax + 1):
            expo = k * (2.0 / lam - 1.0)
            members.append(_mk(
                f"S{k}(U1)*u1^{expo:g}",
                (lambda k, expo: lambda v: _S(v, 1, idx, signs, k)
                 * _power(v.u(1), expo))(k, expo), deps, space))
        for r in range(2, m + 1):
            for k in range(1, kmax + 1):
                expo = k * (2.0 / lam - 1.0)
                for j in range(1, k + 1):
                    members.append(_mk(
                        f"S{j},{k}(U{r},U1)*u1^{expo:g}",
                        (lambda j, k, r, expo: lambda v:
                         _Sjk(v, r, 1, idx, signs, j, k) * _power(v.u(1), expo))(j, k, r, expo),
                        deps, space))
        for r in range(1, m + 1):
            for k in range(1, kmax + 1):
                expo = 2.0 * k / lam - k - 1.0
                members.append(_mk(
                    f"R{k}(du{r},U1)*u1^{expo:g}",
                    (lambda k, r, expo: lambda v:
                     _R(v, [v.du(r, i) for i in idx], 1, idx, signs, k)
                     * _power(v.u(1), expo))(k, r, expo), deps, space))
    expected = len(members)
    return BasisFamily(f"extended-poincare n={n} m={m} lam={lam:g}", spec,
                       tuple(members), expected, space, deps)


def _basis_conformal_minkowski(spec):
    n, m, lam = spec.n, spec.m, spec.lam
    nb = n + 1
    met = minkowski(nb)
    signs = met.signs
    idx = tuple(range(nb))
    space = JetSpace(nb, m, REAL, met, positive_fields=True)
    deps = _dep_coords(nb, m, ("field", "d1", "d2"))
    kmax = n + 1
    members = []
    if lam != 0:
        thetas = {r: covariant_tensor("theta_minkowski", n, lam=lam, r=r, m=m).builder
                  for r in range(1, m + 1)}

        def tpow(v, r, k):
            return _tensor_power(v, ("thm", r), thetas[r], signs, k)

        for r in range(2, m + 1):
            members.append(_mk(
                f"u{r}/u1", (lambda r: lambda v: v.u(r) / v.u(1))(r),
                deps, space))
        for k in range(1, kmax + 1):
            expo = k * (2.0 / lam - 1.0)
            members.append(_mk(
                f"S{k}(theta1)*u1^{expo:g}",
                (lambda k, expo: lambda v: mat_trace(tpow(v, 1, k))
                 * _power(v.u(1), expo))(k, expo), deps, space))
        for r in range(2, m + 1):
            for k in range(1, kmax + 1):
                expo = k * (2.0 / lam - 1.0)
                for j in range(1, k + 1):
                    members.append(_mk(
                        f"S{j},{k}(theta{r},theta1)*u1^{expo:g}",
                        (lambda j, k, r, expo: lambda v:
                         (mat_trace(tpow(v, r, k)) if j == k else
                          mat_trace(mat_mul(tpow(v, r, j), tpow(v, 1, k - j))))
                         * _power(v.u(1), expo))(j, k, r, expo), deps, space))
        for r in range(2, m + 1):
            for k in range(1, kmax + 1):
                expo = k * (2.0 / lam - 1.0) - 1.0
                members.append(_mk(
                    f"R{k}(thvec{r},theta1)*u1^{expo:g}",
                    (lambda k, r, expo: lambda v: power_form(
                        [v.du(r, i) / v.u(r) - v.du(1, i) / v.u(1) for i in idx],
                        _tensor_cached(v, ("thm", 1), thetas[1]), met, k)
                     * _power(v.u(1), expo))(k, r, expo), deps, space))
    else:
        ws = {r: covariant_tensor("w_minkowski", n, r=r, m=m).builder
              for r in range(1, m + 1)}

        def wpow(v, r, k):
            return _tensor_power(v, ("wm", r), ws[r], signs, k)

        def gradsq(v):
            du = [v.du(1, i) for i in idx]
            acc = 0.0
            for i in idx:
                acc = acc + signs[i] * du[i] * du[i]
            return acc

        for r in range(1, m + 1):
            members.append(_mk(f"u{r}", (lambda r: lambda v: v.u(r))(r),
                               (field_coord(r),), space))
        for k in range(1, kmax + 1):
            if k == nb:
                continue
            members.append(_mk(
                f"S{k}(w1)/(du.du)^{2 * k}",
                (lambda k: lambda v: mat_trace(wpow(v, 1, k))
                 / _power(gradsq(v), 2 * k))(k), deps, space))
        for r in range(2, m + 1):
            for k in range(1, kmax + 1):
                for j in range(1, k + 1):
                    members.append(_mk(
                        f"S{j},{k}(w{r},w1)/(du.du)^{2 * k}",
                        (lambda j, k, r: lambda v:
                         (mat_trace(wpow(v, r, k)) if j == k else
                          mat_trace(mat_mul(wpow(v, r, j), wpow(v, 1, k - j))))
                         / _power(gradsq(v), 2 * k))(j, k, r), deps, space))
        for r in range(2, m + 1):
            for k in range(1, kmax + 1):
                members.append(_mk(
                    f"R{k}(du{r},w1)*(du.du)^{1 - 2 * k}",
                    (lambda k, r: lambda v: power_form(
                        [v.du(r, i) for i in idx],
                        _tensor_cached(v, ("wm", 1), ws[1]), met, k)
                     * _power(gradsq(v), 1 - 2 * k))(k, r), deps, space))
    expected = len(members)
    return BasisFamily(f"conformal-minkowski n={n} m={m} lam={lam:g}", spec,
                       tuple(members), expected, space, deps)


# Galilei families (log-substituted jets: field 1 is log u / log psi) -------


def _spatial(n):
    return tuple(range(1, n + 1))


def _phi_t(v, r=1):
    return v.du(r, 0)


def _phi_vec(v, n, r=1):
    return [v.du(r, a) for a in _spatial(n)]


def _phi_t_vec(v, n, r=1):
    return [v.ddu(r, a, 0) for a in _spatial(n)]


def _phi_hess(v, n, r=1):
    sp = _spatial(n)
    return [[v.ddu(r, a, b) for b in sp] for a in sp]


def _basis_galilei_real(spec, hat_variant):
    n, mu = spec.n, spec.mu
    nb = n + 1
    met = euclidean(n)
    signs = met.signs
    sp = _spatial(n)
    space = JetSpace(nb, 1, REAL, met)
    deps = _dep_coords(nb, 1, ("d1", "d2"))

    def m1(v):
        du = _phi_vec(v, n)
        return 2.0 * mu * _phi_t(v) + sum_prod(du, du)

    def m2(v):
        du = _phi_vec(v, n)
        dut = _phi_t_vec(v, n)
        acc = mu * mu * v.ddu(1, 0, 0) + 2.0 * mu * sum_prod(du, dut)
        for ai, a in enumerate(sp):
            for bi, b in enumerate(sp):
                acc = acc + du[ai] * du[bi] * v.ddu(1, a, b)
        return acc

    def theta(v):
        du = _phi_vec(v, n)
        return [mu * v.ddu(1, a, 0)
                + sum_prod(du, [v.ddu(1, a, b) for b in sp]) for a in sp]

    def r_k(v, k):
        return power_form(theta(v), _phi_hess(v, n), met, k)

    def s_k(v, k):
        return _S(v, 1, sp, signs, k)

    if spec.name == "AG_I":
        members = [_mk("M1", m1, deps, space), _mk("M2", m2, deps, space)]
        members += [_mk(f"R{k}", (lambda k: lambda v: r_k(v, k))(k), deps, space)
                    for k in range(1, n + 1)]
        members += [_mk(f"S{k}", (lambda k: lambda v: s_k(v, k))(k), deps, space)
                    for k in range(1, n + 1)]
        return BasisFamily(f"galilei n={n} mu={mu:g}", spec, tuple(members),
                           2 * n + 2, space, deps)

    if spec.name == "AG1_I":
        members = [_mk("M2/M1^2", lambda v: m2(v) / _power(m1(v), 2),
                       deps, space)]
        members += [_mk(f"R{k}/M1^{k + 2}",
                        (lambda k: lambda v: r_k(v, k) / _power(m1(v), k + 2))(k),
                        deps, space) for k in range(1, n + 1)]
        members += [_mk(f"S{k}/M1^{k}",
                        (lambda k: lambda v: s_k(v, k) / _power(m1(v), k))(k),
                        deps, space) for k in range(1, n + 1)]
        return BasisFamily(f"galilei-dilation n={n} mu={mu:g}", spec,
                           tuple(members), 2 * n + 1, space, deps)

    # AG2_I: projective combinations built from the hatted sums
    def tr_h(v):
        return _S(v, 1, sp, signs, 1)

    def n1(v):
        return m1(v) + tr_h(v)

    def n2(v):
        du = _phi_vec(v, n)
        dut = _phi_t_vec(v, n)
        tr = tr_h(v)
        acc = mu * mu * v.ddu(1, 0, 0)
        acc = acc + 2.0 * mu * (_phi_t(v) * tr / n + sum_prod(du, dut))
        for ai, a in enumerate(sp):
            for bi, b in enumerate(sp):
                acc = acc + du[ai] * du[bi] * v.ddu(1, a, b)
        acc = acc + sum_prod(du, du) * tr / n + tr * tr / n
        return acc

    def r_hat(v, k):
        # R_0 is taken as zero: the sum effectively starts at l = 1
        tr = tr_h(v)
        acc = 0.0
        for l in range(1, k + 1):
            expo = (k - 1) if hat_variant == "printed" else (k - l)
            acc = acc + (r_k(v, l) * _power(tr, expo)
                         * ((-n) ** l) * math.comb(k, l))
        return acc

    def s_hat(v, k):
        tr = tr_h(v)
        acc = 0.0
        for l in range(0, k + 1):
            s_l = float(n) if l == 0 else s_k(v, l)
            coef = ((-n) ** l) * math.factorial(k - 1) * (k + 1) \
                / (math.factorial(l + 1) * math.factorial(k - l))
            acc = acc + coef * s_l * _power(tr, k - l)
        return acc

    members = [_mk("N2/N1^2", lambda v: n2(v) / _power(n1(v), 2), deps, space)]
    members += [_mk(f"Rhat{k}/N1^{k + 2}",
                    (lambda k: lambda v: r_hat(v, k) / _power(n1(v), k + 2))(k),
                    deps, space) for k in range(1, n + 1)]
    members += [_mk(f"Shat{k}/N1^{k}",
                    (lambda k: lambda v: s_hat(v, k) / _power(n1(v), k))(k),
                    deps, space) for k in range(2, n + 1)]
    return BasisFamily(f"galilei-projective n={n} mu={mu:g} [{hat_variant}]",
                       spec, tuple(members), 2 * n, space, deps,
                       notes="hatted sums implemented as printed; see "
                             "per-member verdicts")


def _basis_galilei_real_mu0(spec):
    n = spec.n
    nb = n + 1
    met = euclidean(n)
    signs = met.signs
    sp = _spatial(n)
    space = JetSpace(nb, 1, REAL, met)
    deps = _dep_coords(nb, 1, ("d1", "d2"))

    def theta(v):
        key = ("implicit_theta", 1)
        cached = v.cache.get(key)
        if cached is None:
            cached = solve_linear(_phi_hess(v, n), _phi_t_vec(v, n), "Hessian")
            v.cache[key] = cached
        return cached

    def m1(v):
        return _phi_t(v) - sum_prod(_phi_vec(v, n), theta(v))

    def m2(v):
        return v.ddu(1, 0, 0) - sum_prod(_phi_t_vec(v, n), theta(v))

    def r_k(v, k):
        return power_form(_phi_vec(v, n), _phi_hess(v, n), met, k)

    def s_k(v, k):
        return _S(v, 1, sp, signs, k)

    if spec.name == "AG_I":
        members = [_mk("M1", m1, deps, space), _mk("M2", m2, deps, space)]
        members += [_mk(f"R{k}", (lambda k: lambda v: r_k(v, k))(k), deps, space)
                    for k in range(1, n + 1)]
        members += [_mk(f"S{k}", (lambda k: lambda v: s_k(v, k))(k), deps, space)
                    for k in range(1, n + 1)]
        return BasisFamily(f"galilei n={n} mu=0", spec, tuple(members),
                           2 * n + 2, space, deps)

    if spec.name == "AG1_I":
        members = [_mk("M1^2/M2", lambda v: _power(m1(v), 2) / m2(v),
                       deps, space)]
        members += [_mk(f"R{k}/M1^{k}",
                        (lambda k: lambda v: r_k(v, k) / _power(m1(v), k))(k),
                        deps, space) for k in range(1, n + 1)]
        members += [_mk(f"S{k}/M1^{k}",
                        (lambda k: lambda v: s_k(v, k) / _power(m1(v), k))(k),
                        deps, space) for k in range(1, n + 1)]
        return BasisFamily(f"galilei-dilation n={n} mu=0", spec,
                           tuple(members), 2 * n + 1, space, deps)

    lam = spec.lam

    def big_m(v):
        rinv = v.cache.get(("rinv", 1))
        if rinv is None:
            rinv = mat_inverse(_phi_hess(v, n), "Hessian")
            v.cache[("rinv", 1)] = rinv
        du = _phi_vec(v, n)
        quad = 0.0
        for a in range(n):
            for b in range(n):
                quad = quad + du[a] * du[b] * rinv[a][b]
        return _power(m1(v), 2) + m2(v) * (lam + quad)

    members = [_mk(f"R{k}/M^{k}/2",
                   (lambda k: lambda v: r_k(v, k) / _power(big_m(v), k / 2.0))(k),
                   deps, space) for k in range(1, n + 1)]
    members += [_mk(f"S{k}/M^{k}/2",
                    (lambda k: lambda v: s_k(v, k) / _power(big_m(v), k / 2.0))(k),
                    deps, space) for k in range(1, n + 1)]
    return BasisFamily(f"galilei-projective n={n} mu=0 lam={lam:g}", spec,
                       tuple(members), 2 * n, space, deps)


def galilei_mu0_determinant_family(n: int) -> BasisFamily:
    """Variant of the mu=0 family with bordered-determinant leaders."""
    spec = AlgebraSpec("AG_I", n, mu=0.0, rep="log")
    fam = _basis_galilei_real_mu0(spec)
    nb = n + 1
    space, deps = fam.space, fam.deps
    sp = _spatial(n)

    def mhat1(v):
        top = [_phi_t(v)] + _phi_vec(v, n)
        rows = [top]
        for a in sp:
            rows.append([v.ddu(1, a, 0)] + [v.ddu(1, a, b) for b in sp])
        return determinant(rows)

    def mhat2(v):
        top = [v.ddu(1, 0, 0)] + _phi_t_vec(v, n)
        rows = [top]
        for a in sp:
            rows.append([v.ddu(1, a, 0)] + [v.ddu(1, a, b) for b in sp])
        return determinant(rows)

    members = [_mk("Mhat1", mhat1, deps, space),
               _mk("Mhat2", mhat2, deps, space)]
    members += list(fam.members[2:])
    return BasisFamily(f"galilei n={n} mu=0 (determinants)", spec,
                       tuple(members), fam.expected_count, space, deps)


def _basis_galilei_complex(spec, hat_variant):
    n, mass = spec.n, spec.mass
    nb = n + 1
    met = euclidean(n)
    signs = met.signs
    sp = _spatial(n)
    im = 1j * mass
    space = JetSpace(nb, 2, COMPLEX, met)
    deps_all = _dep_coords(nb, 2, ("field", "d1", "d2"))
    deps_jets = _dep_coords(nb, 2, ("d1", "d2"))

    def phases(v):
        return v.u(1) + v.u(2)

    def m1(v, r, sgn):
        du = _phi_vec(v, n, r)
        return 2.0 * sgn * im * _phi_t(v, r) + sum_prod(du, du)

    def m2(v, r, sgn):
        du = _phi_vec(v, n, r)
        dut = _phi_t_vec(v, n, r)
        acc = -mass * mass * v.ddu(r, 0, 0) + 2.0 * sgn * im * sum_prod(du, dut)
        for ai, a in enumerate(sp):
            for bi, b in enumerate(sp):
                acc = acc + du[ai] * du[bi] * v.ddu(r, a, b)
        return acc

    def theta(v, r, sgn):
        du = _phi_vec(v, n, r)
        return [-sgn * im * v.ddu(r, a, 0)
                + sum_prod(du, [v.ddu(r, a, b) for b in sp]) for a in sp]

    def r1(v, k):
        return power_form(theta(v, 1, 1.0), _phi_hess(v, n, 1), met, k)

    def r2(v, k):
        return power_form(theta(v, 2, -1.0), _phi_hess(v, n, 1), met, k)

    def r3(v, k):
        vec = [v.du(1, a) + v.du(2, a) for a in sp]
        return power_form(vec, _phi_hess(v, n, 1), met, k)

    def s_jk(v, j, k):
        return _Sjk(v, 1, 2, sp, signs, j, k)

    sjk_range = [(j, k) for k in range(1, n + 1) for j in range(0, k + 1)]

    if spec.name == "AG_II":
        members = [_mk("phi+phi*", phases, deps_all, space),
                   _mk("M1", lambda v: m1(v, 1, 1.0), deps_jets, space),
                   _mk("M1*", lambda v: m1(v, 2, -1.0), deps_jets, space),
                   _mk("M2", lambda v: m2(v, 1, 1.0), deps_jets, space),
                   _mk("M2*", lambda v: m2(v, 2, -1.0), deps_jets, space)]
        members += [_mk(f"S{j},{k}", (lambda j, k: lambda v: s_jk(v, j, k))(j, k),
                        deps_jets, space) for j, k in sjk_range]
        members += [_mk(f"R{k}^1", (lambda k: lambda v: r1(v, k))(k),
                        deps_jets, space) for k in range(1, n + 1)]
        members += [_mk(f"R{k}^2", (lambda k: lambda v: r2(v, k))(k),
                        deps_jets, space) for k in range(1, n + 1)]
        members += [_mk(f"R{k}^3", (lambda k: lambda v: r3(v, k))(k),
                        deps_jets, space) for k in range(1, n + 1)]
        return BasisFamily(f"schroedinger-galilei n={n} mass={mass:g}", spec,
                           tuple(members), 5 + len(sjk_range) + 3 * n,
                           space, deps_all)

    if spec.name == "AG1_II":
        lam = spec.lam
        members = [
            _mk("M1*/M1", lambda v: m1(v, 2, -1.0) / m1(v, 1, 1.0),
                deps_jets, space),
            _mk("M2/M1^2", lambda v: m2(v, 1, 1.0) / _power(m1(v, 1, 1.0), 2),
                deps_jets, space),
            _mk("M2*/M1^2", lambda v: m2(v, 2, -1.0) / _power(m1(v, 1, 1.0), 2),
                deps_jets, space),
        ]
        members += [_mk(f"R{k}^1/M1^{k + 2}",
                        (lambda k: lambda v: r1(v, k) / _power(m1(v, 1, 1.0), k + 2))(k),
                        deps_jets, space) for k in range(1, n + 1)]
        members += [_mk(f"R{k}^2/M1^{k + 2}",
                        (lambda k: lambda v: r2(v, k) / _power(m1(v, 1, 1.0), k + 2))(k),
                        deps_jets, space) for k in range(1, n + 1)]
        members += [_mk(f"R{k}^3/M1^{k}",
                        (lambda k: lambda v: r3(v, k) / _power(m1(v, 1, 1.0), k))(k),
                        deps_jets, space) for k in range(1, n + 1)]
        members += [_mk(f"S{j},{k}/M1^{k}",
                        (lambda j, k: lambda v: s_jk(v, j, k)
                         / _power(m1(v, 1, 1.0), k))(j, k),
                        deps_jets, space) for j, k in sjk_range]
        if lam == 0:
            members.append(_mk("phi+phi*", phases, deps_all, space))
        else:
            members.append(_mk(
                f"M1*e^(2/{lam:g})(phi+phi*)",
                lambda v: m1(v, 1, 1.0) * dexp((2.0 / lam) * phases(v)),
                deps_all, space))
        return BasisFamily(
            f"schroedinger-galilei-dilation n={n} mass={mass:g} lam={lam:g}",
            spec, tuple(members), 4 + 3 * n + len(sjk_range), space, deps_all)

    # AG2_II, mass != 0, lam = -n/2
    def tr_h(v, r):
        return _S(v, r, sp, signs, 1)

    def n1(v, r, sgn):
        du = _phi_vec(v, n, r)
        return 2.0 * sgn * im * _phi_t(v, r) + tr_h(v, r) + sum_prod(du, du)

    def n2(v, r, sgn):
        du = _phi_vec(v, n, r)
        dut = _phi_t_vec(v, n, r)
        tr = tr_h(v, r)
        acc = -mass * mass * v.ddu(r, 0, 0)
        acc = acc + 2.0 * sgn * im * (sum_prod(du, dut) + _phi_t(v, r) * tr / n)
        for ai, a in enumerate(sp):
            for bi, b in enumerate(sp):
                acc = acc + du[ai] * du[bi] * v.ddu(r, a, b)
        acc = acc + sum_prod(du, du) * tr / n + tr * tr / n
        return acc

    def s_rl(v, r, l):
        if r > l:
            return 0.0
        if l == 0:
            return float(n)
        return s_jk(v, r, l)

    def s_hat_jk(v, j, k):
        tr1 = tr_h(v, 1)
        tr2 = tr_h(v, 2)
        acc = 0.0
        for l in range(0, k + 1):
            for r in range(0, j + 1):
                c2 = math.comb(k, l + 1 - r) if 0 <= l + 1 - r <= k else 0
                if c2 == 0:
                    continue
                term = s_rl(v, r, l)
                if isinstance(term, float) and term == 0.0:
                    continue
                acc = acc + (term * ((-n) ** l) * math.comb(j, r) * c2
                             * _power(tr1, j - r) * _power(tr2, k - l - j + r))
        acc = acc + k * _power(tr1, j) * _power(tr2, k - j - 1)
        return acc

    def r_hat(v, rfun, k):
        tr1 = tr_h(v, 1)
        acc = 0.0
        for j in range(1, k + 1):
            acc = acc + (rfun(v, j) * _power(tr1, k - j)
                         * ((-n) ** j) * math.comb(k, j))
        return acc

    members = [
        _mk(f"N1*e^(-4/{n})(phi+phi*)",
            lambda v: n1(v, 1, 1.0) * dexp((-4.0 / n) * phases(v)),
            deps_all, space),
        _mk("N1/N1*", lambda v: n1(v, 1, 1.0) / n1(v, 2, -1.0),
            deps_jets, space),
        _mk("N2/N1*", lambda v: n2(v, 1, 1.0) / n1(v, 2, -1.0),
            deps_jets, space),
        _mk("N2*/N1*", lambda v: n2(v, 2, -1.0) / n1(v, 2, -1.0),
            deps_jets, space),
    ]
    members += [_mk(f"Rhat{k}^1/N1^{k + 2}",
                    (lambda k: lambda v: r_hat(v, r1, k)
                     / _power(n1(v, 1, 1.0), k + 2))(k),
                    deps_jets, space) for k in range(1, n + 1)]
    members += [_mk(f"Rhat{k}^2/N1^{k + 2}",
                    (lambda k: lambda v: r_hat(v, r2, k)
                     / _power(n1(v, 1, 1.0), k + 2))(k),
                    deps_jets, space) for k in range(1, n + 1)]
    members += [_mk(f"Rhat{k}^3/N1^{k}",
                    (lambda k: lambda v: r_hat(v, r3, k)
                     / _power(n1(v, 1, 1.0), k))(k),
                    deps_jets, space) for k in range(1, n + 1)]
    members += [_mk(f"Shat{j},{k}/N1^{k}",
                    (lambda j, k: lambda v: s_hat_jk(v, j, k)
                     / _power(n1(v, 1, 1.0), k))(j, k),
                    deps_jets, space) for j, k in sjk_range]
    return BasisFamily(
        f"schroedinger-galilei-projective n={n} mass={mass:g} [{hat_variant}]",
        spec, tuple(members), 4 + 3 * n + len(sjk_range), space, deps_all,
        notes="hatted sums implemented as printed; see per-member verdicts")


def _basis_galilei_complex_mass0(spec):
    n, lam = spec.n, spec.lam
    nb = n + 1
    met = euclidean(n)
    signs = met.signs
    sp = _spatial(n)
    space = JetSpace(nb, 2, COMPLEX, met)
    deps_all = _dep_coords(nb, 2, ("field", "d1", "d2"))
    deps_jets = _dep_coords(nb, 2, ("d1", "d2"))

    def rinv(v, r):
        key = ("rinv", r)
        cached = v.cache.get(key)
        if cached is None:
            cached = mat_inverse(_phi_hess(v, n, r), "Hessian")
            v.cache[key] = cached
        return cached

    def theta(v, r):
        key = ("th0", r)
        cached = v.cache.get(key)
        if cached is None:
            cached = solve_linear(_phi_hess(v, n, r), _phi_t_vec(v, n, r),
                                  "Hessian")
            v.cache[key] = cached
        return cached

    def quad(v, r):
        du = _phi_vec(v, n, r)
        ri = rinv(v, r)
        acc = 0.0
        for a in range(n):
            for b in range(n):
                acc = acc + du[a] * du[b] * ri[a][b]
        return acc

    def n1(v, r):
        du = _phi_vec(v, n, r)
        th = theta(v, r)
        lead = _phi_t(v, r) - sum_prod(th, du)
        sec = v.ddu(r, 0, 0) - sum_prod(th, _phi_t_vec(v, n, r))
        return _power(lead, 2) + sec * (lam + quad(v, r))

    def n2(v):
        th1, th2 = theta(v, 1), theta(v, 2)
        lead1 = _phi_t(v, 1) - sum_prod(_phi_vec(v, n, 1), th1)
        lead2 = _phi_t(v, 2) - sum_prod(_phi_vec(v, n, 2), th2)
        return lead1 * quad(v, 2) - lead2 * quad(v, 1)

    def n3(v):
        du1 = _phi_vec(v, n, 1)
        a = [[lam * v.ddu(1, sp[ai], sp[bi]) + du1[ai] * du1[bi]
              for bi in range(n)] for ai in range(n)]
        rhs = [du1[bi] * _phi_t(v, 1) + lam * v.ddu(1, sp[bi], 0)
               for bi in range(n)]
        tau = solve_linear([[a[ai][bi] for ai in range(n)] for bi in range(n)],
                           rhs, "tau system")
        diff = [v.du(1, x) - v.du(2, x) for x in sp]
        return (_phi_t(v, 1) - _phi_t(v, 2)) - sum_prod(tau, diff)

    def r_l(v, which, k):
        if which == 1:
            vec = _phi_vec(v, n, 1)
        elif which == 2:
            vec = _phi_vec(v, n, 2)
        elif which == 3:
            th1, th2 = theta(v, 1), theta(v, 2)
            vec = [th1[a] - th2[a] for a in range(n)]
        else:
            th1, th2 = theta(v, 1), theta(v, 2)
            du1 = _phi_vec(v, n, 1)
            du2 = _phi_vec(v, n, 2)
            r1m, r2m = rinv(v, 1), rinv(v, 2)
            lead = _phi_t(v, 1) - sum_prod(th1, du1)
            vec = []
            for a in range(n):
                mixed = sum_prod(r1m[a], du2) - sum_prod(r2m[a], du1)
                coupling = 0.0
                for b in range(n):
                    for d in range(n):
                        coupling = coupling + du1[b] * v.ddu(1, sp[a], sp[d]) \
                            * r1m[b][d]
                vec.append(lead * mixed - coupling * (th1[a] - th2[a]))
        return power_form(vec, _phi_hess(v, n, 1), met, k)

    def s_jk(v, j, k):
        return _Sjk(v, 1, 2, sp, signs, j, k)

    sjk_range = [(j, k) for k in range(1, n + 1) for j in range(0, k + 1)]
    members = []
    if lam == 0:
        members.append(_mk("phi+phi*", lambda v: v.u(1) + v.u(2),
                           deps_all, space))
        members.append(_mk("N1^2/N2^2",
                           lambda v: _power(n1(v, 1), 2) / _power(n2(v), 2),
                           deps_jets, space))
        members.append(_mk("N1*^2/N2",
                           lambda v: _power(n1(v, 2), 2) / n2(v),
                           deps_jets, space))
        members += [_mk(f"S{j},{k}^2/N1^{k}",
                        (lambda j, k: lambda v: _power(s_jk(v, j, k), 2)
                         / _power(n1(v, 1), k))(j, k),
                        deps_jets, space) for j, k in sjk_range]
        for which in (1, 2, 4):
            members += [_mk(f"R{k}^{which}^2*N1^{-k - 1}",
                            (lambda k, w: lambda v: _power(r_l(v, w, k), 2)
                             * _power(n1(v, 1), -k - 1))(k, which),
                            deps_jets, space) for k in range(1, n + 1)]
    else:
        members.append(_mk(
            f"N1*e^(4/{lam:g})(phi+phi*)",
            lambda v: n1(v, 1) * dexp((4.0 / lam) * (v.u(1) + v.u(2))),
            deps_all, space))
        members.append(_mk("N1*/N1", lambda v: n1(v, 2) / n1(v, 1),
                           deps_jets, space))
        members.append(_mk(
            f"N3*e^(3/{lam:g})(phi+phi*)",
            lambda v: n3(v) * dexp((3.0 / lam) * (v.u(1) + v.u(2))),
            deps_all, space))
        for which in (1, 2, 3):
            members += [_mk(f"R{k}^{which}^2/N1^{k}",
                            (lambda k, w: lambda v: _power(r_l(v, w, k), 2)
                             / _power(n1(v, 1), k))(k, which),
                            deps_jets, space) for k in range(1, n + 1)]
        members += [_mk(f"S{j},{k}^2/N1^{k}",
                        (lambda j, k: lambda v: _power(s_jk(v, j, k), 2)
                         / _power(n1(v, 1), k))(j, k),
                        deps_jets, space) for j, k in sjk_range]
    return BasisFamily(
        f"schroedinger-galilei-projective n={n} mass=0 lam={lam:g}", spec,
        tuple(members), len(members), space, deps_all,
        notes="implemented as printed; see per-member verdicts")


# special families used by independence/completeness checks -----------------


def two_matrix_trace_family(n: int) -> BasisFamily:
    """Mixed traces tr(U^j V^(k-j)), j=0..k, k=1..n, of the two Hessians of
    an (n, 2) jet; a maximal independent set of rotation invariants."""
    spec = AlgebraSpec("AO", n, m=2)
    met = euclidean(n)
    signs = met.signs
    idx = tuple(range(n))
    space = JetSpace(n, 2, REAL, met)
    deps = _dep_coords(n, 2, ("d2",))
    members = []
    for k in range(1, n + 1):
        for j in range(0, k + 1):
            members.append(_mk(
                f"S{j},{k}(U,V)",
                (lambda j, k: lambda v: _Sjk(v, 1, 2, idx, signs, j, k))(j, k),
                deps, space))
    return BasisFamily(f"two-matrix traces n={n}", spec, tuple(members),
                       n * (n + 3) // 2, space, deps)


def rotation_pair_family(n: int) -> BasisFamily:
    """Rotation invariants of two vector/tensor pairs (du^r, ddu^r)."""
    spec = AlgebraSpec("AO", n, m=2)
    met = euclidean(n)
    signs = met.signs
    idx = tuple(range(n))
    space = JetSpace(n, 2, REAL, met)
    deps = _dep_coords(n, 2, ("d1", "d2"))
    members = []
    for r in (1, 2):
        for k in range(1, n + 1):
            members.append(_mk(
                f"R{k}(du{r},U{r})",
                (lambda k, r: lambda v: _R(v, _gvec(v, r, idx), r, idx, signs, k))(k, r),
                deps, space))
    for k in range(1, n + 1):
        for j in range(0, k + 1):
            members.append(_mk(
                f"S{j},{k}(U1,U2)",
                (lambda j, k: lambda v: _Sjk(v, 1, 2, idx, signs, j, k))(j, k),
                deps, space))
    return BasisFamily(f"rotation pairs n={n}", spec, tuple(members),
                       n * (n + 7) // 2, space, deps)


# --------------------------------------------------------------------------
# example equation residuals


@dataclass(frozen=True)
class EquationInfo:
    name: str
    build: callable = dc_field(compare=False)
    default_algebra: callable = dc_field(compare=False)
    solve_hint: callable = dc_field(compare=False, default=None)
    note: str = ""


def _heat(n, mu=1.0, **_):
    nb = n + 1
    space = JetSpace(nb, 1, REAL, euclidean(n))
    deps = _dep_coords(nb, 1, ("d1", "d2"))

    def fn(v):
        acc = 2.0 * mu * v.du(1, 0)
        for a in range(1, nb):
            acc = acc + v.ddu(1, a, a)
        return acc

    return ScalarJetFunction(f"heat(mu={mu:g})", fn, deps, space)


def _schrodinger(n, mass=1.0, **_):
    nb = n + 1
    space = JetSpace(nb, 2, COMPLEX, euclidean(n))
    deps = _dep_coords(nb, 2, ("d1", "d2"), rs=(1,))

    def fn(v):
        acc = 2.0j * mass * v.du(1, 0)
        for a in range(1, nb):
            acc = acc + v.ddu(1, a, a)
        return acc

    return ScalarJetFunction(f"schrodinger(mass={mass:g})", fn, deps, space)


def _minkowski_parts(v, nb, signs):
    du = [v.du(1, i) for i in range(nb)]
    sq = 0.0
    tr = 0.0
    for i in range(nb):
        sq = sq + signs[i] * du[i] * du[i]
        tr = tr + signs[i] * v.ddu(1, i, i)
    form = 0.0
    for i in range(nb):
        for j in range(nb):
            form = form + signs[i] * signs[j] * du[i] * du[j] * v.ddu(1, i, j)
    return du, sq, tr, form


def _born_infeld(n, **_):
    nb = n + 1
    met = minkowski(nb)
    signs = met.signs
    space = JetSpace(nb, 1, REAL, met)
    deps = _dep_coords(nb, 1, ("d1", "d2"))

    def fn(v):
        _, sq, tr, form = _minkowski_parts(v, nb, signs)
        return (1.0 - sq) * tr + form

    return ScalarJetFunction("born-infeld", fn, deps, space)


def _eikonal(n, **_):
    nb = n + 1
    met = minkowski(nb)
    signs = met.signs
    space = JetSpace(nb, 1, REAL, met)
    deps = _dep_coords(nb, 1, ("d1",))

    def fn(v):
        du = [v.du(1, i) for i in range(nb)]
        acc = 0.0
        for i in range(nb):
            acc = acc + signs[i] * du[i] * du[i]
        return acc

    return ScalarJetFunction("eikonal", fn, deps, space)


def _eikonal_quasilinear(n, **_):
    nb = n + 1
    met = minkowski(nb)
    signs = met.signs
    space = JetSpace(nb, 1, REAL, met)
    deps = _dep_coords(nb, 1, ("d1", "d2"))

    def fn(v):
        _, sq, tr, form = _minkowski_parts(v, nb, signs)
        return form - sq * tr

    return ScalarJetFunction("eikonal-quasilinear", fn, deps, space)


def _eikonal_trace(n, k=1, **_):
    nb = n + 1
    met = minkowski(nb)
    signs = met.signs
    space = JetSpace(nb, 1, REAL, met)
    deps = _dep_coords(nb, 1, ("d1", "d2"))
    theta = covariant_tensor("eikonal_theta", n).builder

    def fn(v):
        return mat_trace(_tensor_power(v, ("eik",), theta, signs, k))

    return ScalarJetFunction(f"eikonal-trace(k={k})", fn, deps, space)


def _conformal_power(n, f_coeffs=(1.0, 0.5), **_):
    nb = n + 1
    met = minkowski(nb)
    signs = met.signs
    space = JetSpace(nb, 1, REAL, met, positive_fields=True)
    deps = _dep_coords(nb, 1, ("field", "d1", "d2"))

    def fn(v):
        _, sq, tr, form = _minkowski_parts(v, nb, signs)
        fu = 0.0
        for c in reversed(f_coeffs):
            fu = fu * v.u(1) + c
        return sq * tr / (1.0 - n) - form - _power(sq, 2) * fu

    return ScalarJetFunction("conformal-power", fn, deps, space)


def _galilei_projective(n, mu=1.0, f_const=0.75, **_):
    nb = n + 1
    space = JetSpace(nb, 1, REAL, euclidean(n))
    deps = _dep_coords(nb, 1, ("d1", "d2"))
    sp = _spatial(n)

    def fn(v):
        du = _phi_vec(v, n)
        dut = _phi_t_vec(v, n)
        tr = 0.0
        for a in sp:
            tr = tr + v.ddu(1, a, a)
        lhs = mu * mu * v.ddu(1, 0, 0)
        lhs = lhs + 2.0 * mu * (_phi_t(v) * tr / n + sum_prod(du, dut))
        for ai, a in enumerate(sp):
            for bi, b in enumerate(sp):
                lhs = lhs + du[ai] * du[bi] * v.ddu(1, a, b)
        lhs = lhs + sum_prod(du, du) * tr / n + tr * tr / n
        n1 = 2.0 * mu * _phi_t(v) + sum_prod(du, du) + tr
        return lhs - mu * mu * _power(n1, 2) * f_const

    return ScalarJetFunction(f"galilei-projective(mu={mu:g})", fn, deps, space)


def _schrodinger_projective(n, mass=1.0, f_const=0.75, **_):
    nb = n + 1
    space = JetSpace(nb, 2, COMPLEX, euclidean(n))
    deps = _dep_coords(nb, 2, ("d1", "d2"), rs=(1,))
    sp = _spatial(n)
    im = 1j * mass

    def fn(v):
        du = _phi_vec(v, n)
        dut = _phi_t_vec(v, n)
        tr = 0.0
        for a in sp:
            tr = tr + v.ddu(1, a, a)
        lhs = -mass * mass * v.ddu(1, 0, 0)
        lhs = lhs + 2.0 * im * (sum_prod(du, dut) + _phi_t(v) * tr / n)
        for ai, a in enumerate(sp):
            for bi, b in enumerate(sp):
                lhs = lhs + du[ai] * du[bi] * v.ddu(1, a, b)
        lhs = lhs + sum_prod(du, du) * tr / n + tr * tr / n
        n1 = 2.0 * im * _phi_t(v) + sum_prod(du, du) + tr
        return lhs - _power(n1, 2) * f_const

    return ScalarJetFunction(f"schrodinger-projective(mass={mass:g})", fn,
                             deps, space)


def _make_equations():
    from .liealg import make_spec

    return {
        "heat": EquationInfo(
            "heat", _heat,
            lambda n, p: make_spec("AG2_I", n, mu=p.get("mu", 1.0), rep="u"),
            lambda n: d1_coord(1, 0),
            "linear heat flow; checked against the projective Galilei algebra"),
        "schrodinger": EquationInfo(
            "schrodinger", _schrodinger,
            lambda n, p: make_spec("AG2_II", n, mass=p.get("mass", 1.0),
                                   rep="u"),
            lambda n: d1_coord(1, 0),
            "free particle wave equation on the conjugate field pair"),
        "born-infeld": EquationInfo(
            "born-infeld", _born_infeld,
            lambda n, p: make_spec("AP_BornInfeld", n),
            lambda n: d2_coord(1, 0, 0),
            "minimal-surface flow; symmetric under rotations mixing u into x"),
        "eikonal": EquationInfo(
            "eikonal", _eikonal,
            lambda n, p: make_spec("AP_inf", n, seed=p.get("seed", 0),
                                   instances=p.get("instances", 3),
                                   functions=p.get("functions", ())),
            lambda n: d1_coord(1, 0),
            "null-gradient equation with an infinite symmetry algebra"),
        "eikonal-quasilinear": EquationInfo(
            "eikonal-quasilinear", _eikonal_quasilinear,
            lambda n, p: make_spec("AP_inf", n, seed=p.get("seed", 0),
                                   instances=p.get("instances", 3),
                                   extended=True,
                                   functions=p.get("functions", ())),
            None,
            "second-order companion of the eikonal flow"),
        "eikonal-trace": EquationInfo(
            "eikonal-trace", _eikonal_trace,
            lambda n, p: make_spec("AP_inf", n, seed=p.get("seed", 0),
                                   instances=p.get("instances", 3),
                                   functions=p.get("functions", ())),
            None,
            "vanishing power-trace of the eikonal covariant tensor"),
        "conformal-power": EquationInfo(
            "conformal-power", _conformal_power,
            lambda n, p: make_spec("AC1n", n, lam=0.0),
            None,
            "quasilinear flow driven by the conformal tensor trace"),
        "galilei-projective": EquationInfo(
            "galilei-projective", _galilei_projective,
            lambda n, p: make_spec("AG2_I", n, mu=p.get("mu", 1.0),
                                   rep="log"),
            None,
            "log-substituted projective-invariant flow"),
        "schrodinger-projective": EquationInfo(
            "schrodinger-projective", _schrodinger_projective,
            lambda n, p: make_spec("AG2_II", n, mass=p.get("mass", 1.0),
                                   rep="log"),
            None,
            "complex analogue of the projective-invariant flow"),
    }


EQUATIONS = _make_equations()


def equation_function(name: str, n: int, **params) -> ScalarJetFunction:
    info = EQUATIONS.get(name)
    if info is None:
        raise ValueError(f"unknown equation {name!r}")
    return info.build(n, **params)


def equation_residual(name: str, point: JetPoint, **params):
    """Residual value of the named equation at a jet point."""
    n = params.pop("n", point.n_base - 1)
    return equation_function(name, n, **params).eval(point)


def covariant_tensor_components(name: str, point: JetPoint, **params):
    """Numeric components of the named covariant tensor at a jet point."""
    n = params.pop("n", None)
    builder = covariant_tensor(name, n if n is not None
                               else _tensor_spatial_dim(name, point), **params)
    return builder.build(point)


def _tensor_spatial_dim(name, point):
    euclid_full = ("theta", "w", "hessian", "position")
    return point.n_base if name in euclid_full else point.n_base - 1


def rotation_dilation_family(n: int, m: int = 1,
                             lam: float = 1.0) -> BasisFamily:
    """Invariants of rotations plus dilation (no translations): the
    position-vector forms join the jet invariants, dilation-normalized
    per branch."""
    spec = AlgebraSpec("AE1", n, m=m, lam=lam)
    met = euclidean(n)
    signs = met.signs
    idx = tuple(range(n))
    space = JetSpace(n, m, REAL, met, positive_fields=True)
    deps = _dep_coords(n, m, ("base", "field", "d1", "d2"))
    members = []
    if lam != 0:
        for r in range(2, m + 1):
            members.append(_mk(
                f"u{r}/u1", (lambda r: lambda v: v.u(r) / v.u(1))(r),
                deps, space))
        for k in range(1, n + 1):
            expo = k * (1.0 - 2.0 / lam)
            members.append(_mk(
                f"S{k}(U1)/u1^{expo:g}",
                (lambda k, expo: lambda v: _S(v, 1, idx, signs, k)
                 / _power(v.u(1), expo))(k, expo), deps, space))
        for r in range(2, m + 1):
            for k in range(1, n + 1):
                expo = k * (1.0 - 2.0 / lam)
                for j in range(0, k):
                    members.append(_mk(
                        f"S{j},{k}(U1,U{r})/u1^{expo:g}",
                        (lambda j, k, r, expo: lambda v:
                         _Sjk(v, 1, r, idx, signs, j, k)
                         / _power(v.u(1), expo))(j, k, r, expo),
                        deps, space))
        for r in range(1, m + 1):
            for k in range(1, n + 1):
                expo = 2.0 * k / lam - 1.0 - k
                members.append(_mk(
                    f"R{k}(du{r},U1)*u1^{expo:g}",
                    (lambda k, r, expo: lambda v:
                     _R(v, _gvec(v, r, idx), 1, idx, signs, k)
                     * _power(v.u(1), expo))(k, r, expo), deps, space))
        for k in range(1, n + 1):
            expo = (2.0 / lam) * (k - 2.0) - k + 1.0
            members.append(_mk(
                f"R{k}(x,U1)*u1^{expo:g}",
                (lambda k, expo: lambda v:
                 _R(v, [v.x(i) for i in idx], 1, idx, signs, k)
                 * _power(v.u(1), expo))(k, expo), deps, space))
    else:
        def tr1(v):
            return _S(v, 1, idx, signs, 1)

        for r in range(1, m + 1):
            members.append(_mk(f"u{r}", (lambda r: lambda v: v.u(r))(r),
                               (field_coord(r),), space))
        for r in range(1, m + 1):
            for k in range(1, n + 1):
                members.append(_mk(
                    f"R{k}(du{r},U1)/tr^{k}",
                    (lambda k, r: lambda v:
                     _R(v, _gvec(v, r, idx), 1, idx, signs, k)
                     / _power(tr1(v), k))(k, r), deps, space))
        for k in range(2, n + 1):
            members.append(_mk(
                f"S{k}(U1)/tr^{k}",
                (lambda k: lambda v: _S(v, 1, idx, signs, k)
                 / _power(tr1(v), k))(k), deps, space))
        for r in range(2, m + 1):
            for k in range(1, n + 1):
                for j in range(0, k):
                    members.append(_mk(
                        f"S{j},{k}(U1,U{r})/tr^{k}",
                        (lambda j, k, r: lambda v:
                         _Sjk(v, 1, r, idx, signs, j, k)
                         / _power(tr1(v), k))(j, k, r), deps, space))
        for k in range(1, n + 1):
            members.append(_mk(
                f"R{k}(x,U1)*tr^{2 - k}",
                (lambda k: lambda v:
                 _R(v, [v.x(i) for i in idx], 1, idx, signs, k)
                 * _power(tr1(v), 2.0 - k))(k), deps, space))
    return BasisFamily(f"rotation-dilation n={n} m={m} lam={lam:g}", spec,
                       tuple(members), len(members), space, deps)
