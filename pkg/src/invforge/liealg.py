"""Vector fields on (x, u)-space, their second prolongations, and the
catalog of point-symmetry algebras handled by this package.

A :class:`VectorField` holds coefficient evaluators xi^i(x, u) and
eta^r(x, u); :func:`prolong2` extends it to all second-order jet
coordinates.  Second derivatives live on unordered index pairs, and the
published coefficient of an off-diagonal pair is the sum eta_ij + eta_ji;
the directional derivative (:func:`apply_operator`) therefore weighs
off-diagonal pair coefficients by 1/2 against stored-slot gradients.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field

from .dual import EvaluationError, is_finite, magnitude, value_grad_hess
from .jetspace import (
    COMPLEX,
    REAL,
    FieldKind,
    JetPoint,
    base_coord,
    d1_coord,
    d2_coord,
    enumerate_coords,
    field_coord,
    sample_generic,
)

RANK_PIVOT_RTOL = 1e-8


class VectorField:
    """Infinitesimal generator xi^i(x,u) d/dx_i + eta^r(x,u) d/du^r.

    ``xi`` and ``eta`` are sequences of callables ``f(xs, us) -> scalar``
    that must evaluate on dual numbers, which supplies exact first and
    second partial derivatives.
    """

    __slots__ = ("n_base", "n_fields", "xi", "eta", "label")

    def __init__(self, n_base, n_fields, xi, eta, label):
        if len(xi) != n_base or len(eta) != n_fields:
            raise ValueError("coefficient count does not match dimensions")
        self.n_base = n_base
        self.n_fields = n_fields
        self.xi = tuple(xi)
        self.eta = tuple(eta)
        self.label = label

    def __repr__(self):
        return f"VectorField({self.label})"

    def scaled_sum(self, other: "VectorField", a, b) -> "VectorField":
        """a*self + b*other, for linearity checks."""
        xi = [
            (lambda f, g: lambda xs, us: a * f(xs, us) + b * g(xs, us))(f, g)
            for f, g in zip(self.xi, other.xi)
        ]
        eta = [
            (lambda f, g: lambda xs, us: a * f(xs, us) + b * g(xs, us))(f, g)
            for f, g in zip(self.eta, other.eta)
        ]
        return VectorField(self.n_base, self.n_fields, xi, eta,
                           f"{a}*{self.label}+{b}*{other.label}")


class ProlongedOperator:
    """Second prolongation of a vector field, evaluable at any jet point.

    ``coeff`` follows the unordered-pair convention: the coefficient
    reported for d2(r, i, j) with i != j is eta_ij + eta_ji.
    """

    __slots__ = ("source", "label")

    def __init__(self, source: VectorField):
        self.source = source
        self.label = source.label

    def __repr__(self):
        return f"ProlongedOperator({self.label})"

    def _tables(self, point: JetPoint):
        """(public coefficient table, flow table) at a point.

        The flow table carries the actual derivative of each stored
        coordinate along the prolonged flow; for off-diagonal pairs that
        is eta_ij, half the published sum.
        """
        src = self.source
        n, m = src.n_base, src.n_fields
        if point.n_base != n or point.n_fields != m:
            raise ValueError("jet point does not match the operator's space")
        xs = list(point.x)
        us = list(point.u)

        def partials(fn):
            def wrapped(args):
                return fn(args[:n], args[n:])
            return value_grad_hess(wrapped, xs + us)

        xi_val, xi_grad, xi_hess = [], [], []
        for k in range(n):
            v, g, h = partials(src.xi[k])
            xi_val.append(v)
            xi_grad.append(g)
            xi_hess.append(h)
        eta_val, eta_grad, eta_hess = [], [], []
        for r in range(m):
            v, g, h = partials(src.eta[r])
            eta_val.append(v)
            eta_grad.append(g)
            eta_hess.append(h)

        du = point.du

        def total_d(grad, i):
            # D_i g = g_x_i + sum_s u^s_i g_u^s  for g = g(x, u)
            out = grad[i]
            for s in range(m):
                out = out + du[s][i] * grad[n + s]
            return out

        def total_dd(grad, hess, i, j):
            # D_j D_i g for g = g(x, u)
            out = hess[i][j]
            for s in range(m):
                out = out + du[s][j] * hess[i][n + s]
                out = out + du[s][i] * hess[j][n + s]
                out = out + point.value(d2_coord(s + 1, i, j)) * grad[n + s]
                for t in range(m):
                    out = out + du[s][i] * du[t][j] * hess[n + s][n + t]
            return out

        d_xi = [[total_d(xi_grad[k], i) for i in range(n)] for k in range(n)]
        eta1 = [[None] * n for _ in range(m)]
        for r in range(m):
            for i in range(n):
                val = total_d(eta_grad[r], i)
                for k in range(n):
                    val = val - du[r][k] * d_xi[k][i]
                eta1[r][i] = val

        public = {}
        flow = {}
        for i in range(n):
            public[base_coord(i)] = xi_val[i]
            flow[base_coord(i)] = xi_val[i]
        for r in range(m):
            public[field_coord(r + 1)] = eta_val[r]
            flow[field_coord(r + 1)] = eta_val[r]
            for i in range(n):
                public[d1_coord(r + 1, i)] = eta1[r][i]
                flow[d1_coord(r + 1, i)] = eta1[r][i]

        dd_xi = [[[total_dd(xi_grad[k], xi_hess[k], i, j) for j in range(n)]
                  for i in range(n)] for k in range(n)]
        dd_eta = [[[total_dd(eta_grad[r], eta_hess[r], i, j) for j in range(n)]
                   for i in range(n)] for r in range(m)]

        def eta2(r, i, j):
            # eta_ij = D_j D_i eta - u_kj D_i xi^k - u_k D_j D_i xi^k
            #          - u_ik D_j xi^k
            val = dd_eta[r][i][j]
            for k in range(n):
                val = val - point.value(d2_coord(r + 1, k, j)) * d_xi[k][i]
                val = val - du[r][k] * dd_xi[k][i][j]
                val = val - point.value(d2_coord(r + 1, i, k)) * d_xi[k][j]
            return val

        for r in range(m):
            for i in range(n):
                for j in range(i, n):
                    cid = d2_coord(r + 1, i, j)
                    if i == j:
                        val = eta2(r, i, i)
                        public[cid] = val
                        flow[cid] = val
                    else:
                        a = eta2(r, i, j)
                        b = eta2(r, j, i)
                        public[cid] = a + b
                        flow[cid] = (a + b) / 2.0
        return public, flow

    def coefficient_table(self, point: JetPoint) -> dict:
        return self._tables(point)[0]

    def flow_table(self, point: JetPoint) -> dict:
        return self._tables(point)[1]

    def coeff(self, cid, point: JetPoint):
        return self.coefficient_table(point)[cid]


def prolong2(v: VectorField, n_fields: int | None = None) -> ProlongedOperator:
    """Second prolongation of a vector field."""
    if n_fields is not None and n_fields != v.n_fields:
        raise ValueError("field count does not match the vector field")
    return ProlongedOperator(v)


def apply_operator(op: ProlongedOperator, fn, point: JetPoint):
    """Directional derivative of ``fn`` along the prolonged field at a point.

    ``fn`` is any object with ``grad(point, coords)`` (a ScalarJetFunction);
    stored-slot gradients of off-diagonal second derivatives pair with half
    the published coefficient.
    """
    flow = op.flow_table(point)
    coords = getattr(fn, "deps", None) or enumerate_coords(point.n_base,
                                                           point.n_fields)
    grad = fn.grad(point, coords)
    total = 0.0
    for cid, g in zip(coords, grad):
        c = flow.get(cid, 0.0)
        term = c * g
        if not is_finite(term):
            raise EvaluationError(f"non-finite contribution at coordinate {cid}")
        total = total + term
    return total


def matrix_rank(rows, rtol: float = RANK_PIVOT_RTOL):
    """Rank by scaled full-pivot elimination.

    Rows are scaled to unit max magnitude, then pivots are accepted while
    larger than ``rtol`` times the largest entry of the scaled matrix.
    """
    a = [list(row) for row in rows]
    if not a or not a[0]:
        return 0, []
    for row in a:
        s = max(magnitude(vv) for vv in row)
        if s > 0.0:
            for k in range(len(row)):
                row[k] = row[k] / s
    biggest = max(max(magnitude(vv) for vv in row) for row in a)
    if biggest == 0.0:
        return 0, []
    thresh = rtol * biggest
    nrows, ncols = len(a), len(a[0])
    rank = 0
    pivots = []
    used_r, used_c = set(), set()
    for _ in range(min(nrows, ncols)):
        best, br, bc = 0.0, -1, -1
        for r in range(nrows):
            if r in used_r:
                continue
            for c in range(ncols):
                if c in used_c:
                    continue
                mag = magnitude(a[r][c])
                if mag > best:
                    best, br, bc = mag, r, c
        if best <= thresh:
            break
        pivots.append(best)
        used_r.add(br)
        used_c.add(bc)
        rank += 1
        piv = a[br][bc]
        for r in range(nrows):
            if r in used_r:
                continue
            factor = a[r][bc] / piv
            if factor == 0.0:
                continue
            for c in range(ncols):
                if c in used_c:
                    continue
                a[r][c] = a[r][c] - factor * a[br][c]
            a[r][bc] = 0.0
    return rank, pivots


def generic_rank(ops, sampler, trials: int = 5, coords=None) -> int:
    """Max over sampled points of the rank of the operators' coefficient
    matrix (rows = operators, columns = jet coordinates)."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    best = 0
    for t in range(trials):
        point = sampler(t)
        cols = coords if coords is not None else enumerate_coords(
            point.n_base, point.n_fields)
        rows = []
        for op in ops:
            table = op.coefficient_table(point)
            rows.append([table.get(c, 0.0) for c in cols])
        rank, _ = matrix_rank(rows)
        best = max(best, rank)
    return best


# --------------------------------------------------------------------------
# algebra catalog


_FAMILIES = (
    "AO", "AE", "AE1", "AC", "AP", "APtilde", "AC1n",
    "AG_I", "AG1_I", "AG2_I", "AG_II", "AG1_II", "AG2_II",
    "AP_inf", "AP_BornInfeld",
)


@dataclass(frozen=True)
class AlgebraSpec:
    """Named algebra with its parameters.

    ``n`` is the spatial dimension (the jet space of the Minkowski and
    Galilei families has n+1 base coordinates, index 0 timelike).  ``rep``
    selects the representation for Galilei catalogs: "u" acts by u d/du,
    "log" acts on jets of log u (or log psi).  For AP_inf, ``seed`` and
    ``instances`` control the sampled coefficient functions and
    ``extended`` adds the u-dependent dilation term.
    """

    name: str
    n: int
    m: int = 1
    lam: float = 1.0
    mu: float = 1.0
    mass: float = 1.0
    field_kind: FieldKind = REAL
    rep: str = "u"
    seed: int = 0
    instances: int = 3
    extended: bool = False
    functions: tuple = dc_field(default=(), compare=False)

    def __post_init__(self):
        if self.name not in _FAMILIES:
            raise ValueError(f"unknown algebra family {self.name!r}")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        min_n = 2 if self.name in ("AP_inf", "AP_BornInfeld") else 3
        if self.n < min_n:
            raise ValueError(f"{self.name} requires n >= {min_n}")
        # the projective generator pins lambda = -n/2 unless the boost
        # weight (mu, or the mass) vanishes
        if self.name == "AG2_I" and self.mu != 0 and self.lam != -self.n / 2:
            raise ValueError(f"AG2_I fixes lambda = -n/2 = {-self.n / 2}")
        if self.name == "AG2_II" and self.mass != 0 and self.lam != -self.n / 2:
            raise ValueError(f"AG2_II fixes lambda = -n/2 = {-self.n / 2}")
        if self.name.endswith("_II") and self.field_kind is not COMPLEX:
            raise ValueError(f"{self.name} acts on a complex field pair")
        if self.name.endswith("_II") and self.m != 2:
            raise ValueError(f"{self.name} uses the slot pair (phi, phi*)")
        if self.rep not in ("u", "log"):
            raise ValueError("rep must be 'u' or 'log'")

    @property
    def n_base(self) -> int:
        if self.name in ("AO", "AE", "AE1", "AC"):
            return self.n
        return self.n + 1  # time/x0 plus n spatial coordinates

    @property
    def n_fields(self) -> int:
        return self.m


def make_spec(name: str, n: int, **kw) -> AlgebraSpec:
    """AlgebraSpec with family defaults applied."""
    if name == "AG2_I" and kw.get("mu", 1.0) != 0:
        kw.setdefault("lam", -n / 2)
    if name == "AG2_II" and kw.get("mass", 1.0) != 0:
        kw.setdefault("lam", -n / 2)
    if name.endswith("_II"):
        kw.setdefault("field_kind", COMPLEX)
        kw.setdefault("m", 2)
    return AlgebraSpec(name=name, n=n, **kw)


def _const(c):
    return lambda xs, us: c


def _zero(xs, us):
    return 0.0


def _translation(n_base, n_fields, i, label):
    xi = [_const(1.0) if k == i else _zero for k in range(n_base)]
    return VectorField(n_base, n_fields, xi, [_zero] * n_fields, label)


def _rotation(n_base, n_fields, a, b, ga, gb, label):
    # x_a p_b - x_b p_a with the i factor dropped: ga, gb are metric signs
    def xi_b(xs, us, a=a, gb=gb):
        return gb * xs[a]

    def xi_a(xs, us, b=b, ga=ga):
        return -ga * xs[b]

    xi = []
    for k in range(n_base):
        if k == b:
            xi.append(xi_b)
        elif k == a:
            xi.append(xi_a)
        else:
            xi.append(_zero)
    return VectorField(n_base, n_fields, xi, [_zero] * n_fields, label)


def _field_scaling(n_base, n_fields, weights, label):
    eta = [
        (lambda w, r: lambda xs, us: w * us[r])(w, r)
        for r, w in enumerate(weights)
    ]
    return VectorField(n_base, n_fields, [_zero] * n_base, eta, label)


def catalog(spec: AlgebraSpec) -> list:
    """Basis vector fields of the named algebra."""
    builder = {
        "AO": _euclid_family,
        "AE": _euclid_family,
        "AE1": _euclid_family,
        "AC": _euclid_family,
        "AP": _poincare_family,
        "APtilde": _poincare_family,
        "AC1n": _poincare_family,
        "AG_I": _galilei_real,
        "AG1_I": _galilei_real,
        "AG2_I": _galilei_real,
        "AG_II": _galilei_complex,
        "AG1_II": _galilei_complex,
        "AG2_II": _galilei_complex,
        "AP_inf": _eikonal_family,
        "AP_BornInfeld": _born_infeld_family,
    }[spec.name]
    return builder(spec)


def _euclid_family(spec: AlgebraSpec):
    n, m = spec.n, spec.m
    fields = []
    if spec.name != "AO":
        fields += [_translation(n, m, i, f"P{i + 1}") for i in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            fields.append(_rotation(n, m, a, b, 1.0, 1.0, f"J{a + 1}{b + 1}"))
    if spec.name in ("AE1", "AC"):
        lam = spec.lam

        def dil_xi(k):
            return lambda xs, us: xs[k]

        fields.append(VectorField(
            n, m,
            [dil_xi(k) for k in range(n)],
            [(lambda r: lambda xs, us: lam * us[r])(r) for r in range(m)],
            "D"))
    if spec.name == "AC":
        lam = spec.lam
        for a in range(n):
            def make_xi(k, a=a):
                def f(xs, us):
                    sq = 0.0
                    for x in xs:
                        sq = sq + x * x
                    val = 2.0 * xs[a] * xs[k]
                    if k == a:
                        val = val - sq
                    return val
                return f

            def make_eta(r, a=a, lam=lam):
                return lambda xs, us: 2.0 * lam * xs[a] * us[r]

            fields.append(VectorField(
                n, m,
                [make_xi(k) for k in range(n)],
                [make_eta(r) for r in range(m)],
                f"K{a + 1}"))
    return fields


def _poincare_family(spec: AlgebraSpec):
    n, m = spec.n, spec.m
    nb = n + 1
    g = [1.0] + [-1.0] * n
    fields = [_translation(nb, m, i, f"P{i}") for i in range(nb)]
    for a in range(nb):
        for b in range(a + 1, nb):
            fields.append(_rotation(nb, m, a, b, g[a], g[b], f"J{a}{b}"))
    if spec.name in ("APtilde", "AC1n"):
        lam = spec.lam
        fields.append(VectorField(
            nb, m,
            [(lambda k: lambda xs, us: xs[k])(k) for k in range(nb)],
            [(lambda r: lambda xs, us: lam * us[r])(r) for r in range(m)],
            "D"))
    if spec.name == "AC1n":
        lam = spec.lam
        for a in range(nb):
            def make_xi(k, a=a):
                def f(xs, us):
                    sq = 0.0
                    for i, x in enumerate(xs):
                        sq = sq + g[i] * x * x
                    val = 2.0 * xs[a] * xs[k]
                    if k == a:
                        val = val - sq * g[a]
                    return val
                return f

            def make_eta(r, a=a, lam=lam):
                return lambda xs, us: 2.0 * lam * xs[a] * us[r]

            fields.append(VectorField(
                nb, m,
                [make_xi(k) for k in range(nb)],
                [make_eta(r) for r in range(m)],
                f"K{a}"))
    return fields


def _galilei_real(spec: AlgebraSpec):
    """Heat-equation Galilei family: base coords (t, x_1..x_n), one field."""
    n, m = spec.n, spec.m
    nb = n + 1
    mu, lam = spec.mu, spec.lam
    log_rep = spec.rep == "log"

    def uweight(w):
        # w * (u d/du) in u-rep, w * d/dphi in log-rep
        if log_rep:
            return [_const(w) for _ in range(m)]
        return [(lambda r: lambda xs, us: w * us[r])(r) for r in range(m)]

    fields = [_translation(nb, m, 0, "Pt")]
    fields += [_translation(nb, m, i, f"P{i}") for i in range(1, nb)]
    for a in range(1, nb):
        for b in range(a + 1, nb):
            fields.append(_rotation(nb, m, a, b, 1.0, 1.0, f"J{a}{b}"))
    for a in range(1, nb):
        def make_eta(r, a=a):
            if log_rep:
                return lambda xs, us: mu * xs[a]
            return lambda xs, us: mu * xs[a] * us[r]

        fields.append(VectorField(
            nb, m,
            [(lambda k, a=a: (lambda xs, us: xs[0]) if k == a else _zero)(k)
             for k in range(nb)],
            [make_eta(r) for r in range(m)],
            f"G{a}"))
    fields.append(VectorField(nb, m, [_zero] * nb, uweight(1.0), "I"))
    if spec.name in ("AG1_I", "AG2_I"):
        fields.append(VectorField(
            nb, m,
            [(lambda k: (lambda xs, us: 2.0 * xs[0]) if k == 0
              else (lambda xs, us: xs[k]))(k) for k in range(nb)],
            uweight(lam), "D"))
    if spec.name == "AG2_I":
        def a_eta(r):
            def f(xs, us):
                sq = 0.0
                for x in xs[1:]:
                    sq = sq + x * x
                w = lam * xs[0] + mu * sq / 2.0
                return w if log_rep else w * us[r]
            return f

        fields.append(VectorField(
            nb, m,
            [(lambda k: (lambda xs, us: xs[0] * xs[0]) if k == 0
              else (lambda xs, us: xs[0] * xs[k]))(k) for k in range(nb)],
            [a_eta(r) for r in range(m)],
            "A"))
    return fields


def _galilei_complex(spec: AlgebraSpec):
    """Schroedinger family on the slot pair (psi, psi*) or (phi, phi*).

    Derivative symbols are read with their printed i factors dropped while
    the phase rotation J keeps its i inside composites, which is the unique
    reading leaving the free equation conditionally invariant.
    """
    n = spec.n
    nb = n + 1
    mass, lam = spec.mass, spec.lam
    log_rep = spec.rep == "log"
    mu = 1j * mass

    def pair(w_phi, w_conj):
        # w_phi * (psi d/dpsi) + w_conj * (psi* d/dpsi*), rep-aware;
        # coefficients may be functions of xs.
        def make(r, w):
            if log_rep:
                return lambda xs, us: w(xs)
            return lambda xs, us: w(xs) * us[r]
        return [make(0, w_phi), make(1, w_conj)]

    fields = [_translation(nb, 2, 0, "Pt")]
    fields += [_translation(nb, 2, i, f"P{i}") for i in range(1, nb)]
    fields.append(VectorField(
        nb, 2, [_zero] * nb,
        pair(lambda xs: 1.0, lambda xs: -1.0), "J"))
    for a in range(1, nb):
        for b in range(a + 1, nb):
            fields.append(_rotation(nb, 2, a, b, 1.0, 1.0, f"J{a}{b}"))
    for a in range(1, nb):
        fields.append(VectorField(
            nb, 2,
            [(lambda k, a=a: (lambda xs, us: xs[0]) if k == a else _zero)(k)
             for k in range(nb)],
            pair(lambda xs, a=a: mu * xs[a], lambda xs, a=a: -mu * xs[a]),
            f"G{a}"))
    if spec.name in ("AG1_II", "AG2_II"):
        fields.append(VectorField(
            nb, 2,
            [(lambda k: (lambda xs, us: 2.0 * xs[0]) if k == 0
              else (lambda xs, us: xs[k]))(k) for k in range(nb)],
            pair(lambda xs: lam, lambda xs: lam), "D"))
    if spec.name == "AG2_II":
        def sq(xs):
            s = 0.0
            for x in xs[1:]:
                s = s + x * x
            return s

        fields.append(VectorField(
            nb, 2,
            [(lambda k: (lambda xs, us: xs[0] * xs[0]) if k == 0
              else (lambda xs, us: xs[0] * xs[k]))(k) for k in range(nb)],
            pair(lambda xs: lam * xs[0] + mu * sq(xs) / 2.0,
                 lambda xs: lam * xs[0] - mu * sq(xs) / 2.0),
            "A"))
    return fields


class PolynomialOfU:
    """Low-degree polynomial c0 + c1 u + c2 u^2 used as a sampled
    coefficient function of the field value."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = tuple(coeffs)

    def __call__(self, u):
        out = 0.0
        for c in reversed(self.coeffs):
            out = out * u + c
        return out

    def __repr__(self):
        return "+".join(f"{c:.3f}u^{k}" if k else f"{c:.3f}"
                        for k, c in enumerate(self.coeffs))


def _sample_poly(rng, degree=2):
    return PolynomialOfU([_signed_value(rng) for _ in range(degree + 1)])


def _signed_value(rng):
    mag = rng.uniform(0.5, 2.0)
    return mag if rng.random() < 0.5 else -mag


def sample_eikonal_functions(n: int, seed: int, extended: bool):
    """One draw of the arbitrary functions (b^{mu nu}, a^mu, eta[, d])."""
    rng = random.Random(f"apinf:{n}:{seed}")
    nb = n + 1
    b = {}
    for muu in range(nb):
        for nuu in range(muu + 1, nb):
            b[(muu, nuu)] = _sample_poly(rng)
    a = [_sample_poly(rng) for _ in range(nb)]
    eta = _sample_poly(rng)
    d = _sample_poly(rng) if extended else None
    return b, a, eta, d


def _eikonal_family(spec: AlgebraSpec):
    """Sampled generators of the infinite symmetry algebra of the eikonal
    equation: (b^{mu nu}(u) x_nu + a^mu(u)) d/dx_mu + eta(u) d/du, with the
    repeated Greek index contracted through the metric, optionally extended
    by d(u) x_mu d/dx_mu (plain dilation sum).

    ``spec.functions`` may override sampled components by name: ``b{mu}{nu}``
    (mu < nu), ``a{mu}``, ``eta``, ``d``; overrides apply to every instance.
    """
    n = spec.n
    nb = n + 1
    g = [1.0] + [-1.0] * n
    overrides = dict(spec.functions)
    fields = []
    for inst in range(spec.instances):
        b, a, eta, d = sample_eikonal_functions(n, spec.seed + inst,
                                                spec.extended)
        for name, fn in overrides.items():
            if name == "eta":
                eta = fn
            elif name == "d":
                d = fn
                if not spec.extended:
                    raise ValueError("a 'd' function needs extended=True")
            elif name.startswith("b") and len(name) == 3:
                mu, nu = int(name[1]), int(name[2])
                if not 0 <= mu < nu <= n:
                    raise ValueError(f"bad antisymmetric component {name!r}")
                b[(mu, nu)] = fn
            elif name.startswith("a") and name[1:].isdigit():
                mu = int(name[1:])
                if not 0 <= mu <= n:
                    raise ValueError(f"bad translation component {name!r}")
                a[mu] = fn
            else:
                raise ValueError(f"unknown coefficient function {name!r}")

        def make_xi(k, b=b, a=a, d=d):
            def f(xs, us):
                u = us[0]
                val = a[k](u)
                for nuu in range(nb):
                    if (k, nuu) in b:
                        val = val + g[nuu] * b[(k, nuu)](u) * xs[nuu]
                    elif (nuu, k) in b:
                        val = val - g[nuu] * b[(nuu, k)](u) * xs[nuu]
                if d is not None:
                    val = val + d(u) * xs[k]
                return val
            return f

        def make_eta(eta=eta):
            return lambda xs, us: eta(us[0])

        fields.append(VectorField(
            nb, 1, [make_xi(k) for k in range(nb)], [make_eta()],
            f"X{inst}{'+d' if spec.extended else ''}"))
    return fields


def _born_infeld_family(spec: AlgebraSpec):
    """Poincare algebra on (x_0..x_n, u) with u as the extra spacelike
    coordinate: translations plus all pseudo-rotations J_AB."""
    n = spec.n
    nb = n + 1
    g = [1.0] + [-1.0] * n
    gu = -1.0
    fields = [_translation(nb, 1, i, f"P{i}") for i in range(nb)]
    fields.append(VectorField(nb, 1, [_zero] * nb, [_const(1.0)], "Pu"))
    for a in range(nb):
        for b in range(a + 1, nb):
            fields.append(_rotation(nb, 1, a, b, g[a], g[b], f"J{a}{b}"))
    for a in range(nb):
        # J_{a,u} = x_a p_u - u p_a with the i dropped
        def xi_a(xs, us, a=a):
            return -g[a] * us[0]

        def eta_u(xs, us, a=a):
            return gu * xs[a]

        fields.append(VectorField(
            nb, 1,
            [(lambda k, a=a: xi_a if k == a else _zero)(k) for k in range(nb)],
            [eta_u], f"J{a}u"))
    return fields


def make_sampler(n_base: int, n_fields: int,
                 field_kind: FieldKind = REAL, seed: int = 0,
                 positive_fields: bool = False):
    """Deterministic family of generic points indexed by trial number."""
    def sampler(idx: int) -> JetPoint:
        return sample_generic(n_base, n_fields, field_kind,
                              seed=seed * 1000003 + idx,
                              positive_fields=positive_fields)
    return sampler
