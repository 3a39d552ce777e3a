"""Numerical verification engine: absolute and on-manifold invariance
checks, functional-independence ranks, completeness accounting, and
covariance fits.

All checks are deterministic given (seed, parameters).  A check record is
PASS when its residual stays within ``tol * (1 + scale)``, where the scale
is the largest |F| times the norm of the operator's coefficient vector
seen across samples, so verdicts survive rescaling of homogeneous
invariants.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .dual import Dual, EvaluationError, is_finite
from .dual import Dual as DualScalar  # the scalar driving forward-mode
#                                       differentiation in every check
from .invcat import (
    BasisFamily,
    ScalarJetFunction,
    TensorBuilder,
    seeded_view,
)
from .jetspace import JetPoint
from .liealg import matrix_rank

DEFAULT_TOL = 1e-8
DEFAULT_SAMPLES = 50


@dataclass(frozen=True)
class InvarianceRecord:
    operator: str
    invariant: str
    max_residual: float
    scale: float
    verdict: str

    def as_dict(self):
        return {
            "operator": self.operator,
            "invariant": self.invariant,
            "residual_max": self.max_residual,
            "scale": self.scale,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class InvarianceReport:
    label: str
    records: tuple
    n_samples: int
    seed: int
    tol: float

    @property
    def verdict(self):
        return "PASS" if all(r.verdict == "PASS" for r in self.records) \
            else "FAIL"

    def failures(self):
        return [r for r in self.records if r.verdict != "PASS"]

    def by_invariant(self):
        out = {}
        for r in self.records:
            cur = out.get(r.invariant)
            if cur is None or r.max_residual > cur.max_residual:
                out[r.invariant] = r
        return out

    def max_residual(self):
        return max((r.max_residual for r in self.records), default=0.0)


@dataclass(frozen=True)
class RankReport:
    label: str
    n_rows: int
    n_cols: int
    pivots: tuple
    rank: int
    expected: int
    verdict: str


@dataclass(frozen=True)
class CompletenessReport:
    label: str
    n_jet_vars: int
    algebra_rank: int
    expected: int
    family_size: int
    independence_rank: int
    invariance_verdict: str
    verdict: str


@dataclass(frozen=True)
class CovarianceRecord:
    operator: str
    residual: float
    scale: float
    verdict: str
    fit: tuple = dc_field(default=(), compare=False)


@dataclass(frozen=True)
class CovarianceReport:
    label: str
    records: tuple
    n_samples: int
    seed: int
    tol: float

    @property
    def verdict(self):
        return "PASS" if all(r.verdict == "PASS" for r in self.records) \
            else "FAIL"


def family_jacobian(members, point: JetPoint, coords) -> list:
    """Rows of member gradients over ``coords``; one dual pass per
    coordinate shared by all members (power caches live on the view)."""
    rows = [[0.0] * len(coords) for _ in members]
    dep_sets = [set(m.deps) for m in members]
    for ci, c in enumerate(coords):
        view = None
        for mi, m in enumerate(members):
            if c not in dep_sets[mi]:
                continue
            if view is None:
                view = seeded_view(point, c)
            out = m.fn(view)
            rows[mi][ci] = out.deriv if isinstance(out, Dual) else 0.0
    return rows


def _resolve_sampler(family_or_fn, seed, sampler):
    if sampler is not None:
        return sampler
    return family_or_fn.space.sampler(seed)


def _dep_union(members):
    seen = set()
    coords = []
    for m in members:
        for c in m.deps:
            if c not in seen:
                seen.add(c)
                coords.append(c)
    return tuple(coords)


def _draw(sampler, members, idx, retries=25):
    """Sample a point where every member evaluates finitely."""
    attempt = idx
    for _ in range(retries):
        point = sampler(attempt)
        try:
            for m in members:
                if not is_finite(m.eval(point)):
                    raise EvaluationError(f"non-finite value of {m.label}")
            return point, attempt
        except EvaluationError:
            attempt += 10007
    raise EvaluationError("could not sample an admissible generic point")


def check_absolute(ops, family, n_samples: int = DEFAULT_SAMPLES,
                   tol: float = DEFAULT_TOL, seed: int = 0,
                   sampler=None) -> InvarianceReport:
    """Evaluate every prolonged operator on every family member at sampled
    generic points; PASS iff all residuals stay within tolerance."""
    members = list(family.members) if isinstance(family, BasisFamily) \
        else list(family)
    space_owner = family if isinstance(family, BasisFamily) else members[0]
    sampler = _resolve_sampler(space_owner, seed, sampler)
    coords = family.deps if isinstance(family, BasisFamily) \
        else _dep_union(members)
    worst = {}
    scales = {}
    for s in range(n_samples):
        point, _ = _draw(sampler, members, s)
        jac = family_jacobian(members, point, coords)
        for op in ops:
            flow = op.flow_table(point)
            coeffs = [flow.get(c, 0.0) for c in coords]
            cnorm = sum(abs(c) ** 2 for c in coeffs) ** 0.5
            for mi, mem in enumerate(members):
                resid = 0.0
                for ci in range(len(coords)):
                    resid = resid + coeffs[ci] * jac[mi][ci]
                if not is_finite(resid):
                    raise EvaluationError(
                        f"non-finite residual for {mem.label} under {op.label}")
                key = (op.label, mem.label)
                worst[key] = max(worst.get(key, 0.0), abs(resid))
                fmag = abs(mem.eval(point))
                scales[key] = max(scales.get(key, 0.0), fmag * cnorm)
    records = []
    for (op_label, mem_label), resid in sorted(worst.items()):
        scale = scales[(op_label, mem_label)]
        verdict = "PASS" if resid <= tol * (1.0 + scale) else "FAIL"
        records.append(InvarianceRecord(op_label, mem_label, resid, scale,
                                        verdict))
    label = family.label if isinstance(family, BasisFamily) else "ad-hoc"
    return InvarianceReport(label, tuple(records), n_samples, seed, tol)


def newton_project(residual: ScalarJetFunction, point: JetPoint,
                   solve_for=None, target: float = 1e-12,
                   max_iter: int = 50) -> JetPoint:
    """Project a point onto the residual's zero set by adjusting one jet
    coordinate (largest-derivative coordinate when unspecified)."""
    cid = solve_for
    if cid is None:
        best = 0.0
        for c in residual.deps:
            out = residual.fn(seeded_view(point, c))
            d = abs(out.deriv) if isinstance(out, Dual) else 0.0
            if d > best:
                best, cid = d, c
        if cid is None:
            raise EvaluationError("residual has no usable jet coordinate")
    for _ in range(max_iter):
        val = residual.eval(point)
        if abs(val) < target:
            return point
        out = residual.fn(seeded_view(point, cid))
        d = out.deriv if isinstance(out, Dual) else 0.0
        if abs(d) < 1e-10:
            raise EvaluationError("residual not monotone in the solve "
                                  "coordinate")
        point = point.replace(cid, point.value(cid) - val / d)
    raise EvaluationError("Newton projection did not converge")


def check_on_manifold(ops, residual: ScalarJetFunction, solve_for=None,
                      n_samples: int = 20, tol: float = DEFAULT_TOL,
                      seed: int = 0, sampler=None) -> InvarianceReport:
    """Project samples onto the solution manifold of ``residual`` and
    test all prolonged operators there."""
    sampler = _resolve_sampler(residual, seed, sampler)
    worst = {}
    scales = {}
    collected = 0
    attempt = 0
    while collected < n_samples:
        if attempt > 20 * n_samples + 100:
            raise EvaluationError("persistent Newton projection failure")
        point = sampler(attempt)
        attempt += 1
        try:
            point = newton_project(residual, point, solve_for)
        except EvaluationError:
            continue
        collected += 1
        grad = residual.grad(point, residual.deps)
        for op in ops:
            flow = op.flow_table(point)
            coeffs = [flow.get(c, 0.0) for c in residual.deps]
            cnorm = sum(abs(c) ** 2 for c in coeffs) ** 0.5
            resid = 0.0
            for ci in range(len(residual.deps)):
                resid = resid + coeffs[ci] * grad[ci]
            key = (op.label, residual.label)
            worst[key] = max(worst.get(key, 0.0), abs(resid))
            scales[key] = max(scales.get(key, 0.0),
                              abs(residual.eval(point)) * cnorm)
    records = []
    for (op_label, res_label), resid in sorted(worst.items()):
        scale = scales[(op_label, res_label)]
        verdict = "PASS" if resid <= tol * (1.0 + scale) else "FAIL"
        records.append(InvarianceRecord(op_label, res_label, resid, scale,
                                        verdict))
    return InvarianceReport(residual.label, tuple(records), n_samples, seed,
                            tol)


def independence_rank(family, n_samples: int = 5, seed: int = 0,
                      sampler=None, expected=None) -> RankReport:
    """Generic rank of the family's Jacobian over its dependency set."""
    members = list(family.members) if isinstance(family, BasisFamily) \
        else list(family)
    space_owner = family if isinstance(family, BasisFamily) else members[0]
    coords = family.deps if isinstance(family, BasisFamily) \
        else _dep_union(members)
    sampler = _resolve_sampler(space_owner, seed, sampler)
    best_rank = 0
    best_pivots = ()
    for s in range(n_samples):
        point, _ = _draw(sampler, members, s)
        jac = family_jacobian(members, point, coords)
        rank, pivots = matrix_rank(jac)
        if rank > best_rank:
            best_rank, best_pivots = rank, tuple(pivots)
    if expected is None:
        expected = len(members)
    verdict = "PASS" if best_rank == expected else "FAIL"
    label = family.label if isinstance(family, BasisFamily) else "ad-hoc"
    return RankReport(label, len(members), len(coords), best_pivots,
                      best_rank, expected, verdict)


def completeness(spec, family: BasisFamily, n_samples: int = 10,
                 tol: float = DEFAULT_TOL, seed: int = 0) -> CompletenessReport:
    """Three-way completeness accounting for a family against its algebra:
    the family size must equal (dependency variables) - (restricted
    generic rank), the Jacobian must have full rank, and every member must
    be invariant."""
    from .liealg import catalog, generic_rank, prolong2

    ops = [prolong2(f) for f in catalog(spec)]
    sampler = family.space.sampler(seed)
    alg_rank = generic_rank(ops, sampler, trials=max(3, n_samples // 2),
                            coords=list(family.deps))
    n_vars = len(family.deps)
    expected = n_vars - alg_rank
    rank_rep = independence_rank(family, n_samples=max(3, n_samples // 2),
                                 seed=seed)
    inv_rep = check_absolute(ops, family, n_samples=n_samples, tol=tol,
                             seed=seed)
    ok = (expected == len(family.members)
          and rank_rep.rank == len(family.members)
          and inv_rep.verdict == "PASS")
    return CompletenessReport(family.label, n_vars, alg_rank, expected,
                              len(family.members), rank_rep.rank,
                              inv_rep.verdict, "PASS" if ok else "FAIL")


def _dot(u, v):
    acc = 0.0
    for x, y in zip(u, v):
        acc += (x.conjugate() if isinstance(x, complex) else x) * y
    return acc


def _lstsq(a, b):
    """Rank-tolerant least squares by modified Gram-Schmidt; dependent
    columns get coefficient zero.  Returns (coefficients, residual norm)."""
    nrow = len(a)
    ncol = len(a[0]) if nrow else 0
    cols = [[a[i][j] for i in range(nrow)] for j in range(ncol)]
    col_scale = max((max(abs(v) for v in c) for c in cols if c), default=0.0)
    drop_tol = 1e-10 * (1.0 + col_scale)
    basis_vecs = []
    basis_cols = []
    r_entries = {}
    for j in range(ncol):
        v = list(cols[j])
        for bi, q in enumerate(basis_vecs):
            r = _dot(q, v)
            r_entries[(bi, j)] = r
            for i in range(nrow):
                v[i] -= r * q[i]
        norm = _dot(v, v) ** 0.5
        if abs(norm) > drop_tol:
            basis_vecs.append([vi / norm for vi in v])
            r_entries[(len(basis_vecs) - 1, j)] = norm
            basis_cols.append(j)
    vb = list(b)
    qb = []
    for q in basis_vecs:
        r = _dot(q, vb)
        qb.append(r)
        for i in range(nrow):
            vb[i] -= r * q[i]
    resid = abs(_dot(vb, vb)) ** 0.5
    x = [0.0] * ncol
    for bi in range(len(basis_cols) - 1, -1, -1):
        j = basis_cols[bi]
        acc = qb[bi]
        for bj in range(bi + 1, len(basis_cols)):
            acc -= r_entries.get((bi, basis_cols[bj]), 0.0) * x[basis_cols[bj]]
        x[j] = acc / r_entries[(bi, j)]
    return x, resid


def check_covariance(tensor: TensorBuilder, ops, n_samples: int = 10,
                     tol: float = DEFAULT_TOL, seed: int = 0,
                     sampler=None) -> CovarianceReport:
    """Fit the prolonged action on a tensor against rotation-plus-scaling:
    a skew mixing matrix plus a scalar multiple; PASS when the fit
    residual is negligible against the action's size."""
    comps = tensor.components()
    sampler = sampler or tensor.space.sampler(seed)
    size = tensor.size
    skew_pairs = [(a, b) for a in range(size) for b in range(a + 1, size)]
    coords = tensor.deps
    met = tensor.space.metric
    gsign = met.signs if met is not None and met.dim == size \
        else (1.0,) * size
    worst = {op.label: 0.0 for op in ops}
    scales = {op.label: 0.0 for op in ops}
    fits = {op.label: () for op in ops}
    for s in range(n_samples):
        point, _ = _draw(sampler, comps, s)
        t_val = tensor.build(point)
        jac = family_jacobian(comps, point, coords)
        for op in ops:
            flow = op.flow_table(point)
            coeffs = [flow.get(c, 0.0) for c in coords]

            def action(ci):
                acc = 0.0
                for k in range(len(coords)):
                    acc = acc + coeffs[k] * jac[ci][k]
                return acc

            rows = []
            rhs = []
            if tensor.kind == "vector":
                # mixing matrix sigma = B * G with B skew; sigma_ac = B_ac g_c
                xt = [action(a) for a in range(size)]
                for a in range(size):
                    row = []
                    for (p, q) in skew_pairs:
                        if a == p:
                            row.append(gsign[q] * t_val[q])
                        elif a == q:
                            row.append(-gsign[p] * t_val[p])
                        else:
                            row.append(0.0)
                    row.append(t_val[a])
                    rows.append(row)
                    rhs.append(xt[a])
            else:
                xt = {}
                for a in range(size):
                    for b in range(a, size):
                        xt[(a, b)] = action(a * size + b)
                for a in range(size):
                    for b in range(a, size):
                        row = []
                        for (p, q) in skew_pairs:
                            # rho = B * G contribution to X T_{ab}:
                            # rho_ac T_cb + rho_bc T_ac
                            acc = 0.0
                            if a == p:
                                acc += gsign[q] * t_val[q][b]
                            if a == q:
                                acc -= gsign[p] * t_val[p][b]
                            if b == p:
                                acc += gsign[q] * t_val[q][a]
                            if b == q:
                                acc -= gsign[p] * t_val[p][a]
                            row.append(acc)
                        row.append(t_val[a][b])
                        rows.append(row)
                        rhs.append(xt[(a, b)])
            fit, resid = _lstsq(rows, rhs)
            mag = max(abs(v) for v in rhs) if rhs else 0.0
            worst[op.label] = max(worst[op.label], resid)
            scales[op.label] = max(scales[op.label], mag)
            fits[op.label] = tuple(fit)
    records = []
    for op in ops:
        r = worst[op.label]
        scale = scales[op.label]
        verdict = "PASS" if r <= tol * (1.0 + scale) else "FAIL"
        records.append(CovarianceRecord(op.label, r, scale, verdict,
                                        fits[op.label]))
    return CovarianceReport(tensor.label, tuple(records), n_samples, seed,
                            tol)
