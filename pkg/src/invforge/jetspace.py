"""Second-order jet coordinates for m scalar fields over N base coordinates.

A :class:`JetPoint` stores numeric values for the base coordinates ``x_i``,
the field values ``u^r``, all first derivatives ``u^r_i`` and all second
derivatives ``u^r_ij``.  Second derivatives are stored once per unordered
index pair (i <= j); reading ``(j, i)`` returns the ``(i, j)`` slot.

Base indices are 0-based (index 0 is the timelike coordinate for the
Minkowski metric and the time coordinate in Galilean setups); field indices
are 1-based.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum


class FieldKind(Enum):
    REAL = "real"
    COMPLEX = "complex"

    def conjugate_index(self, r: int, n_fields: int) -> int:
        """Slot holding the conjugate of field ``r``.

        Complex fields occupy paired slots: fields 1..m/2 and their
        conjugates m/2+1..m.  For real fields the partner is the field
        itself.
        """
        if self is FieldKind.REAL:
            return r
        half = n_fields // 2
        return r + half if r <= half else r - half


REAL = FieldKind.REAL
COMPLEX = FieldKind.COMPLEX


@dataclass(frozen=True)
class Metric:
    """Diagonal contraction weights: euclidean identity or diag(1,-1,...,-1)."""

    kind: str  # "euclidean" | "minkowski"
    dim: int

    def __post_init__(self):
        if self.kind not in ("euclidean", "minkowski"):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("metric dimension must be positive")

    def sign(self, i: int) -> float:
        if self.kind == "euclidean":
            return 1.0
        return 1.0 if i == 0 else -1.0

    @property
    def signs(self) -> tuple:
        return tuple(self.sign(i) for i in range(self.dim))


def euclidean(dim: int) -> Metric:
    return Metric("euclidean", dim)


def minkowski(dim: int) -> Metric:
    return Metric("minkowski", dim)


def contract(metric: Metric, a, b):
    """Metric contraction sum_i g_ii a_i b_i."""
    if len(a) != metric.dim or len(b) != metric.dim:
        raise ValueError(
            f"dimension mismatch: metric dim {metric.dim}, "
            f"vectors {len(a)} and {len(b)}"
        )
    total = 0.0
    for i in range(metric.dim):
        total = total + metric.sign(i) * a[i] * b[i]
    return total


@dataclass(frozen=True)
class JetCoordinateId:
    """Tag for one jet coordinate: base(i), field(r), d1(r,i) or d2(r,i<=j)."""

    kind: str  # "base" | "field" | "d1" | "d2"
    r: int = 0
    i: int = 0
    j: int = 0

    def __str__(self):
        if self.kind == "base":
            return f"x{self.i}"
        if self.kind == "field":
            return f"u{self.r}"
        if self.kind == "d1":
            return f"u{self.r}_{self.i}"
        return f"u{self.r}_{self.i}{self.j}"


def base_coord(i: int) -> JetCoordinateId:
    return JetCoordinateId("base", 0, i, 0)


def field_coord(r: int) -> JetCoordinateId:
    return JetCoordinateId("field", r, 0, 0)


def d1_coord(r: int, i: int) -> JetCoordinateId:
    return JetCoordinateId("d1", r, i, 0)


def d2_coord(r: int, i: int, j: int) -> JetCoordinateId:
    if i > j:
        i, j = j, i
    return JetCoordinateId("d2", r, i, j)


def coord_count(n_base: int, n_fields: int) -> int:
    return n_base + n_fields + n_fields * n_base + n_fields * n_base * (n_base + 1) // 2


def enumerate_coords(n_base: int, n_fields: int) -> list:
    """Canonical ordering of all jet coordinates for (N, m)."""
    coords = [base_coord(i) for i in range(n_base)]
    coords += [field_coord(r) for r in range(1, n_fields + 1)]
    for r in range(1, n_fields + 1):
        coords += [d1_coord(r, i) for i in range(n_base)]
    for r in range(1, n_fields + 1):
        for i in range(n_base):
            for j in range(i, n_base):
                coords.append(d2_coord(r, i, j))
    return coords


def _pack(i: int, j: int, n: int) -> int:
    # upper-triangle row-major slot for i <= j
    return i * n - i * (i - 1) // 2 + (j - i)


@dataclass(frozen=True)
class JetPoint:
    """Immutable numeric point of the second-order jet space."""

    n_base: int
    n_fields: int
    field_kind: FieldKind
    x: tuple
    u: tuple
    du: tuple  # du[r-1][i]
    ddu: tuple  # ddu[r-1][packed(i, j)]

    def __post_init__(self):
        n, m = self.n_base, self.n_fields
        npairs = n * (n + 1) // 2
        if len(self.x) != n or len(self.u) != m:
            raise ValueError("inconsistent base/field array sizes")
        if len(self.du) != m or any(len(row) != n for row in self.du):
            raise ValueError("inconsistent first-derivative array sizes")
        if len(self.ddu) != m or any(len(row) != npairs for row in self.ddu):
            raise ValueError("inconsistent second-derivative array sizes")

    def _check(self, cid: JetCoordinateId):
        if cid.kind == "base":
            if not 0 <= cid.i < self.n_base:
                raise ValueError(f"base index out of range: {cid}")
        elif not 1 <= cid.r <= self.n_fields:
            raise ValueError(f"field index out of range: {cid}")
        elif cid.kind == "d1":
            if not 0 <= cid.i < self.n_base:
                raise ValueError(f"derivative index out of range: {cid}")
        elif cid.kind == "d2":
            if not (0 <= cid.i < self.n_base and 0 <= cid.j < self.n_base):
                raise ValueError(f"derivative index out of range: {cid}")

    def value(self, cid: JetCoordinateId):
        self._check(cid)
        if cid.kind == "base":
            return self.x[cid.i]
        if cid.kind == "field":
            return self.u[cid.r - 1]
        if cid.kind == "d1":
            return self.du[cid.r - 1][cid.i]
        i, j = min(cid.i, cid.j), max(cid.i, cid.j)
        return self.ddu[cid.r - 1][_pack(i, j, self.n_base)]

    def replace(self, cid: JetCoordinateId, value) -> "JetPoint":
        """Functional update of one coordinate; returns a new point."""
        self._check(cid)
        if cid.kind == "base":
            x = list(self.x)
            x[cid.i] = value
            return JetPoint(self.n_base, self.n_fields, self.field_kind,
                            tuple(x), self.u, self.du, self.ddu)
        if cid.kind == "field":
            u = list(self.u)
            u[cid.r - 1] = value
            return JetPoint(self.n_base, self.n_fields, self.field_kind,
                            self.x, tuple(u), self.du, self.ddu)
        if cid.kind == "d1":
            du = [list(row) for row in self.du]
            du[cid.r - 1][cid.i] = value
            return JetPoint(self.n_base, self.n_fields, self.field_kind,
                            self.x, self.u, tuple(tuple(r) for r in du),
                            self.ddu)
        ddu = [list(row) for row in self.ddu]
        i, j = min(cid.i, cid.j), max(cid.i, cid.j)
        ddu[cid.r - 1][_pack(i, j, self.n_base)] = value
        return JetPoint(self.n_base, self.n_fields, self.field_kind,
                        self.x, self.u, self.du,
                        tuple(tuple(r) for r in ddu))

    def conjugate_index(self, r: int) -> int:
        return self.field_kind.conjugate_index(r, self.n_fields)

    def coords(self) -> list:
        return enumerate_coords(self.n_base, self.n_fields)


def _signed(rng: random.Random) -> float:
    mag = rng.uniform(0.5, 2.0)
    return mag if rng.random() < 0.5 else -mag


def sample_generic(n_base: int, n_fields: int, field_kind: FieldKind = REAL,
                   seed: int = 0, positive_fields: bool = False) -> JetPoint:
    """Deterministic generic point: every component has magnitude in
    [0.5, 2.0] with random sign.

    ``positive_fields`` forces real field values into [0.5, 2.0] (needed by
    expressions with fractional powers of u).  For the complex kind the
    conjugate slots are filled with the conjugates of their partners.
    """
    if n_base < 1 or n_fields < 1:
        raise ValueError("n_base and n_fields must be at least 1")
    if field_kind is COMPLEX and n_fields % 2 != 0:
        raise ValueError("complex field kind requires an even slot count")
    rng = random.Random(f"jet:{n_base}:{n_fields}:{field_kind.value}:{seed}")
    n, m = n_base, n_fields
    npairs = n * (n + 1) // 2

    def scalar():
        if field_kind is COMPLEX:
            return complex(_signed(rng), _signed(rng))
        return _signed(rng)

    x = tuple(_signed(rng) for _ in range(n))
    if field_kind is REAL:
        u = [rng.uniform(0.5, 2.0) if positive_fields else _signed(rng)
             for _ in range(m)]
        du = [[_signed(rng) for _ in range(n)] for _ in range(m)]
        ddu = [[_signed(rng) for _ in range(npairs)] for _ in range(m)]
    else:
        half = m // 2
        u = [scalar() for _ in range(half)]
        du = [[scalar() for _ in range(n)] for _ in range(half)]
        ddu = [[scalar() for _ in range(npairs)] for _ in range(half)]
        u += [v.conjugate() for v in u]
        du += [[v.conjugate() for v in row] for row in du[:half]]
        ddu += [[v.conjugate() for v in row] for row in ddu[:half]]
    return JetPoint(n, m, field_kind, x, tuple(u),
                    tuple(tuple(row) for row in du),
                    tuple(tuple(row) for row in ddu))


def to_log_jets(point: JetPoint) -> JetPoint:
    """Convert u-jets to jets of log(u), field by field (chain rule to
    second order): v = log u, v_i = u_i/u, v_ij = u_ij/u - u_i u_j / u^2.
    """
    from .dual import dlog  # local import keeps module load light

    n, m = point.n_base, point.n_fields
    u = []
    du = []
    ddu = []
    for r in range(1, m + 1):
        ur = point.u[r - 1]
        u.append(dlog(ur))
        du.append(tuple(point.du[r - 1][i] / ur for i in range(n)))
        row = []
        for i in range(n):
            for j in range(i, n):
                uij = point.value(d2_coord(r, i, j))
                row.append(uij / ur
                           - point.du[r - 1][i] * point.du[r - 1][j] / (ur * ur))
        ddu.append(tuple(row))
    return JetPoint(n, m, point.field_kind, point.x, tuple(u), tuple(du),
                    tuple(ddu))


def from_log_jets(point: JetPoint) -> JetPoint:
    """Inverse of :func:`to_log_jets`: u = exp(v)."""
    from .dual import dexp

    n, m = point.n_base, point.n_fields
    u = []
    du = []
    ddu = []
    for r in range(1, m + 1):
        ur = dexp(point.u[r - 1])
        u.append(ur)
        du.append(tuple(point.du[r - 1][i] * ur for i in range(n)))
        row = []
        for i in range(n):
            for j in range(i, n):
                vij = point.value(d2_coord(r, i, j))
                row.append(ur * (vij + point.du[r - 1][i] * point.du[r - 1][j]))
        ddu.append(tuple(row))
    return JetPoint(n, m, point.field_kind, point.x, tuple(u), tuple(du),
                    tuple(ddu))
