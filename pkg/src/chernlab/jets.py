"""Metric jets: the metric and its Wirtinger derivatives at chart points.

`wirtinger_jet` is the public single-point operation; batteries use
`metric_jets`, which evaluates a whole batch of points at once and packs
the derivatives into contiguous arrays for tensor assembly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fd
from .errors import InsufficientJet
from .fd import DEFAULT_SCHEME, JetScheme
from .fields import MetricField, as_points

__all__ = ["MetricJet", "JetArrays", "wirtinger_jet", "metric_jets"]


def _unit(n, a):
    e = [0] * n
    e[a] = 1
    return tuple(e)


def _pair(n, a, b):
    e = [0] * n
    e[a] += 1
    e[b] += 1
    return tuple(e)


@dataclass
class JetArrays:
    """Batched derivative pack; leading axis indexes the point batch.

    Index conventions (all antiholomorphic slots are stored unconjugated):
      d1h[b, a, i, j]      = d_a g_{i jbar}
      d1a[b, a, i, j]      = d_abar g_{i jbar}
      d2hh[b, a, c, i, j]  = d_a d_c g_{i jbar}
      d2ha[b, a, c, i, j]  = d_a d_cbar g_{i jbar}
      d2aa[b, a, c, i, j]  = d_abar d_cbar g_{i jbar}
      d3hha[b, a, c, e, i, j] = d_a d_c d_ebar g_{i jbar}   (sym in a, c)
      d3haa[b, a, c, e, i, j] = d_a d_cbar d_ebar g_{i jbar} (sym in c, e)
    """

    points: np.ndarray
    order: int
    g: np.ndarray
    d1h: np.ndarray | None = None
    d1a: np.ndarray | None = None
    d2hh: np.ndarray | None = None
    d2ha: np.ndarray | None = None
    d2aa: np.ndarray | None = None
    d3hhh: np.ndarray | None = None
    d3hha: np.ndarray | None = None
    d3haa: np.ndarray | None = None
    d3aaa: np.ndarray | None = None
    err_max: np.ndarray | None = None

    @property
    def batch(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def require(self, order: int, what: str = "operation"):
        if self.order < order:
            raise InsufficientJet(f"{what} needs jet order >= {order}, have {self.order}")


@dataclass
class MetricJet:
    """All derivatives of the metric components at one point, up to `order`.

    `derivs` maps (alpha, beta) Wirtinger multi-indices to (n, n) component
    matrices; alpha counts holomorphic, beta antiholomorphic derivatives per
    coordinate.  Conjugation symmetry
    conj(derivs[(a, b)]) == transpose(derivs[(b, a)]) holds exactly.
    """

    point: np.ndarray
    order: int
    g: np.ndarray
    derivs: dict
    errors: dict

    @property
    def dim(self) -> int:
        return self.point.shape[0]


def metric_jets(
    field: MetricField,
    points,
    order: int,
    scheme: JetScheme = DEFAULT_SCHEME,
) -> JetArrays:
    """Batched jets of a metric field; see `wirtinger_jet` for the contract."""
    pts = as_points(points)
    n = field.dim
    if order < 0 or order > 3:
        raise ValueError(f"jet order must be in 0..3, got {order}")
    base, derivs, errors = fd.wirtinger_table(
        field.eval,
        pts,
        order,
        scheme=scheme,
        domain=field.contains,
        hermitize=True,
        name=field.name,
    )
    nb = pts.shape[0]
    out = JetArrays(points=pts, order=order, g=base)
    if errors:
        out.err_max = np.max(np.stack([errors[k] for k in errors], axis=0), axis=0)
    else:
        out.err_max = np.zeros(nb)

    zeros = tuple([0] * n)
    if order >= 1:
        d1h = np.empty((nb, n, n, n), dtype=np.complex128)
        d1a = np.empty((nb, n, n, n), dtype=np.complex128)
        for a in range(n):
            d1h[:, a] = derivs[(_unit(n, a), zeros)]
            d1a[:, a] = derivs[(zeros, _unit(n, a))]
        out.d1h, out.d1a = d1h, d1a
    if order >= 2:
        d2hh = np.empty((nb, n, n, n, n), dtype=np.complex128)
        d2ha = np.empty((nb, n, n, n, n), dtype=np.complex128)
        d2aa = np.empty((nb, n, n, n, n), dtype=np.complex128)
        for a in range(n):
            for c in range(n):
                d2hh[:, a, c] = derivs[(_pair(n, a, c), zeros)]
                d2ha[:, a, c] = derivs[(_unit(n, a), _unit(n, c))]
                d2aa[:, a, c] = derivs[(zeros, _pair(n, a, c))]
        out.d2hh, out.d2ha, out.d2aa = d2hh, d2ha, d2aa
    if order >= 3:
        d3hhh = np.empty((nb, n, n, n, n, n), dtype=np.complex128)
        d3hha = np.empty((nb, n, n, n, n, n), dtype=np.complex128)
        d3haa = np.empty((nb, n, n, n, n, n), dtype=np.complex128)
        d3aaa = np.empty((nb, n, n, n, n, n), dtype=np.complex128)
        for a in range(n):
            for c in range(n):
                for e in range(n):
                    tri = tuple(
                        sum(1 for x in (a, c, e) if x == m) for m in range(n)
                    )
                    d3hhh[:, a, c, e] = derivs[(tri, zeros)]
                    d3aaa[:, a, c, e] = derivs[(zeros, tri)]
                    d3hha[:, a, c, e] = derivs[(_pair(n, a, c), _unit(n, e))]
                    d3haa[:, a, c, e] = derivs[(_unit(n, a), _pair(n, c, e))]
        out.d3hhh, out.d3hha, out.d3haa, out.d3aaa = d3hhh, d3hha, d3haa, d3aaa

    out._derivs_dict = derivs  # kept for single-point views
    out._errors_dict = errors
    return out


def wirtinger_jet(
    field: MetricField,
    point,
    order: int,
    scheme: JetScheme = DEFAULT_SCHEME,
) -> MetricJet:
    """All mixed Wirtinger derivatives of the metric components at `point`.

    Central differences in the underlying real coordinates with Richardson
    extrapolation; each total order carries its own step (see
    `fd.DEFAULT_SCHEME`).  Deterministic for fixed field/point/order/scheme.

    Raises
    ------
    DomainViolation
        if a stencil node leaves the declared chart domain.
    NonHermitian
        if the evaluator violates Hermitian symmetry beyond tolerance.
    NotConverged
        from `fd.verify_refinement`, when requested explicitly.
    """
    arrays = metric_jets(field, as_points(point), order, scheme=scheme)
    derivs = {k: v[0] for k, v in arrays._derivs_dict.items()}
    errors = {k: float(v[0]) for k, v in arrays._errors_dict.items()}
    return MetricJet(
        point=arrays.points[0],
        order=order,
        g=arrays.g[0],
        derivs=derivs,
        errors=errors,
    )


def jet_arrays_from_single(field: MetricField, point, order: int, scheme=DEFAULT_SCHEME) -> JetArrays:
    return metric_jets(field, as_points(point), order, scheme=scheme)
