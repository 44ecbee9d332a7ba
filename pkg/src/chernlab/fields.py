"""Metric and vector fields on a single holomorphic chart.

A chart point is a plain complex ndarray of shape (n,).  Fields carry
vectorized evaluators: a metric field maps a batch (B, n) of points to
Hermitian component matrices g_{i jbar} of shape (B, n, n), a vector field
maps (B, n) to the (1,0)-frame components (B, n).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainViolation

__all__ = [
    "Domain",
    "BoxDomain",
    "ShellDomain",
    "MetricField",
    "VectorField",
    "SamplerConfig",
    "as_points",
]


def as_points(z) -> np.ndarray:
    """Coerce input to a (B, n) complex array (a single point gets B=1)."""
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim == 1:
        z = z[None, :]
    if z.ndim != 2:
        raise ValueError(f"expected point array of shape (n,) or (B, n), got {z.shape}")
    return z


@dataclass(frozen=True)
class Domain:
    """Chart domain predicate plus a compact sampling sub-domain."""

    dim: int

    def contains(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class BoxDomain(Domain):
    """Polydisc-like box |z_i - c_i|_inf <= radius, sampled on a smaller box."""

    radius: float = np.inf
    sample_radius: float = 1.0
    center: tuple = None

    def _center(self):
        if self.center is None:
            return np.zeros(self.dim, dtype=np.complex128)
        return np.asarray(self.center, dtype=np.complex128)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = as_points(pts)
        if not np.isfinite(self.radius):
            return np.ones(pts.shape[0], dtype=bool)
        d = np.abs(pts - self._center()[None, :])
        return np.all(d <= self.radius, axis=1)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        re = rng.uniform(-self.sample_radius, self.sample_radius, size=(count, self.dim))
        im = rng.uniform(-self.sample_radius, self.sample_radius, size=(count, self.dim))
        return self._center()[None, :] + (re + 1j * im) / np.sqrt(2.0)


@dataclass(frozen=True)
class ShellDomain(Domain):
    """Annular shell r_min < w(z) < r_max for a radius functional w.

    Defaults to the Euclidean radius; models with a weighted invariant
    radius pass their own functional.
    """

    r_min: float = 0.5
    r_max: float = 2.0
    sample_min: float = 0.7
    sample_max: float = 1.4
    radius_fn: Callable[[np.ndarray], np.ndarray] | None = None

    def _radius(self, pts: np.ndarray) -> np.ndarray:
        if self.radius_fn is not None:
            return self.radius_fn(pts)
        return np.sqrt(np.sum(np.abs(pts) ** 2, axis=1))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        r = self._radius(as_points(pts))
        return (r > self.r_min) & (r < self.r_max)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        out = np.empty((count, self.dim), dtype=np.complex128)
        have = 0
        box = self.sample_max
        while have < count:
            m = max(4 * (count - have), 16)
            cand = (
                rng.uniform(-box, box, size=(m, self.dim))
                + 1j * rng.uniform(-box, box, size=(m, self.dim))
            )
            r = self._radius(cand)
            good = cand[(r >= self.sample_min) & (r <= self.sample_max)]
            take = min(len(good), count - have)
            out[have : have + take] = good[:take]
            have += take
        return out


@dataclass(frozen=True)
class VectorField:
    """Section of T^{1,0} in the coordinate frame."""

    dim: int
    eval_fn: Callable[[np.ndarray], np.ndarray]
    name: str = "vector-field"

    def eval(self, pts) -> np.ndarray:
        pts = as_points(pts)
        out = np.asarray(self.eval_fn(pts), dtype=np.complex128)
        if out.shape != pts.shape:
            raise ValueError(f"{self.name}: evaluator returned shape {out.shape}")
        return out

    def __call__(self, pts):
        return self.eval(pts)


@dataclass(frozen=True)
class MetricField:
    """Hermitian metric on a chart: z |-> g_{i jbar}(z), positive definite.

    `domain` is the validity predicate (stencils must stay inside);
    sampling draws from its declared compact sub-domain.
    """

    dim: int
    eval_fn: Callable[[np.ndarray], np.ndarray]
    domain: Domain
    name: str = "metric"
    designated_field: VectorField | None = None
    frame_fields: tuple = ()
    expected_fixed_dim: int | None = None
    base_point: tuple = None
    loop_amplitude: float = 0.22

    def eval(self, pts) -> np.ndarray:
        pts = as_points(pts)
        out = np.asarray(self.eval_fn(pts), dtype=np.complex128)
        if out.shape != (pts.shape[0], self.dim, self.dim):
            raise ValueError(f"{self.name}: evaluator returned shape {out.shape}")
        return out

    def __call__(self, pts):
        return self.eval(pts)

    def contains(self, pts) -> np.ndarray:
        return self.domain.contains(as_points(pts))

    def require_inside(self, pts):
        ok = self.contains(pts)
        if not np.all(ok):
            raise DomainViolation(
                f"{int(np.count_nonzero(~ok))} points outside the domain of {self.name!r}"
            )

    def sample_points(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.domain.sample(rng, count)

    def base(self) -> np.ndarray:
        if self.base_point is not None:
            return np.asarray(self.base_point, dtype=np.complex128)
        return np.zeros(self.dim, dtype=np.complex128)

    def perturbed(self, h_field: Callable[[np.ndarray], np.ndarray], eps: float) -> "MetricField":
        """The metric field z |-> g(z) + eps*h(z) on the same domain."""

        def ev(pts, _base=self.eval_fn, _h=h_field, _e=eps):
            return np.asarray(_base(pts)) + _e * np.asarray(_h(pts))

        return MetricField(
            dim=self.dim,
            eval_fn=ev,
            domain=self.domain,
            name=f"{self.name}+eps*h",
        )


@dataclass(frozen=True)
class SamplerConfig:
    """Seeded sampling policy for stochastic checks."""

    points: int = 50
    vectors: int = 8
    seed: int = 7

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def unit_vectors_g(rng: np.random.Generator, g: np.ndarray, count: int) -> np.ndarray:
    """Draw `count` vectors uniformly from the unit sphere of the g-metric.

    g is a single Hermitian matrix (n, n); returns (count, n).
    """
    n = g.shape[-1]
    v = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    # |v|_g^2 = sum_{ij} g_{i jbar} v^i conj(v^j)
    nrm2 = np.einsum("ij,ai,aj->a", g, v, np.conj(v)).real
    return v / np.sqrt(nrm2)[:, None]
