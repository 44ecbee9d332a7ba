"""The torsion-twisted connection: curvature, transport, holonomy, Killing tests.

The twisted connection subtracts torsion contraction from the Chern
connection; in the holomorphic coordinate frame its coefficients are the
transposed Christoffels,

    GammaT^k_{ij} = Gamma^k_{ij} - T^k_{ij} = Gamma^k_{ji},

and its (0,1)-part coincides with d-bar, so antiholomorphic coefficients
vanish identically.  Parallel (1,0)-fields of this connection are exactly
the holomorphic Killing fields, which is what `killing_residual` and
`nt_parallel_residual` probe from two independent directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield

import numpy as np

from . import fd
from .errors import DependentFields, DomainViolation, IntegrationDiverged
from .fd import DEFAULT_SCHEME, FAST_FIRST_ORDER, JetScheme
from .fields import MetricField, VectorField, as_points
from .jets import JetArrays, metric_jets
from .chart_engine import chern_pack_arrays, nabla_hol_torsion, _as_arrays
from .linalg import g_orthonormalize, subspace_angle

__all__ = [
    "PathSpec",
    "TransportResult",
    "HolonomySample",
    "FixedSubspace",
    "KernelCutoff",
    "tt_coefficients",
    "tt_curvature",
    "TTCurvature",
    "parallel_transport",
    "transport_matrix",
    "random_loops",
    "holonomy_sample",
    "fixed_subspace",
    "killing_residual",
    "nt_parallel_residual",
    "bracket_structure",
]


# ---------------------------------------------------------------------------
# coefficients and curvature
# ---------------------------------------------------------------------------


def tt_coefficients(jet) -> np.ndarray:
    """Twisted-connection coefficients GammaT^k_{ij} = Gamma^k_{ji}.

    The (0,1)-direction coefficients are identically zero and are not
    stored.
    """
    arrays = _as_arrays(jet)
    arrays.require(1, "tt_coefficients")
    g = arrays.g
    ginv = np.conj(np.linalg.inv(g))
    gamma = np.einsum("...kl,...ijl->...kij", ginv, arrays.d1h)
    out = np.swapaxes(gamma, -2, -1)
    return out[0] if arrays.batch == 1 and not isinstance(jet, JetArrays) else out


@dataclass
class TTCurvature:
    part11: np.ndarray       # [i, j, k, l]: OmegaT(d_i, d_jbar) d_k, value^l
    part20: np.ndarray       # [i, j, k, l]: OmegaT(d_i, d_j) d_k, value^l
    part02_norm: float
    discrepancy_rel: float   # direct curvature of GammaT vs torsion/curvature formulas


def tt_curvature_parts(arrays: JetArrays):
    """(1,1)/(2,0) parts via the structural formulas (needs order >= 2)."""
    pack = chern_pack_arrays(arrays)
    part11 = np.einsum("...kjil->...ijkl", pack.omega_hi)
    nabT = nabla_hol_torsion(arrays, pack)  # [a, l, j, k] = nabla_a T^l_{jk}
    part20 = np.einsum("...klij->...ijkl", nabT)  # nabla_k T^l_{ij}
    return pack, part11, part20


def tt_curvature(jet) -> TTCurvature:
    """Curvature of the twisted connection, computed two ways.

    Direct route: the curvature tensor of the coefficient field GammaT
    (derivatives of GammaT plus commutator terms).  Formula route: the
    (1,1)-part equals Omega with the vector slots exchanged, the (2,0)-part
    is the covariant derivative of torsion.  Returns both parts and the
    max-norm relative discrepancy; the direct (0,2)-part vanishes
    identically because the antiholomorphic coefficients are zero.
    """
    arrays = _as_arrays(jet)
    arrays.require(3, "tt_curvature")
    pack, part11, part20 = tt_curvature_parts(arrays)
    ginv, d1h, d2ha, d2hh = pack.ginv, arrays.d1h, arrays.d2ha, arrays.d2hh
    dginv_a, dginv_h = pack.dginv_a, pack.dginv_h

    # direct (1,1): -d_jbar GammaT^l_{ik} = -d_jbar Gamma^l_{ki}
    direct11 = -(
        np.einsum("...jls,...kis->...ijkl", dginv_a, d1h)
        + np.einsum("...ls,...kjis->...ijkl", ginv, d2ha)
    )
    # direct (2,0): d_i GammaT^l_{jk} - d_j GammaT^l_{ik} + [GammaT_i, GammaT_j]^l_k
    dgT = np.einsum("...als,...kbs->...abkl", dginv_h, d1h) + np.einsum(
        "...ls,...akbs->...abkl", ginv, d2hh
    )  # [a, b, k, l] = d_a GammaT^l_{bk} = d_a Gamma^l_{kb}
    gT = np.swapaxes(pack.gamma, -2, -1)
    comm = np.einsum("...lip,...pjk->...ijkl", gT, gT) - np.einsum(
        "...ljp,...pik->...ijkl", gT, gT
    )
    direct20 = dgT - np.einsum("...jikl->...ijkl", dgT) + comm

    scale = max(
        float(np.max(np.abs(part11))), float(np.max(np.abs(part20))), 1e-30
    )
    disc = max(
        float(np.max(np.abs(direct11 - part11))),
        float(np.max(np.abs(direct20 - part20))),
    )
    single = arrays.batch == 1
    return TTCurvature(
        part11=part11[0] if single else part11,
        part20=part20[0] if single else part20,
        part02_norm=0.0,
        discrepancy_rel=disc / scale,
    )


# ---------------------------------------------------------------------------
# paths and parallel transport
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathSpec:
    """Smooth curve given by a trigonometric polynomial around a base point.

    curve(s) = base + sum_m cos_c[m] (cos(2 pi (m+1) s) - 1)
                    + sin_c[m] sin(2 pi (m+1) s),  s in [0, 1].
    With this normalization curve(0) = base, and the curve is closed.
    Open sub-arcs are produced by `subpath`.
    """

    base: tuple
    cos_c: tuple
    sin_c: tuple
    closed: bool = True
    s_range: tuple = (0.0, 1.0)

    def _coeffs(self):
        return (
            np.asarray(self.base, dtype=np.complex128),
            np.asarray(self.cos_c, dtype=np.complex128),
            np.asarray(self.sin_c, dtype=np.complex128),
        )

    def points(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        a, b = self.s_range
        t = a + (b - a) * s
        base, cc, sc = self._coeffs()
        m = np.arange(1, cc.shape[0] + 1)
        ang = 2 * np.pi * np.outer(t, m)
        return (
            base[None, :]
            + (np.cos(ang) - 1.0) @ cc
            + np.sin(ang) @ sc
        )

    def velocity(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        a, b = self.s_range
        t = a + (b - a) * s
        base, cc, sc = self._coeffs()
        m = np.arange(1, cc.shape[0] + 1)
        ang = 2 * np.pi * np.outer(t, m)
        w = 2 * np.pi * m
        dv = (-np.sin(ang) * w[None, :]) @ cc + (np.cos(ang) * w[None, :]) @ sc
        return (b - a) * dv

    def reverse(self) -> "PathSpec":
        a, b = self.s_range
        return PathSpec(self.base, self.cos_c, self.sin_c, self.closed, (b, a))

    def subpath(self, s0: float, s1: float) -> "PathSpec":
        a, b = self.s_range
        return PathSpec(
            self.base,
            self.cos_c,
            self.sin_c,
            closed=False,
            s_range=(a + (b - a) * s0, a + (b - a) * s1),
        )

    def to_dict(self) -> dict:
        return {
            "base": [[z.real, z.imag] for z in np.asarray(self.base, dtype=complex)],
            "fourier_coeffs": {
                "cos": [[[z.real, z.imag] for z in row] for row in np.asarray(self.cos_c, dtype=complex)],
                "sin": [[[z.real, z.imag] for z in row] for row in np.asarray(self.sin_c, dtype=complex)],
            },
            "closed": bool(self.closed),
        }


def random_loops(
    field: MetricField,
    base,
    count: int,
    rng: np.random.Generator,
    amplitude: float | None = None,
    max_freq: int = 2,
    max_tries: int = 400,
) -> list[PathSpec]:
    """Seeded family of closed loops through `base`, rejected if they exit the chart."""
    base = np.asarray(base, dtype=np.complex128)
    n = base.shape[0]
    amp = field.loop_amplitude if amplitude is None else amplitude
    grid = np.linspace(0.0, 1.0, 129)
    loops = []
    tries = 0
    while len(loops) < count:
        tries += 1
        if tries > max_tries + count:
            raise DomainViolation(
                f"could not draw {count} in-domain loops after {tries} tries"
            )
        cc = amp * (
            rng.uniform(-1, 1, size=(max_freq, n)) + 1j * rng.uniform(-1, 1, size=(max_freq, n))
        ) / np.sqrt(2.0 * max_freq)
        sc = amp * (
            rng.uniform(-1, 1, size=(max_freq, n)) + 1j * rng.uniform(-1, 1, size=(max_freq, n))
        ) / np.sqrt(2.0 * max_freq)
        loop = PathSpec(tuple(base), tuple(map(tuple, cc)), tuple(map(tuple, sc)))
        if np.all(field.contains(loop.points(grid))):
            loops.append(loop)
    return loops


@dataclass
class TransportResult:
    matrix: np.ndarray
    error_estimate: float
    steps: int

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=np.complex128)


def _connection_matrices(field: MetricField, pts: np.ndarray, vel: np.ndarray, scheme) -> np.ndarray:
    """A(s)[k, j] = -GammaT^k_{ij} velocity^i = -Gamma^k_{ji} velocity^i, batched over s."""
    jets = metric_jets(field, pts, 1, scheme=scheme)
    ginv = np.conj(np.linalg.inv(jets.g))
    gamma = np.einsum("...kl,...ijl->...kij", ginv, jets.d1h)
    return -np.einsum("...kji,...i->...kj", gamma, vel)


def _rk4_linear(a_grid: np.ndarray, h: float) -> np.ndarray:
    """Integrate P' = A(s) P over a uniform grid holding A at steps and midpoints.

    `a_grid` has 2N+1 matrices (endpoints at even indices, midpoints odd).
    """
    n = a_grid.shape[-1]
    p = np.eye(n, dtype=np.complex128)
    nsteps = (a_grid.shape[0] - 1) // 2
    for k in range(nsteps):
        a0 = a_grid[2 * k]
        am = a_grid[2 * k + 1]
        a1 = a_grid[2 * k + 2]
        k1 = a0 @ p
        k2 = am @ (p + 0.5 * h * k1)
        k3 = am @ (p + 0.5 * h * k2)
        k4 = a1 @ (p + h * k3)
        p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return p


def transport_matrix(
    field: MetricField,
    path: PathSpec,
    tol: float = 1e-10,
    n0: int = 64,
    n_max: int = 8192,
    scheme: JetScheme = FAST_FIRST_ORDER,
) -> TransportResult:
    """Twisted parallel transport along `path` with step-halving error control.

    Integrates dV^k/ds + GammaT^k_{ij} gamma'^i V^j = 0 for the full frame
    with classical 4th-order steps; the reported error estimate is the
    Richardson difference between the N- and 2N-step solutions.
    """
    nsteps = n0
    while True:
        s = np.linspace(0.0, 1.0, 2 * nsteps + 1)
        pts = path.points(s)
        field.require_inside(pts)
        vel = path.velocity(s)
        a_grid = _connection_matrices(field, pts, vel, scheme)
        h = 1.0 / nsteps
        p_fine = _rk4_linear(a_grid, h)
        p_coarse = _rk4_linear(a_grid[::2], 2 * h)
        err = float(np.max(np.abs(p_fine - p_coarse))) / 15.0
        if err <= tol or nsteps >= n_max:
            if err > max(tol * 100, 1e-6) and nsteps >= n_max:
                raise IntegrationDiverged(
                    f"transport error {err:.3e} above tolerance at {nsteps} steps"
                )
            return TransportResult(matrix=p_fine, error_estimate=err, steps=2 * nsteps)
        nsteps *= 2


def parallel_transport(field: MetricField, path: PathSpec, v0, **kw):
    """Transport the vector `v0` along `path`; returns (vector, TransportResult)."""
    res = transport_matrix(field, path, **kw)
    return res.apply(np.asarray(v0, dtype=np.complex128)), res


# ---------------------------------------------------------------------------
# holonomy sampling and the fixed subspace
# ---------------------------------------------------------------------------


@dataclass
class HolonomySample:
    base: np.ndarray
    g_base: np.ndarray
    transports: list
    curvature_ops: list
    loops: list
    seed: int | None = None


@dataclass(frozen=True)
class KernelCutoff:
    """Singular values below max(rel * sigma_max, abs) define the joint kernel.

    The absolute floor keeps exactly-flat stacks (all operators at noise
    level) from reporting a spuriously small fixed space.
    """

    rel: float = 1e-6
    abs: float = 1e-8
    block_floor: float = 1e-8


@dataclass
class FixedSubspace:
    basis: np.ndarray
    dim: int
    smallest_retained: float
    largest_discarded: float
    singular_values: np.ndarray
    spectral_gap: float


def holonomy_sample(
    field: MetricField,
    base,
    n_loops: int,
    seed: int = 0,
    include_curvature: bool = True,
    tol: float = 1e-10,
    amplitude: float | None = None,
) -> HolonomySample:
    """Transports around seeded loops plus conjugated curvature operators."""
    rng = np.random.default_rng(seed)
    base = np.asarray(base, dtype=np.complex128)
    loops = random_loops(field, base, n_loops, rng, amplitude=amplitude)
    transports = [transport_matrix(field, lp, tol=tol) for lp in loops]
    g_base = field.eval(base[None, :])[0]

    ops = []
    if include_curvature:
        n = field.dim
        for lp in loops:
            half = lp.subpath(0.0, 0.5)
            p_half = transport_matrix(field, half, tol=tol).matrix
            p_inv = np.linalg.inv(p_half)
            y = lp.points(np.array([0.5]))[0]
            arrays = metric_jets(field, y[None, :], 2)
            _, part11, part20 = tt_curvature_parts(arrays)
            xi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            eta = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            e11 = np.einsum("ijkl,i,j->lk", part11[0], xi, np.conj(eta))
            e20 = np.einsum("ijkl,i,j->lk", part20[0], xi, eta)
            ops.append(p_inv @ e11 @ p_half)
            ops.append(p_inv @ e20 @ p_half)
    return HolonomySample(
        base=base,
        g_base=g_base,
        transports=transports,
        curvature_ops=ops,
        loops=loops,
        seed=seed,
    )


def fixed_subspace(sample: HolonomySample, cutoff: KernelCutoff = KernelCutoff()) -> FixedSubspace:
    """Joint kernel of {P_gamma - 1} and sampled conjugated curvature operators.

    Stacked singular-value analysis: each block is normalized to unit
    Frobenius norm unless it already sits below the block floor (a block of
    zeros constrains nothing).  Reports the smallest retained and largest
    discarded singular values.
    """
    n = sample.base.shape[0]
    blocks = []
    eye = np.eye(n, dtype=np.complex128)
    for tr in sample.transports:
        blocks.append(tr.matrix - eye)
    blocks.extend(sample.curvature_ops)
    if not blocks:
        raise ValueError("holonomy sample holds no transports or curvature operators")

    rows = []
    for blk in blocks:
        nrm = float(np.linalg.norm(blk))
        rows.append(blk / nrm if nrm > cutoff.block_floor else blk)
    stack = np.concatenate(rows, axis=0)
    svals = np.linalg.svd(stack, compute_uv=False)
    smax = float(svals[0]) if len(svals) else 0.0
    thr = max(cutoff.rel * smax, cutoff.abs)
    _, s, vh = np.linalg.svd(stack)
    null_mask = s < thr
    # Right-singular vectors with small singular values span the kernel.
    kernel = vh[null_mask].conj().T if np.any(null_mask) else np.zeros((n, 0), dtype=np.complex128)
    if smax <= cutoff.abs:
        kernel = np.eye(n, dtype=np.complex128)
        null_mask = np.ones_like(s, dtype=bool)
    basis = g_orthonormalize(kernel, sample.g_base) if kernel.size else kernel
    retained = float(np.min(s[~null_mask])) if np.any(~null_mask) else 0.0
    discarded = float(np.max(s[null_mask])) if np.any(null_mask) else 0.0
    gap = retained / max(discarded, 1e-300) if np.any(null_mask) and np.any(~null_mask) else np.inf
    return FixedSubspace(
        basis=basis,
        dim=basis.shape[1],
        smallest_retained=retained,
        largest_discarded=discarded,
        singular_values=s,
        spectral_gap=float(gap),
    )


# ---------------------------------------------------------------------------
# Killing and parallelism residuals
# ---------------------------------------------------------------------------


def _vf_first_derivs(vf: VectorField, pts: np.ndarray, scheme=None):
    """(d_a v^k, d_abar v^k) of a vector field, batched; indices [b, a, k]."""
    scheme = scheme or JetScheme(steps={1: 1e-4}, levels={1: 2})
    _, derivs, _ = fd.wirtinger_table(vf.eval, pts, 1, scheme=scheme, name=vf.name)
    n = pts.shape[1]
    zeros = tuple([0] * n)
    from .jets import _unit

    dh = np.stack([derivs[(_unit(n, a), zeros)] for a in range(n)], axis=1)
    da = np.stack([derivs[(zeros, _unit(n, a))] for a in range(n)], axis=1)
    return dh, da


def _flow_map(vf: VectorField, pts: np.ndarray, eps: float) -> np.ndarray:
    """One classical 4th-order step of dz/ds = v(z) over time eps."""
    k1 = vf.eval(pts)
    k2 = vf.eval(pts + 0.5 * eps * k1)
    k3 = vf.eval(pts + 0.5 * eps * k2)
    k4 = vf.eval(pts + eps * k3)
    return pts + (eps / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _pullback_metric(field: MetricField, vf: VectorField, point: np.ndarray, eps: float, delta: float):
    """(phi_eps^* g)_{i jbar} at `point` for the real flow of vf.

    The Wirtinger Jacobian of the flow map is taken by central differences
    with step `delta`; for non-holomorphic fields the antiholomorphic block
    contributes a second pullback term.
    """
    n = point.shape[0]
    # stencil: +/- delta along each real axis
    offs = np.zeros((4 * n, n), dtype=np.complex128)
    for a in range(n):
        offs[4 * a + 0, a] = delta
        offs[4 * a + 1, a] = -delta
        offs[4 * a + 2, a] = 1j * delta
        offs[4 * a + 3, a] = -1j * delta
    batch = np.concatenate([point[None, :], point[None, :] + offs], axis=0)
    phi = _flow_map(vf, batch, eps)
    phi0 = phi[0]
    jac_h = np.zeros((n, n), dtype=np.complex128)  # [k, a] = d phi^k / d z^a
    jac_a = np.zeros((n, n), dtype=np.complex128)  # [k, a] = d phi^k / d zbar^a
    for a in range(n):
        dx = (phi[1 + 4 * a] - phi[2 + 4 * a]) / (2 * delta)
        dy = (phi[3 + 4 * a] - phi[4 + 4 * a]) / (2 * delta)
        jac_h[:, a] = 0.5 * (dx - 1j * dy)
        jac_a[:, a] = 0.5 * (dx + 1j * dy)
    g_phi = field.eval(phi0[None, :])[0]
    term1 = np.einsum("kl,ki,lj->ij", g_phi, jac_h, np.conj(jac_h))
    term2 = np.einsum("lk,lj,ki->ij", g_phi, jac_a, np.conj(jac_a))
    return term1 + term2


@dataclass
class KillingResidual:
    lie_derivative: float
    holomorphy: float

    @property
    def combined(self) -> float:
        return max(self.lie_derivative, self.holomorphy)


def killing_residual(
    field: MetricField, vf: VectorField, point, eps: float | None = None
) -> KillingResidual:
    """Numerical Lie derivative of g along vf plus the holomorphy defect.

    Flows the point for +/- eps with one 4th-order step, pulls the metric
    back through the flow map, and takes the central difference in eps; the
    holomorphy residual is max |d_abar v^k|.
    """
    point = np.asarray(point, dtype=np.complex128).reshape(-1)
    scale = 1.0 + float(np.max(np.abs(point)))
    eps = eps if eps is not None else 1e-4 * scale
    delta = 1e-4 * scale
    gp = _pullback_metric(field, vf, point, +eps, delta)
    gm = _pullback_metric(field, vf, point, -eps, delta)
    lie = (gp - gm) / (2 * eps)
    _, da = _vf_first_derivs(vf, point[None, :])
    return KillingResidual(
        lie_derivative=float(np.max(np.abs(lie))),
        holomorphy=float(np.max(np.abs(da[0]))),
    )


def nt_parallel_residual(field: MetricField, vf: VectorField, point) -> float:
    """Max-norm of the twisted covariant derivative of vf at `point`.

    Holomorphic part d_i v^k + GammaT^k_{ij} v^j, antiholomorphic part
    d_ibar v^k.
    """
    pts = as_points(point)
    arrays = metric_jets(field, pts, 1)
    gamma_t = tt_coefficients(arrays)
    if gamma_t.ndim == 3:
        gamma_t = gamma_t[None]
    v = vf.eval(pts)
    dh, da = _vf_first_derivs(vf, pts)
    hol = dh + np.einsum("...kaj,...j->...ak", gamma_t, v)
    return float(max(np.max(np.abs(hol)), np.max(np.abs(da))))


# ---------------------------------------------------------------------------
# bracket structure of a field family
# ---------------------------------------------------------------------------


@dataclass
class BracketStructure:
    coefficients: np.ndarray      # [point, k, i, j]
    span_residual: float
    variation: float


def bracket_structure(fields: list[VectorField], points) -> BracketStructure:
    """Structure constants of the span of `fields` from pointwise Lie brackets.

    [xi_i, xi_j]^k = xi_i^p d_p xi_j^k - xi_j^p d_p xi_i^k is solved for
    coefficients in span{xi_k(z)} at each point; reports the out-of-span
    residual and the max cross-point variation of the coefficients.
    """
    pts = as_points(points)
    npts, n = pts.shape
    r = len(fields)
    vals = np.stack([f.eval(pts) for f in fields], axis=1)        # [b, i, k]
    dhs = []
    for f in fields:
        dh, _ = _vf_first_derivs(f, pts)
        dhs.append(dh)
    dh = np.stack(dhs, axis=1)                                    # [b, i, a, k]

    coeffs = np.zeros((npts, r, r, r), dtype=np.complex128)       # [b, k, i, j]
    worst_span = 0.0
    for b in range(npts):
        frame = vals[b].T                                         # [k(component), i(field)]
        cond = np.linalg.cond(frame) if r == n else None
        if r == n and cond > 1e8:
            raise DependentFields(
                f"field frame condition number {cond:.2e} at point {b}"
            )
        for i in range(r):
            for j in range(i + 1, r):
                br = vals[b, i] @ dh[b, j] - vals[b, j] @ dh[b, i]
                c, res, rank, _ = np.linalg.lstsq(frame, br, rcond=None)
                if rank < r:
                    raise DependentFields("field span degenerates at a sample point")
                rem = float(np.linalg.norm(frame @ c - br))
                scl = max(float(np.linalg.norm(br)), 1e-30)
                worst_span = max(worst_span, rem / scl if scl > 1e-15 else rem)
                coeffs[b, :, i, j] = c
                coeffs[b, :, j, i] = -c
    variation = float(np.max(np.abs(coeffs - coeffs.mean(axis=0, keepdims=True)))) if npts > 1 else 0.0
    return BracketStructure(coefficients=coeffs, span_residual=worst_span, variation=variation)
