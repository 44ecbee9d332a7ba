"""Invariant-frame geometry and the built-in model registry.

Lie algebra data uses the frame convention: c^k_{ij} are the structure
constants of the invariant (1,0)-frame, [xi_i, xi_j] = c^k_{ij} xi_k.  With
a metric whose frame components are constant the Chern connection
annihilates the frame, so the curvature vanishes and the torsion is
T^k_{ij} = -c^k_{ij}; everything else reduces to finite-dimensional linear
algebra.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dfield

import numpy as np

from .errors import BadParams, DegenerateQuotient, UnknownModel
from .fields import BoxDomain, MetricField, ShellDomain, VectorField
from .linalg import g_orthonormalize, subspace_angle

__all__ = [
    "LieAlgebraData",
    "SubalgebraData",
    "FrameMetric",
    "FrameGeometry",
    "frame_geometry",
    "submersion_rho",
    "normalizer",
    "null_rho_equals_normalizer_check",
    "algebra_registry",
    "subalgebra_registry",
    "load_algebra_file",
    "algebra_to_dict",
    "model_registry",
    "MODEL_NAMES",
]

JACOBI_TOL = 1e-12


@dataclass(frozen=True)
class LieAlgebraData:
    """Structure constants c[k, i, j] = c^k_{ij} of an invariant frame."""

    dim: int
    c: np.ndarray
    name: str = "algebra"

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.complex128)
        if c.shape != (self.dim,) * 3:
            raise BadParams(f"structure constants must have shape {(self.dim,)*3}")
        object.__setattr__(self, "c", c)
        anti = np.max(np.abs(c + np.swapaxes(c, 1, 2)))
        if anti > JACOBI_TOL:
            raise BadParams(f"structure constants not antisymmetric: {anti:.2e}")
        jac = self.jacobi_residual()
        if jac > JACOBI_TOL:
            raise BadParams(f"Jacobi identity violated: residual {jac:.2e}")

    def jacobi_residual(self) -> float:
        c = self.c
        # sum_cyc c^m_{jk} c^l_{im} over the cycle (i, j, k)
        t = np.einsum("mjk,lim->lijk", c, c)
        total = t + np.einsum("lijk->ljki", t) + np.einsum("lijk->lkij", t)
        return float(np.max(np.abs(total)))

    def bracket(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.c, u, v)


@dataclass(frozen=True)
class SubalgebraData:
    """Subalgebra spanned by `basis` columns inside `parent`."""

    parent: LieAlgebraData
    basis: np.ndarray
    name: str = "subalgebra"

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.complex128)
        if b.ndim == 1:
            b = b.reshape(self.parent.dim, -1)
        if b.shape[0] != self.parent.dim:
            b = b.T
        object.__setattr__(self, "basis", b)
        d = b.shape[1]
        if d == 0:
            return
        if np.linalg.matrix_rank(b, tol=1e-10) < d:
            raise BadParams("subalgebra basis is linearly dependent")
        # closure under the bracket
        q, _ = np.linalg.qr(b)
        proj = np.eye(self.parent.dim) - q @ q.conj().T
        worst = 0.0
        for a in range(d):
            for c in range(d):
                br = self.parent.bracket(b[:, a], b[:, c])
                worst = max(worst, float(np.linalg.norm(proj @ br)))
        if worst > 1e-10:
            raise BadParams(f"basis not closed under bracket: residual {worst:.2e}")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class FrameMetric:
    """Constant Hermitian positive-definite frame components g(xi_i, xi_jbar)."""

    algebra: LieAlgebraData
    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.complex128)
        n = self.algebra.dim
        if g.shape != (n, n):
            raise BadParams(f"frame metric must be {n}x{n}")
        if np.max(np.abs(g - g.conj().T)) > 1e-12:
            raise BadParams("frame metric is not Hermitian")
        if np.min(np.linalg.eigvalsh(g)) <= 0:
            raise BadParams("frame metric is not positive definite")
        object.__setattr__(self, "g", g)


@dataclass
class FrameGeometry:
    torsion: np.ndarray
    q: np.ndarray
    s2: np.ndarray
    omega_is_zero: bool = True


def frame_q(c: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Quadratic torsion term in an invariant frame with metric g."""
    torsion = -c
    ginv = np.conj(np.linalg.inv(g))
    t_low = np.einsum("lij,lm->ijm", torsion, g)
    q = 0.5 * np.einsum("mn,ps,mpj,nsi->ij", ginv, ginv, t_low, np.conj(t_low))
    return 0.5 * (q + q.conj().T)


def frame_geometry(fm: FrameMetric) -> FrameGeometry:
    """Torsion and curvature data of an invariant frame metric.

    The frame is parallel for the Chern connection, so the curvature and
    the second Chern-Ricci tensor vanish; torsion is minus the structure
    constants and the quadratic term follows by direct index summation.
    """
    n = fm.algebra.dim
    return FrameGeometry(
        torsion=-fm.algebra.c.copy(),
        q=frame_q(fm.algebra.c, fm.g),
        s2=np.zeros((n, n), dtype=np.complex128),
        omega_is_zero=True,
    )


# ---------------------------------------------------------------------------
# submersion metrics on G/H: Chern-Ricci via the bracket map
# ---------------------------------------------------------------------------


def _h_orthonormal_split(alg: LieAlgebraData, sub: SubalgebraData, h: np.ndarray):
    """h-orthonormal bases of the subalgebra and of its h-orthogonal complement."""
    n = alg.dim
    hb = sub.basis
    d = hb.shape[1]

    def inner(u, v):
        return complex(np.conj(v) @ h @ u)

    def ortho(cols):
        out = []
        for j in range(cols.shape[1]):
            v = cols[:, j].astype(np.complex128).copy()
            for u in out:
                v -= inner(v, u) * u
            for u in out:
                v -= inner(v, u) * u
            nrm = np.sqrt(max(inner(v, v).real, 0.0))
            if nrm > 1e-12:
                out.append(v / nrm)
        return np.stack(out, axis=1) if out else np.zeros((n, 0), dtype=np.complex128)

    w = ortho(hb) if d else np.zeros((n, 0), dtype=np.complex128)
    # complement: project the standard basis off the span of w
    cand = np.eye(n, dtype=np.complex128)
    resid = []
    for j in range(n):
        v = cand[:, j].copy()
        for a in range(w.shape[1]):
            v -= inner(v, w[:, a]) * w[:, a]
        resid.append(v)
    u = ortho(np.stack(resid, axis=1))
    return w, u


def _beta_matrix(alg: LieAlgebraData, sub: SubalgebraData, h: np.ndarray, v: np.ndarray):
    """beta_xi(w) = p([v, w]) in h-orthonormal coordinates, shape (n-d, d)."""
    w, u = _h_orthonormal_split(alg, sub, h)
    d = w.shape[1]
    if d == 0:
        return np.zeros((u.shape[1], 0), dtype=np.complex128), w, u
    cols = []
    for m in range(d):
        br = alg.bracket(v, w[:, m])
        cols.append(np.einsum("i,ij,j->", np.conj(u).T @ np.zeros(1) if False else np.zeros(1), h, br) if False else None)
    # coefficients of p([v, w_m]) in the orthonormal complement basis
    mat = np.empty((u.shape[1], d), dtype=np.complex128)
    for m in range(d):
        br = alg.bracket(v, w[:, m])
        for a in range(u.shape[1]):
            mat[a, m] = np.conj(u[:, a]) @ h @ br
    return mat, w, u


def submersion_rho(
    alg: LieAlgebraData, sub: SubalgebraData, h: np.ndarray, v: np.ndarray
) -> float:
    """Chern-Ricci value rho(xi, xibar) = |beta(xi)|^2 of a submersion metric.

    beta_xi(w) = p([v, w]) for w in the subalgebra, measured in the norm on
    Hom(h, g/h) induced by restricting `h` to the subalgebra and pushing it
    to the quotient through the h-orthogonal complement.
    """
    h = np.asarray(h, dtype=np.complex128)
    if sub.dim == alg.dim:
        raise DegenerateQuotient("subalgebra equals the full algebra")
    v = np.asarray(v, dtype=np.complex128)
    mat, _, _ = _beta_matrix(alg, sub, h, v)
    return float(np.sum(np.abs(mat) ** 2))


def normalizer(alg: LieAlgebraData, sub: SubalgebraData) -> np.ndarray:
    """Basis (columns) of {v : [v, h] inside h}."""
    n = alg.dim
    hb = sub.basis
    d = hb.shape[1]
    if d == 0:
        return np.eye(n, dtype=np.complex128)
    q, _ = np.linalg.qr(hb)
    proj = np.eye(n) - q @ q.conj().T
    # rows: for each subalgebra basis vector w_m, the map v -> proj([v, w_m])
    rows = []
    for m in range(d):
        lin = np.einsum("kij,j->ki", alg.c, hb[:, m])  # [k, i]: v^i -> [v, w_m]^k
        rows.append(proj @ lin)
    stack = np.concatenate(rows, axis=0)
    _, s, vh = np.linalg.svd(stack)
    tol = max(stack.shape) * (s[0] if len(s) else 0.0) * 1e-12
    null_mask = np.concatenate([s, np.zeros(max(0, vh.shape[0] - len(s)))]) <= max(tol, 1e-12)
    kernel = vh[null_mask].conj().T
    return kernel


def null_rho_equals_normalizer_check(
    alg: LieAlgebraData,
    sub: SubalgebraData,
    h: np.ndarray,
    seed: int = 0,
    samples: int = 64,
    rho_tol: float = 1e-10,
    proj_tol: float = 1e-8,
):
    """Sampled biconditional: rho(v) ~ 0 iff v normalizes the subalgebra.

    Returns (worst residual, dims) where dims holds the dimensions of
    Null(rho) and of the normalizer; also checks the two spaces agree as
    subspaces (principal angle).
    """
    rng = np.random.default_rng(seed)
    n = alg.dim
    h = np.asarray(h, dtype=np.complex128)

    norm_basis = normalizer(alg, sub)
    qn, _ = np.linalg.qr(norm_basis) if norm_basis.size else (np.zeros((n, 0)), None)
    proj_off = np.eye(n) - qn @ qn.conj().T if norm_basis.size else np.eye(n)

    # Null(rho) as the kernel of the stacked linear map v -> beta_v
    w, u = _h_orthonormal_split(alg, sub, h)
    rows = []
    for m in range(w.shape[1]):
        lin = np.einsum("kij,j->ki", alg.c, w[:, m])
        rows.append(np.conj(u).T @ h @ lin)
    if rows:
        stack = np.concatenate(rows, axis=0)
        _, s, vh = np.linalg.svd(stack)
        smax = s[0] if len(s) else 0.0
        null_mask = np.concatenate([s, np.zeros(vh.shape[0] - len(s))]) <= max(1e-10 * max(smax, 1e-30), 1e-12)
        null_basis = vh[null_mask].conj().T
    else:
        null_basis = np.eye(n, dtype=np.complex128)

    worst = 0.0
    mismatches = 0
    for _ in range(samples):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        rho_v = submersion_rho(alg, sub, h, v)
        off = float(np.linalg.norm(proj_off @ v))
        small_rho = rho_v < rho_tol
        small_off = off < proj_tol
        if small_rho != small_off:
            mismatches += 1
            worst = max(worst, rho_v if small_off else off)

    angle = subspace_angle(null_basis, norm_basis, np.eye(n, dtype=np.complex128))
    dims = {
        "null_rho": int(null_basis.shape[1]),
        "normalizer": int(norm_basis.shape[1]),
        "subalgebra": int(sub.dim),
    }
    return {
        "worst_residual": worst,
        "mismatches": mismatches,
        "subspace_angle": float(angle),
        "dims": dims,
    }


# ---------------------------------------------------------------------------
# algebra registry and file format
# ---------------------------------------------------------------------------


def _sparse_c(dim, entries):
    """entries: list of (k, i, j, value); antisymmetry in (i, j) is filled in."""
    c = np.zeros((dim, dim, dim), dtype=np.complex128)
    for k, i, j, val in entries:
        c[k, i, j] += val
        c[k, j, i] -= val
    return c


def algebra_registry(name: str, dim: int | None = None) -> LieAlgebraData:
    key = name.lower()
    if key == "abelian":
        d = dim or 2
        return LieAlgebraData(d, np.zeros((d, d, d)), name=f"abelian{d}")
    if key == "affine":
        return LieAlgebraData(2, _sparse_c(2, [(1, 0, 1, 1.0)]), name="affine")
    if key == "heisenberg":
        return LieAlgebraData(3, _sparse_c(3, [(2, 0, 1, 1.0)]), name="heisenberg")
    if key == "sl2":
        # basis (H, E, F): [H,E]=2E, [H,F]=-2F, [E,F]=H
        return LieAlgebraData(
            3,
            _sparse_c(3, [(1, 0, 1, 2.0), (2, 0, 2, -2.0), (0, 1, 2, 1.0)]),
            name="sl2",
        )
    if key == "abelian_affine":
        # C + aff(1): e0 central, [e1, e2] = e2
        return LieAlgebraData(3, _sparse_c(3, [(2, 1, 2, 1.0)]), name="abelian_affine")
    raise UnknownModel(f"unknown algebra {name!r}")


def subalgebra_registry(alg: LieAlgebraData, name: str) -> SubalgebraData:
    key = name.lower()
    n = alg.dim
    if key == "zero":
        return SubalgebraData(alg, np.zeros((n, 0)), name="zero")
    table = {
        ("sl2", "borel"): np.eye(3)[:, :2],          # span{H, E}
        ("heisenberg", "center"): np.eye(3)[:, 2:3],
        ("abelian_affine", "nilradical"): np.eye(3)[:, 2:3],
    }
    try:
        basis = table[(alg.name, key)]
    except KeyError:
        raise UnknownModel(f"unknown subalgebra {name!r} of {alg.name!r}") from None
    return SubalgebraData(alg, basis, name=key)


def load_algebra_file(path: str) -> tuple[LieAlgebraData, SubalgebraData | None]:
    """JSON format: {dim, c: [[i, j, k, re, im], ...], subalgebra: [[...], ...]}."""
    with open(path) as fh:
        data = json.load(fh)
    dim = int(data["dim"])
    c = np.zeros((dim, dim, dim), dtype=np.complex128)
    for i, j, k, re, im in data.get("c", []):
        c[k, i, j] += re + 1j * im
        c[k, j, i] -= re + 1j * im
    alg = LieAlgebraData(dim, c, name=data.get("name", "file-algebra"))
    sub = None
    if "subalgebra" in data and data["subalgebra"] is not None:
        vecs = np.asarray(data["subalgebra"], dtype=float)
        if vecs.size == 0:
            basis = np.zeros((dim, 0))
        else:
            basis = np.atleast_2d(vecs).T.astype(np.complex128)
        sub = SubalgebraData(alg, basis, name="file-subalgebra")
    return alg, sub


def algebra_to_dict(alg: LieAlgebraData, sub: SubalgebraData | None = None) -> dict:
    entries = []
    n = alg.dim
    for k in range(n):
        for i in range(n):
            for j in range(i + 1, n):
                val = alg.c[k, i, j]
                if val != 0:
                    entries.append([i, j, k, float(val.real), float(val.imag)])
    out = {"dim": n, "name": alg.name, "c": entries}
    if sub is not None:
        out["subalgebra"] = [list(map(float, np.real(sub.basis[:, m]))) for m in range(sub.dim)]
    return out


# ---------------------------------------------------------------------------
# model registry
# ---------------------------------------------------------------------------

MODEL_NAMES = (
    "flat",
    "flat_torus_chart",
    "hopf_standard",
    "hopf_diagonal",
    "polynomial_perturbation",
    "gaussian_1d",
    "lie_group_chart",
)


def _flat_model(n=2, radius=np.inf, sample=1.0, name="flat"):
    eye = np.eye(n, dtype=np.complex128)

    def ev(pts):
        return np.broadcast_to(eye, (pts.shape[0], n, n)).copy()

    return MetricField(
        dim=n,
        eval_fn=ev,
        domain=BoxDomain(dim=n, radius=radius, sample_radius=sample),
        name=name,
        expected_fixed_dim=n,
        base_point=tuple([0.25] + [0.0] * (n - 1)),
        loop_amplitude=0.22,
    )


def _hopf_weight(alpha: float, beta: float):
    """Invariant radius w(z): s1 w^(-2 alpha) + s2 w^(-2 beta) = 1."""

    def radius(pts):
        s1 = np.abs(pts[:, 0]) ** 2
        s2 = np.abs(pts[:, 1]) ** 2
        if alpha == beta:
            return (s1 + s2) ** (0.5 / alpha)
        u = 0.5 * np.log(np.maximum(s1 + s2, 1e-300))
        for _ in range(60):
            e1 = s1 * np.exp(-2 * alpha * u)
            e2 = s2 * np.exp(-2 * beta * u)
            f = e1 + e2 - 1.0
            fp = -2 * alpha * e1 - 2 * beta * e2
            du = f / fp
            u = u - du
            if np.max(np.abs(du)) < 1e-15:
                break
        return np.exp(u)

    return radius


def _hopf_model(a1=1.0, a2=1.0):
    a1 = complex(a1)
    a2 = complex(a2)
    alpha, beta = a1.real, a2.real
    if not (alpha >= beta > 0):
        raise BadParams(
            f"contraction weights need Re(a1) >= Re(a2) > 0, got {a1}, {a2}"
        )
    radius = _hopf_weight(alpha, beta)

    def ev(pts):
        w = radius(pts)
        g = np.zeros((pts.shape[0], 2, 2), dtype=np.complex128)
        g[:, 0, 0] = w ** (-2 * alpha)
        g[:, 1, 1] = w ** (-2 * beta)
        return g

    def zeta(pts):
        out = np.empty_like(pts)
        out[:, 0] = alpha * pts[:, 0]
        out[:, 1] = beta * pts[:, 1]
        return out

    std = alpha == beta == 1.0
    name = "hopf_standard" if std else f"hopf_diagonal(a1={a1.real:g},a2={a2.real:g})"
    return MetricField(
        dim=2,
        eval_fn=ev,
        domain=ShellDomain(
            dim=2, r_min=0.5, r_max=2.0, sample_min=0.75, sample_max=1.35, radius_fn=radius
        ),
        name=name,
        designated_field=VectorField(2, zeta, name="zeta"),
        expected_fixed_dim=1,
        base_point=(1.0, 0.0),
        loop_amplitude=0.2,
    )


def _polynomial_model(seed=5, eps=0.05, n=2):
    """Hermitian degree-2 perturbation of the flat metric on a polydisc."""
    rng = np.random.default_rng(seed)

    def cmat():
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        return m / (2.0 * n)

    a0 = cmat()
    a0 = a0 + a0.conj().T
    lin = [cmat() for _ in range(n)]             # B_a z_a + B_a^H zbar_a
    quad_hh = {(a, b): cmat() for a in range(n) for b in range(a, n)}
    quad_ha = {}
    for a in range(n):
        for b in range(n):
            if a < b:
                quad_ha[(a, b)] = cmat()
            elif a == b:
                m = cmat()
                quad_ha[(a, b)] = m + m.conj().T

    def pert(pts):
        b = pts.shape[0]
        out = np.broadcast_to(a0, (b, n, n)).astype(np.complex128).copy()
        z = pts
        for a in range(n):
            out += lin[a][None] * z[:, a, None, None]
            out += lin[a].conj().T[None] * np.conj(z[:, a])[:, None, None]
        for (a, c), m in quad_hh.items():
            out += m[None] * (z[:, a] * z[:, c])[:, None, None]
            out += m.conj().T[None] * np.conj(z[:, a] * z[:, c])[:, None, None]
        for (a, c), m in quad_ha.items():
            if a < c:
                out += m[None] * (z[:, a] * np.conj(z[:, c]))[:, None, None]
                out += m.conj().T[None] * (z[:, c] * np.conj(z[:, a]))[:, None, None]
            else:
                out += m[None] * (z[:, a] * np.conj(z[:, a])).real[:, None, None]
        return out

    eye = np.eye(n, dtype=np.complex128)

    def ev(pts):
        return np.broadcast_to(eye, (pts.shape[0], n, n)).copy() + eps * pert(pts)

    f = MetricField(
        dim=n,
        eval_fn=ev,
        domain=BoxDomain(dim=n, radius=0.75, sample_radius=0.45),
        name=f"polynomial_perturbation(seed={seed},eps={eps:g})",
        base_point=tuple([0.1] * n),
        loop_amplitude=0.15,
    )
    f.perturbation_parts = {
        "a0": a0,
        "lin": lin,
        "quad_hh": quad_hh,
        "quad_ha": quad_ha,
        "eps": eps,
    }
    return f


def _gaussian_1d_model():
    def ev(pts):
        s = np.exp(np.abs(pts[:, 0]) ** 2)
        return s[:, None, None].astype(np.complex128)

    return MetricField(
        dim=1,
        eval_fn=ev,
        domain=BoxDomain(dim=1, radius=1.6, sample_radius=1.0),
        name="gaussian_1d",
        base_point=(0.0,),
        loop_amplitude=0.3,
    )


def _affine_chart(h=None):
    """Exact chart of the two-dimensional non-abelian group near the identity.

    Coordinates z = (z1, z2) with frame fields X1 = (1+z1) d1, X2 = (1+z1) d2
    (bracket [X1, X2] = X2) and invariant metric g = h / |1+z1|^2.  The
    twisted-parallel fields are Y1 = (1+z1) d1 + z2 d2 and Y2 = d2.
    """
    h = np.eye(2, dtype=np.complex128) if h is None else np.asarray(h, dtype=np.complex128)

    def ev(pts):
        u = 1.0 / np.abs(1.0 + pts[:, 0]) ** 2
        return h[None, :, :] * u[:, None, None]

    def x1(pts):
        out = np.zeros_like(pts)
        out[:, 0] = 1.0 + pts[:, 0]
        return out

    def x2(pts):
        out = np.zeros_like(pts)
        out[:, 1] = 1.0 + pts[:, 0]
        return out

    def y1(pts):
        out = np.empty_like(pts)
        out[:, 0] = 1.0 + pts[:, 0]
        out[:, 1] = pts[:, 1]
        return out

    def y2(pts):
        out = np.zeros_like(pts)
        out[:, 1] = 1.0
        return out

    return MetricField(
        dim=2,
        eval_fn=ev,
        domain=BoxDomain(dim=2, radius=0.65, sample_radius=0.35),
        name="lie_group_chart(affine)",
        designated_field=VectorField(2, y1, name="right_invariant_1"),
        frame_fields=(
            VectorField(2, x1, name="left_invariant_1"),
            VectorField(2, x2, name="left_invariant_2"),
        ),
        expected_fixed_dim=2,
        base_point=(0.0, 0.0),
        loop_amplitude=0.15,
    )


def _bch_chart(alg: LieAlgebraData, h=None):
    """Invariant frame in exponential coordinates, truncated at second order.

    Valid for curvature evaluation at the origin only; the metric deviates
    from the exact invariant one at third order in |z|.
    """
    n = alg.dim
    c = alg.c
    h = np.eye(n, dtype=np.complex128) if h is None else np.asarray(h, dtype=np.complex128)

    def frame(pts):
        b = pts.shape[0]
        e = np.broadcast_to(np.eye(n, dtype=np.complex128), (b, n, n)).copy()
        # E[:, k, i] = delta - 1/2 c^k_{ij} z_j + 1/12 z_a z_b c^k_{am} c^m_{bi}
        e -= 0.5 * np.einsum("kij,bj->bki", c, pts)
        e += (1.0 / 12.0) * np.einsum("kam,mbi,ba,bb->bki", c, c, pts, pts)
        return e

    def ev(pts):
        e = frame(pts)
        einv = np.linalg.inv(e)
        return np.einsum("bia,ij,bjb->bab", einv, h, np.conj(einv))

    return MetricField(
        dim=n,
        eval_fn=ev,
        domain=BoxDomain(dim=n, radius=0.4, sample_radius=0.1),
        name=f"lie_group_chart({alg.name})",
        expected_fixed_dim=n,
        base_point=tuple([0.0] * n),
        loop_amplitude=0.05,
    )


def model_registry(name: str, params: dict | None = None) -> MetricField:
    """Built-in metric fields by name; see MODEL_NAMES."""
    params = dict(params or {})
    key = name.lower()
    try:
        if key == "flat":
            return _flat_model(n=int(params.pop("n", 2)))
        if key == "flat_torus_chart":
            return _flat_model(
                n=int(params.pop("n", 2)), radius=0.5, sample=0.3, name="flat_torus_chart"
            )
        if key == "hopf_standard":
            return _hopf_model(1.0, 1.0)
        if key == "hopf_diagonal":
            return _hopf_model(params.pop("a1", 2.0), params.pop("a2", 1.0))
        if key == "polynomial_perturbation":
            return _polynomial_model(
                seed=int(params.pop("seed", 5)), eps=float(params.pop("eps", 0.05))
            )
        if key == "gaussian_1d":
            return _gaussian_1d_model()
        if key == "lie_group_chart":
            alg_name = str(params.pop("algebra", "affine"))
            alg = algebra_registry(alg_name)
            if alg.name == "affine":
                return _affine_chart(params.pop("h", None))
            return _bch_chart(alg, params.pop("h", None))
    except (KeyError, ValueError) as exc:
        raise BadParams(f"bad parameters for model {name!r}: {exc}") from exc
    raise UnknownModel(f"unknown model {name!r}; known: {', '.join(MODEL_NAMES)}")
