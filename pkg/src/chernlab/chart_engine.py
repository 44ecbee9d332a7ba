"""Chern-connection tensors of a Hermitian metric at chart points.

Conventions (validated by the Bianchi residual battery):

    Gamma^k_{ij}      = g^{k lbar} d_i g_{j lbar}
    T^k_{ij}          = Gamma^k_{ij} - Gamma^k_{ji}
    Omega_{i jbar k}^l = -d_jbar Gamma^l_{ik}
    Omega_{i jbar k lbar} = g_{p lbar} Omega_{i jbar k}^p
    rho_{i jbar}      = Omega_{i jbar k}^k
    S_{i jbar}        = g^{m nbar} Omega_{m nbar i jbar}
    Q_{i jbar}        = 1/2 g^{m nbar} g^{p sbar} T_{m p jbar} conj(T_{n s ibar})
    s_hat             = g^{i jbar} S_{i jbar}

The inverse metric is stored as ginv[k, l] = g^{k lbar}, i.e. the
conjugate of the matrix inverse of g, so that
sum_l g^{k lbar} g_{m lbar} = delta^k_m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndefiniteRho, SingularMetric
from .fd import DEFAULT_SCHEME
from .fields import MetricField, SamplerConfig, as_points, unit_vectors_g
from .jets import JetArrays, MetricJet, metric_jets
from .linalg import g_orthonormalize, hermitian_form_min, hermitize

__all__ = [
    "CurvaturePack",
    "PackArrays",
    "chern_pack",
    "chern_pack_arrays",
    "bianchi_residuals",
    "bianchi_residual_arrays",
    "griffiths_min",
    "rho_nullspace",
    "rho_closedness_residual",
    "NullspacePolicy",
]

COND_BOUND = 1e12


def _as_arrays(jet) -> JetArrays:
    if isinstance(jet, JetArrays):
        return jet
    if isinstance(jet, MetricJet):
        # Rebuild a batch-of-one view from the stored dict.
        from .jets import JetArrays as JA

        n = jet.dim
        arr = JA(points=jet.point[None, :], order=jet.order, g=jet.g[None])
        arr._derivs_dict = {k: v[None] for k, v in jet.derivs.items()}
        arr._errors_dict = {k: np.array([v]) for k, v in jet.errors.items()}
        _pack_views(arr)
        return arr
    raise TypeError(f"expected MetricJet or JetArrays, got {type(jet)!r}")


def _pack_views(arr: JetArrays):
    """Fill packed derivative arrays from the multi-index dict (batch-of-one path)."""
    from .jets import _pair, _unit

    n = arr.dim
    nb = arr.batch
    zeros = tuple([0] * n)
    d = arr._derivs_dict
    if arr.order >= 1 and arr.d1h is None:
        arr.d1h = np.stack([d[(_unit(n, a), zeros)] for a in range(n)], axis=1)
        arr.d1a = np.stack([d[(zeros, _unit(n, a))] for a in range(n)], axis=1)
    if arr.order >= 2 and arr.d2hh is None:
        arr.d2hh = np.empty((nb, n, n, n, n), dtype=np.complex128)
        arr.d2ha = np.empty((nb, n, n, n, n), dtype=np.complex128)
        arr.d2aa = np.empty((nb, n, n, n, n), dtype=np.complex128)
        for a in range(n):
            for c in range(n):
                arr.d2hh[:, a, c] = d[(_pair(n, a, c), zeros)]
                arr.d2ha[:, a, c] = d[(_unit(n, a), _unit(n, c))]
                arr.d2aa[:, a, c] = d[(zeros, _pair(n, a, c))]
    if arr.order >= 3 and arr.d3hha is None:
        arr.d3hhh = np.empty((nb, n, n, n, n, n), dtype=np.complex128)
        arr.d3hha = np.empty((nb, n, n, n, n, n), dtype=np.complex128)
        arr.d3haa = np.empty((nb, n, n, n, n, n), dtype=np.complex128)
        arr.d3aaa = np.empty((nb, n, n, n, n, n), dtype=np.complex128)
        for a in range(n):
            for c in range(n):
                for e in range(n):
                    tri = tuple(sum(1 for x in (a, c, e) if x == m) for m in range(n))
                    arr.d3hhh[:, a, c, e] = d[(tri, zeros)]
                    arr.d3aaa[:, a, c, e] = d[(zeros, tri)]
                    arr.d3hha[:, a, c, e] = d[(_pair(n, a, c), _unit(n, e))]
                    arr.d3haa[:, a, c, e] = d[(_unit(n, a), _pair(n, c, e))]


@dataclass
class PackArrays:
    """Batched curvature pack; leading axis indexes the point batch."""

    points: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    gamma: np.ndarray        # [b, k, i, j] = Gamma^k_{ij}
    torsion: np.ndarray      # [b, k, i, j] = T^k_{ij}
    t_low: np.ndarray        # [b, i, j, m] = T_{i j mbar}
    omega_hi: np.ndarray     # [b, i, j, k, l] = Omega_{i jbar k}^l
    omega_low: np.ndarray    # [b, i, j, k, l] = Omega_{i jbar k lbar}
    rho: np.ndarray
    s2: np.ndarray
    q: np.ndarray
    s_hat: np.ndarray
    herm_residual: np.ndarray
    dginv_h: np.ndarray | None = None
    dginv_a: np.ndarray | None = None

    @property
    def batch(self):
        return self.points.shape[0]


@dataclass
class CurvaturePack:
    """Chern tensors at one point (see module docstring for conventions)."""

    point: np.ndarray
    g: np.ndarray
    gamma: np.ndarray
    torsion: np.ndarray
    omega: np.ndarray
    omega_low: np.ndarray
    rho: np.ndarray
    s2: np.ndarray
    q: np.ndarray
    s_hat: float
    herm_residual: float


def chern_pack_arrays(jets: JetArrays, cond_bound: float = COND_BOUND) -> PackArrays:
    jets = _as_arrays(jets)
    jets.require(2, "chern_pack")
    g = jets.g
    cond = np.linalg.cond(g)
    if np.max(cond) > cond_bound:
        raise SingularMetric(
            f"metric condition number {np.max(cond):.3e} exceeds bound {cond_bound:.1e}"
        )
    ginv = np.conj(np.linalg.inv(g))
    d1h, d1a, d2ha = jets.d1h, jets.d1a, jets.d2ha

    gamma = np.einsum("...kl,...ijl->...kij", ginv, d1h)
    torsion = gamma - np.swapaxes(gamma, -2, -1)

    # d_a g^{kn-bar} and d_abar g^{kn-bar}
    dginv_h = -np.einsum("...ks,...ams,...mn->...akn", ginv, d1h, ginv)
    dginv_a = -np.einsum("...ks,...ams,...mn->...akn", ginv, d1a, ginv)

    # Omega_{i jbar k}^l = -d_jbar Gamma^l_{ik}
    omega_hi = -(
        np.einsum("...jls,...iks->...ijkl", dginv_a, d1h)
        + np.einsum("...ls,...ijks->...ijkl", ginv, d2ha)
    )
    omega_low = np.einsum("...ijkp,...pl->...ijkl", omega_hi, g)

    rho = np.einsum("...ijkk->...ij", omega_hi)
    s2 = np.einsum("...mn,...mnij->...ij", ginv, omega_low)
    t_low = np.einsum("...lij,...lm->...ijm", torsion, g)
    q = 0.5 * np.einsum(
        "...mn,...ps,...mpj,...nsi->...ij", ginv, ginv, t_low, np.conj(t_low)
    )

    rho, r1 = hermitize(rho)
    s2, r2 = hermitize(s2)
    q, r3 = hermitize(q)
    herm_res = np.full(jets.batch, max(r1, r2, r3))
    s_hat = np.einsum("...ij,...ij->...", ginv, s2).real

    return PackArrays(
        points=jets.points,
        g=g,
        ginv=ginv,
        gamma=gamma,
        torsion=torsion,
        t_low=t_low,
        omega_hi=omega_hi,
        omega_low=omega_low,
        rho=rho,
        s2=s2,
        q=q,
        s_hat=s_hat,
        herm_residual=herm_res,
        dginv_h=dginv_h,
        dginv_a=dginv_a,
    )


def chern_pack(jet) -> CurvaturePack:
    """Connection, torsion and curvature tensors from a jet of order >= 2."""
    arrays = chern_pack_arrays(_as_arrays(jet))
    return CurvaturePack(
        point=arrays.points[0],
        g=arrays.g[0],
        gamma=arrays.gamma[0],
        torsion=arrays.torsion[0],
        omega=arrays.omega_hi[0],
        omega_low=arrays.omega_low[0],
        rho=arrays.rho[0],
        s2=arrays.s2[0],
        q=arrays.q[0],
        s_hat=float(arrays.s_hat[0]),
        herm_residual=float(arrays.herm_residual[0]),
    )


# ---------------------------------------------------------------------------
# covariant derivatives of torsion and curvature (order-3 jets)
# ---------------------------------------------------------------------------


def nabla_hol_torsion(jets: JetArrays, pack: PackArrays) -> np.ndarray:
    """nabla_i T^l_{jk}, indexed [b, i, l, j, k]."""
    jets.require(2, "nabla T")
    ginv, gamma, torsion = pack.ginv, pack.gamma, pack.torsion
    # d_a Gamma^l_{jk} = (d_a g^{ls})(d_j g_{ks}) + g^{ls} d_a d_j g_{ks}
    dgamma_h = np.einsum("...als,...jks->...aljk", pack.dginv_h, jets.d1h) + np.einsum(
        "...ls,...ajks->...aljk", ginv, jets.d2hh
    )
    dT = dgamma_h - np.swapaxes(dgamma_h, -2, -1)
    return (
        dT
        + np.einsum("...lip,...pjk->...iljk", gamma, torsion)
        - np.einsum("...pij,...lpk->...iljk", gamma, torsion)
        - np.einsum("...pik,...ljp->...iljk", gamma, torsion)
    )


def d_hol_omega_low(jets: JetArrays, pack: PackArrays) -> np.ndarray:
    """d_a Omega_{i jbar k lbar}, indexed [b, a, i, j, k, l]."""
    jets.require(3, "d Omega")
    ginv = pack.ginv
    t1 = np.einsum("...amn,...ikn,...jml->...aijkl", pack.dginv_h, jets.d1h, jets.d1a)
    t2 = np.einsum("...mn,...aikn,...jml->...aijkl", ginv, jets.d2hh, jets.d1a)
    t3 = np.einsum("...mn,...ikn,...ajml->...aijkl", ginv, jets.d1h, jets.d2ha)
    return -jets.d3hha + t1 + t2 + t3


def d_anti_omega_low(jets: JetArrays, pack: PackArrays) -> np.ndarray:
    """d_bbar Omega_{i jbar k lbar}, indexed [b, bbar, i, j, k, l]."""
    jets.require(3, "dbar Omega")
    ginv = pack.ginv
    t1 = np.einsum("...bmn,...ikn,...jml->...bijkl", pack.dginv_a, jets.d1h, jets.d1a)
    t2 = np.einsum("...mn,...ibkn,...jml->...bijkl", ginv, jets.d2ha, jets.d1a)
    t3 = np.einsum("...mn,...ikn,...bjml->...bijkl", ginv, jets.d1h, jets.d2aa)
    d3 = np.einsum("...ibjkl->...bijkl", jets.d3haa)
    return -d3 + t1 + t2 + t3


def _rel(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Per-point relative max-norm residual between two tensor stacks."""
    axes = tuple(range(1, lhs.ndim))
    num = np.max(np.abs(lhs - rhs), axis=axes)
    scale = np.maximum(
        np.max(np.abs(lhs), axis=axes), np.max(np.abs(rhs), axis=axes)
    )
    return num / np.maximum(scale, 1e-30)


def bianchi_residual_arrays(jets: JetArrays) -> dict[str, np.ndarray]:
    """Relative residuals of the five Bianchi-type identities, per point."""
    jets = _as_arrays(jets)
    jets.require(3, "bianchi_residuals")
    pack = chern_pack_arrays(jets)
    g, ginv = pack.g, pack.ginv
    gamma, torsion = pack.gamma, pack.torsion
    om = pack.omega_low
    t_low = pack.t_low
    gamma_c = np.conj(gamma)
    d2ha = jets.d2ha

    # (1) Omega_{ij kl} = Omega_{kj il} + nabla_jbar T_{k i lbar}
    dT1 = np.einsum("...kjil->...jkil", d2ha) - np.einsum("...ijkl->...jkil", d2ha)
    cov1 = dT1 - np.einsum("...qjl,...kiq->...jkil", gamma_c, t_low)
    rhs1 = np.einsum("...kjil->...ijkl", om) + np.einsum("...jkil->...ijkl", cov1)
    res1 = _rel(om, rhs1)

    # (2) Omega_{ij kl} = Omega_{il kj} + nabla_i T_{lbar jbar k}
    dT2 = np.einsum("...ilkj->...ijkl", d2ha) - d2ha
    cov2 = dT2 - np.einsum("...pik,...ljp->...ijkl", gamma, np.conj(t_low))
    rhs2 = np.einsum("...ilkj->...ijkl", om) + cov2
    res2 = _rel(om, rhs2)

    # (3) cyclic (3,0) identity, all terms reordered to [l, i, j, k]
    nabT = nabla_hol_torsion(jets, pack)  # [i, l, j, k] = nabla_i T^l_{jk}
    lhs3 = (
        np.einsum("...iljk->...lijk", nabT)
        + np.einsum("...klij->...lijk", nabT)
        + np.einsum("...jlki->...lijk", nabT)
    )
    rhs3 = (
        np.einsum("...pij,...lkp->...lijk", torsion, torsion)
        + np.einsum("...pjk,...lip->...lijk", torsion, torsion)
        + np.einsum("...pki,...ljp->...lijk", torsion, torsion)
    )
    res3 = _rel(lhs3, rhs3)

    # (4) nabla_m Omega_{ij kl} = nabla_i Omega_{mj kl} + T^p_{im} Omega_{pj kl}
    dOm_h = d_hol_omega_low(jets, pack)
    covOm = (
        dOm_h
        - np.einsum("...pmi,...pjkl->...mijkl", gamma, om)
        - np.einsum("...pmk,...ijpl->...mijkl", gamma, om)
    )
    rhs4 = np.einsum("...imjkl->...mijkl", covOm) + np.einsum(
        "...pim,...pjkl->...mijkl", torsion, om
    )
    res4 = _rel(covOm, rhs4)

    # (5) nabla_nbar Omega_{ij kl} = nabla_jbar Omega_{in kl} + conj(T^s_{jn}) Omega_{is kl}
    dOm_a = d_anti_omega_low(jets, pack)
    covOmA = (
        dOm_a
        - np.einsum("...pnj,...ipkl->...nijkl", gamma_c, om)
        - np.einsum("...pnl,...ijkp->...nijkl", gamma_c, om)
    )
    rhs5 = np.einsum("...jinkl->...nijkl", covOmA) + np.einsum(
        "...sjn,...iskl->...nijkl", np.conj(torsion), om
    )
    res5 = _rel(covOmA, rhs5)

    return {
        "curvature_first_k": res1,
        "curvature_first_l": res2,
        "torsion_cyclic": res3,
        "second_holomorphic": res4,
        "second_antiholomorphic": res5,
    }


def bianchi_residuals(jet) -> dict[str, float]:
    """Max-norm relative residuals of the five Bianchi identities at one point."""
    out = bianchi_residual_arrays(_as_arrays(jet))
    return {k: float(np.max(v)) for k, v in out.items()}


# ---------------------------------------------------------------------------
# Griffiths sampler, null space, closedness
# ---------------------------------------------------------------------------


def griffiths_values(pack: PackArrays, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Normalized curvature values Omega(xi, xibar, eta, etabar)/(|xi|^2 |eta|^2)."""
    raw = np.einsum(
        "...ijkl,...i,...j,...k,...l->...",
        pack.omega_low,
        xi,
        np.conj(xi),
        eta,
        np.conj(eta),
    ).real
    nxi = np.einsum("...ij,...i,...j->...", pack.g, xi, np.conj(xi)).real
    neta = np.einsum("...ij,...i,...j->...", pack.g, eta, np.conj(eta)).real
    return raw / (nxi * neta)


def griffiths_min(field: MetricField, sampler: SamplerConfig, scheme=DEFAULT_SCHEME):
    """Seeded minimum of the normalized Griffiths form over the sample domain.

    For each sampled direction eta the quadratic form xi -> Omega(xi, xibar,
    eta, etabar) is minimized exactly over the g-unit sphere (generalized
    Hermitian eigenproblem); the reported minimum is the smallest value seen.
    Aggregation breaks ties by (value, point index, vector index) so the
    result is independent of evaluation order.
    """
    rng = sampler.rng()
    pts = field.sample_points(rng, sampler.points)
    jets = metric_jets(field, pts, 2, scheme=scheme)
    pack = chern_pack_arrays(jets)
    n = field.dim

    best = None
    for b in range(pack.batch):
        g = pack.g[b]
        etas = unit_vectors_g(rng, g, sampler.vectors)
        for a in range(sampler.vectors):
            eta = etas[a]
            m = np.einsum("ijkl,k,l->ij", pack.omega_low[b], eta, np.conj(eta))
            m = 0.5 * (m + np.conj(m.T))
            val, xi = hermitian_form_min(m, g)
            key = (val, b, a)
            if best is None or key < best[0]:
                best = (key, pts[b], xi, eta)
    (val, b, a), point, xi, eta = best
    return float(val), {"point": point, "xi": xi, "eta": eta, "point_index": b, "eta_index": a}


@dataclass(frozen=True)
class NullspacePolicy:
    """Eigenvalue cutoff for Null(rho): lam < rel * max(lam_max, floor)."""

    rel: float = 1e-7
    floor: float = 1e-30
    negative_rel: float = 1e-6
    negative_abs: float = 1e-9

    def cutoff(self, lam_max: float) -> float:
        return self.rel * max(lam_max, self.floor)


def rho_nullspace(g: np.ndarray, rho: np.ndarray, policy: NullspacePolicy = NullspacePolicy()):
    """Eigen-split of the Chern-Ricci form in the g-inner product.

    Returns (rank, null_basis (n, d), eigenvalues ascending).  Raises
    IndefiniteRho when a significantly negative eigenvalue appears.
    """
    import scipy.linalg

    rho = 0.5 * (rho + np.conj(rho.T))
    vals, vecs = scipy.linalg.eigh(rho, g)
    lam_max = float(vals[-1]) if len(vals) else 0.0
    neg_tol = max(policy.negative_rel * max(lam_max, 0.0), policy.negative_abs)
    if vals[0] < -neg_tol:
        raise IndefiniteRho(
            f"rho has negative eigenvalue {vals[0]:.3e} (tolerance {neg_tol:.1e})"
        )
    cut = policy.cutoff(lam_max)
    null_mask = vals < cut
    null_vecs = np.conj(vecs[:, null_mask])  # back to xi-convention
    basis = g_orthonormalize(null_vecs, g) if null_vecs.size else np.zeros(
        (g.shape[0], 0), dtype=np.complex128
    )
    rank = int(np.count_nonzero(~null_mask))
    return rank, basis, vals


def rho_field(field: MetricField, scheme=DEFAULT_SCHEME):
    """The Chern-Ricci form as a matrix-valued field (built on nested jets)."""

    def ev(pts):
        jets = metric_jets(field, pts, 2, scheme=scheme)
        return chern_pack_arrays(jets).rho

    return ev


def rho_closedness_residual(field: MetricField, point, scheme=DEFAULT_SCHEME) -> float:
    """Max-norm of d(rho) at `point`, rho evaluated through nested jets.

    For the real (1,1)-form rho the exterior derivative vanishes iff the
    (2,1)-part d_k rho_{i jbar} - d_i rho_{k jbar} does.
    """
    from . import fd as _fd

    pts = as_points(point)
    scheme_outer = _fd.JetScheme(steps={1: 1e-3}, levels={1: 2})
    _, derivs, _ = _fd.wirtinger_table(
        rho_field(field, scheme=scheme),
        pts,
        1,
        scheme=scheme_outer,
        domain=None,
        name=f"rho[{field.name}]",
    )
    n = field.dim
    zeros = tuple([0] * n)
    from .jets import _unit

    drho = np.stack([derivs[(_unit(n, a), zeros)][0] for a in range(n)], axis=0)
    # antisymmetrize in (k, i): d_k rho_{i jbar} - d_i rho_{k jbar}
    anti = drho - np.einsum("kij->ikj", drho)
    return float(np.max(np.abs(anti)))
