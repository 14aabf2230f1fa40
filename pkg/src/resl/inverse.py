"""Inverse problems: resonance admissibility, reconstruction from scattering
or Jost samples, and the finite block-Jacobi spectral-data bijection.

The reconstruction pipeline runs through the edge Weyl function: scattering
samples on the circle give values of M(lam) = phi_{p+1} phi_{p+2}^{-1}, a
strictly proper rational matrix whose poles are the eigenvalues of the finite
block Jacobi matrix built from the support window with one free guard site
(and zero diagonal there).  M equals minus the last corner block of that
matrix's resolvent, so a rational fit, a pole/weight extraction and a block
Stieltjes orthogonalization recover the reflected window; flipping it back
yields the perturbation in the positive gauge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.polynomial.polynomial as npp

from .core import MatPoly, Perturbation, interpolate_matpoly, lambda_of_k, validate_perturbation
from .errors import (
    AtEigenvalue,
    DegenerateClustering,
    InconsistentSamples,
    MomentDegeneracy,
    RoundTripFailure,
)
from .jost import build_jost
from .scattering import s_matrix, weyl_from_smatrix

LANCZOS_PIVOT = 1e-10
TOL_INV = 1e-6

__all__ = [
    "ResonanceVerdict", "validate_resonance_vector",
    "FiniteJacobi", "SpectralData", "finite_jacobi_matrix",
    "finite_phi_values", "finite_chi_values", "spectral_data_forward",
    "weyl_function_finite", "moment_matrix", "jacobi_from_spectral_data",
    "reconstruct_from_smatrix", "reconstruct_from_jost_samples",
    "default_circle_nodes",
]


# -- scalar admissibility ---------------------------------------------------------

@dataclass(frozen=True)
class ResonanceVerdict:
    """Per-condition outcome of the scalar admissibility test."""

    ordering_and_real: bool
    disc_roots_real_simple: bool
    interlacing: bool
    normalization: bool
    detail: dict

    @property
    def admissible(self) -> bool:
        return (self.ordering_and_real and self.disc_roots_real_simple
                and self.interlacing and self.normalization)


def validate_resonance_vector(r, q: int | None = None, *, band: float = 1e-8,
                              tol: float = 1e-9) -> ResonanceVerdict:
    """Numerically test the four admissibility conditions of a scalar root list.

    Interval counting note: the odd-count condition is applied between the
    reciprocals of *consecutive same-sign* eigenvalue parameters, and the
    even-count condition on the two intervals adjacent to the unit circle.
    The positive and negative parameter families map to the two disjoint
    half-lines of the discrete spectrum, so no count couples them.
    """
    r = [complex(v) for v in r]
    if q is None:
        q = len(r)
    if len(r) != q or q < 1 or any(v == 0 for v in r):
        return ResonanceVerdict(False, False, False, False,
                                {"reason": "wrong length or zero entry"})

    def sort_key(v):
        return (abs(v), np.angle(v) % (2 * np.pi))

    ordered = all(sort_key(r[i]) <= (sort_key(r[i + 1])[0] + tol,
                                     sort_key(r[i + 1])[1] + tol)
                  for i in range(len(r) - 1))
    coeffs = npp.polyfromroots(r)
    scale = float(np.max(np.abs(coeffs)))
    real_poly = float(np.max(np.abs(coeffs.imag))) <= tol * scale
    cond1 = bool(ordered and real_poly)

    disc = [v for v in r if abs(v) <= 1.0 + band]
    cond2 = all(abs(v.imag) <= tol * (1 + abs(v)) for v in disc)
    disc_real = sorted(v.real for v in disc if abs(v.imag) <= tol * (1 + abs(v)))
    for i in range(len(disc_real) - 1):
        if abs(disc_real[i] - disc_real[i + 1]) <= 1e-7:
            cond2 = False
    eigen = sorted(v.real for v in disc if abs(v) < 1.0 - band)
    fvals_at_recip = [npp.polyval(1.0 / kj, coeffs) for kj in eigen]
    if any(abs(val) <= tol * scale * max(1.0, abs(1.0 / kj)) ** q
           for val, kj in zip(fvals_at_recip, eigen)):
        cond2 = False

    outside = [v.real for v in r
               if abs(v) > 1.0 + band and abs(v.imag) <= tol * (1 + abs(v))]

    def count_in(lo, hi):
        return sum(1 for z in outside if lo + band < z < hi - band)

    cond3 = True
    pos = [kj for kj in eigen if kj > 0]
    neg = [kj for kj in eigen if kj < 0]
    if pos:
        if count_in(1.0, 1.0 / pos[-1]) % 2 != 0:
            cond3 = False
        for lo_k, hi_k in zip(pos[1:], pos[:-1]):
            n_zero = count_in(1.0 / lo_k, 1.0 / hi_k)
            if n_zero % 2 == 0:
                cond3 = False
    if neg:
        if count_in(1.0 / neg[0], -1.0) % 2 != 0:
            cond3 = False
        for hi_k, lo_k in zip(neg[1:], neg[:-1]):
            n_zero = count_in(1.0 / lo_k, 1.0 / hi_k)
            if n_zero % 2 == 0:
                cond3 = False

    cond4 = True
    if q % 2 == 0:
        f0 = complex(npp.polyval(0.0, coeffs))
        cond4 = not (-1e-12 <= f0.real <= 1.0 + 1e-12 and abs(f0.imag) <= tol * scale)

    return ResonanceVerdict(
        ordering_and_real=cond1,
        disc_roots_real_simple=bool(cond2),
        interlacing=bool(cond3),
        normalization=bool(cond4),
        detail={"eigen": eigen, "outside_real": outside, "f0": npp.polyval(0.0, coeffs)},
    )


# -- finite block Jacobi ------------------------------------------------------------

@dataclass(frozen=True)
class FiniteJacobi:
    """Finite block Jacobi matrix with Dirichlet ends: interior a_1..a_{p-1},
    diagonal b_1..b_p, and the boundary convention a_0 = a_p = identity."""

    a: tuple[np.ndarray, ...]
    b: tuple[np.ndarray, ...]

    @property
    def p(self) -> int:
        return len(self.b)

    @property
    def d(self) -> int:
        return self.b[0].shape[0]

    def a_at(self, x: int) -> np.ndarray:
        if x == 0 or x >= self.p:
            return np.eye(self.d, dtype=complex)
        return self.a[x - 1]

    @classmethod
    def from_lists(cls, a, b) -> "FiniteJacobi":
        a = tuple(np.asarray(m, dtype=complex) for m in a)
        b = tuple(np.asarray(m, dtype=complex) for m in b)
        if len(a) != len(b) - 1:
            raise ValueError("need p-1 off-diagonal and p diagonal blocks")
        return cls(a=a, b=b)


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues with kernel projectors, norming operators and Weyl weights."""

    mu: tuple[float, ...]
    bases: tuple[np.ndarray, ...]       # orthonormal columns of each kernel
    projectors: tuple[np.ndarray, ...]
    g: tuple[np.ndarray, ...]           # positive operators in the kernel bases
    weights: tuple[np.ndarray, ...]     # residue matrices B_j on C^d

    @property
    def m(self) -> int:
        return len(self.mu)

    @property
    def d(self) -> int:
        return self.projectors[0].shape[0]

    def multiplicities(self) -> tuple[int, ...]:
        return tuple(b.shape[1] for b in self.bases)


def finite_jacobi_matrix(Jp: FiniteJacobi) -> np.ndarray:
    d, p = Jp.d, Jp.p
    out = np.zeros((p * d, p * d), dtype=complex)
    for x in range(1, p + 1):
        out[(x - 1) * d: x * d, (x - 1) * d: x * d] = Jp.b[x - 1]
        if x < p:
            out[(x - 1) * d: x * d, x * d: (x + 1) * d] = Jp.a[x - 1]
            out[x * d: (x + 1) * d, (x - 1) * d: x * d] = Jp.a[x - 1].conj().T
    return out


def finite_phi_values(Jp: FiniteJacobi, lam: complex) -> list[np.ndarray]:
    """phi_0..phi_{p+1} with phi_0 = 0, phi_1 = 1 (left Dirichlet solution)."""
    d = Jp.d
    lam = complex(lam)
    eye = np.eye(d, dtype=complex)
    vals = [np.zeros((d, d), dtype=complex), eye]
    for x in range(1, Jp.p + 1):
        nxt = np.linalg.solve(Jp.a_at(x),
                              (lam * eye - Jp.b[x - 1]) @ vals[x]
                              - Jp.a_at(x - 1) @ vals[x - 1])
        vals.append(nxt)
    return vals


def finite_chi_values(Jp: FiniteJacobi, lam: complex) -> list[np.ndarray]:
    """chi_0..chi_{p+1} with chi_{p+1} = 0, chi_p = 1 (right Dirichlet solution)."""
    d, p = Jp.d, Jp.p
    lam = complex(lam)
    eye = np.eye(d, dtype=complex)
    vals = [None] * (p + 2)
    vals[p + 1] = np.zeros((d, d), dtype=complex)
    vals[p] = eye
    for x in range(p, 0, -1):
        vals[x - 1] = np.linalg.solve(
            Jp.a_at(x - 1),
            (lam * eye - Jp.b[x - 1]) @ vals[x] - Jp.a_at(x) @ vals[x + 1])
    return vals


def spectral_data_forward(Jp: FiniteJacobi, *, cluster_tol: float = 1e-7,
                          rank_tol: float = 1e-8) -> SpectralData:
    """Spectral data (mu_j, P_j, g_j) of a finite block Jacobi matrix.

    Eigenvalues are clustered into distinct energies; each kernel comes from a
    singular-value split of phi_{p+1}(mu_j) and must match the cluster size.
    """
    d, p = Jp.d, Jp.p
    dense = finite_jacobi_matrix(Jp)
    ev = np.linalg.eigvalsh(dense)
    scale = 1.0 + float(np.max(np.abs(ev)))
    radius = cluster_tol * scale
    clusters: list[list[float]] = [[float(ev[0])]]
    for v in ev[1:]:
        if v - clusters[-1][-1] <= radius:
            clusters[-1].append(float(v))
        else:
            gap = v - clusters[-1][-1]
            if gap <= 50 * radius:
                raise DegenerateClustering(
                    f"eigenvalue gap {gap:.3e} is ambiguous at tolerance {radius:.3e}")
            clusters.append([float(v)])

    mu, bases, projectors, gs, weights = [], [], [], [], []
    for members in clusters:
        center = float(np.mean(members))
        phi = finite_phi_values(Jp, center)
        u, sing, vh = np.linalg.svd(phi[p + 1])
        small = sing <= rank_tol * max(sing[0], 1e-300)
        if int(small.sum()) != len(members):
            raise DegenerateClustering(
                f"kernel dimension {int(small.sum())} != cluster size {len(members)} "
                f"at mu = {center}")
        basis = vh.conj().T[:, small]
        proj = basis @ basis.conj().T
        gram = np.zeros((d, d), dtype=complex)
        for x in range(1, p + 1):
            gram += phi[x].conj().T @ phi[x]
        g_small = basis.conj().T @ gram @ basis
        g_small = 0.5 * (g_small + g_small.conj().T)
        weight = basis @ np.linalg.inv(g_small) @ basis.conj().T
        mu.append(center)
        bases.append(basis)
        projectors.append(proj)
        gs.append(g_small)
        weights.append(0.5 * (weight + weight.conj().T))
    return SpectralData(mu=tuple(mu), bases=tuple(bases),
                        projectors=tuple(projectors), g=tuple(gs),
                        weights=tuple(weights))


def weyl_function_finite(Jp: FiniteJacobi, lam: complex, *, tol: float = 1e-12) -> np.ndarray:
    """M(lam) = -chi_1(lam) chi_0(lam)^{-1}, the corner resolvent block."""
    chi = finite_chi_values(Jp, lam)
    scale = max(1.0, float(np.max(np.abs(chi[0]))))
    if abs(np.linalg.det(chi[0])) < tol * scale ** Jp.d:
        raise AtEigenvalue(f"lam = {lam} is in the spectrum")
    return -chi[1] @ np.linalg.inv(chi[0])


def moment_matrix(sd: SpectralData, p: int) -> np.ndarray:
    """Block Hankel matrix of projector moments; positive iff data admissible."""
    d = sd.d
    powers = [sum(mu ** s * proj for mu, proj in zip(sd.mu, sd.projectors))
              for s in range(2 * p - 1)]
    out = np.zeros((p * d, p * d), dtype=complex)
    for i in range(p):
        for j in range(p):
            out[i * d: (i + 1) * d, j * d: (j + 1) * d] = powers[i + j]
    return out


def _sqrtm_positive(g: np.ndarray, pivot: float) -> np.ndarray:
    w, vecs = np.linalg.eigh(0.5 * (g + g.conj().T))
    if w.min() <= pivot * max(1.0, w.max()):
        raise MomentDegeneracy(
            f"orthogonalization pivot {w.min():.3e} below threshold")
    return (vecs * np.sqrt(w)) @ vecs.conj().T


def _block_lanczos_measure(mu, weights, steps: int, *, pivot: float = LANCZOS_PIVOT):
    """Block Stieltjes orthogonalization against sum_j W_j delta_{mu_j}.

    Polynomials are carried by their values at the nodes with coefficients on
    the right; full reorthogonalization keeps the three-term blocks accurate
    to near machine precision.  Returns (b_1..b_steps, a_1..a_{steps-1}).
    """
    mu = np.asarray(mu, dtype=float)
    w = np.asarray(weights, dtype=complex)          # (m, d, d)
    d = w.shape[1]

    def inner(pv, qv):
        return np.einsum("mij,mik,mkl->jl", np.conj(pv), w, qv)

    eye = np.eye(d, dtype=complex)
    basis = [np.broadcast_to(eye, w.shape).copy()]
    g0 = inner(basis[0], basis[0])
    if np.max(np.abs(g0 - eye)) > 1e-6:
        raise MomentDegeneracy("weights do not sum to the identity")
    b_out, a_out = [], []
    prev = np.zeros_like(basis[0])
    a_prev = None
    for step in range(1, steps + 1):
        cur = basis[-1]
        shifted = mu[:, None, None] * cur
        b = inner(cur, shifted)
        b = 0.5 * (b + b.conj().T)
        b_out.append(b)
        if step == steps:
            break
        wk = shifted - cur @ b
        if a_prev is not None:
            wk = wk - prev @ a_prev
        for uy in basis:                 # full reorthogonalization
            wk = wk - uy @ inner(uy, wk)
        gram = inner(wk, wk)
        a = _sqrtm_positive(gram, pivot)
        a_out.append(a)
        prev = cur
        basis.append(wk @ np.linalg.inv(a))
        a_prev = a
    return b_out, a_out


def jacobi_from_spectral_data(sd: SpectralData, p: int) -> FiniteJacobi:
    """Inverse of :func:`spectral_data_forward` by block orthogonalization."""
    b, a = _block_lanczos_measure(sd.mu, sd.weights, p)
    return FiniteJacobi(a=tuple(a), b=tuple(b))


# -- reconstruction from scattering data ----------------------------------------------

def default_circle_nodes(count: int) -> np.ndarray:
    """Sample points on the lower half circle with pairwise distinct energies."""
    theta = np.pi * (np.arange(count) + 0.5) / count
    return np.exp(-1j * theta)


def _fit_weyl_rational(lams, mvals, n: int, d: int, rtol: float):
    """Least-squares fit M(lam) X(lam) = Y(lam) with X monic of degree n."""
    rows, rhs = [], []
    for lam, mv in zip(lams, mvals):
        wrow = 1.0 / (1.0 + float(np.max(np.abs(mv))))
        kron_m = np.kron(np.eye(d), mv)
        blocks = [lam ** s * kron_m for s in range(n)]
        blocks += [-lam ** s * np.eye(d * d) for s in range(n)]
        rows.append(wrow * np.hstack(blocks))
        rhs.append(wrow * (-lam ** n) * mv.flatten(order="F"))
    amat = np.vstack(rows)
    bvec = np.concatenate(rhs)
    sol, *_ = np.linalg.lstsq(amat, bvec, rcond=None)
    resid = float(np.max(np.abs(amat @ sol - bvec))) / (1.0 + float(np.max(np.abs(bvec))))
    if resid > rtol:
        raise InconsistentSamples(
            f"samples are not a degree-{n} rational Weyl function "
            f"(relative residual {resid:.3e})")
    xs = [sol[s * d * d: (s + 1) * d * d].reshape(d, d, order="F") for s in range(n)]
    return xs


def _poles_from_monic(xs, n: int, d: int, cluster_tol: float):
    comp = np.zeros((n * d, n * d), dtype=complex)
    for s in range(n - 1):
        comp[(s + 1) * d: (s + 2) * d, s * d: (s + 1) * d] = np.eye(d)
    for s in range(n):
        comp[s * d: (s + 1) * d, (n - 1) * d: n * d] = -xs[s]
    ev = np.linalg.eigvals(comp)
    if np.max(np.abs(ev.imag)) > 1e-4 * (1.0 + np.max(np.abs(ev))):
        raise InconsistentSamples("Weyl poles are not real: data is not self-adjoint")
    ev = np.sort(ev.real)
    scale = 1.0 + float(np.max(np.abs(ev)))
    clusters = [[ev[0]]]
    for v in ev[1:]:
        if v - clusters[-1][-1] <= cluster_tol * scale:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return [float(np.mean(c)) for c in clusters]


def _weights_by_least_squares(lams, mvals, poles, d: int):
    cauchy = np.array([[1.0 / (lam - mu) for mu in poles] for lam in lams])
    stack = np.array([mv.flatten(order="F") for mv in mvals])
    sol, *_ = np.linalg.lstsq(cauchy, stack, rcond=None)
    weights = []
    for j in range(len(poles)):
        wj = sol[j].reshape(d, d, order="F")
        wj = 0.5 * (wj + wj.conj().T)
        ew, vecs = np.linalg.eigh(wj)
        ew = np.clip(ew, 0.0, None)
        weights.append((vecs * ew) @ vecs.conj().T)
    return weights


def reconstruct_from_smatrix(samples, d: int, q: int, *,
                             tol_inv: float = TOL_INV,
                             rtol_fit: float = 1e-6) -> Perturbation:
    """Recover the perturbation (positive gauge) from scattering samples.

    ``samples`` is a sequence of (k, S) pairs with k on the unit circle, at
    least 2q + 2 of them in general position.  The output reproduces the
    input samples; a mismatch beyond ``tol_inv`` raises RoundTripFailure.
    """
    samples = [(complex(k), np.asarray(S, dtype=complex)) for k, S in samples]
    if len(samples) < 2 * q + 2:
        raise InconsistentSamples(
            f"need at least {2 * q + 2} samples for order {q}, got {len(samples)}")
    p = (q + 1) // 2
    n = p + 1

    lams, mvals = [], []
    for k, S in samples:
        lam = lambda_of_k(k)
        if any(abs(lam - seen) < 1e-10 for seen in lams):
            continue
        lams.append(lam)
        mvals.append(weyl_from_smatrix(S, k, p)[1])
    if len(lams) < 2 * n:
        raise InconsistentSamples(
            f"only {len(lams)} distinct energies among the samples, need {2 * n}")

    xs = _fit_weyl_rational(lams, mvals, n, d, rtol_fit)
    poles = _poles_from_monic(xs, n, d, cluster_tol=1e-6)
    weights = _weights_by_least_squares(lams, mvals, poles, d)

    total = np.sum(weights, axis=0)
    if np.max(np.abs(total - np.eye(d))) > 1e-4:
        raise InconsistentSamples("Weyl residues do not sum to the identity")

    b_rev, a_rev = _block_lanczos_measure(poles, weights, n)
    b_win = [b_rev[n - x] for x in range(1, n + 1)]     # b_1..b_{p+1}
    a_win = [a_rev[n - 1 - x] for x in range(1, n)]     # a_1..a_p
    guard = float(np.max(np.abs(b_win[-1])))
    if guard > 1e-4:
        raise RoundTripFailure(f"guard-site diagonal is {guard:.3e}, expected 0")

    a_rec = [0.5 * (m + m.conj().T) for m in a_win]
    b_rec = [0.5 * (m + m.conj().T) for m in b_win[:p]]
    if q % 2 == 1:
        edge_gap = float(np.max(np.abs(a_rec[-1] - np.eye(d))))
        if edge_gap > 1e-4:
            raise RoundTripFailure(
                f"odd order requires a_p = 1, reconstructed gap {edge_gap:.3e}")
        a_rec[-1] = np.eye(d, dtype=complex)
    V_rec = validate_perturbation(a_rec, None, b_rec)

    J_rec = build_jost(V_rec)
    worst = 0.0
    for k, S in samples:
        s_back = s_matrix(J_rec, k)
        worst = max(worst, float(np.max(np.abs(s_back - S))) / (1.0 + float(np.max(np.abs(S)))))
    if worst > tol_inv:
        raise RoundTripFailure(f"reconstruction misses the samples by {worst:.3e}")
    return V_rec


def reconstruct_from_jost_samples(points, values, d: int | None = None, *,
                                  tol_inv: float = TOL_INV) -> Perturbation:
    """Recover the perturbation from q + 1 Jost-matrix samples.

    Interpolates the degree-q Jost matrix, forms the scattering matrix
    psi(k)^{-1} psi(1/k) on a default circle grid and delegates to
    :func:`reconstruct_from_smatrix`.
    """
    points = [complex(z) for z in points]
    values = [np.asarray(v, dtype=complex) for v in values]
    if d is None:
        d = values[0].shape[0]
    q = len(points) - 1
    psi = interpolate_matpoly(list(zip(points, values)), q)
    nodes = default_circle_nodes(2 * q + 4)
    samples = []
    for k in nodes:
        samples.append((k, np.linalg.solve(psi(k), psi(1.0 / k))))
    return reconstruct_from_smatrix(samples, d, q, tol_inv=tol_inv)
