"""Jost determinant, root location/classification, trace identities, norming
matrices, scattering residues and resolvent kernels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.polynomial.polynomial as npp

from .core import MatPoly, Perturbation, interpolation_radius, lambda_of_k
from .errors import (
    AtPole,
    ClassificationAnomaly,
    DegenerateKernel,
    DegreeMismatch,
    NonConvergence,
    NotAnEigenvalue,
    SingularDerivativeBlock,
)
from .jost import JostData, jost_value, regular_solutions, regular_solutions_tilde

TOL_BAND = 1e-8            # half-width of the |r| = 1 shell counted as virtual
CLUSTER_TOL = 1e-6         # relative radius for multiplicity clustering
RANK_TOL = 1e-8            # singular-value cutoff for kernel bases


# -- determinant ----------------------------------------------------------------

def _det_samples_to_poly(values: np.ndarray, radius: float) -> np.ndarray:
    """Invert sampling at n scaled roots of unity into ascending coefficients."""
    n = values.shape[0]
    spectrum = np.fft.fft(values) / n
    powers = np.arange(n)
    return spectrum / radius ** powers


def jost_determinant(J: JostData, *, rel_tol: float = 1e-9) -> np.ndarray:
    """det psi(k) as ascending scalar coefficients of degree exactly q*d.

    The determinant is sampled at q*d + 1 scaled roots of unity and inverted
    by a discrete Fourier transform, which is exact for polynomials of the
    structural degree.  The leading coefficient must match the closed-form
    constant and the constant term must match det of psi(0); a failure means
    a violated support-edge condition.
    """
    V = J.V
    n = V.q * V.d + 1
    radius = interpolation_radius(np.linalg.norm(J.psi.coeff(0)),
                                  np.linalg.norm(J.psi.coeff(V.q)), V.q)
    nodes = radius * np.exp(2j * np.pi * np.arange(n) / n)
    values = np.array([np.linalg.det(J.psi(z)) for z in nodes])
    coeffs = _det_samples_to_poly(values, radius)

    lead = J.structure.leading_const
    const = np.linalg.det(J.psi.coeff(0))
    scale = max(abs(lead), abs(const))
    if abs(coeffs[-1] - lead) > rel_tol * max(scale, abs(lead)):
        raise DegreeMismatch(
            f"leading coefficient {coeffs[-1]:.6e} does not match the "
            f"structural constant {lead:.6e}")
    if abs(coeffs[0] - const) > rel_tol * max(1.0, abs(const)):
        raise DegreeMismatch("constant term does not match det psi(0)")
    return coeffs


# -- roots ------------------------------------------------------------------------

def _aberth_refine(coeffs: np.ndarray, z: np.ndarray, max_iter: int) -> np.ndarray:
    deriv = npp.polyder(coeffs)
    for _ in range(max_iter):
        pv = npp.polyval(z, coeffs)
        dv = npp.polyval(z, deriv)
        dv = np.where(np.abs(dv) < 1e-300, 1e-300, dv)
        newton = pv / dv
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        pair = inv.sum(axis=1)
        corr = newton / (1.0 - newton * pair)
        z = z - corr
        if np.max(np.abs(corr) / (1.0 + np.abs(z))) < 1e-13:
            break
    return z


def find_roots(coeffs, *, max_iter: int = 200,
               cluster_tol: float = CLUSTER_TOL) -> list[tuple[complex, int]]:
    """All roots of a scalar polynomial with multiplicity clustering.

    Companion-matrix eigenvalues initialize an Aberth-Ehrlich simultaneous
    iteration; roots closer than ``cluster_tol * (1 + |r|)`` are merged and
    the cluster size is reported as the multiplicity.  Output is ordered by
    modulus, then by argument in [0, 2*pi).
    """
    c = np.asarray(coeffs, dtype=complex)
    scale = np.max(np.abs(c))
    if scale == 0:
        raise ValueError("zero polynomial")
    deg = len(c) - 1
    while deg > 0 and abs(c[deg]) <= 1e-14 * scale:
        deg -= 1
    if deg < 1:
        raise ValueError("polynomial must have degree >= 1")
    c = c[: deg + 1] / c[deg]
    z = np.roots(c[::-1])
    z = _aberth_refine(c, z, max_iter)
    resid = np.abs(npp.polyval(z, c))
    if np.max(resid) > 1e-6 * (1.0 + np.max(np.abs(z)) ** deg):
        raise NonConvergence("root refinement did not reach the requested accuracy")

    clusters: list[list[complex]] = []
    for r in sorted(z, key=lambda v: (abs(v), np.angle(v) % (2 * np.pi))):
        for members in clusters:
            center = np.mean(members)
            if abs(r - center) <= cluster_tol * (1.0 + abs(center)):
                members.append(r)
                break
        else:
            clusters.append([r])
    rooted = [(complex(np.mean(m)), len(m)) for m in clusters]
    rooted.sort(key=lambda rm: (abs(rm[0]), np.angle(rm[0]) % (2 * np.pi)))
    return rooted


# -- classification -----------------------------------------------------------------

KIND_EIGENVALUE = "eigenvalue"
KIND_RESONANCE = "resonance"
KIND_VIRTUAL = "virtual"


@dataclass(frozen=True)
class RootRecord:
    value: complex
    multiplicity: int
    kind: str
    energy: complex


@dataclass(frozen=True)
class TraceResiduals:
    product: float
    reciprocal_sum: float
    plain_sum: float
    targets: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SpectrumReport:
    d: int
    p: int
    q: int
    class_tag: str
    roots: tuple[RootRecord, ...]
    leading_const: complex
    edge_det: complex
    residuals: TraceResiduals
    nu_plus: int
    nu_minus: int
    conjugation_symmetric: bool

    def total_multiplicity(self) -> int:
        return sum(r.multiplicity for r in self.roots)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "p": self.p,
            "q": self.q,
            "class": self.class_tag,
            "roots": [[r.value.real, r.value.imag, r.multiplicity, r.kind]
                      for r in self.roots],
            "energies": [[r.energy.real, r.energy.imag] for r in self.roots],
            "leading_const": [self.leading_const.real, self.leading_const.imag],
            "edge_det": [self.edge_det.real, self.edge_det.imag],
            "residuals": {
                "product": self.residuals.product,
                "reciprocal_sum": self.residuals.reciprocal_sum,
                "sum": self.residuals.plain_sum,
            },
            "nu_plus": self.nu_plus,
            "nu_minus": self.nu_minus,
            "conjugation_symmetric": self.conjugation_symmetric,
        }


def expected_root_sum(J: JostData) -> complex:
    """Closed-form value of sum r_n from the support-edge coefficients.

    For even order this is tr(c_p^{-1} b_p) + tr(b_1 + ... + b_{p-1}); for odd
    order tr(b_p^{-1} c_{p-1}) + tr(b_1 + ... + b_{p-1}), with the boundary
    value c_0 = identity.
    """
    V, st = J.V, J.structure
    p = V.p
    partial = complex(np.trace(st.b_partial_sums[p - 1]))
    if V.q == 2 * p:
        edge = complex(np.trace(np.linalg.solve(st.coupling_defect[p], V.b[p - 1])))
    else:
        edge = complex(np.trace(np.linalg.solve(V.b[p - 1], st.coupling_defect[p - 1])))
    return edge + partial


def trace_identities(roots, J: JostData) -> TraceResiduals:
    """Defects of the three closed-form root statistics (pure report)."""
    st = J.structure
    flat = [r for r, m in roots for _ in range(m)]
    prod = complex(np.prod(flat))
    recip = complex(np.sum([1.0 / r for r in flat]))
    total = complex(np.sum(flat))
    tr_bp = complex(np.trace(J.structure.b_partial_sums[J.V.p]))
    a_target = expected_root_sum(J)
    return TraceResiduals(
        product=abs(prod - 1.0 / st.edge_det),
        reciprocal_sum=abs(recip - tr_bp),
        plain_sum=abs(total - a_target),
        targets={"product": 1.0 / st.edge_det, "reciprocal_sum": tr_bp,
                 "sum": a_target},
    )


def classify_spectrum(J: JostData, roots, *, band: float = TOL_BAND,
                      anomaly_tol: float = 1e-8) -> SpectrumReport:
    """Label each root cluster as eigenvalue / resonance / virtual state.

    For self-adjoint data, a non-real root inside the open disc is an anomaly
    and is raised, not repaired; conjugation symmetry of the full multiset is
    reported as a flag.
    """
    V = J.V
    records = []
    nu_plus = nu_minus = 0
    for r, mult in roots:
        ar = abs(r)
        if abs(ar - 1.0) <= band:
            kind = KIND_VIRTUAL
        elif ar < 1.0:
            kind = KIND_EIGENVALUE
        else:
            kind = KIND_RESONANCE
        if kind == KIND_EIGENVALUE and V.is_selfadjoint:
            if abs(r.imag) > anomaly_tol * (1.0 + abs(r)):
                raise ClassificationAnomaly(
                    f"self-adjoint data with non-real disc root {r}")
            r = complex(r.real, 0.0)
            if r.real > 0:
                nu_plus += 1
            else:
                nu_minus += 1
        records.append(RootRecord(value=complex(r), multiplicity=mult, kind=kind,
                                  energy=lambda_of_k(r)))
    values = [rec.value for rec in records for _ in range(rec.multiplicity)]
    conj_ok = _multiset_close(values, [np.conj(v) for v in values],
                              tol=1e-8)
    return SpectrumReport(
        d=V.d, p=V.p, q=V.q, class_tag=V.class_tag,
        roots=tuple(records),
        leading_const=J.structure.leading_const,
        edge_det=J.structure.edge_det,
        residuals=trace_identities(roots, J),
        nu_plus=nu_plus, nu_minus=nu_minus,
        conjugation_symmetric=conj_ok,
    )


def _multiset_close(xs, ys, tol: float) -> bool:
    ys = list(ys)
    for x in xs:
        best, dist = None, np.inf
        for i, y in enumerate(ys):
            if abs(x - y) < dist:
                best, dist = i, abs(x - y)
        if best is None or dist > tol * (1.0 + abs(x)):
            return False
        ys.pop(best)
    return True


# -- forbidden domain ----------------------------------------------------------------

VERDICT_NA = "not_applicable"
VERDICT_HOLDS = "holds"
VERDICT_VIOLATED = "violated"


@dataclass(frozen=True)
class ForbiddenDomainReport:
    ring_bounds: str            # the chain 1 <= r- <= |h|^{-1/qd} <= r+ <= |h|^{-1}
    eigen_count_bound: str      # r-^m < 1/|h| given |h| > 1
    r_minus: float
    r_plus: float
    edge_det_abs: float
    eigen_count: int
    chain_values: tuple[float, ...] = ()


def forbidden_domain(roots, J: JostData, *, band: float = TOL_BAND,
                     slack: float = 1e-9) -> ForbiddenDomainReport:
    """Evaluate the resonance-ring inequalities where their hypotheses hold."""
    V = J.V
    gh = abs(J.structure.edge_det)
    moduli = np.array([abs(r) for r, m in roots for _ in range(m)])
    r_minus, r_plus = float(moduli.min()), float(moduli.max())
    inside = int(sum(m for r, m in roots if abs(r) < 1.0 - band))

    qd = V.q * V.d
    if V.q > 2 and inside == 0:
        mid = gh ** (-1.0 / qd)
        chain = (1.0, r_minus, mid, r_plus, 1.0 / gh)
        ok = all(chain[i] <= chain[i + 1] + slack * (1 + abs(chain[i]))
                 for i in range(len(chain) - 1))
        ring = VERDICT_HOLDS if ok else VERDICT_VIOLATED
    else:
        chain = ()
        ring = VERDICT_NA

    if gh > 1.0:
        ok = inside >= 1 and r_minus ** inside < 1.0 / gh + slack
        count = VERDICT_HOLDS if ok else VERDICT_VIOLATED
    else:
        count = VERDICT_NA

    return ForbiddenDomainReport(ring_bounds=ring, eigen_count_bound=count,
                                 r_minus=r_minus, r_plus=r_plus,
                                 edge_det_abs=gh, eigen_count=inside,
                                 chain_values=chain)


# -- norming matrices and scattering residues ------------------------------------------

@dataclass(frozen=True)
class NormingData:
    k: float
    energy: float
    multiplicity: int
    basis: np.ndarray            # orthonormal columns spanning Ker psi(k_j)
    dual_basis: np.ndarray       # orthonormal columns spanning Ker psi*(k_j)
    K: np.ndarray                # series form
    K_derivative: np.ndarray     # Wronskian-derivative form
    projected: np.ndarray        # P K P
    lower_bound: float           # the closed-form constant C_j
    residue: np.ndarray          # residue of S at k_j


def _kernel_pair(psi_val: np.ndarray, rank_tol: float):
    u, sing, vh = np.linalg.svd(psi_val)
    smax = sing[0] if sing.size else 0.0
    small = sing <= rank_tol * max(smax, 1e-300)
    if not np.any(small):
        raise NotAnEigenvalue("psi(k) has trivial kernel at the requested point")
    ambiguous = (sing > rank_tol * smax) & (sing < 100 * rank_tol * smax)
    if np.any(ambiguous):
        raise DegenerateKernel("singular values too close to the rank cutoff")
    basis = vh.conj().T[:, small]
    dual = u[:, small]
    return basis, dual


def norming_matrix(V: Perturbation, J: JostData, k_j: float, *,
                   rank_tol: float = RANK_TOL) -> NormingData:
    """Norming matrix of an eigenvalue parameter, computed two independent ways.

    The series form sums f_x* f_x over the support and closes the free tail
    k^(2p+2)/(1-k^2); the second form uses the derivative Wronskian
    (psi'* f_1 - f_1'* psi) / lambda'(k).  Both are returned so callers can
    assert their agreement.
    """
    if not V.is_selfadjoint:
        raise NotAnEigenvalue("norming data is defined for self-adjoint data")
    k = complex(k_j)
    if abs(k.imag) > 1e-9 or not (0 < abs(k.real) < 1):
        raise NotAnEigenvalue(f"k = {k_j} is not inside (-1, 0) u (0, 1)")
    k = k.real
    basis, dual = _kernel_pair(J.psi(k), rank_tol)

    p, d = V.p, V.d
    series = np.zeros((d, d), dtype=complex)
    for x in range(1, p + 1):
        fx = J.f[x](k)
        series += fx.conj().T @ fx
    tail = k ** (2 * p + 2) / (1.0 - k * k)
    series += tail * np.eye(d)

    lam_dot = 1.0 - 1.0 / k ** 2
    psi_dot = J.psi.derivative()
    f1_dot = J.f[1].derivative()
    deriv = (psi_dot(k).conj().T @ J.f[1](k)
             - f1_dot(k).conj().T @ J.psi(k)) / lam_dot

    proj = basis @ basis.conj().T
    residue = _s_residue_from_kernel(J, k, basis, dual)
    return NormingData(
        k=float(k), energy=float(lambda_of_k(k).real),
        multiplicity=basis.shape[1],
        basis=basis, dual_basis=dual,
        K=series, K_derivative=deriv,
        projected=proj @ series @ proj,
        lower_bound=float(tail),
        residue=residue,
    )


def _s_residue_from_kernel(J: JostData, k: float, basis, dual) -> np.ndarray:
    u_dot = dual.conj().T @ J.psi.derivative()(k) @ basis
    if abs(np.linalg.det(u_dot)) < 1e-12 * max(1.0, np.max(np.abs(u_dot)) ** u_dot.shape[0]):
        raise SingularDerivativeBlock("projected derivative block is singular")
    return basis @ np.linalg.inv(u_dot) @ dual.conj().T @ J.psi(1.0 / k)


def s_residue(V: Perturbation, J: JostData, k_j: float, *,
              rank_tol: float = RANK_TOL) -> np.ndarray:
    """Residue of the scattering matrix at the eigenvalue parameter k_j."""
    k = complex(k_j)
    if abs(k.imag) > 1e-9 or not (0 < abs(k.real) < 1):
        raise NotAnEigenvalue(f"k = {k_j} is not inside (-1, 0) u (0, 1)")
    basis, dual = _kernel_pair(J.psi(k.real), rank_tol)
    return _s_residue_from_kernel(J, k.real, basis, dual)


# -- resolvents ------------------------------------------------------------------------

def free_resolvent_kernel(x: int, xp: int, k: complex) -> complex:
    """Half-lattice free resolvent entry, in the pole-free polynomial form."""
    if x < 1 or xp < 1:
        raise ValueError("sites must be >= 1")
    k = complex(k)
    w = min(x, xp)
    geo = sum(k ** (2 * j) for j in range(w))
    return -k ** (1 + abs(x - xp)) * geo


def resolvent_kernel(V: Perturbation, J: JostData, x: int, t: int, k: complex,
                     *, tol: float = 1e-12) -> np.ndarray:
    """Kernel of (H - lambda(k))^{-1} at sites (x, t), assembled from solutions.

    Uses the row split R_{x,t} = -F_x psi~^{-1} f~_t for t >= x and
    R_{x,t} = -f_x psi^{-1} phi~_t for t < x, where F = f psi^{-1} and the
    tilde marks the conjugate-transposed solution family.
    """
    if x < 1 or t < 1:
        raise ValueError("sites must be >= 1")
    k = complex(k)
    psi_k = J.psi(k)
    scale = max(1.0, J.psi.max_norm())
    if abs(np.linalg.det(psi_k)) < tol * scale ** V.d:
        raise AtPole(f"k = {k} is numerically a determinant zero")
    lam = lambda_of_k(k)
    hi = max(x, t) + 1
    if t >= x:
        phi = _regular_values(V, lam, hi, tilde=False)
        psi_tilde = J.psi.tilde()
        f_tilde_t = jost_value(J, t, np.conj(k)).conj().T
        return -phi[x] @ np.linalg.inv(psi_tilde(k)) @ f_tilde_t
    phi_tilde = _regular_values(V, lam, hi, tilde=True)
    return -jost_value(J, x, k) @ np.linalg.inv(psi_k) @ phi_tilde[t]


def _regular_values(V: Perturbation, lam: complex, up_to: int, *, tilde: bool):
    """phi values (or their tilde) on sites 0..up_to, off-support recursion included."""
    d = V.d
    eye = np.eye(d, dtype=complex)
    vals = [np.zeros((d, d), dtype=complex), eye]
    for site in range(1, up_to):
        if tilde:
            s_inv = np.linalg.inv(V.s_at(site).conj().T)
            nxt = (lam * vals[site] - vals[site] @ V.b_at(site).conj().T
                   - vals[site - 1] @ V.a_at(site - 1).conj().T) @ s_inv
        else:
            s_inv = np.linalg.inv(V.s_at(site))
            nxt = s_inv @ ((lam * eye - V.b_at(site)) @ vals[site]
                           - V.a_at(site - 1) @ vals[site - 1])
        vals.append(nxt)
    return vals


__all__ = [
    "jost_determinant", "find_roots", "classify_spectrum", "trace_identities",
    "expected_root_sum", "forbidden_domain", "norming_matrix", "s_residue",
    "free_resolvent_kernel", "resolvent_kernel",
    "SpectrumReport", "RootRecord", "TraceResiduals", "NormingData",
    "ForbiddenDomainReport",
    "KIND_EIGENVALUE", "KIND_RESONANCE", "KIND_VIRTUAL",
    "VERDICT_NA", "VERDICT_HOLDS", "VERDICT_VIOLATED",
    "TOL_BAND", "CLUSTER_TOL", "RANK_TOL",
]
