"""Domain types, perturbation validation, spectral maps and matrix polynomials.

Conventions used throughout the package:

* sites are 1-based; sequence entry ``a[x-1]`` holds the coefficient at site x;
* every matrix is a dense complex ``(d, d)`` ndarray;
* a perturbation of support length p has order q in {2p-1, 2p}, inferred from
  the coefficients at the support edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousOrder,
    DivisionAtZero,
    DuplicateNodes,
    EmptySupport,
    InconsistentSamples,
    OnCut,
    SingularCoefficient,
)

TOL_DET = 1e-12      # singularity threshold for |det|
TOL_COEFF = 1e-12    # trimming / exact-pattern threshold for matrix entries
TOL_INTERP = 1e-9    # relative residual allowed when re-evaluating interpolants

CLASS_SELFADJOINT = "selfadjoint"
CLASS_TRIANGULAR = "triangular"
CLASS_COMPLEX = "complex"


def _as_matrix_seq(seq, name: str) -> tuple[np.ndarray, ...]:
    mats = []
    for x, m in enumerate(seq):
        m = np.asarray(m, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"{name}[{x}] is not a square matrix (shape {m.shape})")
        m = m.copy()
        m.setflags(write=False)
        mats.append(m)
    return tuple(mats)


def _is_hermitian(m: np.ndarray, tol: float) -> bool:
    return np.max(np.abs(m - m.conj().T)) <= tol * (1.0 + np.max(np.abs(m)))


def _is_positive_definite(m: np.ndarray, tol: float) -> bool:
    if not _is_hermitian(m, tol):
        return False
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return w.min() > tol


def _is_upper_triangular_positive(m: np.ndarray, tol: float) -> bool:
    scale = 1.0 + np.max(np.abs(m))
    if np.max(np.abs(np.tril(m, -1))) > tol * scale:
        return False
    diag = np.diag(m)
    return bool(np.all(np.abs(diag.imag) <= tol * scale) and np.all(diag.real > tol))


@dataclass(frozen=True)
class Perturbation:
    """Finitely supported block perturbation of the free Jacobi operator.

    ``a``, ``s``, ``b`` hold the site coefficients for sites 1..p.  Beyond the
    support a_x = s_x = identity and b_x = 0.  The order q together with the
    class tag is inferred by :func:`validate_perturbation`.
    """

    d: int
    p: int
    q: int
    a: tuple[np.ndarray, ...]
    s: tuple[np.ndarray, ...]
    b: tuple[np.ndarray, ...]
    class_tag: str = CLASS_COMPLEX

    @property
    def is_selfadjoint(self) -> bool:
        return self.class_tag == CLASS_SELFADJOINT

    def a_at(self, x: int) -> np.ndarray:
        """Coefficient a_x with the off-support convention a_x = identity."""
        if x == 0 or x > self.p:
            return np.eye(self.d, dtype=complex)
        return self.a[x - 1]

    def s_at(self, x: int) -> np.ndarray:
        if x == 0 or x > self.p:
            return np.eye(self.d, dtype=complex)
        return self.s[x - 1]

    def b_at(self, x: int) -> np.ndarray:
        if x == 0 or x > self.p:
            return np.zeros((self.d, self.d), dtype=complex)
        return self.b[x - 1]

    def to_dict(self) -> dict:
        out = {
            "d": self.d,
            "p": self.p,
            "a": [matrix_to_pairs(m) for m in self.a],
            "b": [matrix_to_pairs(m) for m in self.b],
        }
        if any(np.max(np.abs(ax - sx)) > 0 for ax, sx in zip(self.a, self.s)):
            out["s"] = [matrix_to_pairs(m) for m in self.s]
        return out


def matrix_to_pairs(m: np.ndarray) -> list:
    """Row-major [re, im] pairs, the JSON wire format for one matrix."""
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m, dtype=complex)]


def matrix_from_pairs(rows) -> np.ndarray:
    return np.array([[complex(v[0], v[1]) for v in row] for row in rows], dtype=complex)


def perturbation_from_dict(data: dict, **kwargs) -> Perturbation:
    """Build and validate a perturbation from its JSON dictionary form.

    An omitted "s" means s = a (self-adjoint shorthand).
    """
    a = [matrix_from_pairs(m) for m in data["a"]]
    b = [matrix_from_pairs(m) for m in data["b"]]
    s = [matrix_from_pairs(m) for m in data["s"]] if "s" in data else None
    return validate_perturbation(a, s, b, **kwargs)


def validate_perturbation(a, s=None, b=None, *, tol_det: float = TOL_DET,
                          tol_coeff: float = TOL_COEFF) -> Perturbation:
    """Validate raw coefficient triples and infer (q, class_tag).

    The support-edge patterns are tested in order: first q = 2p-1, which
    requires a_p = s_p = identity exactly (to ``tol_coeff``) with b_p
    invertible, then q = 2p, which requires 1 - s_p a_p invertible.  The two
    patterns are mutually exclusive; if neither holds the input is rejected.
    """
    if s is None:
        s = [np.asarray(m, dtype=complex).copy() for m in a]
    a = _as_matrix_seq(a, "a")
    s = _as_matrix_seq(s, "s")
    b = _as_matrix_seq(b, "b")
    p = len(a)
    if p == 0:
        raise EmptySupport("perturbation must touch at least one site")
    if not (len(s) == len(b) == p):
        raise ValueError("a, s, b must have the same length")
    d = a[0].shape[0]
    for name, seq in (("a", a), ("s", s), ("b", b)):
        for x, m in enumerate(seq):
            if m.shape != (d, d):
                raise ValueError(f"{name}[{x}] has shape {m.shape}, expected {(d, d)}")
    for name, seq in (("a", a), ("s", s)):
        for x, m in enumerate(seq):
            if abs(np.linalg.det(m)) <= tol_det:
                raise SingularCoefficient(f"{name}_{x + 1} is singular")

    eye = np.eye(d)
    edge_is_free = (np.max(np.abs(a[-1] - eye)) <= tol_coeff
                    and np.max(np.abs(s[-1] - eye)) <= tol_coeff)
    if edge_is_free:
        if abs(np.linalg.det(b[-1])) <= tol_det:
            raise AmbiguousOrder(
                "a_p = s_p = 1 but b_p is singular: no admissible order q")
        q = 2 * p - 1
    else:
        if abs(np.linalg.det(eye - s[-1] @ a[-1])) <= tol_det:
            raise AmbiguousOrder(
                "neither a_p = s_p = 1 nor det(1 - s_p a_p) != 0 holds")
        q = 2 * p

    tag = CLASS_COMPLEX
    same = all(np.max(np.abs(ax - sx)) <= tol_coeff * (1 + np.max(np.abs(ax)))
               for ax, sx in zip(a, s))
    if same and all(_is_positive_definite(ax, tol_coeff * 100) for ax in a) \
            and all(_is_hermitian(bx, tol_coeff * 100) for bx in b):
        tag = CLASS_SELFADJOINT
    else:
        adjoint = all(np.max(np.abs(ax.conj().T - sx)) <= tol_coeff * (1 + np.max(np.abs(ax)))
                      for ax, sx in zip(a, s))
        if adjoint and all(_is_upper_triangular_positive(ax, tol_coeff * 100) for ax in a) \
                and all(_is_hermitian(bx, tol_coeff * 100) for bx in b):
            tag = CLASS_TRIANGULAR
    return Perturbation(d=d, p=p, q=q, a=a, s=s, b=b, class_tag=tag)


# -- spectral variable --------------------------------------------------------

def lambda_of_k(k: complex) -> complex:
    """Energy lambda = k + 1/k of the disc parameter k."""
    k = complex(k)
    if k == 0:
        raise DivisionAtZero("lambda(k) undefined at k = 0")
    return k + 1.0 / k


def k_of_lambda(lam: complex, *, tol: float = 1e-12) -> complex:
    """Disc-side inverse of ``lambda_of_k``: the root of k^2 - lam*k + 1 with |k| < 1."""
    lam = complex(lam)
    if abs(lam.imag) <= tol and -2.0 - tol <= lam.real <= 2.0 + tol:
        raise OnCut(f"lambda = {lam} lies on the cut [-2, 2]")
    root = np.sqrt(complex(lam * lam / 4.0 - 1.0))
    k1 = lam / 2.0 - root
    k2 = lam / 2.0 + root
    return k1 if abs(k1) < abs(k2) else k2


@dataclass(frozen=True)
class SpectralPoint:
    """A point carried in both charts: k in the disc, lambda = k + 1/k."""

    k: complex
    lam: complex = field(default=None)

    def __post_init__(self):
        if self.lam is None:
            object.__setattr__(self, "lam", lambda_of_k(self.k))

    @classmethod
    def from_lambda(cls, lam: complex) -> "SpectralPoint":
        return cls(k=k_of_lambda(lam), lam=complex(lam))


# -- matrix polynomials -------------------------------------------------------

@dataclass(frozen=True)
class MatPoly:
    """Matrix-valued polynomial sum_n C_n k^n over the power window lo..hi.

    ``coeffs`` has shape (hi - lo + 1, d, d); negative ``lo`` (Laurent form)
    is allowed since intermediate recursion values need it.
    """

    lo: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ValueError("coeffs must have shape (n, d, d)")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def d(self) -> int:
        return self.coeffs.shape[1]

    @property
    def hi(self) -> int:
        return self.lo + self.coeffs.shape[0] - 1

    @classmethod
    def zero(cls, d: int) -> "MatPoly":
        return cls(0, np.zeros((1, d, d), dtype=complex))

    @classmethod
    def constant(cls, m: np.ndarray) -> "MatPoly":
        return cls(0, np.asarray(m, dtype=complex)[None, :, :])

    @classmethod
    def monomial(cls, m: np.ndarray, power: int) -> "MatPoly":
        return cls(power, np.asarray(m, dtype=complex)[None, :, :])

    def coeff(self, power: int) -> np.ndarray:
        """Coefficient of k^power (zero if outside the stored window)."""
        if self.lo <= power <= self.hi:
            return self.coeffs[power - self.lo]
        return np.zeros((self.d, self.d), dtype=complex)

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def trim(self, tol: float = TOL_COEFF) -> "MatPoly":
        """Drop leading/trailing coefficient blocks below tol * (largest entry)."""
        cut = tol * max(1.0, self.max_norm())
        keep = [i for i in range(self.coeffs.shape[0])
                if np.max(np.abs(self.coeffs[i])) > cut]
        if not keep:
            return MatPoly.zero(self.d)
        i0, i1 = keep[0], keep[-1]
        return MatPoly(self.lo + i0, self.coeffs[i0:i1 + 1])

    def shift(self, m: int) -> "MatPoly":
        return MatPoly(self.lo + m, self.coeffs)

    def __add__(self, other: "MatPoly") -> "MatPoly":
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        out = np.zeros((hi - lo + 1, self.d, self.d), dtype=complex)
        out[self.lo - lo: self.hi - lo + 1] += self.coeffs
        out[other.lo - lo: other.hi - lo + 1] += other.coeffs
        return MatPoly(lo, out)

    def __sub__(self, other: "MatPoly") -> "MatPoly":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "MatPoly":
        return MatPoly(self.lo, self.coeffs * c)

    def left_mul(self, m: np.ndarray) -> "MatPoly":
        return MatPoly(self.lo, np.einsum("ij,njk->nik", np.asarray(m, dtype=complex), self.coeffs))

    def right_mul(self, m: np.ndarray) -> "MatPoly":
        return MatPoly(self.lo, np.einsum("nij,jk->nik", self.coeffs, np.asarray(m, dtype=complex)))

    def lambda_mul(self) -> "MatPoly":
        """Multiply by (k + 1/k)."""
        return self.shift(1) + self.shift(-1)

    def derivative(self) -> "MatPoly":
        powers = np.arange(self.lo, self.hi + 1, dtype=complex)
        return MatPoly(self.lo - 1, self.coeffs * powers[:, None, None]).trim(0.0)

    def tilde(self) -> "MatPoly":
        """Coefficient-wise conjugate transpose; realizes y~(k) = y(conj k)*."""
        return MatPoly(self.lo, np.conj(np.swapaxes(self.coeffs, 1, 2)))

    def diamond(self) -> "MatPoly":
        """Substitution k -> 1/k (reverses the power window)."""
        return MatPoly(-self.hi, self.coeffs[::-1])

    def __call__(self, k: complex) -> np.ndarray:
        return eval_matpoly(self, k)


def eval_matpoly(poly: MatPoly, k: complex) -> np.ndarray:
    """Horner evaluation of a matrix (Laurent) polynomial at k."""
    k = complex(k)
    if poly.lo < 0 and k == 0:
        raise DivisionAtZero("Laurent polynomial cannot be evaluated at k = 0")
    acc = np.zeros((poly.d, poly.d), dtype=complex)
    for c in poly.coeffs[::-1]:
        acc = acc * k + c
    if poly.lo != 0:
        acc = acc * k ** poly.lo
    return acc


def unit_nodes(count: int, radius: float = 1.0, *, conjugate_offset: bool = True) -> np.ndarray:
    """Scaled roots of unity, rotated off the real axis to dodge real roots."""
    j = np.arange(count)
    phase = np.exp(2j * np.pi * (j + (0.25 if conjugate_offset else 0.0)) / count)
    return radius * phase


def interpolate_matpoly(samples, degree_bound: int, *, tol_interp: float = TOL_INTERP) -> MatPoly:
    """Entrywise polynomial interpolation of matrix samples.

    ``samples`` is a sequence of (k, matrix) pairs; at least degree_bound + 1
    pairwise distinct nodes are required.  Extra nodes act as consistency
    checks: the least-squares fit must reproduce every sample to
    ``tol_interp`` relative residual, otherwise the data is rejected.
    """
    nodes = np.array([complex(k) for k, _ in samples])
    values = np.array([np.asarray(v, dtype=complex) for _, v in samples])
    n = len(nodes)
    if n < degree_bound + 1:
        raise InconsistentSamples(
            f"need at least {degree_bound + 1} nodes for degree {degree_bound}, got {n}")
    scale = np.max(np.abs(nodes)) + 1.0
    for i in range(n):
        for j in range(i + 1, n):
            if abs(nodes[i] - nodes[j]) <= 1e-14 * scale:
                raise DuplicateNodes(f"nodes {i} and {j} coincide")
    vander = np.vander(nodes, degree_bound + 1, increasing=True)
    d = values.shape[1]
    flat = values.reshape(n, d * d)
    coeffs, *_ = np.linalg.lstsq(vander, flat, rcond=None)
    resid = vander @ coeffs - flat
    vscale = max(1.0, float(np.max(np.abs(values))))
    worst = float(np.max(np.abs(resid))) / vscale
    if worst > tol_interp:
        raise InconsistentSamples(
            f"samples deviate from a degree-{degree_bound} polynomial "
            f"(relative residual {worst:.3e})")
    return MatPoly(0, coeffs.reshape(degree_bound + 1, d, d)).trim()


def interpolation_radius(low_norm: float, high_norm: float, degree: int) -> float:
    """Node radius heuristic: equilibrate constant and leading coefficients."""
    if degree <= 0 or high_norm <= 0 or low_norm <= 0:
        return 1.0
    return max(1.0, (low_norm / high_norm) ** (1.0 / degree))
