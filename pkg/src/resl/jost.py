"""Jost solutions, regular solutions, structural coefficients and Wronskians.

The Jost family f_0..f_p is computed symbolically in the disc parameter k
(as :class:`~resl.core.MatPoly` values), not pointwise, so that the degree
structure and the coefficient identities of the theory are exact checks
rather than floating-point limits:

* f_x(k) = k^x * F_x(k) with deg F_x = q - 2x for x <= p - 1,
* f_p(k) = a_p^{-1} k^p,
* the Jost matrix psi = f_0 is a polynomial of degree exactly q.

Each backward recursion step asserts its power window; a violation flags
invalid input (typically a mislabelled order q).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MatPoly, Perturbation, TOL_COEFF, lambda_of_k
from .errors import StructureViolation

__all__ = [
    "JostData",
    "JostStructure",
    "RegularPair",
    "build_jost",
    "regular_solutions",
    "regular_solutions_tilde",
    "wronskian",
    "jost_value",
    "jost_family",
    "jost_family_diamond",
    "regular_phi",
    "regular_theta",
]


@dataclass(frozen=True)
class JostStructure:
    """Closed-form coefficient data carried by a Jost family.

    ``a_inv_products[x]`` is the left-ordered product a_1^{-1} ... a_x^{-1}
    (identity at x = 0); ``a_inv_products_b[x]`` is its b-weighted sum (the
    series obtained by replacing one factor slot with b); ``coupling_defect[x]``
    is 1 - s_x a_x with the boundary convention coupling_defect[0] = identity.
    ``edge_det`` is det(coupling_defect[p]) for even q and det(b_p) for odd q;
    ``leading_const`` is the constant in det psi = C prod (k - r_n).
    """

    a_inv_products: tuple[np.ndarray, ...]
    a_inv_products_b: tuple[np.ndarray, ...]
    b_partial_sums: tuple[np.ndarray, ...]
    coupling_defect: tuple[np.ndarray, ...]
    edge_det: complex
    leading_const: complex


@dataclass(frozen=True)
class JostData:
    """Jost solution family of a validated perturbation."""

    V: Perturbation
    f: tuple[MatPoly, ...]          # f_0 .. f_{p+2}
    structure: JostStructure

    @property
    def psi(self) -> MatPoly:
        """The Jost matrix f_0."""
        return self.f[0]

    @property
    def f1(self) -> MatPoly:
        return self.f[1]

    def m_plus(self, k: complex) -> np.ndarray:
        """Weyl coefficient m_+ = f_1 f_0^{-1} at the point k."""
        return self.f[1](k) @ np.linalg.inv(self.f[0](k))


@dataclass(frozen=True)
class RegularPair:
    """Values of the regular solutions at one energy, sites 0..p+2."""

    lam: complex
    phi: tuple[np.ndarray, ...]
    theta: tuple[np.ndarray, ...]


def _window_check(fx: MatPoly, x: int, q: int, tag: str) -> MatPoly:
    fx = fx.trim()
    lo_min = x
    hi_max = max(q - x, x)
    if fx.lo < lo_min or fx.hi > hi_max:
        raise StructureViolation(
            f"{tag}: f_{x} has power window [{fx.lo}, {fx.hi}], "
            f"admissible is [{lo_min}, {hi_max}] (wrong order q?)")
    return fx


def build_jost(V: Perturbation) -> JostData:
    """Backward recursion for the Jost family, with structural cross-checks.

    Starting from f_x = k^x beyond the support, each step solves

        a_{x-1} f_{x-1} = (k + 1/k) f_x - b_x f_x - s_x f_{x+1}

    in exact polynomial arithmetic.  The structural coefficients are then
    computed independently from the coefficient products and compared against
    the polynomial's own end coefficients; any disagreement beyond the
    trimming tolerance is an input error, not a warning.
    """
    d, p, q = V.d, V.p, V.q
    eye = np.eye(d, dtype=complex)
    f: dict[int, MatPoly] = {
        p + 1: MatPoly.monomial(eye, p + 1),
        p + 2: MatPoly.monomial(eye, p + 2),
    }
    for x in range(p + 1, 0, -1):
        rhs = f[x].lambda_mul() - f[x].left_mul(V.b_at(x)) - f[x + 1].left_mul(V.s_at(x))
        fx = rhs.left_mul(np.linalg.inv(V.a_at(x - 1)))
        f[x - 1] = _window_check(fx, x - 1, q, "jost recursion")

    structure = _structure_coefficients(V)
    _cross_check(V, f[0], f[1], structure)
    return JostData(V=V, f=tuple(f[x] for x in range(p + 3)), structure=structure)


def _structure_coefficients(V: Perturbation) -> JostStructure:
    d, p, q = V.d, V.p, V.q
    eye = np.eye(d, dtype=complex)
    inv_a = [np.linalg.inv(ax) for ax in V.a]

    prods = [eye]
    for t in inv_a:
        prods.append(prods[-1] @ t)

    # weighted[x] = sum over j<=x of (prod_{i<j} inv_a[i]) b_j (prod_{i>=j} inv_a[i])
    weighted = [np.zeros((d, d), dtype=complex)]
    for x in range(1, p + 1):
        acc = np.zeros((d, d), dtype=complex)
        for j in range(1, x + 1):
            term = prods[j - 1] @ V.b[j - 1]
            for i in range(j, x + 1):
                term = term @ inv_a[i - 1]
            acc += term
        weighted.append(acc)

    bsums = [np.zeros((d, d), dtype=complex)]
    for bx in V.b:
        bsums.append(bsums[-1] + bx)

    # coupling_defect[0] = identity: the p = 1 boundary value forced by the
    # exact edge solution psi = 1 - b_1 k.
    defect = [eye] + [eye - V.s[x] @ V.a[x] for x in range(p)]

    if q == 2 * p:
        edge_det = complex(np.linalg.det(defect[p]))
    else:
        edge_det = complex(np.linalg.det(V.b[p - 1]))
    det_tp = complex(np.linalg.det(prods[p]))
    leading_const = (-1.0) ** (d * q) * edge_det * det_tp
    return JostStructure(
        a_inv_products=tuple(prods),
        a_inv_products_b=tuple(weighted),
        b_partial_sums=tuple(bsums),
        coupling_defect=tuple(defect),
        edge_det=edge_det,
        leading_const=leading_const,
    )


def _cross_check(V: Perturbation, psi: MatPoly, f1: MatPoly, st: JostStructure) -> None:
    d, p, q = V.d, V.p, V.q
    scale = max(1.0, psi.max_norm())
    tol = 1e4 * TOL_COEFF * scale

    def expect(actual, target, what):
        if np.max(np.abs(actual - target)) > tol:
            raise StructureViolation(f"jost structure: {what} mismatch "
                                     f"({np.max(np.abs(actual - target)):.3e})")

    prods, weighted = st.a_inv_products, st.a_inv_products_b
    expect(psi.coeff(0), prods[p], "psi(0)")
    expect(psi.coeff(1), -weighted[p], "psi'(0)")
    expect(f1.coeff(1), prods[p], "f_1 linear term")
    inv_ap = np.linalg.inv(V.a[p - 1])
    if q == 2 * p:
        expect(psi.coeff(q), prods[p - 1] @ st.coupling_defect[p] @ inv_ap, "leading term")
        expect(psi.coeff(q - 1),
               -(prods[p - 1] @ V.b[p - 1] @ inv_ap
                 + weighted[p - 1] @ st.coupling_defect[p] @ inv_ap),
               "subleading term")
    else:
        expect(psi.coeff(q), -prods[p - 1] @ V.b[p - 1], "leading term")
        expect(psi.coeff(q - 1),
               weighted[p - 1] @ V.b[p - 1] + prods[p - 1] @ st.coupling_defect[p - 1],
               "subleading term")


# -- regular solutions ----------------------------------------------------------

def regular_solutions(V: Perturbation, lam: complex) -> RegularPair:
    """Forward recursion for the regular pair phi, theta at energy lam.

    phi_0 = theta_1 = 0 and phi_1 = theta_0 = identity; both satisfy
    s_x y_{x+1} = (lam - b_x) y_x - a_{x-1} y_{x-1} for x >= 1.
    """
    d, p = V.d, V.p
    lam = complex(lam)
    eye = np.eye(d, dtype=complex)
    zero = np.zeros((d, d), dtype=complex)
    phi = [zero, eye]
    theta = [eye, zero]
    for x in range(1, p + 2):
        s_inv = np.linalg.inv(V.s_at(x))
        lam_b = lam * eye - V.b_at(x)
        a_prev = V.a_at(x - 1)
        phi.append(s_inv @ (lam_b @ phi[x] - a_prev @ phi[x - 1]))
        theta.append(s_inv @ (lam_b @ theta[x] - a_prev @ theta[x - 1]))
    return RegularPair(lam=lam, phi=tuple(phi), theta=tuple(theta))


def regular_solutions_tilde(V: Perturbation, lam: complex) -> RegularPair:
    """Conjugate-transposed regular pair: values of y~(k) at lam = lam(k).

    Coefficient-wise conjugate transposition of the lam-polynomials turns the
    left-coefficient recursion into a right-coefficient one:
    y_{x+1} = (lam y_x - y_x b_x* - y_{x-1} a_{x-1}*) (s_x*)^{-1}.
    """
    d, p = V.d, V.p
    lam = complex(lam)
    eye = np.eye(d, dtype=complex)
    zero = np.zeros((d, d), dtype=complex)
    phi = [zero, eye]
    theta = [eye, zero]
    for x in range(1, p + 2):
        s_inv = np.linalg.inv(V.s_at(x).conj().T)
        b_adj = V.b_at(x).conj().T
        a_adj = V.a_at(x - 1).conj().T
        phi.append((lam * phi[x] - phi[x] @ b_adj - phi[x - 1] @ a_adj) @ s_inv)
        theta.append((lam * theta[x] - theta[x] @ b_adj - theta[x - 1] @ a_adj) @ s_inv)
    return RegularPair(lam=lam, phi=tuple(phi), theta=tuple(theta))


# -- solution families as (x, k) callables --------------------------------------

def jost_value(J: JostData, x: int, k: complex) -> np.ndarray:
    """f_x(k), extending beyond the stored range by the free form k^x."""
    if x < len(J.f):
        return J.f[x](k)
    return complex(k) ** x * np.eye(J.V.d, dtype=complex)


def jost_family(J: JostData):
    return lambda x, k: jost_value(J, x, k)


def jost_family_diamond(J: JostData):
    """The flipped family f_x(1/k)."""
    return lambda x, k: jost_value(J, x, 1.0 / complex(k))


def regular_phi(V: Perturbation):
    def values(x, k):
        pair = regular_solutions(V, lambda_of_k(k))
        return pair.phi[x]
    return values


def regular_theta(V: Perturbation):
    def values(x, k):
        pair = regular_solutions(V, lambda_of_k(k))
        return pair.theta[x]
    return values


def wronskian(V: Perturbation, y, z, x: int, k: complex) -> np.ndarray:
    """Discrete Wronskian {y, z}_x(k) = y~_x a_x z_{x+1} - y~_{x+1} a_x z_x.

    ``y`` and ``z`` are callables (site, k) -> matrix; the tilde is applied to
    y by evaluating at conj(k) and conjugate-transposing.  a_x is the identity
    at x = 0 and beyond the support.
    """
    kc = np.conj(complex(k))
    ax = V.a_at(x)
    y_x = y(x, kc).conj().T
    y_x1 = y(x + 1, kc).conj().T
    return y_x @ ax @ z(x + 1, k) - y_x1 @ ax @ z(x, k)
