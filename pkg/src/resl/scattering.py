"""Scattering matrix, Weyl functions, Fredholm determinant and phase shift."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.polynomial.polynomial as npp

from .core import MatPoly, Perturbation, lambda_of_k
from .errors import (
    AtPole,
    DegreeOverflow,
    DivisionAtZero,
    OnRoot,
    SingularDenominator,
)
from .jost import JostData
from .spectra import free_resolvent_kernel

__all__ = [
    "s_matrix",
    "weyl_from_smatrix",
    "fredholm_matrix",
    "fredholm_determinant",
    "log_det_taylor",
    "trace_taylor_targets",
    "phase_shift_derivative",
    "ScatteringData",
]


def s_matrix(J: JostData, k: complex, *, cross_check: bool = False,
             tol: float = 1e-12) -> np.ndarray:
    """S(k) = psi(k)^{-1} psi(1/k), the meromorphic continuation off the circle.

    With ``cross_check`` the equivalent form psi~(1/k) psi~(k)^{-1} is also
    evaluated and the two must agree to 1e-10.
    """
    k = complex(k)
    if k == 0:
        raise DivisionAtZero("S(k) undefined at k = 0")
    psi_k = J.psi(k)
    scale = max(1.0, J.psi.max_norm()) ** J.V.d
    if abs(np.linalg.det(psi_k)) < tol * scale:
        raise AtPole(f"psi is singular at k = {k}")
    value = np.linalg.solve(psi_k, J.psi(1.0 / k))
    if cross_check:
        pt = J.psi.tilde()
        alt = pt(1.0 / k) @ np.linalg.inv(pt(k))
        gap = np.max(np.abs(value - alt))
        if gap > 1e-10 * (1.0 + np.max(np.abs(value))):
            raise AtPole(f"s-matrix cross-check failed (gap {gap:.3e})")
    return value


def weyl_from_smatrix(S: np.ndarray, k: complex, p: int,
                      a_p: np.ndarray | None = None, *,
                      tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Weyl matrices (M_p, M_{p+1}) recovered from one scattering sample.

    Solves the linear relations k^{2j} S - 1 = (k^{2j+1} S - (1/k)) a_j M_j
    for j = p (needs a_p, identity if omitted) and j = p + 1 (free edge).
    """
    S = np.asarray(S, dtype=complex)
    k = complex(k)
    kbar = 1.0 / k
    d = S.shape[0]
    eye = np.eye(d)
    out = []
    for j, edge in ((p, a_p if a_p is not None else eye), (p + 1, eye)):
        den = k ** (2 * j + 1) * S - kbar * eye
        num = k ** (2 * j) * S - eye
        if abs(np.linalg.det(den)) < tol * max(1.0, np.max(np.abs(den))) ** d:
            raise SingularDenominator(f"denominator singular at j = {j}, k = {k}")
        out.append(np.linalg.inv(np.asarray(edge, dtype=complex))
                   @ np.linalg.solve(den, num))
    return out[0], out[1]


# -- Fredholm determinant -------------------------------------------------------

def fredholm_matrix(V: Perturbation, k: complex) -> np.ndarray:
    """I + V R0(lambda(k)) restricted to the support window, sites 1..p+1.

    The window covers the support plus one guard site because the edge
    coefficient couples site p to p + 1; the free-resolvent entries use the
    polynomial form, so the result is entire in k.
    """
    d, w = V.d, V.p + 1
    out = np.eye(w * d, dtype=complex)
    for x in range(1, w + 1):
        row = np.zeros((d, w * d), dtype=complex)
        for t in range(1, w + 1):
            block = V.b_at(x) * free_resolvent_kernel(x, t, k)
            if x >= 2:
                block = block + (V.a_at(x - 1) - np.eye(d)) * free_resolvent_kernel(x - 1, t, k)
            block = block + (V.s_at(x) - np.eye(d)) * free_resolvent_kernel(x + 1, t, k)
            row[:, (t - 1) * d: t * d] = block
        out[(x - 1) * d: x * d, :] += row
    return out


def fredholm_determinant(V: Perturbation, *, tol: float = 1e-9) -> np.ndarray:
    """det(I + V R0) as ascending polynomial coefficients in k, deg <= q*d.

    The determinant is an exact polynomial (the window is finite and the
    free-resolvent entries are polynomial); it is recovered by sampling and
    a discrete Fourier inversion so that downstream identities can be tested
    coefficient-by-coefficient.  D(0) = 1 by construction.
    """
    n = V.q * V.d + 1
    # one extra node exposes an out-of-band component if the window is wrong
    m = n + 1
    nodes = np.exp(2j * np.pi * np.arange(m) / m)
    values = np.array([np.linalg.det(fredholm_matrix(V, z)) for z in nodes])
    coeffs = np.fft.fft(values) / m
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    if abs(coeffs[n]) > tol * scale:
        raise DegreeOverflow(
            f"determinant has degree > {n - 1}: windowing bug "
            f"(overflow {abs(coeffs[n]):.3e})")
    coeffs = coeffs[:n]
    if abs(coeffs[0] - 1.0) > 1e-9:
        raise DegreeOverflow("D(0) != 1: windowing bug")
    return coeffs


def log_det_taylor(coeffs: np.ndarray) -> tuple[complex, complex]:
    """(F1, F2) with log D(k) = -F1 k - F2 k^2 / 2 + O(k^3)."""
    d1 = coeffs[1] if len(coeffs) > 1 else 0.0
    d2 = coeffs[2] if len(coeffs) > 2 else 0.0
    return -d1, d1 * d1 - 2.0 * d2


def trace_taylor_targets(V: Perturbation) -> tuple[complex, complex]:
    """Closed-form trace values the Taylor coefficients must reproduce."""
    eye = np.eye(V.d)
    f1 = sum(np.trace(bx) for bx in V.b)
    f2 = sum(np.trace(bx @ bx + 2.0 * (ax @ sx - eye))
             for ax, sx, bx in zip(V.a, V.s, V.b))
    return complex(f1), complex(f2)


# -- phase shift ------------------------------------------------------------------

def phase_shift_derivative(roots, k: complex, *, tol: float = 1e-9) -> float:
    """Angular derivative of the phase shift on the unit circle.

    With exp(-2i xi) = det S = f(1/k)/f(k) and f = C prod (k - r_j), the
    derivative along k = exp(i theta) is

        d(xi)/d(theta) = sum_j (1 - Re(conj(k) r_j)) / |k - r_j|^2,

    a real number; the complex derivative is xi'(k) = d(xi)/d(theta) / (i k).
    Roots are passed as (value, multiplicity) pairs covering all q*d zeros.
    """
    k = complex(k)
    if abs(abs(k) - 1.0) > 1e-9:
        raise ValueError(f"|k| must be 1, got {abs(k)}")
    total = 0.0
    for r, mult in roots:
        gap = abs(k - r)
        if gap < tol * (1.0 + abs(r)):
            raise OnRoot(f"k = {k} sits on the root {r}")
        total += mult * (1.0 - (np.conj(k) * r).real) / gap ** 2
    return float(total)


@dataclass(frozen=True)
class ScatteringData:
    """Bundle of scattering artifacts for one perturbation."""

    J: JostData
    det_coeffs: np.ndarray          # Fredholm determinant polynomial
    f1: complex
    f2: complex
    roots: tuple

    def s(self, k: complex) -> np.ndarray:
        return s_matrix(self.J, k)

    def xi_prime(self, k: complex) -> float:
        return phase_shift_derivative(self.roots, k)

    def det_s(self, k: complex) -> complex:
        num = npp.polyval(1.0 / complex(k), self.det_coeffs)
        den = npp.polyval(complex(k), self.det_coeffs)
        return complex(num / den)
