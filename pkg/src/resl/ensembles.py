"""Random perturbation generators used by the randomized suites and the CLI."""

from __future__ import annotations

import numpy as np

from .core import Perturbation, validate_perturbation

__all__ = [
    "random_hermitian",
    "random_positive_definite",
    "random_selfadjoint",
    "random_general",
    "random_scalar",
]


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 0.5) -> np.ndarray:
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * 0.5 * (m + m.conj().T)


def random_positive_definite(rng: np.random.Generator, d: int,
                             spread: float = 0.35) -> np.ndarray:
    """exp of a bounded Hermitian: eigenvalues in (e^-spread, e^spread)."""
    h = random_hermitian(rng, d, 1.0)
    norm = np.linalg.norm(h, 2)
    if norm > 0:
        h = h * (spread / norm)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(w)) @ v.conj().T


def random_selfadjoint(rng: np.random.Generator, d: int, p: int,
                       parity: str = "even", *, scale: float = 0.5,
                       edge_margin: float = 0.05,
                       max_tries: int = 200) -> Perturbation:
    """A random member of the self-adjoint class with the requested parity of q.

    The support-edge determinant is kept away from zero by ``edge_margin`` so
    the downstream identities are tested away from the degenerate boundary.
    """
    eye = np.eye(d)
    for _ in range(max_tries):
        a = [random_positive_definite(rng, d) for _ in range(p)]
        b = [random_hermitian(rng, d, scale) for _ in range(p)]
        if parity == "odd":
            a[-1] = eye.astype(complex)
            if abs(np.linalg.det(b[-1])) < edge_margin:
                continue
        else:
            if abs(np.linalg.det(eye - a[-1] @ a[-1])) < edge_margin:
                continue
        return validate_perturbation(a, None, b)
    raise RuntimeError("could not draw a well-separated instance")


def random_general(rng: np.random.Generator, d: int, p: int, *,
                   scale: float = 0.5, edge_margin: float = 0.05,
                   max_tries: int = 200) -> Perturbation:
    """Random instance with invertible non-normal a_x and s_x = a_x*."""
    eye = np.eye(d)
    for _ in range(max_tries):
        a = [eye + scale * (rng.standard_normal((d, d))
                            + 1j * rng.standard_normal((d, d))) / max(1, d)
             for _ in range(p)]
        b = [random_hermitian(rng, d, scale) for _ in range(p)]
        if any(abs(np.linalg.det(m)) < edge_margin for m in a):
            continue
        if abs(np.linalg.det(eye - a[-1].conj().T @ a[-1])) < edge_margin:
            continue
        return validate_perturbation(a, [m.conj().T for m in a], b)
    raise RuntimeError("could not draw a well-separated instance")


def random_scalar(rng: np.random.Generator, p: int, parity: str = "even",
                  **kwargs) -> Perturbation:
    return random_selfadjoint(rng, 1, p, parity, **kwargs)
