"""Unitary gauge transformations onto the positive and triangular normal forms.

A site-wise unitary change of basis u = (u_x) maps the coefficients to

    a_x -> u_{x+1}* a_x u_x,   b_x -> u_x* b_x u_x,   s_x -> u_x* s_x u_{x+1},

which preserves the spectrum, the order q and the support-edge determinants.
Both gauges below keep s_x = a_x* and stabilize (u_x constant) beyond the
support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Perturbation, validate_perturbation
from .errors import SingularCoefficient

__all__ = ["GaugeResult", "polar_gauge", "triangular_gauge"]


@dataclass(frozen=True)
class GaugeResult:
    V_out: Perturbation
    u: tuple[np.ndarray, ...]      # u_1 .. u_{p+1}


def _require_adjoint_pair(V: Perturbation) -> None:
    for ax, sx in zip(V.a, V.s):
        if np.max(np.abs(ax.conj().T - sx)) > 1e-10 * (1.0 + np.max(np.abs(ax))):
            raise ValueError("gauge transforms expect s_x = a_x*")


def _apply_chain(V: Perturbation, u: list[np.ndarray]) -> Perturbation:
    a_new, b_new = [], []
    for x in range(1, V.p + 1):
        a_new.append(u[x] .conj().T @ V.a[x - 1] @ u[x - 1])
        b_new.append(u[x - 1].conj().T @ V.b[x - 1] @ u[x - 1])
    s_new = [m.conj().T for m in a_new]
    return validate_perturbation(a_new, s_new, b_new)


def polar_gauge(V: Perturbation, u1: np.ndarray | None = None) -> GaugeResult:
    """Gauge with positive-definite off-diagonal coefficients.

    Each a_x factors (right polar decomposition) as a_x = v_x h_x with v_x
    unitary and h_x positive; the chain u_{x+1} = v_x u_x then turns a_x into
    the positive matrix u_x* h_x u_x.  u_1 is the free parameter, identity by
    default.
    """
    _require_adjoint_pair(V)
    d = V.d
    u = [np.eye(d, dtype=complex) if u1 is None else np.asarray(u1, dtype=complex)]
    for x in range(V.p):
        ax = V.a[x]
        w, sing, vh = np.linalg.svd(ax)
        if sing.min() <= 1e-12 * sing.max():
            raise SingularCoefficient(f"a_{x + 1} has no polar factorization")
        v = w @ vh                      # unitary factor of a_x = v (a*a)^(1/2)
        u.append(v @ u[x])
    return GaugeResult(V_out=_apply_chain(V, u), u=tuple(u[: V.p + 1]))


def triangular_gauge(V: Perturbation, u1: np.ndarray | None = None) -> GaugeResult:
    """Gauge with upper-triangular, positive-diagonal off-diagonal coefficients.

    u_{x+1} is the unique unitary with u_{x+1}* (a_x u_x) upper triangular and
    positive on the diagonal (a QR factorization with sign normalization).
    """
    _require_adjoint_pair(V)
    d = V.d
    u = [np.eye(d, dtype=complex) if u1 is None else np.asarray(u1, dtype=complex)]
    for x in range(V.p):
        m = V.a[x] @ u[x]
        if abs(np.linalg.det(m)) <= 1e-12 * max(1.0, np.max(np.abs(m)) ** d):
            raise SingularCoefficient(f"a_{x + 1} is singular")
        qmat, rmat = np.linalg.qr(m)
        signs = np.diag(rmat).copy()
        signs = np.where(np.abs(signs) == 0, 1.0, signs / np.abs(signs))
        qmat = qmat @ np.diag(signs)
        u.append(qmat)
    return GaugeResult(V_out=_apply_chain(V, u), u=tuple(u[: V.p + 1]))
