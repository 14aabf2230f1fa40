"""Escaping-resonance sweep: track the d large roots as the edge coupling shrinks.

For even order the edge coefficient is a_p = 1 + eps * a', for odd order
b_p = eps * b'.  As eps -> 0 exactly d roots escape like tau_n / eps, where
the tau_n are reciprocals of the zeros t_n of det(2 a' + t b_p) (even case)
or det(-b' + t c_{p-1}) (odd case, with c_0 = identity when p = 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Perturbation, validate_perturbation
from .errors import TrackingLoss
from .jost import build_jost
from .spectra import find_roots, jost_determinant

__all__ = ["SweepResult", "sweep_targets", "run_sweep"]


@dataclass(frozen=True)
class SweepResult:
    eps: tuple[float, ...]
    tracked: tuple[tuple[complex, ...], ...]   # per eps, the d escaping roots
    t_zeros: tuple[complex, ...]               # zeros of the edge pencil
    tau: tuple[complex, ...]                   # their reciprocals
    scaled_errors: tuple[tuple[float, ...], ...]  # |eps*k_n - tau_n| per eps
    slope: float                               # log-log decay rate of the error


def _instance_at(V0: Perturbation, prime: np.ndarray, eps: float,
                 mode: str) -> Perturbation:
    a = [m.copy() for m in V0.a]
    b = [m.copy() for m in V0.b]
    if mode == "even":
        a[-1] = np.eye(V0.d) + eps * prime
    else:
        b[-1] = eps * prime
    return validate_perturbation(a, None, b)


def sweep_targets(V0: Perturbation, prime: np.ndarray, mode: str):
    """Zeros t_n of the edge pencil and their reciprocals tau_n."""
    d = V0.d
    if mode == "even":
        lead, base = np.asarray(prime, dtype=complex) * 2.0, V0.b[-1]
    else:
        lead = -np.asarray(prime, dtype=complex)
        if V0.p == 1:
            base = np.eye(d, dtype=complex)
        else:
            base = np.eye(d) - V0.s[-2] @ V0.a[-2]
    # det(lead + t*base) = 0  <=>  generalized eigenvalues of (-lead, base)
    t = np.linalg.eigvals(np.linalg.solve(base, -lead))
    t = np.sort_complex(t)
    tau = np.array([1.0 / v for v in t])
    return t, tau


def run_sweep(V0: Perturbation, prime: np.ndarray, eps_list, mode: str) -> SweepResult:
    """Roots for each eps with nearest-neighbour tracking in the 1/k chart."""
    eps_list = sorted(float(e) for e in eps_list)
    eps_list = eps_list[::-1]                    # decreasing
    if len(eps_list) < 2:
        raise ValueError("need at least two eps values")
    d = V0.d
    t, tau = sweep_targets(V0, prime, mode)

    tracked = []
    prev_scaled = None
    for eps in eps_list:
        V = _instance_at(V0, prime, eps, mode)
        roots = find_roots(jost_determinant(build_jost(V)))
        flat = [r for r, m in roots for _ in range(m)]
        flat.sort(key=abs, reverse=True)
        escape = flat[:d]
        scaled = [eps * r for r in escape]
        if prev_scaled is None:
            order = _match(list(tau), scaled)
        else:
            order = _match(prev_scaled, scaled)
        scaled = [scaled[i] for i in order]
        tracked.append(tuple(scaled))
        prev_scaled = scaled

    errors = [tuple(abs(s - tv) for s, tv in zip(row, tau)) for row in tracked]
    xs = np.log(np.array(eps_list))
    worst = np.array([max(row) for row in errors])
    slope = float(np.polyfit(xs, np.log(np.maximum(worst, 1e-300)), 1)[0])
    return SweepResult(
        eps=tuple(eps_list),
        tracked=tuple(tracked),
        t_zeros=tuple(complex(v) for v in t),
        tau=tuple(complex(v) for v in tau),
        scaled_errors=tuple(errors),
        slope=slope,
    )


def _match(targets, candidates) -> list[int]:
    """Greedy nearest-neighbour assignment; ambiguity raises TrackingLoss."""
    free = list(range(len(candidates)))
    order = []
    for t in targets:
        dists = sorted((abs(candidates[i] - t), i) for i in free)
        if not dists:
            raise TrackingLoss("fewer candidates than targets")
        if len(dists) > 1 and dists[0][0] > 0.75 * dists[1][0] \
                and dists[1][0] - dists[0][0] < 1e-12 * (1 + abs(t)):
            raise TrackingLoss(f"ambiguous correspondence near {t}")
        order.append(dists[0][1])
        free.remove(dists[0][1])
    return order
