"""Command-line front end.

Subcommands: validate, spectrum, smatrix, fredholm, invert, sweep, gauge,
finite-inverse.  Inputs and outputs are JSON (matrices as row-major
[re, im] pairs) or CSV for grid data; all numeric output keeps full double
precision.  Exit codes: 0 success, 1 file/parse/math error, 2 classification
anomaly, 3 inversion failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .core import (
    Perturbation,
    matrix_from_pairs,
    matrix_to_pairs,
    perturbation_from_dict,
)
from .errors import ClassificationAnomaly, ReslError
from .gauge import polar_gauge, triangular_gauge
from .inverse import (
    FiniteJacobi,
    jacobi_from_spectral_data,
    moment_matrix,
    reconstruct_from_jost_samples,
    reconstruct_from_smatrix,
    spectral_data_forward,
)
from .jost import build_jost
from .scattering import (
    fredholm_determinant,
    log_det_taylor,
    phase_shift_derivative,
    s_matrix,
    trace_taylor_targets,
)
from .spectra import classify_spectrum, find_roots, forbidden_domain, jost_determinant
from .sweep import run_sweep

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ANOMALY = 2
EXIT_INVERSION = 3


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _dump_json(path: str, payload) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if path == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _load_perturbation(path: str) -> Perturbation:
    return perturbation_from_dict(_load_json(path))


def cmd_validate(args) -> int:
    V = _load_perturbation(args.infile)
    payload = {"ok": True, "d": V.d, "p": V.p, "q": V.q, "class": V.class_tag}
    _dump_json(args.out, payload)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    V = _load_perturbation(args.infile)
    J = build_jost(V)
    roots = find_roots(jost_determinant(J))
    report = classify_spectrum(J, roots, band=args.tol_band)
    payload = report.to_dict()
    bounds = forbidden_domain(roots, J, band=args.tol_band)
    payload["forbidden_domain"] = {
        "ring_bounds": bounds.ring_bounds,
        "eigen_count_bound": bounds.eigen_count_bound,
        "r_minus": bounds.r_minus,
        "r_plus": bounds.r_plus,
        "eigen_count": bounds.eigen_count,
    }
    _dump_json(args.out, payload)
    if args.roots_csv:
        with open(args.roots_csv, "w") as fh:
            fh.write("index,re,im,multiplicity,kind\n")
            for i, rec in enumerate(report.roots):
                fh.write(f"{i},{_fmt(rec.value.real)},{_fmt(rec.value.imag)},"
                         f"{rec.multiplicity},{rec.kind}\n")
    return EXIT_OK


def cmd_smatrix(args) -> int:
    V = _load_perturbation(args.infile)
    J = build_jost(V)
    roots = find_roots(jost_determinant(J))
    n = args.grid
    if n < 8:
        raise ValueError("grid size must be >= 8")
    with open(args.out, "w") as fh:
        header = ["k_re", "k_im"]
        for i in range(V.d):
            for j in range(V.d):
                header += [f"S_{i}{j}_re", f"S_{i}{j}_im"]
        header += ["det_phase", "xi_prime"]
        fh.write(",".join(header) + "\n")
        for t in range(n):
            k = np.exp(1j * np.pi * (2 * t + 1) / n)
            S = s_matrix(J, k)
            row = [_fmt(k.real), _fmt(k.imag)]
            for i in range(V.d):
                for j in range(V.d):
                    row += [_fmt(S[i, j].real), _fmt(S[i, j].imag)]
            row.append(_fmt(np.angle(np.linalg.det(S))))
            row.append(_fmt(phase_shift_derivative(roots, k)))
            fh.write(",".join(row) + "\n")
    return EXIT_OK


def cmd_fredholm(args) -> int:
    V = _load_perturbation(args.infile)
    J = build_jost(V)
    dcoeffs = fredholm_determinant(V)
    fcoeffs = jost_determinant(J)
    det_tp = np.linalg.det(J.psi.coeff(0))
    bridge = dcoeffs * det_tp
    pad = max(len(fcoeffs), len(bridge))
    gap = np.zeros(pad, dtype=complex)
    gap[: len(fcoeffs)] += fcoeffs
    gap[: len(bridge)] -= bridge
    rel = float(np.max(np.abs(gap))) / max(1e-300, float(np.max(np.abs(fcoeffs))))
    f1, f2 = log_det_taylor(dcoeffs)
    t1, t2 = trace_taylor_targets(V)
    payload = {
        "determinant": [[c.real, c.imag] for c in dcoeffs],
        "bridge_relative_gap": rel,
        "taylor": {
            "f1": [f1.real, f1.imag], "f2": [f2.real, f2.imag],
            "f1_target": [t1.real, t1.imag], "f2_target": [t2.real, t2.imag],
        },
    }
    _dump_json(args.out, payload)
    return EXIT_OK


def cmd_invert(args) -> int:
    data = _load_json(args.infile)
    try:
        if "samples" in data:
            samples = [(complex(s["k"][0], s["k"][1]), matrix_from_pairs(s["S"]))
                       for s in data["samples"]]
            V = reconstruct_from_smatrix(samples, int(data["d"]), int(data["q"]))
        elif "jost_samples" in data:
            pts = [complex(s["zeta"][0], s["zeta"][1]) for s in data["jost_samples"]]
            vals = [matrix_from_pairs(s["psi"]) for s in data["jost_samples"]]
            V = reconstruct_from_jost_samples(pts, vals)
        else:
            raise ValueError("input must contain 'samples' or 'jost_samples'")
    except ReslError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVERSION
    residual = _roundtrip_residual(V, data)
    payload = V.to_dict()
    payload["roundtrip_residual"] = residual
    _dump_json(args.out, payload)
    print(f"roundtrip residual: {_fmt(residual)}")
    return EXIT_OK


def _roundtrip_residual(V: Perturbation, data) -> float:
    J = build_jost(V)
    worst = 0.0
    if "samples" in data:
        for s in data["samples"]:
            k = complex(s["k"][0], s["k"][1])
            back = s_matrix(J, k)
            ref = matrix_from_pairs(s["S"])
            worst = max(worst, float(np.max(np.abs(back - ref))))
    else:
        for s in data["jost_samples"]:
            z = complex(s["zeta"][0], s["zeta"][1])
            back = J.psi(z)
            ref = matrix_from_pairs(s["psi"])
            worst = max(worst, float(np.max(np.abs(back - ref))))
    return worst


def cmd_sweep(args) -> int:
    data = _load_json(args.infile)
    V0 = perturbation_from_dict(data["perturbation"])
    prime = matrix_from_pairs(data["prime"])
    mode = data.get("mode", "even")
    eps = [float(e) for e in args.eps.split(",")] if args.eps else data.get("eps")
    if not eps:
        raise ValueError("no eps list given (use --eps or an 'eps' field)")
    eps_arr = sorted(set(float(e) for e in eps), reverse=True)
    if len(eps_arr) < 2 or eps_arr[-1] <= 0:
        raise ValueError("eps list must contain >= 2 distinct positive values")
    result = run_sweep(V0, prime, eps_arr, mode)
    with open(args.out, "w") as fh:
        fh.write("eps,root_index,k_re,k_im\n")
        for e, row in zip(result.eps, result.tracked):
            for n, scaled in enumerate(row):
                k = scaled / e
                fh.write(f"{_fmt(e)},{n},{_fmt(k.real)},{_fmt(k.imag)}\n")
    table = {
        "pencil_zeros_t": [[v.real, v.imag] for v in result.t_zeros],
        "tau": [[v.real, v.imag] for v in result.tau],
        "final_scaled_roots": [[v.real, v.imag] for v in result.tracked[-1]],
        "log_log_slope": result.slope,
    }
    if args.tau_out:
        _dump_json(args.tau_out, table)
    else:
        _dump_json("-", table)
    return EXIT_OK


def cmd_gauge(args) -> int:
    V = _load_perturbation(args.infile)
    u1 = matrix_from_pairs(_load_json(args.u1)) if args.u1 else None
    res = triangular_gauge(V, u1) if args.target == "triangular" else polar_gauge(V, u1)
    payload = res.V_out.to_dict()
    payload["unitaries"] = [matrix_to_pairs(u) for u in res.u]
    _dump_json(args.out, payload)
    return EXIT_OK


def cmd_finite_inverse(args) -> int:
    data = _load_json(args.infile)
    Jp = FiniteJacobi.from_lists([matrix_from_pairs(m) for m in data["a"]],
                                 [matrix_from_pairs(m) for m in data["b"]])
    try:
        sd = spectral_data_forward(Jp)
        rec = jacobi_from_spectral_data(sd, Jp.p)
    except ReslError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVERSION
    err = 0.0
    for m1, m2 in zip(rec.b, Jp.b):
        err = max(err, float(np.max(np.abs(m1 - m2))))
    for m1, m2 in zip(rec.a, Jp.a):
        err = max(err, float(np.max(np.abs(m1 - m2))))
    mt = moment_matrix(sd, Jp.p)
    payload = {
        "eigenvalues": list(map(float, sd.mu)),
        "multiplicities": list(sd.multiplicities()),
        "weights": [matrix_to_pairs(w) for w in sd.weights],
        "weight_sum_gap": float(np.max(np.abs(np.sum(sd.weights, axis=0) - np.eye(Jp.d)))),
        "moment_matrix_min_eig": float(np.linalg.eigvalsh(mt).min()),
        "reconstructed": {
            "a": [matrix_to_pairs(m) for m in rec.a],
            "b": [matrix_to_pairs(m) for m in rec.b],
        },
        "roundtrip_error": err,
    }
    _dump_json(args.out, payload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="resl", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--in", dest="infile", required=True)
        p.add_argument("--out", default="-")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("validate", help="validate a perturbation file")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("spectrum", help="roots, classification and bounds")
    common(p)
    p.add_argument("--roots-csv", default=None)
    p.add_argument("--tol-band", type=float, default=1e-8)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("smatrix", help="scattering matrix on a circle grid (CSV)")
    common(p)
    p.add_argument("--grid", type=int, default=64)
    p.set_defaults(func=cmd_smatrix)

    p = sub.add_parser("fredholm", help="Fredholm determinant and trace checks")
    common(p)
    p.set_defaults(func=cmd_fredholm)

    p = sub.add_parser("invert", help="reconstruct a perturbation from samples")
    common(p)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("sweep", help="escaping-resonance sweep over eps")
    common(p)
    p.add_argument("--eps", default=None, help="comma-separated decreasing list")
    p.add_argument("--tau-out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gauge", help="unitary gauge to a normal form")
    common(p)
    p.add_argument("--target", choices=["polar", "triangular"], default="polar")
    p.add_argument("--u1", default=None, help="JSON file with the free unitary u_1")
    p.set_defaults(func=cmd_gauge)

    p = sub.add_parser("finite-inverse", help="finite Jacobi spectral data round trip")
    common(p)
    p.set_defaults(func=cmd_finite_inverse)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ClassificationAnomaly as exc:
        print(f"ClassificationAnomaly: {exc}", file=sys.stderr)
        return EXIT_ANOMALY
    except (OSError, json.JSONDecodeError, KeyError, ValueError, ReslError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
