"""Command-line front end.

Exit codes: 0 success, 1 a criterion or check failed, 2 usage error.
"""
import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import contour, dirac, interacting, scalar
from ._accel import default_threads, set_threads
from .lattice import LatticeError, LatticeParams

CONVERGE_HEADER = [
    "M", "N", "x0", "x1", "x2", "x3",
    "lattice_re", "lattice_im", "continuum_re", "continuum_im", "abs_err", "rel_err",
]
DOUBLING_HEADER = ["M", "N", "scheme", "zero_modes", "expected"]
CONTOUR_HEADER = ["epsilon", "value_re", "value_im", "deviation"]
ORACLE_HEADER = ["check", "error", "tolerance", "status"]
NPOINT_HEADER = ["quantity", "re", "im"]

_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
NPOINT_SCHEMA = {
    "type": "object",
    "required": ["mode", "points", "signs", "det", "P_n", "analytic", "det_factor", "value"],
    "properties": {
        "mode": {"enum": ["schwinger", "wightman"]},
        "points": {"type": "array", "items": {"type": "array", "items": _COMPLEX, "minItems": 4, "maxItems": 4}},
        "signs": {"type": "array", "items": {"enum": ["-", "+"]}},
        "spinors": {"type": "array", "items": {"type": "integer", "minimum": 0, "maximum": 3}},
        "det": _COMPLEX,
        "P_n": _COMPLEX,
        "analytic": {"type": "boolean"},
        "det_factor": {"anyOf": [_COMPLEX, {"type": "null"}]},
        "fermion_factor": {"anyOf": [_COMPLEX, {"type": "null"}]},
        "value": {"anyOf": [_COMPLEX, {"type": "null"}]},
        "worst_pair": {"anyOf": [{"type": "null"}, {
            "type": "object",
            "required": ["pair", "distance", "magnitude"],
            "properties": {
                "pair": {"type": "array", "items": {"type": "integer"}},
                "distance": {"type": "number"},
                "magnitude": {"type": "number"},
            },
        }]},
    },
}


class UsageError(Exception):
    pass


def _cx(z):
    z = complex(z)
    return [z.real, z.imag]


def _g(v):
    return repr(float(v))


# ---------------------------------------------------------------------------
# argument parsing


def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text).strip()
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _points(text):
    """``"x0,x1,x2,x3;y0,..."`` or a JSON-style nested list; complex ``x0`` allowed (``1-0.2j``)."""
    if isinstance(text, (list, tuple)):
        rows = [[complex(v) if not isinstance(v, list) else complex(*v) for v in p] for p in text]
    else:
        rows = [[complex(v.strip().replace(" ", "")) for v in p.split(",")] for p in str(text).split(";") if p.strip()]
    for r in rows:
        if len(r) != 4:
            raise UsageError(f"each point needs 4 coordinates, got {len(r)}")
    return rows


def _signs(text):
    items = text if isinstance(text, (list, tuple)) else [s for s in str(text).split(",") if s.strip()]
    try:
        return interacting.as_signs(items)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _common(p):
    p.add_argument("--config", help="JSON file whose keys override the flags")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, help="worker threads (default: QFLAT_THREADS or all cores)")
    p.add_argument("--threshold", type=float, help="pass/fail threshold")


def build_parser():
    parser = argparse.ArgumentParser(prog="qflat", description="Lattice and continuum correlation functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (("converge-scalar", "scalar lattice vs continuum convergence"),
                           ("converge-dirac", "Dirac lattice vs continuum convergence")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--M", nargs="*", type=int, default=[2, 4, 8])
        p.add_argument("--N", nargs="*", type=int, help="defaults to M")
        p.add_argument("--mass", type=float, default=1.0)
        p.add_argument("--mass-dirac", type=float, default=1.0)
        p.add_argument("--x", default="1,0,0,0")
        _common(p)

    p = sub.add_parser("npoint", help="interacting n-point function")
    p.add_argument("--points", default="1,0,0,0;0,0,0,0")
    p.add_argument("--signs", default="-,+")
    p.add_argument("--spinors", default="0,0", help="one spinor index per point; empty for the bosonic factor only")
    p.add_argument("--eps", help="contour heights; given, the Wightman function is evaluated")
    p.add_argument("--coupling-l", type=float, default=1.0)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--mass-dirac", type=float, default=1.0)
    _common(p)

    p = sub.add_parser("contour", help="contour-height invariance of a two-point functional")
    p.add_argument("--coupling-l", type=float, default=1.0)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--eps", help="heights (default 2,2.5,3 times ell; 0.5,1,2 at l=0)")
    p.add_argument("--kernel", choices=("scalar", "rho"), default="scalar")
    p.add_argument("--sigma", type=float, help="test-function width (default 0.5, or 0.6 at l=0)")
    p.add_argument("--center", default="0.3,0.2,-0.1,0.4")
    p.add_argument("--nodes", type=int, default=64)
    _common(p)

    p = sub.add_parser("doubling", help="zero modes of the massless lattice Dirac symbol")
    p.add_argument("--M", nargs="*", type=int, default=[2, 4])
    p.add_argument("--N", nargs="*", type=int, help="defaults to M")
    _common(p)

    p = sub.add_parser("oracle", help="run the oracle equivalence suite")
    p.add_argument("--M", nargs="*", type=int, default=[1])
    p.add_argument("--N", nargs="*", type=int, help="defaults to M")
    p.add_argument("--inject-perturbation", action="store_true", help=argparse.SUPPRESS)
    _common(p)
    return parser


def _apply_config(args):
    if not args.config:
        return args
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    for key, value in cfg.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest in ("command", "config") or not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r}")
        setattr(args, dest, value)
    return args


def _lattices(args):
    def as_list(v):
        return [] if v is None else [v] if isinstance(v, int) else list(v)

    Ms = as_list(args.M)
    if not Ms:
        raise UsageError("M list is empty")
    Ns = as_list(args.N) or Ms
    if len(Ns) == 1 and len(Ms) > 1:
        Ns = Ns * len(Ms)
    if len(Ns) != len(Ms):
        raise UsageError("N list must match the M list in length")
    try:
        return [LatticeParams(int(M), int(N)) for M, N in zip(Ms, Ns)]
    except LatticeError as exc:
        raise UsageError(str(exc)) from exc


def _real_x(args):
    try:
        x = np.array(_float_list(args.x))
    except ValueError as exc:
        raise UsageError(f"bad --x: {exc}") from exc
    if x.shape != (4,):
        raise UsageError("--x needs 4 components")
    if x[0] == 0.0:
        raise UsageError("x0 must be nonzero (the continuum function needs time separation)")
    return x


def _positive(name, v):
    if not v > 0:
        raise UsageError(f"{name} must be positive, got {v}")
    return float(v)


# ---------------------------------------------------------------------------
# output


def _write(args, text):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# commands


def _snap(params, x):
    k = params.nearest_site(x)
    if k[0] == 0:
        raise UsageError(f"x0 = {x[0]} rounds to time label 0 on the M={params.M} lattice")
    return k, k * params.delta


def _converge_verdict(errs, threshold):
    monotone = all(b <= a for a, b in zip(errs, errs[1:]))
    return monotone and errs[-1] < threshold, monotone


def cmd_converge_scalar(args):
    m = _positive("mass", args.mass)
    lattices = _lattices(args)
    x = _real_x(args)
    threshold = 0.05 if args.threshold is None else args.threshold
    rows, recs = [], []
    for p in lattices:
        k, xs = _snap(p, x)
        lat = scalar.lattice_propagator_accel(p, m, k)
        con = scalar.continuum_schwinger(m, xs)
        s = scalar.PropagatorSample.from_values(xs, lat, con)
        rows.append([p.M, p.N, *map(_g, xs), _g(lat.real), _g(lat.imag), _g(con), _g(0.0),
                     _g(s.abs_error), _g(s.rel_error)])
        recs.append({"M": p.M, "N": p.N, "x": list(s.x), "lattice": _cx(lat), "continuum": _cx(con),
                     "abs_err": s.abs_error, "rel_err": s.rel_error})
    ok, monotone = _converge_verdict([r["rel_err"] for r in recs], threshold)
    if args.format == "json":
        _write(args, _json({"rows": recs, "monotone": monotone, "threshold": threshold, "pass": ok}))
    else:
        _write(args, _csv(CONVERGE_HEADER, rows))
    print(f"converge-scalar: monotone={monotone} final_rel_err={recs[-1]['rel_err']:.6g} "
          f"threshold={threshold} -> {'PASS' if ok else 'FAIL'}", file=sys.stderr)
    return 0 if ok else 1


def _max_entry(lat, con):
    diff = np.abs(lat - con)
    i = np.unravel_index(int(np.argmax(diff)), diff.shape)
    err = float(diff[i])
    return i, err, err / max(float(np.max(np.abs(con))), scalar.REL_FLOOR)


def cmd_converge_dirac(args):
    mt = _positive("mass-dirac", args.mass_dirac)
    lattices = _lattices(args)
    x = _real_x(args)
    threshold = 0.05 if args.threshold is None else args.threshold
    rows, recs = [], []
    for p in lattices:
        k, xs = _snap(p, x)
        lat = dirac.lattice_dirac_propagator(p, mt, k, method="accel")
        con = dirac.continuum_dirac_schwinger(mt, xs)
        i, err, rel = _max_entry(lat, con)
        # the row reports the entry with the largest absolute deviation
        rows.append([p.M, p.N, *map(_g, xs), _g(lat[i].real), _g(lat[i].imag), _g(con[i].real),
                     _g(con[i].imag), _g(err), _g(rel)])
        recs.append({"M": p.M, "N": p.N, "x": [float(v) for v in xs], "entry": [int(v) for v in i],
                     "lattice": [[_cx(v) for v in r] for r in lat],
                     "continuum": [[_cx(v) for v in r] for r in con],
                     "abs_err": err, "rel_err": rel})
    ok, monotone = _converge_verdict([r["rel_err"] for r in recs], threshold)
    small = lattices[0]
    doubling = {s: dirac.doubling_count(s, small) for s in dirac.SCHEMES}
    if args.format == "json":
        _write(args, _json({"rows": recs, "monotone": monotone, "threshold": threshold, "pass": ok,
                            "doubling": {"M": small.M, "N": small.N, **doubling}}))
    else:
        _write(args, _csv(CONVERGE_HEADER, rows))
    print(f"converge-dirac: monotone={monotone} final_rel_err={recs[-1]['rel_err']:.6g} "
          f"threshold={threshold} -> {'PASS' if ok else 'FAIL'}", file=sys.stderr)
    print(f"doubling on M={small.M},N={small.N}: forward_backward={doubling['forward_backward']} "
          f"central={doubling['central']}", file=sys.stderr)
    return 0 if ok else 1


def _npoint_setup(args):
    try:
        pts = _points(args.points)
    except ValueError as exc:
        raise UsageError(f"bad --points: {exc}") from exc
    signs = _signs(args.signs)
    if len(pts) != len(signs):
        raise UsageError("points and signs differ in length")
    spin = []
    if args.spinors not in (None, "", []):
        spin = [int(v) for v in _float_list(args.spinors)]
        if len(spin) != len(pts) or any(s not in range(4) for s in spin):
            raise UsageError("one spinor index in 0..3 per point")
    if args.coupling_l < 0:
        raise UsageError("coupling l must be nonnegative")
    params = interacting.ModelParams(float(args.coupling_l), _positive("mass", args.mass),
                                     _positive("mass-dirac", args.mass_dirac))
    eps = None
    if args.eps not in (None, "", []):
        eps = _float_list(args.eps)
        if len(eps) == 1 and len(pts) > 1:
            # one height: stack the points at (n-1)eps, ..., eps, 0
            eps = [(len(pts) - 1 - j) * eps[0] for j in range(len(pts))]
        if len(eps) != len(pts):
            raise UsageError("give one contour height, or one per point")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise UsageError("contour heights must strictly decrease along the points")
    return pts, signs, spin, params, eps


def _worst_pair(mat, pts, l):
    n = mat.shape[0]
    best = None
    for j in range(n):
        for k in range(j + 1, n):
            v = abs(mat[j, k]) ** 2  # |c_jk|^2 = |4 l^4 D^2|
            if best is None or v > best[0]:
                d = np.asarray(pts[j]) - np.asarray(pts[k])
                best = (v, (j, k), float(np.sqrt(np.sum(np.abs(d) ** 2))))
    if best is None:
        return None
    return {"pair": list(best[1]), "distance": best[2], "magnitude": best[0]}


def cmd_npoint(args):
    pts, signs, spin, params, eps = _npoint_setup(args)
    if eps is None:
        real = []
        for p in pts:
            if any(c.imag for c in p):
                raise UsageError("Euclidean points must be real; give --eps for complex times")
            real.append(np.array([c.real for c in p]))
        try:
            cor = interacting.build_C(real, signs, params)
        except scalar.AdmissibilityError as exc:
            raise UsageError(str(exc)) from exc
        zpts, mode = [np.asarray(p, dtype=complex) for p in real], "schwinger"
    else:
        zpts = [np.array([p[0].real - 1j * e, p[1].real, p[2].real, p[3].real]) for p, e in zip(pts, eps)]
        cor = interacting.build_A(zpts, signs, params, method="bessel")
        mode = "wightman"
    det, P_n = cor.det, cor.P_n
    analytic = abs(P_n) < 1.0
    worst = _worst_pair(cor.entries, zpts, params.l)
    out = {"mode": mode, "points": [[_cx(c) for c in p] for p in zpts],
           "signs": ["-" if s.is_psi else "+" for s in signs], "spinors": spin,
           "det": _cx(det), "P_n": _cx(P_n), "analytic": analytic, "worst_pair": worst,
           "det_factor": None, "fermion_factor": None, "value": None}
    if analytic:
        bos = interacting.det_inverse_sqrt(cor)
        fer = None
        if spin:
            if mode == "schwinger":
                fer = interacting.npoint_schwinger(real, signs, spin, params) / bos
            else:
                fer = interacting.npoint_wightman(zpts, signs, spin, params, method="bessel") / bos
        out["det_factor"] = _cx(bos)
        out["fermion_factor"] = None if fer is None else _cx(fer)
        out["value"] = _cx(bos if fer is None else bos * fer)
    if args.format == "json":
        _write(args, _json(out))
    else:
        rows = [["det", _g(det.real), _g(det.imag)], ["P_n", _g(P_n.real), _g(P_n.imag)]]
        for key in ("det_factor", "fermion_factor", "value"):
            if out[key] is not None:
                rows.append([key, _g(out[key][0]), _g(out[key][1])])
        _write(args, _csv(NPOINT_HEADER, rows))
    if not analytic:
        pair = worst["pair"] if worst else None
        dist = worst["distance"] if worst else float("nan")
        print(f"npoint: analyticity violated, |P_n| = {abs(P_n):.6g} >= 1; "
              f"offending pair {pair} at distance {dist:.6g} (ell = {params.ell:.6g})", file=sys.stderr)
        return 1
    print(f"npoint: |P_n| = {abs(P_n):.6g} < 1 -> PASS", file=sys.stderr)
    return 0


def cmd_contour(args):
    l = float(args.coupling_l)
    if l < 0:
        raise UsageError("coupling l must be nonnegative")
    m = _positive("mass", args.mass)
    ell = interacting.fundamental_length(l)
    if args.eps in (None, "", []):
        eps = [2 * ell, 2.5 * ell, 3 * ell] if l > 0 else [0.5, 1.0, 2.0]
    else:
        eps = _float_list(args.eps)
    if not eps or any(not e > 0 for e in eps):
        raise UsageError("contour heights must be positive")
    sigma = args.sigma if args.sigma is not None else (0.5 if l > 0 else 0.6)
    center = _float_list(args.center)
    if len(center) != 4:
        raise UsageError("--center needs 4 components")
    f = contour.TestFunction(tuple(center), _positive("sigma", sigma))
    kernel = (contour.ScalarPair if args.kernel == "scalar" else contour.RhoPair)(l, m)
    threshold = (1e-5 if l > 0 else 1e-6) if args.threshold is None else args.threshold
    try:
        rows, worst = contour.contour_invariance_report(kernel, f, eps, nodes=int(args.nodes))
    except scalar.AdmissibilityError as exc:
        print(f"contour: {exc}", file=sys.stderr)
        return 1
    ok = worst < threshold
    if args.format == "json":
        _write(args, _json({"rows": [{"epsilon": r.epsilon, "value": _cx(r.value), "deviation": r.deviation}
                                     for r in rows], "max_pairwise": worst, "threshold": threshold, "pass": ok}))
    else:
        _write(args, _csv(CONTOUR_HEADER, [[_g(r.epsilon), _g(r.value.real), _g(r.value.imag), _g(r.deviation)]
                                           for r in rows]))
    print(f"contour: max pairwise relative deviation {worst:.3g} threshold {threshold} -> "
          f"{'PASS' if ok else 'FAIL'}", file=sys.stderr)
    return 0 if ok else 1


EXPECTED_ZERO_MODES = {"forward_backward": 1, "central": 16}


def cmd_doubling(args):
    lattices = _lattices(args)
    rows, ok = [], True
    for p in lattices:
        for s in dirac.SCHEMES:
            c = dirac.doubling_count(s, p)
            ok &= c == EXPECTED_ZERO_MODES[s]
            rows.append([p.M, p.N, s, c, EXPECTED_ZERO_MODES[s]])
    if args.format == "json":
        _write(args, _json({"rows": [dict(zip(DOUBLING_HEADER, r)) for r in rows], "pass": ok}))
    else:
        _write(args, _csv(DOUBLING_HEADER, rows))
    print(f"doubling: {'PASS' if ok else 'FAIL'}", file=sys.stderr)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# oracle suite: each check returns its error; it passes when error <= tolerance


def _all_sites(p):
    idx = p.indices
    return np.stack(np.meshgrid(idx, idx, idx, idx, indexing="ij"), axis=-1).reshape(-1, 4)


def _rel(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / max(float(np.max(np.abs(b))), 1e-300))


def _chk_one_d(p, perturb):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(5):
        B = rng.uniform(0.3, 3.0) * np.exp(1j * rng.uniform(-math.pi / 4, math.pi / 4))
        for k in p.indices:
            worst = max(worst, _rel(scalar.one_d_sum_closed(B, int(k), p), scalar.one_d_sum_direct(B, int(k), p)))
    return worst


def _chk_scalar_accel(p, perturb):
    return max(_rel(scalar.lattice_propagator_accel(p, 1.0, k), scalar.lattice_propagator_direct(p, 1.0, k))
               for k in _all_sites(p))


def _chk_scalar_dense(p, perturb):
    dense = scalar.dense_operator_oracle(p, 1.0)
    o = scalar.site_index((0, 0, 0, 0), p)
    return max(_rel(dense[scalar.site_index(k, p), o], scalar.lattice_propagator_direct(p, 1.0, k))
               for k in _all_sites(p))


def _chk_dirac_inverse(p, perturb):
    worst = 0.0
    for k in _all_sites(p):
        mom = k * p.eta
        S = dirac.dirac_symbol(mom, 1.0, p).matrix.copy()
        if perturb:
            S[0, 0] += 1e-6  # sensitivity hook
        worst = max(worst, float(np.max(np.abs(dirac.momentum_inverse_analytic(mom, 1.0, p) @ S - np.eye(4)))))
    return worst


def _chk_dirac_analytic_direct(p, perturb):
    return max(_rel(dirac.momentum_inverse_analytic(k * p.eta, 1.0, p), dirac.momentum_inverse_direct(k * p.eta, 1.0, p))
               for k in _all_sites(p))


def _chk_dirac_accel(p, perturb):
    return max(_rel(dirac.lattice_dirac_propagator(p, 0.5, k, "accel"), dirac.lattice_dirac_propagator(p, 0.5, k, "direct"))
               for k in _all_sites(p)[:32])


def _chk_dirac_dense(p, perturb):
    dense = dirac.dense_dirac_oracle(p, 1.0)
    o = scalar.site_index((0, 0, 0, 0), p)
    worst = 0.0
    for k in _all_sites(p):
        i = scalar.site_index(k, p)
        blk = dense[4 * i:4 * i + 4, 4 * o:4 * o + 4]
        worst = max(worst, _rel(blk, dirac.lattice_dirac_propagator(p, 1.0, k)))
    return worst


def _chk_gauss_A(p, perturb):
    rng = np.random.default_rng(5)
    X = rng.normal(size=(2, 2))
    Lam = X @ X.T + np.eye(2)
    return interacting.gaussian_identity_check_A(Lam, rng.normal(size=2))[2]


def _chk_gauss_B(p, perturb):
    rng = np.random.default_rng(6)
    X = rng.normal(size=(2, 2))
    A = rng.normal(size=(2, 2))
    return interacting.gaussian_identity_check_B(X @ X.T + np.eye(2), A + A.T)[2]


def _chk_wick(p, perturb):
    return max(abs(interacting.wick_two_point(1.0, w / 2) - interacting.wick_two_point_quadrature(1.0, w / 2))
               for w in (-0.9, -0.3, 0.0, 0.5, 0.9))


def _chk_quadrature(p, perturb):
    xs = [(0.5, 0.0, 0.0, 0.0), (1.0, 0.3, -0.2, 0.4), (2.0, 1.5, 0.0, 0.0)]
    return max(_rel(scalar.continuum_schwinger(1.0, x, "gl"), scalar.continuum_schwinger(1.0, x, "quadpack"))
               for x in xs)


def _chk_bessel(p, perturb):
    xs = [(0.5, 0.0, 0.0, 0.0), (1.0, 0.3, -0.2, 0.4), (2.0, 1.5, 0.0, 0.0)]
    return max(_rel(scalar.continuum_schwinger(1.0, x), scalar.schwinger_bessel(1.0, x[0], np.linalg.norm(x[1:])))
               for x in xs)


ORACLE_CHECKS = [
    ("one_d_closed_vs_direct", _chk_one_d, 1e-11),
    ("scalar_accel_vs_direct", _chk_scalar_accel, 1e-10),
    ("scalar_dense_vs_direct", _chk_scalar_dense, 1e-10),
    ("dirac_inverse_times_symbol", _chk_dirac_inverse, 1e-12),
    ("dirac_analytic_vs_numeric_inverse", _chk_dirac_analytic_direct, 1e-12),
    ("dirac_accel_vs_direct", _chk_dirac_accel, 1e-10),
    ("dirac_dense_vs_momentum_sum", _chk_dirac_dense, 1e-10),
    ("gaussian_fourier_identity", _chk_gauss_A, 1e-7),
    ("gaussian_moment_identity", _chk_gauss_B, 1e-7),
    ("wick_two_point_quadrature", _chk_wick, 1e-8),
    ("radial_gl_vs_quadpack", _chk_quadrature, 1e-8),
    ("radial_gl_vs_bessel", _chk_bessel, 1e-10),
]


def run_oracles(lattices, perturb=False):
    """``[(name, M, error, tolerance, passed), ...]`` for every registered check and lattice."""
    out = []
    for p in lattices:
        for name, fn, tol in ORACLE_CHECKS:
            err = float(fn(p, perturb))
            out.append((f"{name}[M={p.M},N={p.N}]", err, tol, err <= tol))
    return out


def cmd_oracle(args):
    lattices = _lattices(args)
    if any(p.volume > scalar.DENSE_SITE_LIMIT // 4 for p in lattices):
        raise UsageError("oracle suite runs dense Dirac inverses; use M = N = 1 or M*N <= 2")
    results = run_oracles(lattices, bool(args.inject_perturbation))
    failed = [r[0] for r in results if not r[3]]
    if args.format == "json":
        _write(args, _json({"checks": [dict(zip(ORACLE_HEADER, (n, e, t, "PASS" if ok else "FAIL")))
                                       for n, e, t, ok in results], "failed": failed}))
    else:
        _write(args, _csv(ORACLE_HEADER, [[n, _g(e), _g(t), "PASS" if ok else "FAIL"] for n, e, t, ok in results]))
    if failed:
        print("oracle: failed checks: " + ", ".join(failed), file=sys.stderr)
        return 1
    print(f"oracle: all {len(results)} checks passed", file=sys.stderr)
    return 0


COMMANDS = {
    "converge-scalar": cmd_converge_scalar,
    "converge-dirac": cmd_converge_dirac,
    "npoint": cmd_npoint,
    "contour": cmd_contour,
    "doubling": cmd_doubling,
    "oracle": cmd_oracle,
}


def _join_dash_values(argv):
    """``--signs -,+`` -> ``--signs=-,+``; argparse would read ``-,+`` as an option."""
    out, it = [], iter(argv)
    for a in it:
        if a in ("--signs", "--points", "--eps", "--center", "--x"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and not nxt.startswith("--"):
                out.append(f"{a}={nxt}")
                continue
            out.append(a)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(a)
    return out


def main(argv=None):
    parser = build_parser()
    argv = _join_dash_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = _apply_config(args)
        set_threads(args.threads if args.threads else default_threads())
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"qflat {args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"qflat {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
