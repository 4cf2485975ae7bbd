"""Command-line experiments with Markdown/CSV reports.

Exit codes: 0 when every gate passes, 1 on a gate failure, 2 on bad input.
"""
import argparse
import csv
import io as _stdio
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import aedecomp, kernels, morse, witten, zetadet
from .complex_core import (CochainComplex, ComplexError, euler_characteristic, random_complex,
                           tensor_product, torsion, torsion_via_bases)
from .io import (InputError, as_list, complex_to_dict, dump_json, load_complex, load_weighting,
                 parse_config, weighting_to_dict)

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def fmt(x):
    """Deterministic text for a value (``repr`` for floats)."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(fmt(v) for v in x) + "]"
    return str(x)


@dataclass
class Gate:
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass
class ExperimentReport:
    experiment: str
    inputs: dict
    environment: dict
    rows: list = field(default_factory=list)
    gates: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, case, quantity, value, t="", tau=""):
        self.rows.append((case, t, tau, quantity, value))

    def gate(self, name, value, threshold):
        """Record ``value <= threshold``."""
        ok = bool(value <= threshold) and not math.isnan(value)
        self.gates.append(Gate(name, float(value), float(threshold), ok))
        return ok

    def gate_true(self, name, ok):
        self.gates.append(Gate(name, 0.0 if ok else 1.0, 0.0, bool(ok)))
        return bool(ok)

    @property
    def passed(self):
        return all(g.passed for g in self.gates)

    def markdown(self):
        out = [f"# Experiment: {self.experiment}", "", "## Inputs", ""]
        out += [f"- {k} = {fmt(v)}" for k, v in sorted(self.inputs.items())]
        out += ["", "## Environment", ""]
        out += [f"- {k} = {fmt(v)}" for k, v in sorted(self.environment.items())]
        out += ["", "## Results", "", "| case | t | tau | quantity | value |", "|---|---|---|---|---|"]
        out += [f"| {c} | {fmt(t)} | {fmt(tau)} | {q} | {fmt(v)} |" for c, t, tau, q, v in self.rows]
        out += ["", "## Gates", ""]
        for g in self.gates:
            out.append(f"- {'PASS' if g.passed else 'FAIL'} {g.name}: {fmt(g.value)} <= {fmt(g.threshold)}")
        if self.notes:
            out += ["", "## Notes", ""] + [f"- {n}" for n in self.notes]
        out += ["", f"Overall: {'PASS' if self.passed else 'FAIL'}", ""]
        return "\n".join(out)

    def csv_text(self):
        buf = _stdio.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["case", "t", "tau", "quantity", "value"])
        for c, t, tau, q, v in self.rows:
            w.writerow([c, fmt(t), fmt(tau), q, fmt(v)])
        return buf.getvalue()

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.md"), "w", encoding="utf-8") as fh:
            fh.write(self.markdown())
        with open(os.path.join(out_dir, "data.csv"), "w", encoding="utf-8") as fh:
            fh.write(self.csv_text())


def _env(args, **extra):
    env = {"seed": args.seed, "backend": kernels.BACKEND, "rank_tol": kernels.RANK_TOL}
    if args.tol is not None:
        env["tol_override"] = args.tol
    env.update(extra)
    return env


def _tol(args, default):
    return default if args.tol is None else float(args.tol)


# --- torsion ----------------------------------------------------------------

def cmd_torsion(args):
    c = load_complex(args.file)
    tol = _tol(args, 1e-9)
    rep = ExperimentReport("torsion", {"file": args.file}, _env(args, gate_tol=tol))
    a = torsion(c).log_rho
    b = torsion_via_bases(c)
    diff = abs(a - b)
    rep.add("complex", "log_rho_hodge", a)
    rep.add("complex", "log_rho_bases", b)
    rep.add("complex", "difference", diff)
    rep.add("complex", "euler_characteristic", euler_characteristic(c))
    rep.gate("hodge vs bases (relative)", diff / max(1.0, abs(a)), tol)
    return rep


# --- Cheeger–Müller circle ------------------------------------------------------

DEFAULT_ALPHAS = [round(0.1 * k, 10) for k in range(1, 10)]


def cmd_cm_circle(args):
    alphas = DEFAULT_ALPHAS if args.alphas is None else [float(a) for a in args.alphas.split(",")]
    for a in alphas:
        if not 0.0 < a < 1.0:
            raise InputError(f"alpha {a!r} outside (0, 1); the endpoints carry a zero mode")
    tol = _tol(args, 1e-6)
    rep = ExperimentReport("cm-circle", {"alphas": alphas, "N": [1, 8]},
                           _env(args, gate_tol=tol, lerch_tol=1e-9))
    for a in alphas:
        case = f"alpha={fmt(a)}"
        analytic = zetadet.circle_analytic_torsion(a)
        rep.add(case, "analytic", analytic)
        for N in (1, 8):
            comb = torsion(morse.circle_complex(N, a, rank=2)).log_rho
            rep.add(case, f"combinatorial_N{N}", comb)
            rep.gate(f"{case} N={N} |analytic - combinatorial|", abs(analytic - comb), tol)
        lerch = max(zetadet.lerch_discrepancy(a), zetadet.lerch_discrepancy(1.0 - a))
        rep.add(case, "lerch_discrepancy", lerch)
        rep.gate(f"{case} Lerch cross-check", lerch, 1e-9)
    return rep


# --- Witten sweep -----------------------------------------------------------------

def _fit_rs(ts, la):
    M = np.column_stack([np.ones_like(ts), ts, -np.log(ts / math.pi)])
    if len(ts) < 3 or np.linalg.matrix_rank(M) < 3:
        return None
    coef, *_ = np.linalg.lstsq(M, la, rcond=None)
    return coef


def witten_sweep(c, w, ts, threshold, tol, rep):
    collisions = []
    la = []
    for t in ts:
        try:
            sp = witten.spectral_split(c, w, t, threshold)
            sp_neg_t = witten.spectral_split(c, w, -t, threshold)
            sp_neg_f = witten.spectral_split(c, w.negated(), t, threshold)
        except witten.SplitError as err:
            collisions.append((t, str(err)))
            continue
        st = witten.split_torsions(c, w, t, sp)
        a = witten.split_torsions(c, w, -t, sp_neg_t).log_rho_la
        b = witten.split_torsions(c, w.negated(), t, sp_neg_f).log_rho_la
        rep.add("sweep", "log_rho_sm", st.log_rho_sm, t)
        rep.add("sweep", "log_rho_la", st.log_rho_la, t)
        rep.add("sweep", "log_rho_total", st.log_rho_total, t)
        rep.add("sweep", "factorization_residual", st.residual, t)
        rep.add("sweep", "cluster_counts", sp.cluster_counts, t)
        rep.add("sweep", "gap_ratio", sp.global_gap_ratio, t)
        rep.add("sweep", "symmetry_difference", abs(a - b), t)
        rep.gate(f"t={fmt(t)} factorization", st.residual, tol)
        rep.gate(f"t={fmt(t)} symmetry rho_la(f,-t) = rho_la(-f,t)", abs(a - b), tol)
        la.append((t, st.log_rho_la))
    if collisions:
        lines = [f"t={fmt(t)}: {msg}; try t={fmt(t * (1 - 1e-3))} or t={fmt(t * (1 + 1e-3))}"
                 for t, msg in collisions]
        raise InputError("threshold collisions:\n  " + "\n  ".join(lines))
    if la:
        tt = np.array([p[0] for p in la])
        yy = np.array([p[1] for p in la])
        coef = _fit_rs(tt, yy) if np.all(tt > 0) else None
        if coef is None:
            rep.notes.append("log rho_la fit R + c1 t - c2 log(t/pi): degenerate design, not fitted")
        else:
            rep.add("fit", "R", coef[0])
            rep.add("fit", "c1", coef[1])
            rep.add("fit", "c2", coef[2])
            rep.notes.append("fit of log rho_la = R + c1 t - c2 log(t/pi) is reported, not gated")
        if w.critical_flags is not None:
            tr, chi = witten.morse_supertrace(w)
            rep.add("fit", "reference_c1_supertrace", tr)
            rep.add("fit", "reference_c2_half_chi_prime", 0.5 * chi)


def cmd_witten_sweep(args):
    c = load_complex(args.complex)
    w = load_weighting(args.weights)
    try:
        w.check(c)
    except ValueError as err:
        raise InputError(f"{args.weights}: {err}") from None
    if args.points < 1 or args.t_max < args.t_min:
        raise InputError("need points >= 1 and t-max >= t-min")
    ts = np.linspace(args.t_min, args.t_max, args.points)
    tol = _tol(args, 1e-9)
    rep = ExperimentReport("witten-sweep",
                           {"complex": args.complex, "weights": args.weights, "t_min": args.t_min,
                            "t_max": args.t_max, "points": args.points,
                            "threshold": args.threshold},
                           _env(args, gate_tol=tol))
    witten_sweep(c, w, ts, args.threshold, tol, rep)
    return rep


# --- aedel ----------------------------------------------------------------------

def cmd_aedel(args):
    cfg = parse_config(args.config)
    mode = cfg.get("mode", "random")
    qtol = float(cfg.get("quad_tol", 1e-10))
    tol = _tol(args, max(1e-8, 10 * qtol))
    ks = [int(k) for k in as_list(cfg.get("k", [1, 2, 3]))]
    ts = [float(t) for t in as_list(cfg.get("t", [2, 5, 10, 20]))]
    rep = ExperimentReport("aedel", dict(cfg), _env(args, gate_tol=tol, quad_tol=qtol))
    cases = []
    if mode == "random":
        rng = np.random.default_rng(args.seed)
        count = int(cfg.get("count", 1))
        lo, hi = int(cfg.get("dim_min", 5)), int(cfg.get("dim_max", 30))
        for k in ks:
            for t in ts:
                for r in range(count):
                    n = int(rng.integers(lo, hi + 1))
                    cases.append((f"k={k},t={fmt(t)},#{r},n={n}",
                                  aedecomp.random_spd_instance(rng, n), k, t))
    elif mode == "matrix":
        H = np.atleast_2d(np.array(as_list(cfg["diagonal"]), dtype=float))
        H = np.diag(H.ravel())
        cases = [(f"k={k},t={fmt(t)}", H, k, t) for k in ks for t in ts]
    elif mode == "family":
        fam = _family_from_config(cfg)
        cases = [(f"{fam.name},k={k},t={fmt(t)}", fam, k, t) for k in ks for t in ts]
    else:
        raise InputError(f"{args.config}: unknown mode {mode!r} (random, matrix, family)")
    for case, op, k, t in cases:
        r = aedecomp.aedel_decomposition(op, t, k, qtol)
        rep.add(case, "lhs_eigensum", r.lhs, t)
        rep.add(case, "rhs_quadrature", r.rhs, t)
        rep.add(case, "rhs_closed_form", r.rhs_closed, t)
        rep.add(case, "corank_m", r.m, t)
        rep.gate(f"{case} three-way residual", r.three_way, tol)
    return rep


# --- compare ----------------------------------------------------------------------

FAMILY_KEYS = ("preset", "N", "length", "k", "bump_amp", "bump_center", "bump_width",
               "f_offset", "level", "arc")


def _family_from_config(cfg, negate_f=False):
    if "preset" not in cfg or "N" not in cfg:
        raise InputError("family config needs 'preset' and 'N'")
    opts = {k: cfg[k] for k in ("bump_amp", "bump_center", "bump_width", "f_offset", "level", "arc")
            if k in cfg}
    fam = aedecomp.preset_family(str(cfg["preset"]), int(cfg["N"]),
                                 float(cfg.get("length", 2 * math.pi)), int(cfg.get("k", 1)), **opts)
    if negate_f:
        fam = aedecomp.ParametricOperatorFamily(fam.N, fam.length, -fam.B, fam.V, fam.k,
                                                None if fam.f is None else -fam.f,
                                                fam.name, fam.params)
    return fam


def cmd_compare(args):
    cfgA = parse_config(args.config_a)
    cfgB = parse_config(args.config_b)
    famA, famB = _family_from_config(cfgA), _family_from_config(cfgB)
    sA, sB = famA.critical_structure(), famB.critical_structure()
    if sA is None or sB is None:
        raise InputError("both families need f-values (a preset with a potential f)")
    if not morse.match_structures(sA, sB):
        raise InputError(f"critical point structures differ: {sA} vs {sB}; "
                         "comparison refused (the pair must share indices and critical values)")
    t_min = float(cfgA.get("t_min", 8.0))
    t_max = float(cfgA.get("t_max", 64.0))
    points = int(cfgA.get("points", 17))
    J = int(cfgA.get("J", 3))
    R = int(cfgA.get("remainder_powers", 2))
    thr = float(cfgA.get("threshold", 1.0))
    frac = _tol(args, 0.05)
    inputs = {f"A.{k}": v for k, v in cfgA.items()}
    inputs.update({f"B.{k}": v for k, v in cfgB.items()})
    rep = ExperimentReport("compare", inputs,
                           _env(args, free_term_frac=frac, residual_frac=0.02, J=J,
                                remainder_powers=R, normalization="lattice",
                                t_window=[t_min, t_max], points_per_sign=points))
    grid = aedecomp.default_t_grid(t_min, t_max, points)
    combo = 0.0
    scale = 0.0
    for label, neg in (("f", False), ("-f", True)):
        a = _family_from_config(cfgA, neg)
        b = _family_from_config(cfgB, neg)
        res = aedecomp.comparison_theorem_experiment(a, b, grid, J, R, threshold=thr,
                                                     free_frac=frac)
        for t, v in zip(res.t, res.values):
            rep.add(label, "log_det_difference", v, t)
        fit = res.fit
        for sgn in (1, -1):
            for j, (av, bv) in enumerate(zip(fit.a_coeffs[sgn], fit.b_coeffs[sgn])):
                rep.add(label, f"a{j}({sgn:+d})", av)
                rep.add(label, f"b{j}({sgn:+d})", bv)
            rep.add(label, f"corank_A({sgn:+d})", sorted(res.m_A[sgn]))
            rep.add(label, f"corank_B({sgn:+d})", sorted(res.m_B[sgn]))
        rep.add(label, "fit_residual", fit.residual)
        rep.add(label, "dominant", fit.dominant)
        rep.add(label, "free_term_sum", fit.free_term_sum)
        rep.gate(f"{label} fit residual / dominant term",
                 fit.residual / fit.dominant if fit.dominant else 0.0, 0.02)
        for nm, m in (("A", res.m_A), ("B", res.m_B)):
            rep.gate_true(f"{label} corank of {nm} constant on each half-line",
                          all(len(s) == 1 for s in m.values()))
        combo += fit.free_term_sum
        scale = max(scale, res.free_term_scale)
    rep.add("combined", "free_term_combination", combo)
    rep.add("combined", "scale", scale)
    rep.gate("free-term combination over (f, -f) relative to scale", abs(combo) / (2 * scale), frac)
    rep.notes.append("lattice normalization: log det' of h^2 H_t over eigenvalues above the threshold")
    return rep


# --- product ------------------------------------------------------------------------

def sphere_like():
    return CochainComplex([1, 0, 1], [np.zeros((0, 1)), np.zeros((1, 0))])


def torus_like():
    c = morse.circle_complex(3, 0.0, rank=1)
    return tensor_product(c, c)


def cmd_product(args):
    c = load_complex(args.file)
    D = sphere_like() if args.factor == "sphere-like" else torus_like()
    tol = _tol(args, 1e-9)
    rep = ExperimentReport("product", {"file": args.file, "factor": args.factor},
                           _env(args, gate_tol=tol))
    lc, lD = torsion(c).log_rho, torsion(D).log_rho
    xc, xD = euler_characteristic(c), euler_characteristic(D)
    lp = torsion(tensor_product(c, D)).log_rho
    pred = xD * lc + xc * lD
    for q, v in (("log_rho_c", lc), ("log_rho_D", lD), ("chi_c", xc), ("chi_D", xD),
                 ("log_rho_product", lp), ("predicted", pred)):
        rep.add("product", q, v)
    rep.gate("product law |log rho(c x D) - chi(D) log rho(c) - chi(c) log rho(D)|",
             abs(lp - pred), tol)
    if args.factor == "sphere-like":
        rep.gate("sphere-like factor doubles log rho(c)", abs(lp - 2 * lc), tol)
    else:
        rep.gate("torus-like factor leaves only chi(c) log rho(D)", abs(lp - xc * lD), tol)
    return rep


# --- generators -------------------------------------------------------------------

def cmd_gen_circle(args):
    fn = {"cos": np.cos, "sin": np.sin, "const": lambda x: 0.0 * x}[args.fn]
    c, w = witten.witten_circle(args.N, args.alpha, args.rank, fn)
    dump_json(complex_to_dict(c), args.prefix + ".complex.json")
    dump_json(weighting_to_dict(w), args.prefix + ".weights.json")
    print(f"wrote {args.prefix}.complex.json and {args.prefix}.weights.json")
    return None


def cmd_gen_random(args):
    rng = np.random.default_rng(args.seed)
    c = random_complex(rng, acyclic=args.acyclic)
    dump_json(complex_to_dict(c), args.path)
    print(f"wrote {args.path}")
    return None


# --- CLI --------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="torsionlab", description=__doc__.splitlines()[0])
    p.add_argument("--tol", type=float, default=None, help="override the command's gate tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="directory for report.md and data.csv")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("torsion", help="torsion of a complex by two algorithms")
    s.add_argument("file")
    s.set_defaults(func=cmd_torsion)

    s = sub.add_parser("cm-circle", help="zeta vs combinatorial torsion of the twisted circle")
    s.add_argument("--alphas", default=None, help="comma-separated holonomies in (0,1)")
    s.set_defaults(func=cmd_cm_circle)

    s = sub.add_parser("witten-sweep", help="split torsions along a t window")
    s.add_argument("complex")
    s.add_argument("weights")
    s.add_argument("--t-min", type=float, default=20.0)
    s.add_argument("--t-max", type=float, default=60.0)
    s.add_argument("--points", type=int, default=5)
    s.add_argument("--threshold", type=float, default=1.0)
    s.set_defaults(func=cmd_witten_sweep)

    s = sub.add_parser("aedel", help="determinant decomposition over a config grid")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_aedel)

    s = sub.add_parser("compare", help="free-term cancellation for a family pair")
    s.add_argument("config_a")
    s.add_argument("config_b")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("product", help="product formula against a model factor")
    s.add_argument("file")
    s.add_argument("--factor", choices=["sphere-like", "torus-like"], required=True)
    s.set_defaults(func=cmd_product)

    s = sub.add_parser("gen-circle", help="write a Witten circle complex and weighting")
    s.add_argument("prefix")
    s.add_argument("--N", type=int, default=256)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--rank", type=int, default=1, choices=[1, 2])
    s.add_argument("--fn", default="cos", choices=["cos", "sin", "const"])
    s.set_defaults(func=cmd_gen_circle)

    s = sub.add_parser("gen-random", help="write a seeded random complex")
    s.add_argument("path")
    s.add_argument("--acyclic", action="store_true")
    s.set_defaults(func=cmd_gen_random)
    return p


INPUT_ERRORS = (InputError, ComplexError, morse.MorseError, aedecomp.FamilyError,
                zetadet.ZetaError, witten.SplitError, KeyError)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rep = args.func(args)
    except INPUT_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    if rep is None:
        return EXIT_PASS
    if args.out:
        rep.write(args.out)
    print(rep.markdown())
    return EXIT_PASS if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
