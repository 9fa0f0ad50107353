"""Command-line front end.

Subcommands: resonances, frame, build, norms, pendulum-bench,
destroy-check, reproduce-scaling.  Every run writes its canonical
config, a manifest (config hash, versions, seed, wall time) and CSV or
structured-text artifacts with 17-significant-digit numerics, so a
repeated run with the same config and seed reproduces artifacts byte
for byte.

Exit codes: 0 success, 2 domain/quality errors, 3 inconclusive
destruction verdict, 64 usage errors.
"""

import argparse
import hashlib
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import TorusbreakError
from .diophantine import FrequencyVector, preset, find_resonances, classify
from .frames import orthogonal_partner, complete_frame, symplectic_lift, \
    pushforward
from .perturbation import plan_parameters, build_with_escalation, \
    assemble_P, norm_scaling_report
from .pendulum import pendulum_bvp, action_profile
from .destruction import destruction_test, integrable_twin

_FMT = "%.17g"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return _FMT % v
    return str(v)


class RunConfig:
    """Flat, canonically serialized key/value record of one run."""

    def __init__(self, command, values):
        self.command = command
        self.values = dict(values)

    def to_text(self):
        lines = [f"command = {self.command}"]
        for key in sorted(self.values):
            lines.append(f"{key} = {_fmt(self.values[key])}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text):
        vals = {}
        command = None
        for ln in text.splitlines():
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            key, _, val = ln.partition("=")
            key, val = key.strip(), val.strip()
            if key == "command":
                command = val
            else:
                vals[key] = val
        return RunConfig(command, vals)

    @property
    def hash(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def _parse_omega(text, d, precision):
    if "," in text:
        entries = tuple(float(v) for v in text.split(","))
        return FrequencyVector(entries, precision)
    return preset(text, d=d, precision=precision)


def _parse_ints(text):
    return tuple(int(v) for v in text.replace("(", "").replace(")", "")
                 .split(","))


def _out_dir(args):
    out = args.out or os.environ.get("TORUSBREAK_OUTPUT_DIR", "torusbreak-out")
    os.makedirs(out, exist_ok=True)
    return out


def _write_table(path, header, rows, config_hash, fmt):
    if fmt == "structured-text":
        with open(path.replace(".csv", ".txt"), "w") as fh:
            fh.write(f"# config_hash={config_hash}\n")
            for row in rows:
                for key, val in zip(header, row):
                    fh.write(f"{key} = {_fmt(val)}\n")
                fh.write("\n")
        return
    with open(path, "w") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_manifest(out, config, t_wall, extra=None):
    import scipy
    import mpmath
    with open(os.path.join(out, "manifest.txt"), "w") as fh:
        fh.write(f"config_hash = {config.hash}\n")
        fh.write(f"command = {config.command}\n")
        fh.write(f"torusbreak = {__version__}\n")
        fh.write(f"python = {sys.version.split()[0]}\n")
        fh.write(f"numpy = {np.__version__}\n")
        fh.write(f"scipy = {scipy.__version__}\n")
        fh.write(f"mpmath = {mpmath.__version__}\n")
        fh.write(f"threads = {os.environ.get('TORUSBREAK_THREADS', '1')}\n")
        fh.write(f"wall_time_s = {t_wall:.3f}\n")
        for key, val in (extra or {}).items():
            fh.write(f"{key} = {_fmt(val)}\n")
    with open(os.path.join(out, "config.txt"), "w") as fh:
        fh.write(config.to_text())


def _config_from_args(args, spec_keys):
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = RunConfig.from_text(fh.read())
        for key, val in cfg.values.items():
            attr = key.replace("-", "_")
            if hasattr(args, attr):
                cur = getattr(args, attr)
                if isinstance(cur, bool):
                    setattr(args, attr, val.lower() == "true")
                elif isinstance(cur, int):
                    setattr(args, attr, int(val))
                elif isinstance(cur, float):
                    setattr(args, attr, float(val))
                else:
                    setattr(args, attr, val)
    values = {}
    for key in spec_keys:
        val = getattr(args, key.replace("-", "_"))
        values[key] = "" if val is None else val
    return RunConfig(args.command, values)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_resonances(args):
    cfg = _config_from_args(
        args, ["omega", "kmax", "C", "d", "precision", "seed", "format"])
    t0 = time.time()
    om = _parse_omega(args.omega, args.d, args.precision)
    hits = find_resonances(om, args.kmax, C=args.C)
    out = _out_dir(args)
    header = [f"k{i+1}" for i in range(om.d)] + ["value", "norm", "tau_eff"]
    rows = [list(h.k) + [float(h.value), h.norm, h.tau_eff] for h in hits]
    _write_table(os.path.join(out, "resonances.csv"), header, rows,
                 cfg.hash, args.format)
    prof = classify(om, max(2, args.kmax))
    _write_table(os.path.join(out, "classification.csv"),
                 ["beta_est", "liouville_flag", "resonant", "scan_bound"],
                 [[prof.beta_est, prof.liouville_flag, prof.resonant,
                   prof.scan_bound]], cfg.hash, args.format)
    _write_manifest(out, cfg, time.time() - t0,
                    {"hits": len(hits), "beta_est": prof.beta_est})
    print(f"{len(hits)} resonances written to {out}")
    return 0


def _cmd_frame(args):
    cfg = _config_from_args(
        args, ["omega", "k", "radius", "tau", "d", "precision", "seed",
               "format"])
    t0 = time.time()
    k = _parse_ints(args.k)
    om = _parse_omega(args.omega, len(k), args.precision)
    kp = orthogonal_partner(k, om, search_radius=args.radius)
    frame = complete_frame(k, kp)
    lift = symplectic_lift(frame)
    push = pushforward(frame, om, tau=args.tau)
    out = _out_dir(args)
    with open(os.path.join(out, "frame.txt"), "w") as fh:
        fh.write(f"# config_hash={cfg.hash}\n")
        fh.write(frame.to_record() + "\n")
    _write_table(os.path.join(out, "pushforward.csv"),
                 [f"omega{i+1}" for i in range(frame.d)]
                 + ["bound1", "ratio2", "in_regime"],
                 [[float(v) for v in push.omega_new.entries]
                  + [push.bound1, push.ratio2, push.in_regime]],
                 cfg.hash, args.format)
    _write_manifest(out, cfg, time.time() - t0,
                    {"det": frame.det,
                     "symplectic_exact": lift.symplectic_check()})
    print(f"frame det={frame.det} written to {out}")
    return 0


def _build_spec(args):
    k = _parse_ints(args.k)
    om = _parse_omega(args.omega, len(k), args.precision)
    kp = orthogonal_partner(k, om, search_radius=args.radius)
    frame = complete_frame(k, kp)
    push = pushforward(frame, om, tau=args.tau)
    params = plan_parameters(frame.d, args.tau, args.eps_exp, args.eps_size,
                             push.omega_new, frame.k_norm, alpha=args.alpha)
    if args.auto_degree:
        params, spec = build_with_escalation(params, frame)
    else:
        spec = assemble_P(params, frame)
    return om, frame, push, spec


_BUILD_KEYS = ["omega", "k", "radius", "tau", "eps_exp", "eps_size",
               "alpha", "auto_degree", "precision", "seed", "format"]


def _cmd_build(args):
    cfg = _config_from_args(args, _BUILD_KEYS)
    t0 = time.time()
    om, frame, push, spec = _build_spec(args)
    out = _out_dir(args)
    with open(os.path.join(out, "perturbation.txt"), "w") as fh:
        fh.write(f"# config_hash={cfg.hash}\n")
        fh.write(spec.to_text())
    p = spec.params
    _write_table(os.path.join(out, "params.csv"),
                 ["a", "s0", "kappa", "k_norm", "omega1", "R_n",
                  "M_planned", "M", "N_measured", "N_budget",
                  "mu_measured", "mu_target", "mu_norm_law"],
                 [[p.a, p.s0, p.kappa, p.k_norm, p.omega1, p.R_n,
                   p.M_planned, p.M, p.N_measured, p.N_budget,
                   p.mu_measured, p.mu_target, p.mu_norm_law]],
                 cfg.hash, args.format)
    _write_manifest(out, cfg, time.time() - t0,
                    {"M": p.M, "N": p.N_measured})
    print(f"perturbation M={p.M} N={p.N_measured:.1f} written to {out}")
    return 0


def _cmd_norms(args):
    cfg = _config_from_args(args, _BUILD_KEYS + ["r_list"])
    t0 = time.time()
    om, frame, push, spec = _build_spec(args)
    rs = [float(v) for v in args.r_list.split(",")]
    out = _out_dir(args)
    rows = []
    for r in rs:
        rep = spec.norm(r)
        rows.append([r, rep.value, rep.grid_size, rep.method])
    _write_table(os.path.join(out, "norms.csv"),
                 ["r", "value", "grid", "method"], rows, cfg.hash,
                 args.format)
    _write_manifest(out, cfg, time.time() - t0)
    print(f"norms for r={rs} written to {out}")
    return 0


def _cmd_pendulum_bench(args):
    cfg = _config_from_args(
        args, ["g", "T_list", "profile_T", "profile_points", "seed",
               "format"])
    t0 = time.time()
    out = _out_dir(args)
    rows = []
    for T in [float(v) for v in args.T_list.split(",")]:
        path = pendulum_bvp(args.g, 0.0, 2 * math.pi, 0.0, T)
        sep = 8.0 * math.sqrt(args.g)
        rows.append([T, path.action, path.action_quadrature, path.energy,
                     abs(path.action_quadrature - sep) / sep])
    _write_table(os.path.join(out, "pendulum.csv"),
                 ["T", "action_simpson", "action_quadrature", "energy",
                  "separatrix_rel_gap"], rows, cfg.hash, args.format)
    Tp = args.profile_T
    n = args.profile_points
    grid = np.linspace(0.0, Tp, n + 2)[1:-1]
    prof = action_profile(args.g, 0.0, Tp, grid)
    _write_table(os.path.join(out, "action_profile.csv"),
                 ["s", "two_leg_action"],
                 [[s, a] for s, a in zip(prof.s_values, prof.actions)],
                 cfg.hash, args.format)
    _write_manifest(out, cfg, time.time() - t0,
                    {"unimodal": prof.unimodal,
                     "argmin_index": prof.argmin_index})
    print(f"pendulum bench written to {out}")
    return 0


def _cmd_destroy_check(args):
    cfg = _config_from_args(
        args, _BUILD_KEYS + ["trials", "K", "integrable", "save_paths",
                             "spec_file"])
    t0 = time.time()
    if args.spec_file:
        from .perturbation import PerturbationSpec
        with open(args.spec_file) as fh:
            spec = PerturbationSpec.from_text(fh.read())
        om = _parse_omega(args.omega, spec.frame.d, args.precision)
        push = pushforward(spec.frame, om, tau=args.tau)
    else:
        om, frame, push, spec = _build_spec(args)
    model = integrable_twin(spec) if args.integrable else None
    report = destruction_test(spec, push.omega_new, trials=args.trials,
                              K=args.K, seed=args.seed, model=model)
    out = _out_dir(args)
    rows = [[i, r.q2_start, r.horizon, r.entered, r.distance_to_box,
             r.action_free, r.action_through, r.action_detour,
             r.action_gap, r.speed_deviation]
            for i, r in enumerate(report.per_trial)]
    _write_table(os.path.join(out, "destruction.csv"),
                 ["trial", "q2_start", "horizon", "entered", "distance",
                  "action_free", "action_through", "action_detour",
                  "action_gap", "speed_deviation"],
                 rows, cfg.hash, args.format)
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write(f"# config_hash={cfg.hash}\n")
        fh.write(f"verdict = {report.verdict}\n")
        fh.write(f"in_regime = {_fmt(report.in_regime)}\n")
        fh.write(f"mechanism_resolvable = "
                 f"{_fmt(report.mechanism_resolvable)}\n")
        fh.write(f"box = {report.box}\n")
        fh.write(f"min_distance_to_S0 = {_fmt(report.min_distance_to_S0)}\n")
        fh.write(f"action_gap = {_fmt(report.action_gap)}\n")
        fh.write(f"speed_deviation = {_fmt(report.speed_deviation)}\n")
        fh.write(f"speed_bound = {_fmt(report.speed_bound)}\n")
    _write_paths(out, spec, push, args, cfg)
    _write_manifest(out, cfg, time.time() - t0,
                    {"verdict": report.verdict})
    print(f"destruction verdict: {report.verdict} "
          f"(gap {report.action_gap:.3e}) written to {out}")
    return 3 if report.verdict == "inconclusive" else 0


def _write_paths(out, spec, push, args, cfg):
    from .minimize import lagrangian_from
    from .destruction import make_trials, _minimize_warm, integrable_twin \
        as twin
    if args.save_paths <= 0:
        return
    model = twin(spec) if args.integrable else lagrangian_from(spec)
    om2 = float(push.omega_new.entries[1])
    trials = make_trials(spec.params, om2, max(args.trials, 1), args.seed)
    d = spec.frame.d
    for i, (q2s, q2e, horizon, m_star, delta) in \
            enumerate(trials[:args.save_paths]):
        start = np.zeros(d)
        end = np.zeros(d)
        start[1], end[0], end[1] = q2s, 2 * math.pi, q2e
        path = _minimize_warm(model, start, end, 0.0, horizon, args.K)
        vels = path.midpoint_velocities()
        h = np.diff(path.times)
        mids = 0.5 * (path.points[1:] + path.points[:-1])
        lag = model.lagrangian(mids, vels)
        act = np.concatenate([[0.0], np.cumsum(h * lag)])
        header = ["t"] + [f"q{j+1}" for j in range(d)] \
            + [f"qdot{j+1}" for j in range(d)] + ["action_so_far"]
        rows = []
        for j, t in enumerate(path.times):
            v = vels[min(j, len(vels) - 1)]
            rows.append([t] + list(path.points[j]) + list(v) + [act[j]])
        _write_table(os.path.join(out, f"path_{i:03d}.csv"), header, rows,
                     cfg.hash, args.format)


def _cmd_reproduce_scaling(args):
    cfg = _config_from_args(
        args, ["omega", "k_seq", "r_list", "tau", "eps_exp", "eps_size",
               "alpha", "precision", "seed", "format"])
    t0 = time.time()
    seq = [_parse_ints(part) for part in args.k_seq.split(";")]
    om = _parse_omega(args.omega, len(seq[0]), args.precision)
    rs = [float(v) for v in args.r_list.split(",")]
    rep = norm_scaling_report(om, args.tau, args.eps_exp, rs, seq,
                              eps_size=args.eps_size, alpha=args.alpha)
    out = _out_dir(args)
    rows = []
    for row in rep.rows:
        rows.append([str(row.k), row.k_norm, row.omega1, row.M_planned,
                     row.M_used, row.N_measured, row.N_budget]
                    + [row.norms[r] for r in rs])
    _write_table(os.path.join(out, "scaling.csv"),
                 ["k", "k_norm", "omega1", "M_planned", "M_used",
                  "N_measured", "N_budget"] + [f"C{r}" for r in rs],
                 rows, cfg.hash, args.format)
    _write_table(os.path.join(out, "slopes.csv"),
                 ["r", "slope", "predicted", "rel_deviation",
                  "degree_slope", "degree_predicted"],
                 [[r, rep.slopes[r], rep.predicted[r], rep.deviation[r],
                   rep.degree_fit[r][0], rep.degree_fit[r][1]]
                  for r in rs], cfg.hash, args.format)
    _write_manifest(out, cfg, time.time() - t0)
    print(f"scaling report over {len(seq)} vectors written to {out}")
    return 0


# ---------------------------------------------------------------------------

def _add_common(sp):
    sp.add_argument("--out", default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--precision", type=int, default=128)
    sp.add_argument("--format", choices=["csv", "structured-text"],
                    default="csv")
    sp.add_argument("--config", default=None)


def _add_build_args(sp):
    sp.add_argument("--omega", default="golden")
    sp.add_argument("--k", default="-3,5")
    sp.add_argument("--radius", type=float, default=2.0)
    sp.add_argument("--tau", type=float, default=0.0)
    sp.add_argument("--eps-exp", dest="eps_exp", type=float, default=0.1)
    sp.add_argument("--eps-size", dest="eps_size", type=float, default=1e-3)
    sp.add_argument("--alpha", type=float, default=2.0)
    sp.add_argument("--auto-degree", dest="auto_degree",
                    action="store_true", default=True)
    sp.add_argument("--no-auto-degree", dest="auto_degree",
                    action="store_false")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="torusbreak",
        description="Trigonometric perturbations of integrable Hamiltonians"
                    " and finite-scale torus-destruction certification")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("resonances", help="Dirichlet resonance scan")
    sp.add_argument("--omega", default="golden")
    sp.add_argument("--kmax", type=int, default=100)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--d", type=int, default=2)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_resonances)

    sp = sub.add_parser("frame", help="orthogonal frame and pushforward")
    sp.add_argument("--omega", default="golden")
    sp.add_argument("--k", required=True)
    sp.add_argument("--radius", type=float, default=2.0)
    sp.add_argument("--tau", type=float, default=0.0)
    sp.add_argument("--d", type=int, default=2)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_frame)

    sp = sub.add_parser("build", help="assemble the perturbation")
    _add_build_args(sp)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_build)

    sp = sub.add_parser("norms", help="Holder norms of the perturbation")
    _add_build_args(sp)
    sp.add_argument("--r-list", dest="r_list", default="0,2")
    _add_common(sp)
    sp.set_defaults(fn=_cmd_norms)

    sp = sub.add_parser("pendulum-bench", help="pendulum action suite")
    sp.add_argument("--g", type=float, default=1.0)
    sp.add_argument("--T-list", dest="T_list", default="10,20,40")
    sp.add_argument("--profile-T", dest="profile_T", type=float,
                    default=20.0)
    sp.add_argument("--profile-points", dest="profile_points", type=int,
                    default=41)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_pendulum_bench)

    sp = sub.add_parser("destroy-check", help="S0 avoidance criterion")
    _add_build_args(sp)
    sp.add_argument("--trials", type=int, default=32)
    sp.add_argument("--K", type=int, default=512)
    sp.add_argument("--integrable", action="store_true", default=False)
    sp.add_argument("--save-paths", dest="save_paths", type=int, default=1)
    sp.add_argument("--spec-file", dest="spec_file", default=None,
                    help="consume a previously written perturbation.txt")
    _add_common(sp)
    sp.set_defaults(fn=_cmd_destroy_check)

    sp = sub.add_parser("reproduce-scaling", help="norm scaling regression")
    sp.add_argument("--omega", default="golden")
    sp.add_argument("--k-seq", dest="k_seq",
                    default="-3,5;5,-8;-8,13;13,-21")
    sp.add_argument("--r-list", dest="r_list", default="0,2")
    sp.add_argument("--tau", type=float, default=0.0)
    sp.add_argument("--eps-exp", dest="eps_exp", type=float, default=0.1)
    sp.add_argument("--eps-size", dest="eps_size", type=float, default=1e-3)
    sp.add_argument("--alpha", type=float, default=2.0)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_reproduce_scaling)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 64
    try:
        return args.fn(args)
    except TorusbreakError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
