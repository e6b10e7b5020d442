"""Command-line experiment driver.

Every run resolves a complete config (file, then flags, then per-subcommand
defaults), writes it into the output header, and writes data rows only.
The worker count and output path are not part of the header, so a run
repeated with another ``--threads`` value gives a byte-identical file.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .avalanche import ap_matrix_form, check_avalanche, orbit_points, random_admissible_chain, random_sl2_instance
from .dynamics import (
    Cocycle,
    constant_diag,
    continuity_experiment,
    drift_extrapolate,
    f2_srw,
    finite_scale_drift,
    fit_ld_rate,
    h2_schottky_srw,
    hitting_point,
    ld_tail_grid,
)
from .errors import ConfigError, DegenerateInputError, PeriodicChainError
from .geometry import GeometryContext, default_net
from .markov import stationary_measure, strong_mixing_diagnostic
from .models import FreeWord, H2Model, H2Point, SL2Isometry, TreeModel, make_model
from .rng import substream
from .selftest import run_all
from .serialization import read_kernel_file, to_cocycle
from .transfer import BoundaryGrid, ObservedSystem, avg_holder_const, irreducibility_heuristic

SUBCOMMANDS = ("ap-check", "ap-sl2", "drift", "ldt", "hitting", "continuity", "markov", "geom-selftest")
SCHEMA_VERSION = 1

KEYS = {"model", "k", "b", "cocycle", "n", "samples", "eps", "seed", "net_depth", "format", "alpha", "scales", "chain"}

DEFAULTS = {
    "ap-check": {"samples": 1000},
    "ap-sl2": {"samples": 1000},
    "drift": {"n": [250, 500, 1000, 2000], "samples": 10000},
    "ldt": {"n": [100, 200, 400, 800], "eps": [0.1], "samples": 10000},
    "hitting": {"n": [50, 100, 200, 400], "samples": 16},
    "continuity": {"n": [50], "samples": 1000, "scales": [1e-1, 1e-2, 1e-3, 1e-4]},
    "markov": {"n": [1, 2, 3], "samples": 2000, "alpha": 0.25},
    "geom-selftest": {"samples": 1000},
}


# ---------------------------------------------------------------------------
# config


def _parse_config_text(text):
    if not text.strip():
        return {}
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        obj = None
    if isinstance(obj, dict):
        if isinstance(obj.get("header"), dict) and "config" in obj["header"]:
            return dict(obj["header"]["config"])
        return obj
    for line in text.splitlines():
        if line.startswith("# config:"):
            try:
                return json.loads(line[len("# config:") :])
            except json.JSONDecodeError as e:
                raise ConfigError(f"unreadable config header: {e}") from None
    raise ConfigError("config file is neither JSON nor a hyperdrift output with a config header")


def _load_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return _parse_config_text(fh.read())
    except OSError as e:
        raise ConfigError(f"cannot read config file {path!r}: {e.strerror}") from None


def _int_list(v, key):
    if isinstance(v, str):
        v = [x for x in v.replace(",", " ").split()]
    if isinstance(v, (int, float)):
        v = [v]
    try:
        out = [int(x) for x in v]
    except (TypeError, ValueError):
        raise ConfigError(f"field {key!r} must be a list of integers") from None
    if not out or any(x < 1 for x in out):
        raise ConfigError(f"field {key!r} must hold positive integers")
    return out


def _float_list(v, key):
    if isinstance(v, str):
        v = v.replace(",", " ").split()
    if isinstance(v, (int, float)):
        v = [v]
    try:
        out = [float(x) for x in v]
    except (TypeError, ValueError):
        raise ConfigError(f"field {key!r} must be a list of numbers") from None
    if not out:
        raise ConfigError(f"field {key!r} is empty")
    return out


def resolve_config(sub, raw, env=None):
    """Validate ``raw`` and fill defaults; returns the config written into headers."""
    env = os.environ if env is None else env
    unknown = sorted(set(raw) - KEYS)
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
    cfg = {k: v for k, v in raw.items() if v is not None}
    if "model" not in cfg:
        raise ConfigError("missing required field 'model'")
    model = cfg["model"]
    if model not in ("h2", "tree"):
        raise ConfigError(f"field 'model' must be 'h2' or 'tree', got {model!r}")
    if "seed" not in cfg:
        if env.get("HYPERDRIFT_SEED", "").strip():
            cfg["seed"] = env["HYPERDRIFT_SEED"].strip()
        else:
            raise ConfigError("missing required field 'seed' (flag --seed or HYPERDRIFT_SEED)")
    try:
        cfg["seed"] = int(cfg["seed"])
    except (TypeError, ValueError):
        raise ConfigError(f"field 'seed' must be an integer, got {cfg['seed']!r}") from None
    if not 0 <= cfg["seed"] < 2**64:
        raise ConfigError("field 'seed' must lie in [0, 2^64)")
    if model == "h2":
        if "b" in cfg and abs(float(cfg["b"]) - math.e) > 1e-12:
            raise ConfigError(f"model h2 requires b = e, got b = {cfg['b']!r}")
        cfg["b"] = math.e
        cfg.pop("k", None)
    else:
        cfg["k"] = int(cfg.get("k", 2))
        if cfg["k"] < 1:
            raise ConfigError("field 'k' must be at least 1")
        cfg["b"] = float(cfg.get("b", 2.0))
        if not cfg["b"] > 1:
            raise ConfigError("field 'b' must exceed 1")
    for key, val in DEFAULTS[sub].items():
        cfg.setdefault(key, val)
    cfg.setdefault("cocycle", "f2-srw" if model == "tree" else "schottky")
    cfg.setdefault("net_depth", 4 if model == "tree" else 32)
    cfg.setdefault("format", "csv")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"field 'format' must be csv or json, got {cfg['format']!r}")
    if "n" in cfg:
        cfg["n"] = _int_list(cfg["n"], "n")
    for key in ("eps", "scales"):
        if key in cfg:
            cfg[key] = _float_list(cfg[key], key)
    if "eps" in cfg and any(e <= 0 for e in cfg["eps"]):
        raise ConfigError("field 'eps' must hold positive numbers")
    try:
        cfg["samples"] = int(cfg["samples"])
        cfg["net_depth"] = int(cfg["net_depth"])
        if "alpha" in cfg:
            cfg["alpha"] = float(cfg["alpha"])
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad numeric field: {e}") from None
    if cfg["samples"] < 1:
        raise ConfigError("field 'samples' must be positive")
    if cfg["net_depth"] < 1:
        raise ConfigError("field 'net_depth' must be positive")
    if sub == "ap-sl2" and model != "h2":
        raise ConfigError("ap-sl2 works in the h2 model")
    return cfg


def _model(cfg):
    return make_model(cfg["model"], k=cfg.get("k", 2), b=cfg["b"])


def build_cocycle(cfg):
    spec = str(cfg["cocycle"])
    model = _model(cfg)
    name, _, arg = spec.partition(":")
    h2 = isinstance(model, H2Model)
    try:
        if spec == "f2-srw":
            if h2:
                raise ConfigError("cocycle f2-srw lives on the tree model")
            return f2_srw(model.k, model.b)
        if spec == "identity":
            return Cocycle.constant(model, model.identity(), "identity")
        if name == "const" and arg:
            g = SL2Isometry.parse(arg.replace(",", " ")) if h2 else FreeWord.parse(arg, model.k)
            return Cocycle.constant(model, g, spec)
        if name == "diag":
            if not h2:
                raise ConfigError("cocycle diag lives on the h2 model")
            return constant_diag(float(arg)) if arg else constant_diag()
        if name == "schottky":
            if not h2:
                raise ConfigError("cocycle schottky lives on the h2 model")
            return h2_schottky_srw(float(arg)) if arg else h2_schottky_srw()
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"bad cocycle spec {spec!r}: {e}") from None
    if not os.path.isfile(spec):
        raise ConfigError(f"cocycle {spec!r} is neither a preset nor an existing kernel file")
    try:
        kf = read_kernel_file(spec)
    except ValueError as e:
        raise ConfigError(f"bad kernel file {spec!r}: {e}") from None
    if kf.model_name != cfg["model"] or (kf.k and kf.k != cfg.get("k")):
        raise ConfigError(f"kernel file {spec!r} is for model {kf.model_name} (k={kf.k}), config says {cfg['model']}")
    return to_cocycle(kf, b=cfg["b"], name=os.path.basename(spec))


# ---------------------------------------------------------------------------
# subcommands; each returns (columns, rows)

AP_COLUMNS = [
    "index", "n", "rho", "sigma", "min_G_slack", "min_A_slack", "P_slack", "satisfied",
    "conclusion1_residual", "conclusion2_slack", "conclusion3_residual",
]


def _ap_row(i, rep):
    f = rep.fields()
    return [i] + [f[c] for c in AP_COLUMNS[1:]]


def _parse_point(model, line):
    if isinstance(model, TreeModel):
        return FreeWord.parse(line, model.k)
    vals = line.split()
    if len(vals) != 2:
        raise ConfigError(f"H² point needs 're im', got {line!r}")
    return H2Point(float(vals[0]), float(vals[1]))


def read_chain_file(path, model):
    """First line ``rho sigma``, then one point per line."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as e:
        raise ConfigError(f"cannot read chain file {path!r}: {e.strerror}") from None
    if len(lines) < 4:
        raise ConfigError("chain file needs 'rho sigma' and at least 3 points")
    try:
        rho, sigma = (float(x) for x in lines[0].split())
        pts = [_parse_point(model, ln) for ln in lines[1:]]
    except ValueError as e:
        raise ConfigError(f"bad chain file {path!r}: {e}") from None
    return pts, rho, sigma


def cmd_ap_check(cfg, threads):
    model = _model(cfg)
    ctx = GeometryContext(model)
    if "chain" in cfg:
        pts, rho, sigma = read_chain_file(cfg["chain"], model)
        return AP_COLUMNS, [_ap_row(0, check_avalanche(ctx, pts, rho, sigma))]
    rows = []
    for i in range(cfg["samples"]):
        rng = substream(cfg["seed"], i)
        pts, rho, sigma = random_admissible_chain(model, rng, int(rng.integers(3, 31)))
        rows.append(_ap_row(i, check_avalanche(ctx, pts, rho, sigma)))
    return AP_COLUMNS, rows


# keeps tight hypotheses off their equality case, where the two routes may round apart
TIGHT_MARGIN = 1e-6


def tight_mu_nu(mats):
    """``mu`` and ``nu`` just inside the largest values for which the matrix hypotheses hold."""
    norms = [np.linalg.norm(g, 2) for g in mats]
    mu = min(x * x for x in norms)
    nu = min(np.linalg.norm(a @ b, 2) / (na * nb) for a, b, na, nb in zip(mats, mats[1:], norms, norms[1:]))
    shrink = math.exp(-TIGHT_MARGIN)
    return float(mu * shrink), float(min(nu, 1.0) * shrink)


def cmd_ap_sl2(cfg, threads):
    ctx = GeometryContext(H2Model())
    cols = [
        "index", "n", "rho", "sigma", "satisfied", "conclusion1_residual", "conclusion2_slack",
        "conclusion3_residual", "lognorm_residual", "orbit_agreement", "norm_dictionary_gap",
    ]
    rows = []
    for i in range(cfg["samples"]):
        rng = substream(cfg["seed"], i)
        mats = random_sl2_instance(rng)
        mu, nu = tight_mu_nu(mats)
        mrep = ap_matrix_form(mats, mu, nu)
        orep = check_avalanche(ctx, orbit_points(mats), mrep.rho, mrep.sigma)
        diffs = [abs(a - b) for a, b in zip(_report_values(mrep), _report_values(orep))]
        x0 = H2Point(0.0, 1.0)
        dict_gap = max(
            abs(ctx.model.distance(ctx.model.act(SL2Isometry(*g.ravel()), x0), x0) - 2 * math.log(np.linalg.norm(g, 2)))
            for g in mats
        )
        f = mrep.fields()
        rows.append([
            i, len(mats), mrep.rho, mrep.sigma, mrep.satisfied, f["conclusion1_residual"], f["conclusion2_slack"],
            f["conclusion3_residual"], mrep.lognorm_residual, max(diffs), dict_gap,
        ])
    return cols, rows


def _report_values(r):
    v = list(r.hypothesis_G_slacks) + list(r.hypothesis_A_slacks) + [r.hypothesis_P_slack]
    if r.satisfied:
        v += [r.conclusion1_residual, r.conclusion2_slack, r.conclusion3_residual]
    return v


def cmd_drift(cfg, threads):
    c = build_cocycle(cfg)
    cols = ["kind", "n", "samples", "mean", "std_error", "K"]
    ns = cfg["n"]
    if len(ns) >= 3:
        fit = drift_extrapolate(c, ns, cfg["samples"], cfg["seed"], threads=threads)
        rows = [["ell_n", g.n, g.samples, g.mean, g.std_error, None] for g in fit.grid]
        rows.append(["ell", None, cfg["samples"], fit.ell, fit.ell_se, fit.K])
        return cols, rows
    rows = []
    for n in ns:
        est = finite_scale_drift(c, n, cfg["samples"], cfg["seed"], threads=threads)
        rows.append(["ell_n", n, est.samples, est.mean, est.std_error, None])
    return cols, rows


def cmd_ldt(cfg, threads):
    c = build_cocycle(cfg)
    reps = ld_tail_grid(c, cfg["n"], cfg["eps"], cfg["samples"], cfg["seed"], threads=threads)
    fitted = {}
    for eps in cfg["eps"]:
        try:
            fitted[eps] = fit_ld_rate([r for r in reps if r.epsilon == eps], c.b)[0]
        except DegenerateInputError:
            fitted[eps] = None
    cols = ["n", "epsilon", "samples", "center", "tail_count", "tail_prob", "rate", "std_error", "fitted_rate"]
    rows = [
        [r.n, r.epsilon, r.samples, r.center, r.tail_count, r.tail_prob, r.rate, r.std_error, fitted[r.epsilon]]
        for r in reps
    ]
    return cols, rows


def cmd_hitting(cfg, threads):
    c = build_cocycle(cfg)
    cols = ["n", "index", "boundary_point", "gromov_half", "gromov_n", "cauchy_gap"]
    rows = []
    for n in cfg["n"]:
        for i in range(cfg["samples"]):
            h = hitting_point(c, n, cfg["seed"], i)
            rows.append([n, i, str(h.boundary_point), h.gromov_growth[0], h.gromov_growth[1], h.cauchy_gap])
    return cols, rows


def cmd_continuity(cfg, threads):
    c = build_cocycle(cfg)
    net = default_net(c.ctx, cfg["net_depth"])
    n = cfg["n"][-1]
    tab = continuity_experiment(c, cfg["scales"], n, cfg["samples"], cfg["seed"], net, threads=threads)
    cols = [
        "scale", "dinf_proxy", "drift_diff", "log_bound", "bound", "max_gap", "violations", "C",
        "slope", "slope_lo", "slope_hi",
    ]
    lo, hi = tab.slope_ci if tab.slope_ci else (None, None)
    rows = [
        [r.scale, r.dinf_proxy, r.drift_diff, r.log_bound, r.bound, r.max_gap, r.violations, r.C, tab.slope, lo, hi]
        for r in tab.rows
    ]
    return cols, rows


def cmd_markov(cfg, threads):
    c = build_cocycle(cfg)
    K = c.driver.kernel
    cols = ["quantity", "index", "value", "std_error"]
    rows = []
    st = stationary_measure(K)
    rows += [["stationary", s, float(w), None] for s, w in enumerate(st.weights)]
    rows.append(["stationary_residual", None, st.residual, None])
    try:
        fit = strong_mixing_diagnostic(K, np.arange(K.m, dtype=float))
        rows += [["mixing_C", None, fit.C, None], ["mixing_sigma", None, fit.sigma, None]]
    except PeriodicChainError as e:
        rows.append(["mixing_period", None, e.period, None])
    sysm = ObservedSystem.from_cocycle(c)
    grid = BoundaryGrid(c.model, cfg["net_depth"])
    for n in cfg["n"]:
        hc = avg_holder_const(sysm, n, cfg["alpha"], cfg["samples"], cfg["seed"], grid)
        rows.append(["k_alpha", n, hc.value, hc.std_error])
    v = irreducibility_heuristic(sysm, grid)
    rows.append(["irreducibility", None, v.kind, None])
    return cols, rows


def cmd_geom_selftest(cfg, threads):
    cols = ["suite", "model", "trials", "violations", "worst_slack", "ok"]
    res = run_all(_model(cfg), cfg["samples"], cfg["seed"])
    return cols, [[r.suite, r.model, r.trials, r.violations, r.worst_slack, r.ok] for r in res]


COMMANDS = {
    "ap-check": cmd_ap_check,
    "ap-sl2": cmd_ap_sl2,
    "drift": cmd_drift,
    "ldt": cmd_ldt,
    "hitting": cmd_hitting,
    "continuity": cmd_continuity,
    "markov": cmd_markov,
    "geom-selftest": cmd_geom_selftest,
}


# ---------------------------------------------------------------------------
# output


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def render(sub, cfg, cols, rows):
    config_json = json.dumps(cfg, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    if cfg["format"] == "json":
        doc = {
            "header": {
                "tool": "hyperdrift",
                "version": __version__,
                "subcommand": sub,
                "schema": f"{sub}/{SCHEMA_VERSION}",
                "config": cfg,
            },
            "columns": cols,
            "rows": [[_jsonable(v) for v in r] for r in rows],
        }
        return json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# hyperdrift {__version__} {sub}\n")
    buf.write(f"# schema: {sub}/{SCHEMA_VERSION}\n")
    buf.write(f"# config: {config_json}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def write_atomic(path, text):
    """Write through a temporary file in the target directory, renamed on success."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".hyperdrift-", dir=d)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser():
    p = argparse.ArgumentParser(prog="hyperdrift", description="Random isometry products on hyperbolic spaces.")
    p.add_argument("--version", action="version", version=f"hyperdrift {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file, or a previous output to re-run")
        s.add_argument("--model", choices=["h2", "tree"])
        s.add_argument("--k", type=int, help="free-group rank for the tree model")
        s.add_argument("--b", type=float, help="metric base (tree: any b > 1; h2: e)")
        s.add_argument("--cocycle", help="preset (f2-srw, identity, const:<g>, diag[:t], schottky[:t]) or kernel file")
        s.add_argument("--n", help="horizon or comma-separated grid")
        s.add_argument("--samples", type=int)
        s.add_argument("--eps", help="comma-separated deviation sizes")
        s.add_argument("--seed")
        s.add_argument("--net-depth", dest="net_depth", type=int)
        s.add_argument("--alpha", type=float)
        s.add_argument("--scales", help="comma-separated perturbation scales")
        s.add_argument("--chain", help="chain file for ap-check")
        s.add_argument("--out", help="output file (default: stdout)")
        s.add_argument("--format", choices=["csv", "json"])
        s.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    return p


def run(argv=None, env=None):
    args = build_parser().parse_args(argv)
    sub = args.subcommand
    try:
        raw = _load_config_file(args.config) if args.config else {}
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        for key in KEYS:
            val = getattr(args, key, None)
            if val is not None:
                raw[key] = val
        cfg = resolve_config(sub, raw, env)
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be positive")
        cols, rows = COMMANDS[sub](cfg, args.threads)
        text = render(sub, cfg, cols, rows)
    except ConfigError as e:
        print(f"hyperdrift: config error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # library failures map to the runtime exit code
        print(f"hyperdrift: error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    if args.out:
        try:
            write_atomic(args.out, text)
        except OSError as e:
            print(f"hyperdrift: error: cannot write {args.out!r}: {e.strerror}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
