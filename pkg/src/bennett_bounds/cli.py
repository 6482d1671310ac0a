"""Command-line front end.

Exit codes: 0 success, 1 usage or config error, 2 some result flagged as
outside its stated preconditions, 3 a Monte Carlo validity check failed.
"""

import argparse
import math
import os
import sys
import warnings
from importlib import resources

import numpy as np

from . import bounds as bd
from . import complexity as cx
from . import constants as cn
from . import rates as rt
from . import simulate as sim
from .report import make_envelope, table_to_csv, write_json, write_table
from .special_functions import DomainError, gamma_fn

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FLAGGED = 2
EXIT_INVALID = 3

OUT_ENV_VAR = "BENNETT_BOUNDS_OUT"

QUOTED_CONSTANTS = {
    "beta1_lower": 0.0075,
    "beta1_upper": 0.4804,
    "monotonicity_threshold": 0.4434,
    "beta2_lower": 0.0075,
    "beta2_upper": 0.3863,
}


class ConfigError(Exception):
    pass


def load_default_config():
    text = resources.files("bennett_bounds").joinpath("data/default_config.toml").read_text()
    return tomllib.loads(text)


def load_config(path):
    if path is None:
        return load_default_config()
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc


def _section(config, name):
    if name not in config or not isinstance(config[name], dict):
        raise ConfigError(f"config is missing required section [{name}]")
    return config[name]


def _req(sec, key, section):
    if key not in sec:
        raise ConfigError(f"[{section}] is missing required field '{key}'")
    return sec[key]


def _num(sec, key, section, lo=None, hi=None, default=None, integer=False):
    val = sec.get(key, default) if default is not None else _req(sec, key, section)
    try:
        val = int(val) if integer else float(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] field '{key}' must be numeric, got {val!r}") from exc
    if (lo is not None and val < lo) or (hi is not None and val > hi):
        raise ConfigError(f"[{section}] field '{key}'={val!r} outside [{lo}, {hi}]")
    return val


def _num_list(sec, key, section, lo=None, hi=None, default=None, integer=False):
    vals = sec.get(key, default) if default is not None else _req(sec, key, section)
    if not isinstance(vals, list):
        vals = [vals]
    return [_num({key: v}, key, section, lo, hi, integer=integer) for v in vals]


def _range(sec, section):
    vals = _req(sec, "range", section)
    try:
        return bd.BoundedRange(float(vals[0]), float(vals[1]))
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"[{section}] field 'range' must be [a, b] with a < b") from exc


def _open_unit(sec, key, section):
    vals = _num_list(sec, key, section)
    for v in vals:
        if not 0.0 < v < 1.0:
            raise ConfigError(f"[{section}] field '{key}' values must lie in (0, 1), got {v!r}")
    return vals


# -- eval / invert ----------------------------------------------------------


TAIL_FAMILIES = (
    "hoeffding_uen",
    "bennett_sum",
    "bennett_bdiff",
    "bennett_uen",
    "bernstein_uen",
    "bennett_alt_uen",
)

INVERT_FAMILIES = (
    "hoeffding_uen",
    "bernstein_uen",
    "bennett_uen_exact",
    "bennett_alt_uen",
    "rademacher_classical",
    "rademacher_bennett",
    "rad_population",
)


def cmd_eval(config, args):
    name = "eval"
    sec = _section(config, name)
    family = _req(sec, "family", name)
    if family not in TAIL_FAMILIES:
        raise ConfigError(f"[eval] unknown family {family!r}; choose from {TAIL_FAMILIES}")
    rng = _range(sec, name)
    ns = _num_list(sec, "N", name, lo=1, integer=True)
    xis = _num_list(sec, "xi", name)
    for x in xis:
        if not x > 0:
            raise ConfigError(f"[eval] xi values must be positive, got {x!r}")

    if family == "bennett_sum":
        for n in ns:
            for x in xis:
                if x >= n * rng.width():
                    raise ConfigError(f"[eval] bennett_sum needs xi < N(b-a); xi={x}, N={n}")
        fn = lambda x, n: bd.bennett_sum_tail(x, n, rng)
    elif family == "bennett_bdiff":
        c = _num(sec, "c", name)
        if not c > 0:
            raise ConfigError("[eval] field 'c' must be positive")
        fn = lambda x, n: bd.bennett_bdiff_tail(x, n, c)
    else:
        log_uen = _num(sec, "log_uen", name, lo=0.0)
        if family == "bennett_alt_uen":
            beta1 = _num(sec, "beta1", name)
            gamma_exp = _num(sec, "gamma", name)
            if beta1 <= 0 or gamma_exp <= 0:
                raise ConfigError("[eval] beta1 and gamma must be positive")
            fn = lambda x, n: bd.bennett_alt_uen_tail(x, n, rng, log_uen, beta1, gamma_exp)
        else:
            tail = {
                "hoeffding_uen": bd.hoeffding_uen_tail,
                "bennett_uen": bd.bennett_uen_tail,
                "bernstein_uen": bd.bernstein_uen_tail,
            }[family]
            fn = lambda x, n: tail(x, n, rng, log_uen)

    rows = []
    for n in ns:
        for x in xis:
            r = fn(x, n)
            rows.append([r.family, x, n, r.value, r.value_raw, r.valid, " | ".join(r.notes)])
    flagged = any(not row[5] for row in rows)
    tables = {
        "eval": (["family", "xi", "N", "value", "value_raw", "valid", "notes"], rows),
    }
    return (EXIT_FLAGGED if flagged else EXIT_OK), {"flagged": flagged, "rows": len(rows)}, tables


def cmd_invert(config, args):
    name = "invert"
    sec = _section(config, name)
    family = _req(sec, "family", name)
    if family not in INVERT_FAMILIES:
        raise ConfigError(f"[invert] unknown family {family!r}; choose from {INVERT_FAMILIES}")
    rng = _range(sec, name)
    ns = _num_list(sec, "N", name, lo=1, integer=True)
    if family == "bennett_uen_exact":
        epss = _num_list(sec, "eps", name)
        if any(not e > 0 for e in epss):
            raise ConfigError("[invert] eps values must be positive")
    else:
        epss = _open_unit(sec, "eps", name)

    if family in ("hoeffding_uen", "bernstein_uen", "bennett_uen_exact", "bennett_alt_uen"):
        log_uen = _num(sec, "log_uen", name, lo=0.0)
        if family == "bennett_uen_exact":
            for e in epss:
                if not e < 8.0 * math.exp(log_uen):
                    raise ConfigError(f"[invert] eps={e} must be below 8 exp(log_uen)")

    def compute(eps, n):
        if family == "hoeffding_uen":
            return bd.hoeffding_uen_radius(eps, n, rng, log_uen)
        if family == "bernstein_uen":
            return bd.bernstein_uen_radius(eps, n, rng, log_uen)
        if family == "bennett_uen_exact":
            return bd.bennett_uen_radius_exact(eps, n, rng, log_uen)
        if family == "bennett_alt_uen":
            return bd.bennett_alt_radius(
                eps, n, rng, log_uen, _num(sec, "beta1", name), _num(sec, "gamma", name)
            )
        emp_risk = _num(sec, "emp_risk", name, default=0.0)
        rad = _num(sec, "rad", name, default=0.0)
        emp_rad = _num(sec, "emp_rad", name, default=0.0)
        use_emp = bool(sec.get("use_empirical", False))
        if family == "rademacher_classical":
            return bd.rademacher_bound_classical(emp_risk, rad, emp_rad, n, rng, eps, use_emp)
        if family == "rademacher_bennett":
            return bd.rademacher_bound_bennett(
                emp_risk, rad, emp_rad, n, rng, eps,
                _num(sec, "beta2", name), _num(sec, "gamma", name), use_emp,
            )
        rad_family = sec.get("rad_family", "hoeffding")
        if rad_family == "bennett":
            return bd.rad_population_from_empirical(
                emp_rad, n, rng, eps, "bennett", _num(sec, "beta2", name), _num(sec, "gamma", name)
            )
        return bd.rad_population_from_empirical(emp_rad, n, rng, eps, rad_family)

    rows = []
    for n in ns:
        for eps in epss:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", bd.PreconditionWarning)
                try:
                    value = compute(eps, n)
                    notes = [str(w.message) for w in caught]
                except bd.SaturationError as exc:
                    value, notes = exc.saturated_radius, [str(exc)]
                except DomainError as exc:
                    raise ConfigError(f"[invert] {exc}") from exc
            rows.append([family, eps, n, value, not notes, " | ".join(notes)])
    flagged = any(not row[4] for row in rows)
    tables = {"invert": (["family", "eps", "N", "value", "valid", "notes"], rows)}
    return (EXIT_FLAGGED if flagged else EXIT_OK), {"flagged": flagged, "rows": len(rows)}, tables


# -- constants ----------------------------------------------------------------


def _round4(v):
    return round(v, 4)


def cmd_constants(config, args):
    name = "constants"
    sec = _section(config, name)
    fig1_betas = _num_list(sec, "fig1_betas", name, lo=1e-12)
    n1 = _num(sec, "fig1_points", name, lo=2, integer=True)
    n2 = _num(sec, "fig2_points", name, lo=2, integer=True)
    n3 = _num(sec, "fig3_points", name, lo=2, integer=True)
    x3 = _num(sec, "fig3_x_max", name, lo=0.0)
    classify_betas = _num_list(sec, "classify_betas", name, lo=1e-12)
    limit_betas = _num_list(sec, "limit_betas", name, lo=1e-12)
    limit_x = _num_list(sec, "limit_x", name, lo=1e-12, hi=0.999)

    iv1 = cn.beta_interval(0.125)
    iv2 = cn.beta_interval(1.0)
    threshold = cn.find_monotonicity_threshold(0.125)
    interval_rows = []
    for label, derived, quoted in (
        ("beta1_lower", iv1.lower, QUOTED_CONSTANTS["beta1_lower"]),
        ("beta1_upper", iv1.upper, QUOTED_CONSTANTS["beta1_upper"]),
        ("monotonicity_threshold", threshold, QUOTED_CONSTANTS["monotonicity_threshold"]),
        ("beta2_lower", iv2.lower, QUOTED_CONSTANTS["beta2_lower"]),
        ("beta2_upper", iv2.upper, QUOTED_CONSTANTS["beta2_upper"]),
    ):
        interval_rows.append([label, derived, _round4(derived), quoted, _round4(derived) == quoted])

    mono_rows = []
    for b in classify_betas:
        try:
            rep = cn.classify_gamma_monotonicity(b, 0.125)
            mono_rows.append([b, rep.classification, rep.minimizer_x])
        except DomainError:
            mono_rows.append([b, "OutOfWindow", None])

    fig1_x = np.geomspace(1e-6, 0.125, n1)
    fig1_rows = [[x] + [float(cn.gamma_exponent(b, x)) for b in fig1_betas] for x in fig1_x]
    fig2_x = np.linspace(0.0, 1.0, n2)
    fig2_rows = [
        [x, math.exp(gamma_fn(x / 8.0)), math.exp(-x * x / 32.0), math.exp(-0.4804 * (x / 8.0) ** 2)]
        for x in fig2_x
    ]
    fig3_rows = [[x, gamma_fn(x)] for x in np.linspace(0.0, x3, n3)]

    limit_rows = []
    for b in limit_betas:
        rep = cn.check_limit_at_zero(b, limit_x)
        for x, g, gap in zip(rep.x, rep.gamma, rep.gap):
            limit_rows.append([b, x, g, gap, rep.gap_shrinks, rep.within_expansion_bound])

    coincide = cn.fig2_coincidence(0.4804, fig2_x)
    coincide_low = cn.fig2_coincidence(0.0075, fig2_x)
    results = {
        "beta1_interval": [iv1.lower, iv1.upper],
        "beta2_interval_derived": [iv2.lower, iv2.upper],
        "monotonicity_threshold": threshold,
        "fig2_sup_difference_beta_0.4804": coincide.sup_difference,
        "fig2_sup_difference_beta_0.0075": coincide_low.sup_difference,
        "beta2_lower_discrepancy": (
            "on (0, 1] the positivity criterion gives "
            f"{iv2.lower!r}, equal to the upper endpoint; quoted lower endpoint 0.0075 "
            "is not reproduced"
        ),
    }
    tables = {
        "intervals": (["name", "derived", "derived_rounded", "quoted", "match"], interval_rows),
        "monotonicity": (["beta", "classification", "minimizer_x"], mono_rows),
        "limit": (["beta", "x", "gamma", "gap", "gap_shrinks", "within_expansion_bound"], limit_rows),
        "fig1": (["x"] + [f"gamma_beta_{b!r}" for b in fig1_betas], fig1_rows),
        "fig2": (["x", "exp_gamma", "exp_hoeffding", "exp_beta"], fig2_rows),
        "fig3": (["x", "gamma"], fig3_rows),
    }
    provenance = {
        "derived": ["intervals.derived", "monotonicity", "fig1", "fig2", "fig3", "limit"],
        "quoted": {k: v for k, v in QUOTED_CONSTANTS.items()},
    }
    return EXIT_OK, results, tables, provenance


# -- complexity ----------------------------------------------------------------


def cmd_complexity(config, args):
    name = "complexity"
    sec = _section(config, name)
    rng = _range(sec, name)
    path = sec.get("matrix", "")
    p = _num(sec, "p", name, lo=1e-12)
    radii = _num_list(sec, "radii", name, lo=1e-15)
    trials = _num(sec, "rademacher_trials", name, lo=100, integer=True)
    dudley_p = _num(sec, "dudley_p", name, lo=1e-12, default=2.0)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    try:
        if path:
            matrix = cx.read_matrix_csv(path, rng)
        else:
            res = resources.files("bennett_bounds").joinpath("data/example_matrix.csv")
            with resources.as_file(res) as p_:
                matrix = cx.read_matrix_csv(str(p_), rng)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"[complexity] cannot load matrix: {exc}") from exc

    m, n = matrix.shape
    cover_rows = []
    for r in radii:
        g = cx.covering_number_greedy(matrix, r, p)
        e = cx.covering_number_exact(matrix, r, p) if m <= cx.EXACT_COVER_MAX_ROWS else None
        cover_rows.append([r, p, g.size, e.size if e else None])

    exact = cx.rademacher_exact(matrix) if n <= cx.RADEMACHER_EXACT_MAX_N else None
    mc, err = cx.rademacher_mc(matrix, trials, seed)
    diam = cx.diameter(matrix, dudley_p)
    dudley = bd.dudley_upper_bound(cx.covering_log_function(matrix, dudley_p), n, diam)
    rad_rows = [[m, n, exact, mc, err, dudley]]
    results = {
        "shape": [m, n],
        "rademacher_exact": exact,
        "rademacher_mc": [mc, err],
        "dudley_upper_bound": dudley,
        "exact_le_greedy": all(row[3] is None or row[3] <= row[2] for row in cover_rows),
    }
    tables = {
        "covers": (["radius", "p", "greedy", "exact"], cover_rows),
        "rademacher": (["M", "N", "exact", "mc", "mc_stderr", "dudley_upper"], rad_rows),
    }
    return EXIT_OK, results, tables


# -- simulate -------------------------------------------------------------------


def cmd_simulate(config, args):
    name = "simulate"
    sec = _section(config, name)
    trials = _num(sec, "trials", name, lo=1, integer=True)
    workers = args.workers if args.workers is not None else _num(sec, "workers", name, lo=1, integer=True, default=1)
    slack = _num(sec, "slack_sigmas", name, lo=0.0)
    uen_draws = _num(sec, "uen_draws", name, lo=1, integer=True, default=5)
    ns = _num_list(sec, "ns", name, lo=1, integer=True)
    points = _num(sec, "grid_points", name, lo=2, integer=True, default=16)
    wanted = sec.get("scenarios", [])
    if args.seed is not None:
        seed = args.seed
    elif "seed" in config:
        seed = int(config["seed"])
    else:
        raise ConfigError("simulate requires a seed (--seed or top-level 'seed')")
    try:
        cfg = sim.McConfig(trials=trials, seed=seed, workers=workers)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    scenarios = sim.default_scenarios(tuple(ns), points)
    if wanted:
        known = {s.name for s in scenarios}
        unknown = [w for w in wanted if w not in known]
        if unknown:
            raise ConfigError(f"[simulate] unknown scenarios {unknown}; known: {sorted(known)}")
        scenarios = [s for s in scenarios if s.name in wanted]

    tables, summary_rows, results = {}, [], {}
    for s in scenarios:
        res = sim.run_scenario(s, cfg, slack, uen_draws)
        rows = []
        for key, curve in res.curves.items():
            for x, pr, se in curve.points:
                rows.append([x, pr, se, key])
        tables[f"simulate_{s.name}"] = (["xi", "probability", "stderr", "source"], rows)
        for check, rep in res.checks.items():
            tight = [t for t in rep.tightness if t is not None]
            summary_rows.append([
                s.name, check, rep.bound_source, "PASS" if rep.passed else "FAIL",
                len(rep.failures()), min(tight) if tight else None,
            ])
        results[s.name] = {
            "passed": res.passed,
            "expected_h": res.curves["bdiff_empirical"].info["expected_h"],
            "log_uen": res.log_uen,
        }
    tables["validity"] = (
        ["scenario", "check", "bound", "verdict", "failed_points", "min_tightness"],
        summary_rows,
    )
    all_pass = all(r[3] == "PASS" for r in summary_rows)
    results["all_pass"] = all_pass
    return (EXIT_OK if all_pass else EXIT_INVALID), results, tables


# -- rates ----------------------------------------------------------------------


def cmd_rates(config, args):
    name = "rates"
    sec = _section(config, name)
    eps = _open_unit(sec, "eps", name)[0]
    log_uen = _num(sec, "log_uen", name, lo=0.0)
    rng = _range(sec, name)
    n_min = _num(sec, "N_min", name, lo=1.0)
    n_max = _num(sec, "N_max", name, lo=n_min)
    points = _num(sec, "points", name, lo=rt.MIN_FIT_POINTS, integer=True)
    alt = sec.get("alt", [])
    profile_betas = _num_list(sec, "profile_betas", name, lo=1e-12, default=[])
    profile_points = _num(sec, "profile_points", name, lo=2, integer=True, default=200)
    conv_xi = _num(sec, "convergence_xi", name, lo=1e-12, default=0.5)
    conv_n = _num_list(sec, "convergence_N", name, lo=1.0, default=[1e2, 1e3, 1e4, 1e5, 1e6])

    grid = rt.default_n_grid(n_min, n_max, points)
    inverters = [
        rt.hoeffding_inverter(eps, rng, log_uen),
        rt.bernstein_inverter(eps, rng, log_uen),
        rt.bennett_exact_inverter(eps, rng, log_uen),
    ]
    for pair in alt:
        try:
            b1, g = float(pair[0]), float(pair[1])
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError("[rates] 'alt' entries must be [beta1, gamma] pairs") from exc
        inverters.append(rt.bennett_alt_inverter(eps, rng, log_uen, b1, g))

    curve_rows, slope_rows, local_rows = [], [], []
    for inv in inverters:
        try:
            curve = rt.radius_curve(inv, grid)
        except DomainError:
            slope_rows.append([inv.family, None, None, None, None, len(grid)])
            continue
        curve_rows.extend([curve.family, n, x] for n, x in curve.points)
        slope_rows.append([
            curve.family, curve.fitted_slope, curve.slope_stderr,
            curve.fit_range[0], curve.fit_range[1], len(curve.dropped),
        ])
        mids, slopes = rt.local_slopes(curve)
        local_rows.extend([curve.family, m, s] for m, s in zip(mids, slopes))

    profile_rows = []
    xs = np.geomspace(1e-6, 0.125, profile_points)
    for b in profile_betas:
        prof = rt.large_deviation_profile(b, xs)
        profile_rows.extend([b, x, g, r] for x, g, r in zip(prof.x, prof.gamma, prof.local_rate))

    conv_rows = []
    for label, growth in (
        ("constant", lambda n: log_uen),
        ("sqrt", lambda n: math.sqrt(n)),
        ("linear_2N", lambda n: 2.0 * n),
    ):
        rep = rt.asymptotic_convergence_check(growth, conv_n, conv_xi, rng)
        for n, r, lb in zip(rep.n, rep.ratio, rep.log_bound):
            conv_rows.append([label, n, r, lb, rep.verdict])

    results = {
        "slopes": {row[0]: row[1] for row in slope_rows},
        "dropped_points": {row[0]: row[5] for row in slope_rows},
    }
    tables = {
        "rates": (["family", "N", "xi"], curve_rows),
        "slopes": (["family", "slope", "stderr", "N_min", "N_max", "dropped"], slope_rows),
        "local_slopes": (["family", "log10_N_mid", "slope"], local_rows),
        "profile": (["beta1", "x", "gamma", "local_rate"], profile_rows),
        "convergence": (["growth", "N", "ratio", "log_bound", "verdict"], conv_rows),
    }
    # points dropped at small N (saturation) are expected and do not flag the run
    return EXIT_OK, results, tables


COMMANDS = {
    "eval": cmd_eval,
    "invert": cmd_invert,
    "constants": cmd_constants,
    "complexity": cmd_complexity,
    "simulate": cmd_simulate,
    "rates": cmd_rates,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML config; default: bundled defaults")
    common.add_argument("--seed", type=_u64, help="master seed (overrides config)")
    common.add_argument("--out", metavar="DIR", help=f"output directory (default ${OUT_ENV_VAR} or .)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    parser = _Parser(prog="bennett-bounds", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "simulate":
            p.add_argument("--workers", type=int, help="worker threads (scheduling only)")
    return parser


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "workers"):
        args.workers = None
    out_dir = args.out or os.environ.get(OUT_ENV_VAR) or "."
    try:
        config = load_config(args.config)
        outcome = COMMANDS[args.command](config, args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, results, tables = outcome[:3]
    provenance = outcome[3] if len(outcome) > 3 else {}

    echo = {k: v for k, v in config.items() if not isinstance(v, dict)}
    if args.command in config:
        echo[args.command] = config[args.command]
    if args.seed is not None:
        echo["seed"] = args.seed
    if args.workers is not None:
        echo.setdefault(args.command, {})
        echo[args.command] = dict(echo[args.command], workers=args.workers)
    payload = dict(results)
    if args.format == "json":
        payload["tables"] = {
            k: {"columns": cols, "rows": rows} for k, (cols, rows) in tables.items()
        }
    else:
        for key, (cols, rows) in tables.items():
            write_table(os.path.join(out_dir, f"{key}.csv"), cols, rows)
    envelope = make_envelope(args.command, echo, payload, provenance)
    write_json(os.path.join(out_dir, f"{args.command}_report.json"), envelope)
    for key in tables:
        if key in ("intervals", "validity", "slopes", "eval", "invert", "covers"):
            sys.stdout.write(f"# {key}\n" + table_to_csv(*tables[key]))
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
