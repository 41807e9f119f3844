"""Command-line front end.

Subcommands ``survival``, ``trajectory``, ``verify`` and ``excluded`` write CSV
(header row, 17 significant digits, "\\n" line endings) and a JSON summary
``{schema_version, config, records, fits}``.  Settings come from flags and an
optional key=value file given by ``--config``; flags win.

Exit codes: 0 all pass, 1 computational failure, 2 invalid configuration.
"""
import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import oracle, scenario
from .amplitude import amplitude_at, leading_m0, star_amplitude
from .gaussian import GaussianState, free_propagate, survival_probability
from .riccati import RiccatiFamily, leading_l0, riccati_l, solve_kappa_eps
from .specfun import C1, GAMMA, GammaConstants, self_test

SCHEMA_VERSION = 1
MODES = ("closed_form", "oracle_ode", "oracle_pde", "all")
SPACINGS = ("linear", "log", "dyadic")
INV_SQRT2 = 2.0 ** -0.5

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


def fmt(x):
    """17 significant digits; empty for None."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def report(config, records, fits):
    return {
        "schema_version": SCHEMA_VERSION,
        "config": _jsonable(config),
        "records": _jsonable(records),
        "fits": _jsonable(fits),
    }


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SweepSpec:
    eps_values: tuple
    L: float = 0.0
    mode: str = "closed_form"

    def __post_init__(self):
        if not self.eps_values:
            raise ConfigError("at least one epsilon is required")
        for e in self.eps_values:
            if not 0.0 < e < 1.0:
                raise ConfigError(f"epsilon {e!r} outside (0, 1)")
        if self.L < 0.0 or not math.isfinite(self.L):
            raise ConfigError("L must be a nonnegative number")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}")


def sweep_values(eps_min, eps_max, count, spacing):
    if count < 1:
        raise ConfigError("count must be >= 1")
    if spacing not in SPACINGS:
        raise ConfigError(f"spacing must be one of {', '.join(SPACINGS)}")
    if spacing == "dyadic":
        return tuple(eps_max * 2.0 ** -k for k in range(count))
    if eps_min is None or not 0.0 < eps_min <= eps_max:
        raise ConfigError("need 0 < eps_min <= eps_max")
    if count == 1:
        return (eps_min,)
    if spacing == "linear":
        return tuple(np.linspace(eps_min, eps_max, count).tolist())
    return tuple(np.geomspace(eps_min, eps_max, count).tolist())


def read_config_file(path):
    """Plain key=value lines; '#' starts a comment; keys use underscores."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for num, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{num}: expected key=value")
                key, value = (p.strip() for p in line.split("=", 1))
                out[key.replace("-", "_")] = value
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return out


_CASTS = {
    "epsilon": lambda v: tuple(float(x) for x in str(v).split(",") if x.strip()),
    "L": float,
    "mode": str,
    "out": str,
    "json": str,
    "eps_min": float,
    "eps_max": float,
    "count": int,
    "spacing": str,
    "workers": int,
    "n_samples": int,
    "profile": str,
    "delta": float,
    "c_excl": float,
    "n_max": int,
    "scan_points": int,
}


def merge_settings(args, defaults):
    """defaults < config file < explicit flags."""
    settings = dict(defaults)
    if getattr(args, "config", None):
        for key, value in read_config_file(args.config).items():
            if key not in _CASTS:
                raise ConfigError(f"unknown config key {key!r}")
            settings[key] = value
    for key in _CASTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    try:
        return {k: (_CASTS[k](v) if v is not None and k in _CASTS else v) for k, v in settings.items()}
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def sweep_from_settings(s):
    if s.get("epsilon"):
        eps = s["epsilon"] if isinstance(s["epsilon"], tuple) else _CASTS["epsilon"](s["epsilon"])
    elif s.get("eps_max") is not None:
        eps = sweep_values(s.get("eps_min"), s["eps_max"], s.get("count") or 1, s.get("spacing") or "log")
    else:
        raise ConfigError("give --epsilon or a sweep (--eps-max with --count)")
    return SweepSpec(tuple(eps), float(s.get("L") or 0.0), s.get("mode") or "closed_form")


# ---------------------------------------------------------------------------
# survival


def _oracle_state(eps, L, which):
    if which == "ode":
        g = oracle.ode_final_state(eps, L)
        return survival_probability(g), g
    surv, _ = oracle.pde_survival(eps, L)
    return surv, None


def survival_record(eps, L, mode):
    t0 = time.perf_counter()
    res = scenario.run(scenario.ScenarioConfig(eps, L))
    rec = {
        "epsilon": eps,
        "L": L,
        "survival_closed": res.survival,
        "survival_oracle": None,
        "re_l_final": res.final_state.l.real,
        "im_l_final": res.final_state.l.imag,
        "abs_m_final": abs(res.final_state.m),
        "gap": res.asymptotic_gap,
        "excluded": bool(res.excluded),
    }
    if mode in ("oracle_ode", "all"):
        rec["survival_oracle_ode"], _ = _oracle_state(eps, L, "ode")
        rec["survival_oracle"] = rec["survival_oracle_ode"]
    if mode in ("oracle_pde", "all"):
        rec["survival_oracle_pde"], _ = _oracle_state(eps, L, "pde")
        rec["survival_oracle"] = rec["survival_oracle_pde"]
    rec["wall_time"] = time.perf_counter() - t0
    return rec


SURVIVAL_COLUMNS = (
    "epsilon", "L", "survival_closed", "survival_oracle_or_empty",
    "re_l_final", "im_l_final", "abs_m_final", "gap", "excluded",
)


def _safe(fn, *args):
    try:
        return fn(*args), None
    except Exception as exc:  # reported as an error record, exit code 1
        return None, f"{type(exc).__name__}: {exc}"


def run_sweep(spec, workers=1):
    """Records in input order; failures become error records."""
    def one(eps):
        rec, err = _safe(survival_record, eps, spec.L, spec.mode)
        return rec if err is None else {"epsilon": eps, "L": spec.L, "error": err}

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(one, spec.eps_values))


def survival_fits(records, L):
    ok = [r for r in records if "error" not in r]
    fits = {}
    if L == 0.0 and ok:
        eps = np.array([r["epsilon"] for r in ok])
        dev = np.array([r["survival_closed"] - INV_SQRT2 for r in ok])
        fits["survival_constant_max"] = float(np.max(np.abs(dev) / eps))
        fits["survival_constant_lsq"] = float(np.dot(eps, dev) / np.dot(eps, eps))
    if ok:
        eps = np.array([r["epsilon"] for r in ok])
        fits["gap_over_eps_max"] = float(np.max([r["gap"] for r in ok] / eps))
    return fits


def cmd_survival(spec, workers=1):
    records = run_sweep(spec, workers)
    rows = [
        [r["epsilon"], r["L"], r["survival_closed"], r["survival_oracle"], r["re_l_final"],
         r["im_l_final"], r["abs_m_final"], r["gap"], r["excluded"]]
        for r in records if "error" not in r
    ]
    config = {"command": "survival", "eps_values": list(spec.eps_values), "L": spec.L, "mode": spec.mode}
    return rows, report(config, records, survival_fits(records, spec.L))


# ---------------------------------------------------------------------------
# trajectory


TRAJECTORY_COLUMNS = ("t", "re_l", "im_l", "re_m", "im_m", "pi_m4_minus_re_l")


def trajectory_rows(eps, L, n_samples):
    """Samples over [-(L+1)/eps, (L+1)/eps] in the microscopic clock."""
    if n_samples < 2:
        raise ConfigError("n_samples must be >= 2")
    sol = star_amplitude(eps)
    fam_in = RiccatiFamily(eps, sol.kappa)
    if L == 0.0:
        t = sol.track.t[np.unique(np.linspace(0, len(sol.track.t) - 1, n_samples).round().astype(int))]
        l = riccati_l(fam_in, t)
        m = amplitude_at(sol, t)
    else:
        res = scenario.run_l_positive(scenario.ScenarioConfig(eps, L))
        out = res.diagnostics["outgoing"]
        s0 = res.diagnostics["state_at_switch_off"]
        shift = L / eps
        t = np.linspace(-(L + 1.0) / eps, (L + 1.0) / eps, n_samples)
        l = np.empty(t.shape, dtype=complex)
        m = np.empty(t.shape, dtype=complex)
        inc = t <= -shift
        fly = (t > -shift) & (t < shift)
        outg = t >= shift
        if inc.any():
            l[inc] = riccati_l(fam_in, t[inc] + shift)
            m[inc] = amplitude_at(sol, t[inc] + shift)
        for i in np.flatnonzero(fly):
            g = free_propagate(s0, t[i] + shift)
            l[i], m[i] = g.l, g.m
        if outg.any():
            l[outg] = riccati_l(out.track.family, t[outg] - shift)
            m[outg] = out.at(t[outg] - shift)
    resid = math.pi * np.abs(m) ** 4 - l.real
    return [list(row) for row in zip(t, l.real, l.imag, m.real, m.imag, resid)]


def cmd_trajectory(eps, L, n_samples):
    rows = trajectory_rows(eps, L, n_samples)
    resid = max(abs(r[5]) for r in rows)
    config = {"command": "trajectory", "epsilon": eps, "L": L, "n_samples": n_samples}
    fits = {"max_abs_pi_m4_minus_re_l": resid, "abs_l0_over_2c1_sqrt_eps_abs_kappa": None}
    kappa = solve_kappa_eps(eps)
    l0 = riccati_l(RiccatiFamily(eps, kappa), 0.0)
    fits["abs_l0_over_2c1_sqrt_eps_abs_kappa"] = abs(l0) / (2.0 * C1 * math.sqrt(eps) * abs(kappa))
    return rows, report(config, [], fits)


# ---------------------------------------------------------------------------
# verify


def _suite_specfun(constants):
    res = self_test(constants)
    return all(ok for ok, _ in res.values()), {k: {"passed": bool(ok), "detail": d} for k, (ok, d) in res.items()}


def _suite_invariants(profile):
    rng = np.random.default_rng(12345)
    n = 20 if profile == "fast" else 100
    lead = max(
        abs(survival_probability(GaussianState(leading_m0(e), leading_l0(e))) - INV_SQRT2)
        for e in rng.uniform(0.001, 0.5, n)
    )
    norm_id = 0.0
    refl = 0.0
    for eps in (0.1, 0.05) if profile == "fast" else (0.2, 0.1, 0.05, 0.02):
        sol = star_amplitude(eps)
        t = np.linspace(-1.0 / eps, 1.0 / eps, 201)
        l = riccati_l(RiccatiFamily(eps, sol.kappa), t)
        norm_id = max(norm_id, float(np.max(np.abs(math.pi * np.abs(amplitude_at(sol, t)) ** 4 - l.real))))
        fam = RiccatiFamily(eps, sol.kappa)
        refl = max(refl, float(np.max(np.abs(l + riccati_l(fam.negated(), -t)))))
    detail = {
        "leading_survival_max_dev": lead,
        "norm_identity_max_residual": norm_id,
        "reflection_max_residual": refl,
    }
    return lead <= 1e-12 and norm_id <= 1e-10 and refl <= 1e-10, detail


def _suite_ode(profile):
    worst_l = worst_m = 0.0
    for eps in (0.1,) if profile == "fast" else (0.2, 0.1, 0.05):
        ts = np.linspace(-1.0 / eps, 1.0 / eps, 200)
        tr = oracle.integrate_riccati_linear(eps, -1.0 / eps, 1.0, 1.0 / eps, t_eval=ts, min_nodes=20001)
        idx = tr.index_of(ts)
        sol = star_amplitude(eps)
        l_c = riccati_l(RiccatiFamily(eps, sol.kappa), ts)
        m_o = oracle.amplitude_by_quadrature(tr, math.pi ** -0.25)[idx]
        worst_l = max(worst_l, float(np.max(np.abs(tr.l_values[idx] - l_c))))
        worst_m = max(worst_m, float(np.max(np.abs(m_o - amplitude_at(sol, ts)))))
    return worst_l <= 1e-6 and worst_m <= 1e-6, {"max_l_diff": worst_l, "max_m_diff": worst_m}


def _suite_pde(profile):
    detail = {}
    ok = True
    for eps in (0.1, 0.05):
        surv, _ = oracle.pde_survival(eps)
        closed = scenario.run_l0(eps).survival
        detail[f"eps={eps:g}"] = {"pde": surv, "closed": closed, "diff": abs(surv - closed)}
        ok = ok and abs(surv - closed) <= 1e-3
    return ok, detail


def cmd_verify(profile="fast", constants=GAMMA):
    """Run the verification suites; returns (all_passed, JSON report)."""
    if profile not in ("fast", "full"):
        raise ConfigError("profile must be fast or full")
    suites = [
        ("specfun", lambda: _suite_specfun(constants)),
        ("invariants", lambda: _suite_invariants(profile)),
        ("oracle_ode", lambda: _suite_ode(profile)),
    ]
    if profile == "full":
        suites.append(("oracle_pde", lambda: _suite_pde(profile)))
    records = []
    for name, fn in suites:
        t0 = time.perf_counter()
        res, err = _safe(fn)
        passed, detail = (False, {"error": err}) if err else res
        records.append({"suite": name, "passed": bool(passed), "detail": detail,
                        "wall_time": time.perf_counter() - t0})
    passed = all(r["passed"] for r in records)
    config = {"command": "verify", "profile": profile}
    return passed, report(config, records, {"all_passed": passed})


# ---------------------------------------------------------------------------
# excluded set


INTERVAL_COLUMNS = ("n", "center", "radius")
SCAN_COLUMNS = ("epsilon", "cos_2rho_beta", "direct_excluded", "in_covering")


def cmd_excluded(cfg, eps_min, eps_max, scan_points=400):
    if cfg.L <= 0.0:
        raise ConfigError("the excluded set needs L > 0")
    if not 0.0 < eps_min < eps_max < 1.0:
        raise ConfigError("need 0 < eps_min < eps_max < 1")
    intervals = scenario.excluded_set(cfg, eps_min=eps_min)
    table = [[n, c, r] for n, (c, r) in enumerate(intervals)]
    scan = []
    for eps in np.geomspace(eps_min, eps_max, scan_points):
        scan.append([
            float(eps),
            scenario.resonance_cosine(cfg, eps),
            scenario.violates_lower_bound(cfg, eps),
            scenario.in_covering(cfg, eps, intervals),
        ])
    direct = [row for row in scan if row[2]]
    covered = sum(1 for row in direct if row[3])
    fits = {
        "covering_measure": scenario.covering_measure(cfg, eps_min, eps_max, intervals),
        "range_length": eps_max - eps_min,
        "direct_excluded_count": len(direct),
        "direct_excluded_in_covering": covered,
        "scan_points": scan_points,
    }
    config = {"command": "excluded", "L": cfg.L, "delta": cfg.delta, "c_excl": cfg.c_excl,
              "n_max": cfg.resolved_n_max(eps_min), "eps_min": eps_min, "eps_max": eps_max}
    return table, scan, report(config, [], fits)


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--epsilon", help="value or comma-separated list")
    common.add_argument("--L", type=float)
    common.add_argument("--mode", choices=MODES)
    common.add_argument("--out", help="CSV path (default: stdout)")
    common.add_argument("--json", help="JSON summary path (default: next to --out, else none)")
    common.add_argument("--config", help="key=value settings file; flags override it")

    p = argparse.ArgumentParser(prog="adiabreak", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("survival", parents=[common], help="ground-state survival sweep")
    s.add_argument("--eps-min", dest="eps_min", type=float)
    s.add_argument("--eps-max", dest="eps_max", type=float)
    s.add_argument("--count", type=int)
    s.add_argument("--spacing", choices=SPACINGS)
    s.add_argument("--workers", type=int)

    t = sub.add_parser("trajectory", parents=[common], help="l(t), m(t) along one run")
    t.add_argument("--n-samples", dest="n_samples", type=int)

    v = sub.add_parser("verify", parents=[common], help="self-tests and oracle comparisons")
    v.add_argument("--profile", choices=("fast", "full"))

    e = sub.add_parser("excluded", parents=[common], help="excluded-set report")
    e.add_argument("--delta", type=float)
    e.add_argument("--c-excl", dest="c_excl", type=float)
    e.add_argument("--n-max", dest="n_max", type=int)
    e.add_argument("--eps-min", dest="eps_min", type=float)
    e.add_argument("--eps-max", dest="eps_max", type=float)
    e.add_argument("--scan-points", dest="scan_points", type=int)
    return p


def _emit(settings, header, rows, doc, extra_tables=()):
    out = settings.get("out")
    buf = io.StringIO()
    write_csv(buf, header, rows)
    for h, r in extra_tables:
        buf.write("\n")
        write_csv(buf, h, r)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    json_path = settings.get("json")
    if json_path is None and out:
        json_path = out.rsplit(".", 1)[0] + ".json" if out.endswith(".csv") else out + ".json"
    if json_path:
        with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=True)
            fh.write("\n")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "survival":
            s = merge_settings(args, {"workers": 1})
            spec = sweep_from_settings(s)
            if s["workers"] < 1:
                raise ConfigError("workers must be >= 1")
            rows, doc = cmd_survival(spec, s["workers"])
            _emit(s, SURVIVAL_COLUMNS, rows, doc)
            errors = [r for r in doc["records"] if "error" in r]
            for r in errors:
                print(f"error at epsilon={r['epsilon']}: {r['error']}", file=sys.stderr)
            return EXIT_FAIL if errors else EXIT_OK
        if args.command == "trajectory":
            s = merge_settings(args, {"n_samples": 201, "L": 0.0})
            eps = s.get("epsilon")
            if not eps or len(eps) != 1:
                raise ConfigError("trajectory needs exactly one --epsilon")
            spec = SweepSpec(eps, s["L"])
            rows, doc = cmd_trajectory(spec.eps_values[0], spec.L, s["n_samples"])
            _emit(s, TRAJECTORY_COLUMNS, rows, doc)
            return EXIT_OK
        if args.command == "verify":
            s = merge_settings(args, {"profile": "fast"})
            passed, doc = cmd_verify(s["profile"])
            rows = [[r["suite"], r["passed"]] for r in doc["records"]]
            if s.get("json") is None and not s.get("out"):
                # no destination given: the JSON verdict goes to stdout
                sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
            else:
                _emit(s, ("suite", "passed"), rows, doc)
            return EXIT_OK if passed else EXIT_FAIL
        if args.command == "excluded":
            s = merge_settings(args, {"L": 1.0, "delta": 0.5, "c_excl": 1.0,
                                      "eps_min": 0.002, "eps_max": 0.05, "scan_points": 400})
            try:
                cfg = scenario.ScenarioConfig(s["eps_min"], s["L"], s["delta"], s["c_excl"], s.get("n_max"))
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            table, scan, doc = cmd_excluded(cfg, s["eps_min"], s["eps_max"], s["scan_points"])
            _emit(s, INTERVAL_COLUMNS, table, doc, extra_tables=[(SCAN_COLUMNS, scan)])
            return EXIT_OK
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
