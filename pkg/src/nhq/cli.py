"""Command-line front end.

Subcommands:

* ``run``       -- simulate a scenario and emit wide-format CSV series;
* ``verify``    -- compare the numerics against the closed-form oracle;
* ``sweep``     -- stack runs over a parameter family into one CSV;
* ``asymptote`` -- print the closed-form long-time limits.

Scenarios come from a flat INI config file (sections ``[scenario]``,
``[time]``, ``[propagation]``, ``[outputs]``) and/or command-line flags;
flags override file keys.  Output is deterministic: identical configuration
yields byte-identical CSV.

Exit codes: 0 success, 1 verification failure, 2 runtime singularity or
degenerate limit, 3 configuration error.
"""

import argparse
import configparser
import io
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .correlators import (
    KIND_LINEAR,
    KIND_NONLINEAR,
    average_series,
    correlation_series,
    relative_difference_series,
)
from .errors import ConfigError, DegenerateLimitError, SingularTraceError
from .evolution import (
    METHOD_EXACT,
    HamiltonianSplit,
    PropagationConfig,
)
from .kernel import PAULI
from .tls import (
    FAMILY_FIELDS,
    FAMILY_PAIRS,
    INITS,
    MODELS,
    PAIR_OPERATORS,
    TlsScenario,
    build_model,
    erratum_fields,
    initial_state,
    oracle_asymptote,
    oracle_sample,
    scenario_state,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_RUNTIME = 2
EXIT_CONFIG = 3

AVERAGE_NAMES = ("sx", "sy", "sz")
KIND_CHOICES = ("nonlinear", "linear", "both")
DEFAULT_RTOL = 1e-8

_SECTIONS = {
    "scenario": {"model", "delta", "a2", "gamma", "nu", "init", "h_plus"},
    "time": {"tmax", "stride"},
    "propagation": {"method", "dt"},
    "outputs": {"averages", "pairs", "kind", "delta_c", "rtol"},
}


def _fmt(x: float) -> str:
    # 17 significant digits: lossless round-trip for doubles
    return f"{x:.16e}"


@dataclass(frozen=True)
class Settings:
    """Resolved configuration for one invocation."""

    scenario: Optional[TlsScenario]
    raw_ham: Optional[HamiltonianSplit]
    raw_init: str
    raw_nu: float
    tmax: float
    stride: int
    prop: PropagationConfig
    averages: tuple
    pairs: tuple
    kind: str
    delta_c: bool
    rtol: float
    out: Optional[str]


# ---------------------------------------------------------------------------
# configuration loading
# ---------------------------------------------------------------------------


def _read_config(path: Optional[str]) -> dict:
    values = {}
    if path is None:
        return values
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}")
    except configparser.Error as exc:
        raise ConfigError(f"config parse error in {path!r}: {exc}")
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}] in {path!r}")
        for key, val in cp.items(section):
            if key not in _SECTIONS[section]:
                raise ConfigError(
                    f"unknown key {key!r} in section [{section}] of {path!r}")
            values[f"{section}.{key}"] = val.strip()
    return values


def _pick(values: dict, key: str, flag_value):
    return flag_value if flag_value is not None else values.get(key)


def _as_float(raw, key: str) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"key {key!r}: expected a number, got {raw!r}")


def _as_int(raw, key: str) -> int:
    try:
        return int(str(raw), 10)
    except (TypeError, ValueError):
        raise ConfigError(f"key {key!r}: expected an integer, got {raw!r}")


def _as_bool(raw, key: str) -> bool:
    text = str(raw).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key {key!r}: expected a boolean, got {raw!r}")


def _parse_matrix(raw: str, key: str) -> np.ndarray:
    entries = []
    for tok in raw.replace(",", " ").split():
        try:
            entries.append(complex(tok))
        except ValueError:
            raise ConfigError(f"key {key!r}: bad complex entry {tok!r}")
    dim = math.isqrt(len(entries))
    if dim * dim != len(entries) or dim == 0:
        raise ConfigError(
            f"key {key!r}: {len(entries)} entries do not form a square matrix")
    return np.array(entries, dtype=complex).reshape(dim, dim)


def _parse_names(raw, key: str, allowed, default: tuple) -> tuple:
    if raw is None:
        return default
    names = tuple(tok for tok in str(raw).replace(",", " ").split())
    for name in names:
        if name not in allowed:
            raise ConfigError(f"key {key!r}: unknown entry {name!r} "
                              f"(allowed: {', '.join(sorted(allowed))})")
    return names


def _load_settings(args) -> Settings:
    values = _read_config(getattr(args, "config", None))

    model = _pick(values, "scenario.model", getattr(args, "model", None))
    if model is None:
        raise ConfigError("no scenario model given (key 'model' or --model)")
    model = str(model).strip().lower()

    nu = _as_float(_pick(values, "scenario.nu", getattr(args, "nu", None)) or 0.0,
                   "nu")
    init = str(_pick(values, "scenario.init", getattr(args, "init", None))
               or "x").strip().lower()
    if init not in INITS:
        raise ConfigError(f"key 'init': expected one of {INITS}, got {init!r}")

    scenario = None
    raw_ham = None
    if model == "raw":
        hp_raw = values.get("scenario.h_plus")
        g_raw = values.get("scenario.gamma")
        if hp_raw is None or g_raw is None:
            raise ConfigError(
                "raw scenarios need 'h_plus' and 'gamma' entry lists in "
                "[scenario]")
        hp = _parse_matrix(hp_raw, "h_plus")
        g = _parse_matrix(g_raw, "gamma")
        try:
            raw_ham = HamiltonianSplit(h_plus=hp, gamma=g)
        except ValueError as exc:
            raise ConfigError(f"invalid raw Hamiltonian: {exc}")
        if raw_ham.dim != 2:
            raise ConfigError(
                "raw scenarios are limited to dimension 2 on the CLI "
                "(outputs are Pauli-based)")
    elif model in MODELS:
        delta = _as_float(
            _pick(values, "scenario.delta", getattr(args, "delta", None)) or 1.0,
            "delta")
        a2 = _as_float(
            _pick(values, "scenario.a2", getattr(args, "a2", None)) or 0.0, "a2")
        gamma = _as_float(
            _pick(values, "scenario.gamma", getattr(args, "gamma", None)) or 0.0,
            "gamma")
        try:
            scenario = TlsScenario(model=model, delta=delta, a2=a2,
                                   gamma_param=gamma, nu=nu, init=init)
        except ValueError as exc:
            raise ConfigError(str(exc))
    else:
        raise ConfigError(f"unknown model {model!r} "
                          f"(expected one of {MODELS + ('raw',)})")

    tmax = _as_float(_pick(values, "time.tmax", getattr(args, "tmax", None))
                     or 5.0, "tmax")
    if not (tmax > 0.0):
        raise ConfigError("tmax must be positive")
    stride = _as_int(_pick(values, "time.stride", getattr(args, "stride", None))
                     or 25, "stride")
    if stride < 1:
        raise ConfigError("stride must be >= 1")

    method = str(_pick(values, "propagation.method",
                       getattr(args, "method", None)) or METHOD_EXACT).strip()
    if method == "exact":
        method = METHOD_EXACT
    dt = _as_float(_pick(values, "propagation.dt", getattr(args, "dt", None))
                   or 1e-3, "dt")
    try:
        prop = PropagationConfig(method=method, dt=dt)
    except ValueError as exc:
        raise ConfigError(str(exc))

    averages = _parse_names(values.get("outputs.averages"), "averages",
                            AVERAGE_NAMES, AVERAGE_NAMES)
    default_pairs = FAMILY_PAIRS[init][:1]
    pairs = _parse_names(values.get("outputs.pairs"), "pairs",
                         tuple(PAIR_OPERATORS), default_pairs)
    kind = str(values.get("outputs.kind") or "both").strip().lower()
    if kind not in KIND_CHOICES:
        raise ConfigError(f"key 'kind': expected one of {KIND_CHOICES}, "
                          f"got {kind!r}")
    delta_c = _as_bool(values.get("outputs.delta_c", "true"), "delta_c")
    rtol = _as_float(_pick(values, "outputs.rtol", getattr(args, "rtol", None))
                     or DEFAULT_RTOL, "rtol")

    return Settings(
        scenario=scenario, raw_ham=raw_ham, raw_init=init, raw_nu=nu,
        tmax=tmax, stride=stride, prop=prop,
        averages=averages, pairs=pairs, kind=kind, delta_c=delta_c,
        rtol=rtol, out=getattr(args, "out", None),
    )


# ---------------------------------------------------------------------------
# series assembly
# ---------------------------------------------------------------------------


def _time_grid(settings: Settings) -> np.ndarray:
    step = settings.prop.dt * settings.stride
    npts = int(math.floor(settings.tmax / step + 1e-9)) + 1
    return np.arange(npts) * step


def _system(settings: Settings):
    if settings.scenario is not None:
        sc = settings.scenario
        return build_model(sc), scenario_state(sc)
    return settings.raw_ham, initial_state(settings.raw_init, settings.raw_nu)


def _requested_kinds(kind: str):
    if kind == "both":
        return (KIND_NONLINEAR, KIND_LINEAR)
    return (kind,)


def build_series(settings: Settings):
    """Compute every requested series on the output grid.

    Returns ``(times, series)`` with ``series`` a list of
    ``(name, values, defined)`` triples in deterministic column order.
    """
    ham, rho0 = _system(settings)
    ts = _time_grid(settings)
    series = []

    if settings.averages:
        obs = [PAULI[name[-1]] for name in settings.averages]
        rows, ok = average_series(ts, rho0, ham, obs, settings.prop)
        for name, row in zip(settings.averages, rows):
            series.append((name, row, ok))

    for pair in settings.pairs:
        xi, chi = PAIR_OPERATORS[pair]
        computed = {}
        for kind in _requested_kinds(settings.kind):
            vals, ok = correlation_series(kind, xi, chi, ts, rho0, ham,
                                          settings.prop)
            computed[kind] = (vals, ok)
            suffix = "" if kind == KIND_NONLINEAR else "_l"
            series.append((f"c_{pair}{suffix}", vals, ok))
        if settings.delta_c and len(computed) == 2:
            c_vals, c_ok = computed[KIND_NONLINEAR]
            cl_vals, cl_ok = computed[KIND_LINEAR]
            dc, dc_ok = relative_difference_series(c_vals, cl_vals)
            series.append((f"dc_{pair}", dc, dc_ok & c_ok & cl_ok))
    return ts, series


def _write_csv(stream, ts, series, lead=None):
    names = []
    for name, _, _ in series:
        names.extend([f"{name}.re", f"{name}.im", f"{name}.ok"])
    header = "t," + ",".join(names)
    if lead is not None:
        header = f"{lead[0]},{header}"
    stream.write(header + "\n")
    for i, t in enumerate(ts):
        cells = [] if lead is None else [_fmt(lead[1])]
        cells.append(_fmt(t))
        for _, values, defined in series:
            ok = bool(defined[i])
            v = values[i] if ok else 0.0j
            cells.extend([_fmt(v.real), _fmt(v.imag), "1" if ok else "0"])
        stream.write(",".join(cells) + "\n")


def _open_out(settings: Settings):
    if settings.out is None:
        return sys.stdout, False
    try:
        return open(settings.out, "w", encoding="utf-8", newline="\n"), True
    except OSError as exc:
        raise ConfigError(f"cannot open output file {settings.out!r}: {exc}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    settings = _load_settings(args)
    ts, series = build_series(settings)
    stream, owned = _open_out(settings)
    try:
        _write_csv(stream, ts, series)
    finally:
        if owned:
            stream.close()
    return EXIT_OK


def _scaled_error(numeric: complex, oracle: complex) -> float:
    return abs(numeric - oracle) / max(1.0, abs(oracle))


def cmd_verify(args) -> int:
    settings = _load_settings(args)
    sc = settings.scenario
    if sc is None:
        raise ConfigError("verify requires one of the closed-form models "
                          f"({', '.join(MODELS)}), not a raw scenario")
    ham, rho0 = _system(settings)
    ts = _time_grid(settings)

    # numeric series (values and defined-masks) for every closed-form field
    numeric = {}
    numeric_ok = {}
    rows, ok = average_series(ts, rho0, ham,
                              [PAULI["x"], PAULI["y"], PAULI["z"]],
                              settings.prop)
    for name, row in zip(("sx", "sy", "sz"), rows):
        numeric[name], numeric_ok[name] = row, ok
    for pair in FAMILY_PAIRS[sc.init]:
        xi, chi = PAIR_OPERATORS[pair]
        for kind, suffix in ((KIND_NONLINEAR, ""), (KIND_LINEAR, "_l")):
            vals, vok = correlation_series(kind, xi, chi, ts, rho0, ham,
                                           settings.prop)
            numeric[f"c_{pair}{suffix}"] = vals
            numeric_ok[f"c_{pair}{suffix}"] = vok

    samples = [oracle_sample(sc, float(t)) for t in ts]
    fields = FAMILY_FIELDS[sc.init]
    corrected = erratum_fields(sc)

    failures = 0
    print(f"verify: model={sc.model} init={sc.init} delta={sc.delta:g} "
          f"a2={sc.a2:g} gamma={sc.gamma_param:g} nu={sc.nu:g} "
          f"method={settings.prop.method} points={ts.size} "
          f"rtol={settings.rtol:g}")
    for name in corrected:
        print(f"note: {name} compared against the corrected analytic form "
              "(erratum tag)")

    def report(name, err, skipped):
        nonlocal failures
        status = "PASS" if err <= settings.rtol else "FAIL"
        if status == "FAIL":
            failures += 1
        print(f"  {name:8s} max_rel_err={err:.3e} skipped={skipped:d} {status}")

    for name in fields:
        err = 0.0
        skipped = 0
        for i, sample in enumerate(samples):
            ov = sample.value(name)
            if ov is None or not numeric_ok[name][i]:
                skipped += 1
                continue
            err = max(err, _scaled_error(numeric[name][i], ov))
        report(name, err, skipped)

    # relative-difference diagnostic per pair, against the oracle ratio
    for pair in FAMILY_PAIRS[sc.init]:
        c_num, cl_num = numeric[f"c_{pair}"], numeric[f"c_{pair}_l"]
        both_ok = numeric_ok[f"c_{pair}"] & numeric_ok[f"c_{pair}_l"]
        dc_num, dc_ok = relative_difference_series(c_num, cl_num)
        err = 0.0
        skipped = 0
        max_abs = 0.0
        for i, sample in enumerate(samples):
            c_o = sample.value(f"c_{pair}")
            cl_o = sample.value(f"c_{pair}_l")
            if (c_o is None or cl_o is None or abs(cl_o) <= 1e-14
                    or not dc_ok[i] or not both_ok[i]):
                skipped += 1
                continue
            dc_o = 1.0 - c_o / cl_o
            err = max(err, _scaled_error(dc_num[i], dc_o))
            max_abs = max(max_abs, abs(dc_num[i]))
        report(f"dc_{pair}", err, skipped)
        print(f"  dc_{pair}  max_abs={max_abs:.3e}")

    print("verify: FAIL" if failures else "verify: PASS")
    return EXIT_VERIFY_FAILED if failures else EXIT_OK


def cmd_sweep(args) -> int:
    settings = _load_settings(args)
    sc = settings.scenario
    if sc is None:
        raise ConfigError("sweep requires one of the closed-form models")
    param = args.param
    if param not in ("nu", "a2", "gamma", "delta"):
        raise ConfigError(f"unknown sweep parameter {param!r}")
    try:
        sweep_values = sorted(float(tok) for tok in args.values.split(","))
    except ValueError:
        raise ConfigError(f"bad sweep values {args.values!r}")
    if not sweep_values:
        raise ConfigError("empty sweep value list")

    field = {"nu": "nu", "a2": "a2", "gamma": "gamma_param",
             "delta": "delta"}[param]

    def one(value: float):
        try:
            variant = replace(sc, **{field: value})
        except ValueError as exc:
            raise ConfigError(str(exc))
        return build_series(replace(settings, scenario=variant))

    threads_env = os.environ.get("NHQ_THREADS")
    if threads_env is not None:
        try:
            max_workers = int(threads_env)
        except ValueError:
            raise ConfigError(f"NHQ_THREADS must be an integer, "
                              f"got {threads_env!r}")
        if max_workers < 1:
            raise ConfigError("NHQ_THREADS must be >= 1")
    else:
        max_workers = min(len(sweep_values), os.cpu_count() or 1)

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(one, sweep_values))

    stream, owned = _open_out(settings)
    try:
        for idx, (value, (ts, series)) in enumerate(zip(sweep_values, results)):
            if idx == 0:
                _write_csv(stream, ts, series, lead=(param, value))
            else:
                buf = io.StringIO()
                _write_csv(buf, ts, series, lead=(param, value))
                stream.write(buf.getvalue().split("\n", 1)[1])
    finally:
        if owned:
            stream.close()
    return EXIT_OK


def cmd_asymptote(args) -> int:
    settings = _load_settings(args)
    sc = settings.scenario
    if sc is None:
        raise ConfigError("asymptote requires one of the closed-form models")
    sample = oracle_asymptote(sc)
    stream, owned = _open_out(settings)
    try:
        stream.write("series,re,im,ok\n")
        for name in FAMILY_FIELDS[sc.init]:
            value = sample.value(name)
            if name in sample.undefined:
                stream.write(f"{name},{_fmt(0.0)},{_fmt(0.0)},0\n")
            elif value is not None:
                stream.write(f"{name},{_fmt(value.real)},{_fmt(value.imag)},1\n")
    finally:
        if owned:
            stream.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route through the
    # configuration-error path instead to honor the exit-code contract.
    def error(self, message):
        raise ConfigError(message)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file")
    p.add_argument("--model", help="ed | pd | dph | raw")
    p.add_argument("--delta", help="common rate parameter (> 0)")
    p.add_argument("--a2", help="ed-model coupling")
    p.add_argument("--gamma", help="identity-shift / dephasing parameter")
    p.add_argument("--nu", help="initial-state off-positivity parameter")
    p.add_argument("--init", help="initial family: x | z")
    p.add_argument("--tmax", help="end of the output grid (> 0)")
    p.add_argument("--stride", help="output every N-th integration step")
    p.add_argument("--dt", help="integration step")
    p.add_argument("--method", help="exact-exponential | rk4")
    p.add_argument("--rtol", help="verification tolerance")
    p.add_argument("--out", help="output file (default: stdout)")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nhq", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate and emit CSV series")
    _add_common_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_ver = sub.add_parser("verify",
                           help="compare numerics against the closed forms")
    _add_common_flags(p_ver)
    p_ver.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="stack runs over a parameter")
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         help="nu | a2 | gamma | delta")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated parameter values")
    p_sweep.set_defaults(func=cmd_sweep)

    p_asy = sub.add_parser("asymptote", help="print long-time limits")
    _add_common_flags(p_asy)
    p_asy.set_defaults(func=cmd_asymptote)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"nhq: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SingularTraceError as exc:
        print(f"nhq: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except DegenerateLimitError as exc:
        print(f"nhq: degenerate limit: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
