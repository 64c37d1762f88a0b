"""Command-line front end.

Subcommands: ``bounds`` (bound tables for a preset or JSON family),
``sweep`` (delta/p sweeps in long format for plotting), ``check`` (the
acceptance suite), and ``export-scenario`` (write a preset as a state
JSON file).  Output is CSV or JSON with a fixed column order
(scenario, delta, p, bound_name, value, tightest, meta); identical
configuration and seed produce byte-identical files.

Exit codes: 0 success, 1 bad configuration, 2 computation error
(e.g. an RLD bound requested for a rank-deficient state).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import checks as checks_mod
from .bounds import BoundReport
from .errors import QmetroError
from .linalg import DEFAULT_DIM_CAP
from .logderiv import sld_analysis, tilde_fisher_im
from .report import ALL_BOUNDS, ReportConfig, build_report
from .scenarios import build_scenario, parse_scenario
from .states import evaluate, family_from_dict, family_to_dict
from .tensor import DEFAULT_ENUM_CAP

CSV_COLUMNS = ("scenario", "delta", "p", "bound_name", "value", "tightest", "meta")


class _ConfigError(Exception):
    """Invalid command-line/config-file input (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise _ConfigError(message)


def _parse_p_list(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out or any(p < 1 for p in out):
        raise _ConfigError(f"invalid p list {text!r}: need integers >= 1")
    return tuple(out)


def _parse_sweep(text: str) -> np.ndarray:
    try:
        start, stop, steps = text.split(":")
        grid = np.linspace(float(start), float(stop), int(steps))
    except ValueError as exc:
        raise _ConfigError(f"bad sweep spec {text!r}, expected start:stop:steps") from exc
    if grid.size < 2:
        raise _ConfigError("sweep needs at least 2 steps")
    return grid


def _fmt_value(v: float) -> str:
    return format(float(v), ".12g")


def _meta_str(meta: dict) -> str:
    clean = {}
    for k, v in meta.items():
        if isinstance(v, np.ndarray):
            continue
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        clean[k] = v
    return json.dumps(clean, sort_keys=True, separators=(",", ":"))


def _report_rows(scenario: str, delta: float, report: BoundReport) -> list[dict]:
    rows = []
    for e in report.entries:
        p_str = "" if e.p is None else str(e.p)
        rows.append(
            {
                "scenario": scenario,
                "delta": _fmt_value(delta),
                "p": p_str,
                "bound_name": e.name,
                "value": _fmt_value(e.value),
                "tightest": "true" if e.tightest else "false",
                "meta": _meta_str(dict(e.meta, kind=e.kind)),
            }
        )
    return rows


def _sort_rows(rows: list[dict]) -> list[dict]:
    def key(row):
        p = row["p"]
        if p == "":
            p_key = (2, 0)
        elif p == "inf":
            p_key = (1, 0)
        else:
            p_key = (0, int(p))
        return (float(row["delta"]), p_key, row["bound_name"])

    return sorted(rows, key=key)


def _write_rows(rows: list[dict], output: str | None, fmt: str) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise _ConfigError("config file must hold a JSON object")
    return data


def _merged(args: argparse.Namespace, cfg: dict, key: str, default=None):
    val = getattr(args, key, None)
    if val is not None:
        return val
    if key in cfg:
        return cfg[key]
    return default


def _resolve_family(args, cfg):
    preset = _merged(args, cfg, "preset")
    input_path = _merged(args, cfg, "input")
    delta = float(_merged(args, cfg, "delta", 0.0))
    if (preset is None) == (input_path is None):
        raise _ConfigError("exactly one of --preset or --input is required")
    if preset is not None:
        try:
            spec = parse_scenario(preset, delta=delta)
            family = build_scenario(spec)
        except QmetroError as exc:
            raise _ConfigError(str(exc)) from exc
        x0 = np.zeros(family.n)
        label = spec.label
    else:
        try:
            with open(input_path, "r", encoding="utf-8") as fh:
                family, x0 = family_from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError, QmetroError) as exc:
            raise _ConfigError(f"cannot read state JSON {input_path}: {exc}") from exc
        label = os.path.basename(input_path)
    return family, x0, label, delta


def _report_config(args, cfg, p_list, bounds) -> ReportConfig:
    env_cap = os.environ.get("QMETRO_MAX_DIM")
    dim_cap = int(_merged(args, cfg, "max_dim", int(env_cap) if env_cap else DEFAULT_DIM_CAP))
    return ReportConfig(
        bounds=bounds,
        p_list=p_list,
        nu=int(_merged(args, cfg, "nu", 1)),
        seed=int(_merged(args, cfg, "seed", 0)),
        mc_samples=int(_merged(args, cfg, "mc_samples", 100_000)),
        dim_cap=dim_cap,
        enum_cap=int(_merged(args, cfg, "enum_cap", DEFAULT_ENUM_CAP)),
    )


def cmd_bounds(args) -> int:
    cfg = _load_config_file(args.config)
    family, x0, label, delta = _resolve_family(args, cfg)
    p_list = _parse_p_list(str(_merged(args, cfg, "p", "1")))
    bounds = tuple(str(_merged(args, cfg, "bounds", "cp,tp,fbar")).split(","))
    unknown = set(bounds) - set(ALL_BOUNDS)
    if unknown:
        raise _ConfigError(f"unknown bounds {sorted(unknown)}; valid: {','.join(ALL_BOUNDS)}")
    config = _report_config(args, cfg, p_list, bounds)
    state = evaluate(family, x0)
    report = build_report(state, config)
    rows = _report_rows(label, delta, report)
    if bool(_merged(args, cfg, "cov_transforms", False)):
        rows.extend(_cov_transform_rows(label, delta, report, config.nu))
    rows = _sort_rows(rows)
    _write_rows(rows, _merged(args, cfg, "output"), _merged(args, cfg, "format", "csv"))
    return 0


def _cov_transform_rows(label: str, delta: float, report: BoundReport, nu: int) -> list[dict]:
    """Cauchy-Schwarz transforms: each Gamma upper bound gives a lower
    bound nu Tr[F_Q Cov] >= n^2 / gamma; with --nu the per-repetition
    trace Tr[F_Q Cov] >= value/nu is carried in the metadata."""
    rows = []
    n = report.n
    for e in report.entries:
        if e.kind != "upper" or e.value <= 0:
            continue
        value = n * n / e.value
        rows.append(
            {
                "scenario": label,
                "delta": _fmt_value(delta),
                "p": "" if e.p is None else str(e.p),
                "bound_name": f"nu_fq_cov_from_{e.name}",
                "value": _fmt_value(value),
                "tightest": "false",
                "meta": _meta_str(
                    {"kind": "lower", "target": "nu_tr_fq_cov", "nu": nu,
                     "per_repetition": value / nu}
                ),
            }
        )
    return rows


def cmd_sweep(args) -> int:
    cfg = _load_config_file(args.config)
    delta_sweep = _merged(args, cfg, "delta_sweep")
    p_list = _parse_p_list(str(_merged(args, cfg, "p", "1")))
    bounds = tuple(str(_merged(args, cfg, "bounds", "cp,tp")).split(","))
    unknown = set(bounds) - set(ALL_BOUNDS)
    if unknown:
        raise _ConfigError(f"unknown bounds {sorted(unknown)}; valid: {','.join(ALL_BOUNDS)}")
    preset = _merged(args, cfg, "preset")
    if preset is None:
        raise _ConfigError("sweep requires --preset")
    if delta_sweep is not None:
        deltas = [float(d) for d in _parse_sweep(str(delta_sweep))]
    else:
        deltas = [float(_merged(args, cfg, "delta", 0.0))]
    if len(deltas) == 1 and len(p_list) == 1:
        raise _ConfigError("sweep needs a delta sweep or more than one p")
    rows = []
    for delta in deltas:
        try:
            spec = parse_scenario(preset, delta=delta)
            family = build_scenario(spec)
        except QmetroError as exc:
            raise _ConfigError(str(exc)) from exc
        state = evaluate(family, np.zeros(family.n))
        config = _report_config(args, cfg, p_list, bounds)
        report = build_report(state, config)
        rows.extend(_report_rows(spec.label, delta, report))
        # Reference line: the QCRB/Holevo value n where the weak
        # commutative condition holds, else the Gamma_inf sandwich.
        _, fisher, tilde = sld_analysis(state)
        n = fisher.n
        from .bounds import gamma_inf_lower, gamma_inf_upper, saturation_check
        from .tensor import limit_fim

        weak = saturation_check(
            limit_fim(state, tilde), tilde_fisher_im(fisher)
        ).weak_commutative
        if weak:
            ref_entries = [("qcrb_holevo", float(n), "reference")]
        else:
            ref_entries = [
                ("gamma_inf_lower", gamma_inf_lower(fisher, n), "lower"),
                ("gamma_inf_upper", gamma_inf_upper(fisher, n), "upper"),
            ]
        for name, value, kind in ref_entries:
            rows.append(
                {
                    "scenario": spec.label,
                    "delta": _fmt_value(delta),
                    "p": "inf" if name.startswith("gamma_inf") else "",
                    "bound_name": name,
                    "value": _fmt_value(value),
                    "tightest": "false",
                    "meta": _meta_str({"kind": kind}),
                }
            )
    rows = _sort_rows(rows)
    _write_rows(rows, _merged(args, cfg, "output"), _merged(args, cfg, "format", "csv"))
    return 0


def cmd_check(args) -> int:
    results = checks_mod.run_checks(only=args.only)
    if not results:
        raise _ConfigError(f"no criteria match tag {args.only!r}")
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name}: {res.detail}")
        failed += 0 if res.passed else 1
    print(f"{len(results) - failed}/{len(results)} criteria passed")
    return 0 if failed == 0 else 2


def cmd_export_scenario(args) -> int:
    cfg = _load_config_file(args.config)
    preset = _merged(args, cfg, "preset")
    if preset is None:
        raise _ConfigError("export-scenario requires --preset")
    delta = float(_merged(args, cfg, "delta", 0.0))
    spec = parse_scenario(preset, delta=delta)
    family = build_scenario(spec)
    payload = json.dumps(family_to_dict(family), indent=2, sort_keys=True) + "\n"
    output = _merged(args, cfg, "output")
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", help="scenario id: qubit3, qutrit8, qutrit:1,2,5, ...")
    p.add_argument("--input", help="path to a state-family JSON document")
    p.add_argument("--delta", type=float, help="fixed offset of the preset state")
    p.add_argument("--p", help="comma list / ranges of copy counts, e.g. 1,2,4 or 1-10")
    p.add_argument("--bounds", help=f"comma subset of: {','.join(ALL_BOUNDS)}")
    p.add_argument("--nu", type=int, help="repetition count carried as metadata")
    p.add_argument("--seed", type=int, help="seed for Monte Carlo entries")
    p.add_argument("--mc-samples", dest="mc_samples", type=int, help="Monte Carlo sample count")
    p.add_argument("--max-dim", dest="max_dim", type=int, help="cap on d^p (env QMETRO_MAX_DIM)")
    p.add_argument("--enum-cap", dest="enum_cap", type=int, help="cap on exact T_p enumeration")
    p.add_argument("--output", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--config", help="JSON config file; explicit flags win")
    p.add_argument(
        "--cov-transforms",
        dest="cov_transforms",
        action="store_true",
        default=None,
        help="also emit Cauchy-Schwarz lower bounds on nu Tr[F_Q Cov]",
    )
    p.add_argument(
        "--error-json",
        dest="error_json",
        action="store_true",
        help="emit machine-readable errors on stdout",
    )


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmetro", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", help="compute bound tables at fixed delta")
    _add_common(p_bounds)
    p_bounds.set_defaults(fn=cmd_bounds)

    p_sweep = sub.add_parser("sweep", help="sweep over delta and/or p")
    _add_common(p_sweep)
    p_sweep.add_argument(
        "--delta-sweep", dest="delta_sweep", help="start:stop:steps grid for delta"
    )
    p_sweep.set_defaults(fn=cmd_sweep)

    p_check = sub.add_parser("check", help="run the acceptance criteria")
    p_check.add_argument("--only", help="run only criteria with this tag (e.g. paper-values)")
    p_check.add_argument("--error-json", dest="error_json", action="store_true")
    p_check.set_defaults(fn=cmd_check)

    p_export = sub.add_parser("export-scenario", help="write a preset as state JSON")
    p_export.add_argument("--preset", required=False)
    p_export.add_argument("--delta", type=float)
    p_export.add_argument("--output")
    p_export.add_argument("--config")
    p_export.add_argument("--error-json", dest="error_json", action="store_true")
    p_export.set_defaults(fn=cmd_export_scenario)
    return parser


def _emit_error(args, code: int, exc: Exception) -> int:
    if getattr(args, "error_json", False):
        payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"qmetro: error: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except _ConfigError as exc:
        print(f"qmetro: error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.fn(args)
    except _ConfigError as exc:
        return _emit_error(args, 1, exc)
    except QmetroError as exc:
        return _emit_error(args, 2, exc)


if __name__ == "__main__":
    sys.exit(main())
