"""Batch front-end: sweeps, criteria tables, constructions, margin grids.

Exit codes: 0 success, 1 config error, 2 numeric certification failure,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import constructions as cons
from . import criteria as crit
from .config import RunConfig, function_from_spec, load_config, series_from_config
from .errors import (
    ConfigError,
    DomainError,
    GapSeriesError,
    HorizonExceeded,
    QuadratureError,
    TailNotCertified,
)
from .measure import IntervalSet, MonotoneFn, h_measure, h_log_measure, log_measure
from .series import PhaseSearchOpts, SeriesSpec, log_maximal_term, max_modulus, min_modulus, sum_modulus

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CERTIFICATION = 2
EXIT_IO = 3


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list], footers: list[list] | None = None) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    for foot in footers or []:
        lines.append(",".join(_fmt(v) for v in foot))
    path.write_text("\n".join(lines) + "\n")


def _detected_set(flagged: list[tuple[bool, float]], step: float) -> IntervalSet:
    pairs = [(x, x + step) for ok, x in flagged if ok]
    return IntervalSet.from_pairs(pairs).coalesce()


def _measure_footers(detected: IntervalSet, h: MonotoneFn, quad_tol: float) -> list[list]:
    def guarded(fn):
        try:
            return fn()
        except (DomainError, QuadratureError):
            return math.nan

    return [
        ["#measure", "lebesgue", detected.total_length],
        ["#measure", "log", guarded(lambda: log_measure(detected))],
        ["#measure", "h", guarded(lambda: h_measure(h, detected))],
        ["#measure", "h_log", guarded(lambda: h_log_measure(h, detected, quad_tol))],
    ]


def _sweep_rows(spec: SeriesSpec, xs: np.ndarray, cfg: RunConfig):
    tol = cfg.tolerances
    opts = PhaseSearchOpts(
        grid_points=tol.grid_points, phase_tol=tol.phase_tol, rel_tol=tol.rel_tol, delta=tol.delta
    )
    rows = []
    flagged = []
    for x in xs:
        x = float(x)
        try:
            top = log_maximal_term(spec, x)
            mx = max_modulus(spec, x, opts)
            mn = min_modulus(spec, x, opts)
            total = sum_modulus(spec, x, tol.rel_tol, tol.delta)
            ratio_mu = mx.value - 1.0
            # a minimum below the evaluation's own error bar is numerically zero
            ratio_m = math.inf if mn.value <= tol.rel_tol else mx.value / mn.value - 1.0
            flag = ratio_mu > cfg.beta or ratio_m > cfg.beta
            rows.append(
                [x, top.log_value, top.index, mx.value, mn.value, total, ratio_mu, ratio_m, int(flag), ""]
            )
            flagged.append((flag, x))
        except GapSeriesError as exc:
            rows.append([x, math.nan, -1, math.nan, math.nan, math.nan, math.nan, math.nan, 0, type(exc).__name__])
            flagged.append((False, x))
    return rows, flagged


SWEEP_HEADER = [
    "x", "log_mu", "nu", "M_scaled", "m_scaled", "sum_scaled",
    "ratio_M_mu", "ratio_M_m", "flag", "error",
]


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    if cfg.sweep is None:
        raise ConfigError("sweep command needs a 'sweep' section")
    spec = series_from_config(cfg.series, cfg.seed)
    x_min, x_max, step = cfg.sweep
    xs = np.arange(x_min, x_max + step * 0.5, step)
    rows, flagged = _sweep_rows(spec, xs, cfg)
    detected = _detected_set(flagged, step)
    _write_csv(out, SWEEP_HEADER, rows, _measure_footers(detected, cfg.h, cfg.tolerances.quad_tol))
    return EXIT_OK


def _phi_inverse(phi: MonotoneFn):
    if phi.inverse is not None:
        return phi.inverse
    return lambda t: phi.inv(t)


def cmd_criteria(cfg: RunConfig, out: Path) -> int:
    spec_exponents = series_from_config(cfg.series, cfg.seed).exponents
    n_terms = int(cfg.criteria.get("n_terms", len(spec_exponents) - 1))
    alpha = float(cfg.criteria.get("alpha", 1.0))
    h = cfg.h
    inv = _phi_inverse(cfg.phi)

    def checkpoints(report):
        cps = [c for c in (2**j - 1 for j in range(1, 64)) if c < report.terms.size]
        if report.terms.size - 1 not in cps:
            cps.append(report.terms.size - 1)
        return cps

    rows = []

    def emit(report):
        for c in checkpoints(report):
            sub = report.truncated(c + 1)
            last_ratio = float(sub.block_ratios[-1]) if sub.block_ratios.size else math.nan
            rows.append(
                [report.name, "" if report.b is None else report.b, c + 1,
                 float(sub.partial_sums[-1]), last_ratio, sub.verdict]
            )

    emit(crit.criterion_gap(spec_exponents, n_terms))
    for b in cfg.b_grid:
        emit(crit.criterion_inverse_shifted(spec_exponents, h, inv, b, n_terms))
        emit(crit.criterion_scaled_inverse_shifted(spec_exponents, h, inv, b, n_terms))
        emit(crit.criterion_scaled_inverse(spec_exponents, h, inv, b, n_terms))
        emit(crit.criterion_power_growth(spec_exponents, h, alpha, b, n_terms))
        if spec_exponents.is_integral():
            emit(crit.criterion_exp_inverse(spec_exponents, h, inv, b, n_terms))
    emit(crit.criterion_plain_inverse(spec_exponents, h, inv, n_terms))

    _write_csv(out, ["condition", "b", "n_terms", "partial_sum", "block_ratio", "verdict"], rows)
    return EXIT_OK


def cmd_construct(cfg: RunConfig, out: Path) -> int:
    spec = series_from_config(cfg.series, cfg.seed)
    section = cfg.construct
    b = float(section.get("b", 1.0))
    n_terms = int(section.get("n_terms", len(spec.exponents) - 1))
    depth = int(section.get("depth", min(30, n_terms - 1)))
    phi1 = function_from_spec(section.get("phi1", {"name": "identity"}), "construct.phi1")

    ws = cons.build_witness_series(spec.exponents, phi1.value, b, n_terms)
    exceptional = cons.witness_exceptional_set(ws, depth)
    measure_partials, lower_partials = cons.witness_measure_partials(ws, cfg.h, depth)

    series_dump = {
        "exponents": ws.spec.exponents.values.tolist(),
        "log_moduli": ws.spec.log_moduli.tolist(),
        "switch_points": [None if math.isnan(v) else v for v in ws.switch_points],
        "increments": [None if math.isnan(v) else v for v in ws.increments],
        "excess": ws.excess,
        "b": ws.b,
    }
    out.with_suffix(".series.json").write_text(json.dumps(series_dump, indent=2) + "\n")

    gaps = ws.spec.exponents.gaps
    exc_rows = [
        [n, float(ws.switch_points[n]), float(ws.switch_points[n] + 1.0 / gaps[n - 1]), 1.0 / gaps[n - 1]]
        for n in range(1, depth + 1)
    ]
    _write_csv(out.with_suffix(".exceptional.csv"), ["n", "a", "b", "length"], exc_rows)

    threshold = 1.0 + ws.excess
    verify_rows = []
    for n in range(1, depth + 1):
        a = float(ws.switch_points[n])
        width = 1.0 / gaps[n - 1]
        for t, label in ((0.0, "left"), (0.5, "mid"), (1.0, "right")):
            x = a + t * width
            ratio = cons.witness_ratio(ws, x, cfg.tolerances.rel_tol)
            verify_rows.append([n, label, x, ratio, threshold, int(ratio >= threshold - 1e-9)])
    _write_csv(
        out.with_suffix(".verify.csv"),
        ["n", "point", "x", "ratio", "threshold", "pass"],
        verify_rows,
    )

    hm_rows = [
        [n + 1, float(lower_partials[n]), float(measure_partials[n])]
        for n in range(depth)
    ]
    _write_csv(
        out.with_suffix(".hmeas.csv"),
        ["depth", "lower_partial", "measure_partial"],
        hm_rows,
        [["#measure", "h_total", h_measure(cfg.h, exceptional)]],
    )
    return EXIT_OK


def cmd_lemma1(cfg: RunConfig, out: Path) -> int:
    spec = series_from_config(cfg.series, cfg.seed)
    section = cfg.lemma
    q_values = [float(q) for q in section.get("q_values", (0.5, 1.0, 2.0))]
    n_terms = int(section.get("n_terms", len(spec.exponents) - 1))
    max_index = int(section.get("max_index", n_terms))
    tail_tol = float(section.get("tail_tol", cfg.tolerances.tail_tol))

    rows = []
    for q in q_values:
        gadget = cons.build_damping_gadget(spec.exponents, q, n_terms, tail_tol)
        for n in range(0, max_index + 1):
            for k in range(1, max_index + 1):
                margin = cons.domination_margin(gadget, n, k)
                tolerance = gadget.inner_tail_error * (abs(n - k) + 1)
                rows.append([q, n, k, margin, tolerance, int(margin >= -tolerance)])
    _write_csv(out, ["q", "n", "k", "margin", "tolerance", "pass"], rows)
    return EXIT_OK


def cmd_gap_power(cfg: RunConfig, out: Path) -> int:
    spec = series_from_config(cfg.series, cfg.seed)
    if not spec.exponents.is_integral():
        raise ConfigError("gap-power command needs integer exponents")
    section = cfg.gap_power
    try:
        r_min = float(section["r_min"])
        r_max = float(section["r_max"])
        r_points = int(section["r_points"])
    except KeyError as exc:
        raise ConfigError(f"gap_power section is missing {exc}") from exc
    if not (0 < r_min < r_max) or r_points < 2:
        raise ConfigError("need 0 < r_min < r_max and r_points >= 2")

    rs = np.linspace(r_min, r_max, r_points)
    tol = cfg.tolerances
    opts = PhaseSearchOpts(
        grid_points=tol.grid_points, phase_tol=tol.phase_tol, rel_tol=tol.rel_tol, delta=tol.delta
    )
    rows = []
    flagged_pairs = []
    for r in rs:
        r = float(r)
        x = math.log(r)
        try:
            top = log_maximal_term(spec, x)
            mx = max_modulus(spec, x, opts)
            mn = min_modulus(spec, x, opts)
            total = sum_modulus(spec, x, tol.rel_tol, tol.delta)
            ratio_mu = mx.value - 1.0
            ratio_m = math.inf if mn.value <= tol.rel_tol else mx.value / mn.value - 1.0
            flag = ratio_mu > cfg.beta or ratio_m > cfg.beta
            clac_ok = int(top.log_value >= x * cfg.phi.value(x)) if x > 0 else ""
            rows.append([r, top.log_value, top.index, mx.value, mn.value, total, ratio_mu, ratio_m, int(flag), clac_ok, ""])
            flagged_pairs.append((flag, r))
        except GapSeriesError as exc:
            rows.append([r, math.nan, -1, math.nan, math.nan, math.nan, math.nan, math.nan, 0, "", type(exc).__name__])
            flagged_pairs.append((False, r))

    r_step = float(rs[1] - rs[0])
    detected = _detected_set(flagged_pairs, r_step)
    footers = _measure_footers(detected, cfg.h, tol.quad_tol)
    if detected:
        try:
            from .measure import density_measure

            image = detected.log_image()
            footers.append(
                ["#measure", "h_image",
                 density_measure(lambda t: cfg.h.derivative(math.exp(t)), image, tol.quad_tol)]
            )
        except (DomainError, QuadratureError):
            footers.append(["#measure", "h_image", math.nan])
    else:
        footers.append(["#measure", "h_image", 0.0])
    inv = _phi_inverse(cfg.phi)
    n_terms = len(spec.exponents) - 1
    for b in cfg.b_grid:
        rep = crit.criterion_exp_inverse(spec.exponents, cfg.h, inv, b, n_terms)
        footers.append(["#cond88", b, rep.total, rep.verdict])

    header = ["r", "log_mu", "nu", "M_scaled", "m_scaled", "sum_scaled",
              "ratio_M_mu", "ratio_M_m", "flag", "clac1_ok", "error"]
    _write_csv(out, header, rows, footers)
    return EXIT_OK


_COMMANDS = {
    "sweep": cmd_sweep,
    "criteria": cmd_criteria,
    "construct": cmd_construct,
    "lemma1": cmd_lemma1,
    "gap-power": cmd_gap_power,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gapseries",
        description="Maximal-term asymptotics, exceptional sets and their measures for entire gap series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--out", default=None, help="output path (overrides config 'output')")
        p.add_argument("--seed", type=int, default=None, help="seed for random coefficient generation")
        p.add_argument("--quiet", action="store_true", help="suppress the completion note")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = RunConfig(**{**cfg.__dict__, "seed": args.seed})
        out = args.out or cfg.output
        if out is None:
            raise ConfigError("no output path: pass --out or set 'output' in the config")
        code = _COMMANDS[args.command](cfg, Path(out))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HorizonExceeded, TailNotCertified, QuadratureError) as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except GapSeriesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not args.quiet:
        print(f"{args.command}: wrote {out}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
