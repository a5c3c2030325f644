"""Acceptance gate: one test per criterion, each printing a PASS line
with its runtime.  Tolerances are fixed here, not calibrated elsewhere.
"""

import functools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from gapseries import (
    ClassMembershipParams,
    ExponentSequence,
    IntervalSet,
    SeriesSpec,
    build_damping_gadget,
    build_witness_series,
    central_index_table,
    class_membership,
    criterion_exp_inverse,
    criterion_gap,
    criterion_inverse_shifted,
    criterion_plain_inverse,
    criterion_power_growth,
    criterion_scaled_inverse,
    criterion_scaled_inverse_shifted,
    damped_series,
    density_measure,
    domination_margin,
    exponential,
    geometric_exponents,
    h_log_measure,
    h_measure,
    identity,
    leading_term_residual,
    max_modulus,
    min_modulus,
    power,
    power_exponents,
    residual_threshold,
    transition_exceptional_set,
    transition_measure_bound,
    witness_measure_partials,
    witness_ratio,
)
from gapseries.cli import main as cli_main
from conftest import brute_force_max, random_spec

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

GEOM31 = geometric_exponents(2.0, 31)  # 0, 2, 4, ..., 2^30


def report(number, name, started, limit=None):
    elapsed = time.perf_counter() - started
    if limit is not None:
        assert elapsed < limit, f"criterion {number} exceeded {limit}s ({elapsed:.1f}s)"
    budget = "" if limit is None else f" ({elapsed:.2f}s < {limit}s)"
    print(f"ACCEPTANCE {number} {name}: PASS{budget}")


@functools.lru_cache(maxsize=1)
def seeded_instance():
    """The damping-gadget test instance: geometric exponents with seeded
    quadratic-decay coefficients lying in the plain growth class for the
    identity comparison function."""
    rng = np.random.default_rng(20260811)
    lam = GEOM31.values
    jitter = rng.uniform(0.0, 0.4, lam.size)
    phases = rng.uniform(0.0, 2.0 * math.pi, lam.size)
    spec = SeriesSpec(GEOM31, -lam**2 / 8.0 - lam + jitter, phases)
    gadget = build_damping_gadget(GEOM31, 1.0, 30, tail_tol=1e-8)
    return spec, gadget


@functools.lru_cache(maxsize=1)
def witness_instance():
    return build_witness_series(power_exponents(1.0, 1.0, 10_002), lambda t: t, 1.0, 10_001)


def test_c1_central_index_oracle_equivalence():
    started = time.perf_counter()
    rng = np.random.default_rng(777)
    for _ in range(200):
        spec = random_spec(rng, max_terms=50)
        table = central_index_table(spec)
        if table.jump_points.size:
            lo, hi = table.jump_points[0] - 5.0, table.jump_points[-1] + 5.0
        else:
            lo, hi = -5.0, 5.0
        xs = rng.uniform(lo, hi, 1000)
        got = table.index_at(xs)
        values = spec.log_moduli[None, :] + xs[:, None] * spec.exponents.values[None, :]
        n = values.shape[1]
        want = n - 1 - np.argmax(values[:, ::-1], axis=1)  # largest tied index
        assert np.array_equal(got, want)
    report(1, "central-index oracle equivalence", started, limit=10.0)


def test_c2_domination_margins():
    started = time.perf_counter()
    for q in (0.5, 1.0, 2.0):
        gadget = build_damping_gadget(GEOM31, q, 30, tail_tol=1e-8)
        for n in range(0, 31):
            for k in range(1, 31):
                margin = domination_margin(gadget, n, k)
                assert margin >= -1e-9 * (abs(n - k) + 1), (q, n, k, margin)
    report(2, "pairwise domination margins", started, limit=5.0)


def _safe_zone_points(spec, gadget, max_index, count):
    """Points inside the verified tiles (outside the transition set)."""
    table = central_index_table(damped_series(spec, gadget))
    seg, jumps = table.segment_indices, table.jump_points
    points = []
    for i in range(1, seg.size - 1):
        k = int(seg[i])
        if k > max_index:
            break
        a = jumps[i - 1] + gadget.shifts[k]
        b = jumps[i] + gadget.shifts[k]
        for t in (0.2, 0.5, 0.8):
            points.append((a + t * (b - a), k))
    return points[:count]


def test_c3_central_term_dominance_outside_transitions():
    started = time.perf_counter()
    spec, gadget = seeded_instance()

    # the instance lies in the plain growth class for Phi = id
    grid = np.linspace(4.5, 1.0e6, 50)
    membership = class_membership(spec, ClassMembershipParams(identity(), grid, x0=4.0), "D")
    assert membership.passed

    points = _safe_zone_points(spec, gadget, max_index=24, count=50)
    assert len(points) == 50
    exceptional = transition_exceptional_set(spec, gadget, 30)
    ys = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
    cap = residual_threshold(1.0)
    assert cap == pytest.approx(2.0 * math.exp(-1.0) / (1.0 - math.exp(-1.0)), abs=1e-15)
    for x, k in points:
        assert not exceptional.contains(x)
        assert brute_force_max(spec, x)[1] == k  # index carries over to the tiles
        worst = leading_term_residual(spec, x, ys, rel_tol=1e-9)
        assert worst <= cap + 1e-6, (x, k, worst)
    report(3, "leading-term dominance off the transition set", started, limit=30.0)


def test_c4_transition_measure_bound():
    started = time.perf_counter()
    spec, gadget = seeded_instance()
    e1 = transition_exceptional_set(spec, gadget, 25)
    assert all(a >= 0.0 for a, _ in e1)
    for h in (identity(), power(2.0)):
        measured = h_measure(h, e1)
        bound = transition_measure_bound(gadget, h, lambda t: t, 25)
        assert measured <= bound + 1e-8, (h.name, measured, bound)
    report(4, "transition-set measure bound", started)


def test_c5_witness_end_to_end():
    started = time.perf_counter()
    ws = witness_instance()

    # (a) rescaled growth-class membership with constants (1/2, 1/4)
    params = ClassMembershipParams(
        identity(), np.linspace(1.5, 30.0, 50), K1=0.5, K2=0.25, x0=1.0
    )
    membership = class_membership(ws.spec, params, "D1")
    assert membership.points.size == 50 and np.all(membership.points >= 1.0)
    assert membership.passed

    # (b) excess ratio on every sampled point of the first 30 intervals
    floor = 1.0 + math.exp(-1.0) - 1e-9
    gaps = ws.spec.exponents.gaps
    for n in range(1, 31):
        a = float(ws.switch_points[n])
        width = 1.0 / gaps[n - 1]
        for t in (0.0, 0.5, 1.0):
            assert witness_ratio(ws, a + t * width, rel_tol=1e-9) >= floor

    # (c) divergence witness: frozen oracle baselines (direct summation of
    # (switch_n + 1/gap_n)^2 - switch_n^2 with integer switch points)
    measure, lower = witness_measure_partials(ws, power(2.0), 10_000)
    assert measure[99] == 10002.0
    assert measure[9999] == 100000002.0
    assert lower[99] == 9902.0
    assert lower[9999] == 99990002.0
    assert measure[9999] >= 10.0 * measure[99]
    assert np.all(measure >= lower)
    report(5, "witness construction end-to-end", started, limit=60.0)


def test_c6_reduction_identity_bitwise():
    started = time.perf_counter()
    h = identity()
    families = [
        GEOM31,
        power_exponents(1.0, 1.0, 200),
        ExponentSequence(2.0 ** np.arange(40), "gap-power"),
        ExponentSequence(np.exp(np.arange(40.0)), "general"),
    ]
    for seq in families:
        n = len(seq) - 1
        base = criterion_gap(seq, n).terms
        for phi in (lambda t: t, lambda t: math.sqrt(1.0 + t)):
            for b in (0.1, 1.0, 10.0):
                reports = [
                    criterion_inverse_shifted(seq, h, phi, b, n),
                    criterion_scaled_inverse_shifted(seq, h, phi, b, n),
                    criterion_scaled_inverse(seq, h, phi, b, n),
                    criterion_power_growth(seq, h, 2.0, b, n),
                    criterion_exp_inverse(seq, h, phi, b, n),
                ]
                for rep in reports:
                    assert np.array_equal(rep.terms, base), (rep.name, b)
            assert np.array_equal(criterion_plain_inverse(seq, h, phi, n).terms, base)
    report(6, "identity-density reduction, bitwise", started)


def test_c7_radial_measure_substitution():
    started = time.perf_counter()
    rng = np.random.default_rng(1404)
    hs = (identity(), power(2.0), exponential())
    for _ in range(100):
        a, b = np.sort(rng.uniform(0.5, 6.0, 2))
        if b - a < 1e-4:
            b = a + 1e-4
        pairs = IntervalSet.from_pairs([(float(a), float(b))])
        image = pairs.log_image()
        for h in hs:
            lhs = h_log_measure(h, pairs, 1e-10)
            rhs = density_measure(lambda x: h.derivative(math.exp(x)), image, 1e-10)
            assert abs(lhs - rhs) <= 1e-8, (h.name, a, b, lhs, rhs)
    report(7, "radial/log measure substitution identity", started)


def test_c8_envelope_invariants_on_curated_configs(tmp_path):
    started = time.perf_counter()
    runs = [
        ("sweep", CONFIG_DIR / "geometric_damped_sweep.json"),
        ("gap-power", CONFIG_DIR / "two_term_gap_power.json"),
    ]
    checked = 0
    for command, config in runs:
        out = tmp_path / (config.stem + ".csv")
        assert cli_main([command, "--config", str(config), "--out", str(out), "--quiet"]) == 0
        lines = out.read_text().strip().split("\n")
        header = lines[0].split(",")
        idx = {name: header.index(name) for name in ("m_scaled", "M_scaled", "sum_scaled", "error")}
        for line in lines[1:]:
            if line.startswith("#"):
                continue
            cells = line.split(",")
            if cells[idx["error"]]:
                continue
            m = float(cells[idx["m_scaled"]])
            mx = float(cells[idx["M_scaled"]])
            s = float(cells[idx["sum_scaled"]])
            assert m <= mx + 1e-12 and mx <= s + 1e-12 and s >= 1.0 - 1e-12
            checked += 1
    assert checked > 0
    report(8, f"envelope invariants on {checked} sweep points", started)


def test_c9_gap_power_closed_forms():
    started = time.perf_counter()
    spec = SeriesSpec(ExponentSequence([0, 1], "gap-power"), np.zeros(2), complete=True)
    for r in (0.5, 1.0, 2.0):
        x = math.log(r)
        mx = max_modulus(spec, x)
        mn = min_modulus(spec, x)
        mu = math.exp(mx.log_mu)
        assert abs(mu - max(1.0, r)) <= 1e-9
        assert abs(mx.value * mu - (1.0 + r)) <= 1e-9
        assert abs(mn.value * mu - abs(1.0 - r)) <= 1e-9
    report(9, "two-term closed forms", started)
