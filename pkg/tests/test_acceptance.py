"""Acceptance gate: one test per headline guarantee of the package.

Each test emits a single pass/fail line through pytest's terminal reporter
(visible in a plain `pytest -v` run despite output capture) and then asserts.
"""

import json
import random
import time
from fractions import Fraction
from itertools import product
from math import comb
from pathlib import Path

import pytest

from cachedof import dofcalc, endtoend as ee, netlayer as nl, phylayer as ph
from cachedof.core import SystemParams

GOLDEN = Path(__file__).parent / "data" / "scheme2x2_golden.json"

_reporter = None


@pytest.fixture(autouse=True)
def _capture_reporter(request):
    global _reporter
    _reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    yield


def _report(num: int, label: str, ok: bool, detail: str = ""):
    verdict = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    line = f"[{verdict}] acceptance {num}/9: {label}{suffix}"
    if _reporter is not None:
        _reporter.write_line("")
        _reporter.write_line(line)
    else:
        print(line)
    assert ok, line


def test_1_corner_curve_2x4_exact():
    params = SystemParams(4, 2, 4, 2, 0)
    expected = {
        0: Fraction(5, 2),
        1: Fraction(9, 8),
        2: Fraction(7, 12),
        3: Fraction(1, 4),
        4: Fraction(0),
    }
    ok = all(dofcalc.reciprocal_corner(params, k) == v for k, v in expected.items())
    curve = dofcalc.dof_curve(params)
    ok = ok and dict(curve.corners) == {Fraction(k): v for k, v in expected.items()}
    ok = ok and curve.envelope.is_convex()
    slopes = curve.envelope.slopes()
    ok = ok and all(s <= 0 for s in slopes)
    _report(1, "reciprocal-DoF corners and convex non-increasing envelope", ok)


def test_2_gain_product_identity():
    ok = True
    n_checked = 0
    for n_files, kt, kr in product(range(1, 13), repeat=3):
        for kappa in range(kr + 1):
            if Fraction(kr, kappa + 1) > n_files:
                continue
            params = SystemParams(n_files, kt, kr, Fraction(n_files, kt),
                                  Fraction(kappa * n_files, kr))
            rc = dofcalc.reciprocal_corner(params, kappa)
            if rc == 0:
                # full caching: nothing is transmitted, the product is vacuous
                continue
            g = dofcalc.gain_decomposition(params, kappa)
            n_checked += 1
            if g.g_ia * g.g_lc * g.g_gc * rc != kr:
                ok = False
    _report(2, "alignment x local x global gain product equals K_r",
            ok and n_checked > 1000, f"{n_checked} tuples")


def test_3_gap_scans_within_bounds():
    full = dofcalc.gap_scan(30, 30, 30)
    ok_full = not full.violations and full.max_ratio <= Fraction(27, 2)
    sampled = dofcalc.gap_scan_sample(100, 100, 100, 10_000, seed=0, smooth_cut=True)
    ok_sample = not sampled.violations and float(sampled.max_ratio) <= 4.2
    _report(3, "achievable-vs-cut-set gap bounded (full box 13.5, sampled 4.2)",
            ok_full and ok_sample,
            f"full max {float(full.max_ratio):.4f}, sampled max {float(sampled.max_ratio):.4f}")


def test_4_stream_share_convergence():
    ok = True
    ns = [1, 2, 4, 8, 16, 32, 64, 128, 200]
    for kt, kr in ((2, 2), (2, 4), (3, 3)):
        for sigma in range(1, kr + 1):
            target = Fraction(1, kt * comb(kr - 1, sigma - 1) + comb(kr - 1, sigma))
            for pick in (0, 1):
                errs = [abs(ph.delta_streams(kt, kr, sigma, n)[pick] - target) for n in ns]
                if any(b > a for a, b in zip(errs, errs[1:])):
                    ok = False
                # within one percentage point of the target stream share
                if errs[-1] > Fraction(1, 100):
                    ok = False
    _report(4, "per-message stream shares converge monotonically to the target", ok)


def test_5_alignment_and_decode_certificates():
    t0 = time.time()
    grid = [(kt, kr) for kt in range(1, 9) for kr in range(1, 9) if kt * kr <= 8]
    n_align = n_rank = n_round = n_fail = 0
    for kt, kr in grid:
        for sigma in range(1, kr + 1):
            for n in (1, 2):
                if ph.gamma_of(kt, kr, sigma) == 0 and n > 1:
                    # no cross interference to align: the plan has no depth axis
                    continue
                t_n = ph.block_length(kt, kr, sigma, n)
                for trial in range(100):
                    channel = ph.ChannelRealization.draw(
                        kr, kt, t_n, seed=hash((0, kt, kr, sigma, n, trial))
                    )
                    plan = ph.build_plan(kt, kr, sigma, n, channel)
                    n_align += 1
                    if not ph.verify_alignment(plan, channel).ok:
                        n_fail += 1
                        continue
                    rng = random.Random(f"msgs:{kt},{kr},{sigma},{n},{trial}")
                    messages = {
                        (s, j): [rng.randrange(-9, 10) for _ in range(plan.stream_count(j))]
                        for s in plan.subsets
                        for j in range(1, kt + 1)
                    }
                    y = ph.transmit_receive(plan, channel, messages)
                    for k in range(1, kr + 1):
                        n_rank += 1
                        if not ph.build_psi(plan, channel, k).full_rank:
                            n_fail += 1
                            continue
                        decoded = ph.decode_at(plan, channel, k, y[k])
                        n_round += 1
                        if any(list(v) != messages[key] for key, v in decoded.items()):
                            n_fail += 1
    _report(5, "alignment, full-rank and exact round-trip certificates on the small grid",
            n_fail == 0 and n_align == 6400 and n_rank == 27200 and n_round == 27200,
            f"{n_align + n_rank} certificates, {n_fail} failures, {time.time() - t0:.0f}s")


def test_6_network_layer_exhaustion():
    ok = True
    n_decodes = 0
    for n_files, kt, kr in product(range(1, 5), range(1, 3), range(1, 5)):
        for kappa in range(kr + 1):
            if (kappa * n_files) % kr:
                continue
            params = SystemParams(n_files, kt, kr, Fraction(n_files, kt),
                                  Fraction(kappa * n_files, kr))
            library = nl.Library.random(n_files, nl.min_file_bits(params), seed=11)
            scheme = nl.place(params, library)
            for demand in product(range(1, n_files + 1), repeat=kr):
                payloads = nl.deliver(scheme, demand)
                if payloads.sum_load != Fraction(kr - kappa, kappa + 1):
                    ok = False
                for i in range(1, kr + 1):
                    n_decodes += 1
                    if nl.decode(scheme, payloads, i) != library.file(demand[i - 1]):
                        ok = False
    _report(6, "exhaustive bit-exact decode with sum load met with equality",
            ok, f"{n_decodes} decodes")


def test_7_2x2_schemes_tables_loads_and_bound():
    golden = json.loads(GOLDEN.read_text())
    ok = True
    loads = {"M0": Fraction(2), "M13": Fraction(4, 3), "M45": Fraction(4, 5), "M2": Fraction(0)}
    memories = {"M0": Fraction(0), "M13": Fraction(1, 3), "M45": Fraction(4, 5), "M2": Fraction(2)}
    for corner in nl.CORNERS:
        scheme = nl.scheme_2x2(corner)
        if nl.scheme_2x2_table(scheme) != golden[corner]:
            ok = False
        if scheme.sum_load != loads[corner]:
            ok = False
        for pair in product("AB", repeat=2):
            for rx in (1, 2):
                if nl.decode_2x2(scheme, pair, rx) is None:
                    ok = False
        if dofcalc.dof_2x2_curve(memories[corner]) != Fraction(3, 4) * loads[corner]:
            ok = False
    for k in range(201):
        x = Fraction(k, 100)
        if dofcalc.net2x2_lower_bound(x) != dofcalc.net2x2_achievable_load(x):
            ok = False
    _report(7, "2x2 golden tables, corner loads, curve and matching converse", ok)


def test_8_2x2_improvement_factor():
    xs = {Fraction(k, 100) for k in range(201)}
    xs |= {x for x, _ in dofcalc.CORNERS_2X2}
    xs |= {Fraction(0), Fraction(1), Fraction(2)}
    best = max(
        (dofcalc.dof_2x2_baseline(x) / dofcalc.dof_2x2_curve(x), x)
        for x in sorted(xs)
        if dofcalc.dof_2x2_curve(x) != 0
    )
    _report(8, "separation baseline over improved 2x2 curve peaks at exactly 7/6",
            best[0] == Fraction(7, 6), f"argmax m_rx = {best[1]}")


def test_9_end_to_end_runs_and_accounting():
    ok = True
    params = SystemParams(4, 2, 4, 2, 1)
    for seed in range(20):
        library = nl.Library.random(4, nl.min_file_bits(params), seed=seed)
        report = ee.run_end_to_end(params, library, (1, 2, 3, 4), n=1, seed=seed)
        if not report.all_ok:
            ok = False
    small = SystemParams(2, 2, 2, 1, 0)
    acct = ee.accounting_reciprocal(small, 8)
    ok = ok and acct == Fraction(26, 17)
    ok = ok and abs(acct - Fraction(3, 2)) / Fraction(3, 2) < Fraction(1, 20)
    lib = nl.Library.random(2, nl.min_file_bits(small) * 4, seed=3)
    run = ee.run_end_to_end(small, lib, (2, 1), n=8, seed=3)
    ok = ok and run.all_ok and run.accounting == acct and run.target == Fraction(3, 2)
    _report(9, "20-channel end-to-end recovery and depth-8 accounting within 5%", ok)
