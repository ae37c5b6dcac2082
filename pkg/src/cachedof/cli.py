"""Command-line front end: curves, gains, bounds, gap scans, verification
suites and end-to-end runs, with deterministic CSV/JSON/SVG output."""

from __future__ import annotations

import json
import os
import sys
from fractions import Fraction
from itertools import product
from math import comb

import click

from . import dofcalc, endtoend, netlayer, phylayer
from .core import SystemParams, as_fraction


def _resolve_seed(seed: int) -> int:
    env = os.environ.get("CACHEDOF_SEED")
    return int(env) if env else seed


def _emit(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _csv(header: list[str], rows: list[list]) -> str:
    def cell(v):
        if isinstance(v, Fraction):
            return str(v)
        if isinstance(v, float):
            return repr(v)
        return str(v)

    lines = [",".join(header)]
    lines += [",".join(cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _frac_cols(x: Fraction) -> list:
    return [x, float(x)]


def _svg_lines(series: dict, xlabel: str, ylabel: str, width=640, height=420) -> str:
    """Minimal multi-polyline SVG; series maps label -> [(x, y), ...]."""
    pad = 50
    pts = [p for line in series.values() for p in line]
    xs = [float(x) for x, _ in pts]
    ys = [float(y) for _, y in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def sx(x):
        return pad + (float(x) - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (float(y) - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height-pad}" x2="{width-pad}" y2="{height-pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height-pad}" stroke="black"/>',
        f'<text x="{width//2}" y="{height-10}" text-anchor="middle" font-size="13">{xlabel}</text>',
        f'<text x="14" y="{height//2}" font-size="13" transform="rotate(-90 14 {height//2})" text-anchor="middle">{ylabel}</text>',
    ]
    for k, (label, line) in enumerate(series.items()):
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in line)
        color = colors[k % len(colors)]
        parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{width-pad+4}" y="{pad+16*k+10}" font-size="11" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


@click.group()
def main():
    """Cache-aided interference network calculator and verifier."""


# ---------------------------------------------------------------------------


@main.command()
@click.option("--n", "n_files", type=int, required=True, help="library size N")
@click.option("--kt", type=int, required=True)
@click.option("--kr", type=int, required=True)
@click.option("--mt", type=str, default=None, help="transmitter cache (files); default N/Kt")
@click.option("--at", "at_mr", type=str, default=None, help="evaluate at a single m_r")
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "svg"]), default="csv")
def dof(n_files, kt, kr, mt, at_mr, out, fmt):
    """Reciprocal-DoF curve over receiver cache size: corners plus envelope."""
    mt_val = as_fraction(mt) if mt else Fraction(n_files, kt)
    params = SystemParams(n_files, kt, kr, mt_val, Fraction(0))
    curve = dofcalc.dof_curve(params)
    if at_mr is not None:
        xs = [as_fraction(at_mr)]
    else:
        bps = [x for x, _ in curve.envelope.breakpoints]
        mids = [(a + b) / 2 for a, b in zip(bps, bps[1:])]
        xs = sorted(set(x for x, _ in curve.corners) | set(mids))
    rows = []
    for x in xs:
        r = curve(x)
        d = Fraction(0) if r == 0 else 1 / r
        rows.append(_frac_cols(x) + _frac_cols(r) + _frac_cols(d))
    header = ["m_r", "m_r_dec", "reciprocal_d", "reciprocal_d_dec", "d", "d_dec"]
    if fmt == "csv":
        _emit(_csv(header, rows), out)
    elif fmt == "json":
        _emit(json.dumps([dict(zip(header, [str(v) for v in r])) for r in rows], indent=2) + "\n", out)
    else:
        series = {"1/DoF": [(x, curve(x)) for x in xs]}
        _emit(_svg_lines(series, "m_r", "reciprocal DoF"), out)


@main.command()
@click.option("--axis", type=click.Choice(["mr", "kr", "kt"]), default="mr")
@click.option("--n", "n_files", type=int, required=True)
@click.option("--kt", type=int, default=2)
@click.option("--kr", type=int, default=2)
@click.option("--mr", type=str, default="0", help="fixed m_r (corner grid) for kr/kt sweeps")
@click.option("--to", "upper", type=int, default=None, help="sweep upper limit for kr/kt")
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "svg"]), default="csv")
def gains(axis, n_files, kt, kr, mr, upper, out, fmt):
    """Alignment / local / global caching gain decomposition along one axis."""
    header = ["axis", "g_ia", "g_lc", "g_gc", "sum_dof", "regime"]
    rows = []

    def row_for(params, kappa, axis_val):
        if Fraction(params.n_rx, kappa + 1) <= params.n_files:
            g = dofcalc.gain_decomposition(params, kappa)
            return [axis_val, g.g_ia, g.g_lc, g.g_gc, g.sum_dof, "main"]
        pg = dofcalc.partition_gains(
            params.with_m_rx(Fraction(kappa * params.n_files, params.n_rx))
        )
        return [axis_val, pg.g_ia, pg.g_lc if pg.g_lc is not None else "",
                pg.g_gc, pg.sum_dof if pg.sum_dof is not None else "", "partition"]

    if axis == "mr":
        params = SystemParams(n_files, kt, kr, Fraction(n_files, kt), 0)
        for kappa in range(kr):
            rows.append(row_for(params, kappa, Fraction(kappa * n_files, kr)))
    else:
        mr_frac = as_fraction(mr)
        hi = upper if upper is not None else 12
        lo = 2 if axis == "kt" else 1
        for v in range(lo, hi + 1):
            this_kt = v if axis == "kt" else kt
            this_kr = v if axis == "kr" else kr
            kappa = Fraction(this_kr) * mr_frac / n_files
            if kappa.denominator != 1:
                continue
            params = SystemParams(n_files, this_kt, this_kr, Fraction(n_files, this_kt), mr_frac)
            rows.append(row_for(params, int(kappa), v))
    if fmt == "csv":
        _emit(_csv(header, rows), out)
    elif fmt == "json":
        _emit(json.dumps([dict(zip(header, [str(v) for v in r])) for r in rows], indent=2) + "\n", out)
    else:
        series = {
            name: [(r[0], r[i]) for r in rows if r[i] != ""]
            for i, name in ((1, "g_ia"), (2, "g_lc"), (3, "g_gc"))
        }
        _emit(_svg_lines(series, axis, "gain"), out)


@main.command(name="phy-dof")
@click.option("--kt", type=int, required=True)
@click.option("--kr", type=int, required=True)
@click.option("--sigma", type=int, required=True)
@click.option("--depth", type=int, default=None, help="emit the delta convergence table up to this n")
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def phy_dof(kt, kr, sigma, depth, out, fmt):
    """Per-message DoF of the multiple multicast X-channel, optionally vs depth n."""
    target = dofcalc.phy_dof_optimal(kt, kr, sigma)
    if depth is None:
        header = ["per_message_dof", "per_message_dof_dec", "sum_dof", "sum_dof_dec"]
        rows = [_frac_cols(target) + _frac_cols(dofcalc.phy_sum_dof(kt, kr, sigma))]
    else:
        header = ["n", "delta_1", "delta_2", "target"]
        ns = []
        n = 1
        while n < depth:
            ns.append(n)
            n *= 2
        ns.append(depth)
        rows = []
        for n in ns:
            d1, d2 = phylayer.delta_streams(kt, kr, sigma, n)
            rows.append([n, d1, d2, target])
    if fmt == "csv":
        _emit(_csv(header, rows), out)
    else:
        _emit(json.dumps([dict(zip(header, [str(v) for v in r])) for r in rows], indent=2) + "\n", out)


@main.command()
@click.option("--n", "n_files", type=int, required=True)
@click.option("--kt", type=int, required=True)
@click.option("--kr", type=int, required=True)
@click.option("--mr", type=str, default=None, help="single m_r; default: breakpoint grid")
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def bounds(n_files, kt, kr, mr, out, fmt):
    """Cut-set converse vs achievable envelope (both reciprocal DoF)."""
    base = SystemParams(n_files, kt, kr, Fraction(n_files, kt), 0)
    curve = dofcalc.dof_curve(base)
    if mr is not None:
        xs = [as_fraction(mr)]
    else:
        hull, breaks = dofcalc._upper_envelope(
            dofcalc._cutset_lines(n_files, kt, kr), Fraction(0), Fraction(n_files)
        )
        xs = sorted({x for x, _ in curve.envelope.breakpoints} | set(breaks))
    rows = []
    for x in xs:
        cut = dofcalc.cutset_bound(base.with_m_rx(x))
        env = curve(x)
        ratio = env / cut if cut > 0 else ""
        rows.append(_frac_cols(x) + _frac_cols(cut) + _frac_cols(env) + [ratio])
    header = ["m_r", "m_r_dec", "cutset", "cutset_dec", "envelope", "envelope_dec", "ratio"]
    if fmt == "csv":
        _emit(_csv(header, rows), out)
    else:
        _emit(json.dumps([dict(zip(header, [str(v) for v in r])) for r in rows], indent=2) + "\n", out)


@main.command(name="gap-scan")
@click.option("--max", "box", type=int, default=30, help="scan limit for N, Kt, Kr")
@click.option("--trials", type=int, default=None, help="sample this many tuples instead of all")
@click.option("--seed", type=int, default=0)
@click.option("--smooth-cut", is_flag=True,
              help="use the smoothed (un-floored) cut terms of the headline gap figure")
@click.option("--out", type=click.Path(), default=None)
def gap_scan(box, trials, seed, smooth_cut, out):
    """Achievability / cut-set ratio scan; exit 1 if the 13.5 bound is violated."""
    seed = _resolve_seed(seed)
    if trials:
        report = dofcalc.gap_scan_sample(box, box, box, trials, seed, smooth_cut=smooth_cut)
    else:
        report = dofcalc.gap_scan(box, box, box, smooth_cut=smooth_cut)
    doc = {
        "description": report.description,
        "n_tuples": report.n_tuples,
        "n_grid_points": report.n_points,
        "max_ratio": str(report.max_ratio),
        "max_ratio_dec": float(report.max_ratio),
        "argmax": [str(v) for v in report.argmax] if report.argmax else None,
        "violations": [[str(v) for v in w] for w in report.violations],
        "bound": 13.5,
    }
    _emit(json.dumps(doc, indent=2) + "\n", out)
    if report.violations or report.max_ratio > Fraction(27, 2):
        sys.exit(1)


# ---------------------------------------------------------------------------
# Verification suites


def _verify_net() -> dict:
    failures = []
    n_checks = 0
    for n_files, kt, kr in product(range(1, 5), range(1, 3), range(1, 5)):
        for kappa in range(kr + 1):
            if (kappa * n_files) % kr:
                continue
            params = SystemParams(n_files, kt, kr, Fraction(n_files, kt),
                                  Fraction(kappa * n_files, kr))
            f = netlayer.min_file_bits(params)
            library = netlayer.Library.random(n_files, f, seed=7)
            scheme = netlayer.place(params, library)
            for demand in product(range(1, n_files + 1), repeat=kr):
                payloads = netlayer.deliver(scheme, demand)
                if payloads.sum_load != Fraction(kr - kappa, kappa + 1):
                    failures.append(("load", n_files, kt, kr, kappa, demand))
                for i in range(1, kr + 1):
                    n_checks += 1
                    if netlayer.decode(scheme, payloads, i) != library.file(demand[i - 1]):
                        failures.append(("decode", n_files, kt, kr, kappa, demand, i))
    return {"suite": "net", "checks": n_checks, "failures": failures}


PHY_GRID_SMALL = ((2, 2), (2, 3), (3, 2), (2, 4))
PHY_GRID_FULL = tuple(
    (kt, kr) for kt in range(1, 9) for kr in range(1, 9) if kt * kr <= 8
)


def _verify_phy(trials: int, seed: int, grid, depths=(1, 2), mode="exact") -> dict:
    failures = []
    n_certs = 0
    for kt, kr in grid:
        for sigma in range(1, kr + 1):
            for n in depths:
                if phylayer.gamma_of(kt, kr, sigma) == 0 and n > min(depths):
                    continue  # no interference to align: the plan is depth-independent
                t_n = phylayer.block_length(kt, kr, sigma, n)
                for trial in range(trials):
                    ch = phylayer.ChannelRealization.draw(
                        kr, kt, t_n, seed=hash((seed, kt, kr, sigma, n, trial)), mode=mode
                    )
                    plan = phylayer.build_plan(kt, kr, sigma, n, ch)
                    cert = phylayer.verify_alignment(plan, ch)
                    if not cert.ok:
                        failures.append(("alignment", kt, kr, sigma, n, trial, cert.witness))
                    for k in range(1, kr + 1):
                        n_certs += 1
                        psi = phylayer.build_psi(plan, ch, k)
                        if not psi.full_rank:
                            failures.append(("rank", kt, kr, sigma, n, trial, k))
    return {"suite": "phy", "certificates": n_certs, "failures": failures}


def _verify_2x2() -> dict:
    failures = []
    expected_loads = {"M0": Fraction(2), "M13": Fraction(4, 3),
                      "M45": Fraction(4, 5), "M2": Fraction(0)}
    for corner in netlayer.CORNERS:
        scheme = netlayer.scheme_2x2(corner)
        if scheme.sum_load != expected_loads[corner]:
            failures.append(("load", corner))
        if not netlayer.tx_feasible_2x2(scheme):
            failures.append(("tx-span", corner))
        for d1 in "AB":
            for d2 in "AB":
                for rx in (1, 2):
                    if netlayer.decode_2x2(scheme, (d1, d2), rx) is None:
                        failures.append(("decode", corner, (d1, d2), rx))
    return {"suite": "2x2", "checks": 4 * 4 * 2 + 8, "failures": failures}


def _verify_e2e(seed: int, mode: str) -> dict:
    failures = []
    params = SystemParams(4, 2, 4, 2, 1)
    library = netlayer.Library.random(4, netlayer.min_file_bits(params), seed)
    report = endtoend.run_end_to_end(params, library, (1, 2, 3, 4), n=1, seed=seed, mode=mode)
    if not report.all_ok:
        failures.append(("e2e", "4x2x4", report.decode_ok))
    for corner in ("M13", "M45"):
        for pair in (("A", "A"), ("A", "B"), ("B", "A"), ("B", "B")):
            r = endtoend.run_end_to_end_2x2(corner, pair, seed)
            if not r.all_ok:
                failures.append(("e2e-2x2", corner, pair))
    return {"suite": "e2e", "failures": failures}


@main.command()
@click.argument("suite", type=click.Choice(["net", "phy", "e2e", "2x2"]))
@click.option("--trials", type=int, default=100)
@click.option("--seed", type=int, default=0)
@click.option("--mode", type=click.Choice(["exact", "float"]), default="exact")
@click.option("--grid", type=click.Choice(["small", "full"]), default="small")
@click.option("--depth", type=int, default=2)
@click.option("--out", type=click.Path(), default=None)
def verify(suite, trials, seed, mode, grid, depth, out):
    """Run one verification suite; exit 0 iff every check passes."""
    seed = _resolve_seed(seed)
    if suite == "net":
        result = _verify_net()
    elif suite == "phy":
        g = PHY_GRID_SMALL if grid == "small" else PHY_GRID_FULL
        result = _verify_phy(trials, seed, g, depths=tuple(range(1, depth + 1)), mode=mode)
    elif suite == "2x2":
        result = _verify_2x2()
    else:
        result = _verify_e2e(seed, mode)
    result["ok"] = not result["failures"]
    _emit(json.dumps(result, indent=2, default=str) + "\n", out)
    if result["failures"]:
        sys.exit(1)


@main.command()
@click.option("--n", "n_files", type=int, default=4)
@click.option("--kt", type=int, default=2)
@click.option("--kr", type=int, default=4)
@click.option("--mr", type=str, default="1")
@click.option("--depth", type=int, default=1)
@click.option("--seed", type=int, default=0)
@click.option("--mode", type=click.Choice(["exact", "float"]), default="exact")
@click.option("--out", type=click.Path(), default=None)
def e2e(n_files, kt, kr, mr, depth, seed, mode, out):
    """One full separation-architecture run; exit 1 on any decode failure."""
    seed = _resolve_seed(seed)
    params = SystemParams(n_files, kt, kr, Fraction(n_files, kt), as_fraction(mr))
    library = netlayer.Library.random(n_files, netlayer.min_file_bits(params), seed)
    demand = tuple((i % n_files) + 1 for i in range(kr))
    report = endtoend.run_end_to_end(params, library, demand, depth, seed, mode)
    _emit(report.to_json() + "\n", out)
    if not report.all_ok:
        sys.exit(1)


@main.command()
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def dof2x2(out, fmt):
    """2x2 load and reciprocal-DoF curves on the corner/hundredths grid."""
    xs = sorted({Fraction(k, 100) * 2 for k in range(101)} | {x for x, _ in dofcalc.CORNERS_2X2})
    header = ["m_r", "load_achievable", "load_bound", "reciprocal_improved", "reciprocal_baseline"]
    rows = [
        [x, dofcalc.net2x2_achievable_load(x), dofcalc.net2x2_lower_bound(x),
         dofcalc.dof_2x2_curve(x), dofcalc.dof_2x2_baseline(x)]
        for x in xs
    ]
    if fmt == "csv":
        _emit(_csv(header, rows), out)
    else:
        _emit(json.dumps([dict(zip(header, [str(v) for v in r])) for r in rows], indent=2) + "\n", out)


if __name__ == "__main__":
    main()
