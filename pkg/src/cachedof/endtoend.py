"""Separation architecture, run for real: caching payloads carried over the
alignment physical layer as error-free multicast pipes, plus the 2x2
interference-extraction corners, with exact rate accounting."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional

from . import netlayer, phylayer
from .core import SystemParams
from .dofcalc import reciprocal_corner
from .netlayer import DeliveryPayloads, Library


# ---------------------------------------------------------------------------
# Bit <-> symbol framing
#
# A payload of B bits rides one alignment message of m streams: split into m
# chunks (sizes differing by at most one, longer chunks first) and read each
# chunk as an MSB-first integer. The split is a function of (B, m) only, so
# the receiver inverts it without side information.


def chunk_sizes(n_bits: int, n_chunks: int) -> list[int]:
    base, rem = divmod(n_bits, n_chunks)
    return [base + 1] * rem + [base] * (n_chunks - rem)


def bits_to_symbols(bits, n_chunks: int) -> list[int]:
    sizes = chunk_sizes(len(bits), n_chunks)
    out, pos = [], 0
    for size in sizes:
        val = 0
        for b in bits[pos : pos + size]:
            val = (val << 1) | b
        out.append(val)
        pos += size
    return out


def symbols_to_bits(symbols, n_bits: int):
    sizes = chunk_sizes(n_bits, len(symbols))
    bits = []
    for val, size in zip(symbols, sizes):
        val = int(val)
        if val < 0 or val >= (1 << size if size else 1):
            raise ValueError(f"symbol {val} does not fit in {size} bits")
        bits.extend((val >> (size - 1 - k)) & 1 for k in range(size))
    return tuple(bits)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EndToEndReport:
    """Outcome of one full placement/delivery/transmission/decode run."""

    params: Optional[SystemParams]
    demand: tuple
    n: Optional[int]
    seed: int
    mode: str
    t_n: Optional[int]
    link_load: Fraction
    sum_load: Fraction
    payload_bits: Optional[int]
    decode_ok: dict  # receiver -> bool
    accounting: Fraction  # reciprocal-DoF implied by (load, streams, block length)
    target: Fraction  # the corner-formula value the accounting approaches
    corner: Optional[str] = None
    sum_pipe_certified: Optional[bool] = None

    @property
    def all_ok(self) -> bool:
        good = all(self.decode_ok.values())
        if self.sum_pipe_certified is not None:
            good = good and self.sum_pipe_certified
        return good

    def accounting_error(self) -> Fraction:
        if self.target == 0:
            return abs(self.accounting)
        return abs(self.accounting - self.target) / self.target

    def to_json(self) -> str:
        return json.dumps(
            {
                "params": None
                if self.params is None
                else {
                    "n_files": self.params.n_files,
                    "n_tx": self.params.n_tx,
                    "n_rx": self.params.n_rx,
                    "m_tx": str(self.params.m_tx),
                    "m_rx": str(self.params.m_rx),
                },
                "demand": list(self.demand),
                "n": self.n,
                "seed": self.seed,
                "mode": self.mode,
                "t_n": self.t_n,
                "link_load": str(self.link_load),
                "sum_load": str(self.sum_load),
                "payload_bits": self.payload_bits,
                "decode_ok": {str(k): v for k, v in sorted(self.decode_ok.items())},
                "accounting": str(self.accounting),
                "target": str(self.target),
                "corner": self.corner,
                "sum_pipe_certified": self.sum_pipe_certified,
            },
            indent=2,
        )


def accounting_reciprocal(params: SystemParams, n: int) -> Fraction:
    """Reciprocal DoF implied by depth-n streams: link load over mean stream share.

    Each of the K_t * C(K_r, sigma) pipes carries l files per demand; a depth-n
    plan gives the pipes (n+1)^Gamma + (K_t-1)n^Gamma streams per K_t*T_n slots
    on average, and the ratio converges to the corner formula as n grows.
    """
    kappa = params.kappa_int
    sigma = kappa + 1
    kt, kr = params.n_tx, params.n_rx
    if kappa == kr:
        return Fraction(0)
    link_load = Fraction(1, kt * comb(kr, kappa))
    g = phylayer.gamma_of(kt, kr, sigma)
    t_n = phylayer.block_length(kt, kr, sigma, n)
    mean_share = Fraction((n + 1) ** g + (kt - 1) * n**g, kt * t_n)
    return link_load / mean_share


def accounting_curve(params: SystemParams, depths) -> list[tuple[int, Fraction, Fraction]]:
    """(n, accounting reciprocal, limiting corner value) rows for CSV export."""
    target = reciprocal_corner(params, params.kappa_int)
    return [(n, accounting_reciprocal(params, n), target) for n in depths]


def run_end_to_end(
    params: SystemParams,
    library: Library,
    demand,
    n: int,
    seed: int,
    mode: str = "exact",
) -> EndToEndReport:
    """Place, deliver, beam the payloads across the channel, decode, reassemble.

    Every receiver must recover its demanded file bit-exactly; any layer
    failure raises with that layer's certificate attached.
    """
    kappa = params.kappa_int
    sigma = kappa + 1
    kt, kr = params.n_tx, params.n_rx
    demand = tuple(demand)
    scheme = netlayer.place(params, library)
    payloads = netlayer.deliver(scheme, demand)
    target = reciprocal_corner(params, kappa)

    if kappa == kr:
        # Everything is cached; the physical layer stays idle.
        ok = {
            i: netlayer.decode(scheme, payloads, i) == library.file(demand[i - 1])
            for i in range(1, kr + 1)
        }
        return EndToEndReport(
            params, demand, None, seed, mode, None, payloads.link_load,
            payloads.sum_load, 0, ok, Fraction(0), target,
        )

    t_n = phylayer.block_length(kt, kr, sigma, n)
    channel = phylayer.ChannelRealization.draw(kr, kt, t_n, seed, mode)
    plan = phylayer.build_plan(kt, kr, sigma, n, channel)
    payload_bits = len(next(iter(payloads.payloads.values())))
    messages = {
        (s, j): bits_to_symbols(bits, plan.stream_count(j))
        for (s, j), bits in payloads.payloads.items()
    }
    observations = phylayer.transmit_receive(plan, channel, messages)

    ok = {}
    for i in range(1, kr + 1):
        desired = phylayer.decode_at(plan, channel, i, observations[i])
        pipes = {
            key: symbols_to_bits(symbols, payload_bits)
            for key, symbols in desired.items()
        }
        recovered = netlayer.decode(
            scheme, DeliveryPayloads(demand, pipes, payloads.link_load, payloads.sum_load), i
        )
        ok[i] = recovered == library.file(demand[i - 1])

    return EndToEndReport(
        params, demand, n, seed, mode, t_n, payloads.link_load, payloads.sum_load,
        payload_bits, ok, accounting_reciprocal(params, n), target,
    )


# ---------------------------------------------------------------------------
# 2x2 interference-extraction corners
#
# The four logical pipes carry V11, V21, V12, V22; the physical layer
# additionally hands each receiver the *sum* of the two cross streams for
# free. A short linear outer code turns that symbol sum into the GF(2) sum of
# the payloads; here we carry the XOR on the logical pipe and separately
# certify the symbol-level sum recovery, which together realize the same
# interface.


def run_end_to_end_2x2(
    corner: str,
    demand_pair: tuple[str, str],
    seed: int,
    mode: str = "exact",
    f_bits: int = 30,
) -> EndToEndReport:
    if corner not in ("M13", "M45"):
        raise ValueError(
            f"corner {corner!r} has no physical-layer run: only M13 and M45 "
            "exercise the extraction construction"
        )
    scheme = netlayer.scheme_2x2(corner)
    if f_bits % scheme.n_parts:
        raise ValueError(f"f_bits={f_bits} must be a multiple of {scheme.n_parts}")
    library = Library.random(2, f_bits, seed)
    row = netlayer.deliver_2x2(scheme, demand_pair)

    # Symbol-level certificate: each pipe's content as one integer symbol.
    channel = phylayer.ChannelRealization.draw(2, 2, 3, seed, mode)
    plan = phylayer.build_plan_2x2(channel)
    pipe_bits = {
        msg: netlayer.combo_bits(row[msg], library, scheme.n_parts)
        for msg in ("V11", "V21", "V12", "V22")
    }
    part_bits = f_bits // scheme.n_parts
    v = {
        (1, 1): bits_to_symbols(pipe_bits["V11"], 1)[0],
        (2, 1): bits_to_symbols(pipe_bits["V21"], 1)[0],
        (1, 2): bits_to_symbols(pipe_bits["V12"], 1)[0],
        (2, 2): bits_to_symbols(pipe_bits["V22"], 1)[0],
    }
    decoded = phylayer.decode_2x2(plan, phylayer.transmit_receive_2x2(plan, v))
    sum_ok = (
        decoded[1] == (v[(1, 1)], v[(1, 2)], v[(2, 1)] + v[(2, 2)])
        and decoded[2] == (v[(2, 1)], v[(2, 2)], v[(1, 1)] + v[(1, 2)])
    )

    # Bit-level recovery over the logical pipes (XOR on the sum pipe).
    ok = {}
    for receiver in (1, 2):
        want = demand_pair[receiver - 1]
        recovered = netlayer.decode_2x2_bits(scheme, library, demand_pair, receiver)
        ok[receiver] = recovered == library.file(1 if want == "A" else 2)

    accounting = 3 * scheme.link_load  # link load over the per-message DoF 1/3
    return EndToEndReport(
        None, demand_pair, None, seed, mode, 3, scheme.link_load,
        scheme.sum_load, part_bits, ok, accounting,
        Fraction(3, 4) * scheme.sum_load, corner=corner, sum_pipe_certified=sum_ok,
    )
