"""Constructive network layer: cache placement, XOR multicast delivery and
decoding over the per-subset bit pipes, the demand-partition scheme for small
libraries, and the two explicit 2x2 interference-extraction schemes."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional

from .core import SystemParams, subsets_of_size

Bits = tuple[int, ...]


def xor_bits(a: Bits, b: Bits) -> Bits:
    if len(a) != len(b):
        raise ValueError(f"length mismatch {len(a)} != {len(b)}")
    return tuple(x ^ y for x, y in zip(a, b))


def bits_to_hex(bits: Bits) -> str:
    n = len(bits)
    val = 0
    for b in bits:
        val = (val << 1) | b
    width = (n + 3) // 4
    return f"{n}:{val:0{width}x}" if n else "0:"


@dataclass(frozen=True)
class Library:
    """Content library of equal-length files, each a tuple of bits."""

    files: tuple[Bits, ...]

    def __post_init__(self):
        lengths = {len(f) for f in self.files}
        if len(lengths) > 1:
            raise ValueError("all files must have the same length")

    @property
    def n_files(self) -> int:
        return len(self.files)

    @property
    def f_bits(self) -> int:
        return len(self.files[0]) if self.files else 0

    def file(self, n: int) -> Bits:
        """1-based file access."""
        return self.files[n - 1]

    @classmethod
    def random(cls, n_files: int, f_bits: int, seed: int) -> "Library":
        rng = random.Random(seed)
        return cls(
            tuple(tuple(rng.randrange(2) for _ in range(f_bits)) for _ in range(n_files))
        )


def min_file_bits(params: SystemParams) -> int:
    """Smallest file size the subfile split supports: K_t * C(K_r, kappa)."""
    return params.n_tx * comb(params.n_rx, params.kappa_int)


@dataclass(frozen=True)
class CachingScheme:
    """Placement outcome: per-transmitter file parts and per-receiver subparts.

    Transmitter j holds the j-th 1/K_t slice of every file; each slice is split
    into C(K_r, kappa) subparts indexed by kappa-subsets of receivers, and
    receiver i caches every subpart whose index set contains i.
    """

    params: SystemParams
    library: Library
    kappa: int
    cache_subsets: tuple[tuple[int, ...], ...]
    subparts: dict  # (file n, tx j, kappa-subset) -> Bits

    def subpart(self, n: int, j: int, subset: tuple[int, ...]) -> Bits:
        return self.subparts[(n, j, subset)]

    @property
    def subpart_bits(self) -> int:
        return self.library.f_bits // (self.params.n_tx * len(self.cache_subsets))

    def tx_cache_bits(self, j: int) -> int:
        return sum(
            len(v) for (n, jj, s), v in self.subparts.items() if jj == j
        )

    def rx_cache_bits(self, i: int) -> int:
        return sum(len(v) for (n, j, s), v in self.subparts.items() if i in s)

    def rx_cached(self, i: int, n: int, j: int, subset: tuple[int, ...]) -> Bits:
        if i not in subset:
            raise KeyError(f"receiver {i} does not cache subpart {subset} of file {n}")
        return self.subparts[(n, j, subset)]


def place(params: SystemParams, library: Library) -> CachingScheme:
    """Split files across transmitters and run the shared-subset receiver placement."""
    kappa = params.kappa_int
    kt, kr = params.n_tx, params.n_rx
    if library.n_files != params.n_files:
        raise ValueError("library size does not match params")
    granularity = kt * comb(kr, kappa)
    f = library.f_bits
    if f % granularity:
        raise ValueError(
            f"file size {f} must be a multiple of K_t * C(K_r, kappa) = {granularity}"
        )
    cache_subsets = tuple(subsets_of_size(kr, kappa))
    part_bits = f // kt
    sub_bits = part_bits // len(cache_subsets)
    subparts = {}
    for n in range(1, params.n_files + 1):
        bits = library.file(n)
        for j in range(1, kt + 1):
            part = bits[(j - 1) * part_bits : j * part_bits]
            for idx, subset in enumerate(cache_subsets):
                subparts[(n, j, subset)] = part[idx * sub_bits : (idx + 1) * sub_bits]
    return CachingScheme(params, library, kappa, cache_subsets, subparts)


@dataclass(frozen=True)
class DeliveryPayloads:
    """Multicast payloads for one demand vector, with exact load accounting."""

    demand: tuple[int, ...]
    payloads: dict  # (receiver subset, tx j) -> Bits
    link_load: Fraction  # per-link size in files
    sum_load: Fraction
    kind: str = "coded"  # "coded" | "partition"


def _check_demand(params: SystemParams, demand) -> tuple[int, ...]:
    demand = tuple(demand)
    if len(demand) != params.n_rx:
        raise ValueError(f"demand vector must have length K_r = {params.n_rx}")
    if any(not 1 <= u <= params.n_files for u in demand):
        raise ValueError(f"demand entries must lie in 1..{params.n_files}")
    return demand


def deliver(scheme: CachingScheme, demand) -> DeliveryPayloads:
    """XOR multicast delivery: V_{Sj} for every (kappa+1)-subset S and transmitter j."""
    params = scheme.params
    demand = _check_demand(params, demand)
    kt, kr, kappa = params.n_tx, params.n_rx, scheme.kappa
    if kappa == kr:
        return DeliveryPayloads(demand, {}, Fraction(0), Fraction(0))
    payloads = {}
    for subset in subsets_of_size(kr, kappa + 1):
        for j in range(1, kt + 1):
            acc = None
            for i in subset:
                rest = tuple(x for x in subset if x != i)
                piece = scheme.subpart(demand[i - 1], j, rest)
                acc = piece if acc is None else xor_bits(acc, piece)
            payloads[(subset, j)] = acc
    link_load = Fraction(1, kt * comb(kr, kappa))
    sum_load = kt * comb(kr, kappa + 1) * link_load
    assert sum_load == Fraction(kr - kappa, kappa + 1)
    return DeliveryPayloads(demand, payloads, link_load, sum_load)


def decode(scheme: CachingScheme, payloads: DeliveryPayloads, receiver: int) -> Bits:
    """Reconstruct the receiver's demanded file from its cache and its pipes."""
    params = scheme.params
    if payloads.kind != "coded":
        raise ValueError("decode expects coded-delivery payloads; see partition_decode")
    if not 1 <= receiver <= params.n_rx:
        raise ValueError(f"receiver {receiver} out of range")
    u = payloads.demand[receiver - 1]
    parts = []
    for j in range(1, params.n_tx + 1):
        for subset in scheme.cache_subsets:
            if receiver in subset:
                parts.append(scheme.subpart(u, j, subset))
                continue
            group = tuple(sorted(subset + (receiver,)))
            try:
                acc = payloads.payloads[(group, j)]
            except KeyError as exc:
                raise ValueError(
                    f"payload for pipe ({group}, {j}) missing: payloads do not match scheme"
                ) from exc
            for other in group:
                if other == receiver:
                    continue
                rest = tuple(x for x in group if x != other)
                acc = xor_bits(acc, scheme.subpart(payloads.demand[other - 1], j, rest))
            parts.append(acc)
    bits = tuple(b for p in parts for b in p)
    if len(bits) != scheme.library.f_bits:
        raise ValueError("reassembled file has wrong length; scheme/payload mismatch")
    return bits


# ---------------------------------------------------------------------------
# Demand-partition interface (small library, m_rx = 0)


def demand_groups(params: SystemParams, demand) -> list[tuple[int, tuple[int, ...]]]:
    """(file, receiver group) pairs, ordered by file index, empty groups omitted."""
    demand = _check_demand(params, demand)
    groups = []
    for n in range(1, params.n_files + 1):
        members = tuple(i for i, u in enumerate(demand, start=1) if u == n)
        if members:
            groups.append((n, members))
    return groups


def partition_deliver(params: SystemParams, library: Library, demand) -> DeliveryPayloads:
    """One payload V_{U_n j} = W_n^j per nonempty demand group and transmitter."""
    if params.m_rx != 0:
        raise ValueError(
            "the partition interface only covers m_rx = 0; reach intermediate m_rx "
            "by memory sharing at the curve level"
        )
    demand = _check_demand(params, demand)
    kt = params.n_tx
    f = library.f_bits
    if f % kt:
        raise ValueError(f"file size {f} must be a multiple of K_t = {kt}")
    part_bits = f // kt
    payloads = {}
    groups = demand_groups(params, demand)
    for n, members in groups:
        bits = library.file(n)
        for j in range(1, kt + 1):
            payloads[(members, j)] = bits[(j - 1) * part_bits : j * part_bits]
    return DeliveryPayloads(
        demand, payloads, Fraction(1, kt), Fraction(len(groups)), kind="partition"
    )


def partition_decode(
    params: SystemParams, payloads: DeliveryPayloads, receiver: int
) -> Bits:
    """Concatenate the receiver group's payloads across transmitters."""
    if payloads.kind != "partition":
        raise ValueError("partition_decode expects partition payloads")
    if not 1 <= receiver <= params.n_rx:
        raise ValueError(f"receiver {receiver} out of range")
    group = next(
        members
        for (members, j) in payloads.payloads
        if receiver in members and j == 1
    )
    return tuple(
        b for j in range(1, params.n_tx + 1) for b in payloads.payloads[(group, j)]
    )


# ---------------------------------------------------------------------------
# Serialization of schemes and payloads


def payloads_to_json(payloads: DeliveryPayloads) -> str:
    doc = {
        "kind": payloads.kind,
        "demand": list(payloads.demand),
        "link_load": str(payloads.link_load),
        "sum_load": str(payloads.sum_load),
        "payloads": {
            ",".join(map(str, subset)) + "|" + str(j): bits_to_hex(bits)
            for (subset, j), bits in sorted(payloads.payloads.items())
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def scheme_to_json(scheme: CachingScheme) -> str:
    p = scheme.params
    doc = {
        "params": {
            "n_files": p.n_files,
            "n_tx": p.n_tx,
            "n_rx": p.n_rx,
            "m_tx": str(p.m_tx),
            "m_rx": str(p.m_rx),
            "kappa": scheme.kappa,
        },
        "tx_caches": {
            str(j): {
                f"{n}|{','.join(map(str, s))}": bits_to_hex(bits)
                for (n, jj, s), bits in sorted(scheme.subparts.items())
                if jj == j
            }
            for j in range(1, p.n_tx + 1)
        },
        "rx_caches": {
            str(i): {
                f"{n}|{j}|{','.join(map(str, s))}": bits_to_hex(bits)
                for (n, j, s), bits in sorted(scheme.subparts.items())
                if i in s
            }
            for i in range(1, p.n_rx + 1)
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# The 2x2 interference-extraction schemes
#
# Two files A and B; file parts are labelled ('A', 1) .. ('A', p) and likewise
# for B. A GF(2) combination of parts is a frozenset of part labels.

Combo = frozenset

CORNERS = ("M0", "M13", "M45", "M2")

_CORNER_PARTS = {"M0": 2, "M13": 3, "M45": 5, "M2": 1}
_CORNER_MRX = {
    "M0": Fraction(0),
    "M13": Fraction(1, 3),
    "M45": Fraction(4, 5),
    "M2": Fraction(2),
}
_CORNER_LINK_LOAD = {
    "M0": Fraction(1, 2),
    "M13": Fraction(1, 3),
    "M45": Fraction(1, 5),
    "M2": Fraction(0),
}


def _c(*labels: str) -> Combo:
    """Parse part labels like "A3" / "B1+B3" into a GF(2) combination."""
    parts = set()
    for label in labels:
        for tok in label.split("+"):
            parts.symmetric_difference_update({(tok[0], int(tok[1:]))})
    return frozenset(parts)


def combo_str(combo: Combo) -> str:
    if not combo:
        return "0"
    return "+".join(f"{f}{i}" for f, i in sorted(combo))


# Helper combinations used by the m_rx = 4/5 corner.
_S = {
    1: _c("B2+A4"),
    2: _c("A1+B3"),
    3: _c("B1+B3"),
    4: _c("B2+B4"),
}
_T = {
    1: _c("A1+A3"),
    2: _c("A2+A4"),
    3: _c("B1+A3"),
    4: _c("A2+B4"),
}


def _sx(i):  # B5 + S_i etc., spelled out as combos
    return _S[i] ^ _c("B5")


def _tx(i):
    return _T[i] ^ _c("A5")


@dataclass(frozen=True)
class Scheme2x2:
    """One corner of the 2x2 interference-extraction scheme.

    Caches and per-demand delivery rows are GF(2) combinations of the file
    parts; `delivery` maps a demand pair to the four pipe contents
    (V11, V21, V12, V22).
    """

    corner: str
    n_parts: int
    m_rx: Fraction
    link_load: Fraction
    tx_caches: tuple[tuple[Combo, ...], tuple[Combo, ...]]
    rx_caches: tuple[tuple[Combo, ...], tuple[Combo, ...]]
    delivery: dict  # (d1, d2) -> {"V11": Combo, "V21": Combo, "V12": Combo, "V22": Combo}

    @property
    def sum_load(self) -> Fraction:
        return 4 * self.link_load


def scheme_2x2(corner: str) -> Scheme2x2:
    """Build the cited corner scheme (M0, M13, M45, or M2) constructively."""
    if corner not in CORNERS:
        raise ValueError(f"unknown corner {corner!r}; expected one of {CORNERS}")
    p = _CORNER_PARTS[corner]
    if corner == "M0":
        # sigma = 1 unicast message set; each pipe carries one half-file part
        tx = ((_c("A1"), _c("B1")), (_c("A2"), _c("B2")))
        rx = ((), ())
        delivery = {
            (d1, d2): {
                "V11": _c(f"{d1}1"),
                "V21": _c(f"{d2}1"),
                "V12": _c(f"{d1}2"),
                "V22": _c(f"{d2}2"),
            }
            for d1 in "AB"
            for d2 in "AB"
        }
    elif corner == "M13":
        tx = (
            (_c("A3"), _c("B1+B3"), _c("B2+B3")),
            (_c("B3"), _c("A1+A3"), _c("A2+A3")),
        )
        rx = ((_c("A1+B1"),), (_c("A2+B2"),))
        delivery = {
            ("A", "A"): {"V11": _c("A3"), "V21": _c("A3"),
                         "V12": _c("A1+A3"), "V22": _c("A2+A3")},
            ("A", "B"): {"V11": _c("A3"), "V21": _c("B1+B3"),
                         "V12": _c("A2+A3"), "V22": _c("B3")},
            ("B", "A"): {"V11": _c("B2+B3"), "V21": _c("A3"),
                         "V12": _c("B3"), "V22": _c("A1+A3")},
            ("B", "B"): {"V11": _c("B1+B3"), "V21": _c("B2+B3"),
                         "V12": _c("B3"), "V22": _c("B3")},
        }
    elif corner == "M45":
        tx = (
            (_c("A5"), _sx(1), _sx(2), _sx(3), _sx(4)),
            (_c("B5"), _tx(1), _tx(2), _tx(3), _tx(4)),
        )
        rx = (
            (_c("A1"), _c("A2"), _c("B1"), _c("B2")),
            (_c("A3"), _c("A4"), _c("B3"), _c("B4")),
        )
        delivery = {
            ("A", "A"): {"V11": _c("A5"), "V21": _c("A5"),
                         "V12": _tx(1), "V22": _tx(2)},
            ("A", "B"): {"V11": _c("A5"), "V21": _sx(1),
                         "V12": _tx(3), "V22": _c("B5")},
            ("B", "A"): {"V11": _sx(2), "V21": _c("A5"),
                         "V12": _c("B5"), "V22": _tx(4)},
            ("B", "B"): {"V11": _sx(3), "V21": _sx(4),
                         "V12": _c("B5"), "V22": _c("B5")},
        }
    else:  # M2: full local caching, nothing to deliver
        tx = ((_c("A1"),), (_c("B1"),))
        rx = ((_c("A1"), _c("B1")), (_c("A1"), _c("B1")))
        delivery = {
            (d1, d2): {"V11": frozenset(), "V21": frozenset(),
                       "V12": frozenset(), "V22": frozenset()}
            for d1 in "AB"
            for d2 in "AB"
        }
    return Scheme2x2(
        corner, p, _CORNER_MRX[corner], _CORNER_LINK_LOAD[corner], tx, rx, delivery
    )


def deliver_2x2(scheme: Scheme2x2, demand_pair: tuple[str, str]) -> dict:
    """Pipe contents for one demand pair, including the two sum pipes."""
    if demand_pair not in scheme.delivery:
        raise ValueError(f"demand pair {demand_pair!r} must be a pair over {{'A','B'}}")
    row = dict(scheme.delivery[demand_pair])
    row["V21+V22"] = row["V21"] ^ row["V22"]
    row["V11+V12"] = row["V11"] ^ row["V12"]
    return row


def _gf2_solve(items: list[Combo], targets: list[Combo], n_unknowns, index) -> Optional[list[list[int]]]:
    """Express each target as a GF(2) sum of items, or None if out of span.

    Returns, per target, the list of item positions to XOR.
    """
    rows = []  # (combo bitmask, selection bitmask over items)
    for pos, combo in enumerate(items):
        mask = 0
        for part in combo:
            mask |= 1 << index[part]
        rows.append((mask, 1 << pos))
    # Gaussian elimination to reduced form
    pivots = {}
    for mask, sel in rows:
        for bit in range(n_unknowns - 1, -1, -1):
            if not (mask >> bit) & 1:
                continue
            if bit in pivots:
                pmask, psel = pivots[bit]
                mask ^= pmask
                sel ^= psel
            else:
                pivots[bit] = (mask, sel)
                break
    out = []
    for target in targets:
        mask = 0
        for part in target:
            mask |= 1 << index[part]
        sel = 0
        for bit in range(n_unknowns - 1, -1, -1):
            if (mask >> bit) & 1:
                if bit not in pivots:
                    return None
                pmask, psel = pivots[bit]
                mask ^= pmask
                sel ^= psel
        if mask:
            return None
        out.append([i for i in range(len(items)) if (sel >> i) & 1])
    return out


def _part_index(n_parts: int) -> dict:
    labels = [(f, i) for f in "AB" for i in range(1, n_parts + 1)]
    return {lab: k for k, lab in enumerate(labels)}


def decode_2x2(scheme: Scheme2x2, demand_pair: tuple[str, str], receiver: int) -> Optional[list]:
    """Symbolic decode check: express every part of the demanded file from the
    receiver's cache and its three pipes. Returns the XOR recipes or None."""
    row = deliver_2x2(scheme, demand_pair)
    if receiver == 1:
        available = list(scheme.rx_caches[0]) + [row["V11"], row["V12"], row["V21+V22"]]
    elif receiver == 2:
        available = list(scheme.rx_caches[1]) + [row["V21"], row["V22"], row["V11+V12"]]
    else:
        raise ValueError("receiver must be 1 or 2")
    want = demand_pair[receiver - 1]
    index = _part_index(scheme.n_parts)
    targets = [frozenset({(want, i)}) for i in range(1, scheme.n_parts + 1)]
    return _gf2_solve(available, targets, 2 * scheme.n_parts, index)


def tx_feasible_2x2(scheme: Scheme2x2) -> bool:
    """Every pipe content must lie in the sending transmitter's cache span."""
    index = _part_index(scheme.n_parts)
    n_unknowns = 2 * scheme.n_parts
    for row in scheme.delivery.values():
        for msg, combo in row.items():
            j = int(msg[2]) - 1  # V_ij: transmitter is the second index
            sol = _gf2_solve(list(scheme.tx_caches[j]), [combo], n_unknowns, index)
            if sol is None:
                return False
    return True


def combo_bits(combo: Combo, library: Library, n_parts: int) -> Bits:
    """Concrete bits of a GF(2) part combination for a 2-file library."""
    f = library.f_bits
    if f % n_parts:
        raise ValueError(f"file size {f} must be a multiple of {n_parts}")
    pb = f // n_parts
    acc = tuple([0] * pb)
    for fname, i in combo:
        bits = library.file(1 if fname == "A" else 2)
        acc = xor_bits(acc, bits[(i - 1) * pb : i * pb])
    return acc


def decode_2x2_bits(
    scheme: Scheme2x2, library: Library, demand_pair: tuple[str, str], receiver: int
) -> Bits:
    """Bit-level decode of the demanded file at one receiver."""
    recipes = decode_2x2(scheme, demand_pair, receiver)
    if recipes is None:
        raise ValueError(
            f"receiver {receiver} cannot decode {demand_pair} at corner {scheme.corner}"
        )
    row = deliver_2x2(scheme, demand_pair)
    if receiver == 1:
        available = list(scheme.rx_caches[0]) + [row["V11"], row["V12"], row["V21+V22"]]
    else:
        available = list(scheme.rx_caches[1]) + [row["V21"], row["V22"], row["V11+V12"]]
    avail_bits = [combo_bits(c, library, scheme.n_parts) for c in available]
    pb = library.f_bits // scheme.n_parts
    parts = []
    for recipe in recipes:
        acc = tuple([0] * pb)
        for pos in recipe:
            acc = xor_bits(acc, avail_bits[pos])
        parts.append(acc)
    return tuple(b for p in parts for b in p)


def scheme_2x2_table(scheme: Scheme2x2) -> dict:
    """Human-readable table of the scheme (for golden-file comparison)."""
    return {
        "corner": scheme.corner,
        "m_rx": str(scheme.m_rx),
        "link_load": str(scheme.link_load),
        "tx_caches": [[combo_str(c) for c in cache] for cache in scheme.tx_caches],
        "rx_caches": [[combo_str(c) for c in cache] for cache in scheme.rx_caches],
        "delivery": {
            f"({d1},{d2})": {
                msg: combo_str(c)
                for msg, c in deliver_2x2(scheme, (d1, d2)).items()
            }
            for d1 in "AB"
            for d2 in "AB"
        },
    }
