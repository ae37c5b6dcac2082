import json
from fractions import Fraction
from itertools import product
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cachedof import netlayer as nl
from cachedof.core import SystemParams

GOLDEN = Path(__file__).parent / "data" / "scheme2x2_golden.json"


def make(n, kt, kr, kappa, f_mult=1):
    p = SystemParams(n, kt, kr, Fraction(n, kt), Fraction(kappa * n, kr))
    lib = nl.Library.random(n, nl.min_file_bits(p) * f_mult, seed=13)
    return p, lib


class TestPlacement:
    def test_cache_budgets_met_with_equality(self):
        for n, kt, kr, kappa in ((4, 2, 4, 1), (4, 2, 4, 2), (2, 2, 2, 1), (3, 1, 3, 2)):
            p, lib = make(n, kt, kr, kappa, f_mult=3)
            scheme = nl.place(p, lib)
            for j in range(1, kt + 1):
                assert scheme.tx_cache_bits(j) == p.m_tx * lib.f_bits
            for i in range(1, kr + 1):
                assert scheme.rx_cache_bits(i) == p.m_rx * lib.f_bits

    def test_subparts_partition_each_file(self):
        p, lib = make(4, 2, 4, 1, f_mult=2)
        scheme = nl.place(p, lib)
        for n in range(1, 5):
            bits = []
            for j in range(1, 3):
                for s in scheme.cache_subsets:
                    bits.extend(scheme.subpart(n, j, s))
            assert tuple(bits) == lib.file(n)

    def test_granularity_enforced(self):
        p, _ = make(4, 2, 4, 1)
        with pytest.raises(ValueError, match="multiple"):
            nl.place(p, nl.Library.random(4, 9, seed=0))

    def test_rx_cached_guard(self):
        p, lib = make(4, 2, 4, 1)
        scheme = nl.place(p, lib)
        with pytest.raises(KeyError):
            scheme.rx_cached(2, 1, 1, (1,))


class TestDelivery:
    def test_loads(self):
        for n, kt, kr in ((4, 2, 4), (2, 2, 2), (4, 1, 4), (3, 2, 3)):
            for kappa in range(kr + 1):
                if (kappa * n) % kr:
                    continue
                p, lib = make(n, kt, kr, kappa)
                scheme = nl.place(p, lib)
                pay = nl.deliver(scheme, tuple(1 for _ in range(kr)))
                assert pay.sum_load == Fraction(kr - kappa, kappa + 1)

    def test_exhaustive_decode_small_grid(self):
        for n, kt, kr in product((1, 2, 3, 4), (1, 2), (1, 2, 3, 4)):
            for kappa in range(kr + 1):
                if (kappa * n) % kr:
                    continue
                p, lib = make(n, kt, kr, kappa)
                scheme = nl.place(p, lib)
                for demand in product(range(1, n + 1), repeat=kr):
                    pay = nl.deliver(scheme, demand)
                    for i in range(1, kr + 1):
                        assert nl.decode(scheme, pay, i) == lib.file(demand[i - 1])

    def test_demand_validation(self):
        p, lib = make(4, 2, 4, 1)
        scheme = nl.place(p, lib)
        with pytest.raises(ValueError):
            nl.deliver(scheme, (1, 2, 3))
        with pytest.raises(ValueError):
            nl.deliver(scheme, (1, 2, 3, 5))

    def test_full_caching_has_empty_delivery(self):
        p, lib = make(2, 2, 2, 2)
        scheme = nl.place(p, lib)
        pay = nl.deliver(scheme, (1, 2))
        assert pay.payloads == {} and pay.sum_load == 0
        assert nl.decode(scheme, pay, 1) == lib.file(1)

    @settings(deadline=None, max_examples=25)
    @given(st.integers(0, 2**40 - 1), st.integers(0, 2**40 - 1))
    def test_delivery_is_gf2_linear_in_library(self, a, b):
        # deliver(lib1 xor lib2) == deliver(lib1) xor deliver(lib2), payload-wise
        p = SystemParams(2, 2, 2, 1, 1)
        f = 40

        def lib_from(x):
            bits = tuple((x >> k) & 1 for k in range(f))
            return nl.Library((bits[: f // 2] + bits[f // 2 :][: f // 2],) * 2)

        lib1 = nl.Library.random(2, f, seed=a % 997)
        lib2 = nl.Library.random(2, f, seed=b % 991)
        lib3 = nl.Library(
            tuple(nl.xor_bits(x, y) for x, y in zip(lib1.files, lib2.files))
        )
        d = (1, 2)
        p1 = nl.deliver(nl.place(p, lib1), d).payloads
        p2 = nl.deliver(nl.place(p, lib2), d).payloads
        p3 = nl.deliver(nl.place(p, lib3), d).payloads
        assert p3 == {k: nl.xor_bits(p1[k], p2[k]) for k in p1}


class TestPartition:
    def test_round_trip_and_load(self):
        p = SystemParams(2, 2, 4, 1, 0)
        lib = nl.Library.random(2, 8, seed=5)
        for demand in product((1, 2), repeat=4):
            pay = nl.partition_deliver(p, lib, demand)
            assert pay.link_load == Fraction(1, 2)
            assert pay.sum_load == len({*demand})
            for i in range(1, 5):
                assert nl.partition_decode(p, pay, i) == lib.file(demand[i - 1])

    def test_groups_ordered_by_file(self):
        p = SystemParams(3, 2, 4, Fraction(3, 2), 0)
        groups = nl.demand_groups(p, (3, 1, 3, 1))
        assert groups == [(1, (2, 4)), (3, (1, 3))]

    def test_requires_zero_receiver_memory(self):
        p = SystemParams(2, 2, 4, 1, Fraction(1, 2))
        with pytest.raises(ValueError, match="m_rx = 0"):
            nl.partition_deliver(p, nl.Library.random(2, 8, seed=0), (1, 1, 2, 2))


class TestSerialization:
    def test_bits_to_hex(self):
        assert nl.bits_to_hex((1, 0, 1, 1)) == "4:b"
        assert nl.bits_to_hex((0, 0, 0, 0, 1)) == "5:01"
        assert nl.bits_to_hex(()) == "0:"

    def test_payload_json_round_structure(self):
        p, lib = make(2, 2, 2, 1)
        scheme = nl.place(p, lib)
        pay = nl.deliver(scheme, (1, 2))
        doc = json.loads(nl.payloads_to_json(pay))
        assert doc["sum_load"] == "1/2"
        assert set(doc["payloads"]) == {"1,2|1", "1,2|2"}

    def test_scheme_json(self):
        p, lib = make(2, 2, 2, 1)
        doc = json.loads(nl.scheme_to_json(nl.place(p, lib)))
        assert doc["params"]["kappa"] == 1
        assert set(doc["tx_caches"]) == {"1", "2"}


class Test2x2Schemes:
    def test_golden_tables(self):
        golden = json.loads(GOLDEN.read_text())
        for corner in nl.CORNERS:
            table = nl.scheme_2x2_table(nl.scheme_2x2(corner))
            assert table == golden[corner], corner

    def test_loads(self):
        loads = [nl.scheme_2x2(c).sum_load for c in nl.CORNERS]
        assert loads == [Fraction(2), Fraction(4, 3), Fraction(4, 5), Fraction(0)]

    def test_tx_feasibility(self):
        for corner in nl.CORNERS:
            assert nl.tx_feasible_2x2(nl.scheme_2x2(corner))

    def test_all_demands_decode_symbolically(self):
        for corner in nl.CORNERS:
            scheme = nl.scheme_2x2(corner)
            for pair in product("AB", repeat=2):
                for rx in (1, 2):
                    assert nl.decode_2x2(scheme, pair, rx) is not None

    def test_bitwise_decode(self):
        lib = nl.Library.random(2, 30, seed=21)
        for corner in nl.CORNERS:
            scheme = nl.scheme_2x2(corner)
            for pair in product("AB", repeat=2):
                for rx in (1, 2):
                    got = nl.decode_2x2_bits(scheme, lib, pair, rx)
                    assert got == lib.file(1 if pair[rx - 1] == "A" else 2)

    def test_cache_budgets(self):
        # measured in files: each part is 1/n_parts of a file
        for corner, m_rx in (("M0", 0), ("M13", Fraction(1, 3)), ("M45", Fraction(4, 5)), ("M2", 2)):
            scheme = nl.scheme_2x2(corner)
            for cache in scheme.rx_caches:
                assert Fraction(len(cache), scheme.n_parts) == m_rx
            for cache in scheme.tx_caches:
                assert Fraction(len(cache), scheme.n_parts) == 1  # M_t = 1 file

    def test_unknown_corner(self):
        with pytest.raises(ValueError):
            nl.scheme_2x2("M99")

    def test_combo_parsing(self):
        assert nl.combo_str(nl._c("B1+B3")) == "B1+B3"
        assert nl._c("A1+A1") == frozenset()
