import json

import pytest
from click.testing import CliRunner

from cachedof.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def rows_of(csv_text):
    lines = csv_text.strip().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


class TestDof:
    def test_2x4_corners_present(self, runner):
        res = runner.invoke(main, ["dof", "--n", "4", "--kt", "2", "--kr", "4"])
        assert res.exit_code == 0
        header, rows = rows_of(res.output)
        assert header[0] == "m_r"
        got = {(r[0], r[2]) for r in rows}
        for pair in [("0", "5/2"), ("1", "9/8"), ("2", "7/12"), ("3", "1/4"), ("4", "0")]:
            assert pair in got

    def test_at_single_row(self, runner):
        res = runner.invoke(main, ["dof", "--n", "4", "--kt", "2", "--kr", "4", "--at", "1/2"])
        header, rows = rows_of(res.output)
        assert len(rows) == 1
        assert rows[0][2] == "29/16"
        assert float(rows[0][3]) == 1.8125

    def test_2x2_first_row(self, runner):
        res = runner.invoke(main, ["dof", "--n", "2", "--kt", "2", "--kr", "2"])
        _, rows = rows_of(res.output)
        assert rows[0][:1] + rows[0][2:3] == ["0", "3/2"]

    def test_svg(self, runner, tmp_path):
        out = tmp_path / "curve.svg"
        res = runner.invoke(
            main, ["dof", "--n", "4", "--kt", "2", "--kr", "4", "--format", "svg", "--out", str(out)]
        )
        assert res.exit_code == 0
        assert out.read_text().startswith("<svg")

    def test_invalid_params_exit_2(self, runner):
        res = runner.invoke(main, ["dof", "--n", "x", "--kt", "2", "--kr", "4"])
        assert res.exit_code == 2


class TestGains:
    def test_mr_axis_starts_trivial(self, runner):
        res = runner.invoke(main, ["gains", "--axis", "mr", "--n", "4", "--kt", "2", "--kr", "4"])
        _, rows = rows_of(res.output)
        assert rows[0][2] == "1" and rows[0][3] == "1"  # g_lc = g_gc = 1 at m_r = 0

    def test_kr_axis_constant_local_gain(self, runner):
        res = runner.invoke(
            main,
            ["gains", "--axis", "kr", "--n", "6", "--kt", "2", "--mr", "3", "--to", "12"],
        )
        _, rows = rows_of(res.output)
        main_rows = [r for r in rows if r[5] == "main"]
        assert len(main_rows) > 2
        assert len({r[2] for r in main_rows}) == 1  # g_lc does not depend on K_r

    def test_kt_axis_global_gain_decreases(self, runner):
        res = runner.invoke(
            main,
            ["gains", "--axis", "kt", "--n", "4", "--kr", "4", "--mr", "1", "--to", "30"],
        )
        _, rows = rows_of(res.output)
        from fractions import Fraction

        gcs = [Fraction(r[3]) for r in rows]
        assert all(b <= a for a, b in zip(gcs, gcs[1:]))
        assert gcs[-1] < Fraction(11, 10)  # approaches 1 for many transmitters

    def test_partition_rows_flagged(self, runner):
        res = runner.invoke(main, ["gains", "--axis", "mr", "--n", "2", "--kt", "2", "--kr", "8"])
        _, rows = rows_of(res.output)
        assert any(r[5] == "partition" for r in rows)


class TestPhyDof:
    def test_point_value(self, runner):
        res = runner.invoke(main, ["phy-dof", "--kt", "2", "--kr", "2", "--sigma", "1"])
        _, rows = rows_of(res.output)
        assert rows[0][0] == "1/3"

    def test_convergence_table(self, runner):
        res = runner.invoke(
            main, ["phy-dof", "--kt", "2", "--kr", "2", "--sigma", "1", "--depth", "8"]
        )
        header, rows = rows_of(res.output)
        assert header == ["n", "delta_1", "delta_2", "target"]
        assert [r[0] for r in rows] == ["1", "2", "4", "8"]
        assert rows[0][1] == "2/5" and rows[0][3] == "1/3"


class TestBounds:
    def test_single_point(self, runner):
        res = runner.invoke(
            main, ["bounds", "--n", "4", "--kt", "2", "--kr", "4", "--mr", "1"]
        )
        _, rows = rows_of(res.output)
        assert rows[0][2] == "3/4"  # cut-set
        assert rows[0][4] == "9/8"  # envelope


class TestGapScan:
    def test_tiny_scan_passes(self, runner, tmp_path):
        out = tmp_path / "gap.json"
        res = runner.invoke(main, ["gap-scan", "--max", "6", "--out", str(out)])
        assert res.exit_code == 0
        doc = json.loads(out.read_text())
        assert doc["violations"] == []
        assert float(doc["max_ratio_dec"]) <= 13.5

    def test_sampled_deterministic(self, runner):
        args = ["gap-scan", "--max", "15", "--trials", "30", "--seed", "5"]
        a = runner.invoke(main, args)
        b = runner.invoke(main, args)
        assert a.exit_code == 0
        assert a.output == b.output

    def test_env_seed_override(self, runner):
        plain = runner.invoke(main, ["gap-scan", "--max", "15", "--trials", "30", "--seed", "5"])
        overridden = runner.invoke(
            main,
            ["gap-scan", "--max", "15", "--trials", "30", "--seed", "5"],
            env={"CACHEDOF_SEED": "99"},
        )
        assert json.loads(plain.output)["description"] != json.loads(overridden.output)["description"]


class TestVerify:
    def test_2x2_suite(self, runner):
        res = runner.invoke(main, ["verify", "2x2"])
        assert res.exit_code == 0
        assert json.loads(res.output)["ok"] is True

    def test_phy_suite_small(self, runner):
        res = runner.invoke(main, ["verify", "phy", "--trials", "2", "--depth", "1"])
        assert res.exit_code == 0
        doc = json.loads(res.output)
        assert doc["ok"] is True and doc["certificates"] > 0

    def test_unknown_suite_exit_2(self, runner):
        assert runner.invoke(main, ["verify", "nope"]).exit_code == 2


class TestE2e:
    def test_default_run(self, runner):
        res = runner.invoke(main, ["e2e", "--n", "2", "--kt", "2", "--kr", "2", "--mr", "1"])
        assert res.exit_code == 0
        doc = json.loads(res.output)
        assert doc["decode_ok"] == {"1": True, "2": True}

    def test_deterministic_output(self, runner):
        args = ["e2e", "--n", "2", "--kt", "2", "--kr", "2", "--mr", "0", "--seed", "3"]
        assert runner.invoke(main, args).output == runner.invoke(main, args).output


class TestDof2x2:
    def test_corner_rows(self, runner):
        res = runner.invoke(main, ["dof2x2"])
        _, rows = rows_of(res.output)
        by_x = {r[0]: r for r in rows}
        assert by_x["1/3"][1] == "4/3" and by_x["1/3"][3] == "1"
        assert by_x["4/5"][1] == "4/5" and by_x["4/5"][3] == "3/5"
        # bound equals achievable everywhere on the grid
        assert all(r[1] == r[2] for r in rows)
