import io
import json
from contextlib import redirect_stdout

import pytest

from walkvis.cli import main
from walkvis.theory import density_walkers, density_watchpoints


def run_cli(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def csv_rows(text):
    lines = text.strip().split("\n")
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


def test_density_watchpoints_csv():
    code, out = run_cli("density", "watchpoints", "--b", "1,2", "--J", "3")
    assert code == 0
    header, rows = csv_rows(out)
    assert header == ["value", "prime_cutoff", "tail_bound"]
    assert abs(float(rows[0][0]) - 0.534567) < 5e-7


def test_density_walkers_csv():
    code, out = run_cli("density", "walkers", "--b", "3,5", "--r", "50")
    assert code == 0
    _, rows = csv_rows(out)
    assert abs(float(rows[0][0]) - 0.894220) < 5e-7


def test_density_identity_walkers_r1():
    _, out1 = run_cli("density", "walkers", "--b", "2,3", "--r", "1")
    _, out2 = run_cli("density", "watchpoints", "--b", "2,3", "--J", "1")
    v1 = float(csv_rows(out1)[1][0][0])
    v2 = float(csv_rows(out2)[1][0][0])
    assert abs(v1 - v2) < 1e-9


def test_bad_b_exits_2():
    code, _ = run_cli("density", "watchpoints", "--b", "2,4", "--J", "1")
    assert code == 2
    code, _ = run_cli("density", "watchpoints", "--b", "1,2", "--J", "99")
    assert code == 2  # J above 2**(b1+b2)


def test_simulate_watchpoints_rows():
    code, out = run_cli(
        "simulate", "watchpoints", "--b", "1,2", "--watchpoints", "0,0;1,2;2,1",
        "--alpha", "0.5", "--steps", "200", "--trials", "3", "--seed", "1",
    )
    assert code == 0
    header, rows = csv_rows(out)
    assert header[0] == "record"
    assert [r[0] for r in rows] == ["trial", "trial", "trial", "aggregate"]
    agg = rows[-1]
    assert abs(float(agg[5]) - density_watchpoints((1, 2), 3).value) < 1e-8


def test_simulate_invalid_watchpoints_exits_3(capsys):
    code, _ = run_cli(
        "simulate", "watchpoints", "--b", "1,2", "--watchpoints", "0,0;4,8",
        "--alpha", "0.5", "--steps", "100", "--trials", "1", "--seed", "1",
    )
    assert code == 3


def test_simulate_budget_exits_4():
    code, _ = run_cli(
        "simulate", "walkers", "--b", "2,3", "--alphas", "0.5,0.5",
        "--steps", "1000", "--trials", "10", "--seed", "1", "--budget", "100",
    )
    assert code == 4


def test_simulate_single_step_proportion_binary():
    for seed in ("1", "2", "3", "0x10"):
        code, out = run_cli(
            "simulate", "watchpoints", "--b", "1,1", "--watchpoints", "0,0",
            "--alpha", "0.5", "--steps", "1", "--trials", "1", "--seed", seed,
        )
        assert code == 0
        _, rows = csv_rows(out)
        assert float(rows[0][3]) in (0.0, 1.0)


def test_exact_cli():
    code, out = run_cli(
        "exact", "watchpoints", "--b", "1,2", "--watchpoints", "0,0",
        "--alpha", "0.5", "--steps", "4",
    )
    assert code == 0
    assert abs(float(csv_rows(out)[1][0][1]) - 0.78125) < 1e-12
    code, out = run_cli(
        "exact", "watchpoints", "--b", "2,3", "--watchpoints", "0,0",
        "--alpha", "0.3", "--steps", "1",
    )
    assert abs(float(csv_rows(out)[1][0][1]) - 1.0) < 1e-12


def test_exact_walkers_identity_to_watchpoints_power():
    code, out1 = run_cli(
        "exact", "walkers", "--b", "2,3", "--alphas", "0.5", "--steps", "200"
    )
    code2, out2 = run_cli(
        "exact", "watchpoints", "--b", "2,3", "--watchpoints", "0,0",
        "--alpha", "0.5", "--steps", "200",
    )
    assert code == code2 == 0
    assert abs(float(csv_rows(out1)[1][0][1]) - float(csv_rows(out2)[1][0][1])) < 1e-12


def test_exact_over_cap_exits_4():
    code, _ = run_cli(
        "exact", "watchpoints", "--b", "1,2", "--watchpoints", "0,0",
        "--alpha", "0.5", "--steps", "3000",
    )
    assert code == 4


def test_verify_congruence_pass_and_fail():
    code, out = run_cli("verify", "congruence-sum", "--alpha", "0.3", "--n", "10000", "--d", "7")
    assert code == 0
    assert "FAIL" not in out
    # d close to n concentrates mass far from equidistribution
    code, out = run_cli("verify", "congruence-sum", "--alpha", "0.5", "--n", "100", "--d", "97")
    assert code == 5
    assert "FAIL" in out


def test_verify_visibility_oracle_cli():
    code, out = run_cli("verify", "visibility-oracle", "--b", "2,3", "--box", "12")
    assert code == 0
    assert "PASS" in out


def test_verify_gcd_properties_cli():
    code, out = run_cli("verify", "gcd-properties", "--samples", "300")
    assert code == 0
    assert "FAIL" not in out


def test_verify_mean_value_cli():
    code, out = run_cli(
        "verify", "mean-value", "--kind", "walker-moment", "--b", "2,3", "--x", "20000", "--r", "2"
    )
    assert code == 0


def test_table1_small_deterministic():
    args = ("table1", "--steps", "1500", "--trials", "2", "--seed", "42")
    code1, out1 = run_cli(*args)
    code2, out2 = run_cli(*args)
    assert code1 == code2 == 0
    assert out1 == out2
    header, rows = csv_rows(out1)
    assert len(rows) == 8
    assert header[4] == "theoretical"
    theo = {(int(r[0]), int(r[1])): float(r[4]) for r in rows}
    assert abs(theo[(1, 2)] - 0.534567) < 5e-7


def test_table2_rows_1_equals_watchpoint_density():
    code, out = run_cli("table2", "--b", "2,3", "--rows", "1", "--steps", "500", "--trials", "2", "--seed", "3")
    assert code == 0
    _, rows = csv_rows(out)
    assert abs(float(rows[0][2]) - density_watchpoints((2, 3), 1).value) < 1e-9


def test_table2_theory_column():
    code, out = run_cli(
        "table2", "--b", "3,5", "--rows", "2,10,100", "--steps", "200", "--trials", "1", "--seed", "5"
    )
    assert code == 0
    _, rows = csv_rows(out)
    for row, want in zip(rows, (0.9920022709, 0.9645252673, 0.868973788)):
        assert abs(float(row[2]) - want) < 1e-9


def test_json_output_stable_keys():
    code, out1 = run_cli("density", "walkers", "--b", "2,3", "--r", "5", "--format", "json")
    assert code == 0
    doc1 = json.loads(out1)
    assert doc1["schema_version"] == 1
    assert list(doc1) == ["schema_version", "command", "parameters", "seed", "columns", "rows", "timing_seconds"]
    _, out2 = run_cli("density", "walkers", "--b", "2,3", "--r", "5", "--format", "json")
    doc2 = json.loads(out2)
    doc1.pop("timing_seconds")
    doc2.pop("timing_seconds")
    assert doc1 == doc2
    assert abs(doc1["rows"][0][0] - density_walkers((2, 3), 5).value) < 1e-12
