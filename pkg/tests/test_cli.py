import csv
import io
import json
import math
import subprocess
import sys

import pytest

from cmpshare import cli
from cmpshare.cachesim import CacheGeometry, generate_trace, parse_stats_csv, simulate
from cmpshare.config import load
from oracles import WORKED

SMALL_TRACE = ["--set", "sharing.n=2", "--set", "sharing.private_refs_per_core=3000",
               "--set", "sharing.private_working_set=128", "--set", "sharing.shared_block_count=32",
               "--set", "sharing.epoch_length=64"]
SMALL_GRID = ["--set", "grid.n_max=8", "--set", "grid.a_l1_max=8", "--set", "grid.a_cpu_max=16"]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _kv(text):
    return dict(line.split(" = ", 1) for line in text.splitlines() if " = " in line)


def test_eval_worked_example(capsys):
    code, out, _ = run(capsys, "eval")
    assert code == 0
    kv = _kv(out)
    for key in ("m1", "m2", "d_l1", "d_l2", "cpi_m", "cpi_c", "cpi_1", "ipc", "power", "m_d",
                "feasible_power", "feasible_bw", "feasible_area"):
        assert key in kv
    assert float(kv["ipc"]) == pytest.approx(WORKED["ipc"], rel=1e-5)
    assert kv["ipc"] == "4.04944"


def test_eval_without_memory_stalls(capsys):
    _, out, _ = run(capsys, "eval", "--set", "workload.g=0")
    kv = _kv(out)
    assert kv["cpi_1"] == kv["cpi_c"]


def test_eval_json(capsys):
    code, out, _ = run(capsys, "eval", "--json")
    doc = json.loads(out)
    assert code == 0
    assert doc["result"]["power"] == pytest.approx(22.4)
    assert doc["config"] == {"n": 4, "a_l1": 4.0, "a_cpu": 16.0, "a_l2": 64.0}


def test_config_file_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("# scenario\nworkload.g = 0.0   # no memory\ndesign.a_cpu = 4\n")
    _, out, _ = run(capsys, "eval", "--config", str(cfg), "--set", "design.a_cpu=64")
    assert _kv(out)["cpi_c"] == "0.125"


def test_missing_config_file(capsys, tmp_path):
    path = tmp_path / "nope.cfg"
    code, _, err = run(capsys, "eval", "--config", str(path))
    assert code == 3
    assert str(path) in err


@pytest.mark.parametrize("argv", [
    ["eval", "--set", "workload.bogus=1"],
    ["eval", "--set", "workload.g=abc"],
    ["eval", "--set", "workload.g=2"],
    ["eval", "--set", "nokey"],
    ["sweep", "--set", "dse.constraint=thermal"],
])
def test_input_errors_exit_3(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 3 and err.startswith("error:")


def test_usage_error_exits_3(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["frobnicate"])
    assert e.value.code == 3


def _csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_budget_retrograde(capsys):
    code, out, _ = run(capsys, "sweep", "--mode", "budget", "--constraint", "power")
    assert code == 0
    rows = _csv(out)
    assert list(rows[0]) == cli.SWEEP_COLUMNS
    ipc = [float(r["ipc"]) for r in rows]
    peak = ipc.index(max(ipc))
    assert 0 < peak < len(ipc) - 1
    assert [float(r["x"]) for r in rows] == sorted(float(r["x"]) for r in rows)


def test_sweep_singleton_grid(capsys):
    code, out, _ = run(capsys, "sweep", "--mode", "l1", "--set", "grid.n_values=4", "--set", "grid.a_l1_values=4",
                       "--set", "grid.a_cpu_values=16", "--constraint", "power")
    rows = _csv(out)
    assert code == 0 and len(rows) == 1
    assert rows[0]["envelope"] == "1"


def test_sweep_l1_rows_sorted(capsys):
    _, out, _ = run(capsys, "sweep", "--mode", "l1", *SMALL_GRID)
    rows = _csv(out)
    keys = [(float(r["x"]), int(r["n"]), float(r["a_l1"]), float(r["a_cpu"])) for r in rows]
    assert keys == sorted(keys)
    by_x = {}
    for r in rows:
        by_x.setdefault(r["x"], []).append(r)
    for group in by_x.values():
        assert sum(r["envelope"] == "1" for r in group) == 1
        top = max(group, key=lambda r: float(r["ipc"]))
        assert float(top["ipc"]) == max(float(r["ipc"]) for r in group if r["envelope"] == "1")


def test_sweep_all_infeasible_exits_2(capsys):
    code, out, _ = run(capsys, "sweep", "--set", "budgets.p_max=0.001")
    assert code == 2
    rows = _csv(out)
    assert all(r["feasible"] == "0" and math.isnan(float(r["ipc"])) for r in rows)


@pytest.mark.parametrize("constraint", ["bw", "power", "both"])
def test_optimize_reports_shift(capsys, constraint):
    code, out, _ = run(capsys, "optimize", "--constraint", constraint)
    assert code == 0
    kv = _kv(out)
    assert float(kv["a_l1_opt_sharing"]) <= float(kv["a_l1_opt_nosharing"])
    assert float(kv["relative_shift"]) >= 0
    assert "relative_shift_pct" in kv


def test_optimize_shift_arithmetic(capsys):
    _, out, _ = run(capsys, "optimize", "--constraint", "bw")
    kv = _kv(out)
    assert (kv["a_l1_opt_nosharing"], kv["a_l1_opt_sharing"]) == ("8", "4")
    assert kv["relative_shift"] == "0.5"
    assert kv["relative_shift_pct"] == "50%"


def test_optimize_zero_sharing_exits_3(capsys):
    code, _, err = run(capsys, "optimize", "--set", "workload.mu_n=0")
    assert code == 3 and "mu_n" in err


def test_optimize_infeasible_exits_2(capsys):
    code, out, _ = run(capsys, "optimize", "--set", "budgets.p_max=0.001")
    assert code == 2
    assert _kv(out)["feasible"] == "false"


def test_optimize_json(capsys):
    code, out, _ = run(capsys, "optimize", "--json", "--constraint", "power")
    doc = json.loads(out)
    assert code == 0 and doc["feasible"]
    assert doc["a_l1_opt_sharing"] <= doc["a_l1_opt_nosharing"]


def test_hand_trace_through_cli(tmp_path, capsys):
    p = tmp_path / "abab.trace"
    p.write_text("CMPTRACE 1 1\n0 R 1000\n0 R 2000\n0 R 1000\n0 R 2000\n")
    for lines, want in ((1, 1.0), (2, 0.5)):
        code, out, _ = run(capsys, "simulate", str(p), "--set", f"sim.l1_bytes={64 * lines}",
                           "--set", f"sim.l1_assoc={lines}")
        assert code == 0
        assert parse_stats_csv(out).l1_miss_rate == want


def test_gen_trace_simulate_round_trip(tmp_path, capsys):
    tfile = tmp_path / "g.trace"
    assert run(capsys, "gen-trace", *SMALL_TRACE, "--seed", "9", "--out", str(tfile))[0] == 0
    code, out, _ = run(capsys, "simulate", str(tfile))
    assert code == 0
    cfg = load(None, SMALL_TRACE[1::2], 9)
    direct = simulate(generate_trace(cfg.sharing), cfg.l1_geom, cfg.l2_geom)
    assert parse_stats_csv(out) == direct
    assert out == direct.to_csv()


def test_simulate_json(tmp_path, capsys):
    p = tmp_path / "t.trace"
    p.write_text("CMPTRACE 1 2\n0 R 0\n1 R 0\n")
    _, out, _ = run(capsys, "simulate", str(p), "--json")
    doc = json.loads(out)
    assert doc["l2"] == {"accesses": 2, "hits": 1, "misses": 1, "miss_rate": 0.5}


def test_simulate_empty_trace(tmp_path, capsys):
    p = tmp_path / "e.trace"
    p.write_text("")
    code, out, _ = run(capsys, "simulate", str(p))
    assert code == 0
    stats = parse_stats_csv(out)
    assert all(c.accesses == c.hits == c.misses == 0 for _, c in stats.rows())


def test_simulate_malformed_trace(tmp_path, capsys):
    p = tmp_path / "bad.trace"
    p.write_text("CMPTRACE 1 2\n0 R 40\n0 Q 40\n")
    code, _, err = run(capsys, "simulate", str(p))
    assert code == 3
    assert "line 3" in err


def test_simulate_missing_trace(tmp_path, capsys):
    code, _, _ = run(capsys, "simulate", str(tmp_path / "none.trace"))
    assert code == 3


def test_miss_curve_csv(capsys):
    code, out, _ = run(capsys, "miss-curve", *SMALL_TRACE, "--set", "sharing.sharing_fraction=0",
                       "--set", "curve.l1_sizes=1024,4096")
    rows = _csv(out)
    assert code == 0
    assert list(rows[0]) == cli.CURVE_COLUMNS
    assert [int(r["l1_bytes"]) for r in rows] == [1024, 4096]
    assert all(r["mr_multicore"] == r["mr_singlecore"] for r in rows)


def test_fit_exact_model2(tmp_path, capsys):
    p = tmp_path / "s.csv"
    p.write_text("a_l1,miss_rate\n1,0.28\n4,0.18\n16,0.13\n64,0.105\n")
    res = tmp_path / "res.csv"
    code, out, _ = run(capsys, "fit", str(p), "--out", str(res))
    kv = _kv(out)
    assert code == 0
    assert kv["model2.mu_n"] == "0.08" and kv["model2.c"] == "0.2"
    assert kv["preferred"] == "2"
    rows = _csv(res.read_text())
    assert len(rows) == 8 and {r["model"] for r in rows} == {"1", "2"}


def test_fit_free_gamma_json(tmp_path, capsys):
    p = tmp_path / "s.csv"
    p.write_text("a_l1,miss_rate\n" + "".join(f"{a},{0.05 + 0.3 * a ** -0.4!r}\n" for a in (1, 2, 4, 8, 16, 32)))
    code, out, _ = run(capsys, "fit", str(p), "--free-gamma", "--json")
    doc = json.loads(out)
    assert code == 0
    assert doc["model2.gamma"] == pytest.approx(0.4, abs=2e-4)


def test_fit_bad_samples(tmp_path, capsys):
    p = tmp_path / "s.csv"
    p.write_text("a_l1,miss_rate\n1,0.2\n1,0.3\n")
    assert run(capsys, "fit", str(p))[0] == 3


COMMANDS = [
    ["eval"],
    ["eval", "--json"],
    ["sweep", "--mode", "budget", *SMALL_GRID],
    ["sweep", "--mode", "l1", *SMALL_GRID],
    ["optimize", *SMALL_GRID],
    ["gen-trace", *SMALL_TRACE],
    ["miss-curve", *SMALL_TRACE, "--set", "curve.l1_sizes=1024,2048,4096", "--set", "sim.workers=2"],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: "-".join(a[:2]))
def test_repeat_runs_byte_identical(tmp_path, argv):
    outs = []
    for i in range(2):
        dest = tmp_path / f"out{i}"
        assert cli.main([*argv, "--seed", "5", "--out", str(dest)]) == 0
        outs.append(dest.read_bytes())
    assert outs[0] == outs[1] and outs[0]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cmpshare", "eval"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "ipc = 4.04944" in proc.stdout
