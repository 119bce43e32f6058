import io
import json

from evogroup.cli import main
from evogroup.ingest import write_csv
from evogroup.synth import one_group_script, synth

from scenarios import FIG1_PARAMS, fig1_points


def run_cli(args):
    out = io.StringIO()
    code = main(args, out=out)
    return code, out.getvalue()


def fig1_csv(tmp_path):
    path = tmp_path / "fig1.csv"
    write_csv(str(path), [q for _, pts in fig1_points() for q in pts])
    return str(path)


def fig1_flags():
    p = FIG1_PARAMS
    return ["--w", str(p.w), "--kc", str(p.k_c), "--mc", str(p.m_c), "--d", str(p.d),
            "--kp", str(p.k_p), "--mp", str(p.m_p), "--mg", str(p.m_g), "--kg", str(p.k_g),
            "--eps", str(p.eps), "--minpts", str(p.min_pts)]


def test_run_serial_and_mtod_identical(tmp_path):
    csv = fig1_csv(tmp_path)
    code, a = run_cli(["run", csv] + fig1_flags())
    assert code == 0
    dot = tmp_path / "g.dot"
    code, b = run_cli(["run", csv, "--mode", "mtod", "--workers", "2", "--dot", str(dot)]
                      + fig1_flags())
    assert code == 0 and a == b
    last = json.loads(a.splitlines()[-1])
    assert last["type"] == "evolving_group" and len(last["groups"]) == 4
    assert dot.read_text().startswith("digraph")


def test_config_file_and_override(tmp_path):
    csv = fig1_csv(tmp_path)
    cfg = tmp_path / "run.cfg"
    p = FIG1_PARAMS
    cfg.write_text("".join(f"{k}={v}\n" for k, v in p.as_dict().items()) + "mode=serial\n")
    code, a = run_cli(["run", csv, "--config", str(cfg)])
    assert code == 0 and '"evolving_group"' in a
    code, b = run_cli(["run", csv, "--config", str(cfg), "--kg", "9"])
    assert code == 0 and '"evolving_group"' not in b


def test_input_errors(tmp_path):
    assert run_cli(["run", str(tmp_path / "missing.csv")])[0] == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert run_cli(["run", str(bad)])[0] == 1
    assert run_cli(["run", fig1_csv(tmp_path), "--kc", "99"])[0] == 1


def test_synth_then_evaluate(tmp_path):
    script = tmp_path / "s.json"
    script.write_text(json.dumps(one_group_script(6, 20, noise=10, seed=2)))
    csv = tmp_path / "s.csv"
    assert run_cli(["synth", str(script), "-o", str(csv)])[0] == 0
    code, out = run_cli(["run", str(csv)])
    assert code == 0
    det = tmp_path / "det.ndjson"
    det.write_text(out)
    truth = tmp_path / "truth.txt"
    truth.write_text(" ".join(f"g{i:03d}" for i in range(6)) + "\n")
    code, res = run_cli(["evaluate", str(det), str(truth)])
    assert code == 0 and json.loads(res)["precision"] == 1.0 and json.loads(res)["recall"] == 1.0


def test_oracle_subcommand(tmp_path):
    code, out = run_cli(["oracle", fig1_csv(tmp_path), "--end", "4"] + fig1_flags())
    assert code == 0
    rows = [json.loads(x) for x in out.splitlines()]
    assert any(r["aggregation"] for r in rows)


def test_empty_input(tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("")
    assert run_cli(["run", str(empty)]) == (0, "")
