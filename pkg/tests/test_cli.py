import csv
import json
import math
import subprocess
import sys

import pytest

from tippingscope.cli import EXIT_DOMAIN, EXIT_IO, EXIT_USAGE, load_config, main
from tippingscope.svg import Heatmap, Series, emit_svg, render_svg


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_mu_cosine(capsys):
    r = report(capsys, "mu", "--d", "0.1", "--c", "cosine")["result"]
    assert r["mu_minus"] == pytest.approx(0.0995037190209989, abs=1e-7)
    assert r["mu_plus"] == pytest.approx(-0.0995037190209989, abs=1e-7)
    assert r["disagreement"] < 1e-7


def test_mu_constant(capsys):
    r = report(capsys, "mu", "--d", "0.2", "--c", "0.3")["result"]
    assert r["mu_minus"] == pytest.approx(-0.3) and r["mu_plus"] == pytest.approx(-0.3)


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "mu", "--nonsense")
    assert code == EXIT_USAGE and "usage" in err


def test_unknown_command(capsys):
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE


def test_missing_command(capsys):
    assert run(capsys)[0] == EXIT_USAGE


def test_bad_lambda_token(capsys):
    assert run(capsys, "poincare", "--lambda", "mu_middle")[0] == EXIT_USAGE


def test_classify_order_o5(capsys):
    r = report(capsys, "classify-order", "--g-minus", "0.5", "--g-plus", "0.5", "--d", "0.1")
    assert r["result"]["case"] == "O5"


def test_poincare_with_mu_token(capsys, tmp_path):
    svg = tmp_path / "p.svg"
    r = report(capsys, "poincare", "--g-minus", "0.005", "--g-plus", "0", "--split", "minus",
               "--lambda", "mu_plus", "--svg", str(svg))
    assert r["result"]["count"] == 2
    assert r["outputs"] == [str(svg)]
    assert svg.read_text().count("<polyline") == 2


def test_domain_error_exit_code(capsys):
    code, _, err = run(capsys, "tipping", "--bracket", "0.5,0.6", "--horizon", "1e4", "--quiet")
    assert code == EXIT_DOMAIN and "BadBracket" in err


def test_invalid_model_value_is_domain_error(capsys):
    assert run(capsys, "poincare", "--d", "-1")[0] == EXIT_DOMAIN


def test_io_error_exit_code(capsys, tmp_path):
    code, _, _ = run(capsys, "fit", "--csv", str(tmp_path / "missing.csv"),
                     "--a", "1", "--b", "2", "--m", "1", "--n", "1")
    assert code == EXIT_IO
    code, _, _ = run(capsys, "mu", "--out", str(tmp_path / "no" / "dir.json"))
    assert code == EXIT_IO


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "m.cfg"
    cfg.write_text("# periodic family\n[periodic]\nd = 0.5\ng_minus = 0.05\n")
    assert load_config(str(cfg)) == {"periodic.d": 0.5, "periodic.g_minus": 0.05}
    r = report(capsys, "mu", "--model", str(cfg))
    assert r["config"]["settings"]["d"] == 0.5
    r = report(capsys, "mu", "--model", str(cfg), "--d", "0.1")
    assert r["config"]["settings"]["d"] == 0.1


def test_config_rejects_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("model.colour = blue\n")
    assert run(capsys, "mu", "--model", str(cfg))[0] == EXIT_USAGE


def test_transition_config_keys(capsys, tmp_path):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("model.type = transition\nmodel.rho = 0.28\ndriver.t_ref = -2e5\n"
                   "driver.omega_ref = 1e-5\nmodel.D0 = 39.2\n")
    r = report(capsys, "simulate", "--model", str(cfg), "--t0", "-1000", "--t1", "0",
               "--x0", "8.78", "--samples", "3")
    assert r["config"]["settings"]["rho"] == 0.28
    assert r["result"]["status"] == "Completed"


def test_simulate_blowup(capsys):
    r = report(capsys, "simulate", "--type", "periodic", "--d", "0.1", "--g-minus", "0",
               "--g-plus", "0.5", "--x0", "-30", "--t1", "-6.28", "--samples", "5",
               "--x-guard", "1e4")
    assert r["result"]["status"] == "BlewUp"
    assert r["result"]["blowup"]["direction"] == "-inf"


def test_region_map_csv(capsys, tmp_path):
    out = tmp_path / "map.csv"
    svg = tmp_path / "map.svg"
    code, _, _ = run(capsys, "region-map", "--grid", "4x3", "--out", str(out), "--svg", str(svg),
                     "--threads", "2")
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 12
    assert list(rows[0]) == ["K", "Delta", "n_roots", "cc", "dconc"]
    assert svg.read_text().count("<rect") == 12 + 2 + 3  # cells, background, clip, legend


def test_region_map_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("TIPPINGSCOPE_THREADS", "2")
    r = report(capsys, "region-map", "--grid", "2x2")
    assert len(r["result"]["cells"]) == 4


def test_band(capsys):
    r = report(capsys, "band", "--omega-grid", "8")["result"]
    assert r["hy_positive"] and r["hyyy_negative"]
    b = r["band"]
    for i in range(8):
        assert b["alpha"][i] <= b["alpha_star"][i] <= 0 <= b["beta_star"][i] <= b["beta"][i]


def test_fit_command(capsys, tmp_path):
    data = tmp_path / "gen.csv"
    rows = ["p_t,p_t1"] + [f"{p},{p * math.exp(0.2 * (p - 5) * (30 - p) / 100)}"
                           for p in range(1, 40)] + ["7,0"]
    data.write_text("\n".join(rows) + "\n")
    r = report(capsys, "fit", "--csv", str(data), "--a", "15", "--b", "40", "--m", "2",
               "--n", "3", "--lb", "0", "--plot", str(tmp_path / "f.svg"))["result"]
    assert r["excluded_rows"] == 1 and r["n_points"] == 39
    assert set(r) >= {"knots", "alpha", "sse", "roots", "allee_threshold", "excluded_rows"}


def test_quiet_suppresses_stderr(capsys):
    code, _, err = run(capsys, "tipping", "--classify", "0", "--horizon", "1e4", "--quiet")
    assert code == 0 and err == ""


def test_timing_only_on_request(capsys):
    assert "wall_time_s" not in report(capsys, "mu")
    assert "wall_time_s" in report(capsys, "mu", "--timing")


def test_output_file_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(capsys, "poincare", "--split", "plus", "--lambda", "mu_minus",
                   "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tippingscope.cli", "mu", "--quiet"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "mu"


# --- svg ----------------------------------------------------------------------------------

def test_empty_series_axes_only():
    text = render_svg([])
    assert "<path" not in text and "<polyline" not in text
    assert text.count('class="axis"') == 2


def test_two_series_distinct_classes():
    text = render_svg([Series([0, 1], [0, 1], "a"), Series([0, 1], [1, 0], "b")])
    assert text.count("<polyline") == 2
    assert 'class="series-0"' in text and 'class="series-1"' in text


def test_heatmap_cell_count(tmp_path):
    n = 100
    edges = [i / n for i in range(n + 1)]
    cats = [["A" if (i + j) % 3 else "B" for j in range(n)] for i in range(n)]
    path = emit_svg(str(tmp_path / "h.svg"), heatmap=Heatmap(edges, edges, cats))
    text = open(path).read()
    assert text.count("<rect") - text.count('width="12" height="12"') - 2 == n * n  # bg, clip


def test_svg_rejects_non_finite():
    with pytest.raises(ValueError):
        render_svg([Series([0, 1], [0, math.nan])])
