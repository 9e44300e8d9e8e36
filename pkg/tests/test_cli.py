import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pompeiu.cli import dump_config, main, parse_config
from pompeiu.errors import ParseError, ValidationError
from pompeiu.exact import GaussRational

QUAD = """
[configuration]
points = [["0","0"],["2","0"],["1","2"],["3","1"]]
weights = [["1","0"],["1","0"],["1","0"],["2","0"]]
"""

MINIMAL = """
[configuration]
points = [0, 1]

[group]
kind = "translations"

[window]
x = [0, 5]
"""


def run(tmp_path, capsys, text, *args):
    cfg = tmp_path / "run.toml"
    cfg.write_text(text)
    code = main([args[0], str(cfg), *args[1:]])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_minimal_config():
    cfg = parse_config(MINIMAL)
    assert cfg.configuration.points == (GaussRational(0), GaussRational(1))
    assert len(cfg.window) == 6


def test_malformed_rational_reports_location():
    with pytest.raises(ParseError) as err:
        parse_config('[configuration]\npoints = ["3/0", 1]\n')
    assert err.value.line == 2 and err.value.column is not None


def test_toml_syntax_error_reports_location():
    with pytest.raises(ParseError) as err:
        parse_config("[configuration]\npoints = [1,\n")
    assert err.value.line is not None


def test_unknown_keys_rejected():
    with pytest.raises(ParseError) as err:
        parse_config("[configuration]\npoints = [0, 1]\ncolour = 3\n")
    assert err.value.key == "configuration.colour" and err.value.line == 3
    with pytest.raises(ParseError):
        parse_config("[extras]\nx = 1\n")


def test_weight_sum_zero(tmp_path, capsys):
    text = '[configuration]\npoints = [0, 1]\nweights = [1, -1]\n'
    code, out, err = run(tmp_path, capsys, text, "analyze")
    assert code == 2
    assert json.loads(err)["invariant"] == "weight_sum_zero"


rationals = st.fractions(max_denominator=50)


@given(st.lists(st.tuples(rationals, rationals), min_size=1, max_size=4, unique=True),
       st.sampled_from(["translations", "rigid", "isometries", "direct-similarities"]),
       st.booleans(), st.integers(1, 4), st.floats(1, 44), st.integers(1, 10**6))
@settings(max_examples=40, deadline=None)
def test_config_round_trip(points, kind, quarter, den, alpha, cap):
    pts = ", ".join(f'["{a}", "{b}"]' for a, b in points)
    text = (f"[configuration]\npoints = [{pts}]\n[group]\nkind = \"{kind}\"\n"
            f"rotation_units = [[\"3/5\", \"-4/5\"]]\nscale_set = [\"1/2\", 3]\nquarter_turns = {str(quarter).lower()}\n"
            f"[window]\ndenominator = {den}\nx = [-3, 3]\ny = [0, 2]\n"
            f"[options]\nalpha = {alpha!r}\nbranch_cap = {cap}\ntarget = [\"1/2\", 0]\n")
    cfg = parse_config(text)
    assert parse_config(dump_config(cfg)) == cfg


def test_check_linear_interval(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "[configuration]\npoints = [0,1,2,3,4,5]\n", "check-linear")
    assert code == 0 and json.loads(out)["verdict"] == "NOT_POMPEIU"


def test_analyze_quadrangle(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, QUAD, "analyze", "--out", str(tmp_path / "o"))
    res = json.loads(out)
    assert code == 0 and res["pipeline"] == "rational-quadrangle"
    assert res["result"]["reduction"]["verified"]
    assert res["result"]["certificate"]["verdict"] == "FORCED_TRIVIAL"
    assert (tmp_path / "o" / "analyze.json").read_text() == out
    assert (tmp_path / "o" / "reduction.svg").exists()


def test_analyze_routes(tmp_path, capsys):
    _, out, _ = run(tmp_path, capsys, "[configuration]\npoints = [0, 1, 3]\n", "analyze")
    assert json.loads(out)["pipeline"] == "collinear-commensurable"
    _, out, _ = run(tmp_path, capsys, '[configuration]\npoints = [0, 1, ["0","1"], ["1","1"]]\n', "analyze")
    assert json.loads(out)["pipeline"] == "parallelogram"
    text = '[configuration]\npoints = [0, 1, ["0","1"]]\n[window]\nx = [0, 3]\ny = [0, 3]\n'
    _, out, _ = run(tmp_path, capsys, text, "analyze")
    assert json.loads(out)["pipeline"] == "grid"


def test_grid_rank_small_window_warns(tmp_path, capsys):
    text = "[configuration]\npoints = [0, 9]\n[window]\nx = [0, 5]\n"
    code, out, _ = run(tmp_path, capsys, text, "grid-rank")
    res = json.loads(out)
    assert code == 0 and res["rows"] == 0 and "warning" in res


def test_grid_rank_writes_kernel_csv(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, MINIMAL, "grid-rank", "--out", str(tmp_path / "o"))
    assert code == 0
    assert (tmp_path / "o" / "kernel_0.csv").read_text().splitlines()[1] == "0,0,1,0"


def test_delta_and_degree_commands(tmp_path, capsys):
    text = ('[configuration]\npoints = [0, 1, 2]\nweights = [1, -2, 1]\n'
            '[group]\nkind = "order-preserving-line-similarities"\nscale_set = [1, 2, 3]\n'
            '[window]\nx = [0, 8]\n[options]\ntarget = 4\n')
    code, out, _ = run(tmp_path, capsys, text, "degree-test")
    assert code == 0 and json.loads(out)["all_passed"]
    code, out, _ = run(tmp_path, capsys, text, "delta-cert")
    assert code == 0 and json.loads(out)["certificate"] is None


def test_witness_command(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, '[configuration]\npoints = [0, 1, ["0", "1"]]\n', "witness")
    res = json.loads(out)
    assert code == 0 and res["verified"] and res["witness"]["lambda_exact"] == "-2"


def test_branch_cap_exit_code(tmp_path, capsys):
    code, _, err = run(tmp_path, capsys, QUAD, "snf-certificate", "--branch-cap", "1")
    assert code == 3 and json.loads(err)["error"] == "branch_cap_exceeded"


def test_position_error_exit_code(tmp_path, capsys):
    text = '[configuration]\npoints = [0, 1, 2, ["1","2"]]\n'
    code, _, err = run(tmp_path, capsys, text, "reduce-quadrangle")
    assert code == 2 and json.loads(err)["which"] == "general_position"


def test_construct_halpha_command(tmp_path, capsys):
    code = main(["construct-halpha", "--alpha", "30", "--out", str(tmp_path)])
    res = json.loads(capsys.readouterr().out)
    assert code == 0 and res["report"]["passed"] and res["alpha"] == 30.0
    assert (tmp_path / "halpha.svg").exists()
    assert main(["construct-halpha", "--alpha", "45"]) == 2
