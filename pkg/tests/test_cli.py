import json

import pytest

from convexpoly.cli import run
from convexpoly.geometry import figure1_path


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def column(csv_text):
    lines = csv_text.strip().splitlines()
    return [line.split(",")[1] for line in lines[1:]]


@pytest.mark.parametrize("method", ["brute", "dp", "series", "formula"])
def test_count_by_semiperimeter(capsys, method):
    code, out, _ = call(capsys, "count", "--stat", "count", "--grade", "sp", "--max", "8", "--method", method)
    assert code == 0
    assert out.splitlines()[0] == "sp,count"
    assert column(out) == ["1", "2", "7", "28", "120", "528", "2344"]


@pytest.mark.parametrize("method", ["brute", "dp", "series"])
def test_count_by_outer_sites(capsys, method):
    code, out, _ = call(capsys, "count", "--grade", "outer", "--max", "11", "--method", method)
    assert code == 0 and column(out) == ["1", "0", "2", "4", "12", "32", "102", "276"]


@pytest.mark.parametrize("method", ["brute", "dp", "series", "formula"])
def test_interior_totals(capsys, method):
    code, out, _ = call(capsys, "count", "--stat", "int", "--max", "7", "--method", method)
    assert code == 0 and out.splitlines()[-3:] == ["5,12", "6,106", "7,800"]


def test_series_dump(capsys):
    code, out, _ = call(capsys, "series", "--gf", "j_outer_uni", "--box", "q=13", "--variant", "printed")
    assert code == 0
    assert out.splitlines()[0] == "# vars=q box=13"
    terms = dict(line.split("\t") for line in out.splitlines()[1:])
    assert terms == {"4": "1/1", "6": "2/1", "7": "4/1", "8": "10/1", "9": "28/1", "10": "77/1",
                     "11": "208/1", "12": "586/1", "13": "1572/1"}
    # the default variant is the census-consistent one
    _, out, _ = call(capsys, "series", "--gf", "j_outer_uni", "--box", "q=8")
    assert out.splitlines()[-1] == "8\t12/1"


def test_series_json(capsys):
    code, out, _ = call(capsys, "series", "--gf", "cp_halfperimeter", "--box", "x=5", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["variant"] == "corrected"
    assert [t["coefficient"] for t in data["terms"]] == ["1", "2", "7", "28"]


def test_stats_on_figure1(capsys):
    code, out, _ = call(capsys, "stats", "--in", str(figure1_path()))
    header, row = out.strip().splitlines()
    stats = dict(zip(header.split(","), map(int, row.split(","))))
    assert code == 0
    assert (stats["a"], stats["o"], stats["int"], stats["d2"], stats["d4"]) == (22, 18, 11, 10, 6)


def test_enumerate(capsys):
    code, out, _ = call(capsys, "enumerate", "--max-sp", "3")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "spans" and sorted(lines[1:]) == ["0 0", "0 0;0 0", "0 1"]
    code, out, _ = call(capsys, "enumerate", "--max-sp", "4", "--class", "cpbu", "--emit", "stats", "--format", "json")
    assert code == 0 and len(json.loads(out)["polyominoes"]) == 8


def test_asymptotic_table(capsys):
    code, out, _ = call(capsys, "asymptotic", "--target", "avg_deg2", "--max-n", "7", "--source", "formula")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "n,exact,asymptotic,ratio"
    n, exact, asym, ratio = lines[1].split(",")
    assert (n, exact) == ("5", "36/7")
    assert len(asym.replace(".", "")) == 30 and len(ratio.replace(".", "").lstrip("0")) <= 30


def test_verify_exit_codes(capsys):
    code, out, _ = call(capsys, "verify", "--suite", "kernels", "--skip-printed")
    assert code == 0 and "FAIL" not in out
    code, out, _ = call(capsys, "verify", "--suite", "kernels")
    assert code == 1 and "FAIL kernels/residual eqCu1 with displayed j_u [printed form]" in out


def test_usage_errors(capsys):
    assert call(capsys, "series", "--gf", "nope", "--box", "x=3")[0] == 2
    assert call(capsys, "series", "--gf", "cp_xy", "--box", "x3")[0] == 2
    assert call(capsys, "count", "--stat", "a", "--max", "6", "--method", "formula")[0] == 2
    assert call(capsys, "count", "--grade", "outer", "--stat", "int", "--max", "6")[0] == 2
    assert call(capsys, "count", "--max", "1")[0] == 2
    assert call(capsys, "stats", "--in", "/nonexistent/file")[0] == 2
    code, _, err = call(capsys, "series", "--gf", "cp_xy", "--box", "x=3,y=3", "--variant", "corrected")
    assert code == 2 and "variant" in err


def test_output_is_deterministic(capsys, tmp_path):
    argv = ["count", "--stat", "o", "--max", "9", "--threads", "2", "--format", "json"]
    first = call(capsys, *argv)[1]
    assert call(capsys, *argv)[1] == first
    out = tmp_path / "o.json"
    assert run(argv[:-2] + ["--format", "json", "--out", str(out)]) == 0
    assert out.read_text() == first
