import json
import logging

import pytest

from app import config
from app.main import run
from app.services.series_core import LaurentPoly, QSeries, qs_to_payload
from app.services.verification import APPENDIX_SERIES_X3Y3

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_series_single_coefficient(capsys):
    code, out, _ = invoke(capsys, "series", "--u", "2", "--v", "5", "--nmax", "0")
    assert code == 0
    assert out.strip() == '{"nmax":0,"coeffs":[[0,[[0,"1"]]]]}'


def test_series_of_the_node(capsys):
    code, out, _ = invoke(capsys, "series", "--u", "1", "--v", "1", "--nmax", "2")
    assert code == 0
    assert out.strip() == '{"nmax":2,"coeffs":[[0,[[0,"1"]]],[1,[[0,"1"]]],[2,[[0,"1"],[2,"1"]]]]}'


def test_series_total_degree(capsys):
    code, out, _ = invoke(
        capsys, "series", "--u", "1", "--v", "1", "--nmax", "4", "--truncation", "total_degree"
    )
    assert code == 0
    assert json.loads(out)["coeffs"] == [
        [0, [[0, "1"]]],
        [1, [[0, "1"]]],
        [2, [[0, "1"], [2, "1"]]],
        [3, [[0, "1"]]],
        [4, [[0, "1"]]],
    ]


def test_series_golden_total_degree(capsys):
    code, out, _ = invoke(
        capsys, "series", "--u", "3", "--v", "3", "--nmax", "10", "--truncation", "total_degree"
    )
    assert code == 0
    golden = QSeries.from_poly(LaurentPoly.from_expr(APPENDIX_SERIES_X3Y3), 10)
    assert out.strip() == qs_to_payload(golden).model_dump_json()
    coeffs = json.loads(out)["coeffs"]
    assert coeffs[4] == [4, [[0, "1"], [2, "1"], [4, "2"], [6, "1"]]]
    assert coeffs[10] == [10, [[0, "1"]]]


def test_series_predicted_homology(capsys):
    code, predicted, _ = invoke(
        capsys, "series", "--u", "2", "--v", "3", "--nmax", "6", "--predicted-homology"
    )
    assert code == 0
    _, plain, _ = invoke(capsys, "series", "--u", "2", "--v", "3", "--nmax", "6")
    assert predicted == plain


@pytest.mark.parametrize(
    "argv",
    [
        ["series", "--u", "3", "--v", "2"],
        ["series", "--u", "3", "--v", "7"],
        ["series", "--u", "1"],
        ["series", "--u", "1", "--v", "1", "--nmax", "-1"],
        ["enumerate", "--plane", "--u", "1", "--n", "2"],
        ["enumerate", "--u", "3", "--v", "5", "--n", "2"],
        ["enumerate", "--plane", "--n", "-1"],
        ["verify", "--suite", "bogus"],
        ["verify", "--suite", "vertical_oracle", "--u", "3"],
        ["verify", "--suite", "printed_fractions", "--v", "5"],
        ["series", "--u", "1", "--v", "3", "--predicted-homology"],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    code, out, _ = invoke(capsys, *argv)
    assert code == 2
    assert out == ""


def test_enumerate_vertical_json_lines(capsys):
    code, out, _ = invoke(capsys, "enumerate", "--u", "1", "--v", "1", "--n", "2")
    assert code == 0
    records = [json.loads(line) for line in out.splitlines()]
    assert records == [
        {"parts": [2], "u": 1, "v": 1, "n": 2, "dim": 0, "contribution": "Q^2"},
        {"parts": [1, 1], "u": 1, "v": 1, "n": 2, "dim": 1, "contribution": "Q^2*T^2"},
    ]


def test_enumerate_plane(capsys):
    code, out, _ = invoke(capsys, "enumerate", "--plane", "--n", "1")
    assert code == 0
    assert out.strip() == '{"layers":[["TWO",1,1]],"n":1,"m1":0,"m2":0,"contribution":"Q"}'


def test_enumerate_diagonal_ascii(capsys):
    code, out, _ = invoke(capsys, "enumerate", "--u", "3", "--v", "3", "--n", "2", "--format", "ascii")
    assert code == 0
    blocks = out.strip().split("\n\n")
    assert len(blocks) == 3
    assert blocks[0].startswith("n=2 m1=1 m2=0 contribution=Q^2*T^2 - Q^2")


def test_verify_passing_suite(capsys):
    code, out, _ = invoke(capsys, "verify", "--suite", "appendix_golden,printed_fractions", "--workers", "2")
    assert code == 0
    reports = json.loads(out)
    assert [r["name"] for r in reports] == [
        "appendix_golden",
        "printed_fractions_v2",
        "printed_fractions_v3",
        "printed_fractions_v4",
    ]
    assert all(r["status"] == "PASS" for r in reports)
    assert all("first_divergence" not in r for r in reports)


def test_verify_all_passes(capsys):
    code, out, _ = invoke(capsys, "verify", "--suite", "all")
    assert code == 0
    reports = json.loads(out)
    assert len(reports) == 26
    assert all(r["status"] == "PASS" for r in reports)


def test_verify_failing_suite(capsys):
    code, out, _ = invoke(capsys, "verify", "--suite", "durfee", "--kmax", "1", "--nmax", "4")
    assert code == 1
    reports = {r["name"]: r for r in json.loads(out)}
    assert reports["durfee_k1_n4"]["status"] == "FAIL"
    assert reports["durfee_k1_n4"]["first_divergence"]["degree"] == 3


def test_profile_goes_to_stderr(capsys):
    code, out, err = invoke(capsys, "series", "--u", "1", "--v", "3", "--nmax", "5", "--profile")
    assert code == 0
    assert json.loads(out)["nmax"] == 5
    profile = json.loads(err.strip().splitlines()[-1])
    assert "series" in profile["profile_ms"]


def test_verbose_logs_the_configuration(capsys):
    code, _, err = invoke(capsys, "series", "--u", "1", "--v", "1", "--nmax", "1", "--verbose")
    assert code == 0
    assert "Configuration:" in err
    assert config.get_config()["verification"]["durfee"] == {"kmax": 12, "nmax": 24}


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
