import csv
import io

import pytest
from mpmath import mp, mpc, mpf

from wkbtrunc.cli import fmt, main
from wkbtrunc.oracle import airy_initial_data, airy_solution, oracle_grid, sup_error
from wkbtrunc.wkb import IVProblem, evaluate_on_grid, solve

CONST = ["--a", "1", "--interval", "0", "1", "--phi0", "1", "0", "--phi1", "0", "-1"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    header = {}
    lines = text.splitlines()
    body = [line for line in lines if not line.startswith("#")]
    for line in lines:
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            header[k] = v
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return header, rows[0], rows[1:]


def test_solve_constant_coefficient_is_plane_wave(capsys):
    code, out, _ = run(["solve", *CONST, "--eps", "0.1", "--N", "2", "--grid", "17"], capsys)
    assert code == 0
    header, cols, rows = parse_csv(out)
    assert cols == ["x", "re_phi", "im_phi", "re_eps_dphi", "im_eps_dphi"]
    assert header["command"] == "solve" and header["N"] == "2"
    for r in rows:
        x = mpf(r[0])
        exact = mp.exp(mpc(0, -1) * x / mpf("0.1"))
        assert abs(mpc(r[1], r[2]) - exact) <= mpf(10) ** (6 - 34)


def test_solve_airy_first_row_is_initial_data(capsys):
    code, out, _ = run(["solve", "--a", "x", "--interval", "1", "2", "--eps", "0.1", "--airy-ic", "--N", "3", "--grid", "5"], capsys)
    assert code == 0
    _, _, rows = parse_csv(out)
    phi0, phi1 = airy_initial_data(mpf("0.1"))
    assert mpf(rows[0][0]) == 1
    assert abs(mpc(rows[0][1], rows[0][2]) - phi0) <= mpf(10) ** (6 - 34)
    assert abs(mpc(rows[0][3], rows[0][4]) - phi1) <= mpf(10) ** (6 - 34)


def test_auto_N_is_recorded(capsys):
    code, out, _ = run(["solve", "--airy-ic", "--eps", "0.1", "--auto-N", "least-term", "--grid", "3"], capsys)
    assert code == 0
    header, _, _ = parse_csv(out)
    assert header["auto_N"] == "least-term"
    assert 10 <= int(header["result.N"]) <= 17


def test_norms_rows(capsys):
    code, out, _ = run(["norms", "--N-max", "12"], capsys)
    assert code == 0
    _, cols, rows = parse_csv(out)
    assert cols == ["n", "sup_norm_Snprime", "bound_sqrt3_K2n_nn"]
    assert [int(r[0]) for r in rows] == list(range(13))
    assert mpf(rows[1][1]) == mpf(1) / 4
    assert abs(mpf(rows[2][1]) - mpf(5) / 32) < mpf(10) ** -32
    assert all(mpf(r[1]) <= mpf(r[2]) for r in rows)


def test_sweep_constant_coefficient_at_floor(capsys):
    code, out, _ = run(["sweep", *CONST, "--eps", "0.1", "0.01", "--N", "0", "3", "--grid", "33"], capsys)
    assert code == 0
    _, cols, rows = parse_csv(out)
    assert cols == ["eps", "N", "sup_error"]
    assert [(r[0][:3], r[1]) for r in rows] == [("1.0", "0"), ("1.0", "3")] * 2
    assert all(mpf(r[2]) <= mpf(10) ** (6 - 34) for r in rows)


def test_single_sweep_row_matches_solve(capsys):
    code, out, _ = run(["sweep", "--airy-ic", "--eps", "0.1", "--N", "2", "--grid", "33"], capsys)
    assert code == 0
    _, _, rows = parse_csv(out)
    assert len(rows) == 1
    eps = mpf("0.1")
    phi0, phi1 = airy_initial_data(eps)
    pts = oracle_grid((1, 2), 33)
    values = evaluate_on_grid(solve(IVProblem("x", (1, 2), eps, phi0, phi1), 2), pts)[0]
    assert rows[0][2] == fmt(sup_error(values, airy_solution(eps, pts)))


def test_nopt_constant_coefficient(capsys):
    code, out, _ = run(["nopt", *CONST, "--eps", "0.1", "0.05", "--N-max", "4", "--grid", "33"], capsys)
    assert code == 0
    _, cols, rows = parse_csv(out)
    assert cols == ["eps", "N_opt", "optimal_error", "envelope"]
    assert [r[1] for r in rows] == ["0", "0"]
    assert all(mpf(r[2]) <= mpf(10) ** (6 - 34) for r in rows)


def test_output_is_deterministic_and_reruns(tmp_path, capsys):
    first, second, again = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    argv = ["sweep", "--airy-ic", "--eps-sweep", "0.2", "0.1", "3", "--N", "1", "2", "--grid", "17", "--precision", "40"]
    assert main([*argv, "-o", str(first)]) == 0
    assert main([*argv, "-o", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert main(["rerun", str(first), "-o", str(again)]) == 0
    assert again.read_bytes() == first.read_bytes()
    text = first.read_text()
    assert "\r" not in text
    _, _, rows = parse_csv(text)
    assert len(rows[0][2].split("e")[0].replace("-", "").replace(".", "")) == 40


def test_figure_written(tmp_path, capsys):
    fig = tmp_path / "norms.png"
    assert main(["norms", "--N-max", "6", "--figure", str(fig)]) == 0
    assert fig.stat().st_size > 1000


@pytest.mark.parametrize(
    "argv,code",
    [
        (["solve", "--a", "x+", "--eps", "0.1", "--airy-ic", "--N", "1"], 1),
        (["solve", "--a", "x", "--eps", "0.1", "--N", "1"], 1),
        (["solve", "--a", "2*x", "--eps", "0.1", "--airy-ic", "--N", "1"], 1),
        (["solve", "--airy-ic", "--eps", "0.1", "--N", "1", "--precision", "20"], 1),
        (["solve", "--airy-ic", "--eps", "2", "--N", "1"], 1),
        (["sweep", "--airy-ic", "--eps", "0.1", "0.2"], 1),
        (["sweep", "--airy-ic", "--eps-sweep", "0.2", "0.1", "1"], 1),
        (["norms", "--bogus"], 1),
        (["rerun", "/nonexistent.csv"], 1),
        (["solve", "--a", "x-1.5", "--eps", "0.1", "--phi0", "1", "0", "--phi1", "0", "1", "--N", "1"], 2),
        (["solve", "--a", "ln(x-1.5)+3", "--eps", "0.1", "--phi0", "1", "0", "--phi1", "0", "1", "--N", "1"], 2),
    ],
)
def test_exit_codes(argv, code, capsys):
    try:
        got = main(argv)
    except SystemExit as exc:
        got = exc.code
    err = capsys.readouterr().err
    assert got == code
    assert err.strip()
    if code == 2:
        assert len(err.strip().splitlines()) == 1


def test_formatting():
    mp.dps = 34
    assert fmt(0).startswith("0")
    assert fmt(mpf(0)) == "0." + "0" * 33 + "e+0"
    assert fmt(mpf("0.25")) == "2.5" + "0" * 32 + "e-1"
    assert fmt(mp.inf) == "inf"
