from __future__ import annotations

import csv
from io import StringIO
from json import loads
from typing import TYPE_CHECKING

import pytest

from forbcfg.choice_engine import load_choice
from forbcfg.cli import ExitStatus, build_parser, main
from forbcfg.recurrence import build_g
from forbcfg.tcm_opt import load_tcm, save_tcm, weight

if TYPE_CHECKING:
    from pathlib import Path


def _json(capsys: pytest.CaptureFixture[str]) -> dict[str, object]:
    data = loads(capsys.readouterr().out)
    assert isinstance(data, dict)
    return data


@pytest.mark.parametrize(
    "argv",
    [
        ["forb-exact", "--m", "2", "--r", "3"],
        ["forb-choices", "--m", "3", "--r", "3"],
        ["h-exact", "--m", "3"],
        ["h-local", "--m", "4", "--seed", "0"],
        ["h2", "--max-m", "4"],
        ["bounds", "--m", "4", "--r", "3"],
        ["lambda"],
        ["sandwich", "--m", "3", "--r", "4"],
        ["verify", "--suite", "sauer"],
        ["emit-tables"],
    ],
)
def test_every_subcommand_has_a_handler(argv: list[str]) -> None:
    args = build_parser().parse_args(argv)

    assert args.subcommand == argv[0]
    assert callable(args.handler)


def test_forb_exact_json(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["forb-exact", "--m", "2", "--r", "3"]) == ExitStatus.SUCCESS

    data = _json(capsys)

    assert data["schema"] == 1
    assert data["command"] == "forb-exact"
    assert data["parameters"]["pattern"] == "M"  # type: ignore[index]
    assert data["passed"] is None
    (row,) = data["tables"]["forb"]  # type: ignore[index]
    assert row["value"] == 9
    assert row["status"] == "exact"


def test_forb_exact_witness(capsys: pytest.CaptureFixture[str]) -> None:
    main(["forb-exact", "--m", "2", "--r", "2", "--pattern", "K2", "--witness"])

    witness = _json(capsys)["tables"]["witness"]  # type: ignore[index]

    assert [row["column"] for row in witness] == [0, 1, 2]
    assert len({row["entries"] for row in witness}) == 3


def test_forb_exact_missing_pattern_file(
    tmp_path: Path,
    capsys: pytest.CaptureFixture[str],
) -> None:
    status = main(["forb-exact", "--m", "2", "--r", "3", "--pattern", str(tmp_path / "no.json")])

    assert status == ExitStatus.USAGE_ERROR
    assert "neither a builtin pattern" in capsys.readouterr().err


def test_forb_choices_saves_the_choice(
    tmp_path: Path,
    capsys: pytest.CaptureFixture[str],
) -> None:
    path = tmp_path / "out" / "choice.json"

    assert main(["forb-choices", "--m", "3", "--r", "3", "--save-choice", str(path)]) == 0

    (summary,) = _json(capsys)["tables"]["forb"]  # type: ignore[index]
    assert summary["value"] == 24
    assert summary["good"] is False
    assert load_choice(path).selectors == (0,)


@pytest.mark.parametrize(("flags", "evaluated"), [([], 1), (["--no-prune"], 6)])
def test_forb_choices_good_only_pruning(
    flags: list[str],
    evaluated: int,
    capsys: pytest.CaptureFixture[str],
) -> None:
    argv = ["forb-choices", "--m", "3", "--r", "3", "--mode", "good_only", *flags]

    assert main(argv) == 0

    (summary,) = _json(capsys)["tables"]["forb"]  # type: ignore[index]
    assert summary["value"] == 24
    assert summary["evaluated"] == evaluated
    assert summary["good"] is True


def test_forb_choices_sampling_is_reproducible(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["forb-choices", "--m", "4", "--r", "3", "--mode", "sample", "--samples", "25"]

    main([*argv, "--seed", "9"])
    first = capsys.readouterr().out
    main([*argv, "--seed", "9"])
    second = capsys.readouterr().out

    assert first == second
    assert loads(first)["tables"]["forb"][0]["status"] == "lower_bound"


def test_forb_choices_sampling_needs_a_seed() -> None:
    with pytest.raises(SystemExit) as exc_info:
        main(["forb-choices", "--m", "4", "--r", "3", "--mode", "sample", "--samples", "25"])

    assert exc_info.value.code == ExitStatus.USAGE_ERROR


def test_h_exact_with_argmaxes(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = tmp_path / "best.json"

    assert main(["h-exact", "--m", "3", "--argmaxes", "5", "--save-tcm", str(path)]) == 0

    data = _json(capsys)
    assert data["tables"]["h_exact"][0]["H"] == 4  # type: ignore[index]
    assert data["tables"]["h_exact"][0]["value"] == 4  # type: ignore[index]
    (multiplicities,) = data["tables"]["multiplicities"]  # type: ignore[index]
    assert set(multiplicities) == {"1,2", "1,3", "2,3"}
    assert sorted(multiplicities.values()) == [0, 0, 1]
    partition = data["tables"]["closed_sets"]  # type: ignore[index]
    assert sorted(part["size"] for part in partition) == [1, 2]
    assert sorted(",".join(part["set"] for part in partition).split(",")) == ["1", "2", "3"]
    assert len(data["tables"]["argmaxes"]) == 3  # type: ignore[index]
    assert weight(load_tcm(path), 2) == 4


def test_h_exact_size_guard(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["h-exact", "--m", "7"]) == ExitStatus.USAGE_ERROR
    assert "forbcfg h-exact" in capsys.readouterr().err


def test_h_exact_rejects_bad_alpha() -> None:
    with pytest.raises(SystemExit):
        main(["h-exact", "--m", "3", "--alpha", "two"])


def test_h_local_from_the_construction(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["h-local", "--m", "5", "--seed", "1", "--start", "construction"]) == 0

    data = _json(capsys)
    (row,) = data["tables"]["h_local"]  # type: ignore[index]
    assert row["weight"] == 30
    assert row["status"] == "lower_bound"
    assert row["local_optimum"] is True
    assert row["value"] == 30

    tables = data["tables"]
    (multiplicities,) = tables["multiplicities"]  # type: ignore[index]
    assert len(multiplicities) == 10
    assert sum(multiplicities.values()) == 10
    assert sum(part["size"] for part in tables["closed_sets"]) == 5  # type: ignore[index]


def test_h_local_from_a_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = tmp_path / "start.json"
    save_tcm(build_g(6).tcm, path)

    assert main(["h-local", "--m", "6", "--seed", "2", "--tcm", str(path)]) == 0

    (row,) = _json(capsys)["tables"]["h_local"]  # type: ignore[index]
    assert row["initial_weight"] == 73
    assert row["weight"] == 73


def test_h2_csv(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["h2", "--max-m", "8"]) == 0

    rows = list(csv.DictReader(StringIO(capsys.readouterr().out)))

    assert [float(row["H2"]) for row in rows] == [0, 1, 4, 12, 30, 73, 172, 400]
    assert (rows[5]["split_a"], rows[5]["split_b"]) == ("3", "3")
    assert all(row["match"] == "true" for row in rows)


def test_h2_exact_rational_alpha(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["h2", "--max-m", "4", "--alpha", "3/2", "--exact"]) == 0

    rows = list(csv.DictReader(StringIO(capsys.readouterr().out)))

    assert float(rows[2]["H2"]) == 3.5
    assert rows[2]["expected"] == ""


def test_bounds(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["bounds", "--m", "4", "--r", "3"]) == 0

    data = _json(capsys)
    assert data["passed"] is True
    (row,) = data["tables"]["bounds"]  # type: ignore[index]
    assert row["forb_lower"] == 60
    assert row["trivial_upper"] == 64


def test_bounds_one_row(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["bounds", "--m", "1", "--r", "3"]) == 0

    assert _json(capsys)["passed"] is True


def test_lambda_to_nested_output(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = tmp_path / "a" / "b" / "lambda.json"

    assert main(["lambda", "--output", str(path)]) == 0

    assert capsys.readouterr().out == ""
    data = loads(path.read_text())
    assert data["passed"] is True
    assert data["tables"]["lambda"][0]["lambda"] == pytest.approx(0.390747, abs=1e-5)


def test_sandwich(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["sandwich", "--m", "3", "--r", "4"]) == 0

    (row,) = _json(capsys)["tables"]["sandwich"]  # type: ignore[index]
    assert row["excess"] == 7
    assert row["holds"] is True


def test_verify_text(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["verify", "--suite", "sauer"]) == 0

    out = capsys.readouterr().out
    assert out.startswith("verify: ")
    assert out.rstrip().endswith("PASSED")


def test_verify_rejects_unknown_suites() -> None:
    with pytest.raises(SystemExit) as exc_info:
        main(["verify", "--suite", "everything"])

    assert exc_info.value.code == ExitStatus.USAGE_ERROR


@pytest.mark.slow
def test_emit_tables(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["emit-tables"]) == 0

    out = capsys.readouterr().out
    assert "# h_table" in out
    assert "# upper_table" in out
    assert "# h2_table" in out
