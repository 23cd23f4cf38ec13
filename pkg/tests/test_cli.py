import json
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from sepkit.__main__ import main
from sepkit.core.dataset import export_csv, ingest_csv
from sepkit.core.models import DataMatrix, LabeledDataset, SamplerFamily, SamplerSpec
from sepkit.core.montecarlo import sample
from sepkit.settings import DEFAULT_ALPHAS

Run = Callable[..., int]


@pytest.fixture
def run(tmp_path: Path) -> Run:
    """
    Call the command line, without config file and rich logs, and return its exit code.
    """

    def call(*arguments: str) -> int:
        flags = ["--config-file", str(tmp_path / "absent.yml"), "--disable-rich"]
        with pytest.raises(SystemExit) as raised:
            main(flags + [str(x) for x in arguments])
        return raised.value.code  # type: ignore

    return call


def read_csv_body(path: Path) -> list[list[str]]:
    lines = [x for x in path.read_text().splitlines() if not x.startswith("#")]
    return [x.split(",") for x in lines]


def test_version(run: Run, capsys: pytest.CaptureFixture):
    assert run("--version") == 0
    assert "sepkit" in capsys.readouterr().out


def test_missing_command(run: Run):
    assert run() == 2
    assert run("nonsense") == 2


def test_missing_input_file(run: Run, tmp_path: Path):
    assert run("separability", "--input", tmp_path / "nothing.csv") == 1


# preprocess


def test_preprocess_writes_model_and_data(run: Run, write_dataset, labeled_cloud, tmp_path: Path):
    source = write_dataset(labeled_cloud)
    model_path, data_path = tmp_path / "model.json", tmp_path / "white.csv"
    code = run(
        "preprocess",
        "--input",
        source,
        "--label-column",
        "label",
        "--out-model",
        model_path,
        "--out-data",
        data_path,
    )
    assert code == 0

    model = json.loads(model_path.read_text())
    assert model["provenance"]["tool"] == "sepkit"
    assert model["provenance"]["argv"][:2] == ["sepkit", "--config-file"]
    assert "timestamp" not in model["provenance"]

    whitened = ingest_csv(data_path, label_column="label")
    assert whitened.labels == labeled_cloud.labels
    assert whitened.data.dim == model["k_selected"]
    np.testing.assert_allclose(whitened.data.points.mean(axis=0), 0, atol=1e-10)


def test_preprocess_constant_column(run: Run, tmp_path: Path, capsys: pytest.CaptureFixture):
    source = tmp_path / "flat.csv"
    source.write_text("a,b\n1,5\n2,5\n3,5\n")
    assert run("preprocess", "--input", source, "--out-model", tmp_path / "m.json") == 2
    assert "'b'" in capsys.readouterr().err
    assert not (tmp_path / "m.json").exists()


def test_preprocess_fixed_rule_needs_components(run: Run, write_dataset, gaussian_cloud):
    source = write_dataset(gaussian_cloud)
    assert run("preprocess", "--input", source, "--selection", "fixed") == 2
    assert run("preprocess", "--input", source, "--selection", "fixed", "--components", "3") == 0


# separability


def test_separability_default_alphas(run: Run, write_dataset, labeled_cloud, tmp_path: Path):
    source = write_dataset(labeled_cloud)
    output = tmp_path / "report.json"
    arguments = ["separability", "--input", source, "--label-column", "label"]
    assert run(*arguments, "--out-json", output) == 0

    report = json.loads(output.read_text())
    assert [row["alpha"] for row in report["rows"]] == DEFAULT_ALPHAS
    assert report["n_classes"] == 3
    assert len(report["critical_level_reached_star"]) == 5
    assert report["provenance"]["seed"] is None


def test_separability_without_labels(run: Run, write_dataset, gaussian_cloud, tmp_path: Path):
    source = write_dataset(gaussian_cloud)
    output, table = tmp_path / "report.json", tmp_path / "report.csv"
    code = run(
        "separability",
        "--input",
        source,
        "--alphas",
        "0.8:0.9:0.05",
        "--sphere",
        "--out-json",
        output,
        "--out-csv",
        table,
    )
    assert code == 0
    rows = json.loads(output.read_text())["rows"]
    assert [row["alpha"] for row in rows] == [0.8, 0.85, 0.9]
    assert all("N_alpha_star" not in row for row in rows)

    body = read_csv_body(table)
    assert body[0] == ["alpha", "0.8", "0.85", "0.9"]
    assert [line[0] for line in body[1:]] == ["N_alpha", "nu_alpha", "mean_p_y", "var_p_y"]


def test_separability_reruns_are_identical(run: Run, write_dataset, labeled_cloud, tmp_path: Path):
    source = write_dataset(labeled_cloud)
    output, table = tmp_path / "report.json", tmp_path / "report.csv"
    arguments = ["separability", "--input", source, "--label-column", "label"]
    arguments += ["--out-json", output, "--out-csv", table]

    assert run(*arguments, "--threads", "1") == 0
    first = output.read_bytes(), table.read_bytes()
    assert run(*arguments, "--threads", "1") == 0
    assert (output.read_bytes(), table.read_bytes()) == first


def test_invalid_alphas(run: Run, write_dataset, gaussian_cloud):
    source = write_dataset(gaussian_cloud)
    assert run("separability", "--input", source, "--alphas", "0.9,1.5") == 2
    assert run("separability", "--input", source, "--alphas", "a,b") == 2


def test_thread_count_from_the_environment(
    run: Run, write_dataset, gaussian_cloud, monkeypatch: pytest.MonkeyPatch
):
    source = write_dataset(gaussian_cloud)
    monkeypatch.setenv("SEPKIT_THREADS", "0")
    assert run("separability", "--input", source) == 2
    assert run("separability", "--input", source, "--threads", "2") == 0


def test_config_file(tmp_path: Path, write_dataset, gaussian_cloud):
    source = write_dataset(gaussian_cloud)
    config, output = tmp_path / "config.yml", tmp_path / "report.json"
    config.write_text("default-alphas: [0.5, 0.7]\nthreads: 2\n")
    arguments = ["--config-file", str(config), "--disable-rich", "separability"]
    with pytest.raises(SystemExit) as raised:
        main(arguments + ["--input", str(source), "--out-json", str(output)])
    assert raised.value.code == 0
    assert [row["alpha"] for row in json.loads(output.read_text())["rows"]] == [0.5, 0.7]

    config.write_text("threads: [1\n")
    with pytest.raises(SystemExit) as raised:
        main(["--config-file", str(config), "separability", "--input", str(source)])
    assert raised.value.code == 2


def test_reset_settings(tmp_path: Path):
    config = tmp_path / "config.yml"
    with pytest.raises(SystemExit) as raised:
        main(["--config-file", str(config), "--reset-settings"])
    assert raised.value.code == 0
    assert "default-alphas" in config.read_text()


def test_subcommand_flags_are_not_global(tmp_path: Path):
    config, output = tmp_path / "config.yml", tmp_path / "verify.json"
    config.write_text("seed: 1234\n")
    arguments = ["--config-file", str(config), "--disable-rich", "simulate"]
    arguments += ["--theorem", "ball_pairs", "--n", "50", "--r", "0.9", "--M", "10"]
    with pytest.raises(SystemExit) as raised:
        main(arguments + ["--trials", "10", "--out-json", str(output)])
    assert raised.value.code == 0
    assert config.read_text() == "seed: 1234\n"
    assert json.loads(output.read_text())["provenance"]["seed"] == 1234


# baseline


def test_sphere_curve_table(run: Run, tmp_path: Path):
    output = tmp_path / "curves.csv"
    assert run("baseline", "sphere-curve", "--out-csv", output) == 0
    body = read_csv_body(output)
    assert len(body[0]) == 19
    assert body[0][:2] == ["alpha", "n=8"]
    assert [line[0] for line in body[1:]][::19] == ["0.8", "0.99"]
    assert len(body) == 21


def test_ball_bounds(run: Run, tmp_path: Path):
    output = tmp_path / "ball.json"
    assert run("baseline", "ball", "--n", 50, "--M", 10, "--r", 0.9, "--out-json", output) == 0
    content = json.loads(output.read_text())
    assert content["result"]["all_pairs"]["value"] == pytest.approx(0.9485, abs=1e-4)
    assert content["params"] == {"n": 50, "M": 10, "r": 0.9, "theta": 0.1}
    assert not content["vacuous"]


def test_baseline_exit_codes(run: Run):
    assert run("baseline", "noisy", "--n", 100, "--M", 50, "--epsilon", 0.5, "--delta", 0.15) == 3
    assert run("baseline", "noisy", "--n", 100, "--M", 50, "--epsilon", 0.5, "--delta", 0.05) == 2
    assert run("baseline", "ball", "--n", 50) == 2
    assert run("baseline", "effective-dim", "--mean-p-y", 0.01, "--alpha", 0.8) == 0
    assert run("baseline", "effective-dim", "--mean-p-y", 0.01) == 2
    assert run("baseline", "effective-dim", "--mean-p-y", 0.001, "--law", "ball") == 0
    smac = ["baseline", "smac", "--A", 3, "--B", 0.5, "--C", 1, "--delta", 0.1]
    assert run(*smac, "--n", 20000) == 0


def test_baseline_batch(run: Run, tmp_path: Path):
    batch, output, table = tmp_path / "batch.csv", tmp_path / "out.json", tmp_path / "out.csv"
    batch.write_text("# two parameter sets\nn,M,r\n50,10,0.9\n5,100,0.9\n")
    arguments = ["baseline", "ball", "--batch", batch, "--out-json", output, "--out-csv", table]
    assert run(*arguments) == 3
    rows = json.loads(output.read_text())["rows"]
    assert [row["vacuous"] for row in rows] == [False, True]
    assert rows[0]["params"]["theta"] == 0.1
    assert "all_pairs.value" in read_csv_body(table)[0]

    batch.write_text("n,M,r\n50,10,0.9\n50,10,1.5\n")
    assert run("baseline", "ball", "--batch", batch) == 2


# simulate


def test_simulate_ball_pairs(run: Run, tmp_path: Path):
    output = tmp_path / "verify.json"
    arguments = ["simulate", "--theorem", "ball_pairs", "--n", 50, "--M", 10, "--r", 0.9]
    assert run(*arguments, "--trials", 200, "--seed", 3, "--out-json", output) == 0
    content = json.loads(output.read_text())
    assert content["pass"] is True
    assert content["result"]["trials"] == 200
    assert content["provenance"]["seed"] == 3


def test_simulate_does_not_depend_on_threads(run: Run, tmp_path: Path):
    payloads = []
    for threads in (1, 3):
        output = tmp_path / f"run{threads}.json"
        code = run(
            "simulate",
            "--experiment",
            "separability",
            "--family",
            "uniform_ball",
            "--n",
            4,
            "--M",
            30,
            "--alpha",
            0.9,
            "--trials",
            300,
            "--threads",
            threads,
            "--out-json",
            output,
        )
        assert code == 0
        content = json.loads(output.read_text())
        content.pop("provenance")
        payloads.append(content)
    assert payloads[0] == payloads[1]


def test_simulate_vacuous_bound(run: Run):
    arguments = ["simulate", "--theorem", "noisy", "--n", 100, "--M", 50]
    assert run(*arguments, "--epsilon", 0.5, "--delta", 0.15, "--trials", 10) == 3
    assert run("simulate", "--theorem", "ball_pairs", "--n", 50, "--M", 10) == 2


def test_simulate_p_y_from_a_spec_file(run: Run, tmp_path: Path):
    spec, output, table = tmp_path / "spec.json", tmp_path / "p_y.json", tmp_path / "p_y.csv"
    spec.write_text(json.dumps({"family": "uniform_sphere", "n": 5, "seed": 9}))
    code = run(
        "simulate",
        "--experiment",
        "p-y",
        "--spec",
        spec,
        "--M",
        50,
        "--alpha",
        0.8,
        "--trials",
        10,
        "--out-json",
        output,
        "--out-csv",
        table,
    )
    assert code == 0
    content = json.loads(output.read_text())
    assert content["provenance"]["seed"] == 9
    assert content["distribution"]["count"] == 500
    body = read_csv_body(table)
    assert body[0] == ["bin_low", "bin_high", "count"]
    assert len(body) == 21


def test_simulate_analytic_p_y(run: Run, tmp_path: Path):
    output = tmp_path / "p_y.json"
    code = run(
        "simulate",
        "--experiment",
        "p-y",
        "--method",
        "analytic",
        "--family",
        "uniform_ball",
        "--n",
        10,
        "--M",
        500,
        "--trials",
        20,
        "--bins",
        8,
        "--out-json",
        output,
    )
    assert code == 0
    content = json.loads(output.read_text())
    assert content["distribution"]["bin_edges"][-1] == 2.0**-10
    assert content["ks_uniform"] < 0.05


# corrector


@pytest.fixture
def corrector_files(tmp_path: Path) -> dict[str, Path]:
    points = sample(SamplerSpec(SamplerFamily.uniform_ball, 10, seed=5), 6000).points
    files = {name: tmp_path / f"{name}.csv" for name in ("cloud", "holdout", "errors", "other")}
    export_csv(LabeledDataset(DataMatrix(points[:4000])), files["cloud"])
    export_csv(LabeledDataset(DataMatrix(points[4000:])), files["holdout"])
    first, second = np.zeros(10), np.zeros(10)
    first[0], second[1] = 5.0, -5.0
    export_csv(LabeledDataset(DataMatrix([first]), ("e1",), "id"), files["errors"])
    export_csv(LabeledDataset(DataMatrix([second]), ("e2",), "id"), files["other"])
    return files


def test_corrector_workflow(run: Run, corrector_files: dict[str, Path], tmp_path: Path):
    files = corrector_files
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    train = ["corrector", "train", "--correct", files["cloud"], "--id-column", "id"]
    assert run(*train, "--errors", files["errors"], "--out-json", first) == 0
    assert run(*train, "--errors", files["other"], "--alpha", 0.6, "--out-json", second) == 0
    content = json.loads(first.read_text())
    assert content["kind"] == "corrector"
    assert content["error_ids"] == ["e1"]
    assert content["threshold"] == 0.8

    cascade = tmp_path / "cascade.json"
    assert run("corrector", "cascade", "--models", first, second, "--out-json", cascade) == 0
    assert len(json.loads(cascade.read_text())["correctors"]) == 2

    flags = tmp_path / "flags.csv"
    arguments = ["corrector", "flag", "--model", cascade, "--input", files["holdout"]]
    assert run(*arguments, "--out-csv", flags) == 0
    body = read_csv_body(flags)
    assert body[0] == ["row", "flagged", "stage"]
    assert len(body) == 2001
    assert sum(line[1] == "True" for line in body[1:]) <= 20


def test_corrector_flags_an_identified_file(
    run: Run, corrector_files: dict[str, Path], tmp_path: Path
):
    files = corrector_files
    model, flags = tmp_path / "model.json", tmp_path / "flags.csv"
    train = ["corrector", "train", "--correct", files["cloud"], "--errors", files["errors"]]
    assert run(*train, "--id-column", "id", "--out-json", model) == 0

    arguments = ["corrector", "flag", "--model", model, "--input", files["errors"]]
    assert run(*arguments, "--id-column", "id", "--out-csv", flags) == 0
    assert read_csv_body(flags) == [["row", "id", "flagged"], ["0", "e1", "True"]]
    assert run(*arguments) == 2


def test_corrector_evaluation(run: Run, corrector_files: dict[str, Path], tmp_path: Path):
    files = corrector_files
    model, result = tmp_path / "model.json", tmp_path / "eval.json"
    train = ["corrector", "train", "--correct", files["cloud"], "--errors", files["errors"]]
    assert run(*train, "--id-column", "id", "--out-json", model) == 0

    arguments = ["--correct", files["holdout"], "--errors", files["errors"], "--id-column", "id"]
    assert run("corrector", "eval", "--model", model, *arguments, "--out-json", result) == 0
    content = json.loads(result.read_text())
    assert content["detection_rate"] == 1.0
    assert content["damage_rate"] <= 0.01

    assert run("corrector", "eval", "--model", tmp_path / "absent.json", *arguments) == 1
