"""Command-line interface: subcommands, file formats, exit codes."""

import json

import numpy as np
import pytest

from mvloewner import eval_model, load_model, source_to_dict
from mvloewner.cli import format_complex, main
from conftest import C1_EXPECTED, SYNTH_2D_TEXT


def _write_json(path, document):
    path.write_text(json.dumps(document))
    return str(path)


@pytest.fixture()
def synth2d_file(tmp_path, source_synth2d):
    return _write_json(tmp_path / "synth2d.json", source_to_dict(source_synth2d))


@pytest.fixture()
def oracle_3d_file(tmp_path, source_3d):
    return _write_json(tmp_path / "oracle3d.json", source_to_dict(source_3d))


@pytest.fixture()
def data_1d_file(tmp_path, source_1d):
    return _write_json(tmp_path / "data1d.json", source_to_dict(source_1d.densify()))


def test_order_detect_synthetic(synth2d_file, capsys):
    assert main(["order-detect", "--data", synth2d_file]) == 0
    assert json.loads(capsys.readouterr().out) == {"degrees": [4, 3]}


def test_order_detect_constant(tmp_path, capsys):
    doc = {
        "variables": [
            {"name": "s", "lambda": [[0, 0], [1, 0]], "mu": [[2, 0], [3, 0]]},
            {"name": "t", "lambda": [[5, 0], [6, 0]], "mu": [[7, 0], [8, 0]]},
        ],
        "expression": "42",
    }
    path = _write_json(tmp_path / "const.json", doc)
    assert main(["order-detect", "--data", path]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["degrees"] == [0, 0]


def test_order_detect_2d_example(tmp_path, source_2d, capsys):
    path = _write_json(tmp_path / "ex2.json", source_to_dict(source_2d.densify()))
    assert main(["order-detect", "--data", path]) == 0
    assert json.loads(capsys.readouterr().out)["degrees"] == [2, 1]


def test_order_detect_missing_file_exit_code(capsys):
    assert main(["order-detect", "--data", "/nonexistent/nope.json"]) == 2


def test_fit_1d_golden_weights(data_1d_file, tmp_path, capsys):
    out = tmp_path / "model.json"
    assert main(["fit", "--data", data_1d_file, "--out", str(out)]) == 0
    model = load_model(out)
    rescaled = model.weights_c / model.weights_c[-1]
    np.testing.assert_allclose(rescaled.real, C1_EXPECTED, atol=1e-11)


def test_fit_cascade_order_flops(oracle_3d_file, tmp_path, capsys):
    out = tmp_path / "model3.json"
    code = main(
        [
            "fit",
            "--oracle",
            oracle_3d_file,
            "--method",
            "cascade",
            "--order",
            "p,t,s",
            "--degrees",
            "1,1,2",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["flops"] == 99
    assert report["degrees"] == [1, 1, 2]


def test_fit_clamps_oversized_degrees(data_1d_file, tmp_path, capsys):
    out = tmp_path / "clamped.json"
    with pytest.warns(UserWarning, match="clamping"):
        code = main(["fit", "--data", data_1d_file, "--degrees", "99", "--out", str(out)])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["degrees"] == [2]


def test_fit_adaptive_writes_log(synth2d_file, tmp_path, capsys):
    out = tmp_path / "model.json"
    log_path = tmp_path / "log.json"
    code = main(
        [
            "fit-adaptive",
            "--data",
            synth2d_file,
            "--tol",
            "1e-6",
            "--out",
            str(out),
            "--log",
            str(log_path),
        ]
    )
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["k"] == [5, 4]
    assert summary["flops"] == [2, 10, 51, 172, 445]
    log = json.loads(log_path.read_text())
    assert log["converged"] is True and len(log["iterations"]) == 5


def test_fit_adaptive_generous_tolerance(synth2d_file, tmp_path, capsys):
    out = tmp_path / "model.json"
    code = main(["fit-adaptive", "--data", synth2d_file, "--tol", "10", "--out", str(out)])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["iterations"] == 1


def test_fit_adaptive_noisy_exit_code(tmp_path, source_synth2d, capsys):
    rng = np.random.default_rng(1)
    doc = source_to_dict(source_synth2d)
    noisy = [
        [re + 1e-2 * rng.normal(), im] for re, im in doc["values"]
    ]
    doc["values"] = noisy
    path = _write_json(tmp_path / "noisy.json", doc)
    out = tmp_path / "best.json"
    code = main(["fit-adaptive", "--data", path, "--tol", "1e-10", "--out", str(out)])
    assert code == 3
    assert out.exists()  # best model still saved


def test_eval_round_trips_model_file(data_1d_file, tmp_path, capsys):
    out = tmp_path / "model.json"
    main(["fit", "--data", data_1d_file, "--out", str(out)])
    capsys.readouterr()
    assert main(["eval", "--model", str(out), "--point", "0"]) == 0
    printed = capsys.readouterr().out.strip()
    value = eval_model(load_model(out), (0,))
    assert printed == format_complex(value)
    assert printed == "4+0i"


def test_realize_splits_and_dimensions(oracle_3d_file, tmp_path, capsys):
    model_path = tmp_path / "model.json"
    main(["fit", "--oracle", oracle_3d_file, "--degrees", "1,1,2", "--out", str(model_path)])
    capsys.readouterr()

    real_path = tmp_path / "real.json"
    assert main(["realize", "--model", str(model_path), "--split", "s,t|p", "--out", str(real_path)]) == 0
    assert json.loads(capsys.readouterr().out)["m"] == 9

    assert main(["realize", "--model", str(model_path), "--split", "s|t,p", "--out", str(real_path)]) == 0
    assert json.loads(capsys.readouterr().out)["m"] == 13

    assert main(["realize", "--model", str(model_path), "--split", "auto", "--out", str(real_path)]) == 0
    assert json.loads(capsys.readouterr().out)["m"] == 9


def test_verify_passes_on_consistent_artifacts(tmp_path, source_2d, capsys):
    data_path = _write_json(tmp_path / "d.json", source_to_dict(source_2d.densify()))
    model_path = tmp_path / "m.json"
    real_path = tmp_path / "r.json"
    main(["fit", "--data", data_path, "--degrees", "2,1", "--out", str(model_path)])
    main(["realize", "--model", str(model_path), "--split", "s|t", "--out", str(real_path)])
    capsys.readouterr()
    code = main(
        ["verify", "--model", str(model_path), "--data", data_path, "--realization", str(real_path)]
    )
    report = json.loads(capsys.readouterr().out)
    assert code == 0
    assert report["ok"] is True
    assert report["checks"]["sweep"]["max_error"] <= 1e-10
    assert report["checks"]["sylvester"]["ok"] is True


def test_verify_detects_corrupted_weight(tmp_path, source_2d, capsys):
    data_path = _write_json(tmp_path / "d.json", source_to_dict(source_2d.densify()))
    model_path = tmp_path / "m.json"
    main(["fit", "--data", data_path, "--degrees", "2,1", "--out", str(model_path)])
    capsys.readouterr()
    doc = json.loads(model_path.read_text())
    doc["c"][0][0] *= 1.25
    model_path.write_text(json.dumps(doc))
    code = main(["verify", "--model", str(model_path), "--data", data_path])
    report = json.loads(capsys.readouterr().out)
    assert code == 4
    assert report["ok"] is False


def test_verify_synthetic_artifacts(synth2d_file, tmp_path, capsys):
    model_path = tmp_path / "m.json"
    main(["fit-adaptive", "--data", synth2d_file, "--tol", "1e-6", "--out", str(model_path)])
    capsys.readouterr()
    code = main(["verify", "--model", str(model_path), "--data", synth2d_file])
    report = json.loads(capsys.readouterr().out)
    assert code == 0
    assert report["checks"]["sweep"]["max_error"] <= 1e-9


def test_flops_subcommand(capsys):
    assert main(["flops", "--degrees", "1,1,2"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["cascaded_flops"] == 132
    assert report["full_flops"] == 1728

    assert main(["flops", "--degrees", "19,5,3,5,7,1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["cascaded_bytes_max"] == 6400
    assert abs(report["full_bytes"] / 2**30 - 31.64) < 0.01 * 31.64

    assert main(["flops", "--degrees", "0"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["cascaded_flops"] == 1 and report["full_flops"] == 1


def test_plot_data_sweep(tmp_path, synth2d_file, capsys):
    model_path = tmp_path / "m.json"
    main(["fit-adaptive", "--data", synth2d_file, "--tol", "1e-6", "--out", str(model_path)])
    capsys.readouterr()
    csv_path = tmp_path / "sweep.csv"
    code = main(
        [
            "plot-data",
            "--model",
            str(model_path),
            "--sweep",
            "s=-1:1:200",
            "--frozen",
            "p=0.5",
            "--out",
            str(csv_path),
        ]
    )
    assert code == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "point,re,im,abs"
    assert len(lines) == 201
    assert all("inf" not in line for line in lines[1:])


def test_plot_data_flags_pole(tmp_path, capsys):
    from mvloewner import make_model, model_to_dict

    model = make_model([[0, 2]], [1.0, 1.0], [1.0, -1.0], names=["s"])
    model_path = _write_json(tmp_path / "pole.json", model_to_dict(model))
    code = main(["plot-data", "--model", model_path, "--sweep", "s=0:2:3"])
    out = capsys.readouterr().out.strip().splitlines()
    assert code == 0
    assert len(out) == 4
    assert out[2] == "1,inf,inf,inf"


def test_format_complex_has_twelve_digits():
    assert format_complex(4.0) == "4+0i"
    assert format_complex(complex(1 / 3, -2 / 7)) == "0.333333333333-0.285714285714i"


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
