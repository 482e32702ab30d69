import json

import numpy as np
import pytest

from circlecoords import io as cio
from circlecoords.cli import main
from circlecoords.data import gen_unbalanced_circle


def test_read_cloud_with_and_without_header(tmp_path):
    plain = tmp_path / "plain.csv"
    plain.write_text("1,2\n3,4\n\n5,6\n")
    cloud, truth = cio.read_point_cloud(plain)
    assert cloud.tolist() == [[1, 2], [3, 4], [5, 6]] and truth is None
    named = tmp_path / "named.csv"
    named.write_text("x,y,angle\n1,2,0.5\n3,4,1.5\n")
    cloud, truth = cio.read_point_cloud(named, truth_column="angle")
    assert cloud.tolist() == [[1, 2], [3, 4]] and truth.tolist() == [0.5, 1.5]


@pytest.mark.parametrize("text", ["", "a,b\n", "1,2\n3\n", "1,x\n", "1,nan\n"])
def test_read_cloud_rejects_bad_files(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ValueError):
        cio.read_point_cloud(path)


def test_read_time_series(tmp_path):
    path = tmp_path / "ts.csv"
    path.write_text("AVA,AVB\n0.1,0.2\n0.3,0.4\n0.5,0.6\n")
    ts = cio.read_time_series(path, rate=4.0)
    assert ts.channels == ["AVA", "AVB"] and ts.samples.shape == (3, 2) and ts.rate == 4.0
    path.write_text("1\n2\n")
    assert cio.read_time_series(path).channels == ["ch0"]


def test_synthetic_roundtrip(tmp_path):
    s = gen_unbalanced_circle(n=20, seed=1)
    path = cio.write_text(tmp_path / "deep" / "s.csv", cio.synthetic_csv(s))
    cloud, truth = cio.read_point_cloud(path, truth_column="true_parameter")
    assert np.array_equal(cloud, s.cloud) and np.array_equal(truth, s.true_parameter)


def test_cli_synth_and_coords(tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path), "--set", "input.n=150"]) == 0
    csv = tmp_path / "circle.csv"
    assert csv.exists()
    capsys.readouterr()
    args = ["coords", "--out", str(tmp_path / "run"), "--set", "input.generator=null",
            "--set", f"input.csv={csv}", "--set", "input.truth_column=true_parameter"]
    assert main(args) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["mode"] == "uncorrected" and abs(report["evaluation"]["winding"]) == 1


def test_cli_corrected_eval_bench(tmp_path, capsys):
    base = ["--out", str(tmp_path), "--set", "input.n=120", "--set", "sampling.n_subsamples=4"]
    assert main(["coords-corrected", *base]) == 0
    assert json.loads(capsys.readouterr().out)["mode"] == "corrected"
    assert main(["eval-mi", "--replicates", "2", *base]) == 0
    assert "p_value" in json.loads(capsys.readouterr().out)
    assert (tmp_path / "mi_compare.csv").exists()
    assert main(["bench", "--repeats", "1", *base]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["summary"]) == 2 and (tmp_path / "timing.csv").exists()


def test_cli_limit_cycle_synth(tmp_path):
    assert main(["synth", "--out", str(tmp_path), "--set", "input.generator=limit_cycle"]) == 0
    ts = cio.read_time_series(tmp_path / "series.csv")
    assert ts.channels == ["AVA", "AVB"] and ts.samples.shape == (960, 2)


def test_cli_exit_codes(tmp_path, capsys):
    cloud = tmp_path / "ten.csv"
    np.savetxt(cloud, np.random.default_rng(0).random((10, 3)), delimiter=",")
    src = ["--set", "input.generator=null", "--set", f"input.csv={cloud}", "--out", str(tmp_path)]
    assert main(["coords", *src, "--set", "persistence.max_scale=0.001"]) == 2
    assert main(["coords-corrected", "--out", str(tmp_path), "--set", "input.n=200",
                 "--set", "sampling.target_size=3", "--set", "sampling.n_subsamples=5"]) == 3
    assert main(["coords", "--set", "sampling.bogus=1"]) == 1
    assert main(["coords", "--set", "input.generator=null", "--set", f"input.csv={tmp_path / 'missing.csv'}"]) == 1
    err = capsys.readouterr().err
    assert "too small to reflect actual geometry" in err


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(f"input:\n  n: 100\nsampling:\n  n_subsamples: 3\noutput_dir: {tmp_path / 'o'}\n")
    assert main(["bench", "--config", str(cfg), "--repeats", "1"]) == 0
    assert (tmp_path / "o" / "timing.csv").exists()
