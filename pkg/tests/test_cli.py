"""End-to-end tests of the command-line front end, run in process."""

import json

import numpy as np
import pytest

from psdnorm import DomainSpec, sample_gaussian_with_psd
from psdnorm.cli import EXIT_IO, EXIT_OK, EXIT_STATE, EXIT_VALIDATION, main
from psdnorm.io import load_state, read_signal, write_signal


def write_white_noise(path, c=2, length=2 ** 12, seed=0):
    spec = DomainSpec(np.ones((c, 8)), n_signals=1, length=length, seed=seed)
    x = sample_gaussian_with_psd(spec)[0]
    write_signal(path, x)
    return read_signal(path)


def read_error(capsys):
    return json.loads(capsys.readouterr().err)["error"]


class TestPsdCommand:
    def test_zero_signal_all_clamped(self, tmp_path):
        sig = tmp_path / "zero.psdn"
        write_signal(sig, np.zeros((2, 64)))
        out_csv = tmp_path / "psd.csv"
        out_json = tmp_path / "psd.json"
        assert main(["psd", str(sig), "--f", "8",
                     "--out-csv", str(out_csv), "--out-json", str(out_json)]) == EXIT_OK
        summary = json.loads(out_json.read_text())
        assert summary["all_clamped"] is True
        assert summary["clamped_bins"] == 16
        assert summary["files"][0]["segments"] == 15

    def test_white_noise_near_flat(self, tmp_path):
        sig = tmp_path / "white.psdn"
        write_white_noise(sig, c=1, length=2 ** 14, seed=3)
        out_csv = tmp_path / "psd.csv"
        out_json = tmp_path / "psd.json"
        assert main(["psd", str(sig), "--f", "8",
                     "--out-csv", str(out_csv), "--out-json", str(out_json)]) == EXIT_OK
        psd = np.loadtxt(out_csv, delimiter=",", ndmin=2)
        assert psd.shape == (1, 8)
        np.testing.assert_allclose(psd, 1.0, atol=0.15)
        summary = json.loads(out_json.read_text())
        assert summary["all_clamped"] is False
        assert summary["config"]["f"] == 8

    def test_missing_file(self, tmp_path, capsys):
        code = main(["psd", str(tmp_path / "absent.psdn"),
                     "--out-csv", str(tmp_path / "a.csv"),
                     "--out-json", str(tmp_path / "a.json")])
        assert code == EXIT_IO
        assert read_error(capsys)["kind"] == "io"

    def test_corrupt_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.psdn"
        bad.write_bytes(b"not a signal at all")
        code = main(["psd", str(bad),
                     "--out-csv", str(tmp_path / "a.csv"),
                     "--out-json", str(tmp_path / "a.json")])
        assert code == EXIT_IO
        assert read_error(capsys)["kind"] == "io"


class TestAlignCommand:
    def test_align_to_own_barycenter_single_input_centers(self, tmp_path):
        sig = tmp_path / "x.psdn"
        x = write_white_noise(sig, c=1, seed=5) + 2.0
        write_signal(sig, x)
        x = read_signal(sig)
        out = tmp_path / "aligned"
        assert main(["align", str(sig), "--f", "8", "--out", str(out)]) == EXIT_OK
        y = read_signal(out / "x.aligned.psdn")
        np.testing.assert_allclose(
            y, x - x.mean(axis=1, keepdims=True), atol=1e-3
        )
        report = json.loads((out / "report.json").read_text())
        rec = report["signals"][0]
        assert rec["pre_distance"] == pytest.approx(0.0, abs=1e-12)

    def test_unit_target_f1_standardizes(self, tmp_path):
        sig = tmp_path / "x.psdn"
        x = write_white_noise(sig, c=2, seed=6) * 3.0 + 1.0
        write_signal(sig, x)
        out = tmp_path / "aligned"
        assert main(["align", str(sig), "--f", "1", "--stride", "1",
                     "--window", "boxcar", "--target", "unit",
                     "--out", str(out)]) == EXIT_OK
        y = read_signal(out / "x.aligned.psdn")
        np.testing.assert_allclose(y.mean(axis=1), 0.0, atol=1e-6)
        np.testing.assert_allclose(y.var(axis=1), 1.0, atol=1e-3)

    def test_align_reduces_distance(self, tmp_path):
        spec_a = DomainSpec(
            np.exp(0.8 * np.cos(2 * np.pi * np.arange(8) / 8))[None, :],
            n_signals=1, length=2 ** 13, seed=7,
        )
        spec_b = DomainSpec(
            np.exp(-0.8 * np.cos(2 * np.pi * np.arange(8) / 8))[None, :],
            n_signals=1, length=2 ** 13, seed=8,
        )
        pa = tmp_path / "a.psdn"
        pb = tmp_path / "b.psdn"
        write_signal(pa, sample_gaussian_with_psd(spec_a)[0])
        write_signal(pb, sample_gaussian_with_psd(spec_b)[0])
        out = tmp_path / "aligned"
        assert main(["align", str(pa), str(pb), "--f", "8",
                     "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        for rec in report["signals"]:
            assert rec["post_distance"] < rec["pre_distance"]

    def test_shape_mismatch_exit_3(self, tmp_path, capsys):
        pa = tmp_path / "a.psdn"
        pb = tmp_path / "b.psdn"
        write_signal(pa, np.zeros((1, 64)) + np.arange(64))
        write_signal(pb, np.zeros((2, 64)) + np.arange(64))
        code = main(["align", str(pa), str(pb), "--f", "8",
                     "--out", str(tmp_path / "out")])
        assert code == EXIT_VALIDATION
        assert read_error(capsys)["kind"] == "validation"

    def test_state_target_without_barycenter_exit_4(self, tmp_path, capsys):
        from psdnorm import PsdNormLayer
        from psdnorm.io import save_state

        state = tmp_path / "fresh.json"
        save_state(state, PsdNormLayer(filter_size=8))
        sig = tmp_path / "x.psdn"
        write_white_noise(sig, c=1, seed=9)
        code = main(["align", str(sig), "--f", "8", "--target", str(state),
                     "--out", str(tmp_path / "out")])
        assert code == EXIT_STATE
        assert read_error(capsys)["kind"] == "state"


class TestLayerCommand:
    def make_batch(self, tmp_path, n=3, seed=0):
        paths = []
        for j in range(n):
            p = tmp_path / f"sig{j}.psdn"
            write_white_noise(p, c=2, length=2 ** 11, seed=seed * 1000 + j)
            paths.append(str(p))
        return paths

    def test_train_then_eval_round_trip(self, tmp_path):
        paths = self.make_batch(tmp_path)
        out1 = tmp_path / "train_out"
        state1 = tmp_path / "state1.json"
        code = main(["layer", *paths, "--kind", "psdnorm", "--mode", "train",
                     "--f", "4", "--state-out", str(state1), "--out", str(out1)])
        assert code == EXIT_OK
        layer = load_state(state1)
        assert layer.barycenter.update_count == 1

        out2 = tmp_path / "eval_out"
        state2 = tmp_path / "state2.json"
        code = main(["layer", *paths, "--kind", "psdnorm", "--mode", "eval",
                     "--f", "4", "--state-in", str(state1),
                     "--state-out", str(state2), "--out", str(out2)])
        assert code == EXIT_OK
        assert state1.read_bytes() == state2.read_bytes()

        # Eval is deterministic: repeating it reproduces identical bytes.
        out3 = tmp_path / "eval_out_2"
        code = main(["layer", *paths, "--kind", "psdnorm", "--mode", "eval",
                     "--f", "4", "--state-in", str(state1), "--out", str(out3)])
        assert code == EXIT_OK
        for p in paths:
            stem = p.rsplit("/", 1)[-1].replace(".psdn", "")
            a = (out2 / f"{stem}.out.psdn").read_bytes()
            b = (out3 / f"{stem}.out.psdn").read_bytes()
            assert a == b

    def test_eval_without_state_exit_4(self, tmp_path, capsys):
        paths = self.make_batch(tmp_path, n=1, seed=1)
        code = main(["layer", *paths, "--kind", "psdnorm", "--mode", "eval",
                     "--f", "4", "--out", str(tmp_path / "out")])
        assert code == EXIT_STATE
        assert read_error(capsys)["kind"] == "state"

    def test_instancenorm_outputs(self, tmp_path):
        paths = self.make_batch(tmp_path, n=2, seed=2)
        out = tmp_path / "out"
        code = main(["layer", *paths, "--kind", "instancenorm", "--eps", "0",
                     "--out", str(out)])
        assert code == EXIT_OK
        for p in paths:
            stem = p.rsplit("/", 1)[-1].replace(".psdn", "")
            y = read_signal(out / f"{stem}.out.psdn")
            np.testing.assert_allclose(y.mean(axis=1), 0.0, atol=1e-6)
            np.testing.assert_allclose(y.var(axis=1), 1.0, atol=1e-3)

    def test_batchnorm_state_round_trip(self, tmp_path):
        paths = self.make_batch(tmp_path, n=2, seed=3)
        state1 = tmp_path / "bn1.json"
        code = main(["layer", *paths, "--kind", "batchnorm", "--mode", "train",
                     "--state-out", str(state1), "--out", str(tmp_path / "o1")])
        assert code == EXIT_OK
        layer = load_state(state1)
        assert layer.num_batches_tracked == 1

        state2 = tmp_path / "bn2.json"
        code = main(["layer", *paths, "--kind", "batchnorm", "--mode", "eval",
                     "--state-in", str(state1), "--state-out", str(state2),
                     "--out", str(tmp_path / "o2")])
        assert code == EXIT_OK
        assert state1.read_bytes() == state2.read_bytes()


class TestBenchCommand:
    def test_none_ratio_one_and_psdnorm_wins(self, tmp_path):
        out = tmp_path / "bench"
        code = main(["bench", "--domains", "2", "--seeds", "2",
                     "--signals", "4", "--length", str(2 ** 11),
                     "--channels", "1", "--f", "8",
                     "--methods", "none,instancenorm,psdnorm",
                     "--out", str(out)])
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        results = report["results"]
        assert results["none"]["mean"] == pytest.approx(1.0)
        assert results["psdnorm"]["mean"] < results["instancenorm"]["mean"]
        csv_lines = (out / "ratios.csv").read_text().splitlines()
        assert csv_lines[0] == "method,mean_ratio,std_ratio"
        assert len(csv_lines) == 4

    def test_repeat_is_byte_identical(self, tmp_path):
        args = ["bench", "--domains", "2", "--seeds", "2", "--signals", "4",
                "--length", str(2 ** 11), "--channels", "1", "--f", "8",
                "--methods", "psdnorm"]
        out1 = tmp_path / "b1"
        out2 = tmp_path / "b2"
        assert main(args + ["--out", str(out1)]) == EXIT_OK
        assert main(args + ["--out", str(out2)]) == EXIT_OK
        assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
        assert (out1 / "ratios.csv").read_bytes() == (out2 / "ratios.csv").read_bytes()

    def test_unknown_method_exit_3(self, tmp_path, capsys):
        code = main(["bench", "--methods", "zscore",
                     "--seeds", "1", "--signals", "2",
                     "--length", str(2 ** 10),
                     "--out", str(tmp_path / "b")])
        assert code == EXIT_VALIDATION
        assert read_error(capsys)["kind"] == "validation"
