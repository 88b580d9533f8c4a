"""Command-line behaviour: argument flow, artefacts on disk, exit codes."""

import json

import pytest

from chaintomo.cli import main
from chaintomo.mps import save_mps
from chaintomo.runner import RunConfig, run_single

TOY = {
    "alpha": 0.2,
    "s": 1.0,
    "length": 4,
    "max_bond": 12,
    "fock_dims": [6, 6, 6, 6],
    "t_max": 0.3,
    "vnc_interval": 0.1,
    "snapshot_times": [0.0],
}


def write_json(path, data) -> str:
    path.write_text(json.dumps(data))
    return str(path)


class TestRunCommand:
    def test_run_writes_artifacts(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "cfg.json", TOY)
        out = tmp_path / "out"
        assert main(["run", "--config", cfg, "--out", str(out)]) == 0
        assert (out / "timeseries.csv").exists()
        assert (out / "meta.json").exists()
        assert "peak conditional negativity" in capsys.readouterr().out

    def test_preset_with_overrides(self, tmp_path):
        # desk preset scaled down so the test stays fast
        cfg = write_json(tmp_path / "cfg.json", TOY)
        out = tmp_path / "out"
        assert main(["run", "--preset", "desk", "--config", cfg, "--out", str(out)]) == 0
        meta = json.loads((out / "meta.json").read_text())
        assert meta["config"]["length"] == 4  # file overrides the preset
        assert meta["config"]["wigner_max_bond"] == 32  # preset survives elsewhere

    def test_missing_config_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "absent.json")]) == 2

    def test_invalid_field_value(self, tmp_path):
        cfg = write_json(tmp_path / "bad.json", dict(TOY, alpha=-1.0))
        assert main(["run", "--config", cfg]) == 2

    def test_requires_alpha_and_s(self, tmp_path):
        cfg = write_json(tmp_path / "partial.json", {"length": 4})
        assert main(["run", "--config", cfg]) == 2

    def test_resource_guardrail_exit_code(self, tmp_path):
        cfg = write_json(tmp_path / "big.json", dict(TOY, memory_limit_mb=0.001))
        assert main(["run", "--config", cfg]) == 4


class TestSweepCommand:
    def test_sweep_summary(self, tmp_path, capsys):
        spec = write_json(
            tmp_path / "spec.json",
            {
                "alphas": [0.0, 0.1],
                "ss": [1.0],
                "thetas": [0.0],
                "base": dict(TOY, t_max=0.2, snapshot_times=[]),
            },
        )
        out = tmp_path / "sweep"
        assert main(["sweep", "--spec", spec, "--out", str(out)]) == 0
        lines = (out / "sweep_summary.csv").read_text().splitlines()
        assert len(lines) == 2 + 2
        assert "2 sweep points, 0 failed" in capsys.readouterr().out

    def test_malformed_spec(self, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text("{not json")
        assert main(["sweep", "--spec", str(spec)]) == 2


@pytest.fixture(scope="module")
def checkpoint(tmp_path_factory):
    cfg = RunConfig(
        alpha=0.2,
        s=1.0,
        length=5,
        max_bond=12,
        fock_dims=(6,) * 5,
        t_max=0.4,
        snapshot_times=(),
        vnc_interval=0.1,
    )
    output = run_single(cfg)
    path = tmp_path_factory.mktemp("ck") / "state.mps"
    save_mps(output.final_state, str(path))
    return path


class TestWignerSnapshotCommand:
    def test_snapshot_from_checkpoint(self, checkpoint, tmp_path):
        out = tmp_path / "snap"
        rc = main(
            ["wigner-snapshot", "--state", str(checkpoint), "--time", "0.4", "--out", str(out)]
        )
        assert rc == 0
        names = {p.name for p in out.iterdir()}
        assert {
            "wigner_uncond_t0p40.csv",
            "wigner_uncond_t0p40.json",
            "wigner_plus_x_t0p40.csv",
            "wigner_plus_x_t0p40.json",
        } <= names
        side = json.loads((out / "wigner_plus_x_t0p40.json").read_text())
        assert side["time"] == pytest.approx(0.4)
        assert len(side["orbital"]) == 5


class TestCoeffsCommand:
    def test_prints_closed_form_json(self, capsys):
        assert main(["coeffs", "--alpha", "0.2", "--s", "1.0", "--L", "3"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["L"] == 3
        assert payload["omegas"] == pytest.approx([8.0, 16.0, 24.0], rel=1e-10)
        assert payload["g"] == pytest.approx(1.4272992929222168, rel=1e-12)

    def test_thermal_flag(self, capsys):
        assert main(
            ["coeffs", "--alpha", "0.2", "--s", "0.5", "--theta", "1.0", "--L", "2"]
        ) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["density"]["kind"] == "thermal_extension"
