"""Config resolution, CSV formatting, and the CLI entry point."""

import json
import math

import pytest

from swiptlab.bench.cli import main
from swiptlab.bench.config import (
    KINDS,
    ResolvedConfig,
    load_config,
    resolve_config,
)
from swiptlab.bench.csvio import format_cell, write_csv
from swiptlab.errors import ConfigError


class TestFormatCell:
    def test_bools_before_floats(self):
        assert format_cell(True) == "true"
        assert format_cell(False) == "false"

    def test_floats_get_six_digits(self):
        assert format_cell(0.5) == "0.500000"
        assert format_cell(-1.25) == "-1.250000"
        assert format_cell(float("-inf")) == "-inf"
        assert format_cell(float("inf")) == "inf"

    def test_ints_and_strings(self):
        assert format_cell(7) == "7"
        assert format_cell("qam16") == "qam16"

    @pytest.mark.parametrize("bad", ["a,b", "a\nb", 'say "hi"'])
    def test_text_needing_quoting_is_refused(self, bad):
        with pytest.raises(ValueError):
            format_cell(bad)

    def test_unsupported_type(self):
        with pytest.raises(TypeError):
            format_cell(None)


class TestWriteCsv:
    def test_exact_bytes(self, tmp_path):
        path = tmp_path / "out.csv"
        write_csv(path, ("a", "b", "ok"), [(1, 2.0, True), (3, float("-inf"), False)])
        assert path.read_bytes() == b"a,b,ok\n1,2.000000,true\n3,-inf,false\n"

    def test_header_written_even_without_rows(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_csv(path, ("x", "y"), [])
        assert path.read_bytes() == b"x,y\n"

    def test_row_width_checked(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(tmp_path / "bad.csv", ("x", "y"), [(1,)])


class TestLoadConfig:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "nope.toml")

    def test_malformed_toml(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("[experiment\nseed = 1\n")
        with pytest.raises(ConfigError, match="malformed"):
            load_config(path)

    def test_round_trip(self, tmp_path):
        path = tmp_path / "ok.toml"
        path.write_text('[experiment]\nseed = 7\nschemes = ["qam16"]\n')
        assert load_config(path) == {"experiment": {"seed": 7, "schemes": ["qam16"]}}


class TestResolveConfig:
    def test_defaults(self):
        rc = resolve_config("mi-snr")
        assert isinstance(rc, ResolvedConfig)
        assert rc.schemes == ("qam16", "apsk")
        assert rc.seed == 0 and not rc.quick
        assert rc.mi_snr.snr_stop_db == 30.0
        assert rc.mi_snr.sample_count == 100_000
        assert rc.task.eh_threshold == 2.0
        assert rc.apsk_phase_span == pytest.approx(math.pi)
        assert len(rc.apsk_span_grid) == 12

    def test_default_schemes_per_kind(self):
        assert resolve_config("re-region").schemes == ("ga", "qam16")
        assert resolve_config("ssr-eh").schemes == ("qam16",)
        assert resolve_config("rtfv-run").schemes == ()
        assert resolve_config("ga-design").schemes == ("ga",)

    def test_cli_seed_wins_over_file(self):
        data = {"experiment": {"seed": 5}}
        assert resolve_config("mi-snr", data).seed == 5
        assert resolve_config("mi-snr", data, seed=9).seed == 9

    def test_kind_mismatch_rejected(self):
        data = {"experiment": {"kind": "ssr-eh"}}
        with pytest.raises(ConfigError, match="declares kind"):
            resolve_config("mi-snr", data)
        # A matching declaration is fine.
        resolve_config("ssr-eh", data)

    def test_unknown_kind_section_key_scheme(self):
        with pytest.raises(ConfigError, match="unknown experiment kind"):
            resolve_config("psd-sweep")
        with pytest.raises(ConfigError, match="unknown config section"):
            resolve_config("mi-snr", {"misc": {}})
        with pytest.raises(ConfigError, match="unknown key"):
            resolve_config("mi-snr", {"task": {"threshold": 2.0}})
        with pytest.raises(ConfigError, match="unknown scheme"):
            resolve_config("mi-snr", {"experiment": {"schemes": ["qam17"]}})

    def test_type_errors(self):
        with pytest.raises(ConfigError, match="must be int"):
            resolve_config("mi-snr", {"task": {"modulation_order": "16"}})
        # TOML booleans must not pass for numbers.
        with pytest.raises(ConfigError, match="must be float"):
            resolve_config("mi-snr", {"task": {"rho": True}})

    def test_bad_task_value_is_config_error(self):
        with pytest.raises(ConfigError, match="invalid \\[task\\]"):
            resolve_config("mi-snr", {"task": {"rho": 1.5}})

    def test_quick_swaps_defaults_only(self):
        rc = resolve_config("mi-snr", quick=True)
        assert rc.quick
        assert rc.mi_snr.sample_count == 10_000
        pinned = resolve_config("mi-snr", {"mi_snr": {"sample_count": 77}}, quick=True)
        assert pinned.mi_snr.sample_count == 77
        assert resolve_config("ssr-eh", quick=True).ssr.symbols == 100_000
        assert resolve_config("rtfv-run", quick=True).rtfv.channel_count == 10_000
        assert resolve_config("ga-design", quick=True).ga.final_sample_count == 10_000

    def test_apsk_bounds(self):
        with pytest.raises(ConfigError, match="phase_span"):
            resolve_config("mi-snr", {"apsk": {"phase_span": 0.0}})
        with pytest.raises(ConfigError, match="phase_span"):
            resolve_config("mi-snr", {"apsk": {"phase_span": 3.5}})
        with pytest.raises(ConfigError, match="span_grid"):
            resolve_config("mi-snr", {"apsk": {"span_grid": [0.5, 4.0]}})

    def test_mi_grid_validation(self):
        with pytest.raises(ConfigError, match="snr_step_db"):
            resolve_config("mi-snr", {"mi_snr": {"snr_step_db": 0.0}})
        with pytest.raises(ConfigError, match="snr_stop_db"):
            resolve_config("mi-snr", {"mi_snr": {"snr_start_db": 10.0, "snr_stop_db": 0.0}})

    def test_re_thresholds_must_ascend(self):
        with pytest.raises(ConfigError, match="ascending"):
            resolve_config("re-region", {"re_region": {"thresholds": [2.0, 1.0]}})

    def test_rtfv_validation(self):
        with pytest.raises(ConfigError, match="feedback mode"):
            resolve_config("rtfv-run", {"rtfv": {"modes": ["three_bit"]}})
        with pytest.raises(ConfigError, match="agent"):
            resolve_config("rtfv-run", {"rtfv": {"agent": "oracle"}})

    def test_from_file_needs_path(self):
        data = {"experiment": {"schemes": ["from-file"]}}
        with pytest.raises(ConfigError, match="constellation_file"):
            resolve_config("mi-snr", data)
        data["experiment"]["constellation_file"] = "points.txt"
        assert resolve_config("mi-snr", data).constellation_file == "points.txt"

    def test_metadata_has_no_output_settings(self):
        meta = resolve_config("mi-snr").to_metadata()
        flat = json.dumps(meta)
        assert "workers" not in flat
        assert '"out"' not in flat
        assert meta["kind"] == "mi-snr"
        assert set(meta["task"]) >= {"rho", "sigma2", "c1", "c2"}

    def test_every_kind_resolves(self):
        for kind in KINDS:
            assert resolve_config(kind).kind == kind


MI_TOML = """
[experiment]
schemes = ["qam16"]
seed = 3

[mi_snr]
snr_start_db = 0.0
snr_stop_db = 4.0
snr_step_db = 2.0
sample_count = 300
"""

RE_APSK_TOML = """
[experiment]
schemes = ["apsk"]

[re_region]
thresholds = [50.0]
sample_count = 300
"""


class TestMain:
    def test_bad_workers(self, tmp_path, capsys):
        assert main(["mi-snr", "--workers", "0", "--out", str(tmp_path)]) == 2
        assert "--workers" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        code = main(["mi-snr", "--config", str(tmp_path / "no.toml"), "--out", str(tmp_path)])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_kind_mismatch_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "c.toml"
        cfg.write_text('[experiment]\nkind = "ssr-eh"\n')
        assert main(["mi-snr", "--config", str(cfg), "--out", str(tmp_path)]) == 2
        assert "declares kind" in capsys.readouterr().err

    def test_mi_snr_run_and_byte_identity(self, tmp_path, capsys):
        cfg = tmp_path / "mi.toml"
        cfg.write_text(MI_TOML)
        outs = [tmp_path / name for name in ("a", "b", "c")]
        for out, workers in zip(outs, ("1", "1", "4")):
            code = main(
                ["mi-snr", "--config", str(cfg), "--out", str(out), "--workers", workers]
            )
            assert code == 0
        stdout = capsys.readouterr().out
        assert "wrote" in stdout and "mi_snr.csv" in stdout

        texts = [(out / "mi_snr.csv").read_bytes() for out in outs]
        assert texts[0] == texts[1] == texts[2]
        metas = [(out / "metadata.json").read_bytes() for out in outs]
        assert metas[0] == metas[1] == metas[2]

        lines = texts[0].decode().splitlines()
        assert lines[0] == "snr_db,scheme,mi_bits"
        assert len(lines) == 4  # header + 3 grid points
        assert all(line.split(",")[1] == "qam16" for line in lines[1:])

        meta = json.loads(metas[0])
        assert meta["tool"] == "swiptlab"
        assert meta["seeds"]["master"] == 3
        assert meta["seeds"]["derived"]
        assert meta["config"]["kind"] == "mi-snr"

    def test_all_infeasible_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "re.toml"
        cfg.write_text(RE_APSK_TOML)
        out = tmp_path / "out"
        assert main(["re-region", "--config", str(cfg), "--out", str(out)]) == 3
        err = capsys.readouterr().err
        assert "warning" in err
        rows = (out / "re_region.csv").read_text().splitlines()[1:]
        assert rows and all(row.endswith(",false") for row in rows)

    def test_seed_override_changes_output(self, tmp_path):
        cfg = tmp_path / "mi.toml"
        cfg.write_text(MI_TOML)
        a, b = tmp_path / "s3", tmp_path / "s4"
        assert main(["mi-snr", "--config", str(cfg), "--out", str(a)]) == 0
        assert main(["mi-snr", "--config", str(cfg), "--out", str(b), "--seed", "4"]) == 0
        assert (a / "mi_snr.csv").read_bytes() != (b / "mi_snr.csv").read_bytes()
        assert json.loads((b / "metadata.json").read_text())["seeds"]["master"] == 4
