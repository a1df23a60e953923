import copy
import csv
import io
import json
import subprocess
import sys

import pytest

from photon_landauer import current_right, transmission_trivial
from photon_landauer.cli import dumps_json, format_float, main
from photon_landauer.config import build, load_schema, validate
from photon_landauer.errors import ConfigurationError

GAPPED = {
    "left": {"band": [0.5, 1.5], "temperature": 0.5, "dos": {"model": "constant", "rho0": 1.0}},
    "right": {"band": [2.0, 3.0], "temperature": 0.5, "dos": {"model": "constant", "rho0": 1.0}},
    "pump": {"frequency": 1.6},
    "kernel": {"variant": "trivial", "coupling": 0.1},
    "oracle": {"modes_per_lead": 20},
    "transmission_grid": {"e1": {"from": 0.25, "to": 1.75, "steps": 4}, "e2": {"from": 1.5, "to": 3.0, "steps": 3}},
}

CENTER = {
    "left": {"band": [0.0, None], "temperature": 0.3},
    "right": {"band": [0.0, None], "temperature": 0.2},
    "pump": {"frequency": 0.8},
    "kernel": {"variant": "center", "dressed": True},
    "center": {"spring_matrix": [[1.0]], "left_coupling": [0.2], "right_coupling": [0.2]},
}


def variant(base=GAPPED, **changes):
    doc = copy.deepcopy(base)
    for path, value in changes.items():
        node = doc
        keys = path.split("__")
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        if value is None and keys[-1] in node:
            del node[keys[-1]]
        else:
            node[keys[-1]] = value
    return doc


@pytest.fixture
def cli(tmp_path, capsys):
    def invoke(doc, *args, fmt="json"):
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(doc) if isinstance(doc, dict) else doc)
        code = main([args[0], "--config", str(cfg), "--format", fmt, *args[1:]])
        out, err = capsys.readouterr()
        return code, out, err

    return invoke


def rows(text):
    return list(csv.reader(io.StringIO(text)))


class TestSchema:
    def test_schemas_are_valid_json_schema(self):
        import jsonschema

        for name in ("config", "result"):
            schema = load_schema(name)
            jsonschema.validators.validator_for(schema).check_schema(schema)

    def test_center_block_needs_center_variant(self):
        with pytest.raises(ConfigurationError, match="only allowed"):
            build(variant(center=CENTER["center"]))

    def test_center_variant_needs_center_block(self):
        with pytest.raises(ConfigurationError, match="needs a 'center' block"):
            build(variant(CENTER, center=None))

    @pytest.mark.parametrize(
        "change",
        [
            {"left__temperature": 0.0},
            {"pump__frequency": -1.0},
            {"kernel__variant": "both"},
            {"left__dos": {"model": "power_law", "exponent": 3}},
            {"bogus": 1},
            {"oracle__ramp_cycles": 2},
            {"left__band": [0.5]},
        ],
    )
    def test_schema_rejections(self, change):
        with pytest.raises(ConfigurationError):
            build(variant(**change))

    def test_unbounded_band(self):
        cfg = build(CENTER)
        assert cfg.problem.left.band_max == float("inf")
        assert cfg.kernel_variant == "center"

    def test_physical_validation_after_schema(self):
        # schema-valid but not positive definite
        with pytest.raises(ConfigurationError, match="positive definite"):
            build(variant(CENTER, center__spring_matrix=[[-1.0]]))


class TestCurrent:
    def test_gapped_matches_library_bit_for_bit(self, cli):
        code, out, _ = cli(GAPPED, "current")
        assert code == 0
        rec = json.loads(out)
        lib = current_right(build(GAPPED).problem).as_record()
        for k, v in lib.items():
            assert rec[k] == v
        validate(rec, "result")

    def test_zero_coupling(self, cli):
        code, out, _ = cli(variant(kernel__coupling=0.0), "current")
        rec = json.loads(out)
        assert code == 0
        assert all(v == 0 for k, v in rec.items() if k not in ("command", "converged"))

    def test_malformed_config_exit_2(self, cli):
        code, out, err = cli(variant(center=CENTER["center"]), "current")
        assert code == 2 and out == "" and "center" in err

    def test_unconverged_still_writes_record(self, cli):
        doc = variant(left__band=[0.5, None], left__temperature=3.0,
                      tolerances={"abs_tol": 1e-30, "rel_tol": 1e-16, "max_subdivisions": 2})
        code, out, err = cli(doc, "current")
        assert code == 3 and "tolerance" in err
        rec = json.loads(out)
        assert rec["converged"] is False and rec["J_R"] > 0
        validate(rec, "result")

    def test_infrared_divergence_is_config_error(self, cli):
        doc = variant(CENTER, kernel={"variant": "trivial", "coupling": 0.1}, center=None,
                      left__dos={"model": "power_law", "exponent": 1})
        code, _, err = cli(doc, "current")
        assert code == 2 and "diverges" in err

    def test_csv_single_row(self, cli):
        code, out, _ = cli(GAPPED, "current", fmt="csv")
        table = rows(out)
        assert code == 0 and len(table) == 2 and len(table[0]) == len(table[1]) == 17
        assert table[0][0] == "J_R" and table[1][-1] == "true"
        assert "\r" not in out

    def test_deterministic_bytes(self, cli):
        first = cli(CENTER, "current")[1]
        second = cli(CENTER, "current")[1]
        assert first == second


class TestSweep:
    def test_below_threshold_all_zero(self, cli):
        code, out, _ = cli(GAPPED, "sweep", "--axis", "pump_frequency", "--from", "0.1", "--to", "0.45", "--steps", "3")
        doc = json.loads(out)
        assert code == 0 and [r["J_R"] for r in doc["rows"]] == [0, 0, 0]
        validate(doc, "result")

    def test_coupling_scale_square_law(self, cli):
        code, out, _ = cli(GAPPED, "sweep", "--axis", "coupling_scale", "--from", "1", "--to", "4", "--steps", "4")
        j = {r["value"]: r["J_R"] for r in json.loads(out)["rows"]}
        assert j[2.0] / j[1.0] == pytest.approx(4, rel=1e-12)
        assert j[4.0] / j[1.0] == pytest.approx(16, rel=1e-12)

    def test_descending_grid_order(self, cli):
        code, out, _ = cli(GAPPED, "sweep", "--axis", "temperature", "--from", "0.9", "--to", "0.3", "--steps", "4",
                           fmt="csv")
        table = rows(out)
        assert table[0] == ["temperature", "J_R", "J_L", "J_N", "J_A", "R_c", "R_a", "err", "converged"]
        assert [float(r[0]) for r in table[1:]] == pytest.approx([0.9, 0.7, 0.5, 0.3])
        assert {len(r) for r in table} == {9}

    def test_steps_must_be_at_least_two(self, cli):
        code, _, err = cli(GAPPED, "sweep", "--axis", "temperature", "--from", "1", "--to", "2", "--steps", "1")
        assert code == 2 and "steps" in err

    def test_failed_rows_flagged(self, cli):
        code, out, err = cli(GAPPED, "sweep", "--axis", "temperature", "--from", "0.5", "--to", "-0.5", "--steps", "3")
        doc = json.loads(out)
        assert code == 3
        assert [r["converged"] for r in doc["rows"]] == [True, False, False]
        assert doc["rows"][1]["J_R"] is None
        validate(doc, "result")

    def test_bad_axis_is_usage_error(self, cli):
        code, _, _ = cli(GAPPED, "sweep", "--axis", "voltage", "--from", "1", "--to", "2", "--steps", "2")
        assert code == 2


class TestTransmission:
    def test_grid_dump(self, cli):
        code, out, err = cli(GAPPED, "transmission", fmt="csv")
        table = rows(out)
        assert code == 0 and table[0] == ["eps1", "eps2", "T"]
        assert len(table) == 1 + 4 * 3 and {len(r) for r in table} == {3}
        assert err == ""

    def test_out_of_band_rows_are_zero(self, cli):
        code, out, _ = cli(GAPPED, "transmission")
        doc = json.loads(out)
        assert all(r["T"] == 0 for r in doc["rows"] if r["eps1"] in (0.25, 1.75))
        validate(doc, "result")

    def test_single_cell_matches_library(self, cli):
        doc = variant(transmission_grid={"e1": {"from": 1.0, "to": 1.0, "steps": 1},
                                         "e2": {"from": 2.5, "to": 2.5, "steps": 1}})
        _, out, _ = cli(doc, "transmission")
        cfg = build(doc)
        lib = transmission_trivial(1.0, 2.5, cfg.problem.left, cfg.problem.right, 0.1)
        assert json.loads(out)["rows"][0]["T"] == lib

    def test_zero_coupling_zero_grid(self, cli):
        _, out, _ = cli(variant(kernel__coupling=0.0), "transmission")
        assert all(r["T"] == 0 for r in json.loads(out)["rows"])

    def test_domain_errors_become_empty_cells(self, cli):
        doc = variant(transmission_grid={"e1": {"from": -0.5, "to": 1.0, "steps": 4},
                                         "e2": {"from": 2.5, "to": 2.5, "steps": 1}})
        code, out, err = cli(doc, "transmission", fmt="csv")
        table = rows(out)
        assert code == 0 and "2 grid cell(s)" in err
        assert [r[2] for r in table[1:3]] == ["", ""]
        assert table[3][2] != ""

    def test_center_kernel(self, cli):
        doc = variant(CENTER, transmission_grid={"e1": {"from": 0.5, "to": 1.5, "steps": 3},
                                                 "e2": {"from": 0.5, "to": 1.5, "steps": 3}})
        code, out, _ = cli(doc, "transmission")
        res = json.loads(out)
        assert code == 0 and res["kernel"] == "center" and all(r["T"] > 0 for r in res["rows"])

    def test_missing_grid_block(self, cli):
        code, _, err = cli(variant(transmission_grid=None), "transmission")
        assert code == 2 and "transmission_grid" in err


class TestOracle:
    def test_gapped_benchmark_passes(self, cli):
        code, out, _ = cli(GAPPED, "oracle")
        doc = json.loads(out)
        assert code == 0 and doc["relative_deviation"] <= 0.10 and doc["within_bound"]
        validate(doc, "result")

    def test_zero_coupling_both_zero(self, cli):
        code, out, _ = cli(variant(kernel__coupling=0.0, oracle={"modes_per_lead": 10}), "oracle")
        doc = json.loads(out)
        assert code == 0 and doc["analytic"] == 0 and abs(doc["simulated"]) < 1e-14

    def test_coarse_dt_is_numerical_failure(self, cli):
        code, out, err = cli(variant(oracle={"modes_per_lead": 10, "dt": 1.0}), "oracle")
        assert code == 3 and out == "" and "too coarse" in err

    def test_mismatch_exit_4(self, cli):
        code, out, err = cli(variant(oracle={"modes_per_lead": 10, "max_deviation": 1e-6}), "oracle")
        assert code == 4 and json.loads(out)["within_bound"] is False and "mismatch" in err

    def test_missing_oracle_block(self, cli):
        code, _, err = cli(variant(oracle=None), "oracle")
        assert code == 2 and "oracle" in err

    def test_csv_report(self, cli):
        code, out, _ = cli(variant(oracle={"modes_per_lead": 10}), "oracle", fmt="csv")
        table = rows(out)
        assert len(table) == 2 and len(table[0]) == len(table[1])
        assert "parameters.dt" in table[0]


class TestPlumbing:
    def test_invalid_json(self, cli):
        code, _, err = cli("{not json", "current")
        assert code == 2 and "invalid JSON" in err

    def test_non_finite_literals_rejected(self, cli):
        code, _, err = cli(json.dumps(GAPPED).replace("1.6", "NaN"), "current")
        assert code == 2 and "NaN" in err

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["current", "--config", str(tmp_path / "absent.json")]) == 2

    def test_output_file_and_config_format(self, tmp_path, capsys):
        out = tmp_path / "res.csv"
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(variant(output={"format": "csv", "path": str(out)})))
        assert main(["current", "--config", str(cfg)]) == 0
        assert capsys.readouterr().out == ""
        assert out.read_text().startswith("J_R,")

    def test_float_formatting(self):
        assert format_float(0.1) == "0.10000000000000001"
        assert format_float(float("inf")) == "null"
        assert float(format_float(1 / 3)) == 1 / 3

    def test_json_writer(self):
        text = dumps_json({"a": [1, 2.5, None, True], "b": {}})
        assert json.loads(text) == {"a": [1, 2.5, None, True], "b": {}}

    def test_module_entry_point(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(GAPPED))
        proc = subprocess.run(
            [sys.executable, "-m", "photon_landauer", "current", "--config", str(cfg)],
            capture_output=True, text=True, check=False,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["command"] == "current"

    def test_no_command_is_usage_error(self, capsys):
        assert main([]) == 2
