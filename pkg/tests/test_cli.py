import io
import json
import math
from contextlib import redirect_stdout

import pytest

from qmarginal.cli import main
from qmarginal.fock import FermionState, OrbitalSpace, SlaterDeterminant, write_state_json


def run_cli(argv):
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        code = main(argv)
    return code, buffer.getvalue()


@pytest.fixture
def bd_state_file(tmp_path):
    space = OrbitalSpace(d=6, n=3)
    state = FermionState.from_amplitudes(space, {
        SlaterDeterminant.from_orbitals((1, 2, 3)): math.sqrt(0.6),
        SlaterDeterminant.from_orbitals((1, 4, 5)): math.sqrt(0.3),
        SlaterDeterminant.from_orbitals((2, 4, 6)): math.sqrt(0.1),
    })
    path = tmp_path / "state.json"
    write_state_json(state, str(path))
    return str(path)


class TestNon:
    def test_bd_example_occupations(self, bd_state_file):
        code, out = run_cli(["non", bd_state_file, "--json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["occupations"] == pytest.approx([0.9, 0.7, 0.6, 0.4, 0.3, 0.1],
                                                   abs=1e-12)

    def test_single_determinant(self, tmp_path):
        space = OrbitalSpace(d=6, n=3)
        state = FermionState.from_amplitudes(
            space, {SlaterDeterminant.from_orbitals((1, 2, 3)): 1.0})
        path = tmp_path / "det.json"
        write_state_json(state, str(path))
        code, out = run_cli(["non", str(path), "--json"])
        assert code == 0
        assert json.loads(out)["occupations"] == pytest.approx([1, 1, 1, 0, 0, 0],
                                                               abs=1e-14)

    def test_orbitals_flag(self, bd_state_file):
        code, out = run_cli(["non", bd_state_file, "--orbitals", "--json"])
        assert code == 0
        doc = json.loads(out)
        matrix = doc["natural_orbitals_re"]
        assert len(matrix) == 6 and len(matrix[0]) == 6
        # the example state is diagonal, so natural orbitals are coordinate axes
        column_sums = [sum(abs(matrix[i][j]) for i in range(6)) for j in range(6)]
        assert all(abs(s - 1.0) < 1e-10 for s in column_sums)

    def test_malformed_json_exits_2(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{"d": 6, "n": 3, "amplitudes": [')
        code, _ = run_cli(["non", str(path)])
        assert code == 2
        assert "line" in capsys.readouterr().err

    def test_missing_file_exits_2(self):
        code, _ = run_cli(["non", "/nonexistent/state.json"])
        assert code == 2


class TestGpc:
    def test_hartree_fock_point(self):
        code, out = run_cli(["gpc", "--non", "1,1,1,0,0,0", "--setting", "3,6", "--json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["d_min"] == 0.0
        assert "bd-ineq" in doc["saturated"]
        assert doc["hf_distance"] == 0.0

    def test_violation_flagged(self):
        code, out = run_cli(["gpc", "--non", "1,1,0.5,0.5,0,0", "--setting", "3,6", "--json"])
        assert code == 0
        doc = json.loads(out)
        values = {row["label"]: row["value"] for row in doc["values"]}
        assert values["bd-ineq"] == pytest.approx(-0.5)
        assert doc["d_min"] == pytest.approx(-0.5)

    def test_hypercube_center(self):
        code, out = run_cli(["gpc", "--non", ",".join(["0.5"] * 6),
                             "--setting", "3,6", "--json"])
        assert code == 0
        assert json.loads(out)["d_min"] == pytest.approx(0.5)

    def test_state_file_with_truncation(self, bd_state_file):
        code, out = run_cli(["gpc", "--state", bd_state_file, "--json"])
        assert code == 0
        assert json.loads(out)["d"] == 6

    def test_requires_exactly_one_source(self, bd_state_file):
        assert run_cli(["gpc", "--setting", "3,6"])[0] == 2
        assert run_cli(["gpc", "--non", "1,0", "--state", bd_state_file])[0] == 2


class TestSelection:
    def test_equalities_give_eight(self):
        code, out = run_cli(["selection", "--setting", "3,6",
                             "--saturated", "bd-eq1,bd-eq2,bd-eq3", "--json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["ansatz_size"] == 8

    def test_adding_facet_gives_three(self):
        code, out = run_cli(["selection", "--setting", "3,6",
                             "--saturated", "bd-eq1,bd-eq2,bd-eq3,bd-ineq", "--json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["ansatz"] == [[1, 2, 3], [1, 4, 5], [2, 4, 6]]

    def test_none_keeps_full_basis(self):
        code, out = run_cli(["selection", "--setting", "3,6", "--saturated", "none",
                             "--json"])
        assert code == 0
        assert json.loads(out)["ansatz_size"] == 20

    def test_state_residuals_reported(self, bd_state_file):
        code, out = run_cli(["selection", "--setting", "3,6",
                             "--saturated", "bd-eq1,bd-eq2,bd-eq3,bd-ineq",
                             "--state", bd_state_file, "--json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["weight_outside_ansatz"] == pytest.approx(0.0, abs=1e-12)
        for row in doc["lemma_residuals"]:
            assert row["residual_norm"] < 1e-10

    def test_unknown_label_exits_2(self):
        assert run_cli(["selection", "--setting", "3,6", "--saturated", "bogus"])[0] == 2


class TestHarmonium:
    def test_zero_coupling_point(self):
        code, out = run_cli(["harmonium", "--kappa", "0", "--n", "3",
                             "--basis", "10", "--json"])
        # exact pinning: D = 0 sits below the precision floor, exit code 3
        assert code == 3
        doc = json.loads(out)
        assert abs(doc["D"]) < 1e-12
        assert abs(doc["hf_dist"]) < 1e-10
        assert doc["precision_floor"] is True

    def test_scan_csv_and_summary(self, tmp_path):
        csv_path = tmp_path / "scan.csv"
        code, out = run_cli(["harmonium", "--scan", "0.2:0.3:2", "--basis", "12",
                             "--csv", str(csv_path), "--json"])
        assert code == 0
        doc = json.loads(out)
        assert len(doc["points"]) == 2
        header = csv_path.read_text().splitlines()[0]
        assert header == "kappa,D,hf_dist,eps6,norm_deficit"

    def test_requires_kappa_or_scan(self):
        assert run_cli(["harmonium", "--n", "3"])[0] == 2


class TestSchubertCommands:
    def test_hz_all_patterns_pass(self):
        code, out = run_cli(["hz", "--dim", "3", "--trials", "20", "--seed", "7",
                             "--json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["all_passed"] is True
        assert len(doc["reports"]) == 8

    def test_ineq_valid_pair(self):
        code, out = run_cli(["ineq", "--da", "2", "--db", "2", "--pi", "10",
                             "--sigma", "1100", "--samples", "300", "--json"])
        assert code == 0
        assert json.loads(out)["violated"] is False

    def test_ineq_witness_emitted(self):
        code, out = run_cli(["ineq", "--da", "2", "--db", "2", "--pi", "10",
                             "--sigma", "0001", "--samples", "100", "--json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["violated"] is True
        assert doc["witness"]["lhs"] > doc["witness"]["rhs"]

    def test_bad_binary_string_exits_2(self):
        assert run_cli(["ineq", "--da", "2", "--db", "2", "--pi", "12",
                        "--sigma", "0001"])[0] == 2


class TestReproducibility:
    @pytest.mark.parametrize("argv", [
        ["gpc", "--non", "0.9,0.7,0.6,0.4,0.3,0.1", "--setting", "3,6", "--json"],
        ["hz", "--dim", "3", "--trials", "25", "--seed", "11", "--json"],
        ["ineq", "--da", "2", "--db", "2", "--pi", "10", "--sigma", "1100",
         "--samples", "200", "--seed", "5", "--json"],
        ["selection", "--setting", "3,6", "--saturated", "bd-eq1,bd-eq2,bd-eq3"],
        ["harmonium", "--kappa", "0.25", "--basis", "12", "--json"],
    ])
    def test_identical_invocations_byte_identical(self, argv):
        code_a, out_a = run_cli(argv)
        code_b, out_b = run_cli(argv)
        assert code_a == code_b
        assert out_a == out_b
