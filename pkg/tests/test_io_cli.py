import json
import subprocess
import sys

import pytest

from periodgeom import datasets
from periodgeom.cli import run_command
from periodgeom.io import OrbitFileError, dump_orbit, load_orbit, orbit_from_dict, orbit_to_dict


def run(capsys, *argv):
    code = run_command(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def e1_doc():
    return orbit_to_dict(datasets.e1())


class TestIO:
    @pytest.mark.parametrize("name", sorted(datasets.CURATED))
    def test_bundled(self, name):
        assert load_orbit(name) == datasets.curated(name)
        assert load_orbit(f"{name}.json") == datasets.curated(name)

    @pytest.mark.parametrize("name", sorted(datasets.CURATED))
    def test_roundtrip(self, name, tmp_path):
        data = datasets.curated(name)
        path = tmp_path / "o.json"
        dump_orbit(data, path)
        assert load_orbit(path) == data

    def test_non_commuting(self):
        doc = orbit_to_dict(datasets.e2())
        doc["N"][1] = [["0", "0", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "0"], ["0", "0", "0", "0"]]
        with pytest.raises(OrbitFileError) as info:
            orbit_from_dict(doc)
        assert any("N_1, N_2: commute" in p for p in info.value.problems)

    def test_singular_q(self, e1_doc):
        e1_doc["Q"] = [["0", "1"], ["0", "0"]]
        with pytest.raises(OrbitFileError) as info:
            orbit_from_dict(e1_doc)
        assert any("nondegenerate" in p or "singular" in p for p in info.value.problems)

    def test_floats_rejected(self, e1_doc):
        e1_doc["Q"][0][1] = 1.0
        with pytest.raises(OrbitFileError, match="floats"):
            orbit_from_dict(e1_doc)

    def test_lists_every_problem(self, e1_doc):
        e1_doc["Q"][0][1] = 0.5
        e1_doc["N"][0][1][0] = 0.5
        with pytest.raises(OrbitFileError) as info:
            orbit_from_dict(e1_doc)
        assert len(info.value.problems) == 2

    def test_missing_fields(self):
        with pytest.raises(OrbitFileError, match="missing field"):
            orbit_from_dict({"schema": 1})

    def test_schema_version(self, e1_doc):
        e1_doc["schema"] = 2
        with pytest.raises(OrbitFileError, match="schema"):
            orbit_from_dict(e1_doc)

    def test_missing_file(self):
        with pytest.raises(FileNotFoundError):
            load_orbit("/nonexistent/orbit.json")


class TestCLI:
    def test_validate_ok(self, capsys):
        code, out, _ = run(capsys, "validate", "e2")
        assert code == 0 and "FAIL" not in out and "N_1, N_2: commute" in out

    def test_validate_bad(self, capsys, tmp_path, e1_doc):
        e1_doc["N"][0] = [["0", "1"], ["1", "0"]]
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(e1_doc))
        code, out, _ = run(capsys, "validate", str(bad))
        assert code == 1 and "nilpotent" in out

    def test_validate_missing(self, capsys):
        assert run(capsys, "validate", "/nonexistent.json")[0] == 2

    def test_usage(self, capsys):
        assert run(capsys, "frobnicate")[0] == 2
        assert run(capsys, "fit", "--orbit", "e1")[0] == 2

    def test_hecke(self, capsys):
        code, out, _ = run(capsys, "hecke", "--orbit", "none", "--z", "i", "--p", "2")
        assert code == 0 and "degree 3" in out and "{2i×2, i×1}" in out

    def test_fit(self, capsys):
        code, out, _ = run(capsys, "fit", "--orbit", "e1.json", "--vector", "e1")
        assert code == 0 and "s=(+1)" in out

    def test_fit_j_basis(self, capsys):
        code, out, _ = run(capsys, "fit", "--orbit", "e2", "--vector", "J")
        assert code == 0 and out.count("s=") == 4

    def test_hodge_form(self, capsys):
        code, out, _ = run(capsys, "hodge-form", "--orbit", "e1", "--z", "2i")
        assert code == 0 and "1/2" in out
        assert run(capsys, "hodge-form", "--orbit", "e1", "--z=-i")[0] == 1

    def test_reduce(self, capsys):
        code, out, _ = run(capsys, "reduce", "--z", "1/2i")
        assert code == 0 and "2i" in out

    def test_intersectors(self, capsys):
        code, out, _ = run(capsys, "intersectors", "--bound", "3")
        assert code == 0 and "6" in out

    def test_bs_bb(self, capsys):
        code, out, _ = run(capsys, "bs-bb", "--x", "1/4", "--t", "1")
        assert code == 0
        assert run(capsys, "bs-bb", "--x", "0", "--t", "-1")[0] == 2

    def test_weight_and_split(self, capsys):
        assert run(capsys, "weight-filtration", "--orbit", "e2")[0] == 0
        code, out, _ = run(capsys, "split", "--orbit", "e2")
        assert code == 0 and "(-1, -1)" in out.replace("(-1,-1)", "(-1, -1)")

    def test_locus(self, capsys, tmp_path):
        path = tmp_path / "locus.json"
        code, out, _ = run(capsys, "locus", "--orbit", "sym2_e1", "--vector", "1,0,1", "--y0", "1/2",
                           "--json", str(path))
        assert code == 0 and "i" in out
        doc = json.loads(path.read_text())
        assert doc["components"][0]["z"] == ["i"]

    def test_sweep_csv_deterministic(self, tmp_path):
        outs = []
        for jobs in ("1", "2"):
            path = tmp_path / f"s{jobs}.csv"
            res = subprocess.run([sys.executable, "-m", "periodgeom.cli", "--jobs", jobs, "sweep", "--orbit", "e2",
                                  "--density", "5", "--csv", str(path)], capture_output=True, text=True)
            assert res.returncode == 0, res.stderr
            outs.append((res.stdout.replace(str(path), "<csv>"), path.read_bytes()))
        assert outs[0] == outs[1]

    def test_report_only(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        code, out, _ = run(capsys, "report", "--only", "3,10", "--json", str(path))
        assert code == 0
        assert out.count("[PASS]") == 2 and "[FAIL]" not in out
        assert [c["criterion"] for c in json.loads(path.read_text())] == [3, 10]

    def test_report_deterministic(self, capsys):
        a = run(capsys, "--seed", "5", "report", "--only", "7")[1]
        b = run(capsys, "--seed", "5", "report", "--only", "7")[1]
        strip = lambda s: [line.rsplit("(", 1)[0] for line in s.splitlines()]  # noqa: E731
        assert strip(a) == strip(b)
