import io
import json
import subprocess
import sys

import pytest

from conftest import FIGURE_EIGHT_DSL, TREFOIL_DSL
from torsionlab.cli import main, parse_grid, parse_torus
from torsionlab.errors import InvalidParameter, UsageError
from torsionlab.knot import torus_torsion_closed_form
from torsionlab.presentation import presentation_to_dict, torus_knot_presentation


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def trefoil_file(tmp_path):
    path = tmp_path / "trefoil.grp"
    path.write_text(TREFOIL_DSL)
    return str(path)


class TestTorsion:
    def test_torus(self):
        code, out, _ = run("torsion", "--torus", "3,1,0.4")
        data = json.loads(out)
        assert code == 0
        assert data["torsion"] == pytest.approx(-2.0, abs=1e-10)
        assert data["regular"] and data["mu_regular"] and data["irreducible"]
        assert data["cohomology_dims"] == [0, 1, 1] and data["tau0"] == 1

    def test_abelian_file(self, trefoil_file):
        code, out, _ = run("torsion", "--file", trefoil_file, "--abelian-theta", "1.5707963")
        assert code == 0
        assert json.loads(out)["torsion"] == pytest.approx(4 / 9, rel=1e-12)

    def test_text_format(self):
        code, out, _ = run("torsion", "--torus", "5,1,0.3", "--format", "text")
        assert code == 0
        lines = dict(line.split(": ", 1) for line in out.splitlines())
        assert float(lines["torsion"]) == pytest.approx(torus_torsion_closed_form(5, 1), abs=1e-11)
        assert lines["regular"] == "true" and lines["cohomology_dims"] == "0 1 1"

    def test_invalid_q(self):
        code, out, err = run("torsion", "--torus", "2,1,0.5")
        assert code == 1 and out == "" and "InvalidParameter" in err

    def test_rep_json(self, trefoil_file):
        code, out, _ = run("torsion", "--torus", "3", "--rep-json", '{"torus": [3, 1, 0.25]}')
        assert code == 0 and json.loads(out)["torsion"] == pytest.approx(-2.0)

    def test_quaternion_block(self):
        from torsionlab.knot import torus_rep

        images = [list(g.to_array()) for g in torus_rep(5, 2, 0.6).images]
        code, out, _ = run("torsion", "--torus", "5", "--rep-json", json.dumps(images))
        assert code == 0 and json.loads(out)["torsion"] == pytest.approx(torus_torsion_closed_form(5, 2))

    def test_not_a_representation(self):
        code, _, err = run("torsion", "--torus", "3", "--rep-json", "[[0, 1, 0, 0], [0, 0, 1, 0]]")
        assert code == 2 and "InvalidRepresentation" in err

    def test_abelian_rep_is_not_regular(self):
        code, _, err = run("torsion", "--torus", "3", "--rep-json", json.dumps([[0.8, 0.6, 0, 0], [1, 0, 0, 0]]))
        assert code == 2

    def test_root_of_alexander(self, trefoil_file):
        code, _, err = run("torsion", "--file", trefoil_file, "--abelian-theta", "0.5235987755982988")
        assert code == 2 and "NonRegularTheta" in err

    def test_missing_peripheral_data(self, trefoil_file):
        code, _, err = run("torsion", "--file", trefoil_file, "--rep-json", "[[1,0,0,0],[1,0,0,0]]")
        assert code == 1 and "MissingPeripheralData" in err

    def test_needs_representation(self):
        assert run("torsion", "--torus", "3")[0] == 1

    def test_two_sources(self, trefoil_file):
        assert run("torsion", "--torus", "3,1,0.5", "--file", trefoil_file)[0] == 1

    def test_two_representations(self, trefoil_file):
        code, _, _ = run("torsion", "--file", trefoil_file, "--abelian-theta", "1", "--rep-json", '{"abelian_theta": 1}')
        assert code == 1

    def test_json_presentation_with_embedded_rep(self, tmp_path):
        data = presentation_to_dict(torus_knot_presentation(3))
        data["representation"] = {"torus": [3, 1, 0.7]}
        path = tmp_path / "t3.json"
        path.write_text(json.dumps(data))
        code, out, _ = run("torsion", "--file", str(path))
        assert code == 0 and json.loads(out)["torsion"] == pytest.approx(-2.0)

    def test_job_file(self, tmp_path):
        job = {"presentation": FIGURE_EIGHT_DSL, "representation": {"abelian_theta": 1.5707963267948966}}
        path = tmp_path / "job.json"
        path.write_text(json.dumps(job))
        code, out, _ = run("torsion", "--job", str(path))
        assert code == 0 and json.loads(out)["torsion"] == pytest.approx(4 / 25, rel=1e-12)

    def test_inline(self):
        code, out, _ = run("torsion", "--inline", "gens: x;;meridian: x", "--abelian-theta", "1.0")
        assert code == 0
        assert json.loads(out)["torsion"] == pytest.approx(4 * 0.8414709848078965 ** 2, rel=1e-11)

    def test_deterministic(self):
        assert run("torsion", "--torus", "7,2,0.33") == run("torsion", "--torus", "7,2,0.33")


class TestAlexander:
    def test_trefoil(self, trefoil_file):
        assert run("alexander", "--file", trefoil_file) == (0, "1 - t + t^2\n", "")

    def test_figure_eight(self):
        code, out, _ = run("alexander", "--inline", FIGURE_EIGHT_DSL)
        assert out == "1 - 3t + t^2\n"

    def test_json(self):
        code, out, _ = run("alexander", "--torus", "5", "--format", "json")
        data = json.loads(out)
        assert data["coefficients"] == [1, -1, 1, -1, 1] and data["exponents"] == [5, 2]

    def test_missing_file(self, tmp_path):
        code, _, err = run("alexander", "--file", str(tmp_path / "nope.grp"))
        assert code == 1 and "cannot read" in err

    def test_parse_error_position(self):
        code, _, err = run("alexander", "--inline", "gens: x, y;;rel: x^*y")
        assert code == 1 and "line 2, column 8" in err

    def test_unknown_generator(self):
        code, _, err = run("alexander", "--inline", "gens: x, y;;rel: x*z")
        assert code == 1 and "UnknownGenerator" in err

    def test_finite_abelianization(self):
        code, _, err = run("alexander", "--inline", "gens: x, y;;rel: x^2*y^2")
        assert code == 2 and "NotKnotLike" in err


class TestScan:
    def test_rows(self):
        code, out, _ = run("scan", "--torus", "5,1", "--grid", "0.1:0.9:9")
        lines = out.splitlines()
        assert code == 0
        assert lines[0] == "t,theta_m,tor,dtheta_dt,tau_form,closed_form,abs_err"
        rows = [dict(zip(lines[0].split(","), map(float, line.split(",")))) for line in lines[1:]]
        assert len(rows) == 9
        assert max(r["tor"] for r in rows) - min(r["tor"] for r in rows) < 1e-10
        assert all(r["abs_err"] < 1e-6 for r in rows)

    def test_endpoints_refused(self):
        code, _, err = run("scan", "--torus", "5,1", "--grid", "0:1:3")
        assert code == 1 and "InvalidParameter" in err

    def test_fd_step(self):
        rows = {}
        for h in ("1e-5", "1e-2"):
            out = run("scan", "--torus", "5,1", "--grid", "0.3:0.3:1", "--fd-step", h, "--format", "json")[1]
            rows[h] = json.loads(out)[0]["dtheta_dt"]
        assert rows["1e-5"] != rows["1e-2"]

    def test_needs_l(self):
        assert run("scan", "--torus", "5", "--grid", "0.1:0.9:3")[0] == 1

    def test_job_grid(self, tmp_path):
        path = tmp_path / "job.json"
        path.write_text(json.dumps({"torus": [3, 1], "grid": "0.2:0.8:4", "fd_step": 1e-4}))
        code, out, _ = run("scan", "--job", str(path))
        assert code == 0 and len(out.splitlines()) == 5

    def test_deterministic(self):
        assert run("scan", "--torus", "7,3", "--grid", "0.1:0.9:5") == run("scan", "--torus", "7,3", "--grid", "0.1:0.9:5")


class TestCheck:
    def test_seeded_suite(self):
        code, out, _ = run("check", "multiplicativity", "--trials", "50", "--seed", "7")
        lines = out.splitlines()
        assert code == 0 and lines[0] == "seed: 7"
        assert lines[1].startswith("PASS multiplicativity: trials=50")
        assert out == run("check", "multiplicativity", "--trials", "50", "--seed", "7")[1]

    def test_torus_oracle(self):
        code, out, _ = run("check", "torus-oracle", "--trials", "1")
        assert code == 0 and "PASS torus-oracle" in out

    def test_alexander_oracle(self):
        code, out, _ = run("check", "alexander-oracle", "--trials", "2")
        assert code == 0 and "PASS alexander-oracle" in out

    def test_unknown_suite(self):
        assert run("check", "nonsense")[0] == 1

    def test_bad_trials(self):
        assert run("check", "shift", "--trials", "0")[0] == 1


class TestTorsionRaw:
    def test_doubling(self):
        code, out, _ = run("torsion-raw", "--inline", '{"dims": [1, 1], "boundaries": [[[2.0]]]}')
        data = json.loads(out)
        assert code == 0 and data["torsion"] == pytest.approx(0.5) and data["sign_exponent"] == 0

    def test_homology(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"dims": [1], "boundaries": [], "homology_bases": [[[3.0]]]}')
        code, out, _ = run("torsion-raw", "--file", str(path), "--format", "text")
        assert code == 0 and out == "torsion: -0.333333333333\n"

    def test_seed_does_not_change_value(self):
        text = '{"dims": [2, 3, 1], "boundaries": [[[1, 0, 2], [0, 1, 1]], [[-2], [-1], [1]]]}'
        values = {json.loads(run("torsion-raw", "--inline", text, "--seed", str(s))[1])["torsion"] for s in range(5)}
        assert len(values) == 1

    def test_not_a_complex(self):
        code, _, err = run("torsion-raw", "--inline", '{"dims": [1, 1, 1], "boundaries": [[[1]], [[1]]]}')
        assert code == 2 and "InvalidComplex" in err

    def test_bad_json(self):
        code, _, err = run("torsion-raw", "--inline", '{"dims": [1,')
        assert code == 1 and "ParseError" in err

    def test_no_input(self):
        assert run("torsion-raw")[0] == 1

    def test_rank_tol_env(self, monkeypatch):
        # singular values 1 and 1e-6: full rank by default, rank 1 under a 1e-3 tolerance
        text = '{"dims": [2, 2], "boundaries": [[[1, 0], [0, 1e-6]]]}'
        code, out, _ = run("torsion-raw", "--inline", text)
        assert code == 0 and json.loads(out)["torsion"] == pytest.approx(1e6)
        monkeypatch.setenv("TORSIONLAB_RANK_TOL", "1e-3")
        code, _, err = run("torsion-raw", "--inline", text)
        assert code == 2 and "InvalidBasis" in err


class TestArgumentParsing:
    def test_torus(self):
        assert parse_torus("5,2,0.3") == (5, 2, 0.3)
        with pytest.raises(UsageError):
            parse_torus("5,x")

    def test_grid(self):
        assert list(parse_grid("0.25:0.75:3")) == [0.25, 0.5, 0.75]
        with pytest.raises(InvalidParameter):
            parse_grid("0:0.5:2")
        with pytest.raises(UsageError):
            parse_grid("0.1:0.2")

    def test_no_subcommand(self):
        assert run()[0] == 1


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "torsionlab", "alexander", "--torus", "3"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout == "1 - t + t^2\n"
