"""End-to-end checks of the command line front end.

Commands run in-process through cli.main; files go to tmp_path.  CSV
determinism is checked byte for byte.
"""
import pathlib

import pytest

from skelmeas import cli

MODELS = pathlib.Path(__file__).resolve().parents[1] / "models"
TATE = str(MODELS / "tate_triangle.toml")
IV = str(MODELS / "kodaira_IV.toml")
ISTAR = str(MODELS / "kodaira_Istar1.toml")
TWO = str(MODELS / "two_points.toml")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["nonsense"])
        assert exc.value.code == 2

    def test_unknown_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["shilov", IV, "--badflag"])
        assert exc.value.code == 2

    def test_missing_file_is_runtime_failure(self, capsys):
        code, _, err = run(capsys, "lattice", str(MODELS / "missing.toml"), "-e", "2")
        assert code == 1
        assert "cannot read" in err

    def test_bad_sequence_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["converge", TWO, "--e-seq", "0", "--f-seq", "1", "-q", "2",
                      "--csv", "/dev/null"])
        assert exc.value.code == 2

    def test_bad_grid_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["lemma", "--spec", "x", "--grid", "12", "--csv", "y"])
        assert exc.value.code == 2


class TestValidate:
    def test_good_model(self, capsys):
        code, out, _ = run(capsys, "validate", TWO)
        assert code == 0
        assert out.startswith("ok: two_points")

    def test_broken_model_lists_violations(self, capsys, tmp_path):
        bad = tmp_path / "broken.toml"
        bad.write_text('[model]\nname = ""\ndimension = -2\np = 6\nm = 1\nlog_smooth = false\n')
        code, out, _ = run(capsys, "validate", str(bad))
        assert code == 1
        assert "invalid" in out
        assert "name must be nonempty" in out
        assert "dimension" in out
        assert out.count("\n") >= 3  # one violation per line

    def test_json_model_sniffed(self, capsys, tmp_path):
        src = tmp_path / "m.json"
        src.write_text(
            '{"model": {"name": "j", "dimension": 1, "p": 2, "q": 2, "m": 1,'
            ' "log_smooth": false},'
            ' "component": [{"id": "a", "multiplicity": 1, "theta_order": 0}],'
            ' "stratum": [{"components": ["a"], "count_poly": [1, 1]}]}'
        )
        code, out, _ = run(capsys, "validate", str(src))
        assert code == 0
        assert "ok: j" in out


class TestSkeleton:
    def test_full_lists_all_faces(self, capsys):
        code, out, _ = run(capsys, "skeleton", IV)
        assert code == 0
        assert "faces 7" in out
        assert "min weight: -1/3" in out

    def test_temperate_star(self, capsys):
        code, out, _ = run(capsys, "skeleton", ISTAR, "--temperate")
        assert code == 0
        assert "faces 10" in out
        assert "d0&l0" in out

    def test_ks_plus_temperate_empty_for_three_leg(self, capsys):
        code, out, _ = run(capsys, "skeleton", IV, "--ks", "--temperate")
        assert code == 0
        assert "faces 0" in out
        assert "dimension -1" in out


class TestMeasure:
    def test_stable_ks_total(self, capsys):
        code, out, _ = run(capsys, "measure", IV, "--stable", "--complex", "ks")
        assert code == 0
        assert "total: 1 (" in out

    def test_full_tate_total(self, capsys):
        code, out, _ = run(capsys, "measure", TATE)
        assert code == 0
        assert "total: 3 (" in out

    def test_empty_temperate_measure(self, capsys):
        code, out, _ = run(capsys, "measure", IV, "--complex", "temperate")
        assert code == 0
        assert "empty measure" in out


class TestLattice:
    def test_level_four_three_leg(self, capsys):
        code, out, _ = run(capsys, "lattice", IV, "-e", "4")
        assert code == 0
        assert "points 6" in out
        assert out.count("weight -1/4") == 3


class TestBasechange:
    def test_roundtrip_written_model_validates(self, capsys, tmp_path):
        out_path = tmp_path / "iv4.toml"
        code, out, _ = run(capsys, "basechange", IV, "-e", "4", "-f", "1",
                           "-o", str(out_path))
        assert code == 0
        assert "volume scaling e^d exact: True" in out
        code2, out2, _ = run(capsys, "validate", str(out_path))
        assert code2 == 0

    def test_wild_ramification_fails(self, capsys, tmp_path):
        code, _, err = run(capsys, "basechange", IV, "-e", "3", "-f", "1",
                           "-o", str(tmp_path / "x.toml"))
        assert code == 1
        assert "wild" in err


class TestShilov:
    def test_sweep_has_a_row_per_level(self, capsys, tmp_path):
        out_csv = tmp_path / "s.csv"
        code, _, _ = run(capsys, "shilov", IV, "--sweep", "1..12",
                         "--csv", str(out_csv))
        assert code == 0
        lines = out_csv.read_text().splitlines()
        assert len(lines) == 13  # header plus one row per e
        row4 = lines[4].split(",")
        assert row4[0] == "4"
        assert row4[5] == "1/12"  # caption distance at e=4
        assert row4[3] == "-1/4"

    def test_sweep_csv_bytes_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "shilov", IV, "--sweep", "1..6", "--csv", str(a))
        run(capsys, "shilov", IV, "--sweep", "1..6", "--csv", str(b))
        assert a.read_bytes() == b.read_bytes()
        assert b"\r" not in a.read_bytes()

    def test_point_csv_layout(self, capsys, tmp_path):
        out_csv = tmp_path / "p.csv"
        code, _, _ = run(capsys, "shilov", IV, "-e", "4", "--csv", str(out_csv))
        assert code == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "e,f,point id,face,coords,weight,tdeg,raw mass,scaled mass"
        assert len(lines) == 4
        assert all(line.startswith("4,1,") for line in lines[1:])

    def test_gnuplot_needs_sweep_and_csv(self, capsys, tmp_path):
        code, _, err = run(capsys, "shilov", IV, "--sweep", "1..3",
                           "--gnuplot", str(tmp_path / "g.gp"))
        assert code == 1
        assert "--csv" in err

    def test_gnuplot_script_written(self, capsys, tmp_path):
        out_csv, out_gp = tmp_path / "s.csv", tmp_path / "s.gp"
        code, _, _ = run(capsys, "shilov", IV, "--sweep", "1..3",
                         "--csv", str(out_csv), "--gnuplot", str(out_gp))
        assert code == 0
        text = out_gp.read_text()
        assert 'set datafile separator ","' in text
        assert str(out_csv) in text


class TestSimulate:
    def test_level_one_total(self, capsys):
        code, out, _ = run(capsys, "simulate", TATE, "-e", "1", "-f", "1", "-q", "2")
        assert code == 0
        assert "raw total: 3/2 (1.500000000000)" in out

    def test_csv_masses_exact(self, capsys, tmp_path):
        out_csv = tmp_path / "sim.csv"
        code, _, _ = run(capsys, "simulate", TWO, "-e", "1", "-f", "2", "-q", "2",
                         "--csv", str(out_csv))
        assert code == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "e,f,point id,face,coords,weight,tdeg,raw mass,normalized mass"
        cells = [line.split(",") for line in lines[1:]]
        assert {c[7] for c in cells} == {"5/4", "1/4"}

    def test_wild_level_fails(self, capsys):
        code, _, err = run(capsys, "simulate", TWO, "-e", "2", "-f", "1", "-q", "2")
        assert code == 1
        assert "wild" in err


class TestConverge:
    def test_report_and_csv(self, capsys, tmp_path):
        out_csv = tmp_path / "c.csv"
        code, out, _ = run(capsys, "converge", TWO, "--e-seq", "1",
                           "--f-seq", "1,2,4", "-q", "2", "--csv", str(out_csv))
        assert code == 0
        assert "target shilov" in out
        assert "monotone in f: True" in out
        lines = out_csv.read_text().splitlines()
        header = lines[0].split(",")
        assert header[:4] == ["e", "f", "row", "name"]
        totals = [l.split(",") for l in lines[1:] if l.split(",")[2] == "total"]
        assert [t[10] for t in totals] == ["1", "1/2", "1/8"]  # 2*2^-f exactly
        phis = [l for l in lines[1:] if ",phi," in l]
        assert phis

    def test_phi_file_and_gnuplot(self, capsys, tmp_path):
        phi = tmp_path / "phi.toml"
        phi.write_text('[[phi]]\nname = "probe"\n[phi.faces]\ny0 = ["1", "0"]\n')
        out_csv, out_gp = tmp_path / "c.csv", tmp_path / "c.gp"
        code, out, _ = run(capsys, "converge", TWO, "--e-seq", "1", "--f-seq", "1,2",
                           "-q", "2", "--phi", str(phi), "--csv", str(out_csv),
                           "--gnuplot", str(out_gp))
        assert code == 0
        assert "probe" in out_csv.read_text()
        assert "strcol(3)" in out_gp.read_text()

    def test_bad_phi_file_fails(self, capsys, tmp_path):
        phi = tmp_path / "phi.toml"
        phi.write_text('[[phi]]\nname = "p"\n[phi.faces]\nnope = ["1", "0"]\n')
        code, _, err = run(capsys, "converge", TWO, "--e-seq", "1", "--f-seq", "1",
                           "-q", "2", "--phi", str(phi), "--csv", str(tmp_path / "x.csv"))
        assert code == 1
        assert "no stratum" in err

    def test_csv_bytes_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            run(capsys, "converge", TATE, "--e-seq", "1,2", "--f-seq", "1,2",
                "-q", "2", "--csv", str(path))
        assert a.read_bytes() == b.read_bytes()


class TestLemma:
    SPEC = (
        'r = "2"\n'
        'box = [["0","1"],["0","1"]]\n'
        'alpha = ["0","1"]\n'
        'offsets = ["0","0"]\n'
        '[phi]\nc0 = "1"\ncoeffs = ["1","0"]\n'
    )

    def test_grid_csv(self, capsys, tmp_path):
        spec = tmp_path / "spec.toml"
        spec.write_text(self.SPEC)
        out_csv = tmp_path / "l.csv"
        code, out, _ = run(capsys, "lemma", "--spec", str(spec), "--grid", "2x3",
                           "--csv", str(out_csv))
        assert code == 0
        assert "target integral: 3/2" in out
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "e,f,sum,sum_dec,tau,tau_dec,gap_dec"
        assert len(lines) == 7
        assert lines[1].startswith("1,1,9/2,")

    def test_unknown_key_fails(self, capsys, tmp_path):
        spec = tmp_path / "spec.toml"
        spec.write_text('box = [["0","1"]]\nalpha = ["1"]\noffsets = ["0"]\nbogus = 1\n')
        code, _, err = run(capsys, "lemma", "--spec", str(spec), "--grid", "1x1",
                           "--csv", str(tmp_path / "x.csv"))
        assert code == 1
        assert "bogus" in err


class TestCone2d:
    def test_edge_data(self, capsys):
        code, out, _ = run(capsys, "cone2d", "1", "0", "0", "1", "2", "3")
        assert code == 0
        assert "N1=2 N2=3" in out
        assert "length: 1/6" in out

    def test_nonprimitive_ray_fails(self, capsys):
        code, _, err = run(capsys, "cone2d", "2", "2", "0", "1", "1", "1")
        assert code == 1
        assert "primitive" in err


class TestCount:
    def test_circle_tower_and_limit_check(self, capsys, tmp_path):
        out_csv = tmp_path / "c.csv"
        code, out, _ = run(capsys, "count", "--poly", "x^2+y^2-1", "-p", "3",
                           "--m-range", "1..4", "--cz", "1", "--csv", str(out_csv))
        assert code == 0
        assert "count=4" in out and "count=80" in out
        assert "limit check (c_Z=1, C=2): PASS" in out
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "m,q^m,count,normalized"
        assert lines[1] == "1,3,4,4/3"

    def test_misdeclared_components_fail_check(self, capsys):
        code, out, _ = run(capsys, "count", "--poly", "x^2+y^2-1", "-p", "3",
                           "--m-range", "1..4", "--cz", "2")
        assert code == 0
        assert "FAIL" in out

    def test_projective_needs_homogeneous(self, capsys):
        code, _, err = run(capsys, "count", "--poly", "x^2+y-1", "-p", "3",
                           "--m-range", "1..2", "--projective")
        assert code == 1
        assert "homogeneous" in err

    def test_variables_inferred_sorted(self, capsys):
        code, out, _ = run(capsys, "count", "--poly", "y^2-x", "-p", "2",
                           "--m-range", "1..2")
        assert code == 0
        assert "variables x,y" in out


class TestAccept:
    def test_single_criterion_line(self, capsys):
        code, out, _ = run(capsys, "accept", "--only", "1")
        assert code == 0
        assert out.startswith("PASS  criterion  1")
        assert "1/1 criteria passed" in out

    def test_only_rejects_unknown_number(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["accept", "--only", "11"])
        assert exc.value.code == 2


class TestArgumentTypes:
    def test_seq_mixes_commas_and_ranges(self):
        assert cli._seq_type("1,3..5,8") == [1, 3, 4, 5, 8]

    def test_range_inclusive(self):
        assert cli._range_type("2..4") == [2, 3, 4]

    def test_grid(self):
        assert cli._grid_type("12x9") == (12, 9)
