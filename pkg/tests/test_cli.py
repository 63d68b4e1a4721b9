import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from bscmatch import schemas
from bscmatch.baseline import generate_shape
from bscmatch.cli import load_config, main, UsageError
from bscmatch.shapes import BinaryImage, Shape, load_fixture, load_points, save_pgm, save_points


@pytest.fixture
def files(tmp_path):
    def write(name, shape):
        path = tmp_path / name
        path.write_text(save_points(shape))
        return str(path)
    return write


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_match_self_is_zero(capsys, files):
    a = files("self.csv", generate_shape("star", 60, 0.02, 3))
    code, out, _ = run(capsys, "match", a, a)
    assert code == 0
    doc = json.loads(out)
    assert doc["score"] == 0
    assert doc["iterations"] == 3


def test_match_outputs(capsys, files, tmp_path):
    a = files("a.csv", load_fixture("rectangle"))
    b = files("b.csv", load_fixture("notched_rectangle"))
    j, s = tmp_path / "m.json", tmp_path / "m.svg"
    code, out, _ = run(capsys, "match", a, b, "--iterations", 1, "--lambda", 0.01,
                       "--json", j, "--svg", s)
    assert code == 0
    assert json.loads(out)["iterations"] == 1
    doc = json.loads(j.read_text())
    jsonschema.validate(doc, schemas.MATCH_RESULT)
    assert doc["warp_models"][0]["lambda"] > 0
    assert s.read_text().startswith("<svg")


def test_correspond_json(capsys, files, tmp_path):
    a = files("a.csv", load_fixture("rectangle"))
    b = files("b.csv", load_fixture("notched_rectangle"))
    out_json = tmp_path / "c.json"
    code, out, _ = run(capsys, "correspond", a, b, "--prune", "--json", out_json)
    assert code == 0
    doc = json.loads(out_json.read_text())
    jsonschema.validate(doc, schemas.CORRESPONDENCE_SET)
    summary = json.loads(out)
    assert summary["direction"] == doc["direction"]
    assert summary["score"] == pytest.approx(
        0.5 * (summary["forward_average_cost"] + summary["backward_average_cost"]), abs=1e-11)
    assert doc["pruned"]["kept_count"] == len(doc["pruned"]["kept"])


def test_correspond_unpruned(capsys, files):
    a = files("a.csv", generate_shape("circle", 30))
    code, out, _ = run(capsys, "correspond", a, a)
    assert code == 0 and json.loads(out)["score"] == 0


def test_byte_identical_reruns(capsys, files, tmp_path):
    a = files("a.csv", generate_shape("blob", 50, 0.02, 1))
    b = files("b.csv", generate_shape("blob", 50, 0.02, 2))
    outs = []
    for k in range(2):
        j = tmp_path / f"r{k}.json"
        _, out, _ = run(capsys, "match", a, b, "--json", j)
        outs.append((out, j.read_bytes()))
    assert outs[0] == outs[1]


def test_warp(capsys, files, tmp_path):
    a = files("a.csv", generate_shape("circle", 40))
    b = files("b.csv", generate_shape("square", 40))
    o = tmp_path / "w.csv"
    assert run(capsys, "warp", a, b, "-o", o)[0] == 0
    assert len(load_points(o.read_text())) == 40


def test_extract(capsys, tmp_path):
    img = np.zeros((7, 7), np.uint8)
    img[2:5, 2:5] = 255
    p = tmp_path / "sq.pgm"
    p.write_bytes(save_pgm(BinaryImage.from_array(img)))
    code, out, _ = run(capsys, "extract", p)
    assert code == 0
    s = load_points(out)
    assert len(s) == 8
    assert sorted(map(tuple, s.points.tolist()))[0] == (2.0, 2.0)


def test_bench(capsys, tmp_path):
    o = tmp_path / "b.csv"
    code, out, _ = run(capsys, "bench", "--sizes", "200,400", "--algos", "bsc",
                       "--reps", 3, "-o", o)
    assert code == 0
    lines = o.read_text().splitlines()
    assert len(lines) == 3
    assert lines[0] == "algorithm,size,wall_time_s,repetitions"
    jsonschema.validate(json.loads(out), schemas.BENCH_SUMMARY)


def test_classify_directory(capsys, files, tmp_path):
    (tmp_path / "g").mkdir()
    for fam in ("circle", "star"):
        for seed in range(2):
            s = generate_shape(fam, 40, 0.02, seed)
            (tmp_path / "g" / f"{fam}_{seed}.csv").write_text(save_points(Shape(s.contours)))
    q = files("q.csv", generate_shape("star", 40, 0.02, 7))
    code, out, _ = run(capsys, "classify", "--gallery", tmp_path / "g", "--query", q,
                       "--iterations", 1)
    assert code == 0 and out.strip() == "star"


def test_classify_synthetic(capsys, files):
    q = files("q.csv", generate_shape("square", 60, 0.02, 11))
    code, out, _ = run(capsys, "classify", "--gallery", "synthetic", "--query", q,
                       "-k", 3, "--iterations", 0)
    assert code == 0 and out.strip() == "square"


class TestErrors:
    def test_usage(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(["match"])
        assert e.value.code == 1
        with pytest.raises(SystemExit) as e:
            main(["frobnicate"])
        assert e.value.code == 1

    def test_bad_bench_args(self, capsys):
        assert run(capsys, "bench", "--sizes", "400,200", "--reps", 3)[0] == 1
        with pytest.raises(SystemExit) as e:
            main(["bench", "--algos", "quicksort"])
        assert e.value.code == 1

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "match", tmp_path / "nope.csv", tmp_path / "nope.csv")
        assert code == 2 and "bscmatch" in err

    def test_parse_error(self, capsys, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("0,0\n1,oops\n")
        code, _, err = run(capsys, "match", p, p)
        assert code == 2 and "ParseError" in err

    def test_degenerate(self, capsys, files):
        a = files("a.csv", Shape.from_points([(0, 0), (1, 1)]))
        assert run(capsys, "match", a, a)[0] == 2

    def test_missing_gallery(self, capsys, files, tmp_path):
        q = files("q.csv", generate_shape("circle", 20))
        assert run(capsys, "classify", "--gallery", tmp_path / "none", "--query", q)[0] == 1


class TestConfig:
    def test_load(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[pipeline]\niterations = 1\nlambda = 0.5\nprune = no\n"
                     "[shape_context]\nangular_bins = 8\nrotation_invariant = true\n")
        cfg = load_config(str(p))
        assert cfg.iterations == 1 and cfg.lambda_scale == 0.5 and cfg.prune is False
        assert cfg.sc_params.angular_bins == 8 and cfg.sc_params.rotation_invariant

    def test_readme_example(self, tmp_path):
        readme = open(__file__.replace("tests/test_cli.py", "README.md")).read()
        block = readme.split("```\n[pipeline]")[1].split("```")[0]
        p = tmp_path / "c.ini"
        p.write_text("[pipeline]" + block)
        cfg = load_config(str(p))
        assert cfg.otsu_bins == 64 and cfg.max_points == 2000 and cfg.tps_sample_count == 100

    @pytest.mark.parametrize("text", ["[pipeline]\nbogus = 1\n", "[other]\nx = 1\n",
                                      "[pipeline]\niterations = many\n",
                                      "[shape_context]\nradial_bins = 1\n"])
    def test_rejects(self, tmp_path, text):
        p = tmp_path / "c.ini"
        p.write_text(text)
        with pytest.raises(UsageError):
            load_config(str(p))

    def test_flag_overrides_config(self, capsys, files, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[pipeline]\niterations = 2\n")
        a = files("a.csv", generate_shape("circle", 20))
        _, out, _ = run(capsys, "match", a, a, "--config", p)
        assert json.loads(out)["iterations"] == 2
        _, out, _ = run(capsys, "match", a, a, "--config", p, "--iterations", 0)
        assert json.loads(out)["iterations"] == 0

    def test_bad_config_exit(self, capsys, files, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[pipeline]\nbogus = 1\n")
        a = files("a.csv", generate_shape("circle", 20))
        assert run(capsys, "match", a, a, "--config", p)[0] == 1


def test_console_script(files):
    a = files("a.csv", generate_shape("circle", 20))
    res = subprocess.run([sys.executable, "-m", "bscmatch.cli", "correspond", a, a],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["score"] == 0
