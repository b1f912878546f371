import json
import subprocess
import sys

import pytest

from siegelmod.cli import main, parse_config
from siegelmod.errors import ValidationError

MAASS_JOB = "diag = 1, 1, 1, 1, -1\n"


def run(tmp_path, text, *extra, name="job.cfg", out="out"):
    cfg = tmp_path / name
    cfg.write_text(text)
    code = main(["run", "--config", str(cfg), "--out", str(tmp_path / out), *extra])
    report = json.loads((tmp_path / out / "report.json").read_text())
    return code, report


def test_analyze(tmp_path):
    code, report = run(tmp_path, "task = analyze  # invariants only\n" + MAASS_JOB)
    res = report["results"]
    assert code == 0 and report["schema"] == "siegelmod.report/1"
    assert (res["D"], res["N"], res["p"], res["K"]) == (-32, 4, 4, "Q")
    assert res["signature"] == [4, 1]
    assert (tmp_path / "out" / "meta.json").exists()


def test_gram_block(tmp_path):
    text = "task = analyze\ngram2 = begin\n2 1 0\n1 2 0\n# comment\n0 0 -2\nend\n"
    code, report = run(tmp_path, text)
    assert code == 0 and report["results"]["m"] == 3


def test_stark_check_passes(tmp_path):
    code, report = run(tmp_path, "task = stark-check\nmoduli = 3\n" + MAASS_JOB)
    assert code == 0 and report["passed"]
    assert report["results"]["cases"] == 2


def test_malformed_gram_is_rejected(tmp_path):
    text = "task = analyze\ngram2 = begin\n2 1\n0 2\nend\n"
    code, report = run(tmp_path, text)
    assert code == 1
    assert report["error"]["type"] == "NotSymmetric"


def test_failed_check_exit_code(tmp_path):
    code, report = run(tmp_path, "task = stark-check\nmoduli = 3\nstark_tol = 0\n" + MAASS_JOB)
    assert code == 3 and not report["passed"]


@pytest.mark.parametrize(
    "text",
    [
        "task = analyze\nbogus = 1\n" + MAASS_JOB,
        "task = analyze\ngram2 = begin\n2 0\n0 2\n",
        "task = nothing\n" + MAASS_JOB,
        "task = analyze\n",
        "task = analyze\nn_max = many\n" + MAASS_JOB,
    ],
)
def test_parse_errors(text):
    with pytest.raises(ValidationError):
        parse_config(text)


def test_report_is_reproducible(tmp_path):
    text = "task = densities\nn_max = 3\nprime_bound = 5\nk_max = 4\n" + MAASS_JOB
    run(tmp_path, text, "--seed", "7", out="a")
    run(tmp_path, text, "--seed", "7", out="b")
    for name in ("report.json", "densities.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "densities.csv").read_text().startswith("# siegelmod.csv/1\n")


def test_cache_admin(tmp_path, capsys):
    cache = tmp_path / "cache"
    assert main(["cache", "stats", "--cache", str(cache)]) == 0
    assert json.loads(capsys.readouterr().out)["records"] == 0
    text = "task = densities\nn_max = 3\nprime_bound = 5\nk_max = 4\n" + MAASS_JOB
    run(tmp_path, text, "--cache", str(cache))
    capsys.readouterr()
    assert main(["cache", "stats", "--cache", str(cache)]) == 0
    records = json.loads(capsys.readouterr().out)["records"]
    assert records > 0

    log = next(p for p in cache.iterdir() if not p.name.endswith(".lock"))
    data = bytearray(log.read_bytes())
    second = data.index(b"\n") + 1
    data[second + 5] ^= 0x01
    log.write_bytes(bytes(data))
    assert main(["cache", "verify", "--cache", str(cache)]) == 3
    assert json.loads(capsys.readouterr().out) == {"bad_offsets": [second], "ok": False}

    assert main(["cache", "clear", "--cache", str(cache)]) == 0
    capsys.readouterr()
    assert main(["cache", "verify", "--cache", str(cache)]) == 0


def test_warm_cache_hits(tmp_path):
    cache = str(tmp_path / "cache")
    text = "task = densities\nn_max = 3\nprime_bound = 5\nk_max = 4\n" + MAASS_JOB
    run(tmp_path, text, "--cache", cache, out="cold")
    run(tmp_path, text, "--cache", cache, out="warm")
    meta = json.loads((tmp_path / "warm" / "meta.json").read_text())
    assert meta["cache"]["misses"] == 0 and meta["cache"]["hits"] > 0


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "job.cfg"
    cfg.write_text("task = analyze\n" + MAASS_JOB)
    proc = subprocess.run(
        [sys.executable, "-m", "siegelmod", "--config", str(cfg), "--out", str(tmp_path / "o")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
