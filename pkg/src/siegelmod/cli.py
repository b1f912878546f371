"""Command-line driver: read a job file, run one pipeline stage, write reports.

Job files are flat ``key = value`` text.  The Gram matrix ``2Y`` is given
either as a block::

    gram2 = begin
    2 1 0
    1 2 0
    0 0 -2
    end

or as ``diag = 1, 1, 1, 1, -1`` (entries of ``Y``).  Lines starting with ``#``
are comments.  ``report.json`` holds the results and is deterministic;
timings and the environment stamp go to ``meta.json``.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .bruhat import stark_defect
from .cache import DensityCache
from .characters import enumerate_characters, primes_up_to
from .errors import BudgetExceeded, CorruptRecord, SiegelModError, ValidationError
from .forms import (
    build_dual,
    build_holomorphic,
    build_maass,
    fit_constants,
    fit_dual,
    fricke_defect,
    fricke_points,
    modularity_report,
    modularity_samples,
)
from .localdensity import DEFAULT_BUDGET, local_density, measure_table
from .quadform import QuadraticForm, validate
from .series import fe_defect, fit_fe_constants, holomorphic_series, t0_invariance_defect, twisted_series

SCHEMA = "siegelmod.report/1"
CSV_SCHEMA = "siegelmod.csv/1"
TASKS = ("analyze", "densities", "measures", "build", "verify", "fe-check", "stark-check")

EXIT_OK, EXIT_VALIDATION, EXIT_BUDGET, EXIT_FAILED, EXIT_ERROR = 0, 1, 2, 3, 4

# key -> (parser, default)
_INT, _FLOAT = int, float


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {text!r}")


PARAMS: dict[str, tuple[Callable[[str], Any], Any]] = {
    "task": (str, None),
    "n_max": (_INT, 20),
    "prime_bound": (_INT, 50),
    "k_max": (_INT, 12),
    "hensel_above": (_INT, None),
    "budget": (_INT, DEFAULT_BUDGET),
    "sign": (_INT, 1),
    "kind": (str, "auto"),
    "ell": (_INT, None),
    "y_min": (_FLOAT, 0.2),
    "n_gamma": (_INT, 6),
    "per_gamma": (_INT, 8),
    "fricke_points": (_INT, 10),
    "trend_bound": (_INT, 10),
    "tolerance": (_FLOAT, None),
    "stability_tol": (_FLOAT, 1e-3),
    "moduli": (_ints, [3, 5, 7]),
    "stark_tol": (_FLOAT, 1e-10),
    "s_imag": (_floats, [0.5, 1.0, 2.0, 3.0, 4.0]),
    "t0": (_floats, [1.0, 1.5]),
    "fe_tol": (_FLOAT, 1e-5),
    "twist_tol": (_FLOAT, 1e-4),
    "csv": (_bool, True),
}

KIND_TOLERANCE = {"holomorphic": 5e-2, "maass": 1e-1}


@dataclass
class JobConfig:
    form: QuadraticForm
    task: str
    params: dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.params[key]

    def echo(self) -> dict:
        out = {k: v for k, v in sorted(self.params.items()) if v is not None}
        out["task"] = self.task
        out["gram2"] = [list(row) for row in self.form.gram2]
        return out


def parse_config(text: str) -> JobConfig:
    raw: dict[str, str] = {}
    rows: list[list[int]] | None = None
    diag = None
    lines = iter(text.splitlines())
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        if key == "gram2":
            if value != "begin":
                raise ValidationError("gram2 must be followed by a begin ... end block")
            rows = []
            for row in lines:
                row = row.split("#", 1)[0].strip()
                if row == "end":
                    break
                if row:
                    rows.append(_ints(row))
            else:
                raise ValidationError("gram2 block is missing 'end'")
        elif key == "diag":
            diag = _ints(value)
        elif key in PARAMS:
            raw[key] = value
        else:
            raise ValidationError(f"unknown key {key!r}")
    if (rows is None) == (diag is None):
        raise ValidationError("give exactly one of a gram2 block or diag")
    form = QuadraticForm(rows) if rows is not None else QuadraticForm.diagonal(*diag)
    task = raw.pop("task", None)
    if task not in TASKS:
        raise ValidationError(f"task must be one of {', '.join(TASKS)}")
    params = {key: default for key, (_, default) in PARAMS.items() if key != "task"}
    for key, value in raw.items():
        try:
            params[key] = PARAMS[key][0](value)
        except ValueError as exc:
            raise ValidationError(f"bad value for {key}: {value!r}") from exc
    if params["n_max"] < 1 or params["prime_bound"] < 2 or params["k_max"] < 1:
        raise ValidationError("n_max, prime_bound and k_max must be positive (prime_bound >= 2)")
    if params["sign"] not in (1, -1):
        raise ValidationError("sign must be 1 or -1")
    return JobConfig(form, task, params)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


@dataclass
class Outcome:
    results: dict = field(default_factory=dict)
    checks: list[dict] = field(default_factory=list)
    tables: dict[str, tuple[list[str], list[list]]] = field(default_factory=dict)

    def check(self, name: str, value: float, threshold: float, passed: bool | None = None) -> None:
        ok = value < threshold if passed is None else passed
        self.checks.append({"name": name, "value": float(value), "threshold": threshold, "passed": bool(ok)})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)


class Runner:
    def __init__(self, config: JobConfig, cache: DensityCache | None, threads: int, seed: int):
        self.config = config
        self.form = config.form
        self.profile = validate(config.form)
        self.cache = cache
        self.threads = threads
        self.seed = seed

    def measures(self, form: QuadraticForm, sign: int, prime_bound: int | None = None):
        c = self.config
        return measure_table(
            form, sign, c["n_max"], prime_bound or c["prime_bound"], c["k_max"],
            cache=self.cache, threads=self.threads, budget=c["budget"], hensel_above=c["hensel_above"],
        )

    def kind(self) -> str:
        kind = self.config["kind"]
        if kind == "auto":
            return "holomorphic" if self.form.m % 2 == 0 and self.profile.p % 2 == 0 else "maass"
        if kind not in KIND_TOLERANCE:
            raise ValidationError("kind must be auto, holomorphic or maass")
        return kind

    def ell(self) -> int:
        ell = self.config["ell"]
        return 2 * self.profile.p - self.form.m if ell is None else ell

    def analyze(self) -> Outcome:
        pr = self.profile
        return Outcome(results={
            "m": pr.m, "D": pr.D, "N": pr.N, "p": pr.p, "signature": list(pr.signature),
            "K_disc": pr.K_disc, "K_N_disc": pr.K_N_disc,
            "K": "Q" if pr.K_disc is None else f"Q(sqrt({pr.K_disc}))",
            "K_N": "Q" if pr.K_N_disc is None else f"Q(sqrt({pr.K_N_disc}))",
            "dual_gram2": [list(r) for r in pr.dual.gram2],
        })

    def densities(self) -> Outcome:
        c = self.config
        counter = self.cache.counter(self.form, c["budget"]) if self.cache else None
        rows = []
        for n in range(1, c["n_max"] + 1):
            for p in primes_up_to(c["prime_bound"]):
                rec = local_density(self.form, c["sign"] * n, p, c["k_max"], budget=c["budget"], counter=counter)
                rows.append([c["sign"] * n, p, rec.k, rec.count, str(rec.alpha)])
        if self.cache:
            self.cache.flush()
        out = Outcome(results={"records": len(rows)})
        out.tables["densities"] = (["n", "p", "k", "count", "alpha"], rows)
        return out

    def measures_task(self) -> Outcome:
        table = self.measures(self.form, self.config["sign"])
        rows = [[e.n, e.value] for e in table.entries.values()]
        out = Outcome(results={"sign": table.sign, "prime_bound": table.prime_bound, "measures": [r[1] for r in rows]})
        out.tables["measures"] = (["n", "measure"], rows)
        return out

    def _build(self, prime_bound: int | None = None):
        c, kind = self.config, self.kind()
        plus = self.measures(self.form, 1, prime_bound)
        dual_plus = self.measures(self.profile.dual, 1, prime_bound)
        if kind == "holomorphic":
            F = build_holomorphic(self.form, plus, c["n_max"], y_min=c["y_min"])
            G = build_dual(self.form, "holomorphic", dual_plus, n_max=c["n_max"], y_min=c["y_min"])
        else:
            minus = self.measures(self.form, -1, prime_bound)
            dual_minus = self.measures(self.profile.dual, -1, prime_bound)
            F = build_maass(self.form, self.ell(), plus, minus, c["n_max"], y_min=c["y_min"])
            G = build_dual(self.form, "maass", dual_plus, dual_minus, c["n_max"], self.ell(), y_min=c["y_min"])
        return F, G

    def build(self) -> Outcome:
        F, G = self._build()
        out = Outcome(results={
            "kind": F.kind, "ell": F.ell, "N": F.N, "eigenvalue": F.eigenvalue,
            "character": F.character.disc, "dual_character": G.character.disc,
        })
        rows = [[n, "F", F.pos[n - 1], F.neg[n - 1] if len(F.neg) else 0j] for n in range(1, F.n_max + 1)]
        rows += [[n, "G", G.pos[n - 1], G.neg[n - 1] if len(G.neg) else 0j] for n in range(1, G.n_max + 1)]
        out.tables["coefficients"] = (
            ["n", "expansion", "pos_re", "pos_im", "neg_re", "neg_im"],
            [[n, e, p.real, p.imag, q.real, q.imag] for n, e, p, q in rows],
        )
        return out

    def _fit(self, F, samples):
        unknowns = ("growth",) if F.kind == "holomorphic" else ("growth", "decay", "neg_scale")
        return fit_constants(F, samples, unknowns)

    def verify(self) -> Outcome:
        c = self.config
        F, G = self._build()
        tol = c["tolerance"] or KIND_TOLERANCE[F.kind]
        samples = modularity_samples(F.N, c["y_min"], 2 * c["n_gamma"], c["per_gamma"], self.seed)
        fit_set, test_set = samples[0::2], samples[1::2]
        fit = self._fit(F, fit_set)
        report = modularity_report(fit.expansion, test_set, fit)
        other = self._fit(F, test_set)
        drift = max(
            abs(fit.values[k] - other.values[k]) / max(abs(fit.values[k]), 1e-300) for k in fit.values
        )
        perturbed = self._fit(F.perturbed(1), fit_set)
        ratio = perturbed.residual / max(fit.residual, 1e-300)
        out = Outcome(results={
            "kind": F.kind, "samples": len(test_set), "fitted": fit.values, "fit_residual": fit.residual,
            "median_defect": report.median, "max_defect": float(report.defects.max()),
            "tail_estimate": report.tail, "refit_drift": drift, "sensitivity_ratio": ratio,
        })
        out.check("modularity_median", report.median, tol)
        out.check("constant_stability", drift, c["stability_tol"])
        out.check("perturbation_sensitivity", ratio, 10.0, passed=ratio >= 10)
        if c["trend_bound"] and c["trend_bound"] < c["prime_bound"]:
            F_low, _ = self._build(c["trend_bound"])
            low = modularity_report(self._fit(F_low, fit_set).expansion, test_set).median
            out.results["median_defect_trend_bound"] = low
            out.check("convergence_trend", report.median, low, passed=report.median < low)
        n_test = c["fricke_points"]
        pts = fricke_points(F.N, c["y_min"], n_test + 16, self.seed)
        dual = fit_dual(fit.expansion, G, pts[n_test:], fit_neg_scale=F.kind == "maass")
        fricke = [fricke_defect(fit.expansion, dual.expansion, z) for z in pts[:n_test]]
        out.results["dual_fitted"] = dual.values
        out.results["fricke_defects"] = fricke
        out.check("fricke_max", max(fricke), tol)
        out.tables["defects"] = (
            ["sample", "a", "b", "c", "d", "z_re", "z_im", "defect"],
            [[i, g.a, g.b, g.c, g.d, z.real, z.imag, d] for i, (g, z, d) in enumerate(report.samples)],
        )
        return out

    def fe_check(self) -> Outcome:
        c = self.config
        plus = self.measures(self.form, 1)
        dual_plus = self.measures(self.profile.dual, 1)
        series = holomorphic_series(self.form, plus, dual_plus)
        k = series.k
        fit_points = [k / 2 + 1 + 1j, k / 2 - 1 + 2j, k / 2 + 0.5 + 3j, k / 2 - 0.7 - 1j, k / 2 + 0.3 + 5j, k / 2 - 0.4 + 0.2j]
        fit = fit_fe_constants(series, fit_points)
        S = series.scaled_dual(fit.beta).with_constants(fit.a0, fit.b0)
        line = [k / 2 + 1j * t for t in c["s_imag"]]
        inv = [t0_invariance_defect(S, s, tuple(c["t0"])) for s in line]
        fe = [fe_defect(S, s) for s in line]
        out = Outcome(results={"beta": fit.beta, "a0": fit.a0, "b0": fit.b0, "fit_residual": fit.residual,
                               "t0_invariance": inv, "fe_defect": fe})
        out.check("t0_invariance_max", max(inv), c["fe_tol"])
        out.check("fe_defect_max", max(fe), c["fe_tol"])
        perturbed = S.perturbed(1)
        sens = max(fe_defect(perturbed, s) for s in line)
        out.results["perturbed_fe_defect"] = sens
        out.check("perturbation_sensitivity", sens, 1e-2, passed=sens > 1e-2)
        rows = []
        for r in c["moduli"]:
            if self.profile.N % r == 0:
                continue
            for psi in enumerate_characters(r)[1:]:
                tw = twisted_series(S, self.form, psi)
                for s in line:
                    rows.append([r, psi.index, s.real, s.imag, fe_defect(tw, s)])
        if rows:
            worst = max(row[-1] for row in rows)
            out.results["twisted_max_defect"] = worst
            out.check("twisted_fe_max", worst, c["twist_tol"])
        out.tables["fe"] = (["r", "psi", "s_re", "s_im", "defect"], rows)
        return out

    def stark_check(self) -> Outcome:
        c = self.config
        rows = []
        for r in c["moduli"]:
            if self.profile.N % r == 0:
                continue
            for psi in enumerate_characters(r):
                rows.append([r, psi.index, stark_defect(self.form, psi)])
        out = Outcome(results={"cases": len(rows)})
        if rows:
            out.check("stark_max", max(row[2] for row in rows), c["stark_tol"])
        out.tables["stark"] = (["r", "psi", "defect"], rows)
        return out

    def run(self) -> Outcome:
        return {
            "analyze": self.analyze,
            "densities": self.densities,
            "measures": self.measures_task,
            "build": self.build,
            "verify": self.verify,
            "fe-check": self.fe_check,
            "stark-check": self.stark_check,
        }[self.config.task]()


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"# {CSV_SCHEMA}"])
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _environment() -> dict:
    import mpmath
    import scipy

    return {
        "siegelmod": __version__, "python": platform.python_version(), "numpy": np.__version__,
        "scipy": scipy.__version__, "mpmath": mpmath.__version__, "platform": platform.platform(),
    }


def run_job(config_path: str, out_dir: str, cache_dir: str | None = None, threads: int = 1, seed: int = 0) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    payload: dict = {"schema": SCHEMA, "seed": seed}
    try:
        config = parse_config(Path(config_path).read_text())
        payload["config"] = config.echo()
        cache = DensityCache(cache_dir) if cache_dir else None
        outcome = Runner(config, cache, threads, seed).run()
    except (ValidationError, OSError) as exc:
        return _fail(out, payload, exc, EXIT_VALIDATION, started)
    except BudgetExceeded as exc:
        return _fail(out, payload, exc, EXIT_BUDGET, started)
    except SiegelModError as exc:
        return _fail(out, payload, exc, EXIT_ERROR, started)
    payload.update(task=config.task, results=outcome.results, checks=outcome.checks, passed=outcome.passed)
    _write_json(out / "report.json", payload)
    if config["csv"]:
        for name, (header, rows) in outcome.tables.items():
            _write_csv(out / f"{name}.csv", header, rows)
    meta = {"environment": _environment(), "elapsed_s": time.time() - started, "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z")}
    if cache is not None:
        meta["cache"] = {"hits": cache.hits, "misses": cache.misses}
    _write_json(out / "meta.json", meta)
    for chk in outcome.checks:
        print(f"{'PASS' if chk['passed'] else 'FAIL'} {chk['name']}: {chk['value']:.3g} (threshold {chk['threshold']:.3g})")
    return EXIT_OK if outcome.passed else EXIT_FAILED


def _fail(out: Path, payload: dict, exc: Exception, code: int, started: float) -> int:
    payload.update(error={"type": type(exc).__name__, "message": str(exc)}, passed=False)
    _write_json(out / "report.json", payload)
    _write_json(out / "meta.json", {"environment": _environment(), "elapsed_s": time.time() - started})
    print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code


def cache_admin(command: str, cache_dir: str) -> int:
    cache = DensityCache(cache_dir)
    if command == "stats":
        print(json.dumps(cache.stats(), indent=2, sort_keys=True))
        return EXIT_OK
    if command == "clear":
        cache.clear()
        print("cleared")
        return EXIT_OK
    try:
        cache.check()
    except CorruptRecord as exc:
        print(json.dumps({"ok": False, "bad_offsets": list(exc.offsets)}, sort_keys=True))
        return EXIT_FAILED
    print(json.dumps({"ok": True, "records": cache.verify().records}, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="siegelmod", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a job file")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default="out")
    run.add_argument("--cache", default=None)
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--seed", type=int, default=0)
    adm = sub.add_parser("cache", help="inspect or clear a density cache")
    adm.add_argument("action", choices=("stats", "verify", "clear"))
    adm.add_argument("--cache", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0].startswith("--") and argv[0] not in ("--help", "--version"):
        argv.insert(0, "run")
    args = build_parser().parse_args(argv)
    if args.command == "cache":
        return cache_admin(args.action, args.cache)
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_VALIDATION
    return run_job(args.config, args.out, args.cache, args.threads, args.seed)
