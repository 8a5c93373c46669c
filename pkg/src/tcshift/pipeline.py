"""End-to-end orchestration: validate -> beta_c -> pair state -> coefficients
-> ground energy -> shift table -> identity checks, plus sweeps and
serialization.

Everything here is deterministic: identical configurations produce
byte-identical result files, timestamps live only in the manifest file, and
sweep caching reuses a stage exactly when the fields it depends on are
unchanged.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .birman_schwinger import BsSolver
from .checks import Artifacts, CheckResult, run_identity_checks
from .errors import AssumptionViolation, ConfigError
from .gl import compute_lambdas, compute_t
from .model import (
    ExternalField,
    Numerics,
    PhysicalModel,
    load_config,
    model_from_dict,
    validate_assumptions,
)
from .schrodinger import EffectiveProblem, TcShiftReport, compute_dc, ground_energy, tc_of_h

__all__ = [
    "Pipeline",
    "ResultBundle",
    "RunManifest",
    "run_pipeline",
    "sweep",
    "emit",
    "config_digest",
    "SWEEP_AXES",
]

SWEEP_AXES = ("h", "mu", "v_amplitude", "w_amplitude")


def config_digest(cfg: dict) -> str:
    """Order-independent digest of a parsed configuration mapping."""
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class RunManifest:
    config_digest: str
    tool_version: str
    started_at: str
    finished_at: str
    grids: dict
    tolerances: dict
    cache_hits: int = 0

    def without_timestamps(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("started_at")
        d.pop("finished_at")
        return d


@dataclass
class ResultBundle:
    manifest: RunManifest
    validation: list
    tc: dict | None = None
    gl: dict | None = None
    ground_state: dict | None = None
    shift: dict | None = None
    checks: list = field(default_factory=list)

    @property
    def all_checks_passed(self) -> bool:
        return all(c["passed"] for c in self.checks)


class Pipeline:
    """Lazily evaluated pipeline over one model; stages cache their results.

    ``with_field`` and ``with_h_values`` derive cheap variants that reuse
    every stage not invalidated by the change (the external field enters
    only downstream of the coefficients; h only in the final table).
    """

    def __init__(self, model: PhysicalModel, numerics: Numerics, cfg: dict | None = None):
        self.model = model
        self.numerics = numerics
        self.cfg = cfg if cfg is not None else {}
        self._cache: dict = {}
        self.cache_hits = 0

    def _memo(self, key, builder):
        if key in self._cache:
            self.cache_hits += 1
            return self._cache[key]
        value = builder()
        self._cache[key] = value
        return value

    def with_field(self, W: ExternalField) -> "Pipeline":
        clone = Pipeline(
            dataclasses.replace(self.model, W=W), self.numerics, self.cfg
        )
        shared = {
            k: v
            for k, v in self._cache.items()
            if k in ("grids", "solver", "tc", "pair_top", "t_profile", "gl")
        }
        clone._cache.update(shared)
        clone.cache_hits = len(shared)
        return clone

    def with_h_values(self, h_values) -> "Pipeline":
        clone = Pipeline(
            dataclasses.replace(self.model, h_values=tuple(h_values)), self.numerics, self.cfg
        )
        shared = {k: v for k, v in self._cache.items() if k != "shift"}
        clone._cache.update(shared)
        clone.cache_hits = len(shared)
        return clone

    # --- stages -------------------------------------------------------------

    def validation(self):
        return self._memo("validation", lambda: validate_assumptions(self.model, self.numerics))

    def require_assumptions(self):
        report = self.validation()
        if not report.passed:
            failed = [i.name for i in report.items if not i.passed]
            raise AssumptionViolation(f"model validation failed: {', '.join(failed)}")
        return report

    def grids(self):
        return self._memo("grids", lambda: self.numerics.build_grids(self.model))

    def solver(self) -> BsSolver:
        return self._memo("solver", lambda: BsSolver(self.model, *self.grids()))

    def tc(self):
        self.require_assumptions()
        return self._memo(
            "tc",
            lambda: self.solver().solve_beta_c(
                self.numerics.beta_bracket, self.numerics.beta_c_rel_tol
            ),
        )

    def pair_top(self):
        return self._memo(
            "pair_top", lambda: self.solver().extract_pair_state(self.tc(), self.numerics.gap_tol)
        )

    def t_profile(self):
        return self._memo(
            "t_profile",
            lambda: compute_t(self.pair_top()[0], self.tc(), self.model, self.grids()[1]),
        )

    def gl(self):
        return self._memo(
            "gl",
            lambda: compute_lambdas(
                self.t_profile(), self.tc(), self.model.mu, self.pair_top()[1].gap
            ),
        )

    def ground_state(self):
        def build():
            problem = EffectiveProblem.from_gl(
                self.gl(),
                self.model.W,
                domain_radius=self.numerics.domain_radius,
                n_points=self.numerics.n_points,
            )
            return ground_energy(problem)

        return self._memo("ground_state", build)

    def dc(self) -> float:
        return self._memo("dc", lambda: compute_dc(self.gl(), self.ground_state()))

    def shift(self) -> TcShiftReport:
        return self._memo("shift", lambda: tc_of_h(self.gl(), self.dc(), self.model.h_values))

    def checks(self) -> list[CheckResult]:
        def build():
            rgrid, pgrid = self.grids()
            arts = Artifacts(
                model=self.model,
                numerics=self.numerics,
                rgrid=rgrid,
                pgrid=pgrid,
                tc=self.tc(),
                pair=self.pair_top()[0],
                top=self.pair_top()[1],
                t_profile=self.t_profile(),
                gl=self.gl(),
            )
            return run_identity_checks(arts)

        return self._memo("checks", build)

    # --- bundling -------------------------------------------------------------

    def bundle(self, upto: str = "shift") -> ResultBundle:
        """Run the minimal stage prefix for the requested verb and package it."""
        order = ("validate", "tc", "gl", "dc", "shift", "verify")
        if upto not in order:
            raise ConfigError(f"unknown pipeline stage {upto!r}")
        started = datetime.now(timezone.utc).isoformat()
        stage = order.index(upto)

        validation = self.validation()
        tc_d = gl_d = gs_d = shift_d = None
        checks: list[CheckResult] = []
        if stage >= 1:
            tcrit = self.tc()
            tc_d = {
                "beta_c": tcrit.beta_c,
                "T_c": tcrit.T_c,
                "bracket": list(tcrit.bracket),
                "tolerance": tcrit.tolerance,
            }
        if stage >= 2:
            gl = self.gl()
            gl_d = {
                "beta_c": gl.beta_c,
                "T_c": gl.T_c,
                "lambda0": gl.lambda0,
                "lambda1": gl.lambda1,
                "lambda2": gl.lambda2,
                "gap": gl.gap,
            }
        if stage >= 3:
            gs = self.ground_state()
            gs_d = {
                "e0": gs.e0,
                "bound_state": gs.bound_state,
                "refinement_delta": gs.refinement_delta,
                "essential_bottom": gs.essential_bottom,
                "D_c": self.dc(),
            }
        if stage >= 4:
            rep = self.shift()
            shift_d = {
                "D_c": rep.D_c,
                "T_c": rep.T_c,
                "rows": [[h, t] for h, t in rep.rows],
                "warnings": list(rep.warnings),
            }
        if stage >= 5:
            checks = self.checks()

        rgrid, pgrid = self.grids() if stage >= 1 else (None, None)
        finished = datetime.now(timezone.utc).isoformat()
        manifest = RunManifest(
            config_digest=config_digest(self.cfg),
            tool_version=__version__,
            started_at=started,
            finished_at=finished,
            grids=(
                {
                    "n_r": len(rgrid),
                    "n_p": len(pgrid),
                    "r_max": rgrid.r_max,
                    "p_max": pgrid.r_max,
                }
                if rgrid is not None
                else {}
            ),
            tolerances={
                "beta_c_rel": self.numerics.beta_c_rel_tol,
                "gap_tol": self.numerics.gap_tol,
            },
            cache_hits=self.cache_hits,
        )
        return ResultBundle(
            manifest=manifest,
            validation=[dataclasses.asdict(i) for i in validation.items],
            tc=tc_d,
            gl=gl_d,
            ground_state=gs_d,
            shift=shift_d,
            checks=[dataclasses.asdict(c) for c in checks],
        )


def run_pipeline(config_path, upto: str = "verify") -> ResultBundle:
    model, numerics = load_config(config_path)
    with open(config_path) as fh:
        cfg = json.load(fh)
    return Pipeline(model, numerics, cfg).bundle(upto)


def _sweep_config(cfg: dict, axis: str, value: float) -> dict:
    new = json.loads(json.dumps(cfg))
    if axis == "h":
        new["h_values"] = [value]
    elif axis == "mu":
        new["mu"] = value
    elif axis == "v_amplitude":
        new["V"]["amplitude"] = value
    elif axis == "w_amplitude":
        new["W"]["amplitude"] = value
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose one of {SWEEP_AXES}")
    return new


def sweep(cfg: dict, axis: str, values, threads: int = 1) -> list[dict]:
    """One row per axis value; per-point failures land in the error column.

    beta_c, the pair state and the coefficients are recomputed only when the
    fields they depend on change: never for h sweeps, never for w_amplitude
    sweeps, always for mu and v_amplitude sweeps.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose one of {SWEEP_AXES}")
    values = [float(v) for v in values]
    for v in values:
        if not math.isfinite(v):
            raise ConfigError("sweep values must be finite")

    base_model, base_numerics = model_from_dict(cfg)
    base = Pipeline(base_model, base_numerics, cfg)

    def make_point(value: float) -> Pipeline:
        point_cfg = _sweep_config(cfg, axis, value)
        if axis == "h":
            return base.with_h_values([value])
        if axis == "w_amplitude":
            return base.with_field(dataclasses.replace(base_model.W, amplitude=value))
        model, numerics = model_from_dict(point_cfg)
        return Pipeline(model, numerics, point_cfg)

    def run_point(value: float) -> dict:
        # stages fill incrementally, so a late failure keeps earlier columns
        row = dict.fromkeys(SWEEP_COLUMNS, math.nan)
        row.update(value=value, error="")
        try:
            p = make_point(value)
            gl = p.gl()
            row.update(
                beta_c=gl.beta_c,
                T_c=gl.T_c,
                lambda0=gl.lambda0,
                lambda1=gl.lambda1,
                lambda2=gl.lambda2,
            )
            row["e0"] = p.ground_state().e0
            rep = p.shift()
            row["D_c"] = rep.D_c
            row["T_c_shifted"] = rep.rows[0][1] if rep.rows else math.nan
        except Exception as exc:  # per-point failure: record, keep sweeping
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    if axis in ("h", "w_amplitude"):
        # warm the shared stages once so clones reuse them
        base.gl()

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run_point, values))
    else:
        rows = [run_point(v) for v in values]
    return rows


SWEEP_COLUMNS = (
    "value",
    "beta_c",
    "T_c",
    "lambda0",
    "lambda1",
    "lambda2",
    "e0",
    "D_c",
    "T_c_shifted",
    "error",
)


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(c) for c in row))
    path.write_text("\n".join(lines) + "\n")


def emit(bundle: ResultBundle, out_dir, fmt: str = "all") -> list[Path]:
    """Write result.json / CSV tables / manifest.json; returns written paths.

    fmt selects "json" (nested bundle only), "csv" (flat tables only) or
    "all".  result.json carries no timestamps, so identical configurations
    produce byte-identical files; wall-clock data lives only in
    manifest.json.
    """
    if fmt not in ("json", "csv", "all"):
        raise ConfigError(f"unknown output format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    if fmt in ("json", "all"):
        result = {
            "manifest": bundle.manifest.without_timestamps(),
            "validation": bundle.validation,
            "tc": bundle.tc,
            "gl": bundle.gl,
            "ground_state": bundle.ground_state,
            "shift": bundle.shift,
            "checks": bundle.checks,
        }
        p = out / "result.json"
        p.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
        written.append(p)

    p = out / "manifest.json"
    p.write_text(json.dumps(dataclasses.asdict(bundle.manifest), indent=2, sort_keys=True) + "\n")
    written.append(p)

    if fmt in ("csv", "all"):
        if bundle.shift is not None:
            p = out / "tc_shift.csv"
            _write_csv(p, ("h", "T_c_shifted"), bundle.shift["rows"])
            written.append(p)
        if bundle.checks:
            p = out / "checks.csv"
            _write_csv(
                p,
                ("id", "measured", "expected", "tolerance", "passed"),
                [
                    (c["id"], c["measured"], c["expected"], c["tolerance"], c["passed"])
                    for c in bundle.checks
                ],
            )
            written.append(p)
        if bundle.gl is not None:
            p = out / "gl.csv"
            dc_val = bundle.ground_state["D_c"] if bundle.ground_state else math.nan
            _write_csv(
                p,
                ("beta_c", "T_c", "lambda0", "lambda1", "lambda2", "D_c"),
                [
                    (
                        bundle.gl["beta_c"],
                        bundle.gl["T_c"],
                        bundle.gl["lambda0"],
                        bundle.gl["lambda1"],
                        bundle.gl["lambda2"],
                        dc_val,
                    )
                ],
            )
            written.append(p)
    return written
