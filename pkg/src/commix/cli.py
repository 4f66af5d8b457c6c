"""Batch scenario runner.

Reads a versioned JSON config describing model scenarios, executes the
requested tasks, and writes a deterministic ``report.json`` (scenarios sorted
by name, floats in shortest round-trip form, no timestamps) next to the
per-scenario artifact files.  Wall-clock data goes to a separate
``report.meta.json`` so that reruns of the same config and seed are
byte-identical.  Exit codes: 0 all tasks pass (warnings tolerated unless
--strict), 1 any failure, 2 usage or config errors.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import json
import pathlib
import re
import sys
import time

import numpy as np

from . import __version__
from .commutators import (
    OperatorPair,
    SmoothWindow,
    birkhoff_discrete,
    degree_alternative,
    degree_identity_check,
    estimate_degree,
    flow_identity_check,
    unitary_symbol,
)
from .errors import SchemaError
from .graphs import (
    alternating_cycle4,
    build_operators,
    check_admissible,
    graph_degree,
    grid2d_window,
    interior_residuals,
    line_window,
    parse_graph_window,
)
from .mixing import (
    DecayReport,
    FourierCalculus,
    SummabilityReport,
    correlation_continuous,
    correlation_discrete,
)
from .operators import matrix_from_payload, spectral_norm
from .skew import (
    GridField,
    SU2Cocycle,
    TorusCocycle,
    TorusFlow,
    sector_correlation,
    sector_matrix,
    shift_weyl_model,
    su2_degree_field,
    su2_irrep,
    torus_degree_field,
)

REPORT_FORMAT = "run-report"
REPORT_VERSION = 1
CONFIG_VERSION = 1

TASK_NAMES = ("identities", "degree", "mixing", "summability", "fourier", "admissibility")

MODEL_FAMILY = {
    "random-pair": "pair",
    "matrix-pair": "pair",
    "shift": "pair",
    "torus": "torus",
    "su2": "su2",
    "graph-line": "graph",
    "graph-grid2d": "graph",
    "graph-cycle4-alt": "graph",
    "graph-file": "graph",
}

FAMILY_TASKS = {
    "pair": {"identities", "degree", "mixing", "summability", "fourier"},
    "torus": {"identities", "degree", "mixing", "summability", "fourier"},
    "su2": {"identities", "degree"},
    "graph": {"identities", "degree", "admissibility"},
}

# every cutoff that feeds a status flag, overridable per scenario
DEFAULT_THRESHOLDS = {
    "identity_residual": 1e-9,
    "alternative_agreement": 1e-10,
    "flow_residual_factor": 10.0,
    "graph_identity_residual": 1e-12,
    "representation_homomorphism": 1e-10,
    "gap_threshold": 1e-6,
    "torus_sup_error": 0.05,
    "torus_slope_min": -1.3,
    "torus_slope_max": -0.7,
    "su2_eigenvalue_rel": 2e-2,
    "kernel_tol": 1e-8,
    "graph_psd_floor": -1e-10,
    "graph_flow_residual": 1e-6,
    "decay_fraction": 0.1,
    "summability_rel_tail": 1e-4,
    "fourier_n_max": 256,
    "fourier_gamma": 1.0,
    "fourier_recon": 1e-6,
    "fourier_exponent_max": -2.0,
}

_NAME_RE = re.compile(r"^[A-Za-z0-9._-]+$")


def _fail(path, message):
    raise SchemaError(f"{path}: {message}")


def _get_int(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        _fail(path, f"must be >= {minimum}, got {value}")
    return value


def _get_number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    return float(value)


def _get_str(value, path):
    if not isinstance(value, str):
        _fail(path, f"expected a string, got {value!r}")
    return value


def _int_vector(value, path, length=None):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value:
        _fail(path, "expected an integer or a nonempty list of integers")
    out = []
    for i, v in enumerate(value):
        out.append(_get_int(v, f"{path}[{i}]"))
    if length is not None and len(out) != length:
        _fail(path, f"expected length {length}, got {len(out)}")
    return out


def _float_vector(value, path):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value:
        _fail(path, "expected a number or a nonempty list of numbers")
    return [_get_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _eta_entries(value, path, dim):
    """Entries [frequency, re, im], kept in config shape for the report echo.

    Hermitian mirror entries must be explicit; the cocycle constructor
    enforces their consistency at build time.
    """
    if value is None:
        return []
    if not isinstance(value, list):
        _fail(path, "expected a list of [frequency, re, im] entries")
    out = []
    for i, entry in enumerate(value):
        epath = f"{path}[{i}]"
        if not isinstance(entry, list) or len(entry) != 3:
            _fail(epath, "expected [frequency, re, im]")
        freq = _int_vector(entry[0], f"{epath}[0]", length=dim)
        re_part = _get_number(entry[1], f"{epath}[1]")
        im_part = _get_number(entry[2], f"{epath}[2]")
        out.append([freq, re_part, im_part])
    keys = [tuple(k) for k, _, _ in out]
    if len(set(keys)) != len(keys):
        _fail(path, "duplicate frequency entries")
    return out


def _complex_2x2(value, path):
    if not isinstance(value, list) or len(value) != 2:
        _fail(path, "expected a 2x2 matrix as [[ [re,im], [re,im] ], ...]")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != 2:
            _fail(f"{path}[{i}]", "expected two [re, im] entries")
        cells = []
        for j, cell in enumerate(row):
            if not isinstance(cell, list) or len(cell) != 2:
                _fail(f"{path}[{i}][{j}]", "expected [re, im]")
            cells.append(complex(_get_number(cell[0], f"{path}[{i}][{j}][0]"),
                                 _get_number(cell[1], f"{path}[{i}][{j}][1]")))
        rows.append(cells)
    return np.array(rows, dtype=complex)


def _validate_model(model, path):
    if not isinstance(model, dict):
        _fail(path, "expected an object")
    mtype = _get_str(model.get("type"), f"{path}.type")
    if mtype not in MODEL_FAMILY:
        _fail(f"{path}.type", f"unknown model type {mtype!r}; known: {sorted(MODEL_FAMILY)}")
    spec = {"type": mtype}

    if mtype == "random-pair":
        spec["dim"] = _get_int(model.get("dim", 16), f"{path}.dim", minimum=2)
    elif mtype == "matrix-pair":
        has_u = "unitary" in model
        has_h = "generator" in model
        if has_u == has_h:
            _fail(path, "matrix-pair needs exactly one of 'unitary' or 'generator'")
        key = "unitary" if has_u else "generator"
        for field in (key, "conjugate"):
            value = model.get(field)
            if not isinstance(value, (str, dict)):
                _fail(f"{path}.{field}", "expected a matrix payload object or a file path")
            spec[field] = value
    elif mtype == "shift":
        spec["window"] = _get_int(model.get("window", 200), f"{path}.window", minimum=4)
        spec["margin"] = _get_int(model.get("margin", 3), f"{path}.margin", minimum=0)
    elif mtype == "torus":
        y = _float_vector(model.get("y"), f"{path}.y")
        winding = model.get("winding")
        if isinstance(winding, (int, float)) and not isinstance(winding, bool):
            winding = [[winding]]
        if not isinstance(winding, list) or not winding or not isinstance(winding[0], list):
            _fail(f"{path}.winding", "expected an integer (d=1) or a matrix of integers")
        rows = [_int_vector(row, f"{path}.winding[{i}]", length=len(y)) for i, row in enumerate(winding)]
        sector = _int_vector(model.get("sector"), f"{path}.sector", length=len(rows))
        spec.update(
            y=y,
            winding=rows,
            sector=sector,
            eta=_eta_entries(model.get("eta"), f"{path}.eta", len(y)),
            grid=_get_int(model.get("grid", 8192), f"{path}.grid", minimum=64),
            matrix_size=_get_int(model.get("matrix_size", 256), f"{path}.matrix_size", minimum=64),
        )
        if len(rows) != 1 and spec["eta"]:
            _fail(f"{path}.eta", "perturbation entries are supported for single-row winding only")
    elif mtype == "su2":
        y = _float_vector(model.get("y"), f"{path}.y")
        spec.update(
            y=y,
            frequency=_int_vector(model.get("frequency", 1), f"{path}.frequency", length=len(y)),
            label=_get_int(model.get("label", 2), f"{path}.label", minimum=0),
            eta=_eta_entries(model.get("eta"), f"{path}.eta", len(y)),
            grid=_get_int(model.get("grid", 512), f"{path}.grid", minimum=64),
        )
        h = model.get("h", "seeded")
        if isinstance(h, str):
            if h not in ("seeded", "identity"):
                _fail(f"{path}.h", "expected 'seeded', 'identity', or a 2x2 [re,im] matrix")
        else:
            _complex_2x2(h, f"{path}.h")
        spec["h"] = h
    elif mtype == "graph-line":
        spec["length"] = _get_int(model.get("length", 200), f"{path}.length", minimum=2)
        spec["margin"] = _get_int(model.get("margin", 3), f"{path}.margin", minimum=0)
    elif mtype == "graph-grid2d":
        spec["nx"] = _get_int(model.get("nx", 24), f"{path}.nx", minimum=2)
        spec["ny"] = _get_int(model.get("ny", 24), f"{path}.ny", minimum=2)
        spec["margin"] = _get_int(model.get("margin", 2), f"{path}.margin", minimum=0)
    elif mtype == "graph-cycle4-alt":
        pass
    elif mtype == "graph-file":
        spec["path"] = _get_str(model.get("path"), f"{path}.path")

    known = set(spec) | {"type"}
    extra = set(model) - known
    if extra:
        _fail(path, f"unknown model fields {sorted(extra)}")
    return spec


def _default_schedule(model):
    mtype = model["type"]
    if mtype == "shift":
        w = model["window"]
        return [w, 2 * w, 4 * w]
    if mtype == "torus":
        return [16, 32, 64, 128, 256, 512, 1024]
    if mtype == "su2":
        return [2000]
    return [1, 2, 5, 17, 64]


def validate_config(raw, default_seed=None):
    """Normalize a parsed config dict, filling documented defaults.

    Raises SchemaError with a field path on the first violation.
    """
    if not isinstance(raw, dict):
        _fail("config", "top level must be an object")
    version = raw.get("version")
    if version != CONFIG_VERSION:
        _fail("config.version", f"expected {CONFIG_VERSION}, got {version!r}")
    scenarios = raw.get("scenarios")
    if not isinstance(scenarios, list) or not scenarios:
        _fail("config.scenarios", "expected a nonempty list")
    extra = set(raw) - {"version", "scenarios"}
    if extra:
        _fail("config", f"unknown top-level fields {sorted(extra)}")

    seen_names = set()
    normalized = []
    for i, sc in enumerate(scenarios):
        path = f"config.scenarios[{i}]"
        if not isinstance(sc, dict):
            _fail(path, "expected an object")
        name = _get_str(sc.get("name"), f"{path}.name")
        if not _NAME_RE.match(name):
            _fail(f"{path}.name", "names are limited to letters, digits, dot, dash, underscore")
        if name in seen_names:
            _fail(f"{path}.name", f"duplicate scenario name {name!r}")
        seen_names.add(name)

        model = _validate_model(sc.get("model"), f"{path}.model")
        family = MODEL_FAMILY[model["type"]]

        tasks = sc.get("tasks")
        if not isinstance(tasks, list) or not tasks:
            _fail(f"{path}.tasks", "expected a nonempty list")
        for j, task in enumerate(tasks):
            tpath = f"{path}.tasks[{j}]"
            if task not in TASK_NAMES:
                _fail(tpath, f"unknown task {task!r}; known: {list(TASK_NAMES)}")
            if task not in FAMILY_TASKS[family]:
                _fail(tpath, f"task {task!r} is not supported for model type {model['type']!r}")
        if len(set(tasks)) != len(tasks):
            _fail(f"{path}.tasks", "duplicate tasks")

        if "seed" in sc:
            seed = _get_int(sc["seed"], f"{path}.seed", minimum=0)
        else:
            seed = default_seed if default_seed is not None else 0

        continuous = model["type"] == "matrix-pair" and "generator" in model
        schedule = sc.get("schedule")
        if schedule is None:
            schedule = [0.5, 1.5, 3.0] if continuous else _default_schedule(model)
        if not isinstance(schedule, list) or not schedule:
            _fail(f"{path}.schedule", "expected a nonempty list")
        if continuous:
            schedule = [_get_number(v, f"{path}.schedule[{j}]") for j, v in enumerate(schedule)]
            if any(v <= 0 for v in schedule):
                _fail(f"{path}.schedule", "entries must be positive")
        else:
            schedule = [_get_int(v, f"{path}.schedule[{j}]", minimum=1) for j, v in enumerate(schedule)]
        if any(b <= a for a, b in zip(schedule, schedule[1:])):
            _fail(f"{path}.schedule", "entries must be strictly increasing")

        horizon = _get_int(sc.get("horizon", 512 if family == "torus" else 128),
                           f"{path}.horizon", minimum=16)

        thresholds = dict(DEFAULT_THRESHOLDS)
        overrides = sc.get("thresholds", {})
        if not isinstance(overrides, dict):
            _fail(f"{path}.thresholds", "expected an object")
        for key, value in overrides.items():
            if key not in DEFAULT_THRESHOLDS:
                _fail(f"{path}.thresholds.{key}", "unknown threshold key")
            if key == "fourier_n_max":
                thresholds[key] = _get_int(value, f"{path}.thresholds.{key}", minimum=8)
            else:
                thresholds[key] = _get_number(value, f"{path}.thresholds.{key}")

        expect = sc.get("expect_admissible", True)
        if not isinstance(expect, bool):
            _fail(f"{path}.expect_admissible", "expected a boolean")

        extra = set(sc) - {"name", "seed", "model", "tasks", "schedule", "horizon",
                           "thresholds", "expect_admissible"}
        if extra:
            _fail(path, f"unknown scenario fields {sorted(extra)}")

        normalized.append({
            "name": name,
            "seed": seed,
            "model": model,
            "tasks": list(tasks),
            "schedule": schedule,
            "horizon": horizon,
            "thresholds": thresholds,
            "expect_admissible": expect,
        })
    return {"version": CONFIG_VERSION, "scenarios": normalized}


def _random_unitary(rng, dim):
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def _random_hermitian(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / (2.0 * np.sqrt(dim))


def _random_su2(rng):
    g = _random_unitary(rng, 2)
    return g / np.sqrt(complex(np.linalg.det(g)))


def _load_matrix(value, path):
    if isinstance(value, str):
        try:
            payload = json.loads(pathlib.Path(value).read_text())
        except OSError as exc:
            _fail(path, f"cannot read matrix file {value!r}: {exc}")
        except json.JSONDecodeError as exc:
            _fail(path, f"matrix file {value!r} is not valid JSON: {exc}")
    else:
        payload = value
    try:
        return matrix_from_payload(payload)
    except (SchemaError, ValueError) as exc:
        _fail(path, f"bad matrix payload: {exc}")


def build_model(scenario):
    """Instantiate model objects for a normalized scenario.

    Construction problems (non-unitary data, inconsistent Fourier mirrors)
    are config errors and surface as SchemaError.
    """
    model = scenario["model"]
    mtype = model["type"]
    rng = np.random.default_rng(scenario["seed"])
    path = f"scenario {scenario['name']!r} model"
    try:
        if mtype == "random-pair":
            dim = model["dim"]
            pair = OperatorPair.discrete(_random_unitary(rng, dim), _random_hermitian(rng, dim))
            return {"pair": pair}
        if mtype == "matrix-pair":
            conj = _load_matrix(model["conjugate"], f"{path}.conjugate")
            if "unitary" in model:
                pair = OperatorPair.discrete(_load_matrix(model["unitary"], f"{path}.unitary"), conj)
            else:
                pair = OperatorPair.continuous(_load_matrix(model["generator"], f"{path}.generator"), conj)
            return {"pair": pair}
        if mtype == "shift":
            shift = shift_weyl_model(model["window"], model["margin"])
            return {"pair": shift.pair, "shift": shift}
        if mtype == "torus":
            flow = TorusFlow(model["y"])
            modes = {tuple(k): (complex(re, im),) for k, re, im in model["eta"]}
            cocycle = TorusCocycle(np.array(model["winding"]), modes, model["sector"])
            return {"flow": flow, "cocycle": cocycle,
                    "grid": model["grid"], "matrix_size": model["matrix_size"]}
        if mtype == "su2":
            flow = TorusFlow(model["y"])
            h = model["h"]
            if isinstance(h, str):
                h = np.eye(2, dtype=complex) if h == "identity" else _random_su2(rng)
            else:
                h = _complex_2x2(h, f"{path}.h")
            modes = {tuple(k): complex(re, im) for k, re, im in model["eta"]}
            cocycle = SU2Cocycle(h, model["frequency"], modes, model["label"])
            return {"flow": flow, "cocycle": cocycle, "grid": model["grid"]}
        if mtype == "graph-line":
            return {"window": line_window(model["length"], model["margin"])}
        if mtype == "graph-grid2d":
            return {"window": grid2d_window(model["nx"], model["ny"], model["margin"])}
        if mtype == "graph-cycle4-alt":
            return {"window": alternating_cycle4()}
        if mtype == "graph-file":
            try:
                text = pathlib.Path(model["path"]).read_text()
            except OSError as exc:
                _fail(f"{path}.path", f"cannot read graph file: {exc}")
            return {"window": parse_graph_window(text)}
    except SchemaError:
        raise
    except Exception as exc:
        _fail(path, str(exc))
    raise AssertionError("unreachable")


def _worst(statuses):
    rank = {"pass": 0, "warn": 1, "fail": 2}
    return max(statuses, key=lambda s: rank[s]) if statuses else "pass"


def _fourier_bump():
    # C^3 on the circle: smoothstep rise/fall with identical vanishing ends
    window = SmoothWindow(0.2, 0.8, order=3, ramp=0.2)

    def bump(theta):
        return window(np.asarray(theta) / (2.0 * np.pi))

    return bump


def _unit_vector(rng, dim):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


class ScenarioRunner:
    """Executes the tasks of one scenario and collects report rows."""

    def __init__(self, scenario, built):
        self.scenario = scenario
        self.built = built
        self.family = MODEL_FAMILY[scenario["model"]["type"]]
        self.thresholds = scenario["thresholds"]
        self.rng = np.random.default_rng(scenario["seed"] + 1)
        self.artifacts = {}
        self._series = None

    def run(self):
        rows = []
        for task in self.scenario["tasks"]:
            runner = getattr(self, "task_" + task)
            try:
                status, metrics, used = runner()
            except Exception as exc:
                status = "fail"
                metrics = {"error": f"{type(exc).__name__}: {exc}"}
                used = {}
            rows.append({
                "task": task,
                "status": status,
                "metrics": metrics,
                "thresholds": used,
            })
        return {
            "name": self.scenario["name"],
            "seed": self.scenario["seed"],
            "model": self.scenario["model"],
            "schedule": self.scenario["schedule"],
            "horizon": self.scenario["horizon"],
            "expect_admissible": self.scenario["expect_admissible"],
            "status": _worst([r["status"] for r in rows]),
            "tasks": rows,
        }, self.artifacts

    def _used(self, *keys):
        return {k: self.thresholds[k] for k in keys}

    # -- identities ---------------------------------------------------

    def task_identities(self):
        if self.family == "graph":
            return self._graph_identities()
        if self.family == "su2":
            return self._su2_identities()
        if self.family == "torus":
            pair = sector_matrix(self.built["cocycle"], self.built["flow"],
                                 self.built["matrix_size"])
            schedule = [1, 2, 3]
        else:
            pair = self.built["pair"]
            schedule = self.scenario["schedule"]
        if pair.kind == "continuous":
            checks = [flow_identity_check(pair, t) for t in schedule]
            metrics = {
                "durations": [c.duration for c in checks],
                "residuals": [c.residual for c in checks],
                "estimates": [c.error_estimate for c in checks],
            }
            factor = self.thresholds["flow_residual_factor"]
            ok = all(c.residual <= factor * c.error_estimate for c in checks)
            return ("pass" if ok else "fail"), metrics, self._used("flow_residual_factor")

        symbol = unitary_symbol(pair)
        residuals, expected, agreements = [], [], []
        for n in schedule:
            check = degree_identity_check(pair, n)
            residuals.append(check.residual)
            expected.append(check.expected)
            gap = spectral_norm(birkhoff_discrete(pair.main, symbol, n) - degree_alternative(pair, n))
            agreements.append(float(gap))
        cap = self.thresholds["identity_residual"]
        agree_cap = self.thresholds["alternative_agreement"]
        ok = all(r <= max(e, cap) for r, e in zip(residuals, expected))
        ok = ok and all(g <= agree_cap for g in agreements)
        metrics = {
            "schedule": list(schedule),
            "residuals": residuals,
            "expected": expected,
            "alternative_gaps": agreements,
        }
        status = "pass" if ok else "fail"
        return status, metrics, self._used("identity_residual", "alternative_agreement")

    def _graph_identities(self):
        ops = build_operators(self.built["window"])
        res = interior_residuals(ops)
        cap = self.thresholds["graph_identity_residual"]
        ok = res.momentum_commutator <= cap and res.degree_identity <= cap
        metrics = {
            "momentum_commutator": res.momentum_commutator,
            "degree_identity": res.degree_identity,
            "interior_size": int(ops.interior_rows.size),
        }
        return ("pass" if ok else "fail"), metrics, self._used("graph_identity_residual")

    def _su2_identities(self):
        cocycle = self.built["cocycle"]
        flow = self.built["flow"]
        label = cocycle.label
        xs = [np.full(cocycle.d, 0.15), np.full(cocycle.d, 0.45)]
        if cocycle.d == 1:
            xs = [x[0] for x in xs]
        g1 = cocycle.value(xs[0])
        g2 = cocycle.value(xs[1])
        hom_gap = float(np.max(np.abs(
            su2_irrep(label, g1 @ g2) - su2_irrep(label, g1) @ su2_irrep(label, g2)
        )))
        steps = 5
        x0 = xs[0]
        brute = np.eye(label + 1, dtype=complex)
        for m in range(steps):
            brute = cocycle.representation_value(flow.advance(x0, m)) @ brute
        closed = cocycle.accumulated_representation(flow, x0, steps)
        product_gap = float(np.max(np.abs(closed - brute)))
        cap = self.thresholds["representation_homomorphism"]
        ok = hom_gap <= cap and product_gap <= cap
        metrics = {"homomorphism_gap": hom_gap, "product_gap": product_gap, "steps": steps}
        return ("pass" if ok else "fail"), metrics, self._used("representation_homomorphism")

    # -- degree -------------------------------------------------------

    def task_degree(self):
        if self.family == "torus":
            return self._torus_degree()
        if self.family == "su2":
            return self._su2_degree()
        if self.family == "graph":
            return self._graph_degree()
        pair = self.built["pair"]
        probes = (_unit_vector(self.rng, pair.dim), _unit_vector(self.rng, pair.dim))
        estimate = estimate_degree(pair, self.scenario["schedule"], probes=probes,
                                   gap_threshold=self.thresholds["gap_threshold"])
        self.artifacts["degree-estimate.json"] = estimate.to_json() + "\n"
        metrics = {
            "converged": bool(estimate.converged),
            "diverging": bool(estimate.diverging),
            "final_gap": estimate.cauchy_gaps[-1] if estimate.cauchy_gaps else 0.0,
            "limit_norm": float(spectral_norm(estimate.limit)),
        }
        if estimate.diverging:
            status = "fail"
        elif estimate.converged:
            status = "pass"
        else:
            status = "warn"
        return status, metrics, self._used("gap_threshold")

    def _torus_degree(self):
        cocycle, flow = self.built["cocycle"], self.built["flow"]
        shape = (self.built["grid"],) * cocycle.d
        schedule = self.scenario["schedule"]
        sups = []
        limit = None
        for n in schedule:
            report = torus_degree_field(cocycle, flow, shape, n)
            sups.append(report.sup_error)
            limit = report.limit
        slope = None
        positive = [(n, s) for n, s in zip(schedule, sups) if s > 0]
        if len(positive) >= 3:
            ln = np.log([n for n, _ in positive])
            ls = np.log([s for _, s in positive])
            slope = float(np.polyfit(ln, ls, 1)[0])
        payload = {"schedule": list(schedule), "sup_errors": sups,
                   "limit": limit, "slope": slope}
        self.artifacts["torus-degree.json"] = json.dumps(
            _jsonable(payload), sort_keys=True, indent=2) + "\n"
        ok = sups[-1] <= self.thresholds["torus_sup_error"]
        if slope is not None:
            ok = ok and self.thresholds["torus_slope_min"] <= slope <= self.thresholds["torus_slope_max"]
        metrics = {"limit": limit, "final_sup_error": sups[-1], "slope": slope,
                   "schedule": list(schedule)}
        used = self._used("torus_sup_error", "torus_slope_min", "torus_slope_max")
        return ("pass" if ok else "fail"), metrics, used

    def _su2_degree(self):
        cocycle, flow = self.built["cocycle"], self.built["flow"]
        shape = (self.built["grid"],) * cocycle.d
        steps = self.scenario["schedule"][-1]
        report = su2_degree_field(cocycle, flow, shape, steps,
                                  kernel_tol=self.thresholds["kernel_tol"])
        scale = 2.0 * np.pi * abs(float(np.dot(cocycle.frequency, flow.y))) * max(1, cocycle.label)
        deviation = float(np.max(np.abs(np.sort(report.eigenvalues)
                                        - np.sort(report.predicted_eigenvalues))))
        rel = deviation / scale
        want_kernel = 1 if cocycle.label % 2 == 0 else 0
        ok = rel <= self.thresholds["su2_eigenvalue_rel"] and report.kernel_dim == want_kernel
        metrics = {
            "steps": int(steps),
            "eigenvalues": [float(v) for v in report.eigenvalues],
            "predicted": [float(v) for v in report.predicted_eigenvalues],
            "relative_deviation": rel,
            "kernel_dim": int(report.kernel_dim),
            "expected_kernel_dim": want_kernel,
            "sup_deviation": float(report.sup_deviation),
        }
        return ("pass" if ok else "fail"), metrics, self._used("su2_eigenvalue_rel", "kernel_tol")

    def _graph_degree(self):
        ops = build_operators(self.built["window"])
        report = graph_degree(ops, kernel_tol=self.thresholds["kernel_tol"])
        worst_flow = max(report.flow_residuals.values())
        ok = (report.kernel_match
              and report.psd_min_eigenvalue >= self.thresholds["graph_psd_floor"]
              and worst_flow <= self.thresholds["graph_flow_residual"])
        metrics = {
            "kernel_dim_degree": report.kernel_dim_degree,
            "kernel_dim_momentum": report.kernel_dim_momentum,
            "kernel_match": bool(report.kernel_match),
            "psd_min_eigenvalue": report.psd_min_eigenvalue,
            "flow_residuals": {str(k): v for k, v in report.flow_residuals.items()},
            "probe_row": int(report.probe_row),
        }
        if report.note:
            metrics["note"] = report.note
        used = self._used("kernel_tol", "graph_psd_floor", "graph_flow_residual")
        return ("pass" if ok else "fail"), metrics, used

    # -- mixing / summability ------------------------------------------

    def _correlation_series(self):
        if self._series is not None:
            return self._series
        horizon = self.scenario["horizon"]
        if self.family == "torus":
            shape = (self.built["grid"],) * self.built["cocycle"].d
            mode = {(1,) * self.built["cocycle"].d: 1.0}
            observable = GridField.from_modes(mode, shape)
            self._series = sector_correlation(self.built["cocycle"], self.built["flow"],
                                              observable, observable, horizon)
        else:
            pair = self.built["pair"]
            phi = _unit_vector(self.rng, pair.dim)
            psi = _unit_vector(self.rng, pair.dim)
            if pair.kind == "discrete":
                self._series = correlation_discrete(pair.main, phi, psi, horizon)
            else:
                times = np.linspace(0.0, float(self.scenario["schedule"][-1]), horizon)
                self._series = correlation_continuous(pair.main, phi, psi, times)
        return self._series

    def task_mixing(self):
        series = self._correlation_series()
        self.artifacts["correlation.csv"] = series.to_csv()
        report = DecayReport(series, fraction=self.thresholds["decay_fraction"])
        metrics = {
            "head_peak": report.head_peak,
            "tail_peak": report.tail_peak,
            "decaying": bool(report.decaying),
            "samples": len(series),
        }
        return ("pass" if report.decaying else "warn"), metrics, self._used("decay_fraction")

    def task_summability(self):
        series = self._correlation_series()
        self.artifacts.setdefault("correlation.csv", series.to_csv())
        report = SummabilityReport(series, rel_tail=self.thresholds["summability_rel_tail"])
        metrics = report.summary()
        metrics["saturating"] = bool(metrics["saturating"])
        status = "pass" if report.saturating else "warn"
        return status, metrics, self._used("summability_rel_tail")

    # -- fourier --------------------------------------------------------

    def task_fourier(self):
        if self.family == "torus":
            unitary = sector_matrix(self.built["cocycle"], self.built["flow"],
                                    self.built["matrix_size"]).main
        else:
            unitary = self.built["pair"].main
        calc = FourierCalculus(unitary, _fourier_bump(),
                               int(self.thresholds["fourier_n_max"]),
                               self.thresholds["fourier_gamma"])
        self.artifacts["fourier.csv"] = calc.to_csv()
        ok = (calc.recon_error <= self.thresholds["fourier_recon"]
              and calc.decay_exponent <= self.thresholds["fourier_exponent_max"])
        metrics = {
            "n_max": calc.n_max,
            "grid": calc.grid,
            "recon_error": calc.recon_error,
            "decay_exponent": calc.decay_exponent,
            "holder_constant": calc.holder_constant,
            "tail_bound": calc.tail_bound,
        }
        used = self._used("fourier_n_max", "fourier_gamma", "fourier_recon",
                          "fourier_exponent_max")
        return ("pass" if ok else "fail"), metrics, used

    # -- admissibility ---------------------------------------------------

    def task_admissibility(self):
        window = self.built["window"]
        report = check_admissible(window)
        expected = self.scenario["expect_admissible"]
        ok = report.admissible == expected
        metrics = {
            "admissible": bool(report.admissible),
            "expected": bool(expected),
            "path_balance_ok": bool(report.path_balance_ok),
            "pair_counts_ok": bool(report.pair_counts_ok),
            "vertices": len(window.vertices),
            "edges": len(window.edges),
            "boundary_size": len(window.boundary),
            "interior_size": len(window.interior),
        }
        if report.witness_cycle is not None:
            metrics["witness_cycle"] = [int(v) for v in report.witness_cycle]
            metrics["witness_balance"] = [int(c) for c in report.witness_balance]
        if report.witness_pair is not None:
            metrics["witness_pair"] = [int(v) for v in report.witness_pair]
            metrics["witness_counts"] = [int(c) for c in report.witness_counts]
        return ("pass" if ok else "fail"), metrics, {}


def _jsonable(obj):
    """Recursively convert to JSON-safe values with deterministic floats."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"im": _jsonable(obj.imag), "re": _jsonable(obj.real)}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__} into a report")


def _dump_report(report):
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def run_config(config, out_dir, threads=1):
    """Execute all scenarios and write report, metadata, and artifacts."""
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    built = {sc["name"]: build_model(sc) for sc in config["scenarios"]}

    started = datetime.datetime.now(datetime.timezone.utc)
    t0 = time.perf_counter()

    def execute(sc):
        tic = time.perf_counter()
        result, artifacts = ScenarioRunner(sc, built[sc["name"]]).run()
        return result, artifacts, time.perf_counter() - tic

    scenarios = config["scenarios"]
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(execute, scenarios))
    else:
        outcomes = [execute(sc) for sc in scenarios]

    wall = time.perf_counter() - t0
    finished = datetime.datetime.now(datetime.timezone.utc)

    results = []
    scenario_walls = {}
    for (result, artifacts, sc_wall), sc in zip(outcomes, scenarios):
        rel = {}
        for fname, text in sorted(artifacts.items()):
            target = out / sc["name"] / fname
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text)
            rel[fname.rsplit(".", 1)[0]] = f"{sc['name']}/{fname}"
        result["artifacts"] = rel
        results.append(result)
        scenario_walls[sc["name"]] = sc_wall

    # report assembly is ordered by scenario name regardless of run order
    results.sort(key=lambda r: r["name"])
    report = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "tool": {"name": "commix", "version": __version__},
        "scenarios": results,
        "status": _worst([r["status"] for r in results]),
    }
    (out / "report.json").write_text(_dump_report(report))
    meta = {
        "started": started.isoformat(),
        "finished": finished.isoformat(),
        "wall_time_s": wall,
        "scenario_wall_times_s": {k: scenario_walls[k] for k in sorted(scenario_walls)},
        "threads": threads,
    }
    (out / "report.meta.json").write_text(json.dumps(_jsonable(meta), sort_keys=True, indent=2) + "\n")
    return report


def _diff_reports(a, b, path="report", rtol=1e-9, atol=1e-12):
    diffs = []
    if type(a) is not type(b):
        diffs.append(f"{path}: type {type(a).__name__} != {type(b).__name__}")
        return diffs
    if isinstance(a, dict):
        for key in sorted(set(a) | set(b)):
            if key not in a:
                diffs.append(f"{path}.{key}: missing on the left")
            elif key not in b:
                diffs.append(f"{path}.{key}: missing on the right")
            else:
                diffs.extend(_diff_reports(a[key], b[key], f"{path}.{key}", rtol, atol))
        return diffs
    if isinstance(a, list):
        if len(a) != len(b):
            diffs.append(f"{path}: length {len(a)} != {len(b)}")
            return diffs
        for i, (x, y) in enumerate(zip(a, b)):
            diffs.extend(_diff_reports(x, y, f"{path}[{i}]", rtol, atol))
        return diffs
    if isinstance(a, float) or isinstance(b, float):
        fa, fb = float(a), float(b)
        if not np.isclose(fa, fb, rtol=rtol, atol=atol, equal_nan=True):
            diffs.append(f"{path}: {fa!r} != {fb!r}")
        return diffs
    if a != b:
        diffs.append(f"{path}: {a!r} != {b!r}")
    return diffs


EXAMPLE_CONFIGS = {
    "identities-random.json": {
        "version": 1,
        "scenarios": [
            {
                "name": "random-16-identities",
                "seed": 7,
                "model": {"type": "random-pair", "dim": 16},
                "tasks": ["identities"],
                "schedule": [1, 2, 5, 17, 64],
            }
        ],
    },
    "torus-sector.json": {
        "version": 1,
        "scenarios": [
            {
                "name": "torus-golden-sector",
                "seed": 1,
                "model": {
                    "type": "torus",
                    "y": 0.6180339887498949,
                    "winding": 2,
                    "sector": 3,
                    "eta": [[[1], 0.0, -0.025], [[-1], 0.0, 0.025]],
                    "grid": 8192,
                    "matrix_size": 256,
                },
                "tasks": ["identities", "degree", "mixing", "summability"],
                "schedule": [16, 32, 64, 128, 256, 512, 1024],
                "horizon": 512,
            }
        ],
    },
    "su2-transport.json": {
        "version": 1,
        "scenarios": [
            {
                "name": "su2-spin1-transport",
                "seed": 3,
                "model": {
                    "type": "su2",
                    "y": 0.41421356237309515,
                    "frequency": 1,
                    "label": 2,
                    "h": "seeded",
                    "eta": [[[1], 0.0, -0.05], [[-1], 0.0, 0.05]],
                    "grid": 512,
                },
                "tasks": ["identities", "degree"],
                "schedule": [2000],
            }
        ],
    },
    "graph-windows.json": {
        "version": 1,
        "scenarios": [
            {
                "name": "graph-line-200",
                "model": {"type": "graph-line", "length": 200, "margin": 3},
                "tasks": ["admissibility", "identities", "degree"],
            },
            {
                "name": "graph-grid-24",
                "model": {"type": "graph-grid2d", "nx": 24, "ny": 24, "margin": 2},
                "tasks": ["admissibility", "identities", "degree"],
                "thresholds": {"graph_flow_residual": 0.2},
            },
            {
                "name": "graph-cycle4-alternating",
                "model": {"type": "graph-cycle4-alt"},
                "tasks": ["admissibility"],
                "expect_admissible": False,
            },
        ],
    },
    "shift-cycle.json": {
        "version": 1,
        "scenarios": [
            {
                "name": "shift-200",
                "seed": 11,
                "model": {"type": "shift", "window": 200, "margin": 3},
                "tasks": ["identities", "degree"],
                "schedule": [200, 400, 800],
            }
        ],
    },
}


def _cmd_run(args):
    try:
        raw = json.loads(pathlib.Path(args.config).read_text())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return 2
    try:
        config = validate_config(raw, default_seed=args.seed)
        report = run_config(config, args.out, threads=max(1, args.threads))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for sc in report["scenarios"]:
        print(f"scenario {sc['name']}: {sc['status']}")
    print(f"overall: {report['status']}")
    print(f"report: {pathlib.Path(args.out) / 'report.json'}")
    if report["status"] == "fail":
        return 1
    if report["status"] == "warn" and args.strict:
        return 1
    return 0


def _cmd_compare(args):
    loaded = []
    for name in (args.left, args.right):
        try:
            loaded.append(json.loads(pathlib.Path(name).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot load report {name!r}: {exc}", file=sys.stderr)
            return 2
    for name, rep in zip((args.left, args.right), loaded):
        if not isinstance(rep, dict) or rep.get("format") != REPORT_FORMAT:
            print(f"error: {name!r} is not a {REPORT_FORMAT} document", file=sys.stderr)
            return 2
    if loaded[0].get("version") != loaded[1].get("version"):
        print("error: report versions differ; refusing to compare", file=sys.stderr)
        return 2
    diffs = _diff_reports(loaded[0], loaded[1])
    if not diffs:
        print("reports match")
        return 0
    for line in diffs:
        print(line)
    print(f"{len(diffs)} difference(s)")
    return 1


def _cmd_emit_examples(args):
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for fname in sorted(EXAMPLE_CONFIGS):
        target = out / fname
        target.write_text(json.dumps(EXAMPLE_CONFIGS[fname], indent=2, sort_keys=True) + "\n")
        print(f"wrote {target}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="commix",
        description="Commutator-based mixing diagnostics: batch scenario runner.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="execute the scenarios of a config file")
    p_run.add_argument("config", help="path to a JSON scenario config")
    p_run.add_argument("--seed", type=int, default=None,
                       help="default seed for scenarios that do not set one")
    p_run.add_argument("--out", default="commix-report", help="output directory")
    p_run.add_argument("--threads", type=int, default=1,
                       help="scenario-level worker threads (report order is unaffected)")
    p_run.add_argument("--strict", action="store_true", help="treat warnings as failures")
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="diff two run reports with numeric tolerance")
    p_cmp.add_argument("left")
    p_cmp.add_argument("right")
    p_cmp.set_defaults(func=_cmd_compare)

    p_ex = sub.add_parser("emit-examples", help="write the bundled example configs")
    p_ex.add_argument("--out", default="configs", help="output directory")
    p_ex.set_defaults(func=_cmd_emit_examples)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
