"""Problem files, task dispatch and report serialization.

Problems are JSON objects::

    {
      "version": "1",
      "task": "feasibility",
      "states": [{"type": "coherent", "alpha_re": 0.5, "alpha_im": 0.0}, ...],
      "targets": [...],              # optional; default is g_i * state_i
      "gains": [2.0, 2.0],
      "probs": [0.2, 0.2],
      "observables": ["quadrature-q", {"name": "A", "re": [[...]], "im": [[...]]}],
      "params": {"tol": 1e-9, "seed": 0, ...}
    }

State descriptors are ``coherent`` (``alpha_re``, ``alpha_im``), ``gaussian``
(``d``, ``gamma``) or ``fock`` (``re`` and optional ``im`` amplitude lists).
Reports are JSON with sorted keys; complex numbers appear as ``{"re", "im"}``.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io as _io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, channel, classify, feasibility, gaussian, homodyne, kraus
from .errors import ParseError, SchemaError, VersionUnsupported
from .states import (
    Observable,
    PureState,
    default_dim,
    expectation,
    gram_matrix,
    make_coherent_state,
    number_operator,
    quadrature_p,
    quadrature_q,
)

SUPPORTED_VERSIONS = ("1",)
TASKS = ("feasibility", "synthesize", "classify", "theorem", "gain-probability", "homodyne", "channel")
STATE_TYPES = ("coherent", "gaussian", "fock")
NAMED_OBSERVABLES = ("number", "quadrature-q", "quadrature-p")
TOP_LEVEL_KEYS = ("version", "task", "states", "targets", "gains", "probs", "observables", "params")

DEFAULT_PARAMS: Dict[str, Dict[str, Any]] = {
    "feasibility": {"tol": feasibility.DEFAULT_TOL, "seed": 0, "seeds": 64, "workers": 1},
    "synthesize": {"tol": feasibility.DEFAULT_TOL, "seed": 0, "seeds": 64, "workers": 1,
                   "prob_tol": 1e-8, "fidelity_tol": 1e-8, "completeness_tol": 1e-9},
    "classify": {"tol": feasibility.DEFAULT_TOL, "seed": 0, "seeds": 64, "workers": 1},
    "theorem": {"tol": 1e-12, "corollary": False},
    "gain-probability": {"g_grid": [], "root_tol": 1e-12},
    "homodyne": {"c": 10.0, "b_values": [1.0], "deltas": [math.pi / 6], "trials": 100000,
                 "seed": 0, "shards": 1, "simulate": True},
    "channel": {"channel": {"kind": "pure-loss", "rate": 1.0}, "gain": 1.0, "t_max": 3.0, "dt": 1e-3},
}


@dataclass
class StateSpec:
    type: str
    alpha: complex = 0j
    d: Optional[List[float]] = None
    gamma: Optional[List[List[float]]] = None
    amplitudes: Optional[np.ndarray] = None


@dataclass
class ProblemFile:
    version: str
    task: str
    states: List[StateSpec] = field(default_factory=list)
    targets: Optional[List[StateSpec]] = None
    gains: Optional[List[float]] = None
    probs: Optional[List[float]] = None
    observables: List[Any] = field(default_factory=list)
    params: Dict[str, Any] = field(default_factory=dict)


# ---------------------------------------------------------------- parsing

def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _number(x, path: str) -> float:
    if not _is_number(x):
        raise SchemaError(path, f"expected a finite number, got {type(x).__name__}")
    return float(x)


def _number_list(x, path: str) -> List[float]:
    if not isinstance(x, list):
        raise SchemaError(path, "expected a list of numbers")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(x)]


def _matrix(x, path: str, square: Optional[int] = None) -> List[List[float]]:
    if not isinstance(x, list) or not x:
        raise SchemaError(path, "expected a non-empty list of rows")
    rows = [_number_list(r, f"{path}[{i}]") for i, r in enumerate(x)]
    n = square if square is not None else len(rows)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise SchemaError(path, f"expected a {n}x{n} matrix")
    return rows


def _parse_state(obj, path: str) -> StateSpec:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected a state object")
    kind = obj.get("type")
    if kind not in STATE_TYPES:
        raise SchemaError(f"{path}.type", f"expected one of {list(STATE_TYPES)}, got {kind!r}")
    if kind == "coherent":
        re = _number(obj.get("alpha_re", 0.0), f"{path}.alpha_re")
        im = _number(obj.get("alpha_im", 0.0), f"{path}.alpha_im")
        return StateSpec("coherent", alpha=complex(re, im))
    if kind == "gaussian":
        d = _number_list(obj.get("d"), f"{path}.d")
        if len(d) != 2:
            raise SchemaError(f"{path}.d", "expected 2 entries")
        gamma = _matrix(obj.get("gamma", [[1.0, 0.0], [0.0, 1.0]]), f"{path}.gamma", 2)
        return StateSpec("gaussian", d=d, gamma=gamma)
    re = _number_list(obj.get("re"), f"{path}.re")
    im = _number_list(obj.get("im", [0.0] * len(re)), f"{path}.im")
    if len(im) != len(re) or not re:
        raise SchemaError(f"{path}.im", "expected as many imaginary parts as real parts")
    return StateSpec("fock", amplitudes=np.array(re) + 1j * np.array(im))


def _parse_observable(obj, path: str):
    if isinstance(obj, str):
        if obj not in NAMED_OBSERVABLES:
            raise SchemaError(path, f"expected one of {list(NAMED_OBSERVABLES)}, got {obj!r}")
        return obj
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an observable name or {name, re, im}")
    re = _matrix(obj.get("re"), f"{path}.re")
    im = _matrix(obj.get("im", [[0.0] * len(re) for _ in re]), f"{path}.im", len(re))
    return {"name": str(obj.get("name", "custom")), "re": re, "im": im}


def _check_tolerances(params: dict, path: str = "params") -> None:
    for key, val in params.items():
        if key == "tol" or key.endswith("_tol"):
            if not _is_number(val) or val <= 0:
                raise SchemaError(f"{path}.{key}", "tolerances must be positive numbers")


def parse_problem(text: str) -> ProblemFile:
    """Validate a JSON problem and fill in task defaults.

    Raises:
        ParseError: malformed JSON.
        SchemaError: the first invalid field, with its path.
        VersionUnsupported: unknown ``version``.
    """
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError("", "problem must be a JSON object")
    for key in obj:
        if key not in TOP_LEVEL_KEYS:
            raise SchemaError(key, f"unknown field; expected one of {list(TOP_LEVEL_KEYS)}")
    version = obj.get("version")
    if not isinstance(version, str):
        raise SchemaError("version", "expected a version string")
    if version not in SUPPORTED_VERSIONS:
        raise VersionUnsupported(f"version {version!r} is not supported; expected one of {list(SUPPORTED_VERSIONS)}")
    task = obj.get("task")
    if task not in TASKS:
        raise SchemaError("task", f"expected one of {list(TASKS)}, got {task!r}")

    states_raw = obj.get("states", [])
    if not isinstance(states_raw, list):
        raise SchemaError("states", "expected a list of states")
    states = [_parse_state(s, f"states[{i}]") for i, s in enumerate(states_raw)]
    targets = None
    if "targets" in obj:
        if not isinstance(obj["targets"], list):
            raise SchemaError("targets", "expected a list of states")
        targets = [_parse_state(s, f"targets[{i}]") for i, s in enumerate(obj["targets"])]
        if len(targets) != len(states):
            raise SchemaError("targets", f"expected {len(states)} targets, got {len(targets)}")

    gains = None
    if "gains" in obj:
        gains = _number_list(obj["gains"], "gains")
        if len(gains) not in (1, len(states)) and task != "channel":
            raise SchemaError("gains", f"expected 1 or {len(states)} gains, got {len(gains)}")
        for i, g in enumerate(gains):
            if g < 0:
                raise SchemaError(f"gains[{i}]", "gains must be non-negative")
        if len(gains) == 1 and len(states) > 1:
            gains = gains * len(states)
    probs = None
    if "probs" in obj:
        probs = _number_list(obj["probs"], "probs")
        for i, p in enumerate(probs):
            if not 0.0 <= p <= 1.0:
                raise SchemaError(f"probs[{i}]", f"probability must lie in [0, 1], got {p}")
        if len(probs) not in (1, len(states)):
            raise SchemaError("probs", f"expected 1 or {len(states)} probabilities, got {len(probs)}")
        if len(probs) == 1 and len(states) > 1:
            probs = probs * len(states)
    obs_raw = obj.get("observables", [])
    if not isinstance(obs_raw, list):
        raise SchemaError("observables", "expected a list")
    observables = [_parse_observable(o, f"observables[{i}]") for i, o in enumerate(obs_raw)]

    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise SchemaError("params", "expected an object")
    merged = json.loads(json.dumps(DEFAULT_PARAMS[task]))
    merged.update(params)
    _check_tolerances(merged)
    for key in ("seed", "seeds", "trials", "shards", "workers", "dim"):
        if key in merged and (not isinstance(merged[key], int) or isinstance(merged[key], bool) or merged[key] < 0):
            raise SchemaError(f"params.{key}", "expected a non-negative integer")
    return ProblemFile(version, task, states, targets, gains, probs, observables, merged)


def _state_to_obj(s: StateSpec) -> dict:
    if s.type == "coherent":
        return {"type": "coherent", "alpha_re": s.alpha.real, "alpha_im": s.alpha.imag}
    if s.type == "gaussian":
        return {"type": "gaussian", "d": list(s.d), "gamma": [list(r) for r in s.gamma]}
    return {"type": "fock", "re": [float(v) for v in s.amplitudes.real],
            "im": [float(v) for v in s.amplitudes.imag]}


def problem_to_obj(problem: ProblemFile) -> dict:
    obj: Dict[str, Any] = {"version": problem.version, "task": problem.task,
                           "states": [_state_to_obj(s) for s in problem.states],
                           "observables": list(problem.observables), "params": problem.params}
    if problem.targets is not None:
        obj["targets"] = [_state_to_obj(s) for s in problem.targets]
    if problem.gains is not None:
        obj["gains"] = list(problem.gains)
    if problem.probs is not None:
        obj["probs"] = list(problem.probs)
    return obj


def dump_problem(problem: ProblemFile) -> str:
    """Canonical JSON text; ``dump(parse(dump(parse(x)))) == dump(parse(x))``."""
    return json.dumps(problem_to_obj(problem), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------- serialization

def to_jsonable(x):
    """Recursively convert numpy values, complex numbers and dataclasses."""
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: to_jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)
                if f.repr or f.name == "certificate"}
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return {"re": to_jsonable(x.real.tolist()), "im": to_jsonable(x.imag.tolist())}
        return to_jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": to_jsonable(float(x.real)), "im": to_jsonable(float(x.imag))}
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def dump_report(report: dict) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


def table_to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        cells = []
        for c in columns:
            v = to_jsonable(row.get(c))
            cells.append("" if v is None else (repr(v) if isinstance(v, float) else v))
        writer.writerow(cells)
    return buf.getvalue()


# ---------------------------------------------------------------- dispatch

def _coherent_alpha(s: StateSpec, path: str) -> complex:
    if s.type == "coherent":
        return s.alpha
    if s.type == "gaussian" and np.allclose(s.gamma, np.eye(2), atol=1e-12):
        return complex(s.d[0], s.d[1]) / math.sqrt(2)
    raise SchemaError(path, "expected a coherent state (or a Gaussian with gamma = I)")


def _pure_sets(problem: ProblemFile) -> Tuple[List[PureState], List[PureState], int]:
    if not problem.states:
        raise SchemaError("states", "at least one state is required")
    fock_dims = {len(s.amplitudes) for s in problem.states + (problem.targets or []) if s.type == "fock"}
    if problem.targets is None:
        if problem.gains is None:
            raise SchemaError("gains", "gains are required when targets are not given")
        alphas_in = [_coherent_alpha(s, f"states[{i}]") for i, s in enumerate(problem.states)]
        alphas_out = [g * a for g, a in zip(problem.gains, alphas_in)]
        target_specs = [StateSpec("coherent", alpha=a) for a in alphas_out]
    else:
        target_specs = problem.targets
    coh = [s.alpha for s in problem.states + target_specs if s.type == "coherent"]
    if "dim" in problem.params:
        dim = int(problem.params["dim"])
    elif fock_dims:
        dim = max(fock_dims)
    else:
        dim = max(default_dim(abs(a)) for a in coh)
    if fock_dims and fock_dims != {dim}:
        raise SchemaError("states", f"Fock vectors must all have dimension {dim}")

    def build(spec: StateSpec, path: str) -> PureState:
        if spec.type == "fock":
            return PureState.normalized(spec.amplitudes, path)
        return make_coherent_state(_coherent_alpha(spec, path), dim, path)

    inputs = [build(s, f"states[{i}]") for i, s in enumerate(problem.states)]
    targets = [build(s, f"targets[{i}]") for i, s in enumerate(target_specs)]
    return inputs, targets, dim


def _probs(problem: ProblemFile) -> np.ndarray:
    if problem.probs is None:
        raise SchemaError("probs", "success probabilities are required for this task")
    return np.array(problem.probs, dtype=float)


def _observables(problem: ProblemFile, dim: int) -> List[Observable]:
    names = problem.observables or ["quadrature-q", "quadrature-p"]
    out = []
    for o in names:
        if o == "number":
            out.append(number_operator(dim))
        elif o == "quadrature-q":
            out.append(quadrature_q(dim))
        elif o == "quadrature-p":
            out.append(quadrature_p(dim))
        else:
            m = np.array(o["re"]) + 1j * np.array(o["im"])
            if m.shape[0] != dim:
                raise SchemaError("observables", f"custom observable must be {dim}x{dim}")
            out.append(Observable(m, o["name"]))
    return out


def _result_block(res) -> dict:
    if isinstance(res, feasibility.NotFound):
        return {"feasible": False, "method": "penalty-search", "found": False,
                "best_penalty": res.best_penalty, "omega": res.best_omega.entries,
                "min_eig_omega": res.min_eig_omega, "min_eig_K": res.min_eig_K,
                "restarts": res.restarts, "notes": res.notes}
    return {"feasible": res.feasible, "method": res.method, "found": res.feasible,
            "penalty": res.penalty, "omega": res.omega.entries, "residual_K": res.residual_K,
            "min_eig_omega": res.min_eig_omega, "min_eig_K": res.min_eig_K, "notes": res.notes}


def _search_args(params: dict) -> dict:
    return {"tol": params["tol"], "seeds": params["seeds"], "seed": params["seed"],
            "workers": params.get("workers", 1)}


def _run_feasibility(problem: ProblemFile) -> dict:
    inputs, targets, dim = _pure_sets(problem)
    p = _probs(problem)
    g_pi, g_xi = gram_matrix(inputs), gram_matrix(targets)
    res = feasibility.decide(g_pi, g_xi, p, **_search_args(problem.params))
    verdicts = _result_block(res)
    tables = {"gram_in": g_pi.entries, "gram_out": g_xi.entries}
    if len(inputs) == 2:
        s, t = g_pi.entries[0, 1], g_xi.entries[0, 1]
        verdicts["max_success_probability"] = feasibility.max_success_probability(s, t)
    return {"verdicts": verdicts, "tables": tables, "dim": dim,
            "tolerances": {"tol": problem.params["tol"], "found_penalty": feasibility.FOUND_PENALTY}}


def _run_synthesize(problem: ProblemFile) -> dict:
    inputs, targets, dim = _pure_sets(problem)
    p = _probs(problem)
    params = problem.params
    res = feasibility.decide(gram_matrix(inputs), gram_matrix(targets), p, **_search_args(params))
    out = {"verdicts": _result_block(res), "tables": {}, "dim": dim,
           "tolerances": {"tol": params["tol"], "prob_tol": params["prob_tol"],
                          "fidelity_tol": params["fidelity_tol"],
                          "completeness_tol": params["completeness_tol"]}}
    warnings = []
    if not res.feasible:
        warnings.append("task is infeasible; no Kraus operators synthesized")
        out["warnings"] = warnings
        return out
    ks = kraus.synthesize(inputs, targets, res.omega)
    rep = kraus.verify_kraus(ks, inputs, targets, p, prob_tol=params["prob_tol"],
                             fidelity_tol=params["fidelity_tol"],
                             completeness_tol=params["completeness_tol"])
    gram_res = kraus.gram_reconstruction_residual(inputs, targets, ks.coeffs, res.residual_K)
    out["kraus"] = {"operators": [op for op in ks.operators], "coeffs": ks.coeffs}
    out["verification"] = {"passed": rep.passed, "checks": rep.checks,
                           "completeness_margin": rep.completeness_margin,
                           "states": rep.states, "gram_residual": gram_res}
    return out


def _run_classify(problem: ProblemFile) -> dict:
    inputs, targets, dim = _pure_sets(problem)
    obs = _observables(problem, dim)
    gains = None
    if problem.gains is not None:
        gains = np.array(problem.gains, dtype=float)
    spec = classify.AmplificationSpec(inputs, targets, _probs(problem), gains, obs)
    params = problem.params
    cls = classify.classify(spec, **_search_args(params))
    rows = []
    for k, o in enumerate(obs):
        for i, (r, s) in enumerate(zip(inputs, targets)):
            rows.append({"observable": o.name, "state": i, "mean_in": expectation(o, r),
                         "mean_out": expectation(o, s)})
    return {"verdicts": {"deterministic": cls.deterministic, "noiseless": cls.noiseless,
                         "linear": cls.linear, "feasible": cls.feasible, "amplifying": cls.amplifying,
                         "noiseless_by_observable": dict(zip([o.name for o in obs], cls.noiseless_by_observable)),
                         "notes": cls.notes, "certificate": _result_block(cls.certificate)},
            "tables": {"expectations": rows}, "dim": dim,
            "tolerances": {"tol": params["tol"], "noiseless_tol": 1e-8,
                           "gain_consistency_tol": classify.GAIN_CONSISTENCY_TOL}}


def _gaussian(s: StateSpec, path: str) -> gaussian.GaussianState:
    if s.type == "coherent":
        return gaussian.GaussianState.coherent(s.alpha)
    if s.type == "gaussian":
        return gaussian.GaussianState(s.d, s.gamma)
    raise SchemaError(path, "this task needs coherent or gaussian states")


def _run_theorem(problem: ProblemFile) -> dict:
    states = [_gaussian(s, f"states[{i}]") for i, s in enumerate(problem.states)]
    if problem.gains is None:
        raise SchemaError("gains", "gains are required")
    tol = problem.params["tol"]
    rep = gaussian.theorem_check(states, problem.gains, tol)
    out = {"verdicts": {"satisfied": rep.satisfied, "printed_bound_satisfied": rep.printed_bound_satisfied,
                        "notes": rep.notes},
           "tables": {"pairs": rep.pairs}, "tolerances": {"tol": tol}}
    if problem.params.get("corollary"):
        cor = gaussian.corollary_check(states, problem.gains, tol)
        out["verdicts"]["corollary_satisfied"] = cor.satisfied
        out["verdicts"]["corollary_printed_bound_satisfied"] = cor.printed_bound_satisfied
        out["tables"]["corollary_pairs"] = cor.pairs
    return out


def _run_gain_probability(problem: ProblemFile) -> dict:
    params = problem.params
    verdicts: Dict[str, Any] = {}
    tables: Dict[str, Any] = {}
    if all(k in params for k in ("C", "V", "D")):
        model = gaussian.GainProbabilityModel(float(params["C"]), float(params["V"]), float(params["D"]))
        mg = gaussian.min_gain(model)
        verdicts["min_gain"] = mg
        # closed-form root; confirm it reproduces f_min
        resid = abs(gaussian.gain_probability_f(mg.g_min, model.D) - max(mg.f_min, 1.0))
        verdicts["root_residual"] = resid
        if resid > params["root_tol"] * max(1.0, mg.f_min):
            raise ArithmeticError(f"min_gain root residual {resid:.3e} exceeds root_tol")
        if params["g_grid"]:
            tables["f"] = [{"g": g, "f": gaussian.gain_probability_f(g, model.D)} for g in params["g_grid"]]
    if all(k in params for k in ("epsilon", "kappa", "d_min")):
        verdicts["min_gain_threshold"] = gaussian.min_gain_threshold(
            float(params["epsilon"]), float(params["kappa"]), float(params["d_min"]))
    if not verdicts:
        raise SchemaError("params", "expected C, V, D and/or epsilon, kappa, d_min")
    return {"verdicts": verdicts, "tables": tables, "tolerances": {"root_tol": params["root_tol"]}}


def _run_homodyne(problem: ProblemFile) -> dict:
    params = problem.params
    rows = homodyne.sweep(params["b_values"], params["c"], params["deltas"], params["trials"],
                          params["seed"], params["shards"], bool(params["simulate"]))
    decreasing = {}
    for delta in params["deltas"]:
        sens = [r["sensitivity"] for r in rows if r["delta"] == float(delta) and r["sensitivity"] is not None]
        bs = sorted(params["b_values"])
        decreasing[repr(float(delta))] = bool(bs == list(params["b_values"]) and
                                             all(a > b for a, b in zip(sens, sens[1:])))
    return {"verdicts": {"sensitivity_strictly_decreasing_in_b": decreasing},
            "tables": {"sweep": rows}, "csv": (rows, homodyne.CSV_COLUMNS),
            "tolerances": {"min_trials": homodyne.MIN_TRIALS}}


def _channel_model(spec: dict) -> channel.ChannelModel:
    if not isinstance(spec, dict):
        raise SchemaError("params.channel", "expected an object")
    kind = spec.get("kind")
    if kind == "pure-loss":
        return channel.ChannelModel.pure_loss(_number(spec.get("rate", 1.0), "params.channel.rate"))
    if kind == "oscillating":
        return channel.ChannelModel.oscillating(_number(spec.get("base", 1.0), "params.channel.base"),
                                                _number(spec.get("amplitude", 1.5), "params.channel.amplitude"),
                                                _number(spec.get("omega", 2.0), "params.channel.omega"))
    if kind == "tabulated":
        return channel.ChannelModel.tabulated(_number_list(spec.get("times"), "params.channel.times"),
                                              _number_list(spec.get("rates"), "params.channel.rates"))
    raise SchemaError("params.channel.kind", f"expected pure-loss, oscillating or tabulated, got {kind!r}")


def _run_channel(problem: ProblemFile) -> dict:
    params = problem.params
    if len(problem.states) != 2:
        raise SchemaError("states", "the channel task needs exactly two states")
    a, b = (_gaussian(s, f"states[{i}]") for i, s in enumerate(problem.states))
    model = _channel_model(params["channel"])
    gain = float(params["gain"] if problem.gains is None else problem.gains[0])
    if "times" in params:
        times = _number_list(params["times"], "params.times")
    else:
        n = int(round(_number(params["t_max"], "params.t_max") / _number(params["dt"], "params.dt")))
        times = list(np.linspace(0.0, n * params["dt"], n + 1))
    rows = channel.trajectory_table(a, b, gain, model, times)
    chi = np.array([r["chi_plain"] for r in rows])
    mask = channel.revival_mask(model, times)
    verdicts: Dict[str, Any] = {
        "markovian": model.markovian,
        "max_chi_plain": float(chi.max()),
        "revival_points": int(mask.sum()),
        "chi_positive_on_revivals": bool(np.all(chi[mask] > 0)) if mask.any() else None,
        "amplified_exceeds_plain": bool(all(r["D_amplified"] >= r["D_plain"] for r in rows)),
    }
    if "threshold" in params and model.constant_rate is not None:
        hz = channel.detection_horizon(a, b, gain, model, _number(params["threshold"], "params.threshold"))
        verdicts["horizon"] = hz
        verdicts["horizon_gap"] = hz.t_amplified - hz.t_plain
    return {"verdicts": verdicts, "tables": {"trajectory": rows},
            "csv": (rows, channel.TRAJECTORY_COLUMNS), "tolerances": {"dt": params.get("dt")}}


RUNNERS = {
    "feasibility": _run_feasibility,
    "synthesize": _run_synthesize,
    "classify": _run_classify,
    "theorem": _run_theorem,
    "gain-probability": _run_gain_probability,
    "homodyne": _run_homodyne,
    "channel": _run_channel,
}


def run_task(problem: ProblemFile, input_text: Optional[str] = None) -> Tuple[dict, Optional[str]]:
    """Dispatch a parsed problem.

    Returns:
        The report dictionary and, for tabular tasks, the CSV text.
    """
    body = RUNNERS[problem.task](problem)
    csv_spec = body.pop("csv", None)
    canonical = input_text if input_text is not None else dump_problem(problem)
    report = {
        "task": problem.task,
        "verdicts": body.pop("verdicts"),
        "tables": body.pop("tables", {}),
        "tolerances": body.pop("tolerances", {}),
        "warnings": body.pop("warnings", []),
        "params": problem.params,
        "provenance": {
            "input_sha256": hashlib.sha256(canonical.encode("utf-8")).hexdigest(),
            "seed": problem.params.get("seed"),
            "version": __version__,
        },
    }
    report.update(body)
    csv_text = table_to_csv(*csv_spec) if csv_spec is not None else None
    return report, csv_text

