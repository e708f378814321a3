"""Declarative experiment files and the staged measurement pipeline that runs them.

A scenario is JSON (see ``scenario.schema.json``). Running it walks the
stages in order, carrying one system state between them. A ``condition``
reduces the state and remembers the unreduced branch, so a later ``wait``
can mix the two according to the separation time.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from . import __version__
from .classical import monte_carlo
from .decision import (
    SeparationDynamics,
    exponential_decay,
    gaussian_decay,
    lift_evolution,
    lift_measure,
    mix_branches,
    reduce_in_factor,
)
from .errors import QdiceError
from .measurement import (
    MeasurementRecord,
    ProjectiveMeasure,
    fourier_basis,
    measure_from_basis,
    measure_from_subspaces,
    outcome_probabilities,
    standard_basis,
)
from .qdt import ProspectMeasure, calibrate_emotions, decompose, luce_utility, prior_prediction
from .spaces import CompositeSpace, compose
from .states import (
    DensityOperator,
    EvolutionModel,
    density,
    evolve,
    maximally_mixed,
    product_state,
    pure_state,
    uniform_superposition,
)
from .synchronous import conditional_tables, joint_probability, marginals

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_SEMANTIC = 4
EXIT_INVARIANT = 5

DEFAULT_TOL = 1e-10


class ScenarioError(QdiceError):
    exit_code = EXIT_SEMANTIC

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class ScenarioParseError(ScenarioError):
    exit_code = EXIT_PARSE

    def __init__(self, message, line=None, column=None, path=None):
        self.line, self.column, self.path = line, column, path
        where = f" at line {line}, column {column}" if line is not None else ""
        where += f" (at {path})" if path else ""
        super().__init__(f"{message}{where}")

    def to_dict(self):
        return {**super().to_dict(), "line": self.line, "column": self.column, "path": self.path}


class ScenarioSemanticError(ScenarioError):
    exit_code = EXIT_SEMANTIC

    def __init__(self, message, stage=None, op=None):
        self.stage, self.op = stage, op
        where = f"stage {stage} ({op}): " if stage is not None else ""
        super().__init__(f"{where}{message}")

    def to_dict(self):
        return {**super().to_dict(), "stage": self.stage, "op": self.op}


class InvariantViolation(ScenarioError):
    exit_code = EXIT_INVARIANT


def _schema() -> dict:
    return json.loads(resources.files("qdice").joinpath("scenario.schema.json").read_text())


def bundled_scenarios() -> dict[str, Path]:
    root = resources.files("qdice").joinpath("scenarios")
    return {Path(p.name).stem: Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")}


def resolve_path(name_or_path: str) -> Path:
    """A file path, or the name of a bundled scenario."""
    p = Path(name_or_path)
    if p.exists():
        return p
    bundled = bundled_scenarios()
    if name_or_path in bundled:
        return bundled[name_or_path]
    raise ScenarioParseError(f"no such scenario file: {name_or_path}")


# --- parsing helpers ---------------------------------------------------------

def _cnum(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def _cvec(v) -> np.ndarray:
    return np.array([_cnum(x) for x in v], dtype=complex)


def _cmat(m) -> np.ndarray:
    return np.array([[_cnum(x) for x in row] for row in m], dtype=complex)


def _encode(z) -> Any:
    """Complex arrays as nested [re, im] pairs."""
    a = np.asarray(z)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_encode(x) for x in a]


def _basis_vectors(desc, dim: int) -> list[np.ndarray]:
    if desc in ("Z", "standard"):
        return standard_basis(dim)
    if desc == "X":
        if dim != 2:
            raise ValueError("the X basis is defined for dimension 2 only; use 'fourier'")
        return fourier_basis(2)
    if desc == "fourier":
        return fourier_basis(dim)
    vecs = [_cvec(v) for v in desc]
    for v in vecs:
        if v.size != dim:
            raise ValueError(f"basis vector of length {v.size} for a factor of dim {dim}")
    return [v / np.linalg.norm(v) for v in vecs]


def _measure(stage: dict, dim: int) -> ProjectiveMeasure:
    labels = stage.get("outcomes")
    if "basis" in stage:
        return measure_from_basis(_basis_vectors(stage["basis"], dim), labels)
    if "subspaces" in stage:
        groups = [[_cvec(v) for v in g] for g in stage["subspaces"]]
        for g in groups:
            for v in g:
                if v.size != dim:
                    raise ValueError(f"subspace vector of length {v.size} for a factor of dim {dim}")
        return measure_from_subspaces(groups, labels)
    parts = stage["partition"]
    flat = sorted(i for part in parts for i in part)
    if flat != list(range(dim)):
        raise ValueError(f"partition must cover indices 0..{dim - 1} exactly once")
    eye = np.eye(dim, dtype=complex)
    return measure_from_subspaces([[eye[i] for i in part] for part in parts], labels)


def _state(desc: dict, space: CompositeSpace) -> DensityOperator:
    n = space.total_dim
    kind = desc["kind"]
    if kind == "uniform":
        return pure_state(uniform_superposition(n), space)
    if kind == "mixed":
        return maximally_mixed(n, space)
    if kind == "basis":
        if desc["index"] >= n:
            raise ValueError(f"basis index {desc['index']} out of range for dim {n}")
        return pure_state(np.eye(n)[desc["index"]], space)
    if kind == "pure":
        v = _cvec(desc["vector"])
        if v.size != n:
            raise ValueError(f"state vector has length {v.size}, space dimension is {n}")
        return pure_state(v, space)
    if kind == "density":
        m = _cmat(desc["matrix"])
        if m.shape != (n, n):
            raise ValueError(f"density matrix of shape {m.shape} for space dimension {n}")
        return density(m, space)
    factors = desc["factors"]
    if list(factors) != list(space.labels):
        raise ValueError(f"product factors {list(factors)} must list {list(space.labels)} in order")
    return product_state(
        [_state(factors[f.label], compose([(f.label, f.dim)])) for f in space.factors], space
    )


# --- compiled scenario -------------------------------------------------------

@dataclass
class Stage:
    index: int
    op: str
    raw: dict
    label: str | None = None
    measure: ProjectiveMeasure | None = None
    lifted: ProjectiveMeasure | None = None
    evolution: EvolutionModel | None = None
    duration: float = 0.0
    extra: dict = field(default_factory=dict)


@dataclass
class Scenario:
    version: int
    name: str
    space: CompositeSpace
    initial_state: DensityOperator
    stages: list[Stage]
    outputs: list[str]
    sha256: str
    tolerance: float = DEFAULT_TOL
    raw: dict = field(default_factory=dict, repr=False)


def parse_scenario(text: str, source: str = "<scenario>") -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(f"{source}: invalid JSON: {e.msg}", e.lineno, e.colno) from e
    err = best_match(Draft202012Validator(_schema()).iter_errors(data))
    if err is not None:
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ScenarioParseError(f"{source}: schema error: {err.message}", path=path)
    labels = [s["label"] for s in data["spaces"]]
    dupes = sorted({lab for lab in labels if labels.count(lab) > 1})
    if dupes:
        raise ScenarioParseError(f"{source}: schema error: duplicate factor labels {dupes}", path="spaces")
    return data


def compile_scenario(data: dict, text: str = "") -> Scenario:
    """Resolve labels, build states, measures and evolutions; no probabilities yet."""
    space = compose((s["label"], s["dim"]) for s in data["spaces"])
    try:
        rho0 = _state(data["initial_state"], space)
    except (ValueError, QdiceError) as e:
        raise ScenarioSemanticError(f"initial_state: {e}") from e

    stages = []
    last_measure: Stage | None = None
    have_table = False
    pending_branch = False
    for i, raw in enumerate(data["stages"]):
        op = raw["op"]
        st = Stage(i, op, raw)
        try:
            _compile_stage(st, space, last_measure, have_table, pending_branch)
        except ScenarioSemanticError:
            raise
        except (ValueError, KeyError, QdiceError) as e:
            msg = e.args[0] if isinstance(e, KeyError) and e.args else e
            raise ScenarioSemanticError(str(msg), i, op) from e
        if op == "measure":
            last_measure = st
            have_table = True
        elif op in ("joint", "qdt"):
            have_table = True
        elif op == "condition":
            pending_branch = True
        elif op == "wait":
            pending_branch = False
        stages.append(st)

    return Scenario(
        version=data["version"],
        name=data.get("name", "scenario"),
        space=space,
        initial_state=rho0,
        stages=stages,
        outputs=data.get("outputs", []),
        sha256=hashlib.sha256(text.encode()).hexdigest() if text else "",
        tolerance=data.get("tolerance", DEFAULT_TOL),
        raw=data,
    )


def _require_label(space: CompositeSpace, label: str):
    if label not in space:
        raise ValueError(f"unknown factor label {label!r} (declared: {list(space.labels)})")


def _compile_stage(st: Stage, space: CompositeSpace, last_measure, have_table, pending_branch):
    raw, op = st.raw, st.op
    if op == "measure":
        _require_label(space, raw["label"])
        st.label = raw["label"]
        st.measure = _measure(raw, space.dim_of(st.label))
        st.lifted = lift_measure(st.measure, space, st.label)
    elif op == "condition":
        if last_measure is None:
            raise ScenarioSemanticError("condition must follow a measure stage", st.index, op)
        labels = last_measure.measure.labels
        out = raw["outcome"]
        if isinstance(out, str):
            if out not in labels:
                raise ValueError(f"unknown outcome {out!r}; measure outcomes are {labels}")
            n = labels.index(out)
        else:
            if out >= len(labels):
                raise ValueError(f"outcome index {out} out of range for {len(labels)} outcomes")
            n = out
        st.label = last_measure.label
        st.measure = last_measure.measure
        st.lifted = last_measure.lifted
        st.extra["outcome"] = n
    elif op == "evolve":
        label = raw.get("label")
        if label is not None:
            _require_label(space, label)
        dim = space.dim_of(label) if label else space.total_dim
        if "unitary" in raw:
            ev = EvolutionModel.explicit(_cmat(raw["unitary"]))
            st.duration = float(raw.get("duration", 0.0))
        else:
            if len(raw["energies"]) != dim:
                raise ValueError(f"{len(raw['energies'])} energies for dimension {dim}")
            st.duration = float(raw["duration"])
            ev = EvolutionModel.diagonal_phase(raw["energies"], 0.0, st.duration)
        if ev.dim != dim:
            raise ValueError(f"evolution of dim {ev.dim} for dimension {dim}")
        st.label = label
        st.evolution = lift_evolution(ev, space, label) if label else ev
    elif op == "wait":
        if not pending_branch:
            raise ScenarioSemanticError("wait needs a preceding condition to relax", st.index, op)
        decay = gaussian_decay if raw.get("decay") == "gaussian" else exponential_decay
        st.extra["dynamics"] = SeparationDynamics(float(raw["tau"]), float(raw["t_rel"]), decay)
        st.duration = float(raw["tau"])
    elif op == "joint":
        la, lb = raw["labels"]
        if la == lb:
            raise ValueError("joint needs two distinct labels")
        for lab in (la, lb):
            _require_label(space, lab)
        st.extra["measures"] = [
            measure_from_basis(_basis_vectors(b, space.dim_of(lab)))
            for lab, b in zip((la, lb), raw["bases"])
        ]
    elif op == "qdt":
        _compile_qdt(st, space)
    elif op == "sample":
        if not have_table:
            raise ScenarioSemanticError("sample needs an earlier stage that produced probabilities",
                                        st.index, op)


def _compile_qdt(st: Stage, space: CompositeSpace):
    raw = st.raw
    if "subject" not in raw:
        if "utilities" in raw:
            f = luce_utility(raw["utilities"])
        else:
            f = np.asarray(raw["utility_fractions"], dtype=float)
        if len(raw["signs"]) != f.size:
            raise ValueError(f"{len(raw['signs'])} signs for {f.size} alternatives")
        exp = raw.get("experimental")
        if exp is not None and len(exp) != f.size:
            raise ValueError(f"{len(exp)} experimental values for {f.size} alternatives")
        st.extra.update(mode="prior", f=f)
        return
    subj, alt = raw["subject"], raw["label"]
    for lab in (subj, alt):
        _require_label(space, lab)
    if subj == alt:
        raise ValueError("subject and alternative factors must differ")
    if space.index_of(subj) > space.index_of(alt):
        raise ValueError("the subject factor must be declared before the alternative factor")
    basis = measure_from_basis(_basis_vectors(raw.get("basis", "standard"), space.dim_of(alt)))
    emotions = _cmat(raw["emotions"])
    if emotions.shape != (basis.outcome_count, space.dim_of(subj)):
        raise ValueError(
            f"emotions must be {basis.outcome_count} rows of length {space.dim_of(subj)}, "
            f"got shape {emotions.shape}"
        )
    pm = ProspectMeasure.from_amplitudes(emotions, basis, subject_label=subj, alternative_label=alt)
    st.extra.update(mode="state", prospects=pm, calibrate=raw.get("calibrate", "none"))


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ScenarioParseError(f"cannot read {path}: {e.strerror}") from e
    return compile_scenario(parse_scenario(text, str(path)), text)


# --- execution ---------------------------------------------------------------

@dataclass
class RunResult:
    scenario: str
    stages: list[dict]
    records: list[dict]
    provenance: dict
    states: list | None = None

    def to_dict(self) -> dict:
        out = {
            "scenario": self.scenario,
            "provenance": self.provenance,
            "stages": self.stages,
            "records": self.records,
        }
        if self.states is not None:
            out["states"] = self.states
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def tables(self):
        """Flat ``(stage, op, table, row, col, value)`` rows for CSV export."""
        for st in self.stages:
            for name, value in st.items():
                if name in ("index", "op", "label", "name") or not isinstance(value, list):
                    continue
                arr = np.asarray(value, dtype=object)
                if arr.ndim == 1 and all(isinstance(x, (int, float)) for x in value):
                    for r, x in enumerate(value):
                        yield st["index"], st["op"], name, r, "", x
                elif arr.ndim == 2 and all(isinstance(x, (int, float)) or x is None for x in arr.ravel()):
                    for r, row in enumerate(value):
                        for c, x in enumerate(row):
                            yield st["index"], st["op"], name, r, c, x


def _check_distribution(p, tol, what, index):
    p = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p < -tol) or np.any(p > 1 + tol) or abs(p.sum() - 1) > tol:
        raise InvariantViolation(f"stage {index}: {what} is not a probability distribution: {p.tolist()}")


def _floats(a) -> list:
    return [None if not np.isfinite(x) else float(x) for x in np.asarray(a, dtype=float).ravel()] \
        if np.asarray(a).ndim == 1 else [_floats(row) for row in a]


@dataclass
class _Pipeline:
    scenario: Scenario
    tol: float
    seed: int | None
    skip_sampling: bool
    rho: DensityOperator = None
    branches: tuple | None = None
    last_table: np.ndarray | None = None
    time: float = 0.0
    records: list = field(default_factory=list)

    def run_stage(self, st: Stage) -> dict | None:
        entry: dict[str, Any] = {"index": st.index, "op": st.op}
        if "name" in st.raw:
            entry["name"] = st.raw["name"]
        space, tol = self.scenario.space, self.tol

        if st.op == "measure":
            p = outcome_probabilities(self.rho, st.lifted)
            _check_distribution(p, tol, "outcome probabilities", st.index)
            entry.update(label=st.label, outcomes=[str(x) for x in st.measure.labels],
                         probabilities=_floats(p), time=self.time)
            self.last_table = p

        elif st.op == "condition":
            n = st.extra["outcome"]
            proj = st.measure[n]
            before = self.rho
            prob = float(np.trace(before.matrix @ st.lifted[n].matrix).real)
            reduced = reduce_in_factor(before, space, st.label, proj)
            rec = MeasurementRecord(st.measure.labels[n], self.time, min(max(prob, 0.0), 1.0))
            self.records.append({"outcome": str(rec.outcome_label), "label": st.label,
                                 "time": rec.time, "probability": rec.probability_at_observation})
            entry.update(label=st.label, outcome=str(st.measure.labels[n]), probability=prob)
            self.rho = reduced
            self.branches = (reduced, before)

        elif st.op == "evolve":
            self.rho = evolve(self.rho, st.evolution)
            if self.branches:
                self.branches = tuple(evolve(b, st.evolution) for b in self.branches)
            self.time += st.duration
            entry.update(label=st.label, duration=st.duration)

        elif st.op == "wait":
            dyn: SeparationDynamics = st.extra["dynamics"]
            reduced, unreduced = self.branches
            self.rho = mix_branches(reduced, unreduced, dyn.weight)
            self.branches = None
            self.time += st.duration
            entry.update(tau=dyn.tau, t_rel=dyn.t_rel, weight=dyn.weight)

        elif st.op == "joint":
            la, lb = st.raw["labels"]
            ma, mb = st.extra["measures"]
            jd = joint_probability(self.rho, space, (la, ma), (lb, mb))
            pa, pb = marginals(jd)
            a_given_b, b_given_a = conditional_tables(jd)
            _check_distribution(jd.table.ravel(), tol, "joint table", st.index)
            for col in range(a_given_b.shape[1]):
                if np.all(np.isfinite(a_given_b[:, col])):
                    _check_distribution(a_given_b[:, col], tol, f"p({la}|{lb}={col})", st.index)
            for row in range(b_given_a.shape[0]):
                if np.all(np.isfinite(b_given_a[row])):
                    _check_distribution(b_given_a[row], tol, f"p({lb}|{la}={row})", st.index)
            entry.update(labels=[la, lb], joint=_floats(jd.table),
                         marginal_a=_floats(pa), marginal_b=_floats(pb),
                         a_given_b=_floats(a_given_b), b_given_a=_floats(b_given_a))
            self.last_table = jd.table.ravel()

        elif st.op == "qdt":
            if st.extra["mode"] == "prior":
                exp = st.raw.get("experimental")
                rep = prior_prediction(st.extra["f"], st.raw["signs"], exp)
                f, q, p = rep.f, rep.q, rep.p
                if exp is not None:
                    entry.update(experimental=_floats(rep.p_exp), deviation=_floats(rep.deviation))
            else:
                pm: ProspectMeasure = st.extra["prospects"]
                rho = self.rho.marginal([pm.subject_label, pm.alternative_label])
                if st.extra["calibrate"] != "none":
                    pm = calibrate_emotions(rho, pm, st.extra["calibrate"])
                d = decompose(rho, pm, tol=max(tol, 1e-8))
                f, q, p = d.f, d.q, d.p
            _check_distribution(p, tol, "prospect probabilities", st.index)
            if np.any(f < -tol) or np.any(f > 1 + tol) or np.any(np.abs(q) > 1 + tol):
                raise InvariantViolation(f"stage {st.index}: utility/attraction terms out of bounds")
            entry.update(utility_fraction=_floats(f), attraction=_floats(q), probabilities=_floats(p))
            self.last_table = p

        elif st.op == "sample":
            if self.skip_sampling:
                return None
            seed = self.seed if self.seed is not None else st.raw["seed"]
            ref = np.clip(self.last_table, 0.0, 1.0)
            rep = monte_carlo(ref / ref.sum(), st.raw["trials"], seed, st.raw.get("workers", 1))
            entry.update(rep.to_dict())
        return entry


def run_scenario(scenario: Scenario, seed: int | None = None, tol: float | None = None,
                 dump_states: bool = False, skip_sampling: bool = False) -> RunResult:
    """Execute every stage in order.

    Numerical failures (conditioning on a null event, dimension mismatch)
    raise :class:`ScenarioSemanticError` with the stage index; a table that
    fails its normalization check raises :class:`InvariantViolation`.
    """
    tol = scenario.tolerance if tol is None else tol
    pipe = _Pipeline(scenario, tol, seed, skip_sampling, rho=scenario.initial_state)
    entries, states = [], []
    for st in scenario.stages:
        try:
            entry = pipe.run_stage(st)
        except InvariantViolation:
            raise
        except (ValueError, ArithmeticError, QdiceError) as e:
            raise ScenarioSemanticError(str(e), st.index, st.op) from e
        if entry is None:
            continue
        entries.append(entry)
        if dump_states:
            states.append({"index": st.index, "matrix": _encode(pipe.rho.matrix)})
    provenance = {
        "tool": "qdice",
        "version": __version__,
        "scenario_sha256": scenario.sha256,
        "seed_override": seed,
        "tolerance": tol,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return RunResult(scenario.name, entries, pipe.records, provenance,
                     states if dump_states else None)


def validate_scenario(path) -> Scenario:
    """Parse, schema-check and compile; then evaluate the analytic stages without sampling.

    Nothing is written. Raises the same errors :func:`run_scenario` would.
    """
    sc = load_scenario(path)
    run_scenario(sc, skip_sampling=True)
    return sc
