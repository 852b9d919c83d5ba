"""File formats: scenario JSON, stats / matrix / settlement CSVs, run manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .domain import Microgrid, Role, Scenario, stable_mask
from .fitness import cycles_consumed

STATS_COLUMNS = (
    "generation",
    "best_fitness",
    "mean_fitness",
    "diversity",
    "mutation_rate",
    "exploration_pct",
    "exploitation_pct",
    "stable_count_best",
)
SETTLEMENT_COLUMNS = ("id", "role", "initial_energy", "final_energy", "bt", "st", "stable", "cycles_consumed")
SWEEP_COLUMNS = ("config_id", "generations", "pop_size", "elite_size", "p_min", "fitness", "stable_count", "seconds")

_MG_KEYS = ("id", "energy", "bt", "st", "capacity", "cycles_remaining", "cycles_max")


class ScenarioFormatError(ValueError):
    pass


def fmt(x) -> str:
    """Nine significant digits; integers pass through unchanged."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


def atomic_write(path, data: str | bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "", "encoding": "utf-8"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- scenario --------------------------------------------------------------

def scenario_to_dict(scenario: Scenario, generator: dict | None = None) -> dict:
    mgs = []
    for mg in scenario.microgrids:
        rec = {
            "id": mg.id,
            "energy": mg.energy_initial,
            "bt": mg.bt,
            "st": mg.st,
            "capacity": mg.capacity,
            "cycles_remaining": mg.cycles_remaining,
            "cycles_max": mg.cycles_max,
        }
        if mg.role is not None:
            rec["role"] = mg.role.value
        mgs.append(rec)
    doc = {"thv": scenario.thv, "line_limit": scenario.line_limit, "microgrids": mgs}
    if generator is not None:
        doc["generator"] = generator
    return doc


def dumps_scenario(scenario: Scenario, generator: dict | None = None) -> str:
    return json.dumps(scenario_to_dict(scenario, generator), indent=2) + "\n"


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioFormatError("scenario document must be a JSON object")
    for key in ("thv", "line_limit", "microgrids"):
        if key not in doc:
            raise ScenarioFormatError(f"missing top-level key {key!r}")
    if not isinstance(doc["microgrids"], list):
        raise ScenarioFormatError("'microgrids' must be an array")
    mgs = []
    for k, rec in enumerate(doc["microgrids"]):
        missing = [key for key in _MG_KEYS if key not in rec]
        if missing:
            raise ScenarioFormatError(f"microgrid #{k} missing keys {missing}")
        role = rec.get("role")
        try:
            role = Role(role) if role is not None else None
            mgs.append(
                Microgrid(
                    id=rec["id"],
                    energy_initial=rec["energy"],
                    bt=rec["bt"],
                    st=rec["st"],
                    capacity=rec["capacity"],
                    cycles_remaining=rec["cycles_remaining"],
                    cycles_max=rec["cycles_max"],
                    role=role,
                )
            )
        except (ValueError, TypeError) as exc:
            raise ScenarioFormatError(f"microgrid #{k}: {exc}") from exc
    try:
        return Scenario(tuple(mgs), thv=doc["thv"], line_limit=doc["line_limit"])
    except (ValueError, TypeError) as exc:
        raise ScenarioFormatError(str(exc)) from exc


def write_scenario(path, scenario: Scenario, generator: dict | None = None) -> None:
    atomic_write(path, dumps_scenario(scenario, generator))


def read_scenario(path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}: invalid JSON ({exc})") from exc
    return scenario_from_dict(doc)


def read_generator_meta(path) -> dict | None:
    return json.loads(Path(path).read_text(encoding="utf-8")).get("generator")


def scenario_digest(scenario: Scenario) -> str:
    """SHA-256 over the canonical (role-free) scenario document."""
    doc = scenario_to_dict(scenario)
    for rec in doc["microgrids"]:
        rec.pop("role", None)
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


# -- CSV outputs -----------------------------------------------------------

def _csv(rows, header=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def stats_csv(stats) -> str:
    return _csv(([fmt(getattr(s, c)) for c in STATS_COLUMNS] for s in stats), STATS_COLUMNS)


def matrix_csv(matrix: np.ndarray) -> str:
    return _csv([repr(float(x)) for x in row] for row in np.asarray(matrix))


def read_matrix_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        return np.array([[float(x) for x in row] for row in csv.reader(fh)], dtype=np.float64)


def settlement_csv(scenario: Scenario, adjusted: np.ndarray, finals: np.ndarray) -> str:
    stable = stable_mask(scenario, finals)
    cycles = cycles_consumed(scenario, adjusted)
    rows = (
        [str(i), role.value, fmt(mg.energy_initial), fmt(finals[i]), fmt(mg.bt), fmt(mg.st),
         fmt(bool(stable[i])), fmt(cycles[i])]
        for i, (mg, role) in enumerate(zip(scenario.microgrids, scenario.roles))
    )
    return _csv(rows, SETTLEMENT_COLUMNS)


def sweep_csv(rows: list[dict]) -> str:
    return _csv(([fmt(r[c]) if c != "config_id" else r[c] for c in SWEEP_COLUMNS] for r in rows), SWEEP_COLUMNS)


def write_json(path, obj) -> None:
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
