"""Problem-instance registry: family schemas, JSON loading, validation.

Instances are grouped into five families, each identified by a descriptor
string like ``condensedmatter/tfim``.  A family schema fixes the parameter
names and types, the default wall-clock budget and tolerance, the Hamiltonian
convention text embedded in prompts, and the label of the single number a
solver script must print.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

DEFAULT_ABS_TOL = 1e-2
DEFAULT_REL_TOL = 1e-3
DEFAULT_TIMEOUT_S = 300.0
HUBBARD_TIMEOUT_S = 3000.0


class RegistryError(ValueError):
    """Base class for instance-file problems."""


class UnknownFamilyError(RegistryError):
    def __init__(self, descriptor: str) -> None:
        super().__init__(f"unknown family descriptor: {descriptor!r}")
        self.descriptor = descriptor


class SchemaViolationError(RegistryError):
    def __init__(self, instance_id: str, violations: list[str]) -> None:
        joined = "; ".join(violations)
        super().__init__(f"instance {instance_id!r}: {joined}")
        self.instance_id = instance_id
        self.violations = list(violations)


@dataclass(frozen=True)
class Tolerance:
    """Pass iff |observed - reference| <= max(absolute, relative * |reference|)."""

    absolute: float = DEFAULT_ABS_TOL
    relative: float = DEFAULT_REL_TOL

    def __post_init__(self) -> None:
        if self.absolute < 0 or self.relative < 0:
            raise ValueError("tolerances must be non-negative")

    def admits(self, observed: float, reference: float) -> bool:
        return abs(observed - reference) <= max(
            self.absolute, self.relative * abs(reference)
        )


@dataclass(frozen=True)
class FamilySchema:
    descriptor: str
    title: str
    required_params: tuple[tuple[str, type], ...]
    optional_params: tuple[tuple[str, type], ...] = ()
    default_timeout_s: float = DEFAULT_TIMEOUT_S
    convention: str = ""
    expected_output_label: str = "result"

    @property
    def short_name(self) -> str:
        return self.descriptor.rsplit("/", 1)[-1]

    def param_names(self) -> set[str]:
        return {k for k, _ in self.required_params} | {
            k for k, _ in self.optional_params
        }


FAMILIES: dict[str, FamilySchema] = {
    schema.descriptor: schema
    for schema in (
        FamilySchema(
            descriptor="condensedmatter/tfim",
            title="Transverse-field Ising chain",
            required_params=(("L", int), ("J", float), ("h", float)),
            convention=(
                "H = -J * sum_i Z_i Z_{i+1} - h * sum_i X_i on an open chain of "
                "L sites (qubit i is site i)."
            ),
            expected_output_label="ground-state energy",
        ),
        FamilySchema(
            descriptor="condensedmatter/hubbard",
            title="One-dimensional Fermi-Hubbard chain",
            required_params=(("L", int), ("t", float), ("U", float)),
            optional_params=(("n_up", int), ("n_down", int)),
            default_timeout_s=HUBBARD_TIMEOUT_S,
            convention=(
                "H = -t * sum over neighbouring sites i,j and spins s of "
                "(c^dag_{i,s} c_{j,s} + h.c.) + U * sum_i n_{i,up} n_{i,down} "
                "on an open chain of L sites at half filling (N = L electrons, "
                "Sz = 0 unless n_up/n_down say otherwise)."
            ),
            expected_output_label="ground-state energy",
        ),
        FamilySchema(
            descriptor="optimization/maxcut",
            title="Weighted MaxCut",
            required_params=(("n_vertices", int), ("edges", list)),
            convention=(
                "Undirected graph; edges are (u, v, weight) triples with "
                "0-based vertex labels.  The answer is the total weight of "
                "edges crossing the best bipartition."
            ),
            expected_output_label="maximum cut weight",
        ),
        FamilySchema(
            descriptor="gauge/schwinger",
            title="Lattice Schwinger model quench",
            required_params=(
                ("L", int),
                ("h_hop", float),
                ("g", float),
                ("m", float),
                ("T", float),
            ),
            convention=(
                "Staggered fermions on an open chain of L (even) sites after "
                "Jordan-Wigner and Gauss-law elimination: H = h_hop * "
                "sum_n (sp_n sm_{n+1} + h.c.) + (m/2) * sum_n (-1)^n Z_n + "
                "g * sum_{n<L-1} E_n^2 with E_n = sum_{k<=n} (Z_k + (-1)^k)/2.  "
                "Start from the staggered vacuum (odd sublattice empty, i.e. "
                "qubit n in |1> for even n) and evolve for time T.  Report the "
                "mean particle number (1/L) * sum_n ((-1)^n <Z_n> + 1)/2 at "
                "time T."
            ),
            expected_output_label="mean particle number at time T",
        ),
        FamilySchema(
            descriptor="chem/h2",
            title="Hydrogen molecule ground state (STO-3G)",
            required_params=(("bond_length", float),),
            optional_params=(("integrals_path", str),),
            convention=(
                "Molecular electronic-structure Hamiltonian in the STO-3G "
                "minimal basis; integrals are provided in FCIDUMP format "
                "(chemist notation).  The answer is the non-relativistic "
                "electronic ground-state energy including nuclear repulsion, "
                "in Hartree."
            ),
            expected_output_label="ground-state energy in Hartree",
        ),
    )
}


@dataclass(frozen=True)
class ProblemInstance:
    instance_id: str
    descriptor: str
    params: Mapping[str, Any]
    tolerance: Tolerance = field(default_factory=Tolerance)
    timeout_s: float = DEFAULT_TIMEOUT_S

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", dict(self.params))

    @property
    def family(self) -> FamilySchema:
        schema = FAMILIES.get(self.descriptor)
        if schema is None:
            raise UnknownFamilyError(self.descriptor)
        return schema

    def content_hash(self) -> str:
        payload = json.dumps(
            {
                "descriptor": self.descriptor,
                "params": self.params,
                "tolerance": [self.tolerance.absolute, self.tolerance.relative],
                "timeout_s": self.timeout_s,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "descriptor": self.descriptor,
            "params": dict(self.params),
            "tolerance": {
                "absolute": self.tolerance.absolute,
                "relative": self.tolerance.relative,
            },
            "timeout_s": self.timeout_s,
        }


def _type_ok(value: Any, expected: type) -> bool:
    if expected is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if expected is int:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, expected)


def validate(instance: ProblemInstance) -> list[str]:
    """Collect schema violations; an empty list means the instance is sound."""
    violations: list[str] = []
    schema = FAMILIES.get(instance.descriptor)
    if schema is None:
        return [f"unknown descriptor {instance.descriptor!r}"]
    params = instance.params
    for key, expected in schema.required_params:
        if key not in params:
            violations.append(f"missing required parameter {key!r}")
        elif not _type_ok(params[key], expected):
            violations.append(
                f"parameter {key!r} has type {type(params[key]).__name__}, "
                f"expected {expected.__name__}"
            )
    optional = dict(schema.optional_params)
    for key, value in params.items():
        if key in dict(schema.required_params):
            continue
        if key not in optional:
            violations.append(f"unknown parameter {key!r}")
        elif value is not None and not _type_ok(value, optional[key]):
            violations.append(
                f"parameter {key!r} has type {type(value).__name__}, "
                f"expected {optional[key].__name__}"
            )
    if instance.timeout_s <= 0:
        violations.append("timeout_s must be positive")
    violations.extend(_family_specific_checks(instance, schema))
    return violations


def _family_specific_checks(
    instance: ProblemInstance, schema: FamilySchema
) -> list[str]:
    params = instance.params
    out: list[str] = []
    L = params.get("L")
    if "L" in dict(schema.required_params) and isinstance(L, int) and L < 1:
        out.append("parameter 'L' must be >= 1")
    if schema.descriptor == "gauge/schwinger" and isinstance(L, int):
        if L < 2 or L % 2 != 0:
            out.append("parameter 'L' must be even and >= 2")
    if schema.descriptor == "optimization/maxcut":
        n = params.get("n_vertices")
        edges = params.get("edges")
        if isinstance(n, int) and isinstance(edges, list):
            try:
                from .maxcut import WeightedGraph

                WeightedGraph(n, tuple(tuple(e) for e in edges))
            except (ValueError, TypeError) as exc:
                out.append(f"parameter 'edges' invalid: {exc}")
    if schema.descriptor == "chem/h2":
        bl = params.get("bond_length")
        if isinstance(bl, (int, float)) and bl <= 0:
            out.append("parameter 'bond_length' must be positive")
    return out


def _build_instance(entry: dict, position: int) -> ProblemInstance:
    if not isinstance(entry, dict):
        raise RegistryError(f"instance #{position} is not an object")
    instance_id = entry.get("instance_id")
    if not isinstance(instance_id, str) or not instance_id:
        raise RegistryError(f"instance #{position}: missing or empty 'instance_id'")
    descriptor = entry.get("descriptor")
    if not isinstance(descriptor, str):
        raise SchemaViolationError(instance_id, ["missing 'descriptor'"])
    schema = FAMILIES.get(descriptor)
    if schema is None:
        raise UnknownFamilyError(descriptor)
    params = entry.get("params")
    if not isinstance(params, dict):
        raise SchemaViolationError(instance_id, ["missing 'params' object"])
    tol_entry = entry.get("tolerance", {})
    if not isinstance(tol_entry, dict):
        raise SchemaViolationError(instance_id, ["'tolerance' must be an object"])
    extra_tol = set(tol_entry) - {"absolute", "relative"}
    if extra_tol:
        raise SchemaViolationError(
            instance_id, [f"unknown tolerance key {sorted(extra_tol)[0]!r}"]
        )
    tolerance = Tolerance(
        absolute=float(tol_entry.get("absolute", DEFAULT_ABS_TOL)),
        relative=float(tol_entry.get("relative", DEFAULT_REL_TOL)),
    )
    timeout_s = float(entry.get("timeout_s", schema.default_timeout_s))
    known_keys = {"instance_id", "descriptor", "params", "tolerance", "timeout_s"}
    unknown = set(entry) - known_keys
    if unknown:
        raise SchemaViolationError(
            instance_id, [f"unknown field {sorted(unknown)[0]!r}"]
        )
    instance = ProblemInstance(instance_id, descriptor, params, tolerance, timeout_s)
    violations = validate(instance)
    if violations:
        raise SchemaViolationError(instance_id, violations)
    return instance


def load_instances(path: str) -> list[ProblemInstance]:
    """Load and validate an instance file; raises on the first violation."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise RegistryError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or "instances" not in doc:
        raise RegistryError(f"{path}: expected an object with an 'instances' list")
    entries = doc["instances"]
    if not isinstance(entries, list):
        raise RegistryError(f"{path}: 'instances' must be a list")
    instances = [_build_instance(e, i) for i, e in enumerate(entries)]
    ids = [inst.instance_id for inst in instances]
    dupes = {x for x in ids if ids.count(x) > 1}
    if dupes:
        raise RegistryError(f"{path}: duplicate instance_id {sorted(dupes)[0]!r}")
    return instances


def default_instances_path() -> str:
    import importlib.resources

    return str(
        importlib.resources.files("qsage") / "data" / "instances" / "default_campaign.json"
    )
