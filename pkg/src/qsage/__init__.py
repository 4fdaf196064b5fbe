"""QSAGE: an execution-based harness for LLM-generated quantum solver scripts.

The package couples classical reference solvers for five scientific problem
families (transverse-field Ising chains, Fermi-Hubbard chains, weighted
MaxCut, lattice Schwinger quenches, and molecular FCI) with a
generate-execute-verify-iterate loop: a model writes a solver script, the
script runs in a sandbox, its numeric output is checked against the
reference within tolerance, and failures feed back into the next prompt.
Campaign results are persisted per episode and analysed with success@t,
Mann-Whitney U tests, Vargha-Delaney effect sizes, and a rule-based
failure-cause taxonomy.
"""

__version__ = "0.1.0"

from .adjudicate import FailureCause, Verdict, classify, verify
from .episodes import CampaignConfig, EpisodeRecord, TurnRecord, run_campaign, run_episode
from .gateway import GenerationResult, ModelConfig, extract_code
from .pauli import PauliString, PauliSum, StateVector
from .reference import ReferenceResult, solve_reference
from .registry import ProblemInstance, Tolerance, load_instances
from .runner import ExecutionResult, RunSpec, parse_result, run_script

__all__ = [
    "CampaignConfig",
    "EpisodeRecord",
    "ExecutionResult",
    "FailureCause",
    "GenerationResult",
    "ModelConfig",
    "PauliString",
    "PauliSum",
    "ProblemInstance",
    "ReferenceResult",
    "RunSpec",
    "StateVector",
    "Tolerance",
    "TurnRecord",
    "Verdict",
    "classify",
    "extract_code",
    "load_instances",
    "parse_result",
    "run_campaign",
    "run_episode",
    "run_script",
    "solve_reference",
    "verify",
    "__version__",
]
