"""Sandboxed execution of generated solver scripts.

Each run gets a fresh working directory, a process group of its own, a
wall-clock timeout, an address-space cap, a minimal allowlisted environment,
and (where the platform permits) an empty network namespace.  Whatever
happens, the entire process tree is killed before control returns, so no run
leaves orphans behind.

Output contract: solver scripts report their answer on a line of the form
``RESULT: <float>``; the last such line wins.  A lenient fallback (last
parseable float token anywhere in stdout) exists for exploratory runs and is
off by default.
"""

from __future__ import annotations

import ctypes
import math
import os
import re
import resource
import shutil
import signal
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from typing import Optional

DEFAULT_TIMEOUT_S = 300.0
DEFAULT_MEMORY_BYTES = 8 * 1024 ** 3
DEFAULT_ENV_ALLOWLIST = ("PATH", "HOME", "LANG", "LC_ALL", "TMPDIR", "PYTHONPATH")
SCRIPT_FILENAME = "solver.py"

_CLONE_NEWNET = 0x40000000


class InterpreterNotFoundError(RuntimeError):
    """Infrastructure error: the configured interpreter is not runnable."""


@dataclass(frozen=True)
class RunSpec:
    script: str
    interpreter: tuple[str, ...] = (sys.executable,)
    timeout_s: float = DEFAULT_TIMEOUT_S
    memory_bytes: int = DEFAULT_MEMORY_BYTES
    env_allowlist: tuple[str, ...] = DEFAULT_ENV_ALLOWLIST
    workdir: Optional[str] = None
    isolate_network: bool = True

    def __post_init__(self) -> None:
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
        if self.memory_bytes <= 0:
            raise ValueError("memory_bytes must be positive")
        if not self.interpreter:
            raise ValueError("interpreter command line must be non-empty")


@dataclass(frozen=True)
class ExecutionResult:
    """Captured outcome of one sandboxed run.

    ``exit_status`` is None when the process was killed (timeout); streams
    are captured even then.
    """

    exit_status: Optional[int]
    stdout: str
    stderr: str
    duration_s: float
    timed_out: bool
    network_isolated: bool = False


_unshare_works: Optional[bool] = None


def _probe_unshare() -> bool:
    """Check once whether this process may create network namespaces."""
    global _unshare_works
    if _unshare_works is None:
        pid = os.fork()
        if pid == 0:
            try:
                libc = ctypes.CDLL(None, use_errno=True)
                os._exit(0 if libc.unshare(_CLONE_NEWNET) == 0 else 1)
            except Exception:
                os._exit(1)
        _, status = os.waitpid(pid, 0)
        _unshare_works = os.waitstatus_to_exitcode(status) == 0
    return _unshare_works


def _child_setup(memory_bytes: int, drop_network: bool):
    def setup() -> None:
        resource.setrlimit(resource.RLIMIT_AS, (memory_bytes, memory_bytes))
        if drop_network:
            libc = ctypes.CDLL(None, use_errno=True)
            if libc.unshare(_CLONE_NEWNET) != 0:
                raise OSError(ctypes.get_errno(), "unshare(CLONE_NEWNET) failed")

    return setup


def run_script(spec: RunSpec) -> ExecutionResult:
    """Execute a solver script under the sandbox contract.

    The script is written into the working directory and run with the
    configured interpreter.  On timeout the whole process group receives
    SIGKILL and the result is flagged ``timed_out``.  The group is killed
    again unconditionally before returning, and a temporary working
    directory is removed (caller-supplied directories are kept).
    """
    owns_workdir = spec.workdir is None
    workdir = tempfile.mkdtemp(prefix="qsage-run-") if owns_workdir else spec.workdir
    os.makedirs(workdir, exist_ok=True)
    script_path = os.path.join(workdir, SCRIPT_FILENAME)
    with open(script_path, "w", encoding="utf-8") as fh:
        fh.write(spec.script)

    env = {k: os.environ[k] for k in spec.env_allowlist if k in os.environ}
    env["PYTHONUNBUFFERED"] = "1"
    drop_network = spec.isolate_network and _probe_unshare()

    proc = None
    start = time.monotonic()
    try:
        try:
            proc = subprocess.Popen(
                list(spec.interpreter) + [script_path],
                cwd=workdir,
                env=env,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                errors="replace",
                start_new_session=True,
                preexec_fn=_child_setup(spec.memory_bytes, drop_network),
            )
        except FileNotFoundError as exc:
            raise InterpreterNotFoundError(
                f"interpreter not found: {spec.interpreter[0]!r}"
            ) from exc
        timed_out = False
        try:
            stdout, stderr = proc.communicate(timeout=spec.timeout_s)
        except subprocess.TimeoutExpired:
            timed_out = True
            _kill_group(proc.pid)
            stdout, stderr = proc.communicate()
        duration = time.monotonic() - start
        exit_status: Optional[int] = None if timed_out else proc.returncode
        return ExecutionResult(
            exit_status=exit_status,
            stdout=stdout,
            stderr=stderr,
            duration_s=duration,
            timed_out=timed_out,
            network_isolated=drop_network,
        )
    finally:
        if proc is not None:
            _kill_group(proc.pid)
        if owns_workdir:
            shutil.rmtree(workdir, ignore_errors=True)


def _kill_group(pid: int) -> None:
    try:
        os.killpg(pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        pass


@dataclass(frozen=True)
class ParseFailure:
    reason: str


_RESULT_LINE = re.compile(r"^\s*RESULT:\s*(\S+)\s*$")
_FLOAT_TOKEN = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")


def parse_result(stdout: str, lenient: bool = False) -> float | ParseFailure:
    """Extract the reported value from stdout under the output contract.

    The last ``RESULT: <float>`` line wins; lines whose token is not a float
    do not match the contract and are skipped.  Non-finite values are
    rejected.  In lenient mode (off by default) the last float token
    anywhere in stdout is used when no sentinel line exists.
    """
    value: Optional[float] = None
    for line in stdout.splitlines():
        match = _RESULT_LINE.match(line)
        if not match:
            continue
        try:
            value = float(match.group(1))
        except ValueError:
            continue
    if value is not None:
        if not math.isfinite(value):
            return ParseFailure(f"non-finite value {value!r}")
        return value
    if lenient:
        tokens = _FLOAT_TOKEN.findall(stdout)
        if tokens:
            return float(tokens[-1])
        return ParseFailure("no parseable float in stdout (lenient mode)")
    return ParseFailure("no RESULT line")
