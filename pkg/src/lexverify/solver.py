"""Child-process supervision for SMT-LIB 2 solvers.

One process per check: write the full script to stdin, close it, read stdout
to end.  No persistent sessions — cases are small and isolation keeps the
repair loop and concurrent checks trivially safe.  The backend defaults to
the bundled reference solver but any conformant executable can be supplied
via ``--solver`` / the ``LEXV_SOLVER`` environment variable.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import sys
import time
from dataclasses import dataclass

from . import refsolver
from .smtlib import ProtocolError, SmtScript, SolverReply, UNSAT, parse_reply

SOLVER_ENV_VAR = "LEXV_SOLVER"
DEFAULT_TIMEOUT_MS = 10_000


class SolverTimeout(RuntimeError):
    """Solver exceeded its wall-clock budget and was killed; distinct from an
    UNKNOWN verdict.  May carry the best certified bound from an optimization."""

    def __init__(self, timeout_ms: float, best_bound: int | None = None):
        super().__init__(f"solver timed out after {timeout_ms} ms")
        self.timeout_ms = timeout_ms
        self.best_bound = best_bound


class SolverCrash(RuntimeError):
    def __init__(self, exit_code: int | None, stderr: str):
        excerpt = stderr.strip()[:400]
        super().__init__(f"solver crashed (exit {exit_code}): {excerpt}")
        self.exit_code = exit_code
        self.stderr = excerpt


class CoreUnsupported(RuntimeError):
    """The configured solver ignores :produce-unsat-cores; core-dependent
    operations refuse to run against it."""


@dataclass(frozen=True)
class SolverConfig:
    executable: str
    args: tuple[str, ...] = ()
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    memory_mb: int | None = None

    def argv(self) -> list[str]:
        return [self.executable, *self.args]


@dataclass(frozen=True)
class SolverCapabilities:
    version: str
    supports_cores: bool


def default_config(timeout_ms: int = DEFAULT_TIMEOUT_MS) -> SolverConfig:
    """LEXV_SOLVER if set (split shell-style), else the bundled solver run as
    a child interpreter."""
    env = os.environ.get(SOLVER_ENV_VAR)
    if env:
        parts = shlex.split(env)
        return SolverConfig(executable=parts[0], args=tuple(parts[1:]),
                            timeout_ms=timeout_ms)
    return SolverConfig(executable=sys.executable,
                        args=("-S", "-E", refsolver.__file__),
                        timeout_ms=timeout_ms)


def config_from_path(path: str | None, timeout_ms: int = DEFAULT_TIMEOUT_MS) -> SolverConfig:
    if not path:
        return default_config(timeout_ms)
    parts = shlex.split(path)
    return SolverConfig(executable=parts[0], args=tuple(parts[1:]), timeout_ms=timeout_ms)


def _run_process(text: str, cfg: SolverConfig) -> tuple[str, str, int | None]:
    preexec = None
    if cfg.memory_mb is not None:
        import resource

        cap = cfg.memory_mb * 1024 * 1024

        def preexec():  # pragma: no cover - exercised only with a cap set
            resource.setrlimit(resource.RLIMIT_AS, (cap, cap))

    try:
        proc = subprocess.Popen(
            cfg.argv(), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.PIPE, text=True, preexec_fn=preexec)
    except OSError as exc:
        raise SolverCrash(None, str(exc)) from exc
    try:
        stdout, stderr = proc.communicate(input=text, timeout=cfg.timeout_ms / 1000.0)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.wait()
        raise SolverTimeout(cfg.timeout_ms) from None
    return stdout, stderr, proc.returncode


def run_check(script: SmtScript, cfg: SolverConfig) -> SolverReply:
    """Run one script to completion and parse the reply; wall time is recorded
    on the reply."""
    start = time.monotonic()
    stdout, stderr, code = _run_process(script.text, cfg)
    elapsed_ms = (time.monotonic() - start) * 1000.0
    try:
        reply = parse_reply(stdout, script)
    except ProtocolError:
        if code not in (0, None):
            raise SolverCrash(code, stderr or stdout) from None
        raise
    return SolverReply(status=reply.status, model=reply.model, core=reply.core,
                       raw=reply.raw, elapsed_ms=elapsed_ms)


_PROBE_SCRIPT = """(set-logic QF_LIRA)
(set-option :produce-unsat-cores true)
(declare-const probe_p Bool)
(assert (! probe_p :named probe_a))
(assert (! (not probe_p) :named probe_b))
(check-sat)
(get-unsat-core)
(get-info :version)
"""


def probe_solver(cfg: SolverConfig) -> SolverCapabilities:
    """Send a trivially unsatisfiable two-assertion script and report whether
    the backend produces cores, plus its version string if it names one."""
    stdout, stderr, code = _run_process(_PROBE_SCRIPT, cfg)
    if not stdout.strip():
        raise SolverCrash(code, stderr or "no output from probe")
    lines = stdout.splitlines()
    supports = False
    version = ""
    if any(line.strip() == UNSAT for line in lines):
        for line in lines:
            stripped = line.strip()
            if stripped.startswith("(") and "probe_a" in stripped and "error" not in stripped:
                supports = True
    for line in lines:
        if ":version" in line:
            start = line.find('"')
            end = line.rfind('"')
            if 0 <= start < end:
                version = line[start + 1:end]
    return SolverCapabilities(version=version, supports_cores=supports)


def require_cores(cfg: SolverConfig) -> None:
    caps = probe_solver(cfg)
    if not caps.supports_cores:
        raise CoreUnsupported(
            "configured solver does not produce unsat cores; "
            "core-dependent checks (illegality, illegal-term enumeration) need one")
