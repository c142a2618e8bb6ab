"""Attack campaigns, baselines and JSON reports.

Reports are plain dicts tagged ``report-v1``.  Trial ``i`` of a campaign with
seed ``s`` always runs on ``numpy.random.default_rng([s, i])``, so a report is
reproducible bit-for-bit from its config regardless of ``jobs``.  Wall-clock
timings are left out unless ``timing`` is requested.
"""

from __future__ import annotations

import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .attacks import (CASE_SCHEME, COPA_FAMILY_CASES, CaseId, birthday_baseline, build_target,
                      check_identity, domain_width, make_case, make_instance, run_attack)
from .blocks import BlockString
from .marble import MarbleVersion, TauProfile
from .simon import COLLAPSE_MAX_M, STATEVECTOR_MAX_M

REPORT_VERSION = "report-v1"
FAILURE_BASE = 0.6454
SEED_ENV = "SIMONFORGE_SEED"

DEFAULT_CASE = {
    "copa": CaseId.COPA_NOAD_D1,
    "aes-copa-v1": CaseId.V1_D2,
    "aes-copa-v2": CaseId.V2_D1_FRAC,
    "marble": CaseId.MARBLE_L,
}
BACKEND_CAPACITY = {"statevector": STATEVECTOR_MAX_M, "collapse": COLLAPSE_MAX_M}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scheme: str = "copa"
    case_id: str = CaseId.COPA_NOAD_D1.value
    n: int = 16
    c: int = 4
    backend: str = "collapse"
    trials: int = 1
    seed: int = 0
    tau_profile: str = TauProfile.ZERO.value
    marble_version: str = MarbleVersion.V1_2.value
    output: str | None = None
    jobs: int = 1
    threshold: float = 0.95
    timing: bool = False

    def validated(self, need_backend: bool = True) -> "RunConfig":
        try:
            cid = CaseId(self.case_id)
        except ValueError:
            raise ConfigError(f"unknown case {self.case_id!r}") from None
        if CASE_SCHEME[cid] != self.scheme:
            raise ConfigError(f"case {cid.value} belongs to scheme {CASE_SCHEME[cid]}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.c < 1:
            raise ConfigError("c must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        TauProfile(self.tau_profile)
        MarbleVersion(self.marble_version)
        if need_backend:
            if self.backend not in BACKEND_CAPACITY:
                raise ConfigError(f"unknown backend {self.backend!r}")
            m = self.n + 1 if cid in (CaseId.COPA_AD_FULL, CaseId.COPA_AD_PARTIAL) else self.n
            if m > BACKEND_CAPACITY[self.backend]:
                raise ConfigError(f"{self.backend} backend cannot simulate m={m} input qubits")
        return self


def config_for(scheme: str | None = None, case: str | None = None, **kw) -> RunConfig:
    """Fill in scheme/case from each other."""
    if case is None:
        scheme = scheme or "copa"
        if scheme not in DEFAULT_CASE:
            raise ConfigError(f"unknown scheme {scheme!r}")
        case = DEFAULT_CASE[scheme].value
    try:
        cid = CaseId(case)
    except ValueError:
        raise ConfigError(f"unknown case {case!r}") from None
    scheme = scheme or CASE_SCHEME[cid]
    return RunConfig(scheme=scheme, case_id=cid.value, **kw)


def seed_from_env(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env, 0)
    return int(np.random.SeedSequence().entropy % (2 ** 64))


def success_bound(n: int, c: int) -> float:
    """``1 - 2^n * 0.6454^(c n)``, clamped to [0, 1]."""
    log_fail = n * math.log(2) + c * n * math.log(FAILURE_BASE)
    return min(1.0, max(0.0, 1.0 - math.exp(log_fail)))


def _hex(v):
    return None if v is None else hex(v)


def _trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _setup(cfg: RunConfig, rng):
    cid = CaseId(cfg.case_id)
    key = int.from_bytes(rng.bytes((cfg.n + 7) // 8), "big") >> (-cfg.n % 8)
    inst = make_instance(cid, cfg.n, key, cfg.tau_profile, cfg.marble_version)
    return inst, make_case(cid, cfg.n, rng)


def attack_trial(cfg: RunConfig, index: int) -> dict:
    rng = _trial_rng(cfg.seed, index)
    inst, case = _setup(cfg, rng)
    rep, forgery = run_attack(inst, case, cfg.c, cfg.backend, rng)
    row = {
        "trial": index,
        "trial_seed": [cfg.seed, index],
        "case": rep.case_id,
        "width": rep.width,
        "recovered_period": _hex(rep.recovered_period),
        "expected_period": _hex(rep.expected_period),
        "period_correct": rep.recovered_period is not None
        and rep.recovered_period == rep.expected_period,
        "quantum_queries": rep.quantum_queries,
        "verification_queries": rep.verification_queries,
        "forgery_queries": rep.forgery_queries,
        "attempts": rep.attempts,
        "status": rep.status,
        "forgery_verified": bool(forgery and forgery.verified),
        "success": rep.success,
    }
    if rep.recovered_L is not None:
        row["recovered_L"] = _hex(rep.recovered_L)
        row["L_correct"] = bool(rep.extra.get("L_correct"))
    if cfg.timing:
        row["wall_time"] = rep.wall_time
    return row


def baseline_trial(cfg: RunConfig, index: int) -> dict:
    rng = _trial_rng(cfg.seed, index)
    inst, case = _setup(cfg, rng)
    rep = birthday_baseline(inst, case, rng)
    row = {
        "trial": index,
        "trial_seed": [cfg.seed, index],
        "case": rep.case_id,
        "width": rep.width,
        "recovered_period": _hex(rep.recovered_period),
        "expected_period": _hex(rep.expected_period),
        "classical_queries": rep.extra["classical_queries"],
        "first_collision_at": rep.extra["first_collision_at"],
        "success": rep.success,
    }
    if cfg.timing:
        row["wall_time"] = rep.wall_time
    return row


def _run_trials(fn, cfg: RunConfig) -> list[dict]:
    if cfg.jobs == 1 or cfg.trials == 1:
        return [fn(cfg, i) for i in range(cfg.trials)]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(fn, [cfg] * cfg.trials, range(cfg.trials)))


def _config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d.pop("output")
    d.pop("jobs")
    d.pop("timing")
    return d


def _aggregate_attack(trials: list[dict]) -> dict:
    q = [t["quantum_queries"] for t in trials]
    return {
        "trials": len(trials),
        "success_rate": sum(t["success"] for t in trials) / len(trials),
        "period_rate": sum(t["period_correct"] for t in trials) / len(trials),
        "quantum_queries": {"min": min(q), "max": max(q), "median": statistics.median(q)},
        "verification_queries": sum(t["verification_queries"] for t in trials),
        "forgery_queries": sum(t["forgery_queries"] for t in trials),
    }


def cmd_attack(cfg: RunConfig) -> dict:
    cfg = cfg.validated()
    trials = _run_trials(attack_trial, cfg)
    report = {
        "version": REPORT_VERSION,
        "command": "attack",
        "config": _config_dict(cfg),
        "trials": trials,
        "aggregate": _aggregate_attack(trials),
        "bound": success_bound(cfg.n, cfg.c),
    }
    report["passed"] = report["aggregate"]["success_rate"] >= cfg.threshold
    return report


def cmd_baseline(cfg: RunConfig, quantum: bool = True) -> dict:
    """Birthday campaign plus the quantum-vs-classical comparison rows."""
    cfg = cfg.validated(need_backend=quantum)
    if cfg.n > 24:
        raise ConfigError("the classical baseline is limited to n <= 24")
    classical = _run_trials(baseline_trial, cfg)
    cq = [t["classical_queries"] for t in classical]
    m = cfg.n + 1 if CaseId(cfg.case_id) in (CaseId.COPA_AD_FULL, CaseId.COPA_AD_PARTIAL) else cfg.n
    rows = []
    report = {
        "version": REPORT_VERSION,
        "command": "baseline",
        "config": _config_dict(cfg),
        "classical_trials": classical,
        "classical": {
            "success_rate": sum(t["success"] for t in classical) / len(classical),
            "median_queries": statistics.median(cq),
            "min_queries": min(cq),
            "max_queries": max(cq),
        },
    }
    if quantum:
        qt = _run_trials(attack_trial, cfg)
        report["quantum_trials"] = qt
        report["quantum"] = _aggregate_attack(qt)
        rows.append({"method": "quantum-simon", "queries": statistics.median(
            t["quantum_queries"] for t in qt), "success_rate": report["quantum"]["success_rate"],
            "theory_cn": cfg.c * m, "theory_birthday": 2 ** (cfg.n / 2),
            "bound": success_bound(cfg.n, cfg.c)})
    rows.append({"method": "classical-birthday", "queries": statistics.median(cq),
                 "success_rate": report["classical"]["success_rate"],
                 "theory_cn": cfg.c * m, "theory_birthday": 2 ** (cfg.n / 2), "bound": None})
    report["comparison"] = rows
    report["passed"] = report["classical"]["success_rate"] >= cfg.threshold
    return report


def cmd_verify_period(cfg: RunConfig, k: int = 1000, cases=None, period_override=None) -> dict:
    """White-box identity checks: no quantum step, ``L`` read from the key.

    ``period_override(inst, case)`` replaces the expected period, for negative
    controls.
    """
    cfg = cfg.validated(need_backend=False)
    if cases is None:
        cases = [CaseId(cfg.case_id)]
    rng = _trial_rng(cfg.seed, 0)
    rows = []
    for cid in cases:
        cid = CaseId(cid)
        sub = replace(cfg, scheme=CASE_SCHEME[cid], case_id=cid.value)
        inst, case = _setup(sub, rng)
        period = None if period_override is None else period_override(inst, case)
        fails = check_identity(inst, case, k, rng, period)
        rows.append({"case": cid.value, "width": cfg.n, "checked": k, "failures": fails})
    report = {
        "version": REPORT_VERSION,
        "command": "verify-period",
        "config": _config_dict(cfg),
        "results": rows,
    }
    report["passed"] = all(r["failures"] == 0 for r in rows)
    return report


def merge_reports(reports: list[dict]) -> dict:
    """Concatenate the trials of several ``attack`` reports with one config."""
    if not reports:
        raise ConfigError("nothing to merge")
    for r in reports:
        if r.get("version") != REPORT_VERSION:
            raise ConfigError("can only merge report-v1 files")
        if r.get("command") != "attack":
            raise ConfigError("only attack reports can be merged")
    base = {k: v for k, v in reports[0]["config"].items() if k not in ("seed", "trials")}
    for r in reports[1:]:
        other = {k: v for k, v in r["config"].items() if k not in ("seed", "trials")}
        if other != base:
            raise ConfigError("reports were produced with different configs")
    trials = [t for r in reports for t in r["trials"]]
    cfg = dict(base, seeds=[r["config"]["seed"] for r in reports], trials=len(trials))
    agg = _aggregate_attack(trials)
    return {
        "version": REPORT_VERSION,
        "command": "attack",
        "config": cfg,
        "trials": trials,
        "aggregate": agg,
        "bound": reports[0]["bound"],
        "passed": agg["success_rate"] >= base.get("threshold", 0.95),
    }


def parse_blocks(hex_str: str | None, bits: int | None, n: int) -> BlockString:
    if not hex_str:
        return BlockString()
    value = int(hex_str, 16)
    nbits = 4 * len(hex_str) if bits is None else bits
    return BlockString.from_bits(value, nbits, n)


__all__ = [
    "RunConfig", "ConfigError", "config_for", "seed_from_env", "success_bound",
    "cmd_attack", "cmd_baseline", "cmd_verify_period", "merge_reports", "attack_trial",
    "baseline_trial", "COPA_FAMILY_CASES", "build_target", "domain_width",
]
