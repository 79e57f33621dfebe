"""Orchestration: curve files, the a_p disk cache, witness runs, JSON reports.

A witness run executes the full constructive chain for one curve:

    rank gate -> field K -> prime q -> prime sequence -> ring class structure
    -> L'(E/K,1) != 0 -> Heegner checks (trace to K, Gross-Zagier
    correspondence, trace relation at an auxiliary inert prime)
    -> tower structure + divisibility contradiction

and emits a deterministic JSON report; any gate failure or exhausted search
short-circuits into a failed partial report rather than an exception.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import tempfile
import time
from dataclasses import dataclass, field, asdict

from . import __version__
from .arith import is_prime
from .ec_core import ApTable, CurveQ, ap
from .galois_tower import FormalMWModel, divisibility_contradiction, tower_structure
from .heegner import (
    PrecisionUnreachable,
    fricke_diagnostic,
    gz_correspondence,
    heegner_orbit,
    trace_relation_check,
)
from .lseries import LSeriesInconclusiveError, gate_from_leval, l_eval
from .quadforms import kronecker, ring_class_structure
from .searcher import (
    FieldSearchExhausted,
    PrimeSearchExhausted,
    choose_q,
    find_K,
    prime_sequence,
    verify_prime_item,
)

log = logging.getLogger("heegner_witness")

CACHE_ENV_VAR = "HW_CACHE_DIR"


@dataclass
class Config:
    lseries_precision: float = 1e-8
    heegner_residual: float = 1e-6
    height_tol: float = 1e-4
    nonvanishing_threshold: float = 1e-3
    dk_scan_bound: int = 499
    prime_bound: int = 10**5
    term_ceiling: int = 10**6
    torsion_multiple_bound: int = 16
    depth: int = 1  # tower primes carried through the Heegner-side numerics
    tower_r: int = 1  # generator bound of the hypothetical acting subgroup
    tower_m: int = 0  # level where the traced points are assumed defined
    cache_dir: str | None = None
    cm_field: int | None = None

    def __post_init__(self):
        for name in ("lseries_precision", "heegner_residual", "height_tol",
                     "nonvanishing_threshold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")

    @classmethod
    def from_file(cls, path: str) -> "Config":
        with open(path) as fh:
            data = json.load(fh)
        return cls(**data)

    def resolved_cache_dir(self) -> str:
        return os.environ.get(CACHE_ENV_VAR) or self.cache_dir or ".hw_cache"


class CurveFileError(ValueError):
    pass


def parse_curve_file(path: str) -> list[CurveQ]:
    """One curve per line: 'label a1 a2 a3 a4 a6 N'; '#' starts a comment."""
    curves: list[CurveQ] = []
    seen = set()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 7:
                raise CurveFileError(
                    f"{path}:{lineno}: expected 'label a1 a2 a3 a4 a6 N', got {len(parts)} fields"
                )
            label = parts[0]
            if label in seen:
                raise CurveFileError(f"{path}:{lineno}: duplicate label {label!r}")
            seen.add(label)
            try:
                nums = [int(t) for t in parts[1:]]
            except ValueError as e:
                raise CurveFileError(f"{path}:{lineno}: {e}") from None
            try:
                curves.append(CurveQ(*nums[:5], nums[5], label))
            except ValueError as e:
                raise CurveFileError(f"{path}:{lineno}: {e}") from None
    return curves


class ApDiskCache:
    """Append-only text cache of a_p values, lines 'label p a_p'.

    Corrupt lines are dropped (and logged) at load; the file is then rewritten
    atomically. Writers append and flush line-at-a-time, so concurrent readers
    see complete lines only.
    """

    def __init__(self, directory: str):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)
        self.path = os.path.join(directory, "ap_cache.txt")
        self.entries: dict = {}
        self._load()
        self._fh = open(self.path, "a")

    def _load(self):
        if not os.path.exists(self.path):
            return
        corrupt = 0
        with open(self.path) as fh:
            for raw in fh:
                parts = raw.split()
                if len(parts) != 3:
                    corrupt += 1
                    continue
                label, p_s, a_s = parts
                try:
                    p, a = int(p_s), int(a_s)
                    if p < 2 or a * a > 4 * p:
                        raise ValueError
                except ValueError:
                    corrupt += 1
                    continue
                self.entries[(label, p)] = a
        if corrupt:
            log.warning("dropping %d corrupt cache lines from %s", corrupt, self.path)
            self._rewrite()

    def _rewrite(self):
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix="ap_cache.", suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            for (label, p), a in sorted(self.entries.items()):
                fh.write(f"{label} {p} {a}\n")
        os.replace(tmp, self.path)

    def get(self, curve: CurveQ, p: int) -> int:
        key = (curve.label or str(curve.ainvs), p)
        if key not in self.entries:
            value = ap(curve, p)
            self.entries[key] = value
            self._fh.write(f"{key[0]} {p} {value}\n")
            self._fh.flush()
        return self.entries[key]

    def close(self):
        self._fh.close()


@dataclass
class WitnessReport:
    label: str
    curve: dict
    passed: bool
    failed_at: str | None
    checks: list
    config: dict = field(default_factory=dict)
    gate: str | None = None
    d_K: int | None = None
    field_search: dict | None = None
    q: int | None = None
    prime_seq: list = field(default_factory=list)
    ring_class: list = field(default_factory=list)
    l_values: dict | None = None
    heegner: dict | None = None
    tower: dict | None = None
    versions: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _check(checks, name, ok, **data):
    entry = {"name": name, "pass": bool(ok)}
    entry.update(data)
    checks.append(entry)
    return ok


def _pick_aux_ell(curve: CurveQ, d_K: int) -> int | None:
    """Smallest inert prime usable for the level-ell trace relation."""
    ell = 2
    while ell < 100:
        if (
            is_prime(ell)
            and math.gcd(ell, curve.N * d_K) == 1
            and kronecker(d_K, ell) == -1
        ):
            try:
                heegner_orbit(curve, d_K, ell)
                return ell
            except (ValueError, PrecisionUnreachable):
                pass
        ell += 1
    return None


def run_witness(curve: CurveQ, config: Config | None = None, cache: ApDiskCache | None = None) -> WitnessReport:
    config = config or Config()
    ap_source = (lambda p: cache.get(curve, p)) if cache else None
    t0 = time.perf_counter()
    timing: dict = {}
    checks: list = []
    cfg_dict = {k: v for k, v in asdict(config).items() if k != "cache_dir"}
    report = WitnessReport(
        label=curve.label or str(curve.ainvs),
        curve={"ainvs": list(curve.ainvs), "N": curve.N},
        passed=False,
        failed_at=None,
        checks=checks,
        config=cfg_dict,
        versions={"package": __version__},
        timing=timing,
    )

    def finish(failed_at=None):
        report.failed_at = failed_at
        report.passed = failed_at is None and all(c["pass"] for c in checks)
        timing["total_s"] = round(time.perf_counter() - t0, 3)
        return report

    # 1. analytic rank gate
    t = time.perf_counter()
    try:
        le = l_eval(curve, config.lseries_precision)
        gate = gate_from_leval(le, config.nonvanishing_threshold)
        report.l_values = {
            "epsilon": le.epsilon,
            "L_1": le.value_at_1,
            "L_prime_1": le.derivative_at_1,
            "fe_residual": le.fe_residual,
            "tail_bound": le.tail_bound,
            "terms": le.terms_used,
        }
    except LSeriesInconclusiveError as e:
        gate = "not_eligible"
        report.l_values = {"error": str(e)}
    report.gate = gate
    timing["gate_s"] = round(time.perf_counter() - t, 3)
    if not _check(checks, "analytic_rank_gate", gate in ("rank0", "rank1"), result=gate):
        return finish("analytic_rank_gate")

    # 2. field search
    t = time.perf_counter()
    try:
        fs = find_K(curve, config.dk_scan_bound, config.cm_field, config.nonvanishing_threshold)
    except FieldSearchExhausted as e:
        _check(checks, "find_K", False, error=str(e))
        return finish("find_K")
    finally:
        timing["find_K_s"] = round(time.perf_counter() - t, 3)
    d_K = fs.d_K
    report.d_K = d_K
    report.field_search = {
        "d_K": d_K,
        "cong4": fs.cong4,
        "coprime": fs.coprime,
        "heegner": fs.heegner,
        "lprime_nonzero": fs.lprime_nonzero,
    }
    _check(checks, "find_K", fs.accepted, d_K=d_K)
    report.l_values["L_over_K"] = fs.l_value_data.value
    report.l_values["L_over_K_nonzero"] = fs.l_value_data.nonzero
    _check(checks, "l_over_K_nonzero", fs.l_value_data.nonzero, value=fs.l_value_data.value)

    # 3. prime q and the prime sequence
    q = choose_q(curve, d_K, config.cm_field)
    report.q = q
    _check(checks, "choose_q", math.gcd(q, 2 * d_K * curve.N) == 1 and q % 2 == 1, q=q)
    v_cj = 0  # pipeline model uses c_j = 1
    needed = max(config.depth, config.tower_m + config.tower_r + v_cj + 1)
    t = time.perf_counter()
    try:
        items = prime_sequence(curve, d_K, q, needed, config.prime_bound, ap_source)
    except PrimeSearchExhausted as e:
        _check(checks, "prime_sequence", False, error=str(e),
               partial=[it.p for it in e.partial])
        return finish("prime_sequence")
    finally:
        timing["prime_sequence_s"] = round(time.perf_counter() - t, 3)
    report.prime_seq = [
        {
            "p": it.p,
            "a_p": it.a_p,
            "ap_mod_q": it.ap_mod_q,
            "cong_q": it.cong_q,
            "inert": it.inert,
            "good_red": it.good_red,
            "ap_ok": it.ap_ok,
        }
        for it in items
    ]
    reverified = all(verify_prime_item(curve, d_K, q, it, ap_source) for it in items)
    _check(checks, "prime_sequence", reverified, primes=[it.p for it in items])

    # 4. ring class structure per cumulative level
    for n in range(1, len(items) + 1):
        ps = [it.p for it in items[:n]]
        s = ring_class_structure(d_K, ps)
        report.ring_class.append(
            {
                "conductor": s.conductor,
                "primes": list(s.primes),
                "factors": list(s.factors),
                "invariants": list(s.invariants),
                "degree": s.degree,
            }
        )
    _check(
        checks,
        "ring_class_structure",
        all(
            r["degree"] == math.prod(p + 1 for p in r["primes"]) for r in report.ring_class
        ),
        levels=len(report.ring_class),
    )

    # 5. Heegner numerics
    t = time.perf_counter()
    gz = gz_correspondence(curve, d_K, precision=config.lseries_precision)
    heeg: dict = {
        "z_K": [gz.z_K.real, gz.z_K.imag],
        "recognized_x": None if gz.recognized is None else str(gz.recognized[0]),
        "recognized_y": None if gz.recognized is None else str(gz.recognized[1]),
        "height_side": gz.height_side,
        "height_is_proxy": gz.height_is_proxy,
        "l_prime_K": gz.l_prime_K,
        "pk_nontorsion": gz.pk_nontorsion,
        "biconditional_holds": gz.biconditional_holds,
        "ratio": gz.ratio,
    }
    _check(checks, "gz_correspondence", gz.biconditional_holds,
           nontorsion=gz.pk_nontorsion, l_nonzero=gz.l_nonzero)
    base_tau = heegner_orbit(curve, d_K, 1).taus[0].tau
    heeg["fricke"] = fricke_diagnostic(curve, base_tau)  # recorded, not asserted
    aux = _pick_aux_ell(curve, d_K)
    if aux is None:
        heeg["trace_relation"] = {"error": "no feasible auxiliary inert prime"}
        _check(checks, "trace_relation", False)
        report.heegner = heeg
        return finish("trace_relation")
    try:
        residual = trace_relation_check(curve, d_K, aux, config.heegner_residual)
        orbit_n = heegner_orbit(curve, d_K, aux).class_count
        heeg["trace_relation"] = {
            "ell": aux,
            "residual": residual,
            "orbit_size": orbit_n,
            "a_ell": ap(curve, aux),
        }
        ok = residual < config.heegner_residual
    except PrecisionUnreachable as e:
        heeg["trace_relation"] = {"ell": aux, "error": str(e)}
        ok = False
    report.heegner = heeg
    timing["heegner_s"] = round(time.perf_counter() - t, 3)
    if not _check(checks, "trace_relation", ok, **heeg["trace_relation"]):
        return finish("trace_relation")

    # 6. exact tower and the divisibility contradiction
    t = time.perf_counter()
    tower_primes = [it.p for it in items]
    tl = tower_structure(q, tower_primes)
    model = FormalMWModel(
        q=q,
        k=1,
        c=(1,),
        ap_values=tuple(it.a_p for it in items),
        m=config.tower_m,
        r=config.tower_r,
    )
    ctr = divisibility_contradiction(model)
    report.tower = {
        "q": q,
        "primes": tower_primes,
        "full_degree": tl.full_degree,
        "quotient_degree": tl.quotient_degree,
        "model": {"k": 1, "c": [1], "m": config.tower_m, "r": config.tower_r},
        "index_bound_assumed_from": config.tower_m + config.tower_r + 1,
        "contradiction": {
            "derivable": ctr.derivable,
            "witness_n": ctr.witness_n,
            "ledger": ctr.ledger,
            "reason": ctr.reason,
        },
    }
    timing["tower_s"] = round(time.perf_counter() - t, 3)
    if not _check(checks, "divisibility_contradiction", ctr.derivable,
                  witness_n=ctr.witness_n):
        return finish("divisibility_contradiction")

    return finish(None)


# ---------------------------------------------------------------------------
# canonical JSON


def _canonical(obj):
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            raise ValueError("non-finite float in report")
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    return obj


def canonical_json(report: WitnessReport) -> str:
    data = _canonical(report.to_dict())
    hashed = {k: v for k, v in data.items() if k != "timing"}
    digest = hashlib.sha256(
        json.dumps(hashed, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    data["canonical_hash"] = digest
    return json.dumps(data, sort_keys=True, indent=2)


def emit_report(report: WitnessReport, path: str):
    """Write the canonical JSON atomically."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".report.", suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(canonical_json(report))
        fh.write("\n")
    os.replace(tmp, path)
