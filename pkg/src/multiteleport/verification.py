"""Independent checks of the protocol engine.

``enumerate`` is an exact oracle. Along every outcome path it composes the
2x2 linear map from the sender's qubit to the receiver's qubit and carries
unnormalized vectors, so branch weights fall out as squared norms. It shares
no code with the statevector engine in ``protocols`` beyond the Bell/Pauli
tables and the Kraus factory.

``monte_carlo`` samples the engine with reproducible per-trial draws.
"""

from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channels import Channel, Distortion, correction_kraus
from .protocols import ChainConfig, Protocol, draws_per_trial, run, run_batch
from .qcore import (
    BELL_VECTORS,
    BellOutcome,
    PureState,
    ReplaySource,
    correction_for,
)

MAX_ENUMERATION_HOPS = 10
PRUNE_PROBABILITY = 1e-14
MC_SIGMAS = 4.0
MC_BLOCK = 4096
MC_CHUNK = 16 * MC_BLOCK  # trials per batch-engine call


class Leaf(NamedTuple):
    outcomes: tuple[BellOutcome, ...]
    error_index: int | None
    kraus_performed: bool
    success: bool
    weight: float
    final_state: PureState | None


@dataclass
class ExactResult:
    success_probability: float
    failure_probability: float
    branch_count: int
    per_error_index: dict[int, float] = field(default_factory=dict)
    min_success_fidelity: float = 1.0
    leaves: list[Leaf] | None = None

    @property
    def total_weight(self) -> float:
        return self.success_probability + self.failure_probability


# 2x2 matrices are row-major tuples (m00, m01, m10, m11); vectors are pairs.
# Plain complex arithmetic beats numpy by far at this size.


def _hop_maps(ch: Channel) -> list[tuple]:
    """Corrected map from payload to receiver qubit for each Bell outcome."""
    resource = np.array([[ch.alpha, 0.0], [0.0, ch.beta]])
    maps = []
    for outcome in BellOutcome:
        bell = BELL_VECTORS[outcome].conj().reshape(2, 2)
        raw = (bell @ resource).T  # receiver <- payload
        m = correction_for(outcome).matrix @ raw
        maps.append(tuple(complex(x) for x in m.ravel()))
    return maps


def _matvec(m, v):
    return (m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1])


def _matmul(m, n):
    return (
        m[0] * n[0] + m[1] * n[2],
        m[0] * n[1] + m[1] * n[3],
        m[2] * n[0] + m[3] * n[2],
        m[2] * n[1] + m[3] * n[3],
    )


def _norm2(v) -> float:
    return abs(v[0]) ** 2 + abs(v[1]) ** 2


def _diagonal_part(m) -> Distortion:
    off = max(abs(m[1]), abs(m[2]))
    if off > 1e-12 * max(abs(m[0]), abs(m[3])):
        raise AssertionError(f"corrected hop map is not diagonal: {m}")
    return Distortion(abs(m[0]), abs(m[3]))


def _kraus_tuples(d: Distortion):
    kraus = correction_kraus(d)
    return (
        tuple(complex(x) for x in kraus.e_success.ravel()),
        tuple(complex(x) for x in kraus.e_fail.ravel()),
    )


def _filter_leaves(vec, ops):
    """(success, weight, vector) for both outcomes of the receiver's filter."""
    s, f = _matvec(ops[0], vec), _matvec(ops[1], vec)
    return ((True, _norm2(s), s), (False, _norm2(f), f))


def enumerate(config: ChainConfig, keep_leaves: bool = False) -> ExactResult:
    """Exact success probability by walking every Bell and Kraus outcome."""
    if config.hops > MAX_ENUMERATION_HOPS:
        raise ValueError(
            f"{config.hops} hops means {4 ** config.hops} Bell paths; "
            f"enumeration is capped at {MAX_ENUMERATION_HOPS} hops"
        )
    chi = config.input
    ok_weights: list[float] = []
    fail_weights: list[float] = []
    acc = {"fid": 1.0}
    per_index: dict[int, list[float]] = defaultdict(list)
    leaves: list[Leaf] | None = [] if keep_leaves else None
    hop_maps = [_hop_maps(ch) for ch in config.channels]
    # SMTP filters depend only on the hop and its outcome
    smtp_filters = [[_kraus_tuples(_diagonal_part(m)) for m in maps] for maps in hop_maps]
    kraus_cache: dict[Distortion, tuple] = {}
    identity = (1 + 0j, 0j, 0j, 1 + 0j)

    def leaf(outcomes, index, measured, success, vec):
        w = _norm2(vec)
        if success:
            ok_weights.append(w)
            overlap = chi[0].conjugate() * vec[0] + chi[1].conjugate() * vec[1]
            acc["fid"] = min(acc["fid"], abs(overlap) ** 2 / w)
        else:
            fail_weights.append(w)
        if leaves is not None:
            state = PureState(np.array(vec) / math.sqrt(w)) if w > 0 else None
            leaves.append(Leaf(outcomes, index, measured, success, w, state))

    def children(vec, maps):
        floor = PRUNE_PROBABILITY * _norm2(vec)
        for outcome, m in zip(BellOutcome, maps):
            child = _matvec(m, vec)
            if _norm2(child) >= floor:
                yield outcome, m, child

    def walk_smtp(hop, vec, outcomes):
        if hop == config.hops:
            leaf(outcomes, None, True, True, vec)
            return
        for outcome, _, child in children(vec, hop_maps[hop]):
            path = outcomes + (outcome,)
            floor = PRUNE_PROBABILITY * _norm2(child)
            for success, w, out in _filter_leaves(child, smtp_filters[hop][outcome]):
                if w < floor:
                    continue
                if success:
                    walk_smtp(hop + 1, out, path)
                else:
                    leaf(path, None, True, False, out)

    def walk_gmtp(hop, vec, net, outcomes, index):
        if hop == config.hops:
            w = _norm2(vec)
            per_index[index].append(w)
            dist = _diagonal_part(net)
            if dist.is_balanced():
                leaf(outcomes, index, False, True, vec)
                return
            ops = kraus_cache.get(dist)
            if ops is None:
                ops = kraus_cache[dist] = _kraus_tuples(dist)
            for success, wk, out in _filter_leaves(vec, ops):
                if wk >= PRUNE_PROBABILITY * w:
                    leaf(outcomes, index, True, success, out)
            return
        for outcome, m, child in children(vec, hop_maps[hop]):
            walk_gmtp(hop + 1, child, _matmul(m, net), outcomes + (outcome,), index + (outcome >> 1))

    # the Pauli-frame variant has the same branch weights and distortions, so
    # it is enumerated through the literal maps
    if config.kind is Protocol.SMTP:
        walk_smtp(0, chi, ())
    else:
        walk_gmtp(0, chi, identity, (), 0)

    return ExactResult(
        success_probability=math.fsum(ok_weights),
        failure_probability=math.fsum(fail_weights),
        branch_count=len(ok_weights) + len(fail_weights),
        per_error_index={i: math.fsum(ws) for i, ws in sorted(per_index.items())},
        min_success_fidelity=acc["fid"],
        leaves=leaves,
    )


@dataclass(frozen=True)
class McResult:
    trials: int
    successes: int

    @property
    def estimate(self) -> float:
        return self.successes / self.trials

    @property
    def std_error(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1.0 - p) / self.trials)


def trial_uniforms(master_seed: int, start: int, stop: int, width: int) -> np.ndarray:
    """Draw rows for trials ``start..stop-1``.

    Trial ``t`` reads row ``t % MC_BLOCK`` of block ``t // MC_BLOCK``; each
    block is seeded from ``(master_seed, block)``, so any trial's stream is
    fixed by the master seed alone.
    """
    rows = []
    for block in range(start // MC_BLOCK, (stop - 1) // MC_BLOCK + 1):
        draws = np.random.default_rng([master_seed, block]).random((MC_BLOCK, width))
        lo = max(start, block * MC_BLOCK) - block * MC_BLOCK
        hi = min(stop, (block + 1) * MC_BLOCK) - block * MC_BLOCK
        rows.append(draws[lo:hi])
    return np.concatenate(rows)


def _count_range(config: ChainConfig, master_seed: int, start: int, stop: int, engine: str) -> int:
    uniforms = trial_uniforms(master_seed, start, stop, draws_per_trial(config))
    if engine == "batch":
        return int(np.count_nonzero(run_batch(config, uniforms).success))
    return sum(run(config, ReplaySource(row)).success for row in uniforms)


def monte_carlo(
    config: ChainConfig,
    trials: int,
    master_seed: int,
    engine: str = "batch",
    workers: int = 1,
) -> McResult:
    """Estimate the success probability from ``trials`` seeded runs.

    ``engine="transcript"`` runs the statevector engine trial by trial;
    ``"batch"`` vectorizes the same draws. Both give identical counts.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if engine not in ("batch", "transcript"):
        raise ValueError(f"unknown engine {engine!r}")
    bounds = list(range(0, trials, MC_CHUNK)) + [trials]
    ranges = list(zip(bounds[:-1], bounds[1:]))
    if workers > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(workers) as pool:
            counts = pool.map(
                _count_range,
                *zip(*[(config, master_seed, lo, hi, engine) for lo, hi in ranges]),
            )
            successes = sum(counts)
    else:
        successes = sum(_count_range(config, master_seed, lo, hi, engine) for lo, hi in ranges)
    return McResult(trials, successes)


class Verdict(NamedTuple):
    passed: bool
    z_score: float
    tolerance: float


def compare(exact: ExactResult | float, mc: McResult, sigmas: float = MC_SIGMAS) -> Verdict:
    """Pass iff the estimate lies within ``sigmas`` standard errors of the exact value.

    A degenerate estimate (0 or 1) has zero standard error; it then has to
    match the exact value to 1e-12.
    """
    p = exact.success_probability if isinstance(exact, ExactResult) else float(exact)
    diff = mc.estimate - p
    se = mc.std_error
    tol = max(sigmas * se, 1e-12)
    z = diff / se if se > 0 else (0.0 if abs(diff) <= 1e-12 else math.copysign(math.inf, diff))
    return Verdict(abs(diff) <= tol, z, tol)


def iter_transcripts(config: ChainConfig, trials: int, master_seed: int):
    """Transcripts of the same trials ``monte_carlo`` would run."""
    width = draws_per_trial(config)
    for lo in range(0, trials, MC_BLOCK):
        for row in trial_uniforms(master_seed, lo, min(trials, lo + MC_BLOCK), width):
            yield run(config, ReplaySource(row))


class Check(NamedTuple):
    name: str
    case: str
    expected: float
    observed: float
    tolerance: float
    passed: bool


def standard_checks(trials: int = 20_000, seed: int = 2026) -> list[Check]:
    """Oracle against every closed form, plus Monte Carlo against the oracle."""
    from . import analytics

    checks = []

    def add(name, case, expected, observed, tol):
        checks.append(Check(name, case, expected, observed, tol, abs(observed - expected) <= tol))

    grid = [0.1, 0.2, 0.3, 0.4, 0.5]
    for a2 in grid:
        ch = Channel.from_alpha2(a2)
        for kind in Protocol:
            exact = enumerate(ChainConfig(kind, (ch,))).success_probability
            add(f"oracle_single_{kind.value}", f"alpha2={a2}", analytics.p_single(ch.alpha), exact, 1e-12)
    for n in (1, 2, 3, 4):
        for a2 in grid:
            ch = Channel.from_alpha2(a2)
            for kind, formula in ((Protocol.SMTP, analytics.p_smtp), (Protocol.GMTP, analytics.p_gmtp)):
                exact = enumerate(ChainConfig.homogeneous(kind, 2 * n, ch)).success_probability
                add(f"oracle_{kind.value}", f"N={n} alpha2={a2}", formula(n, ch.alpha), exact, 1e-12)
    for a2_1 in grid:
        for a2_2 in grid:
            c1, c2 = Channel.from_alpha2(a2_1), Channel.from_alpha2(a2_2)
            exact = enumerate(ChainConfig(Protocol.GMTP, (c1, c2))).success_probability
            add("oracle_hetero", f"alpha2=({a2_1},{a2_2})", analytics.p_hetero(c1.alpha, c2.alpha), exact, 1e-12)
    for a2 in grid:
        ch = Channel.from_alpha2(a2)
        exact = enumerate(ChainConfig.homogeneous(Protocol.GMTP, 2, ch))
        add("self_correction_weight", f"alpha2={a2}", 2 * ch.alpha2 * ch.beta**2, exact.per_error_index[1], 1e-12)

    mc_cases = [
        ChainConfig(Protocol.SMTP, (Channel.from_alpha2(0.36),)),
        ChainConfig.homogeneous(Protocol.SMTP, 2, Channel.from_alpha2(0.3)),
        ChainConfig.homogeneous(Protocol.GMTP, 2, Channel.from_alpha2(0.3)),
        ChainConfig.homogeneous(Protocol.GMTP, 4, Channel.from_alpha2(0.25), pauli_frame=True),
        ChainConfig(Protocol.GMTP, (Channel.from_alpha2(0.2), Channel.from_alpha2(0.4))),
    ]
    for k, config in zip(range(len(mc_cases)), mc_cases):
        exact = enumerate(config)
        mc = monte_carlo(config, trials, seed + k)
        verdict = compare(exact, mc)
        label = f"{config.kind.value} hops={config.hops} alpha2={[round(c.alpha2, 12) for c in config.channels]}"
        if config.pauli_frame:
            label += " frame"
        checks.append(Check("mc_vs_oracle", label, exact.success_probability, mc.estimate, verdict.tolerance, verdict.passed))
    return checks
