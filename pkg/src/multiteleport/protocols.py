"""Multi-hop teleportation over a chain of partially entangled channels.

Two protocols are implemented hop by hop on explicit state vectors:

* SMTP: every hop is a complete probabilistic teleportation. The receiving
  party filters the distortion with a Kraus pair before forwarding, and the
  chain aborts at the first filter failure.
* GMTP: intermediaries only apply the Pauli correction. The distortion
  accumulates and the final receiver filters it once. Branches whose
  distortion is balanced need no filtering at all.

``run_batch`` evaluates many trials at once with numpy, consuming the same
per-trial draws in the same order as the transcript engine.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .channels import Channel, Distortion, channel_state, correction_kraus
from .qcore import (
    BELL_VECTORS,
    PAULI_MATRICES,
    ZERO_PROBABILITY,
    BellOutcome,
    PauliCorrection,
    PureState,
    Uniform,
    apply_single_qubit,
    bell_measure,
    correction_for,
    fidelity,
    generalized_measure,
    tensor,
)

SUCCESS_FIDELITY_TOL = 1e-10
DEFAULT_INPUT = (0.6 + 0.0j, 0.0 + 0.8j)


class Protocol(str, enum.Enum):
    SMTP = "smtp"
    GMTP = "gmtp"


@dataclass(frozen=True)
class ChainConfig:
    """One protocol run: kind, per-hop channels and the payload ``a|0> + b|1>``.

    ``pauli_frame`` (GMTP only) defers every Pauli correction to the final
    receiver as classical bookkeeping instead of applying it at each hop.
    """

    kind: Protocol
    channels: tuple[Channel, ...]
    input: tuple[complex, complex] = DEFAULT_INPUT
    pauli_frame: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", Protocol(self.kind))
        chans = tuple(self.channels)
        if not chans:
            raise ValueError("a chain needs at least one hop")
        for k, ch in enumerate(chans):
            if not isinstance(ch, Channel):
                raise TypeError(f"hop {k}: expected Channel, got {type(ch).__name__}")
            if ch.is_product:
                raise ValueError(f"hop {k}: channel with alpha=0 carries no entanglement")
        object.__setattr__(self, "channels", chans)
        a, b = (complex(x) for x in self.input)
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-10:
            raise ValueError("input amplitudes must be normalized")
        object.__setattr__(self, "input", (a, b))
        if self.pauli_frame and self.kind is not Protocol.GMTP:
            raise ValueError("the Pauli-frame variant only applies to GMTP")

    @classmethod
    def homogeneous(cls, kind, hops: int, channel: Channel, **kwargs) -> ChainConfig:
        return cls(kind, (channel,) * hops, **kwargs)

    @property
    def hops(self) -> int:
        return len(self.channels)

    @property
    def is_homogeneous(self) -> bool:
        return len(set(self.channels)) == 1

    def input_state(self) -> PureState:
        return PureState.qubit(*self.input)

    def with_input(self, a: complex, b: complex) -> ChainConfig:
        return ChainConfig(self.kind, self.channels, (a, b), self.pauli_frame)


@dataclass(frozen=True)
class HopRecord:
    hop_index: int
    bell_outcome: BellOutcome
    pauli_applied: PauliCorrection
    branch_probability: float
    smtp_kraus_success: bool | None = None
    smtp_kraus_probability: float | None = None


@dataclass(frozen=True)
class Transcript:
    kind: Protocol
    hops: tuple[HopRecord, ...]
    success: bool
    final_state: PureState
    error_index: int | None = None
    final_kraus_success: bool | None = None
    final_kraus_probability: float | None = None
    total_probability: float = field(init=False)

    def __post_init__(self):
        total = 1.0
        for p in self.recorded_probabilities():
            total *= p
        object.__setattr__(self, "total_probability", total)

    def recorded_probabilities(self) -> list[float]:
        probs = []
        for hop in self.hops:
            probs.append(hop.branch_probability)
            if hop.smtp_kraus_probability is not None:
                probs.append(hop.smtp_kraus_probability)
        if self.final_kraus_probability is not None:
            probs.append(self.final_kraus_probability)
        return probs

    @property
    def bell_outcomes(self) -> tuple[BellOutcome, ...]:
        return tuple(h.bell_outcome for h in self.hops)

    def to_record(self) -> dict:
        """Flat record; Bell outcomes use their 2-bit wire code 0-3."""
        amps = self.final_state.amplitudes
        return {
            "protocol": self.kind.value,
            "hops": len(self.hops),
            "bell_outcomes": [int(h.bell_outcome) for h in self.hops],
            "paulis": [h.pauli_applied.value for h in self.hops],
            "smtp_kraus": [h.smtp_kraus_success for h in self.hops],
            "error_index": self.error_index,
            "final_kraus_success": self.final_kraus_success,
            "success": self.success,
            "total_probability": self.total_probability,
            "final_state": [amps[0].real, amps[0].imag, amps[1].real, amps[1].imag],
        }


def hop_distortion(ch: Channel, outcome: BellOutcome) -> Distortion:
    """Distortion left by one corrected hop: Phi outcomes keep (alpha, beta), Psi swap it."""
    if BellOutcome(outcome).parity:
        return Distortion(ch.beta, ch.alpha)
    return Distortion(ch.alpha, ch.beta)


def accumulated_distortion(channels: Sequence[Channel], outcomes: Sequence[BellOutcome]) -> Distortion:
    if len(channels) != len(outcomes):
        raise ValueError("need one Bell outcome per channel")
    total = Distortion.none()
    for ch, outcome in zip(channels, outcomes):
        total = total * hop_distortion(ch, outcome)
    return total


def _teleport(payload: PureState, ch: Channel, rng: Uniform):
    """Bell-measure the payload with the sender's half of ``ch``; returns the uncorrected receiver qubit."""
    register = tensor(payload, channel_state(ch))
    return bell_measure(register, 0, 1, rng)


def _success_check(success: bool, state: PureState, config: ChainConfig) -> None:
    if success:
        f = fidelity(state, config.input_state())
        if abs(1.0 - f) > SUCCESS_FIDELITY_TOL:
            raise RuntimeError(f"heralded success with fidelity {f!r}")


def run_smtp(config: ChainConfig, rng: Uniform) -> Transcript:
    if config.kind is not Protocol.SMTP:
        raise ValueError("run_smtp needs an SMTP config")
    state = config.input_state()
    records = []
    success = True
    for k, ch in enumerate(config.channels):
        outcome, state, p_bell = _teleport(state, ch, rng)
        pauli = correction_for(outcome)
        state = apply_single_qubit(state, 0, pauli.matrix)
        kraus = correction_kraus(hop_distortion(ch, outcome))
        success, state, p_kraus = generalized_measure(state, 0, kraus, rng)
        records.append(HopRecord(k, outcome, pauli, p_bell, success, p_kraus))
        if not success:
            break
    _success_check(success, state, config)
    return Transcript(Protocol.SMTP, tuple(records), success, state)


def run_gmtp(config: ChainConfig, rng: Uniform) -> Transcript:
    if config.kind is not Protocol.GMTP:
        raise ValueError("run_gmtp needs a GMTP config")
    state = config.input_state()
    records = []
    distortion = Distortion.none()
    error_index = 0
    frame_x = frame_z = 0
    last = config.hops - 1
    for k, ch in enumerate(config.channels):
        outcome, state, p_bell = _teleport(state, ch, rng)
        if config.pauli_frame:
            # a pending X in the frame flips which direction this hop distorts
            swapped = outcome.parity ^ frame_x
            frame_x ^= outcome.parity
            frame_z ^= outcome.phase
            pauli = PauliCorrection.IDENTITY
            if k == last:
                pauli = correction_for(BellOutcome.from_bits(frame_x, frame_z))
                state = apply_single_qubit(state, 0, pauli.matrix)
        else:
            swapped = outcome.parity
            pauli = correction_for(outcome)
            state = apply_single_qubit(state, 0, pauli.matrix)
        step = Distortion(ch.alpha, ch.beta)
        distortion = distortion * (step.swapped() if swapped else step)
        error_index += swapped
        records.append(HopRecord(k, outcome, pauli, p_bell))

    if distortion.is_balanced():
        # accumulated errors cancelled: the payload is already restored
        success, p_kraus = True, None
    else:
        success, state, p_kraus = generalized_measure(state, 0, correction_kraus(distortion), rng)
    _success_check(success, state, config)
    return Transcript(
        Protocol.GMTP,
        tuple(records),
        success,
        state,
        error_index=error_index,
        final_kraus_success=None if p_kraus is None else success,
        final_kraus_probability=p_kraus,
    )


def run(config: ChainConfig, rng: Uniform) -> Transcript:
    if config.kind is Protocol.SMTP:
        return run_smtp(config, rng)
    return run_gmtp(config, rng)


def draws_per_trial(config: ChainConfig) -> int:
    """Upper bound on uniform draws one run consumes."""
    if config.kind is Protocol.SMTP:
        return 2 * config.hops
    return config.hops + 1


# ---------------------------------------------------------------------------
# vectorized engine

_BELL_TENSOR = BELL_VECTORS.conj().reshape(4, 2, 2)
_CORRECTIONS = np.stack([PAULI_MATRICES[correction_for(o)] for o in BellOutcome])


class BatchResult(NamedTuple):
    success: np.ndarray
    error_index: np.ndarray | None


def _pick(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise twin of ``qcore.pick_branch``."""
    masked = np.where(probs < ZERO_PROBABILITY, 0.0, probs)
    cumulative = np.cumsum(masked, axis=1)
    hit = (u[:, None] < cumulative) & (masked > 0.0)
    idx = np.argmax(hit, axis=1)
    none = ~hit.any(axis=1)
    if none.any():
        nonzero = masked[none] > 0.0
        idx[none] = nonzero.shape[1] - 1 - np.argmax(nonzero[:, ::-1], axis=1)
    return idx


def _abs2(z: np.ndarray) -> np.ndarray:
    return z.real**2 + z.imag**2


def _filter(state: np.ndarray, u: np.ndarray, v: np.ndarray, draw: np.ndarray, keep_state: bool = True):
    """Batched ``correction_kraus`` measurement; returns (success, filtered state or None)."""
    hi = np.maximum(u, v)
    r = np.minimum(u, v) / hi
    fail = np.sqrt(np.maximum(0.0, 1.0 - r * r))
    u_big = u > v
    es = np.stack([np.where(u_big, r, 1.0), np.where(u_big, 1.0, r)], axis=1)
    ef = np.stack([np.where(u_big, fail, 0.0), np.where(u_big, 0.0, fail)], axis=1)
    ident = u == v
    es[ident] = 1.0
    ef[ident] = 0.0
    weights = _abs2(state)
    p_s = np.sum(es * es * weights, axis=1)
    p_f = np.sum(ef * ef * weights, axis=1)
    success = _pick(np.stack([p_s, p_f], axis=1), draw) == 0
    if not keep_state:
        return success, None
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(
            success[:, None], es * state / np.sqrt(p_s)[:, None], ef * state / np.sqrt(p_f)[:, None]
        )
    return success, out


def run_batch(config: ChainConfig, uniforms: np.ndarray) -> BatchResult:
    """Run ``len(uniforms)`` trials; row ``t`` holds trial ``t``'s draws in consumption order."""
    uniforms = np.asarray(uniforms, dtype=float)
    trials, width = uniforms.shape
    if width < draws_per_trial(config):
        raise ValueError(f"need {draws_per_trial(config)} draws per trial, got {width}")
    state = np.tile(np.array(config.input, dtype=np.complex128), (trials, 1))
    rows = np.arange(trials)
    smtp = config.kind is Protocol.SMTP
    alive = np.ones(trials, dtype=bool)
    u_acc = np.ones(trials)
    v_acc = np.ones(trials)
    error_index = np.zeros(trials, dtype=np.int64)
    frame_x = np.zeros(trials, dtype=np.int64)
    frame_z = np.zeros(trials, dtype=np.int64)
    col = 0

    for ch in config.channels:
        resource = np.array([[ch.alpha, 0.0], [0.0, ch.beta]])
        # payload amplitude a -> (outcome k, receiver amplitude c)
        hop_map = np.einsum("kab,bc->akc", _BELL_TENSOR, resource)
        if not config.pauli_frame:
            hop_map = np.einsum("kij,akj->aki", _CORRECTIONS, hop_map)
        projected = (state @ hop_map.reshape(2, 8)).reshape(trials, 4, 2)
        probs = _abs2(projected).sum(axis=2)
        outcome = _pick(probs, uniforms[:, col])
        col += 1
        state = projected[rows, outcome] / np.sqrt(probs[rows, outcome])[:, None]
        parity = outcome >> 1
        if config.pauli_frame:
            swapped = parity ^ frame_x
            frame_x ^= parity
            frame_z ^= outcome & 1
        else:
            swapped = parity
        hop_u = np.where(swapped == 1, ch.beta, ch.alpha)
        hop_v = np.where(swapped == 1, ch.alpha, ch.beta)
        if smtp:
            ok, state = _filter(state, hop_u, hop_v, uniforms[:, col])
            col += 1
            alive &= ok
        else:
            u_acc = u_acc * hop_u
            v_acc = v_acc * hop_v
            top = np.maximum(u_acc, v_acc)
            u_acc, v_acc = u_acc / top, v_acc / top
            error_index += swapped

    if smtp:
        return BatchResult(alive, None)
    if config.pauli_frame:
        net = (frame_x << 1) | frame_z
        state = np.einsum("tij,tj->ti", _CORRECTIONS[net], state)
    balanced = np.abs(u_acc - v_acc) <= 1e-12 * np.maximum(u_acc, v_acc)
    ok, _ = _filter(state, u_acc, v_acc, uniforms[:, col], keep_state=False)
    return BatchResult(balanced | ok, error_index)
