"""Sharded statevector execution with explicit exchange accounting.

The amplitude array splits into 2^(nq - nq_local) contiguous shards of
2^nq_local amplitudes; shard s owns the basis states whose top bits equal
s.  Qubits below nq_local are local: gates on them run inside each shard
with the ordinary kernels.  A gate touching a global qubit g pairs shard
s with shard s XOR 2^(g - nq_local); the pair swaps complementary halves
of their blocks (L/2 amplitudes out of each shard), which transposes
qubit g with a spare local bit so the gate can run locally, then swaps
back.  A two-qubit gate on two global qubits does this twice with two
spare bits.  One such swap-apply-restore counts as a single exchange of
L/2 amplitudes per shard; the restore leg moves the same amplitudes home
and is not double-counted, and the static ``exchange_volume`` and the
counters measured during a run agree exactly on that convention.

Workers are one thread per shard.  They own their block outright and
communicate only through per-shard queues carrying copied amplitude
blocks; the coordinator barriers them gate by gate, so results cannot
depend on scheduling.  Per-gate times record the slowest worker: compute
is the kernel span, exchange runs from first-byte wait to the received
block being written in place.  A worker exception aborts the run.
"""

from __future__ import annotations

import csv
import queue
import threading
import time
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .circuit import CircuitIR, GateOp, LrQaoaParams, build_circuit
from .engine import Precision, StateVector, _apply_gate_kernel, check_memory
from .errors import AbortedRunError, ValidationError
from .problem import generate_instance

_RECV_TIMEOUT_S = 300.0


@dataclass(frozen=True)
class ShardPlan:
    nq: int
    nq_local: int
    num_shards: int
    shard_len: int


def plan_shards(nq: int, nq_local: int) -> ShardPlan:
    """Split nq qubits into 2^(nq - nq_local) shards of 2^nq_local amplitudes."""
    if nq < 1:
        raise ValidationError(f"need at least one qubit, got {nq}")
    if not 1 <= nq_local <= nq:
        raise ValidationError(
            f"nq_local must satisfy 1 <= nq_local <= nq, got {nq_local} for nq={nq}"
        )
    return ShardPlan(
        nq=nq,
        nq_local=nq_local,
        num_shards=1 << (nq - nq_local),
        shard_len=1 << nq_local,
    )


def plan_for_shard_count(nq: int, num_shards: int) -> ShardPlan:
    if num_shards < 1 or num_shards & (num_shards - 1):
        raise ValidationError(f"shard count must be a power of two, got {num_shards}")
    log2 = num_shards.bit_length() - 1
    if log2 >= nq:
        raise ValidationError(f"{num_shards} shards need more than {nq} qubits")
    return plan_shards(nq, nq - log2)


@dataclass(frozen=True)
class ExchangeStep:
    """One pairwise half-block swap: global qubit in, spare local slot out."""

    global_qubit: int
    local_slot: int
    pair_bit: int
    amps_per_shard: int

    def partner(self, shard: int) -> int:
        return shard ^ (1 << self.pair_bit)

    def pairs(self, num_shards: int) -> list[tuple[int, int]]:
        return [
            (s, self.partner(s))
            for s in range(num_shards)
            if not (s >> self.pair_bit) & 1
        ]


def exchange_steps(gate: GateOp, plan: ShardPlan) -> list[ExchangeStep]:
    """Exchange steps a gate needs under the plan (empty if fully local).

    Spare local slots are taken from the top of the shard, skipping any
    local qubit the gate itself uses; a shard too small to host the gate
    is rejected.
    """
    global_qubits = sorted((q for q in gate.qubits if q >= plan.nq_local), reverse=True)
    if not global_qubits:
        return []
    local_qubits = {q for q in gate.qubits if q < plan.nq_local}
    slots = [
        s for s in range(plan.nq_local - 1, -1, -1) if s not in local_qubits
    ][: len(global_qubits)]
    if len(slots) < len(global_qubits):
        raise ValidationError(
            f"shards of 2^{plan.nq_local} amplitudes cannot host gate on {gate.qubits}"
        )
    return [
        ExchangeStep(
            global_qubit=g,
            local_slot=slot,
            pair_bit=g - plan.nq_local,
            amps_per_shard=plan.shard_len // 2,
        )
        for g, slot in zip(global_qubits, slots)
    ]


def exchange_volume(circuit: CircuitIR, plan: ShardPlan) -> int:
    """Total amplitudes redistributed over the run (static analysis)."""
    total = 0
    for gate in circuit.gates:
        total += len(exchange_steps(gate, plan)) * plan.num_shards * (plan.shard_len // 2)
    return total


# ---------------------------------------------------------------------------
# timing


@dataclass(frozen=True)
class GateTiming:
    gate_index: int
    kind: str
    compute_s: float
    exchange_s: float
    amps_exchanged: int


@dataclass
class TimingRecord:
    nq: int
    p: int
    num_shards: int
    wall_seconds: float
    gates: list[GateTiming] = field(default_factory=list)

    @property
    def compute_seconds(self) -> float:
        return sum(g.compute_s for g in self.gates)

    @property
    def exchange_seconds(self) -> float:
        return sum(g.exchange_s for g in self.gates)

    @property
    def amps_exchanged(self) -> int:
        return sum(g.amps_exchanged for g in self.gates)


TIMING_CSV_FIELDS = (
    "nq",
    "p",
    "num_shards",
    "gate_index",
    "kind",
    "compute_s",
    "exchange_s",
    "amps_exchanged",
)


def write_timing_csv(records: Iterable[TimingRecord], fh: IO[str]) -> None:
    writer = csv.writer(fh)
    writer.writerow(TIMING_CSV_FIELDS)
    for rec in records:
        for g in rec.gates:
            writer.writerow(
                [
                    rec.nq,
                    rec.p,
                    rec.num_shards,
                    g.gate_index,
                    g.kind,
                    f"{g.compute_s:.9f}",
                    f"{g.exchange_s:.9f}",
                    g.amps_exchanged,
                ]
            )


# ---------------------------------------------------------------------------
# workers


class _ShardWorker(threading.Thread):
    """Owns one shard; executes coordinator commands until told to stop."""

    def __init__(
        self,
        shard: int,
        plan: ShardPlan,
        dtype: np.dtype,
        inbox: queue.Queue,
        mailboxes: list[queue.Queue],
        done_q: queue.Queue,
    ) -> None:
        super().__init__(name=f"shard-{shard}", daemon=True)
        self.shard = shard
        self.plan = plan
        self.dtype = dtype
        self.inbox = inbox
        self.mailboxes = mailboxes
        self.done_q = done_q
        self._stash: dict = {}

    def run(self) -> None:
        try:
            block = np.zeros(self.plan.shard_len, dtype=self.dtype)
            if self.shard == 0:
                block[0] = 1.0
            while True:
                msg = self.inbox.get()
                op = msg[0]
                if op == "gate":
                    _, idx, gate, steps, local_qubits = msg
                    compute_s, exchange_s, sent = self._run_gate(
                        block, idx, gate, steps, local_qubits
                    )
                    self.done_q.put(("done", self.shard, idx, compute_s, exchange_s, sent))
                elif op == "collect":
                    self.done_q.put(("state", self.shard, block))
                elif op == "stop":
                    return
                else:
                    raise AbortedRunError(f"unknown worker command {op!r}")
        except BaseException as exc:  # noqa: BLE001 - surfaced to the coordinator
            self.done_q.put(("error", self.shard, exc))

    def _run_gate(self, block, idx, gate, steps, local_qubits):
        exchange_s = 0.0
        sent = 0
        for k, step in enumerate(steps):
            exchange_s += self._swap_half(block, step, (idx, k, "out"))
            sent += step.amps_per_shard
        t0 = time.perf_counter()
        _apply_gate_kernel(block, gate, local_qubits)
        compute_s = time.perf_counter() - t0
        for k in range(len(steps) - 1, -1, -1):
            exchange_s += self._swap_half(block, steps[k], (idx, k, "back"))
        return compute_s, exchange_s, sent

    def _swap_half(self, block: np.ndarray, step: ExchangeStep, tag) -> float:
        peer = step.partner(self.shard)
        # the low shard of the pair trades its upper half for the peer's
        # lower half, which transposes the global qubit with the slot bit
        half = 1 - ((self.shard >> step.pair_bit) & 1)
        view = block.reshape(-1, 2, 1 << step.local_slot)
        self.mailboxes[peer].put((tag, view[:, half, :].copy()))
        t0 = time.perf_counter()
        incoming = self._recv(tag)
        view[:, half, :] = incoming
        return time.perf_counter() - t0

    def _recv(self, tag):
        while True:
            if tag in self._stash:
                return self._stash.pop(tag)
            got_tag, payload = self.mailboxes[self.shard].get(timeout=_RECV_TIMEOUT_S)
            if got_tag == "abort":
                raise AbortedRunError("peer shard aborted during exchange")
            if got_tag == tag:
                return payload
            # a faster peer can run ahead within a gate; keep its block for later
            self._stash[got_tag] = payload


# ---------------------------------------------------------------------------
# coordinator


def _gate_plan(circuit: CircuitIR, plan: ShardPlan):
    """Precompute (gate, steps, effective local qubits) for every gate."""
    out = []
    for gate in circuit.gates:
        steps = exchange_steps(gate, plan)
        slot_of = {s.global_qubit: s.local_slot for s in steps}
        local = tuple(slot_of.get(q, q) for q in gate.qubits)
        out.append((gate, steps, local))
    return out


def run_circuit_sharded(
    circuit: CircuitIR,
    plan: ShardPlan,
    precision: Precision | str = Precision.FP32,
    memory_budget: int | None = None,
) -> tuple[StateVector, TimingRecord]:
    """Run the gate list across shards; returns the full state plus timings.

    A single-shard plan degenerates to the dense engine: same kernels,
    same order, bit-identical amplitudes.
    """
    precision = Precision.coerce(precision)
    if circuit.num_qubits != plan.nq:
        raise ValidationError(
            f"circuit has {circuit.num_qubits} qubits but plan covers {plan.nq}"
        )
    check_memory(plan.nq, precision, memory_budget)
    gate_plan = _gate_plan(circuit, plan)

    n = plan.num_shards
    mailboxes = [queue.Queue() for _ in range(n)]
    inboxes = [queue.Queue() for _ in range(n)]
    done_q: queue.Queue = queue.Queue()
    workers = [
        _ShardWorker(s, plan, precision.dtype, inboxes[s], mailboxes, done_q)
        for s in range(n)
    ]
    for w in workers:
        w.start()

    def abort(cause: BaseException) -> None:
        for box in mailboxes:
            box.put(("abort", None))
        for box in inboxes:
            box.put(("stop",))
        raise AbortedRunError(f"shard worker failed: {cause}") from cause

    wall0 = time.perf_counter()
    gate_rows: list[GateTiming] = []
    try:
        for idx, (gate, steps, local_qubits) in enumerate(gate_plan):
            for box in inboxes:
                box.put(("gate", idx, gate, steps, local_qubits))
            computes, exchanges, sent_total = [], [], 0
            for _ in range(n):
                msg = done_q.get(timeout=_RECV_TIMEOUT_S)
                if msg[0] == "error":
                    abort(msg[2])
                _, _, got_idx, compute_s, exchange_s, sent = msg
                if got_idx != idx:
                    abort(AbortedRunError(f"barrier mismatch at gate {idx}"))
                computes.append(compute_s)
                exchanges.append(exchange_s)
                sent_total += sent
            gate_rows.append(
                GateTiming(
                    gate_index=idx,
                    kind=gate.kind,
                    compute_s=max(computes),
                    exchange_s=max(exchanges),
                    amps_exchanged=sent_total,
                )
            )
        for box in inboxes:
            box.put(("collect",))
        blocks: dict[int, np.ndarray] = {}
        for _ in range(n):
            msg = done_q.get(timeout=_RECV_TIMEOUT_S)
            if msg[0] == "error":
                abort(msg[2])
            blocks[msg[1]] = msg[2]
    finally:
        for box in inboxes:
            box.put(("stop",))
        for w in workers:
            w.join(timeout=5.0)

    wall = time.perf_counter() - wall0
    amps = np.concatenate([blocks[s] for s in range(n)])
    record = TimingRecord(
        nq=plan.nq,
        p=circuit.p,
        num_shards=n,
        wall_seconds=wall,
        gates=gate_rows,
    )
    return StateVector(plan.nq, amps), record


# ---------------------------------------------------------------------------
# scaling sweeps


@dataclass
class SweepConfig:
    """Benchmark sweep: strong scaling (fixed nq, varying shards) or
    problem-size scaling (varying nq, shards growing with it)."""

    mode: str = "strong"
    p: int = 3
    delta_beta: float = 0.2
    delta_gamma: float = 0.2
    seed: int = 1
    precision: Precision | str = Precision.FP32
    repeat: int = 1
    memory_budget: int | None = None
    nq: int | None = None
    shard_counts: tuple[int, ...] = (1, 2, 4)
    nq_values: tuple[int, ...] = ()
    nq_local: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("strong", "size"):
            raise ValidationError(f"sweep mode must be 'strong' or 'size', got {self.mode!r}")
        if self.repeat < 1:
            raise ValidationError(f"repeat must be positive, got {self.repeat}")
        if self.mode == "strong" and (self.nq is None or not self.shard_counts):
            raise ValidationError("strong-scaling sweep needs nq and shard_counts")
        if self.mode == "size" and (not self.nq_values or self.nq_local is None):
            raise ValidationError("size sweep needs nq_values and nq_local")


def scaling_sweep(cfg: SweepConfig) -> list[TimingRecord]:
    params = LrQaoaParams(p=cfg.p, delta_beta=cfg.delta_beta, delta_gamma=cfg.delta_gamma)
    runs: list[tuple[CircuitIR, ShardPlan]] = []
    if cfg.mode == "strong":
        circuit = build_circuit(generate_instance(cfg.nq, cfg.seed), params)
        for count in cfg.shard_counts:
            runs.append((circuit, plan_for_shard_count(cfg.nq, count)))
    else:
        for nq in cfg.nq_values:
            if nq < cfg.nq_local:
                raise ValidationError(f"nq={nq} below nq_local={cfg.nq_local}")
            circuit = build_circuit(generate_instance(nq, cfg.seed), params)
            runs.append((circuit, plan_shards(nq, cfg.nq_local)))
    records = []
    for circuit, plan in runs:
        for _ in range(cfg.repeat):
            _, record = run_circuit_sharded(
                circuit, plan, cfg.precision, cfg.memory_budget
            )
            records.append(record)
    return records
