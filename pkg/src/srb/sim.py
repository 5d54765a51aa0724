"""Round-based shard protocol simulator.

Models a sharded network storing coded blocks: a trusted reference
committee emits per-epoch reference blocks (membership, shard assignment,
encoder coefficients, epoch randomness), joins follow the cuckoo rule,
blocks arrive at a fixed per-epoch rate and every full window of L blocks
is encoded as an independent generation, and each joining or displaced node
obtains its coded state by bootstrap-as-repair from alpha + 2p helpers.
Malicious helpers corrupt their shares under a configurable strategy.

Consensus and transaction semantics are out of scope: blocks simply arrive
valid.  Everything is driven by a single seed; identical configs produce
byte-identical reports.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field as dc_field, replace

from . import analytics, codec
from .errors import DecodeFailure, IntegrityError, ShardUnderflowError
from .field import Field, parse_field
from .mbr import MbrParams, message_length

STRATEGIES = ("flip-random-symbols", "zero-out", "consistent-wrong-polynomial")

CONFIG_VERSION = 1

_CONFIG_FIELDS: dict[str, type] = {
    "total_nodes": int,
    "shards": int,
    "malicious": int,
    "k": int,
    "alpha": int,
    "p": int,
    "block_size": int,
    "blocks_per_epoch": int,
    "joins_per_epoch": int,
    "leaves_per_epoch": int,
    "cuckoo_eps": float,
    "strategy": str,
    "seed": int,
    "epochs": int,
    "field_spec": str,
    "cap_malicious_per_shard": bool,
    "balance_ratio_limit": float,
}


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters; every run is fully determined by these."""

    total_nodes: int
    shards: int
    malicious: int = 0
    k: int = 2
    alpha: int = 3
    p: int = 0
    block_size: int = 1024
    blocks_per_epoch: int = 0      # per shard
    joins_per_epoch: int = 0
    leaves_per_epoch: int = 0
    cuckoo_eps: float = 0.01
    strategy: str = "flip-random-symbols"
    seed: int = 0
    epochs: int = 1
    field_spec: str = "binary:16"
    cap_malicious_per_shard: bool = True
    balance_ratio_limit: float = 0.0  # max/min shard size; 0 disables the check

    def __post_init__(self):
        if self.shards < 1:
            raise ValueError("need at least one shard")
        if self.total_nodes % self.shards != 0:
            raise ValueError("total_nodes must be a multiple of shards (N = m * n_S)")
        n_s = self.total_nodes // self.shards
        if self.alpha + 2 * self.p >= n_s:
            raise ValueError(f"need alpha + 2p < n_S (= {n_s})")
        if self.k + 2 * self.p > n_s:
            raise ValueError(f"need k + 2p <= n_S (= {n_s})")
        if self.k < 1 or self.alpha < self.k:
            raise ValueError("need 1 <= k <= alpha")
        if not 0 <= self.malicious <= self.total_nodes:
            raise ValueError("malicious count out of range")
        if self.cap_malicious_per_shard and self.malicious > self.shards * self.p:
            raise ValueError(
                "malicious cap: need T <= m * p (disable cap_malicious_per_shard to exceed)"
            )
        if not 0.0 <= self.cuckoo_eps < 1.0:
            raise ValueError("cuckoo_eps must be in [0, 1)")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")
        if self.epochs < 0 or self.block_size < 1:
            raise ValueError("epochs must be >= 0 and block_size >= 1")
        if min(self.blocks_per_epoch, self.joins_per_epoch, self.leaves_per_epoch) < 0:
            raise ValueError("per-epoch rates must be >= 0")
        if self.balance_ratio_limit < 0.0:
            raise ValueError("balance_ratio_limit must be >= 0 (0 disables)")

    @property
    def n_s(self) -> int:
        return self.total_nodes // self.shards

    @property
    def generation_blocks(self) -> int:
        return message_length(self.k, self.alpha)

    def to_text(self) -> str:
        lines = [f"config_version={CONFIG_VERSION}"]
        for name in _CONFIG_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{name}={value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SimConfig":
        seen: dict[str, object] = {}
        version = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key == "config_version":
                version = int(value)
                continue
            if key not in _CONFIG_FIELDS:
                raise ValueError(f"line {lineno}: unknown config key {key!r}")
            typ = _CONFIG_FIELDS[key]
            if typ is bool:
                if value.lower() not in ("true", "false"):
                    raise ValueError(f"line {lineno}: {key} must be true or false")
                seen[key] = value.lower() == "true"
            elif typ is str:
                seen[key] = value
            else:
                seen[key] = typ(value)
        if version != CONFIG_VERSION:
            raise ValueError(f"config_version must be {CONFIG_VERSION}")
        missing = {"total_nodes", "shards"} - seen.keys()
        if missing:
            raise ValueError(f"missing config keys: {sorted(missing)}")
        return cls(**seen)  # type: ignore[arg-type]


@dataclass
class NodeRecord:
    """One live node: overlay position, shard, coefficient, stored state."""

    node_id: int
    position: float
    shard: int
    gamma: int
    malicious: bool
    states: dict[int, bytes] = dc_field(default_factory=dict)  # generation -> file bytes


@dataclass(frozen=True)
class ReferenceBlock:
    """Per-epoch committee output: full membership with coefficients."""

    epoch: int
    randomness: int
    entries: tuple[tuple[int, int, int], ...]  # (node_id, shard, gamma)


@dataclass(frozen=True)
class JoinResult:
    node_id: int
    shard: int
    displaced: tuple[tuple[int, int, int], ...]  # (node_id, old_shard, new_shard)

    @property
    def needs_bootstrap(self) -> tuple[int, ...]:
        movers = tuple(nid for nid, old, new in self.displaced if old != new)
        return (self.node_id,) + movers


@dataclass(frozen=True)
class ChurnSummary:
    joined: tuple[JoinResult, ...]
    left: tuple[int, ...]


@dataclass
class Network:
    """Mutable simulation state shared by the per-epoch operations."""

    config: SimConfig
    field: Field
    nodes: dict[int, NodeRecord]
    next_node_id: int
    next_gamma: list[int]               # per shard, never reused
    generations_done: list[int]         # per shard
    pending: list[list[bytes]]          # per shard, blocks awaiting encoding
    generation_blocks: dict[tuple[int, int], list[bytes]]  # verification oracle

    def shard_members(self, shard: int) -> list[NodeRecord]:
        return sorted(
            (n for n in self.nodes.values() if n.shard == shard), key=lambda n: n.node_id
        )

    def shard_sizes(self) -> list[int]:
        sizes = [0] * self.config.shards
        for n in self.nodes.values():
            sizes[n.shard] += 1
        return sizes

    def shard_malicious(self) -> list[int]:
        counts = [0] * self.config.shards
        for n in self.nodes.values():
            if n.malicious:
                counts[n.shard] += 1
        return counts

    def shard_of(self, position: float) -> int:
        return math.ceil(position * self.config.shards) - 1

    def alloc_gamma(self, shard: int) -> int:
        value = self.next_gamma[shard]
        if value >= self.field.order:
            raise IntegrityError(f"shard {shard} exhausted the coefficient space of {self.field}")
        self.next_gamma[shard] = value + 1
        return value


def initial_network(config: SimConfig) -> Network:
    """Exactly n_S nodes per shard; malicious ids spread round-robin."""
    rng = random.Random(f"{config.seed}:placement")
    field = parse_field(config.field_spec)
    if field.order < config.n_s:
        raise ValueError(
            f"{field} cannot provide n_S = {config.n_s} distinct coefficients per shard"
        )
    m = config.shards
    net = Network(
        config=config,
        field=field,
        nodes={},
        next_node_id=config.total_nodes,
        next_gamma=[0] * m,
        generations_done=[0] * m,
        pending=[[] for _ in range(m)],
        generation_blocks={},
    )
    for node_id in range(config.total_nodes):
        shard = node_id % m
        position = (shard + 1.0 - rng.random()) / m  # uniform in (shard/m, (shard+1)/m]
        net.nodes[node_id] = NodeRecord(
            node_id=node_id,
            position=position,
            shard=shard,
            gamma=net.alloc_gamma(shard),
            malicious=node_id < config.malicious,
        )
    return net


def _draw_position(net: Network, rng: random.Random, node: NodeRecord) -> float:
    """Uniform in (0, 1]; capped malicious nodes redraw out of full shards."""
    if not (net.config.cap_malicious_per_shard and node.malicious):
        return 1.0 - rng.random()
    counts = [0] * net.config.shards
    for other in net.nodes.values():
        if other.malicious and other.node_id != node.node_id:
            counts[other.shard] += 1
    # The node's own shard stays below the cap without it, so this terminates.
    for _ in range(100_000):
        position = 1.0 - rng.random()
        if counts[net.shard_of(position)] < net.config.p:
            return position
    raise IntegrityError("could not place a malicious node under the per-shard cap")


def cuckoo_join(net: Network, node: NodeRecord, rng: random.Random) -> JoinResult:
    """Place a joining node and displace everyone in the surrounding interval.

    The joiner lands uniformly in (0, 1]; all nodes within eps/2 of its
    position are re-drawn uniformly over (0, 1] (one re-draw, no cascade).
    Displaced nodes that land in a new shard drop their stored state and
    receive a fresh coefficient there; bootstrapping them is the caller's
    job.
    """
    eps = net.config.cuckoo_eps
    node.position = _draw_position(net, rng, node)
    node.shard = net.shard_of(node.position)
    half = eps / 2.0
    displaced_nodes = []
    if eps > 0.0:
        displaced_nodes = sorted(
            (
                rec
                for rec in net.nodes.values()
                if abs(rec.position - node.position) <= half
            ),
            key=lambda rec: rec.node_id,
        )
    node.gamma = net.alloc_gamma(node.shard)
    net.nodes[node.node_id] = node
    displaced = []
    for rec in displaced_nodes:
        old_shard = rec.shard
        rec.position = _draw_position(net, rng, rec)
        rec.shard = net.shard_of(rec.position)
        if rec.shard != old_shard:
            rec.states.clear()
            rec.gamma = net.alloc_gamma(rec.shard)
        displaced.append((rec.node_id, old_shard, rec.shard))
    return JoinResult(node.node_id, node.shard, tuple(displaced))


def epoch_reconfigure(
    net: Network,
    epoch: int,
    rng: random.Random,
    joins: int = 0,
    leaves: int = 0,
) -> tuple[ReferenceBlock, ChurnSummary]:
    """Apply one epoch of churn and emit the reference block.

    Raises ShardUnderflowError as soon as any shard drops below alpha + 2p
    members, the minimum needed to serve a repair.
    """
    cfg = net.config
    floor = cfg.alpha + 2 * cfg.p
    randomness = rng.getrandbits(64)

    left = []
    for _ in range(leaves):
        if not net.nodes:
            break
        victim_id = rng.choice(sorted(net.nodes))
        victim = net.nodes.pop(victim_id)
        left.append(victim_id)
        remaining = sum(1 for n in net.nodes.values() if n.shard == victim.shard)
        if remaining < floor:
            raise ShardUnderflowError(
                f"shard {victim.shard} dropped to {remaining} < alpha + 2p = {floor}"
            )

    joined = []
    for _ in range(joins):
        node = NodeRecord(
            node_id=net.next_node_id, position=0.0, shard=-1, gamma=-1, malicious=False
        )
        net.next_node_id += 1
        joined.append(cuckoo_join(net, node, rng))

    for shard, size in enumerate(net.shard_sizes()):
        if size < floor:
            raise ShardUnderflowError(
                f"shard {shard} dropped to {size} < alpha + 2p = {floor}"
            )

    entries = tuple(
        (n.node_id, n.shard, n.gamma) for n in sorted(net.nodes.values(), key=lambda n: n.node_id)
    )
    per_shard: dict[int, set[int]] = {}
    for _, shard, gamma in entries:
        bucket = per_shard.setdefault(shard, set())
        if gamma in bucket:
            raise IntegrityError(f"duplicate coefficient {gamma} in shard {shard}")
        bucket.add(gamma)
    block = ReferenceBlock(epoch, randomness, entries)
    return block, ChurnSummary(tuple(joined), tuple(left))


def adversary_corrupt(
    share: codec.RepairShare, strategy: str, rng: random.Random
) -> codec.RepairShare:
    """Corrupt a repair share under one of the modeled strategies.

    Colluding helpers that seed rng identically produce evaluations of the
    same wrong polynomial under 'consistent-wrong-polynomial'.
    """
    f = share.field
    q = f.order
    z = share.z
    original = list(share.symbols)
    if strategy == "zero-out":
        symbols = [0] * z
    elif strategy == "flip-random-symbols":
        while True:
            symbols = original[:]
            count = rng.randint(1, z)
            for pos in rng.sample(range(z), count):
                symbols[pos] = rng.randrange(q)
            if symbols != original:
                break
    elif strategy == "consistent-wrong-polynomial":
        symbols = [
            f.poly_eval([rng.randrange(q) for _ in range(share.alpha)], share.gamma)
            for _ in range(z)
        ]
    else:
        raise ValueError(f"unknown corruption strategy {strategy!r}")
    return replace(share, symbols=tuple(symbols))


@dataclass(frozen=True)
class BootstrapEvent:
    epoch: int
    node_id: int
    shard: int
    generation: int
    ok: bool
    corrupted_shares: int
    payload_bytes: int
    header_bytes: int


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    nodes: int
    shard_sizes: tuple[int, ...]
    shard_malicious: tuple[int, ...]
    joins: int
    leaves: int
    displaced: int
    shard_moves: int
    bootstraps_attempted: int
    bootstraps_succeeded: int
    bootstraps_failed: int
    bootstrap_payload_bytes: int
    bootstrap_header_bytes: int
    generations_done: tuple[int, ...]
    storage_total_min: int
    storage_total_max: int
    expected_storage_per_node: tuple[int, ...]  # per shard, payload + headers
    expected_bootstrap_payload_per_generation: int
    balance_ratio: float  # max/min shard size


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    epochs: tuple[EpochStats, ...]
    bootstrap_events: tuple[BootstrapEvent, ...]
    total_joins: int
    total_leaves: int
    total_bootstraps: int
    total_bootstrap_failures: int
    metrics: analytics.MetricsReport


def _measured_storage(net: Network) -> tuple[int, int]:
    totals = [sum(len(b) for b in n.states.values()) for n in net.nodes.values()]
    if not totals:
        return 0, 0
    return min(totals), max(totals)


def _expected_storage(net: Network) -> tuple[int, ...]:
    cfg = net.config
    sb = codec.stored_symbol_bytes(net.field)
    z = -(-cfg.block_size // codec.stripe_symbol_bytes(net.field))
    per_state = cfg.alpha * z * sb + codec.state_header_size(cfg.generation_blocks)
    return tuple(gens * per_state for gens in net.generations_done)


def _bootstrap_one(
    net: Network,
    rec: NodeRecord,
    generation: int,
    epoch: int,
    helper_rng: random.Random,
    params: MbrParams,
) -> BootstrapEvent:
    cfg = net.config
    need = cfg.alpha + 2 * cfg.p
    pool = [
        n
        for n in net.shard_members(rec.shard)
        if n.node_id != rec.node_id and generation in n.states
    ]
    if len(pool) < need:
        raise ShardUnderflowError(
            f"shard {rec.shard} lacks alpha + 2p = {need} helpers holding generation {generation}"
        )
    helpers = helper_rng.sample(pool, need)
    event_seed = f"{cfg.seed}:adversary:{epoch}:{rec.shard}:{rec.node_id}:{generation}"
    shares = []
    corrupted = 0
    for helper in helpers:
        state = codec.state_from_bytes(helper.states[generation])
        share = codec.serve_repair(state, rec.gamma)
        if helper.malicious:
            corrupted += 1
            share = adversary_corrupt(share, cfg.strategy, random.Random(event_seed))
        shares.append(share)
    payload = sum(s.payload_bytes() for s in shares)
    headers = sum(s.header_bytes() for s in shares)
    try:
        state = codec.bootstrap_node(shares, rec.gamma, cfg.p)
    except DecodeFailure:
        if corrupted <= cfg.p:
            raise IntegrityError(
                f"bootstrap of node {rec.node_id} failed with only {corrupted} <= p corrupt shares"
            ) from None
        return BootstrapEvent(
            epoch, rec.node_id, rec.shard, generation, False, corrupted, payload, headers
        )
    encoded = codec.state_to_bytes(state)
    expected = codec.state_to_bytes(
        codec.encode_generation(
            net.generation_blocks[(rec.shard, generation)],
            rec.gamma,
            params,
            net.field,
            generation=generation,
            block_size=cfg.block_size,
        )
    )
    if encoded != expected:
        raise IntegrityError(
            f"bootstrap of node {rec.node_id} returned state differing from direct encoding"
        )
    rec.states[generation] = encoded
    return BootstrapEvent(
        epoch, rec.node_id, rec.shard, generation, True, corrupted, payload, headers
    )


def run_simulation(config: SimConfig) -> SimReport:
    """Run the configured number of epochs; fully deterministic per seed."""
    net = initial_network(config)
    params = MbrParams(config.k, config.alpha, n=config.n_s, p=config.p)
    churn_rng = random.Random(f"{config.seed}:churn")
    payload_rng = random.Random(f"{config.seed}:payload")
    helper_rng = random.Random(f"{config.seed}:helpers")
    l_blocks = config.generation_blocks
    sb = codec.stored_symbol_bytes(net.field)
    z = -(-config.block_size // codec.stripe_symbol_bytes(net.field))
    share_payload = z * sb

    epoch_stats = []
    events: list[BootstrapEvent] = []
    total_joins = total_leaves = 0

    for epoch in range(config.epochs):
        ref, churn = epoch_reconfigure(
            net,
            epoch,
            churn_rng,
            joins=config.joins_per_epoch,
            leaves=config.leaves_per_epoch,
        )
        total_joins += len(churn.joined)
        total_leaves += len(churn.left)
        displaced = sum(len(j.displaced) for j in churn.joined)
        shard_moves = sum(
            1 for j in churn.joined for _, old, new in j.displaced if old != new
        )

        # A node displaced by several joins in one epoch bootstraps once,
        # at its final shard.
        to_bootstrap = list(
            dict.fromkeys(nid for join in churn.joined for nid in join.needs_bootstrap)
        )
        epoch_events: list[BootstrapEvent] = []
        for node_id in to_bootstrap:
            rec = net.nodes[node_id]
            for generation in range(net.generations_done[rec.shard]):
                epoch_events.append(
                    _bootstrap_one(net, rec, generation, epoch, helper_rng, params)
                )

        for shard in range(config.shards):
            for _ in range(config.blocks_per_epoch):
                net.pending[shard].append(payload_rng.randbytes(config.block_size))
                if len(net.pending[shard]) == l_blocks:
                    generation = net.generations_done[shard]
                    blocks = net.pending[shard]
                    for member in net.shard_members(shard):
                        state = codec.encode_generation(
                            blocks,
                            member.gamma,
                            params,
                            net.field,
                            generation=generation,
                            block_size=config.block_size,
                        )
                        member.states[generation] = codec.state_to_bytes(state)
                    net.generation_blocks[(shard, generation)] = blocks
                    net.generations_done[shard] += 1
                    net.pending[shard] = []

        sizes = net.shard_sizes()
        balance = max(sizes) / min(sizes)
        if config.balance_ratio_limit > 0.0 and balance > config.balance_ratio_limit:
            raise IntegrityError(
                f"epoch {epoch}: shard balance ratio {balance:.3f} exceeds "
                f"limit {config.balance_ratio_limit}"
            )
        lo, hi = _measured_storage(net)
        epoch_stats.append(
            EpochStats(
                epoch=epoch,
                nodes=len(net.nodes),
                shard_sizes=tuple(sizes),
                shard_malicious=tuple(net.shard_malicious()),
                joins=len(churn.joined),
                leaves=len(churn.left),
                displaced=displaced,
                shard_moves=shard_moves,
                bootstraps_attempted=len(epoch_events),
                bootstraps_succeeded=sum(1 for e in epoch_events if e.ok),
                bootstraps_failed=sum(1 for e in epoch_events if not e.ok),
                bootstrap_payload_bytes=sum(e.payload_bytes for e in epoch_events),
                bootstrap_header_bytes=sum(e.header_bytes for e in epoch_events),
                generations_done=tuple(net.generations_done),
                storage_total_min=lo,
                storage_total_max=hi,
                expected_storage_per_node=_expected_storage(net),
                expected_bootstrap_payload_per_generation=(config.alpha + 2 * config.p)
                * share_payload,
                balance_ratio=balance,
            )
        )
        events.extend(epoch_events)

    metrics = analytics.comparison_report(
        analytics.ProtocolParams(
            protocol=analytics.SRB,
            n_s=config.n_s,
            total_blocks=l_blocks,
            alpha=config.alpha,
            k=config.k,
            p=config.p,
            block_size=config.block_size,
            total_nodes=config.total_nodes,
            shards=config.shards,
            malicious=config.malicious,
        )
    )
    return SimReport(
        config=config,
        epochs=tuple(epoch_stats),
        bootstrap_events=tuple(events),
        total_joins=total_joins,
        total_leaves=total_leaves,
        total_bootstraps=len(events),
        total_bootstrap_failures=sum(1 for e in events if not e.ok),
        metrics=metrics,
    )


def render_report(report: SimReport) -> str:
    """Structured text: config echo, one record per epoch, totals, comparison."""
    lines = ["# shard simulation report", "report_version=1", ""]
    lines.append(report.config.to_text().rstrip("\n"))
    lines.append("")
    for st in report.epochs:
        pairs = [
            f"epoch={st.epoch}",
            f"nodes={st.nodes}",
            "shard_sizes=" + ",".join(map(str, st.shard_sizes)),
            "shard_malicious=" + ",".join(map(str, st.shard_malicious)),
            f"joins={st.joins}",
            f"leaves={st.leaves}",
            f"displaced={st.displaced}",
            f"shard_moves={st.shard_moves}",
            f"bootstraps_attempted={st.bootstraps_attempted}",
            f"bootstraps_succeeded={st.bootstraps_succeeded}",
            f"bootstraps_failed={st.bootstraps_failed}",
            f"bootstrap_payload_bytes={st.bootstrap_payload_bytes}",
            f"bootstrap_header_bytes={st.bootstrap_header_bytes}",
            "generations_done=" + ",".join(map(str, st.generations_done)),
            f"storage_total_min={st.storage_total_min}",
            f"storage_total_max={st.storage_total_max}",
            "expected_storage_per_node=" + ",".join(map(str, st.expected_storage_per_node)),
            f"expected_bootstrap_payload_per_generation={st.expected_bootstrap_payload_per_generation}",
            f"balance_ratio={st.balance_ratio!r}",
        ]
        lines.append(" ".join(pairs))
    lines.append("")
    lines.append(
        f"totals: joins={report.total_joins} leaves={report.total_leaves} "
        f"bootstraps={report.total_bootstraps} failures={report.total_bootstrap_failures}"
    )
    lines.append("")
    lines.append(analytics.render_metrics(report.metrics).rstrip("\n"))
    return "\n".join(lines) + "\n"
