"""Closed-form cost and security calculators for three sharding protocols.

Compares full replication (RapidChain), fountain-coded storage (SeF) and
the regenerating-code scheme implemented here (SRB) on storage overhead,
bootstrap cost, epoch security, failure-probability bounds, encoding
complexity and throughput.  The SeF figures are analytic only; no fountain
encoder is built.

Conventions: logarithms are natural throughout, the O(.) constant in the
SeF expressions is exposed as ``c`` (default 1), and exact big-integer
binomials back the hypergeometric tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

from .mbr import message_length

RAPIDCHAIN = "rapidchain"
SEF = "sef"
SRB = "srb"
PROTOCOLS = (RAPIDCHAIN, SEF, SRB)

# Probability that the initial committee election fails; adopted constant.
DEFAULT_P_BOOTSTRAP = 2.0 ** -26.36


@dataclass(frozen=True)
class ProtocolParams:
    """Inputs for the protocol comparison; unused fields may stay at 0."""

    protocol: str = SRB
    n_s: int = 0              # nodes per shard
    total_blocks: int = 0     # L, blocks processed per shard
    alpha: int = 0            # coded blocks stored per node (SRB)
    k: int = 0                # reconstruction threshold (SRB)
    p: int = 0                # tolerated malicious helpers (SRB)
    block_size: int = 0       # bytes; 0 reports block units only
    delta: float = 0.1        # SeF decode-failure parameter
    rho: int = 2              # SeF coded blocks per node
    c: float = 1.0            # constant in the SeF O(.) term
    total_nodes: int = 0      # N
    shards: int = 0           # m
    malicious: int = 0        # T
    mu: float = 1.0           # honest-block ratio
    p_frac: float = 0.0       # malicious fraction (throughput)
    v: float = 1.0            # average transaction size
    tau: float = 1.0          # latency factor

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must be in (0, 1)")
        if not 0.0 <= self.p_frac < 1.0:
            raise ValueError("p_frac must be in [0, 1)")
        for name in ("n_s", "total_blocks", "alpha", "k", "p", "block_size",
                     "rho", "total_nodes", "shards", "malicious"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.k > 0 and self.alpha > 0 and self.total_blocks > 0:
            derived = message_length(self.k, self.alpha)
            if derived != self.total_blocks:
                raise ValueError(
                    f"total_blocks={self.total_blocks} inconsistent with "
                    f"k={self.k}, alpha={self.alpha} (expected {derived})"
                )


def reference_example_params() -> ProtocolParams:
    """The published worked example: 2 MB blocks, 16000 nodes, 16 shards."""
    return ProtocolParams(
        protocol=SRB,
        n_s=1000,
        total_blocks=1065,
        alpha=50,
        k=30,
        p=0,
        block_size=2_000_000,
        delta=0.1,
        rho=2,
        c=1.0,
        total_nodes=16000,
        shards=16,
    )


def _sef_overhead_blocks(params: ProtocolParams) -> float:
    l = params.total_blocks
    return l + params.c * math.sqrt(l) * math.log(l / params.delta) ** 2


def storage_overhead(params: ProtocolParams) -> Fraction | float:
    """Coded symbols stored across the shard divided by L."""
    if params.protocol == RAPIDCHAIN:
        return Fraction(params.n_s)
    if params.protocol == SEF:
        return 1.0 + params.delta
    if params.total_blocks == 0:
        raise ValueError("total_blocks must be > 0")
    return Fraction(params.n_s * params.alpha, params.total_blocks)


def storage_blocks_per_node(params: ProtocolParams) -> int:
    if params.protocol == RAPIDCHAIN:
        return params.total_blocks
    if params.protocol == SEF:
        return params.rho
    return params.alpha


def bootstrap_cost(params: ProtocolParams, secure: bool = False) -> float:
    """Blocks a joining node downloads; secure=True adds the 2p SRB margin."""
    if params.protocol == RAPIDCHAIN:
        return float(params.total_blocks)
    if params.protocol == SEF:
        return _sef_overhead_blocks(params)
    return float(params.alpha + (2 * params.p if secure else 0))


@dataclass(frozen=True)
class SecurityGuarantee:
    nodes: int                     # floor, clamped at 0
    exact: Fraction | float
    clamped: bool = False


def epoch_security(params: ProtocolParams) -> SecurityGuarantee:
    """Maximum tolerable malicious nodes per shard, t_S."""
    if params.protocol == RAPIDCHAIN:
        exact: Fraction | float = Fraction(params.n_s, 2)
    elif params.protocol == SEF:
        exact = params.n_s - _sef_overhead_blocks(params) / params.rho
    else:
        exact = Fraction(params.n_s - params.alpha, 2)
    if exact < 0:
        return SecurityGuarantee(0, exact, clamped=True)
    return SecurityGuarantee(math.floor(exact), exact)


def hypergeom_tail(population: int, malicious: int, sample: int, threshold: int) -> float:
    """P[at least threshold malicious in a uniform sample], exactly.

    Sum over l = threshold..sample of C(T,l) C(N-T, n-l) / C(N, n), with
    big-integer binomials; impossible terms contribute zero.
    """
    if not 0 <= malicious <= population:
        raise ValueError("need 0 <= malicious <= population")
    if not 0 <= threshold <= sample <= population:
        raise ValueError("need 0 <= threshold <= sample <= population")
    total = math.comb(population, sample)
    acc = sum(
        math.comb(malicious, l) * math.comb(population - malicious, sample - l)
        for l in range(threshold, sample + 1)
    )
    return float(Fraction(acc, total))


def hoeffding_bound(population: int, malicious: int, sample: int, threshold: int) -> float:
    """Hoeffding upper bound on the hypergeometric tail.

    G = ((g/r)^r ((1-g)/(1-r))^(1-r))^sample with g = T/N, r = t/n;
    valid only for r > g.
    """
    if not 0 <= malicious <= population:
        raise ValueError("need 0 <= malicious <= population")
    if not 0 <= threshold <= sample <= population:
        raise ValueError("need 0 <= threshold <= sample <= population")
    g = malicious / population
    r = threshold / sample
    if r <= g:
        raise ValueError("bound regime violated: need threshold/sample > malicious/population")
    if r == 1.0:
        return g**sample
    if g == 0.0:
        return 0.0
    return ((g / r) ** r * ((1.0 - g) / (1.0 - r)) ** (1.0 - r)) ** sample


def failure_upper_bound(
    shards: int,
    shard_failure_bound: float,
    p_bootstrap: float = DEFAULT_P_BOOTSTRAP,
) -> float:
    """U = p_bootstrap + m * G, clamped to 1."""
    if not 0.0 <= shard_failure_bound <= 1.0:
        raise ValueError("shard_failure_bound must be in [0, 1]")
    if not 0.0 <= p_bootstrap <= 1.0:
        raise ValueError("p_bootstrap must be in [0, 1]")
    return min(1.0, p_bootstrap + shards * shard_failure_bound)


@dataclass(frozen=True)
class ThroughputBound:
    sigma: float
    resiliency: float
    sigma_rapidchain: float
    resiliency_rapidchain: float = 0.5


def throughput_factor(params: ProtocolParams, alpha: float | None = None) -> ThroughputBound:
    """Throughput-factor bound sigma and the shard resiliency a.

    a = 1/2 - alpha / (2 ln n) with n the total node count; sigma =
    mu * tau * (n / ln n) * ((a - p_frac)^2 / (2 + a - p_frac)) / v.
    The alpha override admits real values for limit studies.
    """
    n = params.total_nodes
    if n <= 1:
        raise ValueError("need total_nodes > 1")
    if params.v <= 0:
        raise ValueError("need v > 0")
    a_val = params.alpha if alpha is None else alpha
    ln_n = math.log(n)
    a = 0.5 - a_val / (2.0 * ln_n)
    if a - params.p_frac <= 0:
        raise ValueError("resiliency exhausted: a - p_frac <= 0 for these parameters")

    def bound(res: float) -> float:
        margin = res - params.p_frac
        return params.mu * params.tau * (n / ln_n) * (margin**2 / (2.0 + margin)) / params.v

    return ThroughputBound(bound(a), a, bound(0.5))


@dataclass(frozen=True)
class EncodingCost:
    units: float
    note: str = ""


def encoding_cost(params: ProtocolParams, phase: str) -> EncodingCost:
    """Nominal field-multiplication counts for SRB encode and bootstrap."""
    if phase == "init":
        return EncodingCost(
            float(params.alpha**3),
            "alpha^3 multiplications per node (nominal; one row costs alpha^2 per stripe)",
        )
    if phase == "bootstrap":
        r = params.alpha + 2 * params.p
        if r <= math.e:
            return EncodingCost(float(r * r), "r <= e so ln ln r is undefined; raw r^2 reported")
        return EncodingCost(
            r**2 * math.log(r) ** 2 * math.log(math.log(r)),
            "r^2 ln^2 r ln ln r with r = alpha + 2p",
        )
    raise ValueError(f"unknown phase {phase!r}")


@dataclass(frozen=True)
class ProtocolMetrics:
    protocol: str
    storage_overhead: Fraction | float
    storage_blocks: int
    bootstrap_blocks: float
    bootstrap_blocks_secure: float | None
    security_nodes: int
    security_exact: Fraction | float
    security_clamped: bool
    hypergeom: float | None
    hoeffding: float | None
    upper_bound: float | None
    hoeffding_note: str = ""


@dataclass(frozen=True)
class MetricsReport:
    params: ProtocolParams
    rows: tuple[ProtocolMetrics, ...]
    throughput: ThroughputBound | None
    throughput_note: str
    encoding_init: EncodingCost
    encoding_bootstrap: EncodingCost
    notes: tuple[str, ...]


def comparison_report(params: ProtocolParams) -> MetricsReport:
    """Three-protocol comparison of storage, bootstrap, security and bounds."""
    rows = []
    for proto in PROTOCOLS:
        pp = replace(params, protocol=proto)
        sec = epoch_security(pp)
        hyper = hoeff = upper = None
        note = ""
        if params.total_nodes > 0 and params.shards > 0 and params.malicious > 0:
            hyper = hypergeom_tail(params.total_nodes, params.malicious, params.n_s, sec.nodes)
            try:
                hoeff = hoeffding_bound(
                    params.total_nodes, params.malicious, params.n_s, sec.nodes
                )
                upper = failure_upper_bound(params.shards, hoeff)
            except ValueError as exc:
                note = str(exc)
        rows.append(
            ProtocolMetrics(
                protocol=proto,
                storage_overhead=storage_overhead(pp),
                storage_blocks=storage_blocks_per_node(pp),
                bootstrap_blocks=bootstrap_cost(pp),
                bootstrap_blocks_secure=bootstrap_cost(pp, secure=True) if proto == SRB else None,
                security_nodes=sec.nodes,
                security_exact=sec.exact,
                security_clamped=sec.clamped,
                hypergeom=hyper,
                hoeffding=hoeff,
                upper_bound=upper,
                hoeffding_note=note,
            )
        )
    throughput = None
    throughput_note = ""
    if params.total_nodes > 1:
        try:
            throughput = throughput_factor(params)
        except ValueError as exc:
            throughput_note = str(exc)
    notes = (
        "logarithms are natural; SeF O(.) constant c=" + repr(params.c),
        "p_bootstrap default 2^-26.36",
        "SRB bootstrap figure assumes p=0; secure variant downloads alpha+2p blocks",
    )
    return MetricsReport(
        params=params,
        rows=tuple(rows),
        throughput=throughput,
        throughput_note=throughput_note,
        encoding_init=encoding_cost(params, "init"),
        encoding_bootstrap=encoding_cost(params, "bootstrap"),
        notes=notes,
    )


def format_bytes(n: float) -> str:
    """Decimal byte units: 100000000 -> '100MB', 2130000000 -> '2.13GB'."""
    units = ["B", "kB", "MB", "GB", "TB", "PB"]
    value = float(n)
    idx = 0
    while idx + 1 < len(units) and abs(value) >= 1000.0:
        value /= 1000.0
        idx += 1
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return f"{text}{units[idx]}"


def _fmt_ratio(v: Fraction | float) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{float(v):.4g}"
    return f"{v:.4g}"


def _fmt_blocks(blocks: float, block_size: int) -> str:
    count = f"{blocks:g}"
    if block_size > 0:
        return f"{count} blocks ({format_bytes(blocks * block_size)})"
    return f"{count} blocks"


def render_metrics(report: MetricsReport) -> str:
    """Structured-text comparison table, deterministic for identical inputs."""
    p = report.params
    labels = {RAPIDCHAIN: "RapidChain", SEF: "SeF", SRB: "SRB"}
    lines = [
        "protocol comparison",
        f"inputs: n_s={p.n_s} L={p.total_blocks} alpha={p.alpha} k={p.k} p={p.p} "
        f"block_size={p.block_size} delta={p.delta!r} rho={p.rho} c={p.c!r} "
        f"N={p.total_nodes} m={p.shards} T={p.malicious}",
        "",
    ]
    header = f"{'metric':<28}" + "".join(f"{labels[r.protocol]:>24}" for r in report.rows)
    lines.append(header)
    lines.append("-" * len(header))

    def row(label, cells):
        lines.append(f"{label:<28}" + "".join(f"{c:>24}" for c in cells))

    row("storage overhead", [_fmt_ratio(r.storage_overhead) for r in report.rows])
    row("storage per node", [_fmt_blocks(r.storage_blocks, p.block_size) for r in report.rows])
    row("bootstrap cost", [_fmt_blocks(r.bootstrap_blocks, p.block_size) for r in report.rows])
    row(
        "bootstrap cost (p tolerant)",
        [
            _fmt_blocks(r.bootstrap_blocks_secure, p.block_size)
            if r.bootstrap_blocks_secure is not None
            else "-"
            for r in report.rows
        ],
    )
    row(
        "security guarantee t_S",
        [
            f"{r.security_nodes} nodes" + (" (clamped)" if r.security_clamped else "")
            for r in report.rows
        ],
    )
    if any(r.hypergeom is not None for r in report.rows):
        row(
            "shard failure prob H",
            [f"{r.hypergeom:.3e}" if r.hypergeom is not None else "-" for r in report.rows],
        )
        row(
            "Hoeffding bound G",
            [
                f"{r.hoeffding:.3e}" if r.hoeffding is not None else "regime n/a"
                for r in report.rows
            ],
        )
        row(
            "system bound U",
            [f"{r.upper_bound:.3e}" if r.upper_bound is not None else "-" for r in report.rows],
        )
    lines.append("")
    lines.append(
        f"encoding (init): {report.encoding_init.units:g} mult-units"
        f" [{report.encoding_init.note}]"
    )
    lines.append(
        f"encoding (bootstrap): {report.encoding_bootstrap.units:g} units"
        f" [{report.encoding_bootstrap.note}]"
    )
    if report.throughput is not None:
        t = report.throughput
        lines.append(
            f"throughput factor: sigma_SRB < {t.sigma:.6g} (a={t.resiliency:.6g})"
            f" vs sigma_RC < {t.sigma_rapidchain:.6g} (a=0.5)"
        )
    elif report.throughput_note:
        lines.append(f"throughput factor: n/a ({report.throughput_note})")
    for note in report.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"
