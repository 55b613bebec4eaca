"""Closed-form security quantities, figure reproduction, and empirical
validation of the routing distribution.

The capture probability of a stratified network with jointly randomized
routing is the product of the adversary's per-layer throughput shares;
the single-distribution parallel baseline stays at the plain share no
matter how many layers run. The Monte Carlo path drives the full
simulator and checks the empirical all-adversarial-path rate against the
closed form.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

from mixroute import wire
from mixroute.topology import MixSpec

FIGURE_FRACTIONS = (0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40)
FIGURE_LAYERS = (3, 4, 5, 6, 7)
FIGURE_FRACTION_FIXED = 0.25
FIGURE_LAYERS_FIXED = 4

MODES = ("mpr", "parallel-baseline")


@dataclass(frozen=True)
class CaptureQuery:
    fractions: tuple  # per-layer adversarial throughput share
    mode: str = "mpr"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        for f in self.fractions:
            if not 0.0 <= f <= 1.0:
                raise ValueError(f"fraction {f} outside [0, 1]")
        if not self.fractions:
            raise ValueError("at least one layer required")


def path_probability(path, topology) -> float:
    """Probability that a message follows the given ordered mix path."""
    if len(path) != topology.depth:
        raise ValueError(
            f"path has {len(path)} mixes but the network has {topology.depth} layers"
        )
    prob = 1.0
    for layer_idx, mix_id in enumerate(path, start=1):
        caps = dict(topology.capacities(layer_idx))
        if mix_id not in caps:
            raise ValueError(f"{mix_id!r} is not a layer-{layer_idx} mix")
        prob *= caps[mix_id] / topology.layer_total
    return prob


def capture_probability(query: CaptureQuery) -> float:
    """Probability that a message is routed only through adversarial
    mixes: the per-layer product under joint routing, the constant
    per-layer share under the parallel baseline."""
    first = query.fractions[0]
    uniform = all(f == first for f in query.fractions)
    if query.mode == "mpr":
        if uniform:
            return first ** len(query.fractions)
        prob = 1.0
        for f in query.fractions:
            prob *= f
        return prob
    if not uniform:
        raise ValueError("the parallel baseline assumes one uniform fraction")
    return first


def figure_tables():
    """The two reference grids: capture vs adversary share at 4 layers,
    and capture vs layer count at a 0.25 share."""
    table_a = [
        (
            f,
            capture_probability(CaptureQuery((f,) * FIGURE_LAYERS_FIXED, "mpr")),
            capture_probability(CaptureQuery((f,) * FIGURE_LAYERS_FIXED, "parallel-baseline")),
        )
        for f in FIGURE_FRACTIONS
    ]
    table_b = [
        (
            l,
            capture_probability(CaptureQuery((FIGURE_FRACTION_FIXED,) * l, "mpr")),
            capture_probability(
                CaptureQuery((FIGURE_FRACTION_FIXED,) * l, "parallel-baseline")
            ),
        )
        for l in FIGURE_LAYERS
    ]
    return table_a, table_b


def format_table_a_csv(rows) -> str:
    lines = ["adversary_fraction,mpr_capture,baseline_capture"]
    lines += [f"{f!r},{m!r},{b!r}" for f, m, b in rows]
    return "\n".join(lines) + "\n"


def format_table_b_csv(rows) -> str:
    lines = ["layers,mpr_capture,baseline_capture"]
    lines += [f"{l},{m!r},{b!r}" for l, m, b in rows]
    return "\n".join(lines) + "\n"


# --- randomness-bias estimate ------------------------------------------------


@dataclass(frozen=True)
class BiasEstimate:
    success_probability: float
    success_probability_exact: Fraction
    valid_set_size: Fraction
    formula: str = "n / (2^bits * (b/B))"
    derivation_note: str = (
        "the companion count |V| = (2^bits / w) * (b/B) * w simplifies to "
        "2^bits * (b/B); combining |V| with n precomputed openings would give "
        "n * (b/B) instead. This estimator reports the stated closed form "
        "unchanged and leaves the tension visible."
    )


def bias_success(n: int, rand_bits: int, b: int, B: int, w: int = 1) -> BiasEstimate:
    """Success probability of biasing the joint randomness with n
    precomputed openings of one commitment, as the stated closed form."""
    if rand_bits < 1:
        raise ValueError("rand_bits must be >= 1")
    if B <= 0 or b <= 0 or b > B:
        raise ValueError("throughputs must satisfy 0 < b <= B")
    if n < 0:
        raise ValueError("n must be >= 0")
    share = Fraction(b, B)
    exact = Fraction(n) / (Fraction(2) ** rand_bits * share)
    valid = (Fraction(2) ** rand_bits / w) * share * w
    return BiasEstimate(float(exact), exact, valid)


# --- Monte Carlo validation ---------------------------------------------------


@dataclass
class MonteCarloResult:
    trials: int
    captured: int
    rate: float
    ci_low: float
    ci_high: float
    analytic: float
    frames: int

    @property
    def ci_contains_analytic(self) -> bool:
        return self.ci_low <= self.analytic <= self.ci_high


def binomial_ci(successes: int, trials: int, z_score: float = 2.5758293):
    """Normal-approximation confidence interval (default 99%)."""
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    half = z_score * math.sqrt(max(p * (1 - p), 1e-12) / trials)
    return max(p - half, 0.0), min(p + half, 1.0)


def capture_config(fraction: float, layers: int, n_messages: int, seed: int, k: int = 1):
    """Simulator config with one adversarial mix per layer holding the
    given throughput share, everything honest in behavior."""
    from mixroute.engine import TimeFrameConfig

    share = Fraction(fraction).limit_denominator(10**6)
    adv_b, total_b = share.numerator, share.denominator
    if adv_b == 0:
        raise ValueError("fraction must be positive to place an adversarial mix")
    mixes = []
    for layer in range(1, layers + 1):
        mixes.append(MixSpec(f"adv-L{layer}", adv_b, layer=layer))
        if total_b - adv_b > 0:
            mixes.append(MixSpec(f"hon-L{layer}", total_b - adv_b, layer=layer))
    return TimeFrameConfig(
        n_messages=n_messages,
        mixes=mixes,
        layers=layers,
        v=2,
        d=1,
        z=1,
        k=k,
        blocks=1,
        seed=seed,
        group_name="schnorr256",
    )


def monte_carlo_capture(
    fraction: float, layers: int, trials: int, seed: int = 0, frame_size: int = 5000
) -> MonteCarloResult:
    """Run full time-frames until `trials` messages have been routed and
    measure how many traveled an all-adversarial path."""
    from mixroute.engine import run_timeframe

    analytic = capture_probability(CaptureQuery((fraction,) * layers, "mpr"))
    routed = 0
    captured = 0
    frames = 0
    while routed < trials:
        n = min(frame_size, trials - routed)
        cfg = capture_config(fraction, layers, n, seed + frames)
        result = run_timeframe(cfg)
        if result.failure:
            raise RuntimeError(f"simulation frame failed: {result.failure}")
        for path in result.message_paths:
            routed += 1
            if path and all(mix.startswith("adv-") for mix in path):
                captured += 1
        frames += 1
    lo, hi = binomial_ci(captured, routed)
    return MonteCarloResult(routed, captured, captured / routed, lo, hi, analytic, frames)


def grind_capture_rate(
    trials: int, fraction: float, n: int, w: int = 8, v: int = 3, seed: int = 0
) -> MonteCarloResult:
    """Empirical steering rate of a grind-limited routing entity.

    Per session, v-1 honest entities draw fresh randomness and the
    adversary (opening last) holds n precomputed candidates; success
    means the target ciphertext lands on the adversary's mix. The
    analytic passive rate is the adversary's quota share, so at n=1 the
    active adversary should do no better than that.
    """
    from mixroute.engine import adversary_grind, derive_rng

    share = Fraction(fraction).limit_denominator(10**6)
    caps = [("adv", share.numerator), ("hon", share.denominator - share.numerator)]
    caps = [(mid, b) for mid, b in caps if b > 0]
    from mixroute.routing import quotas

    quota = quotas(w, [b for _, b in caps])[0 if caps[0][0] == "adv" else 1]
    passive = quota / w
    analytic = 1.0 - (1.0 - passive) ** n if n else 0.0

    rng = derive_rng(seed, "grind-experiment")
    captured = 0
    for _ in range(trials):
        honest = [rng.getrandbits(256).to_bytes(32, "big") for _ in range(v - 1)]
        candidates = [rng.getrandbits(256).to_bytes(32, "big") for _ in range(n)]
        success, _ = adversary_grind(honest, candidates, w, caps, 1, "adv")
        captured += int(success)
    lo, hi = binomial_ci(captured, trials)
    return MonteCarloResult(trials, captured, captured / trials, lo, hi, analytic, 0)


# --- load balance --------------------------------------------------------------


@dataclass
class LoadRow:
    layer: int
    mix: str
    expected: float
    actual: int
    deviation: float
    bound: int  # number of source batches feeding the layer

    @property
    def within_bound(self) -> bool:
        return self.deviation < max(self.bound, 1)


@dataclass
class LoadReport:
    rows: list = field(default_factory=list)
    max_deviation: float = 0.0

    @property
    def balanced(self) -> bool:
        return all(r.within_bound for r in self.rows)


def load_balance_report(entries) -> LoadReport:
    """Per-mix expected vs actual fetch counts from a transcript.

    Expected load is the layer's total input volume split by throughput
    share; each source batch contributes at most one unit of rounding
    deviation, so actual counts stay within the number of feeding
    batches.
    """
    anchor = next((e for e in entries if e.kind == "PublicKey"), None)
    if anchor is None:
        raise ValueError("transcript has no PublicKey setup entry")
    group, _, _, registry = wire.parse_public_key_body(anchor.body)

    per_layer_counts = {}
    feeders = {}
    for e in entries:
        if e.kind == "InputCiphertexts":
            mix, attempt, cts = wire.parse_batch_body(group, e.body)
            layer = per_layer_counts.setdefault(e.ctr, {})
            layer[mix] = layer.get(mix, 0) + len(cts)
        elif e.kind == "RandCommitment":
            sid, _, _ = wire.parse_rand_commitment_body(e.ctr, e.body)
            feeders.setdefault(sid.target, set()).add((sid.ctr, sid.source, sid.batch))

    report = LoadReport()
    for ctr in sorted(per_layer_counts):
        counts = per_layer_counts[ctr]
        total = sum(counts.values())
        layer_mixes = registry.mixes_in_layer(ctr)
        layer_b = sum(s.throughput for s in layer_mixes)
        n_feeders = len(feeders.get(ctr, set())) or 1
        for s in layer_mixes:
            expected = total * s.throughput / layer_b
            actual = counts.get(s.identity, 0)
            deviation = abs(actual - expected)
            report.rows.append(
                LoadRow(ctr, s.identity, expected, actual, deviation, n_feeders)
            )
            report.max_deviation = max(report.max_deviation, deviation)
    return report
