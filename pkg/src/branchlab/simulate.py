"""Stochastic branching simulation with selection and heavy-tailed mutation.

Two models share one engine: ``fmm`` adds only the single fittest mutant of
each generation, ``mmm`` adds every mutant.  The engine runs in two modes:

* exact    integer class counts; offspring are Poisson-thinned into
           independent non-mutant and mutant streams (equal in law to
           per-offspring marking, O(classes) instead of O(population)).
* logdet   log-domain deterministic class counts once the expected event
           count passes ``exact_event_cap``; the fittest mutant stays
           stochastic, and the MMM mutant spectrum is aggregated into
           geometric log-fitness bins topped by the exactly sampled maximum.

Populations are class-aggregated (log-fitness, count) lists; totals carry
as log X and log of the fitness-weighted sum, refreshed every step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, DomainError, TooManyRestarts
from .tails import TailModel, inverse_log_tail, log_tail, sample_fitness, sample_max_of_n

MODE_EXACT = "exact"
MODE_LOGDET = "logdet"

MAX_RESTARTS = 10_000

# Poisson means above this use a normal approximation with continuity
# correction; the error is invisible in log domain.
_NORMAL_APPROX_MEAN = 1e9

# logdet classes decayed below this count are dropped; a decaying class
# (fitness below 1/(1-beta)) can never grow back.
_COUNT_FLOOR = 1e-12
_LOG_COUNT_FLOOR = math.log(_COUNT_FLOOR)


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one stochastic run."""

    model: str  # "fmm" | "mmm"
    tail: TailModel
    beta: float
    log_f: float
    t_max: int
    seed: int
    exact_event_cap: float = 1e7
    mmm_bins_per_decade: int = 8
    mmm_poisson_threshold: float = 1e4
    restart_on_extinction: bool = True
    keep_w_history: bool = True

    def __post_init__(self):
        if self.model not in ("fmm", "mmm"):
            raise DomainError(f"unknown model {self.model!r}")
        if not 0.0 < self.beta < 1.0:
            raise DomainError("beta must be in (0, 1)")
        if self.t_max < 0:
            raise DomainError("t_max must be >= 0")
        if self.exact_event_cap <= 0 or self.mmm_poisson_threshold <= 0:
            raise DomainError("caps must be positive")
        if self.mmm_bins_per_decade < 1:
            raise DomainError("mmm_bins_per_decade must be >= 1")


@dataclass
class PopulationState:
    """Class-aggregated population at one generation.

    ``count`` holds nonnegative integers in exact mode and log-counts in
    logdet mode.  Classes are sorted by log-fitness descending with unique
    keys; ``birth`` records the generation each class first appeared.
    """

    t: int
    log_fit: np.ndarray
    count: np.ndarray
    birth: np.ndarray
    mode: str
    log_X: float = -np.inf
    log_fitsum: float = -np.inf

    @property
    def n_classes(self) -> int:
        return int(self.log_fit.size)

    @property
    def extinct(self) -> bool:
        return self.mode == MODE_EXACT and self.n_classes == 0

    def dominant_age(self) -> int:
        """Age of the largest class, -1 when the population is empty."""
        if self.n_classes == 0:
            return -1
        return int(self.t - self.birth[int(np.argmax(self.count))])


@dataclass
class RunRecord:
    """Per-generation time series of one (possibly restarted) run."""

    config: SimConfig
    t: np.ndarray
    log_X: np.ndarray
    log_W: np.ndarray | None  # None when keep_w_history is off
    n_classes: np.ndarray
    mode: np.ndarray  # 0 exact, 1 logdet
    dominant_age: np.ndarray
    outcome: str  # "survived" | "extinct"
    extinct_t: int | None
    restarts: int


def _logsumexp(values: np.ndarray) -> float:
    if values.size == 0:
        return -np.inf
    m = float(values.max())
    if m == -np.inf:
        return -np.inf
    return m + math.log(float(np.sum(np.exp(values - m))))


def _poisson(rng: np.random.Generator, lam) -> np.ndarray:
    """Poisson draws as floats; normal approximation above 1e9 mean."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.empty(lam.shape)
    big = lam > _NORMAL_APPROX_MEAN
    if big.any():
        out[big] = np.floor(rng.normal(lam[big], np.sqrt(lam[big])) + 0.5)
    small = ~big
    if small.any():
        out[small] = rng.poisson(lam[small])
    return np.maximum(out, 0.0)


def _rebuild(t, log_fit, count, birth, mode) -> PopulationState:
    """Sort descending, merge duplicate keys, refresh totals."""
    log_fit = np.asarray(log_fit, dtype=float)
    count = np.asarray(count)
    birth = np.asarray(birth, dtype=np.int64)
    if log_fit.size:
        keys, inverse = np.unique(log_fit, return_inverse=True)
        if keys.size != log_fit.size:
            if mode == MODE_EXACT:
                merged = np.zeros(keys.size, dtype=np.int64)
                np.add.at(merged, inverse, count.astype(np.int64))
            else:
                merged = np.full(keys.size, -np.inf)
                for pos, c in zip(inverse, count):
                    merged[pos] = np.logaddexp(merged[pos], c)
            first = np.full(keys.size, np.iinfo(np.int64).max, dtype=np.int64)
            np.minimum.at(first, inverse, birth)
            log_fit, count, birth = keys, merged, first
        order = np.argsort(log_fit)[::-1]
        log_fit, count, birth = log_fit[order], count[order], birth[order]
    if mode == MODE_EXACT:
        count = count.astype(np.int64)
        log_X = math.log(float(count.sum())) if count.size and count.sum() > 0 else -np.inf
        with np.errstate(divide="ignore"):
            log_counts = np.log(count.astype(float))
    else:
        count = count.astype(float)
        log_X = _logsumexp(count)
        log_counts = count
    log_fitsum = _logsumexp(log_counts + log_fit) if count.size else -np.inf
    return PopulationState(
        t=t, log_fit=log_fit, count=count, birth=birth, mode=mode,
        log_X=log_X, log_fitsum=log_fitsum,
    )


def initial_state(cfg: SimConfig) -> PopulationState:
    """Single founder individual at the configured log-fitness."""
    return _rebuild(
        0,
        np.array([cfg.log_f]),
        np.array([1], dtype=np.int64),
        np.array([0], dtype=np.int64),
        MODE_EXACT,
    )


def to_logdet(state: PopulationState) -> PopulationState:
    """Permanently switch a state to deterministic log-count bookkeeping."""
    if state.mode == MODE_LOGDET:
        return state
    keep = state.count > 0
    with np.errstate(divide="ignore"):
        log_counts = np.log(state.count[keep].astype(float))
    return _rebuild(state.t, state.log_fit[keep], log_counts, state.birth[keep], MODE_LOGDET)


def sample_fittest_mutant(log_lambda: float, tail: TailModel, rng: np.random.Generator, size=None):
    """Draw log W from the fittest-mutant law P(W <= x) = exp(-lambda*G(x)).

    ``log_lambda`` is log of the expected mutant count (beta times the
    fitness-weighted population sum).  Returns -inf with probability
    exp(-lambda), the atom where no mutant clears the support minimum.
    """
    u = rng.random(size)
    with np.errstate(divide="ignore"):
        s = np.log(-np.log(u))
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(s)
    out = np.full(s.shape, -np.inf)
    hit = s < log_lambda
    if hit.any():
        out[hit] = inverse_log_tail(tail, s[hit] - log_lambda)
    return float(out[0]) if scalar else out


def step_exact(state: PopulationState, cfg: SimConfig, rng: np.random.Generator):
    """One exact generation; returns (next_state, log_w_added).

    Per class, non-mutant survivors are Poisson((1-beta) n_i F_i); the total
    mutant count is Poisson(beta * sum n_i F_i).  FMM adds one class holding
    the largest of the mutant fitnesses, MMM adds every mutant.

    Raises CapExceeded when the expected event count passes the cap, which
    signals a mode switch rather than a failure.
    """
    if state.mode != MODE_EXACT:
        raise DomainError("step_exact needs an exact-mode state")
    t_next = state.t + 1
    if state.extinct:
        return _rebuild(t_next, np.empty(0), np.empty(0, np.int64), np.empty(0, np.int64), MODE_EXACT), -np.inf
    if state.log_fitsum > math.log(cfg.exact_event_cap):
        raise CapExceeded(
            f"expected events exp({state.log_fitsum:.3f}) exceed cap {cfg.exact_event_cap:g}"
        )
    events = math.exp(state.log_fitsum)
    # mutants are drawn before survivors: paired runs then share the
    # most influential draws when fed per-generation substreams
    m = int(_poisson(rng, cfg.beta * events)[0])
    log_w = -np.inf
    mutant_fit: list = []
    if m >= 1:
        if cfg.model == "fmm":
            log_w = float(sample_max_of_n(cfg.tail, m, rng))
            mutant_fit = [log_w]
        else:
            ws = np.atleast_1d(sample_fitness(cfg.tail, rng, size=m))
            log_w = float(ws.max())
            mutant_fit = list(ws)
    lam = (1.0 - cfg.beta) * state.count.astype(float) * np.exp(state.log_fit)
    survivors = _poisson(rng, lam).astype(np.int64)

    keep = survivors > 0
    log_fit = list(state.log_fit[keep]) + mutant_fit
    count = list(survivors[keep]) + [1] * len(mutant_fit)
    birth = list(state.birth[keep]) + [t_next] * len(mutant_fit)
    return _rebuild(t_next, log_fit, count, birth, MODE_EXACT), log_w


def _spectrum_edges(bins_per_decade: int, log_w_top: float) -> np.ndarray:
    """Bin edges on the log-fitness axis: 0, then 10**(k/bpd) below the top.

    Edges are anchored at integer grid exponents (starting one decade below
    log-fitness 1) so bin midpoints recur exactly across generations and
    merge into existing classes.
    """
    k_lo = -bins_per_decade
    if log_w_top <= 10.0 ** (k_lo / bins_per_decade):
        return np.array([0.0])
    k_hi = int(math.ceil(bins_per_decade * math.log10(log_w_top)))
    grid = 10.0 ** (np.arange(k_lo, k_hi + 1) / bins_per_decade)
    return np.concatenate(([0.0], grid[grid < log_w_top]))


def mutant_spectrum(log_lambda: float, cfg: SimConfig, rng: np.random.Generator):
    """MMM mutant classes for one generation; returns (log_fit, log_count, log_w).

    The log-fitness axis is split into geometric bins up to the exactly
    sampled fittest mutant; each bin's expected count is lambda * mu(bin).
    Bins above ``mmm_poisson_threshold`` enter deterministically at the bin
    log-midpoint, smaller bins are Poisson-sampled, and the open top bin is
    represented by the sampled maximum itself with count 1.
    """
    log_w = sample_fittest_mutant(log_lambda, cfg.tail, rng)
    if log_w == -np.inf:
        return np.empty(0), np.empty(0), -np.inf
    edges = _spectrum_edges(cfg.mmm_bins_per_decade, log_w)
    fits = [log_w]
    counts = [0.0]
    if edges.size >= 2:
        log_g = np.asarray(log_tail(cfg.tail, edges))
        with np.errstate(divide="ignore", invalid="ignore"):
            log_mass = log_g[:-1] + np.log(-np.expm1(log_g[1:] - log_g[:-1]))
        log_lam_bin = log_lambda + log_mass
        mids = 0.5 * (edges[:-1] + edges[1:])
        det = log_lam_bin > math.log(cfg.mmm_poisson_threshold)
        fits.extend(mids[det])
        counts.extend(log_lam_bin[det])
        stoch = ~det & np.isfinite(log_lam_bin)
        if stoch.any():
            draws = rng.poisson(np.exp(log_lam_bin[stoch]))
            hit = draws > 0
            fits.extend(mids[stoch][hit])
            counts.extend(np.log(draws[hit].astype(float)))
    return np.asarray(fits), np.asarray(counts), log_w


def step_logdet(state: PopulationState, cfg: SimConfig, rng: np.random.Generator):
    """One log-deterministic generation; returns (next_state, log_w_added).

    Class log-counts advance by their expectation, log(1-beta) + log F_i;
    only the mutant input stays stochastic.
    """
    if state.mode != MODE_LOGDET:
        raise DomainError("step_logdet needs a logdet-mode state")
    t_next = state.t + 1
    log_counts = math.log1p(-cfg.beta) + state.count + state.log_fit
    keep = log_counts >= _LOG_COUNT_FLOOR
    log_fit = state.log_fit[keep]
    log_counts = log_counts[keep]
    birth = state.birth[keep]

    log_lambda = math.log(cfg.beta) + state.log_fitsum
    if cfg.model == "fmm":
        log_w = sample_fittest_mutant(log_lambda, cfg.tail, rng)
        if log_w > -np.inf:
            log_fit = np.append(log_fit, log_w)
            log_counts = np.append(log_counts, 0.0)
            birth = np.append(birth, t_next)
    else:
        new_fit, new_counts, log_w = mutant_spectrum(log_lambda, cfg, rng)
        log_fit = np.concatenate((log_fit, new_fit))
        log_counts = np.concatenate((log_counts, new_counts))
        birth = np.concatenate((birth, np.full(new_fit.size, t_next, dtype=np.int64)))
    return _rebuild(t_next, log_fit, log_counts, birth, MODE_LOGDET), log_w


def _generation_rng(base_seed: int, t: int) -> np.random.Generator:
    """Fresh substream for generation t, derived from the attempt seed.

    Common-random-numbers discipline: paired runs with the same seed draw
    from identical substreams each generation, so their fittest-mutant
    uniforms coincide even after the streams would otherwise desynchronize.
    """
    return np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=(t,)))


def _attempt(cfg: SimConfig, base_seed: int):
    """One survival attempt; returns (rows, extinct_t)."""
    state = initial_state(cfg)
    rows = [(0, state.log_X, -np.inf, state.n_classes, 0, state.dominant_age())]
    for _ in range(cfg.t_max):
        rng = _generation_rng(base_seed, state.t + 1)
        if state.mode == MODE_EXACT and state.log_fitsum > math.log(cfg.exact_event_cap):
            state = to_logdet(state)
        if state.mode == MODE_EXACT:
            state, log_w = step_exact(state, cfg, rng)
        else:
            state, log_w = step_logdet(state, cfg, rng)
        rows.append((
            state.t, state.log_X, log_w, state.n_classes,
            0 if state.mode == MODE_EXACT else 1, state.dominant_age(),
        ))
        if state.extinct:
            return rows, state.t
    return rows, None


def run(cfg: SimConfig) -> RunRecord:
    """Simulate one run, restarting on extinction when configured.

    Restarts reseed deterministically from seed + restart index, realizing
    survival conditioning.  Raises TooManyRestarts after 10^4 extinct
    attempts, which signals negligible survival probability.
    """
    for attempt in range(MAX_RESTARTS + 1):
        rows, extinct_t = _attempt(cfg, (cfg.seed + attempt) % (1 << 64))
        if extinct_t is None or not cfg.restart_on_extinction:
            cols = list(zip(*rows))
            return RunRecord(
                config=cfg,
                t=np.array(cols[0], dtype=np.int64),
                log_X=np.array(cols[1]),
                log_W=np.array(cols[2]) if cfg.keep_w_history else None,
                n_classes=np.array(cols[3], dtype=np.int64),
                mode=np.array(cols[4], dtype=np.int8),
                dominant_age=np.array(cols[5], dtype=np.int64),
                outcome="survived" if extinct_t is None else "extinct",
                extinct_t=extinct_t,
                restarts=attempt,
            )
    raise TooManyRestarts(
        f"no surviving run in {MAX_RESTARTS} attempts (seed {cfg.seed}); "
        "survival probability is negligible for these parameters"
    )


def heuristic_wt(log_X: float, beta: float, alpha: float, rng: np.random.Generator, size=None):
    """Approximate fittest-mutant draw for a Pareto tail, for cross-checks.

    log W = (log X + log(beta/(1-beta)) - log(-log Z))/alpha with Z uniform;
    this treats the mutant count as its expectation beta/(1-beta) * X.
    """
    if not 0.0 < beta < 1.0:
        raise DomainError("beta must be in (0, 1)")
    z = rng.random(size)
    with np.errstate(divide="ignore"):
        tail_term = np.log(-np.log(z))
    out = (log_X + math.log(beta) - math.log1p(-beta) - tail_term) / alpha
    return float(out) if np.ndim(out) == 0 else out


def mc_verify_galton(theta: float, x: float, n: int, replicas: int, rng: np.random.Generator):
    """Monte Carlo check of the supercritical Galton-Watson lower bound.

    Simulates Poisson(theta) offspring from one founder and returns
    (empirical P(X_t >= (x*theta)^t for all t <= n), 1 - n*(1-x)^-2/(theta-1)).
    """
    if not theta > 1:
        raise DomainError("theta must exceed 1")
    if not 0.0 < x < 1.0:
        raise DomainError("x must be in (0, 1)")
    pop = np.ones(replicas)
    ok = np.ones(replicas, dtype=bool)
    threshold = 1.0
    for _ in range(n):
        pop = _poisson(rng, theta * pop)
        threshold *= x * theta
        ok &= pop >= threshold
    bound = 1.0 - n * (1.0 - x) ** -2 / (theta - 1.0)
    return float(ok.mean()), bound


def mc_verify_tdg(offspring_means, K0: int, K: float, B: float, replicas: int,
                  rng: np.random.Generator):
    """Monte Carlo check of the generation-dependent Galton-Watson upper bound.

    Offspring in generation t are Poisson(offspring_means[t]); with N the
    largest mean, returns (empirical P(X_t <= K N^t B^t for all listed t),
    1 - K0/(K(B-1))).
    """
    means = [float(m) for m in offspring_means]
    if not means:
        raise DomainError("need at least one offspring mean")
    if not B > 1 or not K > 0:
        raise DomainError("need B > 1 and K > 0")
    n_cap = max(means)
    pop = np.full(replicas, float(K0))
    ok = np.ones(replicas, dtype=bool)
    for t, mean in enumerate(means, start=1):
        pop = _poisson(rng, mean * pop)
        ok &= pop <= K * n_cap**t * B**t
    bound = 1.0 - K0 / (K * (B - 1.0))
    return float(ok.mean()), bound
