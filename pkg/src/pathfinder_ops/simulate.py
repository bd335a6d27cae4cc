"""Seeded Monte Carlo: chain trajectories and sequential offer rounds.

Randomness comes from numpy's Philox counter-based generator, so a given
seed produces the same stream on every platform and independent streams can
be derived for parallel work. All entry points take an explicit seed;
identical inputs and seed give bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .agents import ControllerCandidate, ControllerContext, p_accept, rank_candidates
from .chain import ChainParams
from .errors import EmptyCandidateSet
from .worstcase import WorstCaseScenario, group_reject_probs

_MAX_SEED = 2**64


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by (seed, stream).

    Distinct streams give non-overlapping sequences for the same seed, so
    unrelated consumers of one master seed stay statistically independent.
    """
    if not isinstance(seed, int) or not 0 <= seed < _MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return np.random.Generator(np.random.Philox(key=[seed, stream]))


# Fixed stream ids per consumer; parallel callers derive their own by offset.
_STREAM_CHAIN = 0
_STREAM_SELECTION = 1
_STREAM_MIXTURE = 2
STREAM_CORPUS = 3


@dataclass(frozen=True)
class SimConfig:
    seed: int
    steps: int
    burn_in: int = 0

    def __post_init__(self):
        if not isinstance(self.seed, int) or not 0 <= self.seed < _MAX_SEED:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not isinstance(self.steps, int) or self.steps <= 0:
            raise ValueError(f"steps must be a positive integer, got {self.steps!r}")
        if not isinstance(self.burn_in, int) or not 0 <= self.burn_in < self.steps:
            raise ValueError(
                f"burn_in must satisfy 0 <= burn_in < steps, got {self.burn_in!r}"
            )


@dataclass(frozen=True)
class SelectionOutcome:
    """Result of one offer round. accepted_by is None when every candidate
    rejected (the worst case); otherwise it equals
    order_used[offers_made - 1]."""

    accepted_by: str | None
    offers_made: int
    order_used: tuple[str, ...]


def simulate_chain(params: ChainParams, cfg: SimConfig) -> np.ndarray:
    """State-visit frequencies of the chain started in Gate Closed.

    Runs cfg.steps transitions, discards the first cfg.burn_in visited
    states, and normalizes the remaining visit counts.
    """
    g, a, s = params.p_good, params.p_accept, params.p_success
    rng = make_rng(cfg.seed, _STREAM_CHAIN)
    uniforms = rng.random(cfg.steps).tolist()
    # Each state has at most two successors: jump target with the listed
    # probability, fallback otherwise.
    jump_to = (1, 2, 3, 3)
    stay_at = (0, 1, 0, 0)
    jump_p = (g, a, s, g)
    counts = [0, 0, 0, 0]
    state = 0
    burn_in = cfg.burn_in
    for t, u in enumerate(uniforms):
        state = jump_to[state] if u < jump_p[state] else stay_at[state]
        if t >= burn_in:
            counts[state] += 1
    total = cfg.steps - cfg.burn_in
    return np.array(counts, dtype=float) / total


def run_selection_round(
    candidates: list[ControllerCandidate], ctx: ControllerContext, seed: int
) -> SelectionOutcome:
    """Extend offers in payoff order until one is accepted or all reject."""
    if not candidates:
        raise EmptyCandidateSet("cannot run a selection round without candidates")
    order = rank_candidates(candidates, ctx)
    by_id = {c.profile.id: c for c in candidates}
    rng = make_rng(seed, _STREAM_SELECTION)
    for i, cid in enumerate(order):
        if rng.random() < p_accept(by_id[cid].profile):
            return SelectionOutcome(accepted_by=cid, offers_made=i + 1, order_used=tuple(order))
    return SelectionOutcome(accepted_by=None, offers_made=len(order), order_used=tuple(order))


@dataclass(frozen=True)
class MixtureBatchResult:
    rounds: int
    all_reject_rate: float
    mean_offers: float


def mixture_batch(
    scn: WorstCaseScenario, alpha: float, rounds: int, seed: int
) -> MixtureBatchResult:
    """Repeated offer rounds over a two-group agent pool.

    Each round independently assigns each of the scn.n agents to the
    rejective group with probability alpha, then walks the offer order
    (receptive agents first, mirroring payoff-descending ranking) until an
    acceptance. The all-reject frequency is the empirical counterpart of
    worst_case_prob(scn, alpha).
    """
    alpha = float(alpha)
    if math.isnan(alpha) or not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    if not isinstance(rounds, int) or rounds <= 0:
        raise ValueError(f"rounds must be a positive integer, got {rounds!r}")
    rng = make_rng(seed, _STREAM_MIXTURE)
    p_rej, p_rec = group_reject_probs(scn)
    rejective = rng.random((rounds, scn.n)) < alpha
    # Receptive agents have the higher acceptance probability, hence the
    # higher payoff; a stable sort keeps index order within each group.
    order = np.argsort(rejective, axis=1, kind="stable")
    rejective_sorted = np.take_along_axis(rejective, order, axis=1)
    p_reject_each = np.where(rejective_sorted, p_rej, p_rec)
    accepts = rng.random((rounds, scn.n)) >= p_reject_each
    any_accept = accepts.any(axis=1)
    first_accept = accepts.argmax(axis=1)
    offers = np.where(any_accept, first_accept + 1, scn.n)
    return MixtureBatchResult(
        rounds=rounds,
        all_reject_rate=float(1.0 - any_accept.mean()),
        mean_offers=float(offers.mean()),
    )
