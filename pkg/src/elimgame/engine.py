"""Rules of the elimination game: exact win probabilities and stochastic play.

Each of N players picks x_j in [0, 1] and is eliminated independently with
probability x_j. The surviving player with the largest x_j wins (ties broken
uniformly); if everyone is eliminated the winner is uniform over all N. The
winner collects N - 1, every other player pays 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_ORACLE_PLAYERS = 20


class DegenerateTieError(ValueError):
    """Player 1's choice coincides with an opponent's; the product formula does not apply."""


@dataclass(frozen=True)
class GameConfig:
    n_players: int
    seed: int = 0

    def __post_init__(self):
        if int(self.n_players) != self.n_players or self.n_players < 2:
            raise ValueError(f"n_players must be an integer >= 2, got {self.n_players!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class StrategyProfile:
    choices: tuple

    def __post_init__(self):
        arr = np.asarray(self.choices, dtype=float)
        if arr.ndim != 1 or np.any(~((arr >= 0) & (arr <= 1))):
            raise ValueError("choices must be a flat sequence of values in [0, 1]")
        object.__setattr__(self, "choices", tuple(float(v) for v in arr))


@dataclass(frozen=True)
class RoundOutcome:
    eliminated: np.ndarray
    winner: int
    payoffs: np.ndarray


def as_profile(cfg: GameConfig, profile) -> np.ndarray:
    if isinstance(profile, StrategyProfile):
        profile = profile.choices
    arr = np.asarray(profile, dtype=float)
    if arr.shape != (cfg.n_players,):
        raise ValueError(f"expected {cfg.n_players} choices, got shape {arr.shape}")
    if np.any(~((arr >= 0) & (arr <= 1))):
        raise ValueError("choices must lie in [0, 1]")
    return arr


def tie_share(survive_below, survive_tied, n_players: int):
    """Probability of winning through survival, given per-opponent masses.

    Each of the n-1 opponents independently either cannot beat us (mass S:
    eliminated or surviving below) or survives tied with us (mass T); anyone
    else beats us outright. With k tied survivors we win with probability
    1/(k+1), and summing over k gives ((S+T)**n - S**n) / (n T).
    Reduces to S**(n-1) when T = 0.
    """
    S = np.asarray(survive_below, dtype=float)
    T = np.asarray(survive_tied, dtype=float)
    n = n_players
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        q = T / S
        small = q < 1.0
        qs = np.where(small, q, 0.5)
        # expm1/log1p keeps the power difference accurate when T << S
        stable = S ** (n - 1) * np.expm1(n * np.log1p(qs)) / (n * qs)
        direct = ((S + T) ** n - S**n) / (n * T)
        out = np.where(T > 0, np.where(small, stable, direct), S ** (n - 1))
        out = np.where((S <= 0) & (T > 0), T ** (n - 1) / n, out)
    return out if out.ndim else float(out)


def win_probability_exact(cfg: GameConfig, profile) -> float:
    """Probability that player 1 (index 0) wins, in O(N).

    Factorized form of the subset sum over surviving opponents:
    (1-x1) prod_j [x_j + (1-x_j) theta(x1 - x_j)] + x1 prod_j x_j / N.
    """
    x = as_profile(cfg, profile)
    x1, rest = x[0], x[1:]
    if np.any(rest == x1):
        raise DegenerateTieError(
            "x1 ties an opponent; use win_probability_oracle or the tie-aware solver formula"
        )
    factors = np.where(x1 > rest, 1.0, rest)
    return float((1.0 - x1) * np.prod(factors) + x1 * np.prod(rest) / cfg.n_players)


def win_probability_subset_sum(cfg: GameConfig, profile) -> float:
    """Literal sum over subsets of surviving opponents (exponential cost)."""
    x = as_profile(cfg, profile)
    x1, rest = x[0], x[1:]
    if np.any(rest == x1):
        raise DegenerateTieError("subset sum is only valid for nondegenerate profiles")
    total = 0.0
    m = len(rest)
    for n in range(m + 1):
        for subset in itertools.combinations(range(m), n):
            term = 1.0
            for j in range(m):
                if j in subset:
                    term *= (1.0 - rest[j]) * (1.0 if x1 > rest[j] else 0.0)
                else:
                    term *= rest[j]
            total += term
    return (1.0 - x1) * total + x1 * np.prod(rest) / cfg.n_players


@lru_cache(maxsize=None)
def _outcome_table(n: int):
    masks = np.array(list(itertools.product([False, True], repeat=n)), dtype=bool)
    return masks  # True = eliminated


def _oracle_batch(n: int, xs: np.ndarray) -> np.ndarray:
    masks = _outcome_table(n)  # (2^n, n)
    # probability of each elimination pattern, (P, 2^n)
    probs = np.prod(np.where(masks[None], xs[:, None, :], 1.0 - xs[:, None, :]), axis=2)
    alive = ~masks[None]  # (1, 2^n, n)
    key = np.where(alive, xs[:, None, :], -np.inf)
    top = key.max(axis=2, keepdims=True)
    tied = alive & (key == top)
    n_tied = tied.sum(axis=2)
    nobody = n_tied == 0
    win0 = np.where(nobody, 1.0 / n, tied[..., 0] / np.maximum(n_tied, 1))
    return (probs * win0).sum(axis=1)


def win_probability_oracle(cfg: GameConfig, profile) -> float:
    """Brute-force enumeration of all 2**N elimination outcomes.

    Applies the tie-breaking rule literally, so degenerate profiles are fine.
    """
    if cfg.n_players > MAX_ORACLE_PLAYERS:
        raise ValueError(f"oracle limited to {MAX_ORACLE_PLAYERS} players")
    x = as_profile(cfg, profile)
    return float(_oracle_batch(cfg.n_players, x[None, :])[0])


def win_probability_oracle_batch(n_players: int, profiles, chunk: int = 256) -> np.ndarray:
    """Vectorized oracle over many profiles (rows)."""
    if n_players > MAX_ORACLE_PLAYERS:
        raise ValueError(f"oracle limited to {MAX_ORACLE_PLAYERS} players")
    xs = np.asarray(profiles, dtype=float)
    out = np.empty(len(xs))
    step = max(1, chunk * 1024 // 2**n_players)
    for i in range(0, len(xs), step):
        out[i:i + step] = _oracle_batch(n_players, xs[i:i + step])
    return out


def _to_front(x: np.ndarray, player: int) -> np.ndarray:
    order = [player] + [j for j in range(len(x)) if j != player]
    return x[order]


def payoff_exact(cfg: GameConfig, profile, player: int = 0) -> float:
    """Elimination-averaged payoff N P - 1 of `player` (0-based)."""
    x = as_profile(cfg, profile)
    if not 0 <= player < cfg.n_players:
        raise IndexError(player)
    return cfg.n_players * win_probability_exact(cfg, _to_front(x, player)) - 1.0


def payoff_n2_closed_form(x1: float, x2: float) -> float:
    """Two-player payoff of player 1 (Dresher's duel)."""
    if x1 == x2:
        raise DegenerateTieError("closed form requires x1 != x2")
    if x1 < x2:
        return -1.0 + 2.0 * x2 - x1 * x2
    return 1.0 - 2.0 * x1 + x1 * x2


def play_rounds(n_players: int, choices, rng: np.random.Generator):
    """Play many independent rounds at once.

    `choices` has shape (rounds, n_players). Returns (winner, eliminated).
    Consumes rounds*n uniforms for elimination, then one uniform per round
    for the tie-break.
    """
    x = np.asarray(choices, dtype=float)
    rounds = x.shape[0]
    eliminated = rng.random(x.shape) < x
    alive = ~eliminated
    key = np.where(alive, x, -np.inf)
    top = key.max(axis=1, keepdims=True)
    cand = alive & (key == top)
    nobody = ~alive.any(axis=1)
    cand[nobody] = True
    counts = cand.sum(axis=1)
    pick = np.minimum((rng.random(rounds) * counts).astype(np.int64), counts - 1)
    # index of the pick-th candidate in each row
    rank = np.cumsum(cand, axis=1) - 1
    winner = np.argmax(cand & (rank == pick[:, None]), axis=1)
    return winner, eliminated


def play_round(cfg: GameConfig, profile, rng: np.random.Generator) -> RoundOutcome:
    x = as_profile(cfg, profile)
    winner, eliminated = play_rounds(cfg.n_players, x[None, :], rng)
    w = int(winner[0])
    payoffs = np.full(cfg.n_players, -1, dtype=np.int64)
    payoffs[w] = cfg.n_players - 1
    return RoundOutcome(eliminated=eliminated[0], winner=w, payoffs=payoffs)
