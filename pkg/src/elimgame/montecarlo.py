"""Monte Carlo tournaments of the elimination game.

Rounds are processed in fixed-size blocks; block b draws from its own Philox
stream keyed by (seed, stream, b), so results do not depend on how blocks are
spread over worker threads. Payoffs are accumulated as integer win counts,
which keeps the zero-sum identity exact.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import GameConfig, play_rounds
from .response import MixedStrategy, PureStrategy, ResponseCurve

BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class TournamentConfig:
    game: GameConfig
    rounds: int
    strategies: Sequence[MixedStrategy]

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if len(self.strategies) != self.game.n_players:
            raise ValueError("need one strategy per player")


@dataclass
class GainEstimate:
    mean_gain: np.ndarray
    std_error: np.ndarray
    rounds: int
    win_counts: np.ndarray
    elimination_counts: np.ndarray

    @property
    def elimination_rate(self) -> np.ndarray:
        return self.elimination_counts / self.rounds

    def to_dict(self):
        return {
            "rounds": self.rounds,
            "mean_gain": self.mean_gain.tolist(),
            "std_error": self.std_error.tolist(),
            "win_counts": self.win_counts.tolist(),
            "elimination_counts": self.elimination_counts.tolist(),
        }


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream, block))
    return np.random.Generator(np.random.Philox(ss))


def _run_block(cfg: TournamentConfig, stream: int, block: int, size: int):
    n = cfg.game.n_players
    rng = block_rng(cfg.game.seed, stream, block)
    choices = np.empty((size, n))
    for j, strat in enumerate(cfg.strategies):
        choices[:, j] = strat.sample(rng, size)
    winner, eliminated = play_rounds(n, choices, rng)
    return (np.bincount(winner, minlength=n).astype(np.int64),
            eliminated.sum(axis=0).astype(np.int64))


def run_tournament(cfg: TournamentConfig, stream: int = 0, workers: int = 1,
                   block_size: int = BLOCK_SIZE) -> GainEstimate:
    n = cfg.game.n_players
    sizes = [block_size] * (cfg.rounds // block_size)
    if cfg.rounds % block_size:
        sizes.append(cfg.rounds % block_size)
    jobs = list(enumerate(sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _run_block(cfg, stream, *j), jobs))
    else:
        parts = [_run_block(cfg, stream, b, s) for b, s in jobs]
    wins = np.sum([p[0] for p in parts], axis=0)
    elim = np.sum([p[1] for p in parts], axis=0)
    rounds = cfg.rounds
    # gain = N * win - 1, so its variance is N^2 p (1 - p)
    p = wins / rounds
    mean_gain = (n * wins - rounds) / rounds
    std_error = n * np.sqrt(p * (1 - p) / rounds)
    return GainEstimate(mean_gain=mean_gain, std_error=std_error, rounds=rounds,
                        win_counts=wins, elimination_counts=elim)


def deviation_sweep(cfg: GameConfig, f: MixedStrategy, x_grid, rounds_per_point: int,
                    workers: int = 1) -> ResponseCurve:
    """Empirical gain of player 1 pinned at each x against N-1 copies of f."""
    xs = np.asarray(x_grid, dtype=float)
    if np.any(~((xs >= 0) & (xs <= 1))):
        raise ValueError("x_grid must lie in [0, 1]")
    wins = np.empty(len(xs))
    errs = np.empty(len(xs))
    for k, x in enumerate(xs):
        strategies = [PureStrategy(x)] + [f] * (cfg.n_players - 1)
        est = run_tournament(TournamentConfig(cfg, rounds_per_point, strategies),
                             stream=k + 1, workers=workers)
        wins[k] = est.win_counts[0] / rounds_per_point
        errs[k] = est.std_error[0]
    return ResponseCurve(cfg.n_players, xs, wins, std_error=errs)
