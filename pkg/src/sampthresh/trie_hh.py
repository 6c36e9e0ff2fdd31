"""Trie-based heavy hitter discovery over sample-and-threshold histograms.

The protocol runs L rounds.  Round ell samples a fresh client cohort and
materializes a thresholded histogram of length-ell prefixes; in restricted
mode only clients whose (ell-1)-prefix already survived get to vote, which
matches the protocol as originally described, while unrestricted mode lets
every sampled client vote (the privacy guarantee is unchanged, the
restriction being post-processing).  Each level consumes one (epsilon,
delta) budget, composed across levels either basically or via advanced
composition.  The single-round flat variant reports whole items under a
single (epsilon, delta) charge.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .calibration import CalibrationError, PrivacyParams
from .mechanism import Dataset, Histogram, run_mechanism
from .seeding import derive_seed

DIGIT_ALPHABET = string.digits + string.ascii_lowercase
END_SYMBOL = "$"


@dataclass(frozen=True)
class CompositionBudget:
    """Privacy cost of L repetitions of an (epsilon', delta')-DP release."""

    epsilon_per_level: float
    delta_per_level: float
    L: int
    basic: tuple
    advanced: Optional[tuple]


def compose(epsilon_p: float, delta_p: float, L: int) -> CompositionBudget:
    """Basic and advanced composition of L (epsilon', delta')-DP releases.

    Basic: (L eps', L delta').  Advanced (only for eps' < 1):
    (L eps'^2 + eps' sqrt(L ln(1/(delta' L))), 2 L delta'), natural log.
    """
    if epsilon_p <= 0.0:
        raise CalibrationError(f"epsilon' must be > 0, got {epsilon_p}")
    if L < 1:
        raise CalibrationError(f"L must be >= 1, got {L}")
    if not 0.0 < delta_p * L < 1.0:
        raise CalibrationError(
            f"composition requires 0 < delta' * L < 1, got {delta_p * L}"
        )
    basic = (L * epsilon_p, L * delta_p)
    advanced = None
    if epsilon_p < 1.0:
        adv_eps = L * epsilon_p**2 + epsilon_p * math.sqrt(
            L * math.log(1.0 / (delta_p * L))
        )
        advanced = (adv_eps, 2.0 * L * delta_p)
    return CompositionBudget(
        epsilon_per_level=epsilon_p,
        delta_per_level=delta_p,
        L=L,
        basic=basic,
        advanced=advanced,
    )


@dataclass(frozen=True)
class TrieConfig:
    """Shape and per-level privacy parameters of a trie run."""

    L: int
    beta: int
    params: PrivacyParams
    restricted: bool = True
    fresh_sample_per_level: bool = True
    alphabet: Optional[str] = None

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.beta < 2:
            raise ValueError(f"beta must be >= 2, got {self.beta}")
        if not self.fresh_sample_per_level:
            raise ValueError("each level must draw a fresh sample")
        alphabet = self.alphabet
        if alphabet is None:
            if self.beta > len(DIGIT_ALPHABET):
                raise ValueError(
                    f"beta={self.beta} needs an explicit alphabet "
                    f"(default covers up to {len(DIGIT_ALPHABET)})"
                )
            alphabet = DIGIT_ALPHABET[: self.beta]
        if len(alphabet) != self.beta or len(set(alphabet)) != self.beta:
            raise ValueError(f"alphabet must have beta={self.beta} distinct symbols")
        if END_SYMBOL in alphabet:
            raise ValueError(f"alphabet must not contain the end symbol {END_SYMBOL!r}")
        object.__setattr__(self, "alphabet", alphabet)


@dataclass
class WeightedTrie:
    """Per-level surviving prefixes with their sampled counts.

    levels[i] holds the level-(i+1) nodes: prefix string -> count, where
    strings shorter than the level are completed with the end symbol.
    """

    cfg: TrieConfig
    n: int
    levels: list = field(default_factory=list)
    budget: Optional[CompositionBudget] = None

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level_nodes(self, level: int) -> dict:
        """Nodes of one level (1-indexed)."""
        return self.levels[level - 1]

    def nodes(self) -> dict:
        flat = {}
        for lvl in self.levels:
            flat.update(lvl)
        return flat

    @property
    def expected_sample_size(self) -> float:
        return self.cfg.params.p_s * self.n


def _digit_matrix(dataset: Dataset, cfg: TrieConfig) -> np.ndarray:
    """(n, L) matrix of symbol codes: end symbol -> 0, alphabet[i] -> i + 1.

    String items are truncated/padded to length L; real items in [0, 1] are
    expanded to their first L base-beta digits.
    """
    L, beta = cfg.L, cfg.beta
    if dataset.n == 0:
        return np.zeros((0, L), dtype=np.int64)
    if isinstance(dataset.items, np.ndarray):
        if not np.issubdtype(dataset.items.dtype, np.floating):
            raise TypeError("trie items must be strings or reals in [0, 1]")
        x = dataset.items
        if x.size and (x.min() < 0.0 or x.max() > 1.0):
            raise ValueError("real-valued trie items must lie in [0, 1]")
        cells = beta**L
        idx = np.minimum((x * cells).astype(np.int64), cells - 1)
        digits = np.empty((len(x), L), dtype=np.int64)
        for i in range(L):
            digits[:, i] = (idx // beta ** (L - 1 - i)) % beta
        return digits + 1
    sym = {ch: i + 1 for i, ch in enumerate(cfg.alphabet)}
    digits = np.zeros((dataset.n, L), dtype=np.int64)
    for row, item in enumerate(dataset.items):
        for i, ch in enumerate(item[:L]):
            code = sym.get(ch)
            if code is None:
                raise ValueError(f"symbol {ch!r} not in the trie alphabet")
            digits[row, i] = code
    return digits


def _decode(code: int, level: int, cfg: TrieConfig) -> str:
    base = cfg.beta + 1
    chars = []
    for _ in range(level):
        sym = code % base
        code //= base
        chars.append(END_SYMBOL if sym == 0 else cfg.alphabet[sym - 1])
    return "".join(reversed(chars))


def _extend_from_codes(
    trie: WeightedTrie,
    codes: np.ndarray,
    level: int,
    params: PrivacyParams,
    seed: int,
) -> None:
    rng = np.random.default_rng(seed)
    mask = rng.random(len(codes)) < params.p_s
    voted = codes[mask]
    nodes: dict = {}
    if voted.size:
        unique, counts = np.unique(voted, return_counts=True)
        prev = trie.levels[level - 2] if level >= 2 else None
        for code, cnt in zip(unique, counts):
            if cnt < params.tau:
                continue
            prefix = _decode(int(code), level, trie.cfg)
            if trie.cfg.restricted and prev is not None and prefix[:-1] not in prev:
                continue
            nodes[prefix] = int(cnt)
    trie.levels.append(nodes)


def extend_level(
    trie: WeightedTrie,
    dataset: Dataset,
    level: int,
    params: PrivacyParams,
    seed: int,
) -> WeightedTrie:
    """Run one protocol round: sample clients, collect votes for length-level
    prefixes whose parent survived (restricted mode), threshold, and append
    the surviving nodes to the trie.

    The level must be the next unbuilt one.  Returns the updated trie.
    """
    if level != trie.depth + 1:
        raise ValueError(f"expected level {trie.depth + 1}, got {level}")
    if level > trie.cfg.L:
        raise ValueError(f"level {level} exceeds configured depth {trie.cfg.L}")
    digits = _digit_matrix(dataset, trie.cfg)
    base = trie.cfg.beta + 1
    codes = np.zeros(dataset.n, dtype=np.int64)
    for i in range(level):
        codes = codes * base + digits[:, i]
    _extend_from_codes(trie, codes, level, params, seed)
    return trie


def run_triehh(dataset: Dataset, cfg: TrieConfig, seed: int) -> WeightedTrie:
    """Build the full depth-L weighted trie with one fresh sample per level.

    Level ell uses the derived seed derive_seed(seed, ell), so levels are
    independent and the whole run is reproducible from the base seed.  The
    attached budget is the L-fold composition of the per-level guarantee.
    """
    trie = WeightedTrie(cfg=cfg, n=dataset.n)
    digits = _digit_matrix(dataset, cfg)
    base = cfg.beta + 1
    codes = np.zeros(dataset.n, dtype=np.int64)
    for level in range(1, cfg.L + 1):
        codes = codes * base + digits[:, level - 1]
        _extend_from_codes(trie, codes, level, cfg.params, derive_seed(seed, level))
    trie.budget = compose(cfg.params.epsilon, cfg.params.delta, cfg.L)
    return trie


def flat_heavy_hitters(dataset: Dataset, params: PrivacyParams, seed: int) -> Histogram:
    """Single-round heavy hitters: one sample-and-threshold pass over whole
    items.  The privacy charge is the params' own (epsilon, delta); no
    level factor applies."""
    return run_mechanism(dataset, params, seed)
