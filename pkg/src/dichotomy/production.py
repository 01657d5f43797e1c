"""Production functions over coalitions.

A game assigns a real value v(T) to every subset T of the n players, with
v(empty) = 0.  A dense table covers arbitrary games up to the enumeration
cap; the closed-form families avoid 2^n storage so that large labor markets,
voting bodies and component systems stay tractable.
"""

import json
import warnings

import numpy as np

from .coalition import SubsetId
from .errors import CapacityError, DomainError

__all__ = [
    "Game",
    "DenseTableGame",
    "SizeSymmetricGame",
    "WeightedVotingGame",
    "KOutOfNGame",
    "AdditiveGame",
    "evaluate",
    "uniformly_outperforms",
    "is_symmetric_pair",
    "game_from_json_dict",
    "load_dense_game",
    "random_dense_game",
    "random_monotone_game",
    "ENUMERATION_CAP",
]

ENUMERATION_CAP = 24
_ENUMERATION_WARN = 20


def _warn_if_costly(n: int) -> None:
    if n > _ENUMERATION_WARN:
        warnings.warn(
            f"enumerating 2^{n} subsets; expect noticeable cost above "
            f"n = {_ENUMERATION_WARN}",
            stacklevel=3,
        )


class Game:
    """Common interface of all production-function representations."""

    n: int
    # True when v(T) depends on |T| only, which unlocks the large-n paths.
    size_only = False

    def value(self, T: SubsetId) -> float:
        raise NotImplementedError

    def values_for_memberships(self, members: np.ndarray) -> np.ndarray:
        """Vectorized v over a (k, n) boolean membership matrix."""
        raise NotImplementedError

    def value_by_size(self) -> np.ndarray:
        """v as a function of coalition size (size-symmetric games only)."""
        raise DomainError(f"{type(self).__name__} is not size-symmetric")

    def dense_values(self) -> np.ndarray:
        """v over all 2^n bitmasks; capped at the enumeration limit."""
        if self.n > ENUMERATION_CAP:
            raise CapacityError(
                f"dense enumeration limited to n <= {ENUMERATION_CAP}, got {self.n}"
            )
        _warn_if_costly(self.n)
        masks = np.arange(1 << self.n, dtype=np.int64)
        members = (masks[:, None] >> np.arange(self.n)[None, :]) & 1
        return self.values_for_memberships(members.astype(bool))

    def _check_subset(self, T: SubsetId) -> None:
        if T.n != self.n:
            raise DomainError(f"subset over {T.n} players, game has {self.n}")


class DenseTableGame(Game):
    """Explicit table of 2^n values indexed by bitmask (bit i-1 = player i)."""

    def __init__(self, n: int, values):
        if n < 1:
            raise DomainError("need at least one player")
        if n > ENUMERATION_CAP:
            raise CapacityError(
                f"dense tables limited to n <= {ENUMERATION_CAP}, got {n}"
            )
        values = np.asarray(values, dtype=float)
        if values.shape != (1 << n,):
            raise DomainError(f"expected {1 << n} values, got {values.shape}")
        if values[0] != 0.0:
            raise DomainError("value of the empty coalition must be 0")
        self.n = n
        self.table = values
        self.table.setflags(write=False)

    def value(self, T: SubsetId) -> float:
        self._check_subset(T)
        return float(self.table[T.mask])

    def values_for_memberships(self, members: np.ndarray) -> np.ndarray:
        masks = members @ (1 << np.arange(self.n, dtype=np.int64))
        return self.table[masks]

    def dense_values(self) -> np.ndarray:
        return self.table


class SizeSymmetricGame(Game):
    """v(T) = u(|T|) for a tabulated u with u(0) = 0."""

    size_only = True

    def __init__(self, n: int, by_size):
        by_size = np.asarray(by_size, dtype=float)
        if n < 1 or by_size.shape != (n + 1,):
            raise DomainError(f"need n+1 size values, got {by_size.shape} for n={n}")
        if by_size[0] != 0.0:
            raise DomainError("value of the empty coalition must be 0")
        self.n = n
        self.by_size = by_size
        self.by_size.setflags(write=False)

    def value(self, T: SubsetId) -> float:
        self._check_subset(T)
        return float(self.by_size[T.size])

    def values_for_memberships(self, members: np.ndarray) -> np.ndarray:
        return self.by_size[members.sum(axis=1)]

    def value_by_size(self) -> np.ndarray:
        return self.by_size


class KOutOfNGame(Game):
    """v(T) = 1 when |T| >= k, else 0; the redundant-system benchmark."""

    size_only = True

    def __init__(self, n: int, k: int):
        if n < 1 or not (1 <= k <= n):
            raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
        self.n = n
        self.k = k

    def value(self, T: SubsetId) -> float:
        self._check_subset(T)
        return 1.0 if T.size >= self.k else 0.0

    def values_for_memberships(self, members: np.ndarray) -> np.ndarray:
        return (members.sum(axis=1) >= self.k).astype(float)

    def value_by_size(self) -> np.ndarray:
        return (np.arange(self.n + 1) >= self.k).astype(float)


class WeightedVotingGame(Game):
    """v(T) = 1 when the weight of T reaches the quota, else 0."""

    def __init__(self, weights, quota: float):
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or len(weights) < 1:
            raise DomainError("weights must be a non-empty vector")
        if np.any(weights < 0):
            raise DomainError("negative weights would break monotonicity")
        if not quota > 0:
            raise DomainError("quota must be positive so the empty set loses")
        self.n = len(weights)
        self.weights = weights
        self.weights.setflags(write=False)
        self.quota = float(quota)

    def value(self, T: SubsetId) -> float:
        self._check_subset(T)
        w = sum(self.weights[i - 1] for i in T.members)
        return 1.0 if w >= self.quota else 0.0

    def values_for_memberships(self, members: np.ndarray) -> np.ndarray:
        return (members @ self.weights >= self.quota).astype(float)


class AdditiveGame(Game):
    """v(T) = sum of per-player values over T."""

    def __init__(self, player_values):
        player_values = np.asarray(player_values, dtype=float)
        if player_values.ndim != 1 or len(player_values) < 1:
            raise DomainError("player values must be a non-empty vector")
        self.n = len(player_values)
        self.player_values = player_values
        self.player_values.setflags(write=False)

    def value(self, T: SubsetId) -> float:
        self._check_subset(T)
        return float(sum(self.player_values[i - 1] for i in T.members))

    def values_for_memberships(self, members: np.ndarray) -> np.ndarray:
        return members @ self.player_values


def evaluate(game: Game, T: SubsetId) -> float:
    """v(T); zero on the empty coalition by construction."""
    return game.value(T)


def _check_pair(game: Game, i: int, j: int) -> None:
    if i == j:
        raise DomainError("players must be distinct")
    for p in (i, j):
        if not 1 <= p <= game.n:
            raise DomainError(f"player {p} outside 1..{game.n}")


def _pairwise_dense_compare(game: Game, i: int, j: int):
    """Arrays v(Z + i), v(Z + j) over all Z avoiding both players."""
    if game.n > ENUMERATION_CAP:
        raise CapacityError(
            f"pairwise enumeration limited to n <= {ENUMERATION_CAP}, got {game.n}"
        )
    _warn_if_costly(game.n)
    table = game.dense_values()
    masks = np.arange(1 << game.n, dtype=np.int64)
    bi = 1 << (i - 1)
    bj = 1 << (j - 1)
    z = masks[(masks & bi == 0) & (masks & bj == 0)]
    return table[z | bi], table[z | bj]


def uniformly_outperforms(game: Game, i: int, j: int) -> bool:
    """Whether player i's marginal contribution dominates j's.

    Dominance must hold both when the two players would join a coalition
    containing neither, and when they would leave one containing both; the
    two requirements reduce to the same comparison over coalitions avoiding
    the pair.  Ties count as outperforming.
    """
    _check_pair(game, i, j)
    if game.size_only:
        return True
    if isinstance(game, AdditiveGame):
        return bool(game.player_values[i - 1] >= game.player_values[j - 1])
    with_i, with_j = _pairwise_dense_compare(game, i, j)
    return bool(np.all(with_i >= with_j))


def is_symmetric_pair(game: Game, i: int, j: int) -> bool:
    """Whether i and j are interchangeable in v (mutual outperformance)."""
    _check_pair(game, i, j)
    if game.size_only:
        return True
    if isinstance(game, AdditiveGame):
        return bool(game.player_values[i - 1] == game.player_values[j - 1])
    with_i, with_j = _pairwise_dense_compare(game, i, j)
    return bool(np.all(with_i == with_j))


def game_from_json_dict(spec: dict) -> DenseTableGame:
    """Dense game from {"n": int, "values": [2^n reals by bitmask]}."""
    try:
        n = int(spec["n"])
        values = spec["values"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed game object: {exc}") from exc
    return DenseTableGame(n, values)


def load_dense_game(path: str) -> DenseTableGame:
    with open(path, encoding="utf-8") as fh:
        return game_from_json_dict(json.load(fh))


def random_dense_game(n: int, rng: np.random.Generator) -> DenseTableGame:
    """Uniform random values on all non-empty coalitions."""
    values = rng.random(1 << n)
    values[0] = 0.0
    return DenseTableGame(n, values)


def random_monotone_game(
    n: int, rng: np.random.Generator, terms: int | None = None
) -> DenseTableGame:
    """Random monotone game: positive mix of unanimity requirements.

    Each term pays a positive amount once a required subset is fully hired;
    sums of such terms are monotone nondecreasing in set inclusion.
    """
    if terms is None:
        terms = 2 * n
    masks = np.arange(1 << n, dtype=np.int64)
    values = np.zeros(1 << n)
    for _ in range(terms):
        need = int(rng.integers(1, 1 << n))
        pay = float(rng.random())
        values += pay * ((masks & need) == need)
    values[0] = 0.0
    return DenseTableGame(n, values)
