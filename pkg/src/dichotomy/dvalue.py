"""Per-player valuation under the random bipartition.

Each player carries two numbers: the expected marginal gain when employed
(the production lost if they left the employed set) and the expected
marginal loss when unemployed (the production gained if the market hired
them).  Exact evaluation rewrites each expectation as a difference of two
subset sums, which needs a single pass over coalitions; closed-form
aggregates and Monte Carlo estimators cover the regimes where full
enumeration is out of reach.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coalition import CoalitionModel, log_size_weights, sample_memberships, spawn_streams
from .errors import CapacityError, DomainError, InvariantViolation, SingularSystemError
from .numerics import log_beta, log_binom
from .production import (
    AdditiveGame,
    DenseTableGame,
    ENUMERATION_CAP,
    Game,
    uniformly_outperforms,
)

__all__ = [
    "Valuation",
    "OrderingReport",
    "exact_valuation",
    "aggregate_gain_closed_form",
    "aggregate_loss_closed_form",
    "expected_production",
    "mc_valuation",
    "ordering_check",
]

_MC_CHUNK = 65536


@dataclass(frozen=True)
class Valuation:
    """Per-player marginal gains and losses plus their aggregates."""

    gain: np.ndarray
    loss: np.ndarray
    aggregate_gain: float
    aggregate_loss: float
    expected_production: float
    method: str
    samples: int | None = None
    seed: int | None = None
    streams: int | None = None
    gain_se: np.ndarray | None = None
    loss_se: np.ndarray | None = None
    expected_production_se: float | None = None

    def to_json_dict(self) -> dict:
        out = {
            "method": self.method,
            "gamma": list(map(float, self.gain)),
            "lambda": list(map(float, self.loss)),
            "aggregate_gamma": float(self.aggregate_gain),
            "aggregate_lambda": float(self.aggregate_loss),
            "expected_production": float(self.expected_production),
        }
        if self.method == "mc":
            out["samples"] = self.samples
            out["seed"] = self.seed
            out["streams"] = self.streams
            out["std_error"] = {
                "gamma": list(map(float, self.gain_se)),
                "lambda": list(map(float, self.loss_se)),
                "expected_production": float(self.expected_production_se),
            }
        return out


def _check_model_game(model: CoalitionModel, game: Game) -> None:
    if model.n != game.n:
        raise DomainError(f"model has {model.n} players, game has {game.n}")


def _weighted_size_totals(model: CoalitionModel, game: Game) -> np.ndarray:
    """P(S = T) times the sum of v(T) over coalitions of each size t.

    The coalition-count multiplicity is combined with the log-weights before
    exponentiating, so the entries stay bounded by the size distribution
    times the value scale at any n.
    """
    n = game.n
    lw = log_size_weights(model)
    if game.size_only:
        u = game.value_by_size()
        return np.exp([log_binom(n, t) + lw[t] for t in range(n + 1)]) * u
    if isinstance(game, AdditiveGame):
        total = float(game.player_values.sum())
        # Each player sits in C(n-1, t-1) of the C(n, t) coalitions of size t.
        out = np.zeros(n + 1)
        for t in range(1, n + 1):
            out[t] = math.exp(log_binom(n - 1, t - 1) + lw[t]) * total
        return out
    table = game.dense_values()
    sizes = np.bitwise_count(np.arange(1 << n, dtype=np.int64))
    w = np.exp(lw)
    return np.bincount(sizes, weights=w[sizes] * table, minlength=n + 1)


def _grand_value(game: Game) -> float:
    if game.size_only:
        return float(game.value_by_size()[-1])
    if isinstance(game, AdditiveGame):
        return float(game.player_values.sum())
    return float(game.dense_values()[-1])


def expected_production(model: CoalitionModel, game: Game) -> float:
    """Mean of v(S) under the coalition model."""
    _check_model_game(model, game)
    return float(_weighted_size_totals(model, game).sum())


def _exact_dense(model: CoalitionModel, game: Game) -> tuple[np.ndarray, np.ndarray, float]:
    n, th, rh = model.n, model.theta, model.rho
    if n > ENUMERATION_CAP:
        raise CapacityError(
            f"exact valuation by enumeration limited to n <= {ENUMERATION_CAP}"
        )
    table = game.dense_values()
    masks = np.arange(1 << n, dtype=np.int64)
    sizes = np.bitwise_count(masks)
    lb0 = log_beta(th, rh)
    lw = log_size_weights(model)
    w = np.exp(lw)
    # Weight a coalition would have with one extra (resp. one fewer) member.
    w_plus = np.zeros(n + 1)
    w_plus[:n] = np.exp([log_beta(th + t + 1, rh + n - t - 1) - lb0 for t in range(n)])
    w_minus = np.zeros(n + 1)
    w_minus[1:] = np.exp(
        [log_beta(th + t - 1, rh + n - t + 1) - lb0 for t in range(1, n + 1)]
    )
    wv = w[sizes] * table
    wv_plus = w_plus[sizes] * table
    wv_minus = w_minus[sizes] * table
    total_wv = wv.sum()
    total_plus = wv_plus.sum()
    total_minus = wv_minus.sum()
    gain = np.empty(n)
    loss = np.empty(n)
    for i in range(n):
        inside = (masks >> i) & 1 == 1
        s_wv = wv[inside].sum()
        s_minus = wv_minus[inside].sum()
        gain[i] = s_wv - (total_plus - wv_plus[inside].sum())
        loss[i] = s_minus - (total_wv - s_wv)
    return gain, loss, float(total_wv)


def _exact_size_symmetric(model: CoalitionModel, game: Game):
    n = model.n
    u = game.value_by_size()
    lw = log_size_weights(model)
    gain_terms = [
        math.exp(log_binom(n - 1, t - 1) + lw[t]) * (u[t] - u[t - 1])
        for t in range(1, n + 1)
    ]
    loss_terms = [
        math.exp(log_binom(n - 1, t) + lw[t]) * (u[t + 1] - u[t]) for t in range(n)
    ]
    gain = np.full(n, math.fsum(gain_terms))
    loss = np.full(n, math.fsum(loss_terms))
    return gain, loss


def exact_valuation(model: CoalitionModel, game: Game) -> Valuation:
    """Exact per-player valuation.

    Enumerates coalitions up to the cap; size-symmetric and additive games
    take closed-form routes that scale to any n.
    """
    _check_model_game(model, game)
    if game.size_only:
        gain, loss = _exact_size_symmetric(model, game)
        production = expected_production(model, game)
    elif isinstance(game, AdditiveGame):
        share = model.prior_mean
        gain = game.player_values * share
        loss = game.player_values * (1.0 - share)
        production = float(gain.sum())
    else:
        gain, loss, production = _exact_dense(model, game)
    gain.setflags(write=False)
    loss.setflags(write=False)
    return Valuation(
        gain=gain,
        loss=loss,
        aggregate_gain=float(gain.sum()),
        aggregate_loss=float(loss.sum()),
        expected_production=production,
        method="exact",
    )


def _aggregate_closed_form(model: CoalitionModel, game: Game, which: str) -> float:
    _check_model_game(model, game)
    n, th, rh = model.n, model.theta, model.rho
    weighted = _weighted_size_totals(model, game)
    grand_w = math.exp(log_size_weights(model)[n])
    t = np.arange(n + 1, dtype=float)
    if which == "gain":
        denom = rh + n - t - 1.0
        if np.any(np.abs(denom[:n]) < 1e-12):
            raise SingularSystemError(
                "coefficient denominator rho + n - t - 1 vanishes"
            )
        coef = np.zeros(n + 1)
        coef[:n] = (t[:n] * (th + rh - 1.0) - n * th) / denom[:n]
        # All coalitions except the grand one, plus its dedicated term.
        partial = weighted.copy()
        partial[n] -= grand_w * _grand_value(game)
        return float((coef * partial).sum() + n * grand_w * _grand_value(game))
    denom = th + t - 1.0
    if np.any(np.abs(denom[1:]) < 1e-12):
        raise SingularSystemError("coefficient denominator theta + t - 1 vanishes")
    coef = np.zeros(n + 1)
    coef[1:] = (t[1:] * (th + rh - 1.0) - n * (th - 1.0)) / denom[1:]
    empty_w = math.exp(log_beta(th, rh + n) - log_beta(th, rh))
    # v(empty) = 0 by construction, so the subtracted term vanishes.
    return float((coef * weighted).sum() - n * empty_w * 0.0)


def aggregate_gain_closed_form(model: CoalitionModel, game: Game) -> float:
    """Sum of all marginal gains via the observable reformulation."""
    return _aggregate_closed_form(model, game, "gain")


def aggregate_loss_closed_form(model: CoalitionModel, game: Game) -> float:
    """Sum of all marginal losses via the observable reformulation."""
    return _aggregate_closed_form(model, game, "loss")


def _mc_stream(model: CoalitionModel, game: Game, rng, count: int) -> np.ndarray:
    """Accumulated sums for one stream: rows are gain, gain^2, loss, loss^2
    per player, then production sum, production^2 and the sample count."""
    n = model.n
    acc = np.zeros(4 * n + 3)
    dense = isinstance(game, DenseTableGame)
    bits = 1 << np.arange(n, dtype=np.int64)
    done = 0
    while done < count:
        c = min(_MC_CHUNK, count - done)
        members = sample_memberships(model, rng, c)
        if dense:
            masks = members @ bits
            v_s = game.table[masks]
        else:
            v_s = game.values_for_memberships(members)
        for i in range(n):
            if dense:
                v_flip = game.table[masks ^ bits[i]]
            else:
                flipped = members.copy()
                flipped[:, i] = ~flipped[:, i]
                v_flip = game.values_for_memberships(flipped)
            inside = members[:, i]
            g = np.where(inside, v_s - v_flip, 0.0)
            l = np.where(inside, 0.0, v_flip - v_s)
            acc[4 * i] += g.sum()
            acc[4 * i + 1] += (g * g).sum()
            acc[4 * i + 2] += l.sum()
            acc[4 * i + 3] += (l * l).sum()
        acc[4 * n] += v_s.sum()
        acc[4 * n + 1] += (v_s * v_s).sum()
        acc[4 * n + 2] += c
        done += c
    return acc


def _tree_reduce(parts: list[np.ndarray]) -> np.ndarray:
    while len(parts) > 1:
        merged = [parts[k] + parts[k + 1] for k in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            merged.append(parts[-1])
        parts = merged
    return parts[0]


def _se(sum_x: np.ndarray, sum_x2: np.ndarray, count: int) -> np.ndarray:
    mean = sum_x / count
    if count < 2:
        return np.zeros_like(mean)
    var = np.maximum(sum_x2 - count * mean * mean, 0.0) / (count - 1)
    return np.sqrt(var / count)


def mc_valuation(
    model: CoalitionModel,
    game: Game,
    samples: int,
    seed: int,
    streams: int = 8,
    max_workers: int = 1,
) -> Valuation:
    """Monte Carlo valuation with per-entry standard errors.

    Samples are split across ``streams`` independent generators spawned from
    the seed, and stream partials are combined by a fixed pairwise tree, so
    the result depends on (seed, streams) but not on ``max_workers``.
    """
    _check_model_game(model, game)
    if samples < 1:
        raise DomainError("need at least one sample")
    if streams < 1:
        raise DomainError("need at least one stream")
    streams = min(streams, samples)
    rngs = spawn_streams(seed, streams)
    base, extra = divmod(samples, streams)
    counts = [base + (1 if k < extra else 0) for k in range(streams)]
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            parts = list(
                pool.map(
                    lambda kr: _mc_stream(model, game, kr[1], counts[kr[0]]),
                    enumerate(rngs),
                )
            )
    else:
        parts = [_mc_stream(model, game, rng, c) for rng, c in zip(rngs, counts)]
    acc = _tree_reduce(parts)
    n = model.n
    total = int(acc[4 * n + 2])
    gain_sum = acc[0 : 4 * n : 4]
    gain_sq = acc[1 : 4 * n : 4]
    loss_sum = acc[2 : 4 * n : 4]
    loss_sq = acc[3 : 4 * n : 4]
    gain = gain_sum / total
    loss = loss_sum / total
    for arr in (gain, loss):
        arr.setflags(write=False)
    return Valuation(
        gain=gain,
        loss=loss,
        aggregate_gain=float(gain.sum()),
        aggregate_loss=float(loss.sum()),
        expected_production=float(acc[4 * n] / total),
        method="mc",
        samples=total,
        seed=seed,
        streams=streams,
        gain_se=_se(gain_sum, gain_sq, total),
        loss_se=_se(loss_sum, loss_sq, total),
        expected_production_se=float(_se(acc[4 * n : 4 * n + 1], acc[4 * n + 1 : 4 * n + 2], total)[0]),
    )


@dataclass(frozen=True)
class OrderingReport:
    """Marginal values of a player pair and the implied ordering checks."""

    i: int
    j: int
    outperforms: bool
    gain_i: float
    gain_j: float
    loss_i: float
    loss_j: float
    gain_ordered: bool
    loss_ordered: bool


def ordering_check(model: CoalitionModel, game: Game, i: int, j: int) -> OrderingReport:
    """Verify that uniform outperformance carries over to the valuation.

    When i uniformly outperforms j, both the gain and the loss of i must be
    at least j's; a breach would be a defect of the library, so it raises
    rather than being reported quietly.
    """
    val = exact_valuation(model, game)
    outp = uniformly_outperforms(game, i, j)
    gi, gj = float(val.gain[i - 1]), float(val.gain[j - 1])
    li, lj = float(val.loss[i - 1]), float(val.loss[j - 1])
    tol_g = 1e-12 * max(1.0, abs(gi), abs(gj))
    tol_l = 1e-12 * max(1.0, abs(li), abs(lj))
    gain_ok = gi >= gj - tol_g
    loss_ok = li >= lj - tol_l
    if outp and not (gain_ok and loss_ok):
        raise InvariantViolation(
            f"player {i} outperforms {j} but valuation ordering fails: "
            f"gain {gi} vs {gj}, loss {li} vs {lj}"
        )
    return OrderingReport(
        i=i,
        j=j,
        outperforms=outp,
        gain_i=gi,
        gain_j=gj,
        loss_i=li,
        loss_j=lj,
        gain_ordered=gain_ok,
        loss_ordered=loss_ok,
    )
