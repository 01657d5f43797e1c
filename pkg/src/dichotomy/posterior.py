"""Statistics of the posterior employment rate and its large-market limits.

After observing an employment count s out of n, the employment rate has a
Beta(theta + s, rho + n - s) posterior.  This module provides its summary
statistics (closed forms wherever they exist) and machine-readable reports
that check the advertised limit behaviour along a ladder of market sizes:
degeneracy at the observed rate, the scaled-variance limit, the response of
the mean to the tax rate, the semivariance sandwich, and the squared
MAD-to-variance ratio.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .coalition import PosteriorRate
from .errors import DomainError
from .numerics import log_beta, reg_inc_beta
from .serialize import csv_line
from .taxpolicy import asymptotic_tax_rule, solve_theta_rho

__all__ = [
    "PosteriorSummary",
    "LimitRow",
    "LimitReport",
    "beta_mean",
    "beta_variance",
    "beta_mode",
    "beta_median",
    "beta_raw_moment",
    "mad_about_mean",
    "semivariances",
    "summarize",
    "verify_degenerate_limit",
    "verify_asymptotic_variance",
    "verify_posterior_mean_expansion",
    "verify_semivariance_sandwich",
    "verify_mad_ratio",
]

# Beyond this shape size the incomplete-beta route gives way to direct
# quadrature of the density when computing semivariances.
QUAD_FALLBACK = 1e7

MEDIAN_MAX_ITER = 200
MEDIAN_XTOL = 1e-13


def _check_shapes(a: float, b: float) -> None:
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"shape parameters must be positive, got ({a}, {b})")


def beta_mean(a: float, b: float) -> float:
    _check_shapes(a, b)
    return a / (a + b)


def beta_variance(a: float, b: float) -> float:
    _check_shapes(a, b)
    return a * b / ((a + b) * (a + b) * (a + b + 1.0))


def beta_mode(a: float, b: float) -> float | None:
    """Interior mode, or None when the density peaks at a boundary."""
    _check_shapes(a, b)
    if a > 1.0 and b > 1.0:
        return (a - 1.0) / (a + b - 2.0)
    return None


def beta_raw_moment(a: float, b: float, k: int) -> float:
    """k-th raw moment as the product of (a+z)/(a+b+z) over z < k."""
    _check_shapes(a, b)
    if k < 0:
        raise DomainError(f"moment order must be non-negative, got {k}")
    m = 1.0
    for z in range(k):
        m *= (a + z) / (a + b + z)
    return m


def beta_median(a: float, b: float) -> float:
    """Median by bisection on the regularized incomplete beta."""
    _check_shapes(a, b)
    lo, hi = 0.0, 1.0
    for _ in range(MEDIAN_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if reg_inc_beta(mid, a, b) < 0.5:
            lo = mid
        else:
            hi = mid
        if hi - lo <= MEDIAN_XTOL:
            break
    return 0.5 * (lo + hi)


def mad_about_mean(a: float, b: float) -> float:
    """Mean absolute deviation about the mean, entirely in log space.

    Uses the exact identity 2 a^a b^b / (B(a,b) (a+b)^(a+b+1)); the often
    quoted variant without the +1 in the exponent overstates the deviation
    by a factor a+b (at a = b = 1 it gives 1/2 where direct integration of
    the uniform density gives 1/4).
    """
    _check_shapes(a, b)
    mu = a / (a + b)
    muc = b / (a + b)
    ln = (
        math.log(2.0)
        + a * math.log(mu)
        + b * math.log(muc)
        - log_beta(a, b)
        - math.log(a + b)
    )
    return math.exp(ln)


def _lower_semivariance_quad(a: float, b: float) -> float:
    # Standardized coordinates keep the integrand O(1) for any shape size,
    # and expressing the density relative to its value at the mean keeps the
    # huge exponents from washing out the smoothness quad relies on.
    mu = a / (a + b)
    muc = b / (a + b)
    sd = math.sqrt(beta_variance(a, b))
    ln_norm = (
        math.log(sd)
        + a * math.log(mu)
        + b * math.log(muc)
        - log_beta(a, b)
        - math.log(mu * muc)
    )

    def integrand(z: float) -> float:
        d = sd * z
        return z * z * math.exp(
            ln_norm + (a - 1.0) * math.log1p(d / mu) + (b - 1.0) * math.log1p(-d / muc)
        )

    z_lo = max(-50.0, -mu / sd * (1.0 - 1e-12))
    val, _ = quad(integrand, z_lo, 0.0, epsabs=1e-12, epsrel=1e-10, limit=200)
    return val * sd * sd


def semivariances(a: float, b: float) -> tuple[float, float]:
    """Lower and upper one-sided second central moments about the mean.

    The truncated moments below the mean reduce to regularized incomplete
    betas at shifted shapes; combining them analytically leaves a single
    incomplete-beta call and no cancellation.  Extreme shapes fall back to
    adaptive quadrature of the density.
    """
    _check_shapes(a, b)
    var = beta_variance(a, b)
    if a > QUAD_FALLBACK or b > QUAD_FALLBACK:
        lower = _lower_semivariance_quad(a, b)
    else:
        mu = a / (a + b)
        muc = b / (a + b)
        dens = math.exp(a * math.log(mu) + b * math.log(muc) - log_beta(a, b))
        lower = var * reg_inc_beta(mu, a, b) + dens * mu * (2.0 * mu - 1.0) / (
            a * (a + b + 1.0)
        )
    return lower, var - lower


@dataclass(frozen=True)
class PosteriorSummary:
    mean: float
    mode: float | None
    median: float
    variance: float
    lower_semivariance: float
    upper_semivariance: float
    mad: float
    moments: tuple[float, ...]


def summarize(post: PosteriorRate, moments: int = 4) -> PosteriorSummary:
    """All summary statistics of a posterior rate; raw moments up to order
    ``moments``."""
    a, b = post.a, post.b
    lower, upper = semivariances(a, b)
    return PosteriorSummary(
        mean=beta_mean(a, b),
        mode=beta_mode(a, b),
        median=beta_median(a, b),
        variance=beta_variance(a, b),
        lower_semivariance=lower,
        upper_semivariance=upper,
        mad=mad_about_mean(a, b),
        moments=tuple(beta_raw_moment(a, b, k) for k in range(1, moments + 1)),
    )


@dataclass(frozen=True)
class LimitRow:
    n: float
    theta: float
    rho: float
    mean: float
    variance: float
    n_var: float
    lower_semi: float
    upper_semi: float
    mad: float
    target: float
    abs_error: float


_CSV_HEADER = "n,theta,rho,mean,variance,n_var,lower_semi,upper_semi,mad,target,abs_error"


@dataclass(frozen=True)
class LimitReport:
    kind: str
    rows: tuple[LimitRow, ...]
    passed: bool
    details: dict

    def to_csv(self) -> str:
        lines = [_CSV_HEADER]
        for r in self.rows:
            lines.append(
                csv_line(
                    [
                        r.n,
                        r.theta,
                        r.rho,
                        r.mean,
                        r.variance,
                        r.n_var,
                        r.lower_semi,
                        r.upper_semi,
                        r.mad,
                        r.target,
                        r.abs_error,
                    ]
                )
            )
        return "\n".join(lines) + "\n"


def _solved_shapes(omega, delta, tau, n) -> tuple[float, float, float, float]:
    sol = solve_theta_rho(n, omega, delta, tau)
    if not (sol.theta > 0.0 and sol.rho > 0.0):
        raise DomainError(
            f"no positive hyperparameters at n={n}, tau={tau}: "
            f"theta={sol.theta}, rho={sol.rho}"
        )
    a = sol.theta + n * omega
    b = sol.rho + n * (1.0 - omega)
    return sol.theta, sol.rho, a, b


def _require_open_interval(omega, delta, tau) -> float:
    rule = asymptotic_tax_rule(omega, delta)
    if not (rule < tau < 1.0):
        raise DomainError(
            f"tax rate must lie strictly inside ({rule}, 1); got {tau}"
        )
    return rule


def verify_degenerate_limit(
    omega: float, delta: float, tau: float, n_sequence, moment_count: int = 4
) -> LimitReport:
    """Mean drifts to the observed rate and the variance dies out."""
    _require_open_interval(omega, delta, tau)
    rows = []
    for n in n_sequence:
        th, rh, a, b = _solved_shapes(omega, delta, tau, n)
        mean = beta_mean(a, b)
        var = beta_variance(a, b)
        rows.append(
            LimitRow(
                n=n, theta=th, rho=rh, mean=mean, variance=var, n_var=n * var,
                lower_semi=math.nan, upper_semi=math.nan, mad=math.nan,
                target=omega, abs_error=abs(mean - omega),
            )
        )
    errs = [r.abs_error for r in rows]
    vars_ = [r.variance for r in rows]
    a_last, b_last = rows[-1].theta + rows[-1].n * omega, rows[-1].rho + rows[-1].n * (1 - omega)
    moment_errs = {
        k: abs(beta_raw_moment(a_last, b_last, k) - omega**k)
        for k in range(1, moment_count + 1)
    }
    passed = (
        all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))
        and all(v2 < v1 for v1, v2 in zip(vars_, vars_[1:]))
        and all(e < 1e-3 for e in moment_errs.values())
    )
    return LimitReport(
        kind="degenerate-limit",
        rows=tuple(rows),
        passed=passed,
        details={"moment_errors": moment_errs},
    )


def _fit_error_slope(rows: list[LimitRow]) -> float:
    pts = [(math.log10(r.n), math.log10(r.abs_error)) for r in rows if r.abs_error > 0]
    if len(pts) < 2:
        return math.nan
    xs, ys = zip(*pts)
    slope = np.polyfit(xs, ys, 1)[0]
    return float(slope)


def verify_asymptotic_variance(
    omega: float, delta: float, tau: float, n_sequence
) -> LimitReport:
    """n * Var converges to omega(1-omega)(omega+tau-delta*omega-1) at rate 1/n."""
    _require_open_interval(omega, delta, tau)
    d = omega + tau - delta * omega - 1.0
    limit = omega * (1.0 - omega) * d
    rows = []
    for n in n_sequence:
        th, rh, a, b = _solved_shapes(omega, delta, tau, n)
        mean = beta_mean(a, b)
        var = beta_variance(a, b)
        rows.append(
            LimitRow(
                n=n, theta=th, rho=rh, mean=mean, variance=var, n_var=n * var,
                lower_semi=math.nan, upper_semi=math.nan, mad=math.nan,
                target=limit, abs_error=abs(n * var - limit),
            )
        )
    slope = _fit_error_slope(rows)
    passed = -1.3 <= slope <= -0.7
    return LimitReport(
        kind="scaled-variance",
        rows=tuple(rows),
        passed=passed,
        details={"limit": limit, "slope": slope},
    )


def verify_posterior_mean_expansion(
    omega: float, delta: float, tau: float, n_sequence, rel_tol: float = 0.05
) -> LimitReport:
    """n*(mean - omega) approaches (1-tau)(2*omega-1) + omega^2*(delta-1),
    and the mean falls as the rate rises."""
    if not (0.5 < omega < 1.0):
        raise DomainError(
            f"the monotone response holds for omega in (0.5, 1); got {omega}"
        )
    rule = _require_open_interval(omega, delta, tau)
    coef = (1.0 - tau) * (2.0 * omega - 1.0) + omega * omega * (delta - 1.0)
    rows = []
    for n in n_sequence:
        th, rh, a, b = _solved_shapes(omega, delta, tau, n)
        mean = beta_mean(a, b)
        var = beta_variance(a, b)
        rows.append(
            LimitRow(
                n=n, theta=th, rho=rh, mean=mean, variance=var,
                n_var=n * var, lower_semi=math.nan, upper_semi=math.nan,
                mad=math.nan, target=coef, abs_error=abs(n * (mean - omega) - coef),
            )
        )
    n_big = rows[-1].n
    h = min(1e-4, 0.1 * (1.0 - tau), 0.1 * (tau - rule))
    _, _, a_hi, b_hi = _solved_shapes(omega, delta, tau + h, n_big)
    _, _, a_lo, b_lo = _solved_shapes(omega, delta, tau - h, n_big)
    derivative = (beta_mean(a_hi, b_hi) - beta_mean(a_lo, b_lo)) / (2.0 * h)
    passed = rows[-1].abs_error <= rel_tol * abs(coef) and derivative < 0.0
    return LimitReport(
        kind="mean-response",
        rows=tuple(rows),
        passed=passed,
        details={"coefficient": coef, "mean_derivative_in_tau": derivative},
    )


def verify_semivariance_sandwich(
    omega: float, delta: float, tau: float, n_sequence, band: float = 0.10
) -> LimitReport:
    """n * (one-sided variance) lands between (1/2 - 1/sqrt(2*pi)) and 1
    times the scaled-variance limit, for both sides."""
    _require_open_interval(omega, delta, tau)
    d = omega + tau - delta * omega - 1.0
    upper_bound = omega * (1.0 - omega) * d
    lower_bound = (0.5 - 1.0 / math.sqrt(2.0 * math.pi)) * upper_bound
    rows = []
    for n in n_sequence:
        th, rh, a, b = _solved_shapes(omega, delta, tau, n)
        mean = beta_mean(a, b)
        var = beta_variance(a, b)
        lo_semi, up_semi = semivariances(a, b)
        rows.append(
            LimitRow(
                n=n, theta=th, rho=rh, mean=mean, variance=var, n_var=n * var,
                lower_semi=lo_semi, upper_semi=up_semi, mad=math.nan,
                target=upper_bound, abs_error=abs(n * lo_semi - upper_bound),
            )
        )
    last = rows[-1]
    n_big = last.n
    inside = (
        lower_bound * (1.0 - band) <= n_big * last.lower_semi <= upper_bound * (1.0 + band)
        and lower_bound * (1.0 - band) <= n_big * last.upper_semi <= upper_bound * (1.0 + band)
    )
    return LimitReport(
        kind="semivariance-sandwich",
        rows=tuple(rows),
        passed=inside,
        details={"lower_bound": lower_bound, "upper_bound": upper_bound},
    )


def verify_mad_ratio(
    omega: float, delta: float, tau: float, n_sequence, tol: float = 1e-2
) -> LimitReport:
    """Squared mean absolute deviation over variance approaches 2/pi."""
    _require_open_interval(omega, delta, tau)
    target = 2.0 / math.pi
    rows = []
    for n in n_sequence:
        th, rh, a, b = _solved_shapes(omega, delta, tau, n)
        mean = beta_mean(a, b)
        var = beta_variance(a, b)
        mad = mad_about_mean(a, b)
        rows.append(
            LimitRow(
                n=n, theta=th, rho=rh, mean=mean, variance=var, n_var=n * var,
                lower_semi=math.nan, upper_semi=math.nan, mad=mad,
                target=target, abs_error=abs(mad * mad / var - target),
            )
        )
    passed = rows[-1].abs_error <= tol
    return LimitReport(
        kind="mad-ratio",
        rows=tuple(rows),
        passed=passed,
        details={"target": target, "final_ratio": rows[-1].mad ** 2 / rows[-1].variance},
    )
