"""Command-line front end.

Subcommands map onto the library surface: ``tax-rate`` and ``series`` apply
the balanced-budget rule, ``dvalue`` values players in a game, ``sweep``
probes the feasible set over a rate grid, ``verify`` runs the numbered
limit checks (see README for the catalogue), and ``apps`` wraps the voting,
insurance and toll applications.  All primary output is CSV or JSON with
floats at 17 significant digits, so repeated runs are byte-identical.

Exit codes: 0 success, 2 usage, 3 infeasible, 4 data, 5 capacity,
6 verification failure.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from .apps import (
    LinearCurve,
    PowerCurve,
    TollScenario,
    highway_toll,
    insurance_premium,
    load_toll_scenario,
    voting_power,
)
from .coalition import CoalitionModel
from .dvalue import (
    aggregate_gain_closed_form,
    aggregate_loss_closed_form,
    exact_valuation,
    mc_valuation,
)
from .errors import CapacityError, DomainError, SingularSystemError
from .posterior import (
    verify_asymptotic_variance,
    verify_degenerate_limit,
    verify_mad_ratio,
    verify_posterior_mean_expansion,
    verify_semivariance_sandwich,
)
from .production import (
    AdditiveGame,
    Game,
    KOutOfNGame,
    WeightedVotingGame,
    load_dense_game,
)
from .serialize import csv_line, json_dumps
from .taxpolicy import (
    asymptotic_tax_rule,
    corrected_tax_rule,
    feasible_set_probe,
    solve_theta_rho,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_DATA = 4
EXIT_CAPACITY = 5
EXIT_VERIFY = 6

_SWEEP_HEADER = (
    "omega,tau,delta,n,theta,rho,d,valid,residual_benefits,residual_welfare,singular"
)


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("DICHOTOMY_THREADS", "1")))
    except ValueError:
        return 1


def _write_out(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def parse_game_spec(spec: str) -> Game:
    """A game family string or a path to a dense-game JSON file.

    Families: majority:N, kofn:N:K, unanimity:N, weighted:W1,...,Wn:QUOTA,
    additive:V1,...,Vn.
    """
    head, _, rest = spec.partition(":")
    try:
        if head == "majority":
            n = int(rest)
            return KOutOfNGame(n, n // 2 + 1)
        if head == "kofn":
            n_str, k_str = rest.split(":")
            return KOutOfNGame(int(n_str), int(k_str))
        if head == "unanimity":
            n = int(rest)
            return KOutOfNGame(n, n)
        if head == "weighted":
            w_str, q_str = rest.rsplit(":", 1)
            weights = [float(x) for x in w_str.split(",")]
            return WeightedVotingGame(weights, float(q_str))
        if head == "additive":
            return AdditiveGame([float(x) for x in rest.split(",")])
    except (ValueError, DomainError) as exc:
        raise DomainError(f"bad game spec {spec!r}: {exc}") from exc
    if os.path.exists(spec):
        return load_dense_game(spec)
    raise DomainError(
        f"unknown game family or missing file: {spec!r}"
    )


def _cmd_tax_rate(args) -> int:
    if not (0.0 < args.omega < 1.0):
        print("error: --omega must lie in (0,1)", file=sys.stderr)
        return EXIT_USAGE
    if not (-1.0 < args.delta < 1.0):
        print("error: --delta must lie in (-1,1)", file=sys.stderr)
        return EXIT_USAGE
    tau = asymptotic_tax_rule(args.omega, args.delta)
    if args.n is None:
        text = "omega,delta,tau_asymptotic\n" + csv_line([args.omega, args.delta, tau]) + "\n"
        _write_out(text, args.out)
        return EXIT_OK
    tau_c = corrected_tax_rule(args.n, args.omega, args.delta, scale=1.0)
    tau_2c = corrected_tax_rule(args.n, args.omega, args.delta, scale=2.0)
    try:
        sol = solve_theta_rho(args.n, args.omega, args.delta, tau_2c)
    except SingularSystemError:
        print("error: balanced-budget system is singular at these inputs", file=sys.stderr)
        return EXIT_INFEASIBLE
    header = (
        "omega,delta,n,tau_asymptotic,tau_corrected,tau_corrected_2x,theta,rho,feasible"
    )
    row = csv_line(
        [args.omega, args.delta, args.n, tau, tau_c, tau_2c, sol.theta, sol.rho, sol.valid]
    )
    _write_out(header + "\n" + row + "\n", args.out)
    if not (sol.theta > 0.0 and sol.rho > 0.0):
        print(
            f"error: no positive hyperparameters at n={args.n} "
            f"(theta={sol.theta}, rho={sol.rho})",
            file=sys.stderr,
        )
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_series(args) -> int:
    try:
        with open(args.input, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_DATA
    if not rows or rows[0][:2] != ["period", "omega"]:
        print("error: line 1: header must be 'period,omega[,delta]'", file=sys.stderr)
        return EXIT_DATA
    has_delta = len(rows[0]) >= 3 and rows[0][2] == "delta"
    bad: list[str] = []
    seen_periods: set[str] = set()
    out_lines = ["period,omega,delta,tau_asymptotic,tau_corrected"]
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < 2:
            bad.append(f"line {lineno}: expected at least 2 fields")
            continue
        period = row[0]
        if period in seen_periods:
            bad.append(f"line {lineno}: duplicate period {period!r}")
            continue
        seen_periods.add(period)
        try:
            omega = float(row[1])
        except ValueError:
            bad.append(f"line {lineno}: omega {row[1]!r} is not a number")
            continue
        if not (0.0 < omega < 1.0):
            bad.append(f"line {lineno}: omega {omega} outside (0,1)")
            continue
        delta = args.delta
        if has_delta and len(row) >= 3 and row[2].strip():
            try:
                delta = float(row[2])
            except ValueError:
                bad.append(f"line {lineno}: delta {row[2]!r} is not a number")
                continue
        tau = asymptotic_tax_rule(omega, delta)
        tau_c = corrected_tax_rule(args.n, omega, delta, scale=1.0)
        out_lines.append(csv_line([period, omega, delta, tau, tau_c]))
    _write_out("\n".join(out_lines) + "\n", args.out)
    if bad:
        print("rejected rows:", file=sys.stderr)
        for msg in bad:
            print(f"  {msg}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def _cmd_dvalue(args) -> int:
    try:
        game = parse_game_spec(args.game)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        model = CoalitionModel(game.n, args.theta, args.rho)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.method == "exact":
            val = exact_valuation(model, game)
        else:
            val = mc_valuation(
                model, game, args.samples, args.seed,
                streams=args.streams, max_workers=args.threads,
            )
        report = val.to_json_dict()
        try:
            report["aggregate_gamma_closed_form"] = aggregate_gain_closed_form(model, game)
            report["aggregate_lambda_closed_form"] = aggregate_loss_closed_form(model, game)
        except CapacityError:
            report["aggregate_gamma_closed_form"] = None
            report["aggregate_lambda_closed_form"] = None
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    _write_out(json_dumps(report) + "\n", args.out)
    return EXIT_OK


def _parse_range(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    return float(lo), float(hi)


def _cmd_sweep(args) -> int:
    try:
        w_lo, w_hi = _parse_range(args.omega_range)
        t_lo, t_hi = _parse_range(args.tau_range)
    except ValueError:
        print("error: ranges must look like LO:HI", file=sys.stderr)
        return EXIT_USAGE
    if args.resolution < 1 or w_lo > w_hi or t_lo > t_hi:
        print("error: degenerate sweep ranges", file=sys.stderr)
        return EXIT_USAGE
    if not (0.0 < w_lo and w_hi < 1.0):
        print("error: omega range must stay inside (0,1)", file=sys.stderr)
        return EXIT_USAGE

    def grid(lo: float, hi: float) -> list[float]:
        if args.resolution == 1 or lo == hi:
            return [lo]
        return list(np.linspace(lo, hi, args.resolution))

    lines = [_SWEEP_HEADER]
    for omega in grid(w_lo, w_hi):
        for sol in feasible_set_probe(args.n, omega, args.delta, grid(t_lo, t_hi)):
            lines.append(
                csv_line(
                    [
                        sol.inputs.omega,
                        sol.inputs.tau,
                        sol.inputs.delta,
                        sol.inputs.n,
                        sol.theta,
                        sol.rho,
                        sol.shorthands.d,
                        sol.valid,
                        sol.residual_benefits,
                        sol.residual_welfare,
                        sol.singular,
                    ]
                )
            )
    _write_out("\n".join(lines) + "\n", args.out)
    return EXIT_OK


_VERIFY_OPS = {
    2: verify_degenerate_limit,
    3: verify_asymptotic_variance,
    4: verify_semivariance_sandwich,
    5: verify_posterior_mean_expansion,
    6: verify_mad_ratio,
}


def _cmd_verify(args) -> int:
    try:
        n_list = [int(x) for x in args.n_list.split(",") if x.strip()]
        if not n_list:
            raise ValueError("empty n list")
    except ValueError as exc:
        print(f"error: bad --n-list: {exc}", file=sys.stderr)
        return EXIT_USAGE
    op = _VERIFY_OPS[args.theorem]
    try:
        report = op(args.omega, args.delta, args.tau, n_list)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write_out(report.to_csv(), args.out)
    for key, value in report.details.items():
        print(f"# {key} = {value}", file=sys.stderr)
    if not report.passed:
        worst = max(report.rows, key=lambda r: r.abs_error)
        print(
            f"verification failed ({report.kind}); worst row: n={worst.n:g} "
            f"target={worst.target} abs_error={worst.abs_error}",
            file=sys.stderr,
        )
        return EXIT_VERIFY
    return EXIT_OK


def _power_json(model: CoalitionModel, report) -> dict:
    out = {
        "n": model.n,
        "theta": model.theta,
        "rho": model.rho,
        "method": report.method,
        "power": list(map(float, report.power)),
    }
    out["valuation"] = report.valuation.to_json_dict()
    return out


def _cmd_apps(args) -> int:
    if args.app == "voting":
        try:
            game = parse_game_spec(args.game)
        except DomainError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DATA
        try:
            model = CoalitionModel(game.n, args.theta, args.rho)
            report = voting_power(
                model, game, method=args.method, samples=args.samples,
                seed=args.seed, streams=args.streams, max_workers=args.threads,
            )
        except DomainError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except CapacityError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CAPACITY
        _write_out(json_dumps(_power_json(model, report)) + "\n", args.out)
        return EXIT_OK

    if args.app == "insurance":
        try:
            game = parse_game_spec(args.game)
        except DomainError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DATA
        try:
            model = CoalitionModel(game.n, args.theta, args.rho)
            quote = insurance_premium(model, game, args.surcharge)
        except DomainError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except CapacityError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CAPACITY
        out = {
            "n": quote.n,
            "surcharge": quote.surcharge,
            "expected_cost": quote.expected_cost,
            "total_billed": quote.total_billed,
            "premium_per_policyholder": quote.premium_per_policyholder,
        }
        _write_out(json_dumps(out) + "\n", args.out)
        return EXIT_OK

    # toll
    try:
        if args.scenario:
            scenario = load_toll_scenario(args.scenario)
        else:
            if args.g is None or args.n is None or args.omega is None:
                print(
                    "error: toll needs --scenario or all of --g, --n, --omega",
                    file=sys.stderr,
                )
                return EXIT_USAGE
            scenario = TollScenario(n=args.n, omega=args.omega, g=_parse_curve(args.g))
        result = highway_toll(scenario)
    except (DomainError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    out = {
        "n": scenario.n,
        "omega": scenario.omega,
        "toll": result.toll,
        "production_value": result.production_value,
        "per_driver_cost": result.per_driver_cost,
        "identity_residual": result.identity_residual,
        "cost_curve": result.metadata,
    }
    _write_out(json_dumps(out) + "\n", args.out)
    return EXIT_OK


def _parse_curve(spec: str):
    head, _, rest = spec.partition(":")
    try:
        if head == "power":
            parts = rest.split(":")
            exponent = float(parts[0])
            coefficient = float(parts[1]) if len(parts) > 1 else 1.0
            return PowerCurve(exponent, coefficient)
        if head == "linear":
            return LinearCurve(float(rest))
    except (ValueError, IndexError) as exc:
        raise DomainError(f"bad cost curve {spec!r}: {exc}") from exc
    raise DomainError(f"unknown cost curve {spec!r} (use power:EXP[:COEF] or linear:SLOPE)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dichotomy",
        description="Valuation under a random bipartition and the balanced-budget tax rule.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tax-rate", help="asymptotic and finite-market tax rates")
    p.add_argument("--omega", type=float, required=True, help="employment rate in (0,1)")
    p.add_argument("--delta", type=float, required=True, help="reserve ratio in (-1,1)")
    p.add_argument("--n", type=float, default=None, help="labor-force size")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_tax_rate)

    p = sub.add_parser("series", help="apply the rule to a rate series CSV")
    p.add_argument("input", help="CSV with header period,omega[,delta]")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_series)

    p = sub.add_parser("dvalue", help="per-player valuation of a game")
    p.add_argument("--game", required=True, help="family spec or JSON file")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--method", choices=("exact", "mc"), default="exact")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--streams", type=int, default=8)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_dvalue)

    p = sub.add_parser("sweep", help="feasible-set probe over an (omega, tau) grid")
    p.add_argument("--n", type=float, default=10000.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--omega-range", default="0.05:0.95")
    p.add_argument("--tau-range", default="0.0:1.0")
    p.add_argument("--resolution", type=int, default=41, help="grid points per axis")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="run a numbered limit check (2-6)")
    p.add_argument("--theorem", type=int, choices=sorted(_VERIFY_OPS), required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--n-list", default="1000,10000,100000,1000000")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("apps", help="voting power, insurance premium, highway toll")
    apps_sub = p.add_subparsers(dest="app", required=True)

    pv = apps_sub.add_parser("voting")
    pv.add_argument("--game", required=True)
    pv.add_argument("--theta", type=float, required=True)
    pv.add_argument("--rho", type=float, required=True)
    pv.add_argument("--method", choices=("exact", "mc"), default="exact")
    pv.add_argument("--samples", type=int, default=1_000_000)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--streams", type=int, default=8)
    pv.add_argument("--threads", type=int, default=_default_threads())
    pv.add_argument("--out", default=None)
    pv.set_defaults(func=_cmd_apps)

    pi = apps_sub.add_parser("insurance")
    pi.add_argument("--game", required=True)
    pi.add_argument("--theta", type=float, required=True)
    pi.add_argument("--rho", type=float, required=True)
    pi.add_argument("--surcharge", type=float, required=True)
    pi.add_argument("--out", default=None)
    pi.set_defaults(func=_cmd_apps)

    pt = apps_sub.add_parser("toll")
    pt.add_argument("--scenario", default=None, help="JSON scenario file")
    pt.add_argument("--g", default=None, help="power:EXP[:COEF] or linear:SLOPE")
    pt.add_argument("--n", type=int, default=None)
    pt.add_argument("--omega", type=float, default=None)
    pt.add_argument("--out", default=None)
    pt.set_defaults(func=_cmd_apps)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
