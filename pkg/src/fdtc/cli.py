"""Experiment runner: sweep curves, single-point evaluation, validation suite.

Command shape:

    fdtc <experiment> [--config PATH] [--seed S] [--trials T] [--out PATH]
                      [--format csv|json] [--include-noise]
                      [--hd-literal-gamma-order]

Experiments: op_vs_antennas, tc_vs_antennas, strategy_comparison,
fd_vs_hd_snr, single_point, validate.  Config files are flat UTF-8
``key = value`` lines with ``#`` comments; command-line flags win.  Exit
codes: 0 success, 1 usage error, 2 validation-suite failure, 3 solver failure
in single_point mode.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .beamforming import Strategy, cancellable_pairs
from .bounds import (
    compute_omega,
    moment_psi_power_oracle,
    op_lb_exact,
    tc_upper_bound_fd,
    tc_upper_bound_hd,
)
from .channel import AntennaConfig
from .geometry import DeploymentParams, sample_network
from .numerics import gamma_fn, newton_raphson_density, op_lb_approx
from .simulator import SystemParams, estimate_outage, simulated_tc

EXPERIMENTS = ("op_vs_antennas", "tc_vs_antennas", "strategy_comparison",
               "fd_vs_hd_snr", "single_point", "validate")

_DEFAULT_SWEEPS = {
    "op_vs_antennas": [8, 10, 12, 14, 16],
    "tc_vs_antennas": [8, 10, 12, 14, 16],
    "strategy_comparison": [11, 12, 13, 14, 15, 16],
    "fd_vs_hd_snr": [0.5 * k for k in range(61)],
}

_COMPARED_STRATEGIES = (Strategy.PROPOSED_FD, Strategy.SVD_PARTIAL_ZF_FD,
                        Strategy.SVD_ONLY_FD, Strategy.PARTIAL_ZF_ONLY_FD)


@dataclass
class ExperimentSpec:
    """Everything one experiment run needs, resolved from config + flags."""

    experiment: str
    sweep: list[float] = field(default_factory=list)
    n_tx: int = 7
    n_rx: int = 3
    strategy: Strategy = Strategy.PROPOSED_FD
    density: float = 0.1
    link_distance: float = 1.0
    power: float = 1.0
    alpha: float = 4.0
    beta: float = 1.0
    epsilon: float = 0.1
    sigma2_si: float = 0.1
    sigma2_si_list: list[float] = field(default_factory=lambda: [0.1, 0.5])
    mean_pairs: float = 200.0
    trials: int = 20_000
    mc_samples: int = 50_000
    seed: int = 1
    output_path: str = ""
    fmt: str = "csv"
    include_noise: bool = False
    hd_literal_gamma_order: bool = False

    def base_params(self, config: AntennaConfig,
                    strategy: Strategy | None = None) -> SystemParams:
        return SystemParams(config=config,
                            strategy=strategy or self.strategy,
                            density=self.density,
                            link_distance=self.link_distance,
                            power=self.power, alpha=self.alpha,
                            beta=self.beta, epsilon=self.epsilon,
                            sigma2_si=self.sigma2_si,
                            mean_pairs=self.mean_pairs)


class UsageError(ValueError):
    """Bad command line or config file."""


def parse_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` pairs; blank lines and ``#`` comments ignored."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            values[key.strip().lower()] = value.strip()
    return values


def _parse_sweep(text: str) -> list[float]:
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(p) for p in text.split(":"))
        if step <= 0:
            raise UsageError("sweep step must be positive")
        count = int(round((stop - start) / step))
        return [start + k * step for k in range(count + 1)]
    return [float(p) for p in text.split(",") if p.strip()]


_SPEC_PARSERS = {
    "sweep": ("sweep", _parse_sweep),
    "n_tx": ("n_tx", int),
    "n_rx": ("n_rx", int),
    "strategy": ("strategy", Strategy.parse),
    "lambda": ("density", float),
    "density": ("density", float),
    "link_distance": ("link_distance", float),
    "power": ("power", float),
    "alpha": ("alpha", float),
    "beta": ("beta", float),
    "epsilon": ("epsilon", float),
    "sigma2_si": ("sigma2_si", float),
    "sigma2_si_list": ("sigma2_si_list",
                       lambda s: [float(p) for p in s.split(",") if p.strip()]),
    "mean_pairs": ("mean_pairs", float),
    "trials": ("trials", int),
    "mc_samples": ("mc_samples", int),
    "seed": ("seed", int),
    "out": ("output_path", str),
    "format": ("fmt", str),
    "include_noise": ("include_noise", lambda s: s.lower() in ("1", "true", "yes")),
    "hd_literal_gamma_order": ("hd_literal_gamma_order",
                               lambda s: s.lower() in ("1", "true", "yes")),
}


def build_spec(experiment: str, config_values: dict[str, str],
               args: argparse.Namespace) -> ExperimentSpec:
    spec = ExperimentSpec(experiment=experiment)
    if experiment == "fd_vs_hd_snr" and "beta" not in config_values:
        # The duplexing comparison's reference operating point uses the
        # higher threshold; at beta = 1 the doubled-rate penalty is too mild
        # for a crossover to exist.
        spec.beta = 3.0
    for key, value in config_values.items():
        if key not in _SPEC_PARSERS:
            raise UsageError(f"unknown config key {key!r}")
        attr, parser = _SPEC_PARSERS[key]
        try:
            setattr(spec, attr, parser(value))
        except UsageError:
            raise
        except ValueError as err:
            raise UsageError(f"bad value for {key!r}: {err}") from err
    # Flags win over the config file.
    if args.seed is not None:
        spec.seed = args.seed
    if args.trials is not None:
        spec.trials = args.trials
    if args.out is not None:
        spec.output_path = args.out
    if args.format is not None:
        spec.fmt = args.format
    if args.include_noise:
        spec.include_noise = True
    if args.hd_literal_gamma_order:
        spec.hd_literal_gamma_order = True
    if not spec.sweep:
        spec.sweep = list(_DEFAULT_SWEEPS.get(experiment, []))
    if spec.fmt not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {spec.fmt!r}")
    if not spec.output_path:
        spec.output_path = f"{experiment}.{spec.fmt}"
    if spec.seed < 0:
        raise UsageError("seed must be >= 0")
    return spec


def _row_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence((seed, 0xE0, index))
               .generate_state(1, np.uint64)[0])


def _antenna_splits(n_total: int) -> list[tuple[int, int]]:
    """The two sweep series: balanced split and transmit-heavy (n-2, 2)."""
    if n_total < 4:
        raise UsageError("antenna sweeps need n_total >= 4")
    balanced = (n_total - n_total // 2, n_total // 2)
    tx_heavy = (n_total - 2, 2)
    return [balanced, tx_heavy]


def _fd_bound_omega_order(params: SystemParams, include_noise: bool):
    om = compute_omega(params, include_noise=include_noise)
    order = cancellable_pairs(params.strategy, params.config) + 1
    return om, order


def _run_op_vs_antennas(spec: ExperimentSpec):
    rows = []
    for i, n in enumerate(int(v) for v in spec.sweep):
        for n_tx, n_rx in _antenna_splits(n):
            params = spec.base_params(AntennaConfig(n_tx, n_rx))
            p_hat, se = estimate_outage(params, spec.trials,
                                        _row_seed(spec.seed, i))
            om, order = _fd_bound_omega_order(params, spec.include_noise)
            lb = (1.0 if om.zero_tc
                  else op_lb_approx(params.density, order, om.value))
            exact = op_lb_exact(params, spec.mc_samples, _row_seed(spec.seed, i))
            rows.append({"N": n, "n_tx": n_tx, "n_rx": n_rx,
                         "op_sim": p_hat, "op_sim_stderr": se,
                         "op_lb_approx": lb, "op_lb_exact": exact})
    return 0, rows


def _run_tc_vs_antennas(spec: ExperimentSpec):
    rows = []
    for i, n in enumerate(int(v) for v in spec.sweep):
        for n_tx, n_rx in _antenna_splits(n):
            params = spec.base_params(AntennaConfig(n_tx, n_rx))
            sim = simulated_tc(params, trials=spec.trials,
                               seed=_row_seed(spec.seed, i))
            bound = tc_upper_bound_fd(params, include_noise=spec.include_noise)
            rows.append({"N": n, "n_tx": n_tx, "n_rx": n_rx,
                         "tc_sim": sim.capacity, "tc_ub": bound.tc_ub,
                         "tc_sim_bracket_failed": int(sim.bracket_failed),
                         "tc_ub_converged": int(bound.converged)})
    return 0, rows


def _run_strategy_comparison(spec: ExperimentSpec):
    rows = []
    for n in (int(v) for v in spec.sweep):
        if n <= 5:
            raise UsageError("strategy comparison fixes n_rx = 5; need N > 5")
        for strategy in _COMPARED_STRATEGIES:
            params = spec.base_params(AntennaConfig(n - 5, 5), strategy)
            bound = tc_upper_bound_fd(params, include_noise=spec.include_noise)
            rows.append({"N": n, "strategy": strategy.value,
                         "tc_ub": bound.tc_ub,
                         "converged": int(bound.converged),
                         "zero_tc": int(bound.zero_tc)})
    return 0, rows


def _run_fd_vs_hd_snr(spec: ExperimentSpec):
    # The swept variable is the transmit power over unit noise, so this
    # experiment always uses the noise-aware aggregation.
    rows = []
    for sigma2 in spec.sigma2_si_list:
        for snr_db in spec.sweep:
            power = 10.0 ** (snr_db / 10.0)
            params = dataclasses.replace(
                spec.base_params(AntennaConfig(spec.n_tx, spec.n_rx)),
                power=power, sigma2_si=sigma2)
            fd = tc_upper_bound_fd(params, include_noise=True)
            hd = tc_upper_bound_hd(params, include_noise=True,
                                   literal_gamma_order=spec.hd_literal_gamma_order)
            rows.append({"snr_db": snr_db, "tc_ub_fd": fd.tc_ub,
                         "tc_ub_hd": hd.tc_ub, "sigma2_si": sigma2})
    return 0, rows


def _run_single_point(spec: ExperimentSpec):
    params = spec.base_params(AntennaConfig(spec.n_tx, spec.n_rx))
    if spec.strategy is Strategy.HALF_DUPLEX:
        bound = tc_upper_bound_hd(params, include_noise=spec.include_noise,
                                  literal_gamma_order=spec.hd_literal_gamma_order)
    else:
        bound = tc_upper_bound_fd(params, include_noise=spec.include_noise)
    row = {"n_tx": spec.n_tx, "n_rx": spec.n_rx,
           "strategy": spec.strategy.value, "omega": bound.omega,
           "lambda_solved": bound.lambda_solved,
           "op_lb_at_lambda": bound.op_lb_at_lambda, "tc_ub": bound.tc_ub,
           "zero_tc": int(bound.zero_tc), "converged": int(bound.converged),
           "convexity_warning": int(bound.convexity_warning)}
    return (0 if bound.converged else 3), [row]


def _bisect_reference(omega: float, order: float, target: float) -> float:
    """Plain interval-halving inversion, independent of the production solver."""
    from scipy.special import gammainc

    lo, hi = 0.0, 1.0 / (math.pi * omega)
    while gammainc(order, hi * math.pi * omega) < target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gammainc(order, mid * math.pi * omega) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _run_validate(spec: ExperimentSpec):
    rows = []
    failures = 0

    def check(name: str, value: float, limit: float, ok: bool):
        nonlocal failures
        failures += 0 if ok else 1
        rows.append({"check": name, "value": value, "limit": limit,
                     "ok": int(ok)})
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: value={value:.6g} "
              f"limit={limit:.6g}")

    # Interference-pair fading moment: the sampled estimate must match the
    # unhalved candidate and reject the halved one.
    est = moment_psi_power_oracle(4.0, max(spec.mc_samples, 200_000), spec.seed)
    full = gamma_fn(2.5)
    check("psi_power_moment_matches_full", abs(est - full) / full, 0.01,
          abs(est - full) / full <= 0.01)
    check("psi_power_moment_rejects_halved", abs(est - full / 2) / (full / 2),
          0.10, abs(est - full / 2) / (full / 2) > 0.10)

    # Density solver vs an independent bisection across a parameter grid.
    worst = 0.0
    for omega in (0.2, 1.0, 3.0):
        for l in (0, 2, 4, 6):
            for eps in (0.01, 0.1, 0.3):
                sol = newton_raphson_density(omega, l, eps)
                ref = _bisect_reference(omega, l / 2 + 1, eps)
                worst = max(worst, abs(sol.density - ref) / ref)
    check("density_solver_vs_bisection_rel", worst, 1e-6, worst <= 1e-6)

    # Sampled nearest-pair distances against the closed-form distance law.
    from scipy.stats import kstest

    from .geometry import nth_nearest_distance_cdf

    density = 0.1
    deploy = DeploymentParams(density=density, pair_distance=1.0,
                              mean_pairs=200.0)
    rng = np.random.default_rng(spec.seed)
    n_samp = 10_000
    hits = np.empty((n_samp, 3))
    for s in range(n_samp):
        net = sample_network(deploy, rng)
        hits[s] = net.distances[1:4]
    for n in (1, 2, 3):
        stat = kstest(hits[:, n - 1],
                      lambda r, n=n: nth_nearest_distance_cdf(density, n, r)
                      ).statistic
        check(f"nearest_distance_ks_n{n}", float(stat), 0.02, stat <= 0.02)

    return (0 if failures == 0 else 2), rows


_RUNNERS = {
    "op_vs_antennas": _run_op_vs_antennas,
    "tc_vs_antennas": _run_tc_vs_antennas,
    "strategy_comparison": _run_strategy_comparison,
    "fd_vs_hd_snr": _run_fd_vs_hd_snr,
    "single_point": _run_single_point,
    "validate": _run_validate,
}


def _format_value(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_output(spec: ExperimentSpec, rows: list[dict]) -> None:
    provenance = {"seed": spec.seed, "trials": spec.trials,
                  "version": f"fdtc-{__version__}"}
    if spec.fmt == "csv":
        lines = [f"# seed={spec.seed} trials={spec.trials} "
                 f"version=fdtc-{__version__}"]
        if rows:
            header = list(rows[0].keys())
            lines.append(",".join(header))
            for row in rows:
                lines.append(",".join(_format_value(row[k]) for k in header))
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps({"provenance": provenance, "rows": rows},
                          sort_keys=True, indent=2) + "\n"
    with open(spec.output_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def run_experiment(spec: ExperimentSpec) -> int:
    """Execute one experiment and write its output file; returns exit status."""
    runner = _RUNNERS.get(spec.experiment)
    if runner is None:
        raise UsageError(f"unknown experiment {spec.experiment!r}")
    status, rows = runner(spec)
    write_output(spec, rows)
    return status


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fdtc",
        description="Outage/transmission-capacity experiments for a "
                    "full-duplex MIMO ad-hoc network")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--out", default=None)
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--include-noise", action="store_true")
    parser.add_argument("--hd-literal-gamma-order", action="store_true")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        config_values = parse_config_file(args.config) if args.config else {}
        spec = build_spec(args.experiment, config_values, args)
        return run_experiment(spec)
    except (UsageError, OSError, ValueError) as err:
        print(f"fdtc: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
