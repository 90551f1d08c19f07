"""Batch command line: spectrum, simulate, sup-scan, phase-sweep, static, verify.

Primary artifacts go to ``--out`` (stdout when omitted); secondary ones are
written next to it with a different suffix.  A JSON ``--config`` file may
supply any flag by its long name; flags on the command line win.

Exit codes: 0 success, 1 domain or configuration error, 2 numerical
stability error.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .chain import ChainParams, Convention, as_convention, exact_displacements, exact_velocities, mode_frequencies
from .errors import DomainError, StabilityError
from .extremal import DEFAULT_HORIZON_PERIODS, pow2_l_rule, theorem_ratio_scan
from .integrator import SystemSpec, _stride_for, sampled_trajectory, spectral_vs_ode_error
from .io import DEFAULT_PRECISION, csv_text, emit, json_text, sibling
from .phase import ESTIMATORS, ScalingFamily, phase_sweep, static_analysis
from .potentials import mie_from_curvature
from .verify import SUITES, run_suite

EXIT_OK, EXIT_DOMAIN, EXIT_STABILITY = 0, 1, 2
ODE_TOLERANCE = 1e-5

EXTREMAL_HEADER = [
    "N", "k", "l", "epsilon", "sigma", "sup_lower", "sup_upper", "inf_lower", "inf_upper",
    "F_N_l", "ratio_sup", "ratio_inf", "horizon",
]
PHASE_HEADER = ["N", "sigma", "r", "slope_estimate", "classification"]
TRAJECTORY_HEADER = ["t", "site", "z", "v"]

GLOBAL_KEYS = ("command", "convention", "out", "precision", "workers")


@dataclass
class RunConfig:
    """Fully resolved invocation: global flags plus command parameters."""

    command: str
    convention: str = Convention.CORRECTED.value
    out: Optional[str] = None
    precision: int = DEFAULT_PRECISION
    workers: int = 1
    params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        d = {k: v for k, v in vars(ns).items() if k not in ("config", "handler")}
        glob = {k: d.pop(k) for k in GLOBAL_KEYS}
        return cls(params=d, **glob)


# --- argument parsing -------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; that code means instability here
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--convention", choices=[c.value for c in Convention], default=Convention.CORRECTED.value)
    g.add_argument("--out", default=None, help="output path ('-' or omitted: stdout)")
    g.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="significant digits in CSV")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--config", default=None, help="JSON file of flag values (flags override)")

    p = _Parser(prog="harmchain", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("spectrum", parents=[common], help="mode frequencies omega_m")
    s.add_argument("--n-particles", type=int, default=None)
    s.add_argument("--omega0", type=float, default=1.0)
    s.set_defaults(handler=cmd_spectrum)

    s = sub.add_parser("simulate", parents=[common], help="trajectory from the spectral solution and/or the ODE")
    s.add_argument("--n-particles", type=int, default=None)
    s.add_argument("--omega0", type=float, default=1.0)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--mode", choices=["spectral", "ode", "both"], default="both")
    s.add_argument("--duration", type=float, default=100.0, help="T in units of 1/omega0")
    s.add_argument("--dt", type=float, default=1e-3, help="step in units of 1/omega0")
    s.add_argument("--samples", type=int, default=200, help="approximate number of dumped time slices")
    s.add_argument("--layout", choices=["long", "wide"], default="long", help="long: t,site,z,v; wide: t,x_0..x_{N-1}")
    s.set_defaults(handler=cmd_simulate)

    s = sub.add_parser("sup-scan", parents=[common], help="sup/inf sandwich of the extension deviation")
    s.add_argument("--ladder", type=_int_list, default=[64, 128, 256, 512])
    s.add_argument("--n-particles", type=int, default=None, help="single N (overrides --ladder)")
    s.add_argument("--l-values", type=_int_list, default=None, help="window lengths (default 1,2,4,...,N/4)")
    s.add_argument("--epsilon", type=float, default=0.25)
    s.add_argument("--horizon-periods", type=float, default=DEFAULT_HORIZON_PERIODS)
    s.add_argument("--omega0", type=float, default=1.0)
    s.add_argument("--sigma", type=float, default=1.0)
    s.set_defaults(handler=cmd_sup_scan)

    s = sub.add_parser("phase-sweep", parents=[common], help="classify sigma(N) = c N^-alpha (ln N)^-beta")
    s.add_argument("--ladder", type=_int_list, default=[64, 128, 256, 512])
    s.add_argument("--amplitude", type=float, default=0.01, help="c")
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=0.0)
    s.add_argument("--window-length", type=int, default=1)
    s.add_argument("--epsilon", type=float, default=0.25)
    s.add_argument("--horizon-periods", type=float, default=DEFAULT_HORIZON_PERIODS)
    s.add_argument("--estimator", choices=list(ESTIMATORS), default="torus")
    s.set_defaults(handler=cmd_phase_sweep)

    s = sub.add_parser("static", parents=[common], help="Mie fixed points and the critical force")
    s.add_argument("--n-exp", type=float, default=6.0)
    s.add_argument("--m-exp", type=float, default=12.0)
    s.add_argument("--kappa", type=float, default=1.0)
    s.add_argument("--n-particles", type=int, default=20)
    s.add_argument("--forces", type=_float_list, default=None, help="explicit forces")
    s.add_argument("--grid-points", type=int, default=11, help="forces evenly on [0, 2 kappa C / N]")
    s.set_defaults(handler=cmd_static)

    s = sub.add_parser("verify", parents=[common], help="run an invariant suite (TAP output)")
    s.add_argument("suite", nargs="?", default="full", help=f"one of {sorted(SUITES)}")
    s.set_defaults(handler=cmd_verify)
    return p


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise DomainError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse(argv=None) -> argparse.Namespace:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.config is None:
        return ns
    cfg = _load_config(ns.config)
    cfg.pop("command", None)
    params = cfg.pop("params", {}) or {}
    cfg.update({k.replace("-", "_"): v for k, v in params.items()})
    sub = parser._subparsers._group_actions[0].choices[ns.command]
    known = {a.dest for a in sub._actions}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise DomainError(f"unknown config keys for {ns.command}: {unknown}")
    sub.set_defaults(**cfg)
    return parser.parse_args(argv)


@contextmanager
def _mapper(workers: int):
    if workers is None or workers <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield pool.map


# --- commands ----------------------------------------------------------------


def _n_particles(cfg: RunConfig) -> int:
    N = cfg.params.get("n_particles")
    if N is None:
        raise DomainError(f"{cfg.command} needs --n-particles")
    return int(N)


def cmd_spectrum(cfg: RunConfig) -> int:
    N = _n_particles(cfg)
    if N < 2:
        raise DomainError("spectrum needs N >= 2")
    w = mode_frequencies(N, cfg.params["omega0"], cfg.convention)
    rows = [(m, float(x)) for m, x in enumerate(w, 1)]
    emit(csv_text(["m", "omega_m"], rows, cfg.precision), cfg.out)
    return EXIT_OK


def _trajectory_text(times, x, v, a: float, layout: str, precision: int) -> str:
    N = x.shape[1]
    if layout == "wide":
        rows = [[float(t), *map(float, x[i])] for i, t in enumerate(times)]
        return csv_text(["t"] + [f"x_{n}" for n in range(N)], rows, precision)
    rows = [
        [float(t), n, n * a + float(x[i, n]), float(v[i, n])]
        for i, t in enumerate(times)
        for n in range(N)
    ]
    return csv_text(TRAJECTORY_HEADER, rows, precision)


def cmd_simulate(cfg: RunConfig) -> int:
    q = cfg.params
    N, mode, T, dt = _n_particles(cfg), q["mode"], q["duration"], q["dt"]
    if T < 0 or not dt > 0 or q["samples"] < 1:
        raise DomainError("need duration >= 0, dt > 0 and samples >= 1")
    params = ChainParams.from_sigma(N, q["sigma"], q["omega0"])
    T_phys, dt_phys = T / params.omega0, dt / params.omega0
    stride = _stride_for(T_phys, dt_phys, q["samples"]) if T > 0 else 1
    times, z, v_ode = sampled_trajectory(SystemSpec.harmonic(params), T_phys, dt_phys, stride)
    x_ode = z - (np.arange(N) * params.a)[None, :]
    x_spec = exact_displacements(params, times, cfg.convention).reshape(times.size, N)
    v_spec = exact_velocities(params, times, cfg.convention).reshape(times.size, N)

    layout = q["layout"]
    if mode == "ode":
        emit(_trajectory_text(times, x_ode, v_ode, params.a, layout, cfg.precision), cfg.out)
    else:
        emit(_trajectory_text(times, x_spec, v_spec, params.a, layout, cfg.precision), cfg.out)
        ode_path = sibling(cfg.out, ".ode.csv")
        if mode == "both" and ode_path is not None:
            emit(_trajectory_text(times, x_ode, v_ode, params.a, layout, cfg.precision), ode_path)

    summary = {
        "N": N, "omega0": params.omega0, "sigma": params.sigma, "convention": cfg.convention,
        "mode": mode, "T": T_phys, "dt": dt_phys, "samples": int(times.size),
    }
    if mode == "both":
        if params.sigma == 0 or T == 0:
            err = float(np.max(np.abs(x_spec - x_ode)))
        else:
            err = spectral_vs_ode_error(params, T_phys, dt_phys, cfg.convention)
        summary.update(error=err, tolerance=ODE_TOLERANCE, mismatch=bool(err > ODE_TOLERANCE))
    text = json_text(summary)
    target = sibling(cfg.out, ".json")
    if target is None:
        sys.stderr.write(text)
    else:
        emit(text, target)
    return EXIT_OK


def cmd_sup_scan(cfg: RunConfig) -> int:
    q = cfg.params
    ladder = [q["n_particles"]] if q.get("n_particles") else list(q["ladder"])
    l_rule = q["l_values"] if q.get("l_values") else pow2_l_rule
    for N in ladder:
        if not (q.get("l_values") or pow2_l_rule(N)):
            raise DomainError(f"no default window lengths for N={N}; pass --l-values")
    with _mapper(cfg.workers) as mapper:
        scan = theorem_ratio_scan(
            sorted(ladder), l_rule, q["epsilon"], q["horizon_periods"], cfg.convention,
            omega0=q["omega0"], sigma=q["sigma"], mapper=mapper,
        )
    reports = sorted(scan.reports, key=lambda r: (r.N, r.window.k, r.window.l))
    rows = [
        [r.N, r.window.k, r.window.l, scan.epsilon, r.sigma, r.sup_lower, r.sup_upper, r.inf_lower, r.inf_upper,
         r.F, r.ratio_sup, r.ratio_inf, r.horizon]
        for r in reports
    ]
    emit(csv_text(EXTREMAL_HEADER, rows, cfg.precision), cfg.out)
    target = sibling(cfg.out, ".json")
    if target is not None:
        emit(json_text({"c1": scan.c1, "c2": scan.c2, "c3": scan.c3, "c4": scan.c4,
                        "sup_spread": scan.sup_spread, "inf_spread": scan.inf_spread}), target)
    return EXIT_OK


def cmd_phase_sweep(cfg: RunConfig) -> int:
    q = cfg.params
    family = ScalingFamily(q["amplitude"], q["alpha"], q["beta"])
    with _mapper(cfg.workers) as mapper:
        verdict = phase_sweep(
            family, q["ladder"], q["window_length"], q["epsilon"], q["horizon_periods"],
            conv=cfg.convention, estimator=q["estimator"], mapper=mapper,
        )
    emit(json_text(verdict.as_dict()), cfg.out)
    target = sibling(cfg.out, ".csv")
    if target is not None:
        rows = [[N, family.sigma(N), r, verdict.slope, verdict.classification] for N, r in zip(verdict.ladder, verdict.r)]
        emit(csv_text(PHASE_HEADER, rows, cfg.precision), target)
    return EXIT_OK


def cmd_static(cfg: RunConfig) -> int:
    q = cfg.params
    N, kappa = q["n_particles"], q["kappa"]
    if q.get("forces") is not None:
        forces = list(q["forces"])
    else:
        pot = mie_from_curvature(kappa, N, q["n_exp"], q["m_exp"])
        f_star = kappa * pot.C / N
        forces = [float(f) for f in np.linspace(0.0, 2.0 * f_star, q["grid_points"])]
    result = static_analysis(q["n_exp"], q["m_exp"], kappa, N, forces)
    emit(json_text(result), cfg.out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    suite = cfg.params["suite"]
    if suite == "full" and cfg.convention == Convention.PAPER_LITERAL.value:
        suite = "paper-literal"
    if suite not in SUITES:
        raise DomainError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    lines: list[str] = []

    def report(line: str) -> None:
        lines.append(line)
        if cfg.out is None:
            print(line, flush=True)

    ok = run_suite(suite, report)
    if cfg.out is not None:
        emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK if ok else EXIT_DOMAIN


def main(argv=None) -> int:
    try:
        try:
            ns = parse(argv)
        except SystemExit as exc:  # --help, --version, usage errors
            return int(exc.code or 0)
        cfg = RunConfig.from_namespace(ns)
        as_convention(cfg.convention)
        if cfg.precision < 1 or cfg.workers < 1:
            raise DomainError("precision and workers must be >= 1")
        return ns.handler(cfg)
    except StabilityError as exc:
        print(f"harmchain: stability error: {exc}", file=sys.stderr)
        return EXIT_STABILITY
    except (DomainError, ValueError) as exc:
        print(f"harmchain: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
