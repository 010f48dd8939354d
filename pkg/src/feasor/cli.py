"""Command-line front end.

Subcommands::

    feasor solve-queens  --n 8 [--m 2] [--formulation 3] [--seed S] ...
    feasor bench-queens  --sizes 10,20 --formulations 3,4 --trials 20 ...
    feasor solve-moments --mu 0.5 --var 0.05 --algorithm cyclic-projections ...
    feasor demo-2d       --scenario lines --algorithm dr --x0 1,0 ...

Exit codes: 0 success, 1 solver failure, 2 configuration error, 3 I/O error.
The environment variable ``FEASOR_SEED`` overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__, algorithms, moments, queens
from .core import Status, StoppingPolicy, iterate
from .errors import ConfigError, FeasorError, ParamError
from .sets import Ball, Halfspace, Hyperplane

__all__ = ["RunConfig", "parse_config", "run", "main"]

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
COMMANDS = ("solve-queens", "bench-queens", "solve-moments", "demo-2d")
DEMO_ALGORITHMS = ("dr", "gdr", "raar", "cdr", "aamr", "cyclic-projections",
                   "averaged-projections")
DEMO_SCENARIOS = ("lines", "parallel", "axes", "ball-halfspace")


@dataclass
class RunConfig:
    command: str
    algorithm: str = "dr"
    alpha: Optional[float] = None
    beta: Optional[float] = None
    q: Optional[list] = None
    n: Optional[int] = None
    m: int = 2
    formulation: int = 3
    sizes: list = field(default_factory=list)
    formulations: list = field(default_factory=list)
    trials: int = 20
    jobs: int = 1
    seed: int = 0
    tol: float = 1e-10
    max_iters: int = 10**6
    time_limit_seconds: float = 300.0
    check_stride: int = 1
    omit_timing: bool = False
    a: float = 0.0
    b: float = 1.0
    mu: float = 0.5
    var: float = 0.05
    n_grid: int = 201
    x0: object = None
    snapshot_stride: int = 0
    scenario: str = "lines"
    iters: int = 40
    output: Optional[str] = None
    trace: Optional[str] = None
    format: str = "csv"


def _int_list(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _formulation_list(text):
    try:
        return [queens.parse_formulation(v) for v in text.split(",") if v.strip()]
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _float_list(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=10**6)
    p.add_argument("--time-limit", dest="time_limit_seconds", type=float,
                   default=300.0, help="seconds; 0 disables")
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _parser():
    parser = argparse.ArgumentParser(prog="feasor", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"feasor {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-queens", help="solve one (m,n)-queens instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--formulation", type=queens.parse_formulation, default=3)
    p.add_argument("--algorithm", choices=queens.ALGORITHMS, default="dr")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--check-stride", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("bench-queens", help="repeat queens solves over sizes and formulations")
    p.add_argument("--sizes", type=_int_list, required=True)
    p.add_argument("--formulations", type=_formulation_list, default=[1, 2, 3, 4])
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--algorithm", choices=queens.ALGORITHMS, default="dr")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--check-stride", type=int, default=1)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--omit-timing", action="store_true",
                   help="write 0 in the seconds column (byte-reproducible files)")
    _add_common(p)

    p = sub.add_parser("solve-moments", help="discretised non-negative moment problem")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--var", type=float, default=0.05)
    p.add_argument("--n-grid", type=int, default=201)
    p.add_argument("--algorithm", choices=moments.MOMENT_ALGORITHMS,
                   default="cyclic-projections")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--x0", choices=("one", "step"), default="one")
    p.add_argument("--snapshot-stride", type=int, default=0)
    p.add_argument("--trace", help="also write the k,residual trace here")
    _add_common(p)

    p = sub.add_parser("demo-2d", help="iterate a 2-D example and emit the trace")
    p.add_argument("--scenario", choices=DEMO_SCENARIOS, default="lines")
    p.add_argument("--algorithm", choices=DEMO_ALGORITHMS, default="dr")
    p.add_argument("--x0", type=_float_list, default=[1.0, 0.0])
    p.add_argument("--iters", type=int, default=40)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--q", type=_float_list)
    _add_common(p)
    return parser


def _default_params(cfg: RunConfig):
    alg = cfg.algorithm
    if cfg.command == "solve-moments":
        cfg.alpha = 0.95 if cfg.alpha is None else cfg.alpha
        cfg.beta = 0.95 if cfg.beta is None else cfg.beta
        return
    if alg == "gdr":
        cfg.alpha = 0.8 if cfg.alpha is None else cfg.alpha
    elif alg == "raar":
        cfg.beta = 0.4 if cfg.beta is None else cfg.beta
    elif alg == "aamr":
        cfg.alpha = 0.5 if cfg.alpha is None else cfg.alpha
        cfg.beta = 0.8 if cfg.beta is None else cfg.beta


def _validate(cfg: RunConfig):
    def need(cond, flag, msg):
        if not cond:
            raise ConfigError(f"{flag}: {msg}")

    need(cfg.tol > 0, "--tol", "must be > 0")
    need(cfg.max_iters >= 1, "--max-iters", "must be >= 1")
    need(cfg.time_limit_seconds >= 0, "--time-limit", "must be >= 0")
    alg = cfg.algorithm
    if cfg.alpha is not None:
        closed = alg in ("aamr", "product-aamr")
        ok = 0 < cfg.alpha <= 1 if closed else 0 < cfg.alpha < 1
        need(ok, "--alpha", "must lie in ]0,1]" if closed else "must lie in ]0,1[")
    if cfg.beta is not None:
        need(0 < cfg.beta < 1, "--beta", "must lie in ]0,1[")
    if cfg.command in ("solve-queens", "bench-queens"):
        need(cfg.check_stride >= 1, "--check-stride", "must be >= 1")
        sizes = [cfg.n] if cfg.command == "solve-queens" else cfg.sizes
        for n in sizes:
            need(n >= 3, "--n" if cfg.command == "solve-queens" else "--sizes",
                 "board size must be >= 3")
            need(1 <= cfg.m <= n, "--m", "need 1 <= m <= n")
    if cfg.command == "bench-queens":
        need(cfg.trials >= 1, "--trials", "must be >= 1")
        need(cfg.jobs >= 1, "--jobs", "must be >= 1")
        need(len(cfg.formulations) > 0, "--formulations", "empty list")
    if cfg.command == "solve-moments":
        need(cfg.a < cfg.b, "--a/--b", "need a < b")
        need(cfg.var > 0, "--var", "must be > 0")
        need(cfg.n_grid >= 3, "--n-grid", "must be >= 3")
        need(cfg.snapshot_stride >= 0, "--snapshot-stride", "must be >= 0")
    if cfg.command == "demo-2d":
        need(len(cfg.x0) == 2, "--x0", "needs two coordinates")
        need(cfg.iters >= 1, "--iters", "must be >= 1")
        need(cfg.q is None or len(cfg.q) == 2, "--q", "needs two coordinates")
        need(all(np.isfinite(cfg.x0)), "--x0", "must be finite")


def parse_config(argv=None) -> RunConfig:
    """Parse and validate; invalid input exits with status 2 and a message."""
    parser = _parser()
    ns = parser.parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(ns).items()
                       if k in RunConfig.__dataclass_fields__})
    env_seed = os.environ.get("FEASOR_SEED")
    if env_seed:
        try:
            cfg.seed = int(env_seed)
        except ValueError:
            parser.error(f"FEASOR_SEED must be an integer, got {env_seed!r}")
    _default_params(cfg)
    try:
        _validate(cfg)
    except ConfigError as exc:
        parser.error(str(exc))
    return cfg


# Output helpers ------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _render(header, rows, fmt, meta):
    if fmt == "json":
        doc = {"meta": meta,
               "rows": [dict(zip(header, (_jsonable(v) for v in r))) for r in rows]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _meta(cfg):
    conf = {k: v for k, v in asdict(cfg).items() if k not in ("output", "trace")}
    return {"command": cfg.command, "config": conf, "version": __version__}


def _policy(cfg, **kw):
    return StoppingPolicy(step_tol=cfg.tol, max_iters=cfg.max_iters,
                          time_limit=cfg.time_limit_seconds, **kw)


def trace_rows(report, with_coords=True):
    """Rows ``k, residual[, coords]``; row 0 is the start point with no residual."""
    rows = []
    for k, x in report.trace:
        res = "" if k == 0 else float(report.residuals[k - 1])
        rows.append([k, res] + (list(map(float, x)) if with_coords else []))
    return rows


def _residual_rows(report):
    return [[k + 1, float(r)] for k, r in enumerate(report.residuals)]


# Commands ------------------------------------------------------------------

def _solve_queens(cfg):
    inst = queens.QueensInstance(cfg.n, cfg.m, cfg.formulation)
    pol = _policy(cfg, check_stride=cfg.check_stride)
    res = queens.solve_queens(inst, cfg.seed, pol, cfg.algorithm,
                              cfg.alpha if cfg.alpha is not None else 0.5,
                              cfg.beta if cfg.beta is not None else 0.5)
    rep = res.report
    print(f"status={rep.status} iterations={rep.iterations} seconds={rep.seconds:.3f}")
    if res.solved:
        print(queens.board_to_text(res.board))
    if cfg.output:
        meta = _meta(cfg)
        meta["status"] = str(rep.status)
        if res.solved:
            meta["board"] = queens.board_to_text(res.board).split("\n")
        _write(cfg.output, _render(["k", "residual"], _residual_rows(rep),
                                   cfg.format, meta))
    return EXIT_OK if res.solved else EXIT_FAILURE


def _bench_queens(cfg):
    pol = _policy(cfg, check_stride=cfg.check_stride)
    rows = queens.run_benchmark(cfg.sizes, cfg.formulations, cfg.trials, pol,
                                m=cfg.m, base_seed=cfg.seed, jobs=cfg.jobs,
                                algorithm=cfg.algorithm,
                                alpha=cfg.alpha if cfg.alpha is not None else 0.5,
                                beta=cfg.beta if cfg.beta is not None else 0.5)
    if cfg.omit_timing:
        rows = [queens.BenchRow(*r.as_tuple()[:-1], 0.0) for r in rows]
    for s in queens.aggregate(rows):
        it = "-" if s.mean_iterations is None else f"{s.mean_iterations:.1f}"
        sec = "-" if s.mean_seconds is None else f"{s.mean_seconds:.3f}"
        print(f"n={s.n} formulation={s.formulation} solved={s.solved}/{s.trials} "
              f"mean_iterations={it} mean_seconds={sec}")
    if cfg.output:
        _write(cfg.output, _render(queens.BENCH_HEADER, [r.as_tuple() for r in rows],
                                   cfg.format, _meta(cfg)))
    return EXIT_OK


def _snapshot_path(base, k):
    root, ext = os.path.splitext(base)
    return f"{root}_k{k}{ext or '.csv'}"


def _solve_moments(cfg):
    prob = moments.MomentProblem(cfg.a, cfg.b, cfg.mu, cfg.var, cfg.n_grid)
    pol = _policy(cfg, trace_stride=cfg.snapshot_stride)
    rep = moments.solve_moments(prob, cfg.algorithm, cfg.alpha, cfg.beta, cfg.x0, pol)
    res = np.abs(prob.moment_residuals(rep.shadow)).max()
    print(f"status={rep.status} iterations={rep.iterations} seconds={rep.seconds:.3f} "
          f"moment_residual={res:.3e} min_density={rep.shadow.min():.3e}")
    t = prob.grid
    meta = _meta(cfg)
    meta["status"] = str(rep.status)
    if cfg.output:
        _write(cfg.output, _render(["t", "value"], list(zip(t, rep.shadow)),
                                   cfg.format, meta))
        for k, x in rep.trace:
            dens = moments.density_of(prob, cfg.algorithm, x, cfg.alpha, cfg.beta)
            _write(_snapshot_path(cfg.output, k),
                   _render(["t", "value"], list(zip(t, dens)), cfg.format, meta))
    if cfg.trace:
        _write(cfg.trace, _render(["k", "residual"], _residual_rows(rep), cfg.format, meta))
    return EXIT_OK if rep.status is Status.CONVERGED else EXIT_FAILURE


def demo_sets(scenario):
    if scenario == "lines":      # y = 0 and y = x
        return Hyperplane([0, 1], 0, name="y=0"), Hyperplane([1, -1], 0, name="y=x")
    if scenario == "parallel":   # y = 0 and y = 1
        return Hyperplane([0, 1], 0, name="y=0"), Hyperplane([0, 1], 1, name="y=1")
    if scenario == "axes":
        return Hyperplane([0, 1], 0, name="x-axis"), Hyperplane([1, 0], 0, name="y-axis")
    if scenario == "ball-halfspace":
        return Ball(1.0, 2), Halfspace([-1, 0], -0.5, name="x>=0.5")
    raise ConfigError(f"unknown scenario {scenario!r}")


def demo_operator(cfg):
    A, B = demo_sets(cfg.scenario)
    alg = cfg.algorithm
    if alg == "dr":
        return algorithms.douglas_rachford(A, B)
    if alg == "gdr":
        return algorithms.generalized_dr(A, B, cfg.alpha)
    if alg == "raar":
        return algorithms.raar(A, B, cfg.beta)
    if alg == "cdr":
        return algorithms.circumcentered_dr(A, B)
    if alg == "aamr":
        return algorithms.aamr(A, B, cfg.alpha, cfg.beta, cfg.q)
    if alg == "cyclic-projections":
        return algorithms.cyclic_projections([A, B])
    if alg == "averaged-projections":
        return algorithms.averaged_projections([A, B])
    raise ConfigError(f"unknown algorithm {alg!r}")


def _demo_2d(cfg):
    op = demo_operator(cfg)
    pol = StoppingPolicy(step_tol=cfg.tol, max_iters=cfg.iters,
                         time_limit=cfg.time_limit_seconds, trace_stride=1)
    rep = iterate(op, cfg.x0, pol)
    print(f"status={rep.status} iterations={rep.iterations} "
          f"final={rep.final_iterate.tolist()}")
    if cfg.output:
        meta = _meta(cfg)
        meta["operator"] = op.label
        _write(cfg.output, _render(["k", "residual", "coord_0", "coord_1"],
                                   trace_rows(rep), cfg.format, meta))
    return EXIT_OK


_HANDLERS = {"solve-queens": _solve_queens, "bench-queens": _bench_queens,
             "solve-moments": _solve_moments, "demo-2d": _demo_2d}


def run(cfg: RunConfig) -> int:
    try:
        return _HANDLERS[cfg.command](cfg)
    except (ConfigError, ParamError) as exc:
        print(f"feasor: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"feasor: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FeasorError as exc:
        print(f"feasor: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main(argv=None) -> int:
    return run(parse_config(argv))


if __name__ == "__main__":
    sys.exit(main())
