"""The (m, n)-queens problem as a feasibility problem.

Boards are flattened row-major: entry ``(i, j)`` sits at ``i * n + j``.
The four constraint families are

* rows: every row sums to ``m``;
* columns: every column sums to ``m``;
* forward diagonals (``j - i`` constant) of length at least ``m + 1`` sum
  to at most ``m``;
* backward diagonals (``i + j`` constant) likewise.

A *hatted* family additionally forces the whole board to be 0/1.  Ties in
the binary projections go to the later position of a segment: the larger
column index in a row, the larger row index in a column, the larger row
index along a forward diagonal and the larger column index along a
backward diagonal.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import algorithms
from .core import SolveReport, Status, StoppingPolicy, iterate
from .errors import ConfigError
from .sets import BinaryBox, SegmentedSumSet

__all__ = [
    "FORMULATIONS", "QueensInstance", "BenchRow", "QueensResult",
    "row_segments", "column_segments", "forward_diagonals",
    "backward_diagonals", "build_constraints", "verify_solution",
    "random_start", "solve_queens", "reproduce_fixed_point_pathologies",
    "trial_seed", "run_benchmark", "aggregate", "board_to_text",
    "queens_policy",
]

FORMULATIONS = (1, 2, 3, 4)
ALGORITHMS = ("dr", "gdr", "aamr")


def parse_formulation(tag) -> int:
    s = str(tag).strip().upper()
    if s.startswith("F"):
        s = s[1:]
    try:
        f = int(s)
    except ValueError:
        raise ConfigError(f"unknown formulation {tag!r}") from None
    if f not in FORMULATIONS:
        raise ConfigError(f"unknown formulation {tag!r}; expected 1-4")
    return f


@dataclass(frozen=True)
class QueensInstance:
    n: int
    m: int = 2
    formulation: int = 3

    def __post_init__(self):
        if int(self.n) < 3:
            raise ConfigError("board size n must be >= 3")
        if not 1 <= int(self.m) <= int(self.n):
            raise ConfigError("need 1 <= m <= n")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "formulation", parse_formulation(self.formulation))

    @property
    def dim(self) -> int:
        return self.n * self.n

    @property
    def n_sets(self) -> int:
        return 5 if self.formulation == 1 else 4


def row_segments(n: int):
    return [list(range(i * n, (i + 1) * n)) for i in range(n)]


def column_segments(n: int):
    return [list(range(j, n * n, n)) for j in range(n)]


def forward_diagonals(n: int, min_length: int = 1):
    """Diagonals with ``j - i = d``, listed by increasing row."""
    out = []
    for d in range(-(n - 1), n):
        cells = [i * n + (i + d) for i in range(n) if 0 <= i + d < n]
        if len(cells) >= min_length:
            out.append(cells)
    return out


def backward_diagonals(n: int, min_length: int = 1):
    """Anti-diagonals with ``i + j = s``, listed by increasing column."""
    out = []
    for s in range(2 * n - 1):
        cells = [(s - j) * n + j for j in range(n) if 0 <= s - j < n]
        if len(cells) >= min_length:
            out.append(cells)
    return out


def _family(inst: QueensInstance, which: int, hatted: bool):
    n, m = inst.n, inst.m
    hat = "^" if hatted else ""
    if which == 1:
        return SegmentedSumSet(n * n, row_segments(n), m, False, hatted, f"C1{hat}(rows)")
    if which == 2:
        return SegmentedSumSet(n * n, column_segments(n), m, False, hatted, f"C2{hat}(cols)")
    diags = forward_diagonals if which == 3 else backward_diagonals
    label = "fdiag" if which == 3 else "bdiag"
    # short diagonals cannot exceed m once binary, but in the hatted set
    # their entries must still be rounded to 0/1
    segs = diags(n, 1 if hatted else m + 1)
    return SegmentedSumSet(n * n, segs, m, True, hatted, f"C{which}{hat}({label})")


def build_constraints(inst: QueensInstance):
    """Constraint sets of the chosen formulation, in the order C1..C4[, box]."""
    f = inst.formulation
    if f == 1:
        sets = [_family(inst, k, False) for k in (1, 2, 3, 4)]
        sets.append(BinaryBox(inst.dim))
        return sets
    hatted = {2: (False, False, True, True),
              3: (True, True, False, False),
              4: (True, True, True, True)}[f]
    return [_family(inst, k, h) for k, h in zip((1, 2, 3, 4), hatted)]


def _board(inst, B) -> np.ndarray:
    B = np.asarray(B, dtype=np.float64)
    if B.size != inst.dim:
        raise ConfigError(f"board has {B.size} entries, expected {inst.dim}")
    return B.reshape(inst.n, inst.n)


def verify_solution(inst: QueensInstance, B) -> bool:
    """True iff ``B`` is a 0/1 board solving the (m, n)-queens problem."""
    X = _board(inst, B)
    if not np.all((X == 0) | (X == 1)):
        return False
    m = inst.m
    if np.any(X.sum(axis=1) != m) or np.any(X.sum(axis=0) != m):
        return False
    n = inst.n
    for d in range(-(n - 1), n):
        if np.trace(X, offset=d) > m or np.trace(X[:, ::-1], offset=d) > m:
            return False
    return True


def random_start(inst: QueensInstance, seed, r: Optional[int] = None) -> np.ndarray:
    """Random 0/1 board (i.i.d. fair bits), replicated over the product blocks."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=inst.dim).astype(np.float64)
    return algorithms.lift(y, inst.n_sets if r is None else r)


def queens_policy(time_limit: float = 300.0, **kw) -> StoppingPolicy:
    kw.setdefault("max_iters", 10**9)
    return StoppingPolicy(time_limit=time_limit, **kw)


def make_operator(inst: QueensInstance, algorithm: str = "dr",
                  alpha: float = 0.5, beta: float = 0.5):
    sets = build_constraints(inst)
    if algorithm == "dr":
        return algorithms.product_dr(sets, inst.dim)
    if algorithm == "gdr":
        return algorithms.product_gdr(sets, alpha, inst.dim)
    if algorithm == "aamr":
        return algorithms.product_aamr(sets, alpha, beta, None, inst.dim)
    raise ConfigError(f"unknown queens algorithm {algorithm!r}; expected {ALGORITHMS}")


@dataclass
class QueensResult:
    report: SolveReport
    board: Optional[np.ndarray] = None

    @property
    def solved(self) -> bool:
        return self.board is not None


def solve_queens(inst: QueensInstance, seed, policy: Optional[StoppingPolicy] = None,
                 algorithm: str = "dr", alpha: float = 0.5,
                 beta: float = 0.5) -> QueensResult:
    """Product-space DR (or GDR/AAMR) from a random 0/1 start.

    The shadow is rounded with the binary-box projector and checked every
    ``policy.check_stride`` iterations; a verified board stops the run.
    """
    policy = policy or queens_policy()
    op = make_operator(inst, algorithm, alpha, beta)
    box = BinaryBox(inst.dim)

    def is_solution(p):
        return verify_solution(inst, box._project(p))

    report = iterate(op, random_start(inst, seed), policy, solution_test=is_solution)
    board = None
    if report.status is Status.SOLUTION_FOUND:
        board = box._project(report.shadow).reshape(inst.n, inst.n).astype(np.int8)
    return QueensResult(report, board)


def board_to_text(board) -> str:
    B = np.asarray(board).astype(int)
    return "\n".join("".join(str(v) for v in row) for row in B)


# Fixed points that are not solutions --------------------------------------

X0_PATHOLOGY = np.array([[0, 1, 0], [1, 1, 1], [1, 0, 1]], dtype=np.float64)
Y0_PATHOLOGY = np.array([[0, 1, 1], [1, 1, 0], [0, 1, 1]], dtype=np.float64)


def reproduce_fixed_point_pathologies() -> dict:
    """Check the two classic non-solution fixed points on the (2, 3) board.

    ``X0`` is fixed by the composition of the formulation-3 projections and
    ``Y0`` by one step of both cyclic DR and cyclically anchored DR on the
    same sets, yet neither board is a solution.
    """
    inst = QueensInstance(3, 2, 3)
    sets = build_constraints(inst)
    x0, y0 = X0_PATHOLOGY.ravel(), Y0_PATHOLOGY.ravel()
    chain = [x0]
    for s in sets:
        chain.append(s.project(chain[-1]))
    cp = algorithms.cyclic_projections(sets)(x0)
    cyc = algorithms.cyclic_dr(sets)(y0)
    anch = algorithms.anchored_dr(sets[0], sets[1:])(y0)
    return {
        "projection_chain": [c.reshape(3, 3) for c in chain],
        "X0_fixed_by_cyclic_projections": bool(np.array_equal(cp, x0)),
        "Y0_fixed_by_cyclic_dr": bool(np.array_equal(cyc, y0)),
        "Y0_fixed_by_anchored_dr": bool(np.array_equal(anch, y0)),
        "X0_is_solution": verify_solution(inst, x0),
        "Y0_is_solution": verify_solution(inst, y0),
    }


# Benchmark harness ---------------------------------------------------------

BENCH_HEADER = ("n", "formulation", "trial", "seed", "solved", "iterations", "seconds")


@dataclass(frozen=True)
class BenchRow:
    n: int
    formulation: int
    trial: int
    seed: int
    solved: bool
    iterations: int
    seconds: float

    def as_tuple(self):
        return (self.n, self.formulation, self.trial, self.seed, self.solved,
                self.iterations, self.seconds)


def trial_seed(n: int, formulation: int, trial: int, base_seed: int = 0) -> int:
    """Deterministic per-trial seed derived from ``(base_seed, n, formulation, trial)``."""
    ss = np.random.SeedSequence([int(base_seed), int(n), int(formulation), int(trial)])
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class _Job:
    n: int
    m: int
    formulation: int
    trial: int
    seed: int
    policy: StoppingPolicy
    algorithm: str
    alpha: float
    beta: float


def _run_job(job: _Job) -> BenchRow:
    inst = QueensInstance(job.n, job.m, job.formulation)
    t0 = time.perf_counter()
    res = solve_queens(inst, job.seed, job.policy, job.algorithm, job.alpha, job.beta)
    seconds = time.perf_counter() - t0
    return BenchRow(job.n, job.formulation, job.trial, job.seed, res.solved,
                    res.report.iterations, seconds)


def run_benchmark(sizes: Iterable[int], formulations: Iterable, trials: int,
                  policy: Optional[StoppingPolicy] = None, m: int = 2,
                  base_seed: int = 0, jobs: int = 1, algorithm: str = "dr",
                  alpha: float = 0.5, beta: float = 0.5) -> list:
    """Run every ``(n, formulation, trial)`` once; rows come back sorted by that key."""
    if int(trials) < 1:
        raise ConfigError("trials must be >= 1")
    policy = policy or queens_policy()
    forms = [parse_formulation(f) for f in formulations]
    work = [_Job(int(n), m, f, t, trial_seed(n, f, t, base_seed), policy,
                 algorithm, alpha, beta)
            for n in sizes for f in forms for t in range(int(trials))]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=int(jobs)) as pool:
            rows = list(pool.map(_run_job, work))
    else:
        rows = [_run_job(j) for j in work]
    return sorted(rows, key=lambda r: (r.n, r.formulation, r.trial))


@dataclass
class Summary:
    n: int
    formulation: int
    trials: int
    solved: int
    mean_iterations: Optional[float] = None
    mean_seconds: Optional[float] = None
    failures: list = field(default_factory=list)


def aggregate(rows) -> list:
    """Per ``(n, formulation)``: solved count and means over solved trials only."""
    groups = {}
    for r in rows:
        groups.setdefault((r.n, r.formulation), []).append(r)
    out = []
    for (n, f), rs in sorted(groups.items()):
        ok = [r for r in rs if r.solved]
        out.append(Summary(
            n, f, len(rs), len(ok),
            float(np.mean([r.iterations for r in ok])) if ok else None,
            float(np.mean([r.seconds for r in ok])) if ok else None,
            [r.trial for r in rs if not r.solved]))
    return out
