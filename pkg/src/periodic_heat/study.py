"""Convergence study: measured errors against the a priori bounds, written as CSV."""
import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .bounds import BoundInputs, bound_report
from .fem_space import assemble, space_constants
from .manufactured import ManufacturedProblem, aposteriori_errors, f_norm_analytic
from .periodic_solver import SemidiscreteSystem, TimeGrid, solve_periodic

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "nu", "beta", "n", "m", "h", "k", "kappa1", "K1", "K2", "err_h1", "err_l2",
    "bound_h1", "bound_l2", "ratio_h1", "ratio_l2", "runtime_ms",
)
_INT_COLUMNS = {"n", "m"}


class ConfigError(ValueError):
    pass


class StudyError(RuntimeError):
    """A configuration failed; ``rows`` holds everything computed before it."""

    def __init__(self, message, rows, failed):
        super().__init__(message)
        self.rows = rows
        self.failed = failed


@dataclass
class StudyConfig:
    """Sweep definition.

    ``n`` is the number of elements, so ``h = 1/n``. With
    ``m_rule="n_squared"`` each run uses ``m = n**2`` time steps (``k = h**2``
    for ``T = 1``); otherwise ``m_list`` pairs one ``m`` with each ``n``.
    """

    nu_list: list = field(default_factory=lambda: [0.1, 1.0, 10.0])
    beta_list: list = field(default_factory=lambda: [0.0, 0.5 * math.pi])
    n_list: list = field(default_factory=lambda: [8, 16, 32, 64, 128])
    m_rule: str = "n_squared"
    m_list: list | None = None
    T: float = 1.0
    quad_order: int = 5
    output: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("nu_list", "beta_list", "n_list"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be nonempty")
        if any(not nu > 0 for nu in self.nu_list):
            raise ConfigError(f"nu values must be positive: {self.nu_list}")
        if any(int(n) != n or n < 2 for n in self.n_list):
            raise ConfigError(f"n values must be integers >= 2: {self.n_list}")
        if self.m_list is not None:
            self.m_rule = "explicit"
            if len(self.m_list) != len(self.n_list):
                raise ConfigError("m_list must have one entry per n")
            if any(int(m) != m or m < 1 for m in self.m_list):
                raise ConfigError(f"m values must be positive integers: {self.m_list}")
        elif self.m_rule != "n_squared":
            raise ConfigError(f"m_rule must be 'n_squared' or an explicit m_list, got {self.m_rule!r}")
        if self.T != 1.0:
            raise ConfigError("the manufactured problem is 1-periodic; T must be 1")
        if int(self.quad_order) != self.quad_order or self.quad_order < 4:
            raise ConfigError(f"quad_order must be an integer >= 4, got {self.quad_order}")

    def time_steps(self, n):
        if self.m_list is None:
            return n * n
        return int(self.m_list[self.n_list.index(n)])

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        return cls.from_dict(data)


@dataclass(frozen=True)
class StudyRow:
    nu: float
    beta: float
    n: int
    m: int
    h: float
    k: float
    kappa1: float
    K1: float
    K2: float
    err_h1: float
    err_l2: float
    bound_h1: float
    bound_l2: float
    ratio_h1: float
    ratio_l2: float
    runtime_ms: float


def run_case(nu, beta, n, m, T=1.0, quad_order=5, timing=True) -> StudyRow:
    """Solve, measure and bound one ``(nu, beta, n, m)`` configuration."""
    start = time.perf_counter()
    fem = assemble(n)
    problem = ManufacturedProblem(nu, beta, T)
    system = SemidiscreteSystem(fem, nu, T, problem.forcing)
    grid = TimeGrid(m, T)
    sol = solve_periodic(system, grid)
    errors = aposteriori_errors(sol, problem, quad_order)
    sc = space_constants(fem.mesh)
    inputs = BoundInputs(nu, T, sc.lambda1, sc.c_p, sc.c_omega, sc.c_inv, grid.c_j, f_norm_analytic(problem))
    report = bound_report(inputs, system.decomp, fem)
    elapsed = (time.perf_counter() - start) * 1e3 if timing else 0.0
    return StudyRow(
        nu=float(nu), beta=float(beta), n=int(n), m=int(m), h=fem.mesh.h, k=grid.k,
        kappa1=report.kappa1, K1=report.K1, K2=report.K2,
        err_h1=errors.err_h1, err_l2=errors.err_l2,
        bound_h1=report.h1_bound, bound_l2=report.l2_bound,
        ratio_h1=report.h1_bound / errors.err_h1, ratio_l2=report.l2_bound / errors.err_l2,
        runtime_ms=elapsed,
    )


def run_study(cfg: StudyConfig, timing=True) -> list[StudyRow]:
    """One row per ``(nu, beta, n)``, in ascending lexicographic order."""
    cfg.validate()
    rows = []
    for nu in sorted(set(cfg.nu_list)):
        for beta in sorted(set(cfg.beta_list)):
            for n in sorted(set(cfg.n_list)):
                m = cfg.time_steps(n)
                try:
                    row = run_case(nu, beta, n, m, cfg.T, cfg.quad_order, timing)
                except Exception as exc:
                    failed = dict(nu=nu, beta=beta, n=n, m=m)
                    raise StudyError(f"configuration {failed} failed: {exc}", rows, failed) from exc
                if row.ratio_h1 < 1 or row.ratio_l2 < 1:
                    log.warning("bound below measured error at nu=%g beta=%g n=%d", nu, beta, n)
                log.info("nu=%g beta=%g n=%d m=%d err_h1=%.3e err_l2=%.3e", nu, beta, n, m,
                         row.err_h1, row.err_l2)
                rows.append(row)
    return rows


def _fmt(name, value):
    if name in _INT_COLUMNS:
        return str(int(value))
    return format(float(value), ".17g")


def format_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        d = asdict(row)
        writer.writerow([_fmt(c, d[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def emit_csv(rows, path) -> None:
    """Write rows as UTF-8 CSV with LF line endings and 17-significant-digit floats."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(format_csv(rows))
    except OSError as exc:
        raise OSError(f"cannot write study CSV to {path}: {exc}") from exc


def read_csv(path) -> list[StudyRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header in {path}: {reader.fieldnames}")
        return [
            StudyRow(**{c: int(r[c]) if c in _INT_COLUMNS else float(r[c]) for c in CSV_COLUMNS})
            for r in reader
        ]
