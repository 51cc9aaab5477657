"""Numerical experiments: reference energies, convergence and domain-size
error laws, and the heavy-heavy-light three-body spectrum.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Sequence

import numpy as np

from .assembly import AssembledSystem, assemble
from .eigensolve import EigenSolution, classify_bound, solve_smallest
from .errors import InsufficientData, InvalidArgument
from .model import Kind, ProblemSpec, mass_coefficients
from .space import TensorSpace, build_space, evaluate
from .splines import graded_knots, open_uniform_knots

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# reference values

@dataclass(frozen=True)
class LedgerEntry:
    values: tuple[float, ...]
    citation: str


_LEDGER = {
    "lorentzian-cubed/beta=1": LedgerEntry(
        (-0.31658012845,),
        "two-body, f = (1 + x^2)^-3, beta = 1; septic IGA, 5000 uniform elements on [-20, 20]"),
    "gaussian/beta=1": LedgerEntry(
        (-0.47738997738,),
        "two-body, f = exp(-x^2), beta = 1; septic IGA, 5000 uniform elements on [-20, 20]"),
    "lorentzian-cubed/beta=5": LedgerEntry(
        (-2.9149185630, -0.25417134380),
        "two-body, f = (1 + x^2)^-3, beta = 5, both bound states; septic IGA, 5000 elements on [-20, 20]"),
    "three-body/iga": LedgerEntry(
        (-0.2476034576, -0.1825896533, -0.1412793292, -0.1182591543, -0.1060931444, -0.1005294105),
        "three-body, f = exp(-x^2), beta = 0.344595351, m_h/m_l = 20; septic IGA, 80x80 elements on [-20, 20]^2"),
    "three-body/bo": LedgerEntry(
        (-0.247603458, -0.182589653, -0.141279329, -0.118259157, -0.106093864, -0.102845702),
        "three-body, same setting; Born-Oppenheimer approximation (scaled literature values)"),
}

REFERENCE_LEDGER = MappingProxyType(_LEDGER)
THREE_BODY_BETA = 0.344595351
THREE_BODY_MASS_RATIO = 20.0


def ledger_value(key: str, j: int = 0) -> float:
    try:
        entry = REFERENCE_LEDGER[key]
    except KeyError:
        raise InvalidArgument(f"unknown reference key {key!r}; known: {sorted(REFERENCE_LEDGER)}") from None
    if not 0 <= j < len(entry.values):
        raise InvalidArgument(f"reference {key!r} has no state {j}")
    return entry.values[j]


def eigen_error(lambda_h: float, key: str, j: int = 0) -> float:
    """|lambda_h - reference_j| against a ledger entry."""
    return abs(lambda_h - ledger_value(key, j))


# ---------------------------------------------------------------------------
# fitting

@dataclass(frozen=True)
class FitResult:
    """Least-squares line ``y = slope * x + intercept``."""

    slope: float
    intercept: float
    r2: float
    n_points: int

    def predict(self, x):
        return self.slope * np.asarray(x) + self.intercept

    def solve_for(self, y: float) -> float:
        return (y - self.intercept) / self.slope


def fit_line(x, y, min_points: int = 3) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < min_points:
        raise InsufficientData(f"need at least {min_points} points for a fit, got {len(x)}")
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return FitResult(float(slope), float(intercept), r2, len(x))


# ---------------------------------------------------------------------------
# single solves

def two_body_spec(shape, beta, half_width=20.0, **kw) -> ProblemSpec:
    return ProblemSpec(Kind.TWO_BODY, shape, beta, half_width=half_width, **kw)


def uniform_space(spec: ProblemSpec, degree: int, n_elements: int, stretch: float = 0.0) -> TensorSpace:
    a, b = spec.domain
    kv = graded_knots(degree, n_elements, a, b, stretch) if stretch else open_uniform_knots(degree, n_elements, a, b)
    return build_space([kv] * spec.dim)


def solve_problem(spec: ProblemSpec, degree: int = 7, n_elements: int = 1000, k: int = 8,
                  stretch: float = 0.0, quad_points: int | None = None, path: str = "auto",
                  tol: float = 1e-10, threads: int = 1, deterministic: bool = True,
                  ) -> tuple[EigenSolution, AssembledSystem]:
    space = uniform_space(spec, degree, n_elements, stretch)
    system = assemble(space, spec, quad_points, threads=threads, deterministic=deterministic)
    sol = solve_smallest(system, min(k, system.n), tol=tol, path=path)
    return sol, system


def _resolve_reference(reference, spec, n_states):
    if isinstance(reference, str):
        return np.array([ledger_value(reference, j) for j in range(n_states)])
    return np.atleast_1d(np.asarray(reference, dtype=float))[:n_states]


# ---------------------------------------------------------------------------
# convergence in h

@dataclass
class ConvergenceStudy:
    rows: list[tuple]                       # (degree, h, n_dof, e_1, ..., e_m)
    fits: dict[int, FitResult]
    reference: np.ndarray
    state: int = 0


def convergence_study(spec: ProblemSpec, degrees: Sequence[int], mesh_sizes: Sequence[int],
                      reference=None, n_states: int = 1, state: int = 0,
                      window: tuple[float, float] = (1e-11, 1e-2),
                      quad_points: int | None = None, path: str = "auto") -> ConvergenceStudy:
    """Eigenvalue errors against mesh size for several degrees.

    ``mesh_sizes`` are element counts per axis. ``reference`` is a ledger
    key, explicit values, or None for a septic 5000-element solve. The fit of
    log10(e) against log10(h) uses only errors inside ``window``.
    """
    if reference is None:
        ref_sol, _ = solve_problem(spec, 7, 5000, k=n_states)
        ref = ref_sol.values[:n_states]
    else:
        ref = _resolve_reference(reference, spec, n_states)
    a, b = spec.domain
    rows, fits = [], {}
    for p in degrees:
        hs, es = [], []
        for n_el in mesh_sizes:
            sol, system = solve_problem(spec, p, n_el, k=n_states, quad_points=quad_points, path=path)
            err = np.abs(sol.values[:n_states] - ref)
            h = (b - a) / n_el
            rows.append((p, h, system.n, *err))
            if window[0] <= err[state] <= window[1]:
                hs.append(h)
                es.append(err[state])
            log.info("p=%d n_el=%d e=%s", p, n_el, err)
        fits[p] = fit_line(np.log10(hs), np.log10(es))
    return ConvergenceStudy(rows, fits, ref, state)


# ---------------------------------------------------------------------------
# domain size

@dataclass
class DomainStudy:
    rows: list[tuple]                        # (x_eps, e_1, ..., e_m)
    fits: dict[int, FitResult]
    reference: np.ndarray


def domain_study(shape, beta: float, half_widths: Sequence[float], h: float = 0.01, degree: int = 7,
                 reference=None, states: Sequence[int] = (0,), floor: float = 1e-11,
                 reference_half_width: float = 40.0) -> DomainStudy:
    """Eigenvalue error against the truncation half-width at fixed element size.

    Without a ledger ``reference`` the reference energies come from a solve
    on ``[-reference_half_width, reference_half_width]`` with the same h.
    Fits of log10(e) against x_eps skip errors below ``floor``.
    """
    n_states = max(states) + 1

    def n_elements(x_eps):
        n = 2 * x_eps / h
        if abs(n - round(n)) > 1e-9 * n:
            raise InvalidArgument(f"2*x_eps/h must be an integer (x_eps={x_eps}, h={h})")
        return int(round(n))

    if reference is None:
        spec = two_body_spec(shape, beta, reference_half_width)
        ref = solve_problem(spec, degree, n_elements(reference_half_width), k=n_states)[0].values
    else:
        ref = _resolve_reference(reference, None, n_states)
    rows = []
    for x_eps in half_widths:
        spec = two_body_spec(shape, beta, x_eps)
        sol, _ = solve_problem(spec, degree, n_elements(x_eps), k=n_states)
        rows.append((float(x_eps), *np.abs(sol.values[:n_states] - ref)))
    fits = {}
    for s in states:
        xs = [r[0] for r in rows if r[1 + s] >= floor]
        es = [r[1 + s] for r in rows if r[1 + s] >= floor]
        fits[s] = fit_line(xs, np.log10(es))
    return DomainStudy(rows, fits, np.asarray(ref))


def required_half_width(fit: FitResult, target_error: float) -> float:
    """x_eps at which the fitted law ``log10 e = slope * x + intercept`` hits ``target_error``."""
    return fit.solve_for(math.log10(target_error))


# ---------------------------------------------------------------------------
# parity and state sampling

@dataclass(frozen=True)
class ParityResult:
    label: str          # "even", "odd" or "indeterminate"
    overlap: float


def reflect(u: np.ndarray, space: TensorSpace) -> np.ndarray:
    """Coefficients of the state mirrored in the last coordinate (y in 2D, x in 1D)."""
    dofs = space.dofs
    full = dofs.expand(u)
    if space.dim == 1:
        mirrored = full[::-1]
    else:
        ny, nx = space.axes[1].n_basis, space.axes[0].n_basis
        mirrored = full.reshape(ny, nx)[::-1, :].ravel()
    return mirrored[dofs.global_of_interior]


def parity_of(u, system: AssembledSystem, cutoff: float = 0.9) -> ParityResult:
    """Classify a state as even or odd under reflection of the last coordinate."""
    space = system.space
    kv = space.axes[-1]
    if not kv.is_symmetric(tol=1e-12 * max(1.0, abs(kv.domain[1]))):
        raise InvalidArgument("parity needs a knot vector symmetric about the domain centre")
    u = np.asarray(u, dtype=float)
    ur = reflect(u, space)
    s = float(u @ (system.M @ ur) / (u @ (system.M @ u)))
    if s > cutoff:
        return ParityResult("even", s)
    if s < -cutoff:
        return ParityResult("odd", s)
    log.warning("parity indeterminate (overlap %.3f)", s)
    return ParityResult("indeterminate", s)


@dataclass
class StateSample:
    grids: tuple[np.ndarray, ...]
    values: np.ndarray
    eigenvalue: float | None = None
    parity: str | None = None


def sample_state(u, space: TensorSpace, window=None, resolution: int = 201,
                 eigenvalue: float | None = None, parity: str | None = None) -> StateSample:
    """Evaluate the spline expansion of interior coefficients ``u`` on a uniform grid.

    ``window`` is ``(lo, hi)`` applied to every axis (default: whole domain).
    2D values are indexed ``[iy, ix]``.
    """
    grids = []
    for kv in space.axes:
        a, b = kv.domain
        lo, hi = (a, b) if window is None else window
        if not (a <= lo < hi <= b):
            raise InvalidArgument(f"window {window} not inside the domain [{a}, {b}]")
        grids.append(np.linspace(lo, hi, resolution))
    u = np.asarray(u, dtype=float)
    full = space.dofs.expand(u) if len(u) == space.dofs.n_interior else u
    values = evaluate(space, full, *grids)
    return StateSample(tuple(grids), values, eigenvalue, parity)


# ---------------------------------------------------------------------------
# three-body spectrum

@dataclass
class ThreeBodyRun:
    kappa: tuple[float, float]
    solution: EigenSolution
    system: AssembledSystem
    max_error_iga: float
    max_error_bo: float


@dataclass
class ThreeBodyStudy:
    runs: list[ThreeBodyRun]
    best: int = field(default=0)

    @property
    def best_run(self) -> ThreeBodyRun:
        return self.runs[self.best]


def kappa_candidates(mass_ratio: float) -> list[tuple[float, float]]:
    """(alpha_x/2, alpha_y/2) from the mass coefficients, then the variant with alpha_y in y."""
    ax, ay = mass_coefficients(float(mass_ratio))
    return [(ax / 2, ay / 2), (ax / 2, ay)]


def three_body_study(spec: ProblemSpec, n_elements: int = 80, degree: int = 7, stretch: float = 0.0,
                     k: int = 6, path: str = "auto", tol: float = 1e-10,
                     threads: int = 1, deterministic: bool = True,
                     bound_threshold: float = 0.02) -> ThreeBodyStudy:
    """Lowest ``k`` three-body states with parity labels, compared to the ledger.

    With a kappa override a single run is made; otherwise one run per
    candidate of :func:`kappa_candidates` and ``best`` points to the one
    closest to the IGA ledger column.
    """
    if spec.kind is not Kind.THREE_BODY:
        raise InvalidArgument("three_body_study needs a three-body problem")
    if spec.kappa_override is not None:
        kappas = [tuple(spec.kappa_override)]
    else:
        kappas = kappa_candidates(spec.mass_ratio)
    iga = np.array(REFERENCE_LEDGER["three-body/iga"].values)
    bo = np.array(REFERENCE_LEDGER["three-body/bo"].values)
    m = min(k, len(iga))
    runs = []
    for kap in kappas:
        run_spec = replace(spec, kappa_override=kap)
        sol, system = solve_problem(run_spec, degree, n_elements, k=k, stretch=stretch, path=path,
                                    tol=tol, threads=threads, deterministic=deterministic)
        sol = classify_bound(sol, system.space, bound_threshold)
        labels = tuple(parity_of(sol.vectors[:, j], system).label for j in range(sol.k))
        sol = replace(sol, parity=labels)
        runs.append(ThreeBodyRun(kap, sol, system,
                                 float(np.max(np.abs(sol.values[:m] - iga[:m]))),
                                 float(np.max(np.abs(sol.values[:m] - bo[:m])))))
        log.info("kappa=%s values=%s", kap, sol.values)
    best = int(np.argmin([r.max_error_iga for r in runs]))
    return ThreeBodyStudy(runs, best)


# ---------------------------------------------------------------------------
# CSV output

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_convergence_csv(path, study: ConvergenceStudy) -> None:
    m = len(study.rows[0]) - 3 if study.rows else 0
    write_csv(path, ["degree", "h", "n_dof"] + [f"e_{j + 1}" for j in range(m)], study.rows)


def write_domain_csv(path, study: DomainStudy) -> None:
    m = len(study.rows[0]) - 1 if study.rows else 0
    write_csv(path, ["x_eps"] + [f"e_{j + 1}" for j in range(m)], study.rows)


def spectrum_rows(sol: EigenSolution):
    for j in range(sol.k):
        parity = sol.parity[j] if sol.parity is not None else ""
        bound = bool(sol.bound_flags[j]) if sol.bound_flags is not None else ""
        yield (j, float(sol.values[j]), parity, float(sol.residuals[j]), bound)


def write_spectrum_csv(path, sol: EigenSolution) -> None:
    write_csv(path, ["j", "lambda", "parity", "residual", "bound_flag"], spectrum_rows(sol))


def write_state_csv(path, sample: StateSample) -> None:
    if len(sample.grids) == 1:
        rows = zip(sample.grids[0], sample.values)
        write_csv(path, ["x", "value"], ((float(x), float(v)) for x, v in rows))
    else:
        gx, gy = sample.grids
        rows = ((float(gx[i]), float(gy[j]), float(sample.values[j, i]))
                for j in range(len(gy)) for i in range(len(gx)))
        write_csv(path, ["x", "y", "value"], rows)
