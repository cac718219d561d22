"""Numerical verification path.

The radial equilibrium equations are solved by collocation (scipy's
``solve_bvp``) and the stiffnesses follow from Gauss-Legendre quadrature of
the torque and energy densities of ``core.fields``. Nothing here uses the
analytical Bessel solutions.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from core import fields
from core.errors import (
    DomainError,
    GridPointError,
    NonConvergenceError,
    SingularSystemError,
    UnsupportedModelError,
)
from core.materials import MaterialParameters
from core.models import PROFILE_MODELS, ModelKind, RadialProfile, StiffnessTriple, polar_moment

logger = logging.getLogger(__name__)

ORIGIN_OFFSET = 1e-6
MIN_NODES = 8
DEFAULT_NODES = 200
DEFAULT_TOLERANCE = 1e-10
GAUSS_ORDER = 16
QUADRATURE_RTOL = 1e-9
MAX_REFINEMENTS = 12
# surface spacing is layer / LAYER_RESOLUTION, growing by LAYER_GROWTH inward
LAYER_RESOLUTION = 50.0
LAYER_GROWTH = 1.05


@dataclass
class BvpSpec:
    """Radial problems a(r) g'' + b(r) g' + c(r) g = d(r) on (0, R].

    ``boundary`` rows act on (g_p, g_p', g_m, g_m') at r = R; unknowns not
    solved for take their ``fixed`` value.
    """
    model: ModelKind
    R: float
    equations: List[fields.ReducedEquation]
    boundary: np.ndarray
    boundary_rhs: np.ndarray
    fixed: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_model(cls, model: Any, params: MaterialParameters, R: float) -> 'BvpSpec':
        system = fields.reduced_system(model, params, R)
        return cls(model=system.model, R=R, equations=system.equations,
                   boundary=system.boundary, boundary_rhs=system.boundary_rhs,
                   fixed=dict(system.fixed))

    @property
    def origin(self) -> float:
        return ORIGIN_OFFSET * self.R

    def ode_coefficients(self, index: int, r: np.ndarray) -> Tuple[np.ndarray, ...]:
        eq = self.equations[index]
        r = np.asarray(r, dtype=float)
        return (eq.stiffness * r, 3.0 * eq.stiffness * np.ones_like(r),
                -eq.reaction * r, eq.load * r)

    def boundary_layer(self) -> float:
        """Smallest decay length sqrt(stiffness / reaction), R when none is shorter."""
        lengths = [math.sqrt(eq.stiffness / eq.reaction) for eq in self.equations
                   if eq.reaction > 0 and math.isfinite(eq.stiffness)]
        return min([self.R] + lengths)

    def validate(self):
        n = len(self.equations)
        if self.boundary.shape != (n, len(fields.STATE_ORDER)):
            raise SingularSystemError("Boundary rows do not match the unknowns",
                                      rows=int(self.boundary.shape[0]), unknowns=n)
        columns = []
        for eq in self.equations:
            base = fields.STATE_ORDER.index(eq.unknown)
            columns.extend([base, base + 1])
        block = self.boundary[:, columns]
        if np.any(np.all(block == 0.0, axis=1)) or np.linalg.matrix_rank(block) < n:
            raise SingularSystemError("Degenerate boundary condition", model=self.model.value)
        for eq in self.equations:
            if math.isinf(eq.stiffness):
                raise DomainError("The collocation path needs a finite Lc", model=self.model.value)


@dataclass
class QuadratureResult:
    value: float
    estimated_error: float
    n_points: int
    converged: bool = True
    roundoff_limited: bool = False


def _constant_profile(spec: BvpSpec, values: Dict[str, float], n_samples: int) -> RadialProfile:
    g_p = values.get('g_p', spec.fixed.get('g_p', 0.0))
    g_m = values.get('g_m', spec.fixed.get('g_m', 0.0))

    def evaluator(r, derivative=0):
        r = np.asarray(r, dtype=float)
        if derivative == 0:
            return np.full_like(r, g_p), np.full_like(r, g_m)
        return np.zeros_like(r), np.zeros_like(r)

    radii = np.linspace(0.0, spec.R, n_samples)
    return RadialProfile.from_sum_difference(radii, np.full_like(radii, g_p), np.full_like(radii, g_m),
                                             spec.model, evaluator=evaluator)


def _algebraic_profile(spec: BvpSpec, n_samples: int) -> RadialProfile:
    """Lc = 0: every equation loses its derivatives and g = -load / reaction."""
    values = {}
    for eq in spec.equations:
        if eq.reaction == 0:
            raise SingularSystemError(f"No restoring term for {eq.unknown} at Lc = 0",
                                      model=spec.model.value)
        values[eq.unknown] = -eq.load / eq.reaction
    return _constant_profile(spec, values, n_samples)


def initial_mesh(R: float, eps: float, layer: float, n_nodes: int) -> np.ndarray:
    """Sine-clustered nodes on [eps, R], merged with a geometric grading toward
    r = R when the boundary layer is thinner than the radius."""
    t = np.linspace(0.0, 1.0, n_nodes)
    mesh = eps + (R - eps) * np.sin(0.5 * math.pi * t)
    if not layer < R:
        return mesh
    coarse = (R - eps) / n_nodes
    step = layer / LAYER_RESOLUTION
    graded = [R]
    x = R - step
    while x > eps and step < coarse:
        graded.append(x)
        step *= LAYER_GROWTH
        x -= step
    inner = mesh[mesh < graded[-1] - 0.5 * step]
    if inner.size == 0 or inner[0] > eps:
        inner = np.concatenate([[eps], inner])
    return np.concatenate([inner, graded[::-1]])


def solve_bvp(spec: BvpSpec, n_nodes: int = DEFAULT_NODES,
              tol: float = DEFAULT_TOLERANCE, max_nodes: int = 200000) -> RadialProfile:
    """Collocation solution regular at the axis.

    The mesh starts at r = 1e-6 R where the regular series gives
    g' = r (reaction g + load) / (4 stiffness), and is graded into the
    surface layer of width ``spec.boundary_layer()``.
    """
    if n_nodes < MIN_NODES:
        raise DomainError(f"Need at least {MIN_NODES} nodes", n_nodes=n_nodes)
    spec.validate()
    stiff = [eq.stiffness for eq in spec.equations]
    if all(k == 0 for k in stiff):
        return _algebraic_profile(spec, n_nodes)
    if any(k == 0 for k in stiff):
        raise SingularSystemError("Mixed algebraic and differential unknowns",
                                  model=spec.model.value)

    eqs = spec.equations
    n = len(eqs)
    eps = spec.origin
    R = spec.R

    def rhs(r, y):
        dy = np.empty_like(y)
        for i, eq in enumerate(eqs):
            g, dg = y[2 * i], y[2 * i + 1]
            dy[2 * i] = dg
            dy[2 * i + 1] = (eq.reaction * g + eq.load) / eq.stiffness - 3.0 * dg / r
        return dy

    def state(y) -> np.ndarray:
        values = {f'g_{k}': spec.fixed.get(f'g_{k}', 0.0) for k in ('p', 'm')}
        values.update({f'dg_{k}': 0.0 for k in ('p', 'm')})
        for i, eq in enumerate(eqs):
            values[eq.unknown] = y[2 * i]
            values['d' + eq.unknown] = y[2 * i + 1]
        return np.array([values[name] for name in fields.STATE_ORDER])

    def bc(ya, yb):
        out = []
        for i, eq in enumerate(eqs):
            out.append(ya[2 * i + 1] - eps * (eq.reaction * ya[2 * i] + eq.load) / (4.0 * eq.stiffness))
        vector = state(yb)
        for row, value in zip(spec.boundary, spec.boundary_rhs):
            out.append(float(row @ vector) - value)
        return np.array(out)

    mesh = initial_mesh(R, eps, spec.boundary_layer(), n_nodes)
    guess = np.zeros((2 * n, mesh.size))
    result = integrate.solve_bvp(rhs, bc, mesh, guess, tol=tol, bc_tol=tol, max_nodes=max_nodes)
    residual = float(np.max(result.rms_residuals)) if result.rms_residuals is not None else math.nan
    if result.status == 2:
        raise SingularSystemError(result.message, model=spec.model.value)
    if not result.success:
        raise NonConvergenceError(f"Collocation did not converge: {result.message}",
                                  residual=residual, model=spec.model.value)
    logger.debug("%s: collocation converged on %d nodes (max residual %.3e)",
                 spec.model.value, result.x.size, residual)

    solution = result.sol

    def evaluator(r, derivative=0):
        r = np.asarray(r, dtype=float)
        rc = np.maximum(np.atleast_1d(r), eps)
        y = solution(rc)
        components = {}
        for i, eq in enumerate(eqs):
            g, dg = y[2 * i], y[2 * i + 1]
            if derivative == 0:
                value = g
            elif derivative == 1:
                value = dg
            elif derivative == 2:
                value = (eq.reaction * g + eq.load) / eq.stiffness - 3.0 * dg / rc
            else:
                raise DomainError(f"Unsupported derivative order: {derivative}")
            components[eq.unknown] = value
        out = []
        for name in ('g_p', 'g_m'):
            if name in components:
                value = components[name]
            else:
                value = np.full_like(rc, spec.fixed.get(name, 0.0) if derivative == 0 else 0.0)
            out.append(value.reshape(r.shape) if r.ndim else float(value[0]))
        return tuple(out)

    radii = np.linspace(0.0, R, n_nodes)
    g_p, g_m = evaluator(radii)
    return RadialProfile.from_sum_difference(radii, g_p, g_m, spec.model, evaluator=evaluator)


def solve_profile(model: Any, params: MaterialParameters, R: float,
                  n_nodes: int = DEFAULT_NODES, tol: float = DEFAULT_TOLERANCE) -> RadialProfile:
    return solve_bvp(BvpSpec.from_model(model, params, R), n_nodes=n_nodes, tol=tol)


# --- quadrature ----------------------------------------------------------------------

def _panels(R: float, layer: float) -> np.ndarray:
    """Breakpoints on [0, R] halving toward the surface down to the boundary-layer width."""
    depth = int(math.ceil(math.log2(R / layer))) + 4 if layer < R else 4
    depth = min(max(depth, 1), 60)
    inner = [R - R * 0.5 ** j for j in range(1, depth + 1)]
    return np.array([0.0] + inner + [R])


@dataclass
class _Panel:
    a: float
    b: float
    coarse: np.ndarray
    fine: np.ndarray
    frozen: bool = False

    @property
    def error(self) -> np.ndarray:
        return np.abs(self.fine - self.coarse)


def _gauss_panel(integrand: Callable[[float], np.ndarray], a: float, b: float,
                 order: int) -> _Panel:
    """Order-n and order-2n Gauss-Legendre sums of 2 pi f(r) r on [a, b]."""
    sums = []
    for n in (order, 2 * order):
        nodes, weights = np.polynomial.legendre.leggauss(n)
        half = 0.5 * (b - a)
        points = a + half * (nodes + 1.0)
        values = np.array([np.atleast_1d(integrand(r)) for r in points])
        sums.append(2.0 * math.pi * (half * weights * points) @ values)
    return _Panel(a, b, sums[0], sums[1])


def integrate_radial(integrand: Callable[[float], np.ndarray], R: float, layer: float,
                     order: int = GAUSS_ORDER, rtol: float = QUADRATURE_RTOL,
                     max_refinements: int = MAX_REFINEMENTS) -> List[QuadratureResult]:
    """2 pi * integral of a vector integrand times r dr on [0, R].

    Each panel carries an error estimate from a second pass at twice the
    order. Panels above their share of the tolerance are bisected until the
    total passes or ``max_refinements`` rounds are spent; a panel whose halves
    do not halve its error sits at round-off and is not split again.
    """
    breaks = _panels(R, layer)
    panels = [_gauss_panel(integrand, a, b, order) for a, b in zip(breaks[:-1], breaks[1:])]
    rounds = 0
    while True:
        value = np.sum([p.fine for p in panels], axis=0)
        error = np.sum([p.error for p in panels], axis=0)
        tolerance = np.maximum(rtol * np.abs(value), 1e-14 * max(np.abs(value).max(), 1e-300))
        if np.all(error <= tolerance) or rounds >= max_refinements:
            break
        share = tolerance / len(panels)
        refined = []
        split = 0
        for panel in panels:
            if panel.frozen or np.all(panel.error <= share):
                refined.append(panel)
                continue
            mid = 0.5 * (panel.a + panel.b)
            halves = [_gauss_panel(integrand, panel.a, mid, order),
                      _gauss_panel(integrand, mid, panel.b, order)]
            if np.all(halves[0].error + halves[1].error > 0.5 * panel.error):
                for half in halves:
                    half.frozen = True
            refined.extend(halves)
            split += 1
        panels = refined
        rounds += 1
        if split == 0:
            break

    count = len(panels) * 3 * order
    logger.debug("Radial quadrature: %d panels after %d refinement rounds", len(panels), rounds)
    results = []
    for k, (v, e, t) in enumerate(zip(value, error, tolerance)):
        stuck = all(p.frozen or p.error[k] <= t / len(panels) for p in panels)
        results.append(QuadratureResult(float(v), float(e), count, bool(e <= t),
                                        roundoff_limited=bool(e > t and stuck)))
    return results


def _densities(model: ModelKind, params: MaterialParameters, profile: Optional[RadialProfile],
               twist_rate: float, phi: float = 0.0):
    def integrand(r: float) -> np.ndarray:
        point = fields.Point.cylindrical(r, phi, 0.0)
        sigma, moment = fields.stress_and_moment(model, params, point, twist_rate, profile)
        return np.array([
            fields.classical_torque_integrand(sigma, point),
            fields.higher_order_torque_integrand(model, moment, phi),
            fields.energy_density(model, params, point, twist_rate, profile),
        ])
    return integrand


def torque_and_energy(model: Any, params: MaterialParameters, R: float,
                      profile: Optional[RadialProfile] = None, twist_rate: float = 1.0,
                      order: int = GAUSS_ORDER, n_nodes: int = DEFAULT_NODES,
                      tol: float = DEFAULT_TOLERANCE) -> Dict[str, QuadratureResult]:
    """M_c, M_m and the energy per unit length at twist rate ``twist_rate``."""
    kind = ModelKind.parse(model)
    layer = R
    if kind in PROFILE_MODELS:
        spec = BvpSpec.from_model(kind, params, R)
        if profile is None:
            profile = solve_bvp(spec, n_nodes=n_nodes, tol=tol)
        if params.Lc > 0:
            layer = spec.boundary_layer()
    M_c, M_m, W = integrate_radial(_densities(kind, params, profile, twist_rate), R, layer, order)
    return {'M_c': M_c, 'M_m': M_m, 'W': W}


def numeric_stiffness(model: Any, params: MaterialParameters, R: float, Lc: Optional[float] = None,
                      profile: Optional[RadialProfile] = None, order: int = GAUSS_ORDER,
                      n_nodes: int = DEFAULT_NODES, tol: float = DEFAULT_TOLERANCE) -> StiffnessTriple:
    kind = ModelKind.parse(model)
    if not R > 0:
        raise DomainError("Radius must be positive", R=R)
    if Lc is not None:
        params = params.replace(Lc=float(Lc))
    if math.isinf(params.Lc):
        raise DomainError("The numerical path needs a finite Lc", Lc=params.Lc)
    parts = torque_and_energy(kind, params, R, profile=profile, order=order, n_nodes=n_nodes, tol=tol)
    for name, part in parts.items():
        if part.roundoff_limited:
            logger.debug("%s: quadrature of %s limited by round-off (%.3e)",
                         kind.value, name, part.estimated_error)
        elif not part.converged:
            raise NonConvergenceError(f"Quadrature of {name} did not converge",
                                      residual=part.estimated_error, model=kind.value)
    return StiffnessTriple(T_c=parts['M_c'].value, T_m=parts['M_m'].value,
                           T_w=2.0 * parts['W'].value, model=kind, Lc=params.Lc)


def numeric_curve(model: Any, params: MaterialParameters, R: float, Lc_grid: Sequence[float],
                  max_workers: int = 1) -> List[StiffnessTriple]:
    def evaluate(item):
        index, Lc = item
        try:
            return numeric_stiffness(model, params, R, Lc=Lc)
        except Exception as exc:
            raise GridPointError(index, exc) from exc

    items = list(enumerate(float(v) for v in Lc_grid))
    if max_workers <= 1 or len(items) < 2:
        return [evaluate(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(evaluate, items))


def relative_errors(reference: StiffnessTriple, numeric: StiffnessTriple) -> Dict[str, float]:
    """Component-wise |a - b| / |a|, absolute where the reference vanishes."""
    out = {}
    for name in ('T_c', 'T_m', 'T_w'):
        a, b = getattr(reference, name), getattr(numeric, name)
        scale = abs(a) if a != 0 else 1.0
        out[name] = abs(a - b) / scale
    return out


def energy_derivative_check(model: Any, params: MaterialParameters, R: float,
                            Lc: Optional[float] = None,
                            twist_grid: Sequence[float] = (0.9, 1.0, 1.1)) -> Dict[str, Any]:
    """Central difference of W(twist) against M_c + M_m at the middle rate."""
    grid = [float(v) for v in twist_grid]
    if len(grid) < 3 or len(grid) % 2 == 0:
        raise DomainError("Twist grid needs an odd number (>= 3) of rates", n=len(grid))
    steps = np.diff(grid)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-12):
        raise DomainError("Twist grid must be evenly spaced and increasing")
    kind = ModelKind.parse(model)
    if Lc is not None:
        params = params.replace(Lc=float(Lc))
    profile = None
    if kind in PROFILE_MODELS:
        profile = solve_profile(kind, params, R)

    energies, torques = [], []
    for rate in grid:
        parts = torque_and_energy(kind, params, R, profile=profile, twist_rate=rate)
        energies.append(parts['W'].value)
        torques.append(parts['M_c'].value + parts['M_m'].value)

    mid = len(grid) // 2
    h = steps[0]
    derivative = (energies[mid + 1] - energies[mid - 1]) / (2.0 * h)
    torque = torques[mid]
    second = np.diff(energies, 2) / h ** 2
    return {
        'model': kind.value,
        'twist_grid': grid,
        'energies': energies,
        'derivative': float(derivative),
        'torque': float(torque),
        'relative_error': abs(derivative - torque) / abs(torque),
        'second_differences': second.tolist(),
    }


def constant_P_limit(model: Any, params: MaterialParameters, R: float,
                     length: Optional[float] = None) -> Dict[str, Any]:
    """Constant micro-distortion that minimizes the local energy against the
    cross-section average of Du, and the lower-order stiffness at P = 0.

    For the Cosserat rotation the average runs over the segment [0, length].
    """
    kind = ModelKind.parse(model)
    target = fields.STRUCTURAL_ALIASES.get(kind, kind)
    if target not in (ModelKind.MICROMORPHIC, ModelKind.MICRO_STRAIN, ModelKind.COSSERAT):
        raise UnsupportedModelError(f"No constant micro-distortion limit for {kind.value}",
                                    model=kind.value)
    area = math.pi * R ** 2
    # z = 0 is the symmetric cross-section; the rotation averages over [0, length]
    z = 0.5 * (R if length is None else length) if target is ModelKind.COSSERAT else 0.0
    mean = fields.disk_average_gradient(R, z, 1.0) / area

    if target is ModelKind.COSSERAT:
        distortion = fields.skew(mean)
    elif target is ModelKind.MICRO_STRAIN:
        distortion = fields.sym(mean)
    else:
        mu_e, mu_micro = params.require('mu_e', 'mu_micro')
        distortion = mu_e / (mu_e + mu_micro) * fields.sym(mean) + fields.skew(mean)

    spec = BvpSpec.from_model(kind, params.replace(Lc=0.0), R)
    zero = _constant_profile(spec, {'g_p': 0.0, 'g_m': 0.0}, MIN_NODES)
    lower = numeric_stiffness(kind, params.replace(Lc=0.0), R, profile=zero)
    return {
        'model': kind.value,
        'mean_gradient': mean,
        'constant_distortion': distortion,
        'symmetric_part': fields.sym(distortion),
        'lower_order_stiffness': lower.T_w,
        'lower_order_modulus': lower.T_w / polar_moment(R),
    }
