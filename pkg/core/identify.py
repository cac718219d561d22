"""Parameter identification from stiffness-versus-radius data and the
size-effect diagnostics in the classical Cosserat notation."""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import optimize

from core import specfun
from core.closed_form import stiffness
from core.errors import DomainError, ParameterDomainError, SingularJacobianError
from core.materials import (
    ClassicalCosseratCoefficients,
    MaterialParameters,
    classical_from_dislocation,
    positive_definiteness_check,
)
from core.models import ModelKind, polar_moment

logger = logging.getLogger(__name__)

SINGULAR_CONDITION = 1e8
STEP_TOLERANCE = 1e-10
GRADIENT_TOLERANCE = 1e-10
OBSERVATION_COLUMNS = ('R', 'T_w', 'weight')
WEIGHTINGS = ('uniform', 'relative')


@dataclass
class FitProblem:
    """Observations (R, T_w, weight) and the split into free and fixed parameters.

    Free parameters carry (lower, upper) bounds and optionally an ``initial``
    value; the default start is the geometric mean of the bounds. The residual
    of point i is sqrt(weight_i) * (T_model(R_i) - T_w_i) / scale, with the
    fixed scale max_i sqrt(weight_i) |T_w_i|.
    """
    observations: pd.DataFrame
    model: ModelKind
    free: Dict[str, Tuple[float, float]]
    fixed: Dict[str, float] = field(default_factory=dict)
    initial: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_config(cls, config: Dict[str, Any], observations: pd.DataFrame) -> 'FitProblem':
        missing = [key for key in ('model', 'free') if key not in config]
        if missing:
            raise ParameterDomainError(f"Fit configuration lacks: {', '.join(missing)}", fields=missing)
        free = {}
        for name, bounds in config['free'].items():
            if not isinstance(bounds, (list, tuple)) or len(bounds) != 2:
                raise ParameterDomainError(f"Bounds of {name} must be [lower, upper]", fields=[name])
            free[name] = (float(bounds[0]), float(bounds[1]))
        fixed = {key: float(value) for key, value in config.get('fixed', {}).items()}
        initial = {key: float(value) for key, value in config.get('initial', {}).items()}
        return cls(observations=_normalize_observations(observations),
                   model=ModelKind.parse(config['model']), free=free, fixed=fixed, initial=initial)

    def validate(self) -> Dict[str, Any]:
        issues = []
        warnings = []
        names = MaterialParameters.field_names()
        for name, (lo, hi) in self.free.items():
            if name not in names:
                issues.append(f"Unknown free parameter: {name}")
            elif not lo < hi:
                issues.append(f"Empty bounds for {name}: [{lo}, {hi}]")
            elif lo <= 0:
                warnings.append(f"{name} has a nonpositive lower bound and is fitted on a linear scale")
        for name, value in self.initial.items():
            if name not in self.free:
                issues.append(f"Initial value for a parameter that is not free: {name}")
            elif not self.free[name][0] <= value <= self.free[name][1]:
                issues.append(f"Initial value of {name} lies outside its bounds")
        overlap = set(self.free) & set(self.fixed)
        if overlap:
            issues.append(f"Parameters both free and fixed: {', '.join(sorted(overlap))}")

        obs = self.observations
        if len(obs) < len(self.free):
            issues.append(f"{len(obs)} observations cannot determine {len(self.free)} parameters")
        if (obs['R'] <= 0).any():
            issues.append("All radii must be positive")
        if obs['R'].duplicated().any():
            issues.append("Radii must be distinct")
        if (obs['T_w'] <= 0).any():
            issues.append("Observed stiffnesses must be positive")
        if (obs['weight'] < 0).any():
            issues.append("Weights must be nonnegative")
        elif not (obs['weight'] > 0).any():
            issues.append("At least one weight must be positive")
        return {'valid': len(issues) == 0, 'issues': issues, 'warnings': warnings}

    def parameters(self, values: Dict[str, float]) -> MaterialParameters:
        data = dict(self.fixed)
        data.update(values)
        return MaterialParameters.from_dict(data)

    def predict(self, values: Dict[str, float], radii: Optional[Sequence[float]] = None) -> np.ndarray:
        params = self.parameters(values)
        radii = self.observations['R'].to_numpy() if radii is None else radii
        return np.array([stiffness(self.model, params, float(R)).T_w for R in radii])

    def residual_scale(self) -> float:
        obs = self.observations
        return float(np.max(np.sqrt(obs['weight'].to_numpy()) * np.abs(obs['T_w'].to_numpy())))

    def residuals(self, values: Dict[str, float]) -> np.ndarray:
        """Weighted absolute residuals over the fixed scale."""
        obs = self.observations
        root_weights = np.sqrt(obs['weight'].to_numpy())
        return root_weights * (self.predict(values) - obs['T_w'].to_numpy()) / self.residual_scale()


@dataclass
class FitResult:
    fitted_values: Dict[str, float]
    residual_norm: float
    per_point_residuals: List[float]
    convergence: Dict[str, Any]
    condition_number: float
    covariance_estimate: Optional[np.ndarray] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'fitted_values': dict(self.fitted_values),
            'residual_norm': self.residual_norm,
            'per_point_residuals': list(self.per_point_residuals),
            'convergence': dict(self.convergence),
            'condition_number': self.condition_number,
            'covariance_estimate': None if self.covariance_estimate is None
            else self.covariance_estimate.tolist(),
        }


@dataclass(frozen=True)
class LakesDiagnostics:
    ell_t: float
    Psi: float
    N: float
    Omega: float
    chi: float
    p: float

    def to_dict(self) -> Dict[str, float]:
        return {'ell_t': self.ell_t, 'Psi': self.Psi, 'N': self.N, 'Omega': self.Omega,
                'chi': self.chi, 'p': self.p}


def _normalize_observations(frame: pd.DataFrame) -> pd.DataFrame:
    missing = [col for col in ('R', 'T_w') if col not in frame.columns]
    if missing:
        raise ParameterDomainError(f"Observation columns missing: {', '.join(missing)}", fields=missing)
    out = frame.loc[:, [col for col in OBSERVATION_COLUMNS if col in frame.columns]].astype(float)
    if 'weight' not in out.columns:
        out['weight'] = 1.0
    return out.reset_index(drop=True)


class _Scaling:
    """Log coordinates for positive bounds, linear ones otherwise."""

    def __init__(self, free: Dict[str, Tuple[float, float]]):
        self.names = list(free)
        self.log = np.array([free[name][0] > 0 for name in self.names])
        lo = np.array([free[name][0] for name in self.names], dtype=float)
        hi = np.array([free[name][1] for name in self.names], dtype=float)
        self.lower = np.where(self.log, np.log(np.where(self.log, lo, 1.0)), lo)
        self.upper = np.where(self.log, np.log(np.where(self.log, hi, 1.0)), hi)

    def initial(self, start: Optional[Dict[str, float]] = None) -> np.ndarray:
        # geometric mean of the bounds in log coordinates, midpoint otherwise
        x = 0.5 * (self.lower + self.upper)
        for j, name in enumerate(self.names):
            if start and name in start:
                x[j] = math.log(start[name]) if self.log[j] else start[name]
        return x

    def values(self, x: np.ndarray) -> Dict[str, float]:
        p = np.where(self.log, np.exp(x), x)
        return {name: float(v) for name, v in zip(self.names, p)}

    def derivative(self, x: np.ndarray) -> np.ndarray:
        """dp/dx per coordinate."""
        return np.where(self.log, np.exp(x), 1.0)


def _central_jacobian(residuals, x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Central differences in the fitted coordinates x (log p where the
    parameter is log-scaled) with step 1e-6 max(|x_j|, 1), clipped to the bounds."""
    base = residuals(x)
    jac = np.empty((base.size, x.size))
    for j in range(x.size):
        h = 1e-6 * max(abs(x[j]), 1.0)
        plus, minus = x.copy(), x.copy()
        plus[j] = min(x[j] + h, upper[j])
        minus[j] = max(x[j] - h, lower[j])
        jac[:, j] = (residuals(plus) - residuals(minus)) / (plus[j] - minus[j])
    return jac


def fit(problem: FitProblem, max_iterations: int = 200, strict: bool = False) -> FitResult:
    """Trust-region least squares over the free parameters.

    A rank-deficient Jacobian at the solution sets ``singular_jacobian``;
    with ``strict`` it raises SingularJacobianError instead.
    """
    report = problem.validate()
    if not report['valid']:
        raise ParameterDomainError("; ".join(report['issues']), fields=sorted(problem.free))
    for warning in report['warnings']:
        logger.warning(warning)

    scaling = _Scaling(problem.free)

    def residuals(x: np.ndarray) -> np.ndarray:
        return problem.residuals(scaling.values(x))

    x0 = scaling.initial(problem.initial)
    result = optimize.least_squares(
        residuals, x0,
        jac=lambda x: _central_jacobian(residuals, x, scaling.lower, scaling.upper),
        bounds=(scaling.lower, scaling.upper),
        method='trf',
        xtol=STEP_TOLERANCE,
        gtol=GRADIENT_TOLERANCE,
        ftol=1e-12,
        max_nfev=max_iterations,
    )

    jac = result.jac
    singular_values = np.linalg.svd(jac, compute_uv=False)
    smallest = singular_values[-1] if singular_values.size else 0.0
    condition = math.inf if smallest == 0 else float(singular_values[0] / smallest)
    singular = condition > SINGULAR_CONDITION
    values = scaling.values(result.x)

    at_bounds = [name for name, x, lo, hi in zip(scaling.names, result.x, scaling.lower, scaling.upper)
                 if abs(x - lo) <= 1e-9 * max(abs(lo), 1.0) or abs(x - hi) <= 1e-9 * max(abs(hi), 1.0)]

    covariance = None
    m, n = jac.shape
    if not singular and m > n:
        sigma2 = float(result.fun @ result.fun) / (m - n)
        cov_x = np.linalg.inv(jac.T @ jac) * sigma2
        d = scaling.derivative(result.x)
        covariance = cov_x * np.outer(d, d)

    logger.info("fit %s: %d evaluations, cost %.3e, condition %.3e",
                problem.model.value, result.nfev, result.cost, condition)
    if singular:
        logger.warning("fit %s: Jacobian is rank deficient (condition %.3e)", problem.model.value, condition)
        if strict:
            raise SingularJacobianError("Observations cannot identify the free parameters",
                                        condition_number=condition, free=list(problem.free))

    residual_list = [float(v) for v in result.fun]
    return FitResult(
        fitted_values=values,
        residual_norm=float(np.linalg.norm(result.fun)),
        per_point_residuals=residual_list,
        convergence={
            'converged': bool(result.success),
            'status': int(result.status),
            'iterations': int(result.nfev),
            'max_iterations': max_iterations,
            'singular_jacobian': bool(singular),
            'at_bounds': at_bounds,
            'residual_scale': problem.residual_scale(),
        },
        condition_number=condition,
        covariance_estimate=covariance,
    )


def synthetic_observations(model: Any, params: MaterialParameters, radii: Sequence[float],
                           noise: float = 0.0, seed: Optional[int] = None,
                           weighting: str = 'uniform') -> pd.DataFrame:
    """T_w at each radius, optionally with multiplicative Gaussian noise of relative size ``noise``.

    ``weighting='relative'`` sets weight 1 / T_w^2, which turns the objective
    into a sum of squared relative errors.
    """
    if weighting not in WEIGHTINGS:
        raise DomainError(f"Unknown weighting: {weighting}", choices=list(WEIGHTINGS))
    values = np.array([stiffness(model, params, float(R)).T_w for R in radii])
    if noise > 0:
        rng = np.random.default_rng(seed)
        values = values * (1.0 + noise * rng.standard_normal(values.size))
    weight = 1.0 / values ** 2 if weighting == 'relative' else 1.0
    return pd.DataFrame({'R': np.asarray(radii, dtype=float), 'T_w': values, 'weight': weight})


# --- classical Cosserat diagnostics -----------------------------------------------------

CoefficientInput = Union[ClassicalCosseratCoefficients, MaterialParameters, Dict[str, float]]


def _classical(coeffs: CoefficientInput) -> ClassicalCosseratCoefficients:
    if isinstance(coeffs, ClassicalCosseratCoefficients):
        return coeffs
    if isinstance(coeffs, dict):
        coeffs = MaterialParameters.from_dict(coeffs)
    return classical_from_dislocation(coeffs.a1, coeffs.a2, coeffs.a3, coeffs.mu, coeffs.Lc)


def lakes_omega(coeffs: CoefficientInput, mu_macro: float, mu_c: float, R: float) -> LakesDiagnostics:
    """Cosserat torsional stiffness relative to mu_macro * I_p in the classical notation."""
    classical = _classical(coeffs)
    total = classical.total()
    if not total > 0:
        raise DomainError("alpha + beta + gamma must be positive", total=total)
    if not R > 0:
        raise DomainError("Radius must be positive", R=R)
    if not mu_macro > 0 or mu_c < 0:
        raise ParameterDomainError("mu_macro must be positive and mu_c nonnegative",
                                   fields=['mu_macro', 'mu_c'])

    torsion = classical.beta + classical.gamma
    ell_t = math.sqrt(torsion / (2.0 * mu_macro))
    psi = torsion / total
    p = math.inf if math.isinf(mu_c) else math.sqrt(4.0 * mu_c / total)
    chi = 0.5 * specfun.polar_ratio(p * R)
    n = 1.0 if math.isinf(mu_c) else math.sqrt(mu_c / (mu_macro + mu_c))

    pole = 1.0 - psi * chi
    if pole == 0:
        raise DomainError("Omega has a pole at 1 - Psi chi = 0", Psi=psi, chi=chi)
    omega = 1.0 + 6.0 * (ell_t / R) ** 2 * (1.0 - 4.0 / 3.0 * psi * chi) / pole
    return LakesDiagnostics(ell_t=ell_t, Psi=psi, N=n, Omega=omega, chi=chi, p=p)


def lakes_intercepts(params: MaterialParameters) -> Dict[str, float]:
    """T_w / R^2 intercepts at R^2 -> 0 for mu_c -> 0 (ell_a) and mu_c -> inf (ell_b)."""
    a1, a3 = params.a1, params.a3
    scale = params.mu * params.Lc ** 2
    if not a1 + 8.0 * a3 > 0:
        raise ParameterDomainError("a1 + 8 a3 must be positive", fields=['a1', 'a3'])
    return {
        'ell_a': 12.0 * math.pi * scale * a1 * a3 / (a1 + 8.0 * a3),
        'ell_b': 1.5 * math.pi * a1 * scale,
    }


def size_effect_table(model: Any, params: MaterialParameters, R_grid: Sequence[float]) -> pd.DataFrame:
    """Rows (R, R^2, T_w, T_w / R^2, Omega) with Omega = T_w / (mu_macro I_p)."""
    radii = [float(R) for R in R_grid]
    if not radii or any(not R > 0 for R in radii):
        raise DomainError("Radius grid must be nonempty and positive")
    (mu_macro,) = params.require('mu_macro')
    rows = []
    for R in radii:
        t_w = stiffness(model, params, R).T_w
        rows.append({'R': R, 'R2': R * R, 'T_w': t_w, 'T_w_over_R2': t_w / (R * R),
                     'Omega': t_w / (mu_macro * polar_moment(R))})
    table = pd.DataFrame(rows)
    if ModelKind.parse(model) in (ModelKind.COSSERAT, ModelKind.INDETERMINATE_COUPLE_STRESS) \
            and params.a1 + 8.0 * params.a3 > 0:
        table.attrs.update(lakes_intercepts(params))
    return table


def check_fit_parameters(problem: FitProblem, values: Dict[str, float]) -> Dict[str, Any]:
    """Positivity report of the fitted parameter set."""
    return positive_definiteness_check(problem.parameters(values))
