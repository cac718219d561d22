"""Analytical torsion solutions of the generalized continua.

Every stiffness is returned per unit twist (T_c from the force stress, T_m
from the moment stress, T_w from the energy). The Bessel expressions are
written with the scaled ratios of ``core.specfun`` so they stay finite for
any Lc/R, and Lc = inf is accepted as a symbolic input that returns the
analytic limit (an infinite value for models that stiffen without bound).
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from core import specfun
from core.errors import DomainError, GridPointError, ParameterDomainError, UnsupportedModelError
from core.materials import MaterialParameters, reuss_macro
from core.models import (
    PROFILE_MODELS,
    ModelKind,
    RadialProfile,
    StiffnessTriple,
    polar_moment,
    resolve_model,
)

logger = logging.getLogger(__name__)

__all__ = [
    'ModelKind', 'StiffnessTriple', 'RadialProfile', 'BesselMode', 'ProfileSolution',
    'cauchy_stiffness', 'relaxed_micromorphic_stiffness', 'relaxed_micromorphic_mu_c_zero',
    'relaxed_conformal_limit', 'cosserat_stiffness', 'cosserat_mu_c_zero',
    'cosserat_conformal_limit', 'couple_stress_stiffness', 'hadjesfandiari_stiffness',
    'micromorphic_stiffness', 'micro_strain_stiffness', 'second_gradient_stiffness',
    'strain_gradient_stiffness', 'adhoc_stiffness', 'stiffness', 'profile_solution',
    'radial_profiles', 'stiffness_curve', 'sensitivity_sweep', 'limits',
]


def _check_radius(R: float):
    if not (R > 0) or math.isinf(R):
        raise DomainError("Radius must be positive and finite", R=R)


def _check_length(Lc: float):
    if math.isnan(Lc) or Lc < 0:
        raise ParameterDomainError("Lc must be nonnegative", fields=['Lc'])


def _wavenumber(f: float, Lc: float) -> float:
    """f / Lc with the conventions f = 0 -> 0, Lc = 0 -> inf, Lc = inf -> 0."""
    if f == 0 or math.isinf(Lc):
        return 0.0
    if Lc == 0:
        return math.inf
    return f / Lc


def _length_ratio_squared(Lc: float, R: float) -> float:
    return (Lc / R) ** 2


def _triple(kind: ModelKind, R: float, Lc: float, t_c: float, t_m: float, t_w: float) -> StiffnessTriple:
    Ip = polar_moment(R)
    return StiffnessTriple(T_c=t_c * Ip, T_m=t_m * Ip, T_w=t_w * Ip, model=kind, Lc=Lc)


@dataclass(frozen=True)
class _Ratios:
    rho2: float
    u: float
    s2: float

    @classmethod
    def at(cls, x: float) -> '_Ratios':
        return cls(
            rho2=specfun.second_order_ratio(x),
            u=specfun.polar_ratio(x),
            s2=specfun.second_order_ratio_over_square(x),
        )


# --- regular radial modes --------------------------------------------------

def _mode_shape(k: float, R: float, r: np.ndarray, derivative: int) -> np.ndarray:
    """Derivatives of 2 I1(k r) / (k r I0(k R)), the regular solution of r g'' + 3 g' = k^2 r g."""
    r = np.asarray(r, dtype=float)
    if k == 0:
        return np.ones_like(r) if derivative == 0 else np.zeros_like(r)
    if math.isinf(k):
        return np.zeros_like(r)
    X = k * R
    x = k * r
    base = specfun.bessel_i_quotient(0, 0.0, 0, X)
    out = np.empty_like(x)
    small = x < (1e-8 if derivative < 2 else 1e-4)
    big = ~small
    xs = x[small]
    xb = x[big]
    if derivative == 0:
        out[small] = (1.0 + xs ** 2 / 8.0) * base
        out[big] = 2.0 * specfun.bessel_i_quotient(1, xb, 0, X) / xb
    elif derivative == 1:
        out[small] = 2.0 * k * (xs / 8.0) * base
        out[big] = 2.0 * k * specfun.bessel_i_quotient(2, xb, 0, X) / xb
    elif derivative == 2:
        out[small] = k * k * (0.25 + xs ** 2 / 16.0) * base
        out[big] = k * k * (2.0 * specfun.bessel_i_quotient(1, xb, 0, X) / xb
                            - 6.0 * specfun.bessel_i_quotient(2, xb, 0, X) / xb ** 2)
    else:
        raise DomainError(f"Unsupported derivative order: {derivative}")
    return out


@dataclass(frozen=True)
class BesselMode:
    """g(r) = offset + coefficient * 2 I1(k r) / (k r I0(k R))."""
    offset: float
    coefficient: float
    k: float
    R: float

    def evaluate(self, r: Any, derivative: int = 0) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        shape = _mode_shape(self.k, self.R, np.atleast_1d(r), derivative)
        value = self.coefficient * shape
        if derivative == 0:
            value = value + self.offset
        return value.reshape(r.shape) if r.ndim else value[0]

    def boundary_value(self) -> float:
        return float(self.evaluate(self.R))


@dataclass(frozen=True)
class ProfileSolution:
    model: ModelKind
    R: float
    g_p: BesselMode
    g_m: BesselMode

    def evaluator(self, r: np.ndarray, derivative: int = 0):
        return self.g_p.evaluate(r, derivative), self.g_m.evaluate(r, derivative)

    def sample(self, n_samples: int) -> RadialProfile:
        radii = np.linspace(0.0, self.R, n_samples)
        g_p, g_m = self.evaluator(radii)
        return RadialProfile.from_sum_difference(radii, g_p, g_m, self.model,
                                                 evaluator=self.evaluator)


def _constant_mode(value: float, R: float) -> BesselMode:
    return BesselMode(offset=value, coefficient=0.0, k=0.0, R=R)


# --- Cauchy ------------------------------------------------------------------

def cauchy_stiffness(mu_macro: float, R: float, model: ModelKind = ModelKind.CAUCHY,
                     Lc: Optional[float] = None) -> StiffnessTriple:
    _check_radius(R)
    if not mu_macro > 0:
        raise ParameterDomainError("mu_macro must be positive", fields=['mu_macro'])
    return _triple(model, R, Lc, mu_macro, 0.0, mu_macro)


# --- relaxed micromorphic ----------------------------------------------------

def _meso_moduli(params: MaterialParameters):
    mu_e, mu_micro = params.require('mu_e', 'mu_micro')
    if not mu_e > 0 or not mu_micro > 0:
        raise ParameterDomainError("mu_e and mu_micro must be positive", fields=['mu_e', 'mu_micro'])
    mu_macro = reuss_macro(mu_e, mu_micro)
    if math.isinf(mu_micro):
        eps = 0.0
    else:
        eps = mu_e / (mu_e + mu_micro)
    return mu_e, mu_micro, mu_macro, eps, 1.0 - eps


def _relaxed_wavenumbers(params: MaterialParameters, mu_e: float, mu_micro: float):
    a1, a3, mu = params.a1, params.a3, params.mu
    f2 = math.sqrt(2.0 * (mu_e + mu_micro) / (a1 * mu))
    f1 = math.sqrt(6.0 * params.mu_c / ((a1 + 2.0 * a3) * mu))
    return _wavenumber(f2, params.Lc), _wavenumber(f1, params.Lc)


def _relaxed_constants(params: MaterialParameters, R: float):
    """Integration constants of the regular solution fitted to the moment-free boundary."""
    mu_e, mu_micro, mu_macro, eps, eta = _meso_moduli(params)
    a1, a3 = params.a1, params.a3
    k, h = _relaxed_wavenumbers(params, mu_e, mu_micro)
    rx = _Ratios.at(k * R)
    ry = _Ratios.at(h * R)

    if k == 0 and a3 == 0:
        # Lc = inf with conformal curvature: only the ratio h / k survives.
        t = 3.0 * params.mu_c / (mu_e + mu_micro)
        A = -3.0 * eta * t / (1.0 + 3.0 * t)
        B = 3.0 * eta / (1.0 + 3.0 * t)
    else:
        m22 = 4.0 * (a1 + 2.0 * a3) * ry.rho2 + (a1 + 8.0 * a3) * ry.u
        det = (4.0 * rx.rho2 * m22 + 12.0 * (a1 + 2.0 * a3) * rx.u * ry.rho2
               + 24.0 * a3 * rx.u * ry.u)
        A = -3.0 * eta * (4.0 * (a1 + 2.0 * a3) * ry.rho2 + 8.0 * a3 * ry.u) / det
        B = 12.0 * a1 * eta * rx.rho2 / det
    return {
        'mu_e': mu_e, 'mu_micro': mu_micro, 'mu_macro': mu_macro, 'eps': eps, 'eta': eta,
        'k': k, 'h': h, 'rx': rx, 'ry': ry, 'A': A, 'B': B,
    }


def _check_relaxed(params: MaterialParameters):
    if not params.a1 > 0:
        raise ParameterDomainError("a1 must be positive for the relaxed micromorphic model",
                                   fields=['a1'])
    if not params.a1 + 2.0 * params.a3 > 0:
        raise ParameterDomainError("a1 + 2 a3 must be positive", fields=['a1', 'a3'])
    if params.mu_c < 0:
        raise ParameterDomainError("mu_c must be nonnegative", fields=['mu_c'])
    _check_length(params.Lc)


def relaxed_micromorphic_stiffness(params: MaterialParameters, R: float,
                                   model: ModelKind = ModelKind.RELAXED_MICROMORPHIC) -> StiffnessTriple:
    _check_radius(R)
    _check_relaxed(params)
    if params.mu_c == 0:
        logger.debug("mu_c = 0: relaxed micromorphic symmetric-stress branch")
        return relaxed_micromorphic_mu_c_zero(params, R, model=model)
    mu_e, mu_micro, mu_macro, _, _ = _meso_moduli(params)
    if math.isinf(mu_micro):
        logger.debug("mu_micro = inf: relaxed micromorphic model reduces to Cosserat")
        return cosserat_stiffness(params.replace(mu_macro=mu_e), R, model=model)
    if params.Lc == 0:
        return _triple(model, R, 0.0, mu_macro, 0.0, mu_macro)

    c = _relaxed_constants(params, R)
    A, B = c['A'], c['B']
    s2x, s2y = c['rx'].s2, c['ry'].s2
    mu_c = params.mu_c
    t_c = mu_macro + 8.0 * mu_e * A * s2x + 8.0 * mu_c * B * s2y
    t_m = -8.0 * (mu_e + mu_micro) * A * s2x - 8.0 * mu_c * B * s2y
    t_w = mu_macro - 8.0 * mu_micro * A * s2x
    return _triple(model, R, params.Lc, t_c, t_m, t_w)


def relaxed_micromorphic_mu_c_zero(params: MaterialParameters, R: float,
                                   model: ModelKind = ModelKind.RELAXED_SYMMETRIC_STRESS) -> StiffnessTriple:
    """Symmetric force stresses: the skew part decouples and only the a1/a3 balance is left."""
    _check_radius(R)
    a1, a3 = params.a1, params.a3
    if not a1 > 0:
        raise ParameterDomainError("a1 must be positive", fields=['a1'])
    if not a1 + 8.0 * a3 > 0:
        raise ParameterDomainError("a1 + 8 a3 must be positive", fields=['a1', 'a3'])
    _check_length(params.Lc)
    mu_e, mu_micro, mu_macro, _, eta = _meso_moduli(params)
    if params.Lc == 0 or a3 == 0:
        return _triple(model, R, params.Lc, mu_macro, 0.0, mu_macro)

    k, _ = _relaxed_wavenumbers(params.replace(mu_c=0.0), mu_e, mu_micro)
    rx = _Ratios.at(k * R)
    det = 4.0 * rx.rho2 * (a1 + 8.0 * a3) + 24.0 * a3 * rx.u
    A = -24.0 * eta * a3 / det
    v1 = (a1 + 2.0 * a3) / (a1 + 8.0 * a3)
    t_w = mu_macro + 48.0 * mu_micro * eta * a3 * rx.s2 / ((a1 + 8.0 * a3) * (1.0 - v1 * rx.u))
    t_c = mu_macro + 8.0 * mu_e * A * rx.s2
    t_m = -8.0 * (mu_e + mu_micro) * A * rx.s2
    return _triple(model, R, params.Lc, t_c, t_m, t_w)


def relaxed_conformal_limit(params: MaterialParameters, R: float) -> float:
    """Lc -> inf energy stiffness of the relaxed model with a3 = 0."""
    _check_radius(R)
    mu_e, mu_micro = params.require('mu_e', 'mu_micro')
    mu_c = params.mu_c
    if math.isinf(mu_c):
        return mu_micro * polar_moment(R)
    if math.isinf(mu_micro):
        return (9.0 * mu_c + mu_e) * polar_moment(R)
    stiff = 9.0 * mu_c + mu_e
    return mu_micro * stiff / (stiff + mu_micro) * polar_moment(R)


# --- Cosserat ------------------------------------------------------------------

def _check_cosserat(a1: float, a3: float, mu_c: float, Lc: float):
    if not a1 > 0:
        raise ParameterDomainError("a1 must be positive for the Cosserat model", fields=['a1'])
    if not a1 + 2.0 * a3 > 0:
        raise ParameterDomainError("a1 + 2 a3 must be positive", fields=['a1', 'a3'])
    if mu_c < 0:
        raise ParameterDomainError("mu_c must be nonnegative", fields=['mu_c'])
    _check_length(Lc)


def _cosserat_wavenumber(mu: float, mu_c: float, a1: float, a3: float, Lc: float) -> float:
    f1 = math.sqrt(6.0 * mu_c / ((a1 + 2.0 * a3) * mu))
    return _wavenumber(f1, Lc)


def _cosserat_coefficient(a1: float, a3: float, ry: _Ratios) -> float:
    return 3.0 * a1 / (a1 + 8.0 * a3 + 3.0 * a1 * ry.rho2)


def _cosserat_parts(mu: float, mu_c: float, a1: float, a3: float, Lc: float, R: float):
    """Size-effect parts (dT_c, T_m, dT_w) per unit polar moment."""
    if Lc == 0:
        return 0.0, 0.0, 0.0
    if mu_c == 0:
        growth = 24.0 * mu * a1 * a3 / (a1 + 8.0 * a3)
        if math.isinf(Lc):
            t_m = math.inf if a3 > 0 else 0.0
        else:
            t_m = growth * _length_ratio_squared(Lc, R)
        return 0.0, t_m, t_m
    if math.isinf(Lc):
        B = 3.0 * a1 / (a1 + 8.0 * a3)
        if a3 > 0:
            return mu_c * B, math.inf, math.inf
        return 3.0 * mu_c, 6.0 * mu_c, 9.0 * mu_c

    h = _cosserat_wavenumber(mu, mu_c, a1, a3, Lc)
    ry = _Ratios.at(h * R)
    D = a1 + 8.0 * a3 + 3.0 * a1 * ry.rho2
    B = 3.0 * a1 / D
    lr2 = _length_ratio_squared(Lc, R)
    d_c = 8.0 * mu_c * B * ry.s2
    t_m = 8.0 * a1 * mu * lr2 * (3.0 * a3 + (a1 - a3) * ry.rho2) / D
    d_w = 12.0 * mu * lr2 * a1 * (a1 * ry.rho2 + 2.0 * a3) / D
    return d_c, t_m, d_w


def cosserat_stiffness(params: MaterialParameters, R: float,
                       model: ModelKind = ModelKind.COSSERAT) -> StiffnessTriple:
    _check_radius(R)
    (mu_macro,) = params.require('mu_macro')
    _check_cosserat(params.a1, params.a3, params.mu_c, params.Lc)
    if params.mu_c == 0:
        logger.debug("mu_c = 0: Cosserat symmetric-stress branch")
        return cosserat_mu_c_zero(params, R, model=model)
    d_c, t_m, d_w = _cosserat_parts(params.mu, params.mu_c, params.a1, params.a3, params.Lc, R)
    return _triple(model, R, params.Lc, mu_macro + d_c, t_m, mu_macro + d_w)


def cosserat_mu_c_zero(params: MaterialParameters, R: float,
                       model: ModelKind = ModelKind.COSSERAT) -> StiffnessTriple:
    """T_w = [mu_macro + 24 mu a1 a3 / (a1 + 8 a3) (Lc/R)^2] I_p."""
    _check_radius(R)
    (mu_macro,) = params.require('mu_macro')
    _check_cosserat(params.a1, params.a3, 0.0, params.Lc)
    _, t_m, d_w = _cosserat_parts(params.mu, 0.0, params.a1, params.a3, params.Lc, R)
    return _triple(model, R, params.Lc, mu_macro, t_m, mu_macro + d_w)


def cosserat_conformal_limit(params: MaterialParameters, R: float) -> float:
    _check_radius(R)
    (mu_macro,) = params.require('mu_macro')
    return (9.0 * params.mu_c + mu_macro) * polar_moment(R)


# --- couple stress and gradient models -----------------------------------------

def couple_stress_stiffness(mu_macro: float, mu: float, a1: float, Lc: float, R: float,
                            model: ModelKind = ModelKind.INDETERMINATE_COUPLE_STRESS) -> StiffnessTriple:
    _check_radius(R)
    _check_length(Lc)
    if not mu_macro > 0:
        raise ParameterDomainError("mu_macro must be positive", fields=['mu_macro'])
    t_m = 3.0 * a1 * mu * _length_ratio_squared(Lc, R) if Lc > 0 else 0.0
    return _triple(model, R, Lc, mu_macro, t_m, mu_macro + t_m)


def hadjesfandiari_stiffness(mu_macro: float, ell: float, R: float) -> StiffnessTriple:
    """Couple stress with a1 mu Lc^2 = 8 eta and ell^2 = eta / mu_macro."""
    _check_radius(R)
    t_m = 24.0 * mu_macro * (ell / R) ** 2
    return _triple(ModelKind.INDETERMINATE_COUPLE_STRESS, R, None, mu_macro, t_m, mu_macro + t_m)


def second_gradient_stiffness(mu_macro: float, mu: float, a1: float, a2: float, Lc: float, R: float,
                              model: ModelKind = ModelKind.SECOND_GRADIENT) -> StiffnessTriple:
    _check_radius(R)
    _check_length(Lc)
    if not mu_macro > 0:
        raise ParameterDomainError("mu_macro must be positive", fields=['mu_macro'])
    t_m = 2.0 * mu * (a1 + 3.0 * a2) * _length_ratio_squared(Lc, R) if Lc > 0 else 0.0
    return _triple(model, R, Lc, mu_macro, t_m, mu_macro + t_m)


def strain_gradient_stiffness(mu_macro: float, mu: float, a1: float, Lc: float, R: float) -> StiffnessTriple:
    return second_gradient_stiffness(mu_macro, mu, a1, 0.0, Lc, R, model=ModelKind.STRAIN_GRADIENT)


# --- micromorphic and micro-strain ---------------------------------------------

def _micro_strain_wavenumber(mu: float, mu_e: float, mu_micro: float, a: float, Lc: float) -> float:
    f2 = math.sqrt(2.0 * (mu_e + mu_micro) / (a * mu))
    return _wavenumber(f2, Lc)


def _micro_strain_excess(mu: float, mu_e: float, mu_micro: float, eps: float,
                         a: float, Lc: float, R: float) -> float:
    if Lc == 0:
        return 0.0
    k = _micro_strain_wavenumber(mu, mu_e, mu_micro, a, Lc)
    rx = _Ratios.at(k * R)
    return 8.0 * mu_e * eps * rx.s2 / (1.0 + rx.rho2)


def micro_strain_stiffness(params: MaterialParameters, R: float,
                           model: ModelKind = ModelKind.MICRO_STRAIN) -> StiffnessTriple:
    _check_radius(R)
    _check_length(params.Lc)
    if not params.a1 > 0:
        raise ParameterDomainError("a1 must be positive for the micro-strain model", fields=['a1'])
    mu_e, mu_micro, mu_macro, eps, _ = _meso_moduli(params)
    t = mu_macro + _micro_strain_excess(params.mu, mu_e, mu_micro, eps, params.a1, params.Lc, R)
    return _triple(model, R, params.Lc, t, 0.0, t)


def micromorphic_stiffness(params: MaterialParameters, R: float,
                           model: ModelKind = ModelKind.MICROMORPHIC) -> StiffnessTriple:
    _check_radius(R)
    _check_length(params.Lc)
    if not params.a1 > 0:
        raise ParameterDomainError("a1 must be positive for the micromorphic model", fields=['a1'])
    if params.a2 < 0 or params.mu_c < 0:
        raise ParameterDomainError("a2 and mu_c must be nonnegative", fields=['a2', 'mu_c'])
    if params.a2 == 0:
        logger.debug("a2 = 0: micromorphic model reduces to micro-strain")
        return micro_strain_stiffness(params, R, model=model)

    mu_e, mu_micro, mu_macro, eps, _ = _meso_moduli(params)
    Lc = params.Lc
    if Lc == 0:
        return _triple(model, R, 0.0, mu_macro, 0.0, mu_macro)
    skew = 0.0
    if params.mu_c > 0:
        f1 = math.sqrt(2.0 * params.mu_c / (params.a2 * params.mu))
        ry = _Ratios.at(_wavenumber(f1, Lc) * R)
        skew = 8.0 * params.mu_c * ry.s2 / (1.0 + ry.rho2)
    t_c = mu_macro + skew + _micro_strain_excess(params.mu, mu_e, mu_micro, eps, params.a1, Lc, R)
    t_m = math.inf if math.isinf(Lc) else 4.0 * params.a2 * params.mu * _length_ratio_squared(Lc, R)
    return _triple(model, R, Lc, t_c, t_m, t_c + t_m)


# --- ad-hoc -----------------------------------------------------------------------

def adhoc_stiffness(params: MaterialParameters, R: float,
                    model: ModelKind = ModelKind.AD_HOC) -> StiffnessTriple:
    """Cosserat curvature on the skew part (a1, a3) plus micro-strain gradient energy (a4)."""
    _check_radius(R)
    _check_cosserat(params.a1, params.a3, params.mu_c, params.Lc)
    if not params.a4 > 0:
        raise ParameterDomainError("a4 must be positive for the ad-hoc model", fields=['a4'])
    mu_e, mu_micro, mu_macro, eps, _ = _meso_moduli(params)
    d_c, t_m, d_w = _cosserat_parts(params.mu, params.mu_c, params.a1, params.a3, params.Lc, R)
    strain = _micro_strain_excess(params.mu, mu_e, mu_micro, eps, params.a4, params.Lc, R)
    return _triple(model, R, params.Lc, mu_macro + d_c + strain, t_m, mu_macro + d_w + strain)


# --- dispatch -----------------------------------------------------------------------

def stiffness(model: Any, params: MaterialParameters, R: float) -> StiffnessTriple:
    """Stiffness triple of ``model`` at the length scale ``params.Lc``."""
    kind = ModelKind.parse(model)
    target = resolve_model(kind)
    if target is not kind:
        logger.debug("%s delegates to %s", kind.value, target.value)

    if target is ModelKind.CAUCHY:
        (mu_macro,) = params.require('mu_macro')
        return cauchy_stiffness(mu_macro, R, model=kind, Lc=params.Lc)
    if target is ModelKind.RELAXED_MICROMORPHIC:
        return relaxed_micromorphic_stiffness(params, R, model=kind)
    if target is ModelKind.RELAXED_CONFORMAL:
        return relaxed_micromorphic_stiffness(params.replace(a3=0.0), R, model=kind)
    if target is ModelKind.RELAXED_SYMMETRIC_STRESS:
        return relaxed_micromorphic_mu_c_zero(params.replace(mu_c=0.0), R, model=kind)
    if target is ModelKind.COSSERAT:
        return cosserat_stiffness(params, R, model=kind)
    if target is ModelKind.COSSERAT_CONFORMAL:
        return cosserat_stiffness(params.replace(a3=0.0), R, model=kind)
    if target is ModelKind.INDETERMINATE_COUPLE_STRESS:
        (mu_macro,) = params.require('mu_macro')
        return couple_stress_stiffness(mu_macro, params.mu, params.a1, params.Lc, R, model=kind)
    if target is ModelKind.MICROMORPHIC:
        return micromorphic_stiffness(params, R, model=kind)
    if target is ModelKind.MICROMORPHIC_REDUCED_CURVATURE:
        return micro_strain_stiffness(params, R, model=kind)
    if target is ModelKind.MICRO_STRAIN:
        return micro_strain_stiffness(params, R, model=kind)
    if target is ModelKind.SECOND_GRADIENT:
        (mu_macro,) = params.require('mu_macro')
        return second_gradient_stiffness(mu_macro, params.mu, params.a1, params.a2, params.Lc, R,
                                         model=kind)
    if target is ModelKind.STRAIN_GRADIENT:
        (mu_macro,) = params.require('mu_macro')
        return second_gradient_stiffness(mu_macro, params.mu, params.a1, 0.0, params.Lc, R,
                                         model=kind)
    if target is ModelKind.AD_HOC:
        return adhoc_stiffness(params, R, model=kind)
    raise UnsupportedModelError(f"No closed form for model: {kind.value}", model=kind.value)


# --- profiles ------------------------------------------------------------------------

def _micro_strain_mode(params: MaterialParameters, a: float, R: float) -> BesselMode:
    mu_e, mu_micro, _, eps, _ = _meso_moduli(params)
    k = _micro_strain_wavenumber(params.mu, mu_e, mu_micro, a, params.Lc)
    rx = _Ratios.at(k * R)
    return BesselMode(offset=-eps, coefficient=eps / (1.0 + rx.rho2), k=k, R=R)


def _cosserat_mode(params: MaterialParameters, R: float) -> BesselMode:
    a1, a3 = params.a1, params.a3
    h = _cosserat_wavenumber(params.mu, params.mu_c, a1, a3, params.Lc)
    B = _cosserat_coefficient(a1, a3, _Ratios.at(h * R))
    return BesselMode(offset=1.0, coefficient=-B, k=h, R=R)


def profile_solution(model: Any, params: MaterialParameters, R: float) -> ProfileSolution:
    """Closed-form g_p, g_m of a profile-bearing model (regular branch only)."""
    _check_radius(R)
    kind = ModelKind.parse(model)
    if kind not in PROFILE_MODELS:
        raise UnsupportedModelError(f"Model {kind.value} has no radial profiles", model=kind.value)
    target = resolve_model(kind)

    if target in (ModelKind.RELAXED_MICROMORPHIC, ModelKind.RELAXED_CONFORMAL,
                  ModelKind.RELAXED_SYMMETRIC_STRESS):
        if target is ModelKind.RELAXED_CONFORMAL:
            params = params.replace(a3=0.0)
        elif target is ModelKind.RELAXED_SYMMETRIC_STRESS:
            params = params.replace(mu_c=0.0)
        _check_relaxed(params)
        c = _relaxed_constants(params, R)
        g_m = BesselMode(offset=-c['eps'], coefficient=c['A'], k=c['k'], R=R)
        g_p = BesselMode(offset=1.0, coefficient=-c['B'], k=c['h'], R=R)
        return ProfileSolution(kind, R, g_p=g_p, g_m=g_m)

    if target in (ModelKind.COSSERAT, ModelKind.COSSERAT_CONFORMAL):
        if target is ModelKind.COSSERAT_CONFORMAL:
            params = params.replace(a3=0.0)
        _check_cosserat(params.a1, params.a3, params.mu_c, params.Lc)
        return ProfileSolution(kind, R, g_p=_cosserat_mode(params, R), g_m=_constant_mode(0.0, R))

    if target in (ModelKind.MICRO_STRAIN, ModelKind.MICROMORPHIC_REDUCED_CURVATURE) or \
            (target is ModelKind.MICROMORPHIC and params.a2 == 0):
        return ProfileSolution(kind, R, g_p=_constant_mode(0.0, R),
                               g_m=_micro_strain_mode(params, params.a1, R))

    if target is ModelKind.MICROMORPHIC:
        f1 = math.sqrt(2.0 * params.mu_c / (params.a2 * params.mu))
        h = _wavenumber(f1, params.Lc)
        ry = _Ratios.at(h * R)
        g_p = BesselMode(offset=1.0, coefficient=-1.0 / (1.0 + ry.rho2), k=h, R=R)
        return ProfileSolution(kind, R, g_p=g_p, g_m=_micro_strain_mode(params, params.a1, R))

    if target is ModelKind.AD_HOC:
        _check_cosserat(params.a1, params.a3, params.mu_c, params.Lc)
        return ProfileSolution(kind, R, g_p=_cosserat_mode(params, R),
                               g_m=_micro_strain_mode(params, params.a4, R))

    raise UnsupportedModelError(f"Model {kind.value} has no radial profiles", model=kind.value)


def radial_profiles(model: Any, params: MaterialParameters, R: float,
                    n_samples: int = 101) -> RadialProfile:
    if n_samples < 2:
        raise DomainError("Need at least two profile samples", n_samples=n_samples)
    return profile_solution(model, params, R).sample(n_samples)


# --- sweeps and limits -------------------------------------------------------------------

def _check_grid(Lc_grid: Sequence[float]) -> List[float]:
    grid = [float(v) for v in Lc_grid]
    if not grid:
        raise DomainError("Lc grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise DomainError("Lc grid must be sorted ascending")
    for value in grid:
        _check_length(value)
    return grid


def stiffness_curve(model: Any, params: MaterialParameters, R: float,
                    Lc_grid: Sequence[float], max_workers: int = 1) -> List[StiffnessTriple]:
    grid = _check_grid(Lc_grid)

    def evaluate(item):
        index, Lc = item
        try:
            return stiffness(model, params.replace(Lc=Lc), R)
        except Exception as exc:
            raise GridPointError(index, exc) from exc

    if max_workers <= 1 or len(grid) < 2:
        return [evaluate(item) for item in enumerate(grid)]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(evaluate, enumerate(grid)))


def sensitivity_sweep(model: Any, params: MaterialParameters, R: float, Lc_grid: Sequence[float],
                      name: str, values: Iterable[float],
                      max_workers: int = 1) -> Dict[float, List[StiffnessTriple]]:
    """One stiffness curve per value of the parameter ``name``."""
    if name not in MaterialParameters.field_names():
        raise ParameterDomainError(f"Unknown parameter: {name}", fields=[name])
    curves = {}
    for value in values:
        varied = params.with_overrides(**{name: float(value)})
        curves[float(value)] = stiffness_curve(model, varied, R, Lc_grid, max_workers=max_workers)
    return curves


def growth_coefficient(model: Any, params: MaterialParameters) -> float:
    """c with T_w ~ c (Lc/R)^2 I_p as Lc -> inf, zero for bounded models."""
    target = resolve_model(model)
    a1, a2, a3, mu = params.a1, params.a2, params.a3, params.mu
    if target in (ModelKind.COSSERAT, ModelKind.AD_HOC):
        return 24.0 * mu * a1 * a3 / (a1 + 8.0 * a3)
    if target is ModelKind.INDETERMINATE_COUPLE_STRESS:
        return 3.0 * a1 * mu
    if target is ModelKind.SECOND_GRADIENT:
        return 2.0 * mu * (a1 + 3.0 * a2)
    if target is ModelKind.STRAIN_GRADIENT:
        return 2.0 * mu * a1
    if target is ModelKind.MICROMORPHIC:
        return 4.0 * a2 * mu
    return 0.0


def limits(model: Any, params: MaterialParameters, R: float) -> Dict[str, Any]:
    kind = ModelKind.parse(model)
    small = stiffness(kind, params.replace(Lc=0.0), R)
    large = stiffness(kind, params.replace(Lc=math.inf), R)
    bounded = math.isfinite(large.T_w)
    return {
        'model': kind.value,
        'R': R,
        'Lc_zero': small.T_w,
        'Lc_inf': large.T_w,
        'bounded': bounded,
        'growth_coefficient': 0.0 if bounded else growth_coefficient(kind, params),
    }
