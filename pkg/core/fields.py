"""Three-dimensional fields of the torsion ansatz on an infinite circular cylinder.

All tensors are dense numpy arrays in the Cartesian frame (e1, e2, e3 = e_z).
Third-order moments are stored as m3[i, j, k], the coefficient of
d P_jk / d x_i in the energy variation. The ansatz is isochoric, so the
Lame-type lambda terms never contribute and are left out of the stresses.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from core.errors import DomainError, ParameterDomainError, SingularityError, UnsupportedModelError
from core.materials import MaterialParameters
from core.models import PROFILE_MODELS, ModelKind, RadialProfile, effective_model, resolve_model

logger = logging.getLogger(__name__)

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0

IDENTITY = np.eye(3)

GRADIENT_MODELS = frozenset({ModelKind.MICROMORPHIC, ModelKind.MICRO_STRAIN})
DISPLACEMENT_GRADIENT_MODELS = frozenset({ModelKind.SECOND_GRADIENT, ModelKind.STRAIN_GRADIENT})

# Special cases that share the field structure of their parent model.
STRUCTURAL_ALIASES = {
    ModelKind.RELAXED_CONFORMAL: ModelKind.RELAXED_MICROMORPHIC,
    ModelKind.RELAXED_SYMMETRIC_STRESS: ModelKind.RELAXED_MICROMORPHIC,
    ModelKind.COSSERAT_CONFORMAL: ModelKind.COSSERAT,
    ModelKind.MICROMORPHIC_REDUCED_CURVATURE: ModelKind.MICRO_STRAIN,
}

# unknown order used by boundary rows: (g_p, g_p', g_m, g_m')
STATE_ORDER = ('g_p', 'dg_p', 'g_m', 'dg_m')


# --- points and tensor algebra ---------------------------------------------------

@dataclass(frozen=True)
class Point:
    x1: float
    x2: float
    x3: float
    angle_hint: Optional[float] = field(default=None, compare=False, repr=False)

    @classmethod
    def cartesian(cls, x1: float, x2: float, x3: float) -> 'Point':
        return cls(float(x1), float(x2), float(x3))

    @classmethod
    def cylindrical(cls, r: float, phi: float, z: float) -> 'Point':
        if r < 0:
            raise DomainError("Radius must be nonnegative", r=r)
        return cls(r * math.cos(phi), r * math.sin(phi), float(z), angle_hint=float(phi))

    @property
    def r(self) -> float:
        return math.hypot(self.x1, self.x2)

    @property
    def phi(self) -> float:
        if self.angle_hint is not None:
            return self.angle_hint
        return math.atan2(self.x2, self.x1)

    @property
    def z(self) -> float:
        return self.x3

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])

    def to_cylindrical(self) -> Tuple[float, float, float]:
        return self.r, self.phi, self.z

    def shifted(self, axis: int, step: float) -> 'Point':
        coords = self.as_array()
        coords[axis] += step
        return Point(*coords)


def sym(T: np.ndarray) -> np.ndarray:
    return 0.5 * (T + T.T)


def skew(T: np.ndarray) -> np.ndarray:
    return 0.5 * (T - T.T)


def dev(T: np.ndarray) -> np.ndarray:
    return T - np.trace(T) / 3.0 * IDENTITY


def anti(v: np.ndarray) -> np.ndarray:
    """Skew matrix with anti(v) b = v x b."""
    return -np.einsum('ijk,k->ij', LEVI_CIVITA, np.asarray(v, dtype=float))


def axl(A: np.ndarray) -> np.ndarray:
    return np.array([A[2, 1], A[0, 2], A[1, 0]])


def orthogonal_decomposition(P: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(dev sym P, skew P, tr(P)/3 * 1), which sum back to P."""
    return dev(sym(P)), skew(P), np.trace(P) / 3.0 * IDENTITY


def cross(T: np.ndarray, v: np.ndarray) -> np.ndarray:
    """T x v = -T anti(v)."""
    return -T @ anti(v)


def cylindrical_basis(phi: float) -> np.ndarray:
    """Columns e_r, e_phi, e_z."""
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def to_cylindrical_components(T: np.ndarray, phi: float) -> np.ndarray:
    Q = cylindrical_basis(phi)
    if T.ndim == 2:
        return Q.T @ T @ Q
    return np.einsum('ai,bj,ck,abc->ijk', Q, Q, Q, T)


# --- chain rule ------------------------------------------------------------------

def position_jacobian(point: Point) -> np.ndarray:
    """d x_i / d(r, phi, z)_a."""
    r, phi = point.r, point.phi
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -r * s, 0.0], [s, r * c, 0.0], [0.0, 0.0, 1.0]])


def cylindrical_jacobian(point: Point, chain_order: int = 1):
    """Q1 = d(r, phi, z)/dx, and for order 2 also Q2[a, b, j, k] = sym(Q1_aj Q1_bk)
    and Q3[a, j, k] = d^2 (r, phi, z)_a / dx_j dx_k."""
    if chain_order not in (1, 2):
        raise DomainError(f"Unsupported chain order: {chain_order}", chain_order=chain_order)
    r = point.r
    if r == 0:
        raise SingularityError("Cylindrical coordinates are singular on the axis")
    phi = point.phi
    c, s = math.cos(phi), math.sin(phi)
    Q1 = np.array([[c, s, 0.0], [-s / r, c / r, 0.0], [0.0, 0.0, 1.0]])
    if chain_order == 1:
        return Q1
    Q2 = 0.5 * (np.einsum('aj,bk->abjk', Q1, Q1) + np.einsum('ak,bj->abjk', Q1, Q1))
    Q3 = np.zeros((3, 3, 3))
    Q3[0, :2, :2] = [[s * s / r, -s * c / r], [-s * c / r, c * c / r]]
    s2, c2 = math.sin(2 * phi), math.cos(2 * phi)
    Q3[1, :2, :2] = [[s2 / r ** 2, -c2 / r ** 2], [-c2 / r ** 2, -s2 / r ** 2]]
    return Q1, Q2, Q3


def chain_rule_gradient(cylindrical_derivatives: np.ndarray, point: Point) -> np.ndarray:
    """Cartesian gradient from derivatives along (r, phi, z); last axis is the coordinate."""
    return np.asarray(cylindrical_derivatives) @ cylindrical_jacobian(point, 1)


def chain_rule_hessian(first: np.ndarray, second: np.ndarray, point: Point) -> np.ndarray:
    """Cartesian Hessian of a scalar from its cylindrical first and second derivatives."""
    _, Q2, Q3 = cylindrical_jacobian(point, 2)
    return np.einsum('ab,abjk->jk', second, Q2) + np.einsum('a,ajk->jk', first, Q3)


# --- kinematics --------------------------------------------------------------------

def displacement(point: Point, twist_rate: float) -> np.ndarray:
    return twist_rate * np.array([-point.x2 * point.x3, point.x1 * point.x3, 0.0])


def displacement_gradient(point: Point, twist_rate: float) -> np.ndarray:
    t = twist_rate
    return np.array([
        [0.0, -t * point.x3, -t * point.x2],
        [t * point.x3, 0.0, t * point.x1],
        [0.0, 0.0, 0.0],
    ])


@dataclass
class Kinematics:
    """Symmetric and skew micro-distortion with their gradients at one point."""
    Du: np.ndarray
    S: np.ndarray
    A: np.ndarray
    dS: np.ndarray
    dA: np.ndarray

    @property
    def P(self) -> np.ndarray:
        return self.S + self.A

    @property
    def dP(self) -> np.ndarray:
        return self.dS + self.dA


def _radial_product_gradient(g: float, dg: float, point: Point, axis: int) -> np.ndarray:
    """Gradient of g(r) * x_axis."""
    phi = point.phi
    normal = np.array([math.cos(phi), math.sin(phi), 0.0])
    out = dg * normal * (point.x1, point.x2, point.x3)[axis]
    out[axis] += g
    return out


def ansatz_tensors(point: Point, twist_rate: float, g_p: float, g_m: float,
                   dg_p: float = 0.0, dg_m: float = 0.0, axial: bool = True) -> Kinematics:
    """S from g_m and A from g_p (plus the in-plane rotation when ``axial``)."""
    t = 0.5 * twist_rate
    x1, x2, x3 = point.x1, point.x2, point.x3
    S = np.zeros((3, 3))
    A = np.zeros((3, 3))
    S[0, 2] = S[2, 0] = t * g_m * x2
    S[1, 2] = S[2, 1] = -t * g_m * x1
    A[0, 2], A[2, 0] = -t * g_p * x2, t * g_p * x2
    A[1, 2], A[2, 1] = t * g_p * x1, -t * g_p * x1

    grad_m2 = _radial_product_gradient(g_m, dg_m, point, 1)
    grad_m1 = _radial_product_gradient(g_m, dg_m, point, 0)
    grad_p2 = _radial_product_gradient(g_p, dg_p, point, 1)
    grad_p1 = _radial_product_gradient(g_p, dg_p, point, 0)
    dS = np.zeros((3, 3, 3))
    dA = np.zeros((3, 3, 3))
    dS[:, 0, 2] = dS[:, 2, 0] = t * grad_m2
    dS[:, 1, 2] = dS[:, 2, 1] = -t * grad_m1
    dA[:, 0, 2], dA[:, 2, 0] = -t * grad_p2, t * grad_p2
    dA[:, 1, 2], dA[:, 2, 1] = t * grad_p1, -t * grad_p1

    if axial:
        A[0, 1], A[1, 0] = -twist_rate * x3, twist_rate * x3
        dA[2, 0, 1], dA[2, 1, 0] = -twist_rate, twist_rate
    return Kinematics(Du=displacement_gradient(point, twist_rate), S=S, A=A, dS=dS, dA=dA)


def _profile_values(profile: RadialProfile, r: float) -> Tuple[float, float, float, float]:
    g_p, g_m = profile.at(r, 0)
    dg_p, dg_m = profile.at(r, 1)
    return float(g_p), float(g_m), float(dg_p), float(dg_m)


def _target(model: Any, params: Optional[MaterialParameters] = None) -> ModelKind:
    if params is not None:
        return effective_model(model, params)[0]
    target = resolve_model(model)
    return STRUCTURAL_ALIASES.get(target, target)


def kinematics(model: Any, point: Point, twist_rate: float,
               profile: Optional[RadialProfile] = None,
               params: Optional[MaterialParameters] = None) -> Kinematics:
    kind = ModelKind.parse(model)
    target = _target(kind, params)
    if target in (ModelKind.CAUCHY, ModelKind.INDETERMINATE_COUPLE_STRESS) \
            or target in DISPLACEMENT_GRADIENT_MODELS:
        # no independent micro-distortion: split Du itself
        return ansatz_tensors(point, twist_rate, g_p=1.0, g_m=-1.0)
    if profile is None:
        raise DomainError(f"Model {kind.value} needs a radial profile", model=kind.value)
    g_p, g_m, dg_p, dg_m = _profile_values(profile, point.r)
    if target is ModelKind.MICRO_STRAIN:
        return ansatz_tensors(point, twist_rate, 0.0, g_m, 0.0, dg_m, axial=False)
    if target is ModelKind.COSSERAT:
        return ansatz_tensors(point, twist_rate, g_p, 0.0, dg_p, 0.0)
    return ansatz_tensors(point, twist_rate, g_p, g_m, dg_p, dg_m)


def micro_distortion(point: Point, twist_rate: float, profile: RadialProfile,
                     model: Any) -> np.ndarray:
    kind = ModelKind.parse(model)
    if kind not in PROFILE_MODELS:
        raise UnsupportedModelError(f"Model {kind.value} has no micro-distortion field",
                                    model=kind.value)
    return kinematics(kind, point, twist_rate, profile).P


def curl(dP: np.ndarray) -> np.ndarray:
    """Row-wise Curl from the gradient dP[m, i, n] = d P_in / d x_m."""
    return np.einsum('jmn,min->ij', LEVI_CIVITA, dP)


def curl_P(point: Point, twist_rate: float, profile: RadialProfile,
           model: Any = ModelKind.RELAXED_MICROMORPHIC) -> np.ndarray:
    """Curl of the micro-distortion; profile derivatives come from ``profile.at``."""
    return curl(kinematics(model, point, twist_rate, profile).dP)


# --- constitutive response -----------------------------------------------------------

@dataclass(frozen=True)
class Moduli:
    mu_e: float
    mu_micro: float
    mu_c: float
    mu: float
    a1: float
    a2: float
    a3: float
    a4: float
    Lc: float

    @property
    def curvature_scale(self) -> float:
        return self.mu * self.Lc ** 2


def moduli(model: Any, params: MaterialParameters) -> Tuple[ModelKind, Moduli]:
    """Effective model and the moduli its energy uses; mu_e carries mu_macro where
    the model has a single elastic scale."""
    target, params = effective_model(model, params)
    if math.isinf(params.Lc):
        raise DomainError("Field evaluation needs a finite Lc", Lc=params.Lc)
    if target in (ModelKind.RELAXED_MICROMORPHIC, ModelKind.MICROMORPHIC,
                  ModelKind.MICRO_STRAIN, ModelKind.AD_HOC):
        mu_e, mu_micro = params.require('mu_e', 'mu_micro')
        if math.isinf(mu_micro):
            raise DomainError("Field evaluation needs a finite mu_micro", mu_micro=mu_micro)
    else:
        (mu_e,) = params.require('mu_macro')
        mu_micro = math.inf
    return target, Moduli(mu_e=mu_e, mu_micro=mu_micro, mu_c=params.mu_c, mu=params.mu,
                          a1=params.a1, a2=params.a2, a3=params.a3, a4=params.a4, Lc=params.Lc)


def _curvature_moment(K: np.ndarray, c: Moduli, a1: float, a2: float, a3: float) -> np.ndarray:
    return c.curvature_scale * (a1 * dev(sym(K)) + a2 * skew(K) + a3 / 3.0 * np.trace(K) * IDENTITY)


def _curvature_energy(K: np.ndarray, c: Moduli, a1: float, a2: float, a3: float) -> float:
    return 0.5 * c.curvature_scale * (a1 * np.sum(dev(sym(K)) ** 2) + a2 * np.sum(skew(K) ** 2)
                                      + a3 / 3.0 * np.trace(K) ** 2)


def _responses(target: ModelKind, c: Moduli, kin: Kinematics):
    """(sigma_tilde, second-order moment or None, third-order moment or None)."""
    Du = kin.Du
    if target is ModelKind.CAUCHY:
        return 2.0 * c.mu_e * sym(Du), None, None
    if target is ModelKind.RELAXED_MICROMORPHIC:
        E = Du - kin.P
        sigma = 2.0 * c.mu_e * sym(E) + 2.0 * c.mu_c * skew(E)
        return sigma, _curvature_moment(curl(kin.dP), c, c.a1, c.a2, c.a3), None
    if target is ModelKind.COSSERAT:
        sigma = 2.0 * c.mu_e * sym(Du) + 2.0 * c.mu_c * skew(Du - kin.A)
        return sigma, _curvature_moment(curl(kin.dA), c, c.a1, c.a2, c.a3), None
    if target is ModelKind.INDETERMINATE_COUPLE_STRESS:
        return 2.0 * c.mu_e * sym(Du), _curvature_moment(curl(kin.dA), c, c.a1, 0.0, 0.0), None
    if target is ModelKind.MICROMORPHIC:
        E = Du - kin.P
        sigma = 2.0 * c.mu_e * sym(E) + 2.0 * c.mu_c * skew(E)
        return sigma, None, c.curvature_scale * (c.a1 * kin.dS + c.a2 * kin.dA)
    if target is ModelKind.MICRO_STRAIN:
        return 2.0 * c.mu_e * (sym(Du) - kin.S), None, c.curvature_scale * c.a1 * kin.dS
    if target in DISPLACEMENT_GRADIENT_MODELS:
        a2 = c.a2 if target is ModelKind.SECOND_GRADIENT else 0.0
        return 2.0 * c.mu_e * sym(Du), None, c.curvature_scale * (c.a1 * kin.dS + a2 * kin.dA)
    if target is ModelKind.AD_HOC:
        sigma = 2.0 * c.mu_e * (sym(Du) - kin.S) + 2.0 * c.mu_c * skew(Du - kin.A)
        return (sigma, _curvature_moment(curl(kin.dA), c, c.a1, c.a2, c.a3),
                c.curvature_scale * c.a4 * kin.dS)
    raise UnsupportedModelError(f"No constitutive law for model: {target.value}", model=target.value)


def stress_and_moment(model: Any, params: MaterialParameters, point: Point, twist_rate: float,
                      profile: Optional[RadialProfile] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Force stress and the model's moment: 3x3 for Curl-based curvature, 3x3x3 for
    gradient curvature. The ad-hoc model returns its Curl-based moment."""
    target, c = moduli(model, params)
    sigma, m2, m3 = _responses(target, c, kinematics(model, point, twist_rate, profile, params))
    if m2 is not None:
        return sigma, m2
    if m3 is not None:
        return sigma, m3
    return sigma, np.zeros((3, 3))


def energy_density(model: Any, params: MaterialParameters, point: Point, twist_rate: float,
                   profile: Optional[RadialProfile] = None) -> float:
    target, c = moduli(model, params)
    kin = kinematics(model, point, twist_rate, profile, params)
    Du = kin.Du
    norm2 = lambda T: float(np.sum(T ** 2))  # noqa: E731

    if target is ModelKind.CAUCHY:
        return c.mu_e * norm2(sym(Du))
    if target is ModelKind.RELAXED_MICROMORPHIC:
        E = Du - kin.P
        return (c.mu_e * norm2(sym(E)) + c.mu_c * norm2(skew(E)) + c.mu_micro * norm2(sym(kin.P))
                + _curvature_energy(curl(kin.dP), c, c.a1, c.a2, c.a3))
    if target is ModelKind.COSSERAT:
        return (c.mu_e * norm2(sym(Du)) + c.mu_c * norm2(skew(Du - kin.A))
                + _curvature_energy(curl(kin.dA), c, c.a1, c.a2, c.a3))
    if target is ModelKind.INDETERMINATE_COUPLE_STRESS:
        return c.mu_e * norm2(sym(Du)) + _curvature_energy(curl(kin.dA), c, c.a1, 0.0, 0.0)
    if target is ModelKind.MICROMORPHIC:
        E = Du - kin.P
        return (c.mu_e * norm2(sym(E)) + c.mu_c * norm2(skew(E)) + c.mu_micro * norm2(kin.S)
                + 0.5 * c.curvature_scale * (c.a1 * norm2(kin.dS) + c.a2 * norm2(kin.dA)))
    if target is ModelKind.MICRO_STRAIN:
        return (c.mu_e * norm2(sym(Du) - kin.S) + c.mu_micro * norm2(kin.S)
                + 0.5 * c.curvature_scale * c.a1 * norm2(kin.dS))
    if target in DISPLACEMENT_GRADIENT_MODELS:
        a2 = c.a2 if target is ModelKind.SECOND_GRADIENT else 0.0
        return (c.mu_e * norm2(sym(Du))
                + 0.5 * c.curvature_scale * (c.a1 * norm2(kin.dS) + a2 * norm2(kin.dA)))
    if target is ModelKind.AD_HOC:
        return (c.mu_e * norm2(sym(Du) - kin.S) + c.mu_micro * norm2(kin.S)
                + c.mu_c * norm2(skew(Du - kin.A))
                + _curvature_energy(curl(kin.dA), c, c.a1, c.a2, c.a3)
                + 0.5 * c.curvature_scale * c.a4 * norm2(kin.dS))
    raise UnsupportedModelError(f"No energy for model: {target.value}", model=target.value)


@dataclass
class FieldState:
    u: np.ndarray
    P: np.ndarray
    Du: np.ndarray
    curl_P: np.ndarray
    sigma_tilde: np.ndarray
    moment: np.ndarray


def field_state(model: Any, params: MaterialParameters, point: Point, twist_rate: float,
                profile: Optional[RadialProfile] = None) -> FieldState:
    kin = kinematics(model, point, twist_rate, profile, params)
    sigma, moment = stress_and_moment(model, params, point, twist_rate, profile)
    return FieldState(u=displacement(point, twist_rate), P=kin.P, Du=kin.Du,
                      curl_P=curl(kin.dP), sigma_tilde=sigma, moment=moment)


# --- torque integrands ------------------------------------------------------------------

def classical_torque_integrand(sigma: np.ndarray, point: Point) -> float:
    """<sigma e_z, e_phi> r."""
    return float(to_cylindrical_components(sigma, point.phi)[1, 2] * point.r)


def higher_order_torque_integrand(model: Any, moment: np.ndarray, phi: float) -> float:
    target = _target(model)
    if moment.ndim == 2:
        mc = to_cylindrical_components(moment, phi)
        if target is ModelKind.INDETERMINATE_COUPLE_STRESS:
            return float(mc[0, 0] - mc[2, 2])
        return float(mc[0, 0] + mc[1, 1])
    Q = cylindrical_basis(phi)
    e_r, e_phi, e_z = Q[:, 0], Q[:, 1], Q[:, 2]

    def traction(v):
        return Q.T @ np.einsum('ijk,i->jk', moment, v) @ Q

    n_z = traction(e_z)
    value = n_z[1, 0] - n_z[0, 1]
    if target in DISPLACEMENT_GRADIENT_MODELS:
        value += traction(e_r)[1, 2] - traction(e_phi)[0, 2]
    return float(value)


def torque_integrand_identity(moment: np.ndarray, phi: float) -> Tuple[float, float]:
    """Both sides of <skew(m x e_z) e_phi, e_r> - <skew(m x e_z) e_r, e_phi> = -(m - tr(m) 1)_zz."""
    Q = cylindrical_basis(phi)
    e_r, e_phi, e_z = Q[:, 0], Q[:, 1], Q[:, 2]
    X = skew(cross(moment, e_z))
    lhs = float(e_r @ X @ e_phi - e_phi @ X @ e_r)
    classical = moment - np.trace(moment) * IDENTITY
    return lhs, float(-classical[2, 2])


def disk_average_gradient(R: float, z: float, twist_rate: float, n_points: int = 8) -> np.ndarray:
    """Integral of Du over the disk of radius R at height z, by Gauss quadrature in r and phi."""
    if not R > 0:
        raise DomainError("Radius must be positive", R=R)
    nodes, weights = np.polynomial.legendre.leggauss(n_points)
    radii = 0.5 * R * (nodes + 1.0)
    r_weights = 0.5 * R * weights
    angles = math.pi * (nodes + 1.0)
    a_weights = math.pi * weights
    total = np.zeros((3, 3))
    for r, wr in zip(radii, r_weights):
        for phi, wp in zip(angles, a_weights):
            total += wr * wp * r * displacement_gradient(Point.cylindrical(r, phi, z), twist_rate)
    return total


# --- reduced equations and residuals -------------------------------------------------------

@dataclass(frozen=True)
class ReducedEquation:
    """stiffness * (r g'' + 3 g') - reaction * r * g = load * r for one unknown."""
    unknown: str
    stiffness: float
    reaction: float
    load: float

    def terms(self, r: float, g: float, dg: float, ddg: float) -> Tuple[float, ...]:
        return (self.stiffness * r * ddg, 3.0 * self.stiffness * dg,
                -self.reaction * r * g, -self.load * r)


@dataclass
class ReducedSystem:
    model: ModelKind
    R: float
    equations: List[ReducedEquation]
    boundary: np.ndarray
    boundary_rhs: np.ndarray
    fixed: Dict[str, float]

    def unknowns(self) -> List[str]:
        return [eq.unknown for eq in self.equations]


def _cosserat_boundary(a1: float, a3: float, R: float) -> Tuple[List[float], float]:
    return [-(a1 + 8.0 * a3), -2.0 * (a1 + 2.0 * a3) * R, 0.0, 0.0], 2.0 * a1 - 8.0 * a3


def reduced_system(model: Any, params: MaterialParameters, R: float) -> ReducedSystem:
    """Radial equilibrium equations and moment-free boundary rows of a profile model."""
    kind = ModelKind.parse(model)
    if kind not in PROFILE_MODELS:
        raise UnsupportedModelError(f"Model {kind.value} has no radial profiles", model=kind.value)
    if not R > 0:
        raise DomainError("Radius must be positive", R=R)
    target, c = moduli(kind, params)
    L2 = c.curvature_scale
    a1, a2, a3, a4 = c.a1, c.a2, c.a3, c.a4
    if c.mu_c < 0:
        raise ParameterDomainError("mu_c must be nonnegative", fields=['mu_c'])

    if target is ModelKind.RELAXED_MICROMORPHIC:
        if not a1 > 0:
            raise ParameterDomainError("a1 must be positive", fields=['a1'])
        equations = [
            ReducedEquation('g_p', (a1 + 2.0 * a3) * L2 / 6.0, c.mu_c, -c.mu_c),
            ReducedEquation('g_m', a1 * L2 / 2.0, c.mu_e + c.mu_micro, c.mu_e),
        ]
        cos_row, cos_rhs = _cosserat_boundary(a1, a3, R)
        cos_row[2] = -3.0 * a1
        rows = [[1.0, 0.0, 3.0, 2.0 * R], cos_row]
        rhs = [-2.0, cos_rhs]
        fixed = {}
    elif target is ModelKind.COSSERAT:
        if not a1 > 0:
            raise ParameterDomainError("a1 must be positive", fields=['a1'])
        equations = [ReducedEquation('g_p', (a1 + 2.0 * a3) * L2 / 6.0, c.mu_c, -c.mu_c)]
        row, value = _cosserat_boundary(a1, a3, R)
        rows, rhs, fixed = [row], [value], {'g_m': 0.0}
    elif target is ModelKind.MICROMORPHIC:
        equations = [
            ReducedEquation('g_p', a2 * L2, 2.0 * c.mu_c, -2.0 * c.mu_c),
            ReducedEquation('g_m', a1 * L2, 2.0 * (c.mu_e + c.mu_micro), 2.0 * c.mu_e),
        ]
        rows, rhs, fixed = [[1.0, R, 0.0, 0.0], [0.0, 0.0, 1.0, R]], [0.0, 0.0], {}
    elif target is ModelKind.MICRO_STRAIN:
        equations = [ReducedEquation('g_m', a1 * L2, 2.0 * (c.mu_e + c.mu_micro), 2.0 * c.mu_e)]
        rows, rhs, fixed = [[0.0, 0.0, 1.0, R]], [0.0], {'g_p': 0.0}
    elif target is ModelKind.AD_HOC:
        equations = [
            ReducedEquation('g_p', (a1 + 2.0 * a3) * L2 / 6.0, c.mu_c, -c.mu_c),
            ReducedEquation('g_m', a4 * L2, 2.0 * (c.mu_e + c.mu_micro), 2.0 * c.mu_e),
        ]
        row, value = _cosserat_boundary(a1, a3, R)
        rows, rhs, fixed = [row, [0.0, 0.0, 1.0, R]], [value, 0.0], {}
    else:
        raise UnsupportedModelError(f"Model {kind.value} has no radial profiles", model=kind.value)

    return ReducedSystem(model=kind, R=R, equations=equations, boundary=np.array(rows, dtype=float),
                         boundary_rhs=np.array(rhs, dtype=float), fixed=fixed)


def _scaled(terms) -> float:
    scale = sum(abs(t) for t in terms)
    return abs(sum(terms)) / scale if scale > 0 else 0.0


def _state(profile: RadialProfile, r: float) -> Dict[str, float]:
    (g_p, g_m), (dg_p, dg_m), (ddg_p, ddg_m) = (profile.at(r, d) for d in range(3))
    return {'g_p': float(g_p), 'g_m': float(g_m), 'dg_p': float(dg_p), 'dg_m': float(dg_m),
            'ddg_p': float(ddg_p), 'ddg_m': float(ddg_m)}


def _divergence(fn: Callable[[Point], np.ndarray], point: Point, step: float) -> np.ndarray:
    """Central-difference divergence over the last tensor index."""
    out = None
    for axis in range(3):
        plus = fn(point.shifted(axis, step))
        minus = fn(point.shifted(axis, -step))
        term = (plus - minus)[..., axis] / (2.0 * step)
        out = term if out is None else out + term
    return out


def equilibrium_residual(model: Any, params: MaterialParameters, point: Point, twist_rate: float,
                         profile: Optional[RadialProfile] = None) -> Dict[str, Any]:
    """Scaled residuals of the balance equations at an interior point.

    ``force`` is the central-difference divergence of the force stress; the
    reduced radial equations are reported per unknown. ``eq1``/``eq2`` are the
    x2 and x1 weighted Cartesian components of the first reduced equation.
    """
    kind = ModelKind.parse(model)
    r = point.r
    step = 1e-5 * max(r, 1e-3)

    def stress_at(p: Point) -> np.ndarray:
        return stress_and_moment(kind, params, p, twist_rate, profile)[0]

    sigma = stress_at(point)
    div = _divergence(stress_at, point, step)
    scale = max(float(np.linalg.norm(sigma)), 1e-300) / max(r, step)
    report: Dict[str, Any] = {'force': float(np.linalg.norm(div)) / scale, 'reduced': {}}

    if kind in PROFILE_MODELS:
        if profile is None:
            raise DomainError(f"Model {kind.value} needs a radial profile", model=kind.value)
        system = reduced_system(kind, params, profile.R)
        state = _state(profile, r)
        for eq in system.equations:
            name = eq.unknown
            terms = eq.terms(r, state[name], state['d' + name], state['dd' + name])
            report['reduced'][name] = _scaled(terms)
        first = system.equations[0]
        raw = sum(first.terms(r, state[first.unknown], state['d' + first.unknown],
                              state['dd' + first.unknown]))
        report['eq1'] = point.x2 * raw
        report['eq2'] = point.x1 * raw
    return report


def boundary_residual(model: Any, params: MaterialParameters, R: float, twist_rate: float = 1.0,
                      profile: Optional[RadialProfile] = None, phi: float = 0.3,
                      z: float = 0.0) -> Dict[str, Any]:
    """Traction and moment residuals on the lateral surface r = R.

    The moment condition is m x e_r for the full micro-distortion, its skew
    part for the Cosserat-type rotation and m3 e_r for gradient curvature.
    Couple-stress and displacement-gradient models report the traction only.
    """
    kind = ModelKind.parse(model)
    target, c = moduli(kind, params)
    point = Point.cylindrical(R, phi, z)
    kin = kinematics(kind, point, twist_rate, profile, params)
    sigma, m2, m3 = _responses(target, c, kin)
    e_r = cylindrical_basis(phi)[:, 0]

    sigma_scale = max(float(np.linalg.norm(sigma)), 1e-300)
    report: Dict[str, Any] = {'traction': float(np.linalg.norm(sigma @ e_r)) / sigma_scale}

    moment_scale = c.curvature_scale * abs(twist_rate) * max(c.a1, abs(c.a2), abs(c.a3), c.a4)
    moment_scale = max(moment_scale, 1e-300)
    if target is ModelKind.RELAXED_MICROMORPHIC:
        report['moment'] = float(np.linalg.norm(cross(m2, e_r))) / moment_scale
    elif target is ModelKind.COSSERAT:
        report['moment'] = float(np.linalg.norm(skew(cross(m2, e_r)))) / moment_scale
    elif target in GRADIENT_MODELS:
        report['moment'] = float(np.linalg.norm(np.einsum('ijk,i->jk', m3, e_r))) / moment_scale
    elif target is ModelKind.AD_HOC:
        report['moment'] = max(
            float(np.linalg.norm(skew(cross(m2, e_r)))),
            float(np.linalg.norm(np.einsum('ijk,i->jk', m3, e_r))),
        ) / moment_scale

    if kind in PROFILE_MODELS and profile is not None:
        system = reduced_system(kind, params, R)
        state = _state(profile, R)
        vector = np.array([state[name] for name in STATE_ORDER])
        report['reduced'] = [
            _scaled(list(row * vector) + [-value])
            for row, value in zip(system.boundary, system.boundary_rhs)
        ]
    return report
