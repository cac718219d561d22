"""Value types shared by the closed-form, field and oracle paths."""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline

from core.errors import UnsupportedModelError


class ModelKind(Enum):
    CAUCHY = "Cauchy"
    RELAXED_MICROMORPHIC = "RelaxedMicromorphic"
    RELAXED_CONFORMAL = "RelaxedConformal"
    RELAXED_SYMMETRIC_STRESS = "RelaxedSymmetricStress"
    COSSERAT = "Cosserat"
    COSSERAT_CONFORMAL = "CosseratConformal"
    INDETERMINATE_COUPLE_STRESS = "IndeterminateCoupleStress"
    MODIFIED_COUPLE_STRESS = "ModifiedCoupleStress"
    PSEUDO_CONSISTENT_COUPLE_STRESS = "PseudoConsistentCoupleStress"
    MICROMORPHIC = "Micromorphic"
    MICROMORPHIC_REDUCED_CURVATURE = "MicromorphicReducedCurvature"
    MICRO_STRAIN = "MicroStrain"
    MICRO_STRETCH = "MicroStretch"
    MICRO_VOID = "MicroVoid"
    SECOND_GRADIENT = "SecondGradient"
    STRAIN_GRADIENT = "StrainGradient"
    AD_HOC = "AdHoc"

    @classmethod
    def parse(cls, tag: Any) -> 'ModelKind':
        if isinstance(tag, cls):
            return tag
        text = str(tag).strip()
        for kind in cls:
            if text in (kind.value, kind.name) or text.lower() == kind.value.lower():
                return kind
        raise UnsupportedModelError(f"Unknown model: {tag}", model=text)


# Models whose evaluation is delegated to another one.
DELEGATES: Dict[ModelKind, ModelKind] = {
    ModelKind.MICRO_STRETCH: ModelKind.COSSERAT,
    ModelKind.MICRO_VOID: ModelKind.CAUCHY,
    ModelKind.MODIFIED_COUPLE_STRESS: ModelKind.INDETERMINATE_COUPLE_STRESS,
    ModelKind.PSEUDO_CONSISTENT_COUPLE_STRESS: ModelKind.CAUCHY,
}

# Models carrying a micro-distortion described by radial profiles.
PROFILE_MODELS = frozenset({
    ModelKind.RELAXED_MICROMORPHIC,
    ModelKind.RELAXED_CONFORMAL,
    ModelKind.RELAXED_SYMMETRIC_STRESS,
    ModelKind.COSSERAT,
    ModelKind.COSSERAT_CONFORMAL,
    ModelKind.MICRO_STRETCH,
    ModelKind.MICROMORPHIC,
    ModelKind.MICROMORPHIC_REDUCED_CURVATURE,
    ModelKind.MICRO_STRAIN,
    ModelKind.AD_HOC,
})


def resolve_model(model: Any) -> ModelKind:
    kind = ModelKind.parse(model)
    return DELEGATES.get(kind, kind)


def polar_moment(R: float) -> float:
    return math.pi * R ** 4 / 2.0


@dataclass(frozen=True)
class StiffnessTriple:
    T_c: float
    T_m: float
    T_w: float
    model: ModelKind
    Lc: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'model': self.model.value,
            'Lc': self.Lc,
            'T_c': self.T_c,
            'T_m': self.T_m,
            'T_w': self.T_w,
        }

    def energy_gap(self) -> float:
        """|T_c + T_m - T_w| relative to T_w."""
        return abs(self.T_c + self.T_m - self.T_w) / abs(self.T_w)


ProfileEvaluator = Callable[[np.ndarray, int], Tuple[np.ndarray, np.ndarray]]


@dataclass
class RadialProfile:
    """Sampled g functions on [0, R].

    ``evaluator(r, order)`` returns the ``order``-th derivatives of
    ``(g_p, g_m)`` at arbitrary radii; without it the samples are splined.
    """
    radii: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    g_p: np.ndarray
    g_m: np.ndarray
    model: ModelKind
    evaluator: Optional[ProfileEvaluator] = field(default=None, repr=False, compare=False)

    @classmethod
    def from_sum_difference(cls, radii: np.ndarray, g_p: np.ndarray, g_m: np.ndarray,
                            model: ModelKind,
                            evaluator: Optional[ProfileEvaluator] = None) -> 'RadialProfile':
        g_p = np.asarray(g_p, dtype=float)
        g_m = np.asarray(g_m, dtype=float)
        return cls(
            radii=np.asarray(radii, dtype=float),
            g1=0.5 * (g_p + g_m),
            g2=0.5 * (g_p - g_m),
            g_p=g_p,
            g_m=g_m,
            model=model,
            evaluator=evaluator,
        )

    @property
    def R(self) -> float:
        return float(self.radii[-1])

    def at(self, r: Any, derivative: int = 0) -> Tuple[np.ndarray, np.ndarray]:
        r = np.asarray(r, dtype=float)
        if self.evaluator is not None:
            return self.evaluator(r, derivative)
        splines = self._splines()
        return splines[0](r, derivative), splines[1](r, derivative)

    def _splines(self):
        cached = getattr(self, '_spline_cache', None)
        if cached is None:
            cached = (CubicSpline(self.radii, self.g_p), CubicSpline(self.radii, self.g_m))
            object.__setattr__(self, '_spline_cache', cached)
        return cached

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'r': self.radii,
            'g1': self.g1,
            'g2': self.g2,
            'g_p': self.g_p,
            'g_m': self.g_m,
        })


def effective_model(model: Any, params: Any) -> Tuple[ModelKind, Any]:
    """Resolve delegates and fold the named special cases into the parameters.

    RelaxedConformal and CosseratConformal set a3 = 0, RelaxedSymmetricStress
    sets mu_c = 0 and MicromorphicReducedCurvature is evaluated as MicroStrain.
    """
    target = resolve_model(model)
    if target is ModelKind.RELAXED_CONFORMAL:
        return ModelKind.RELAXED_MICROMORPHIC, params.replace(a3=0.0)
    if target is ModelKind.RELAXED_SYMMETRIC_STRESS:
        return ModelKind.RELAXED_MICROMORPHIC, params.replace(mu_c=0.0)
    if target is ModelKind.COSSERAT_CONFORMAL:
        return ModelKind.COSSERAT, params.replace(a3=0.0)
    if target is ModelKind.MICROMORPHIC_REDUCED_CURVATURE:
        return ModelKind.MICRO_STRAIN, params
    if target is ModelKind.MICROMORPHIC and params.a2 == 0:
        return ModelKind.MICRO_STRAIN, params
    return target, params
