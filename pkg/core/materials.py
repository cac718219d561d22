"""Material parameters of the generalized continua and the relations between them.

Units follow the convention used throughout the package: moduli in MPa,
curvature coefficients a1..a4 dimensionless, lengths (Lc, R) in meters.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

from core.errors import DegenerateInputError, DomainError, ParameterDomainError
from core.models import ModelKind, effective_model

logger = logging.getLogger(__name__)

SCALES = ('macro', 'e', 'micro')
CURVATURE_COEFFICIENTS = ('a1', 'a2', 'a3', 'a4')


@dataclass(frozen=True)
class MaterialParameters:
    mu_macro: Optional[float] = None
    lambda_macro: Optional[float] = None
    mu_e: Optional[float] = None
    lambda_e: Optional[float] = None
    mu_micro: Optional[float] = None
    lambda_micro: Optional[float] = None
    mu_c: float = 0.0
    mu: float = 1.0
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0
    a4: float = 0.0
    Lc: float = 0.0

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'MaterialParameters':
        """Build a parameter set from a flat document.

        ``kappa_<scale>`` may stand in for ``lambda_<scale>``. When two of the
        three shear (or bulk) moduli are given, the third follows from the
        Reuss relation.
        """
        known = set(cls.field_names())
        values: Dict[str, Any] = {}
        kappas: Dict[str, float] = {}
        unknown = []
        for key, raw in data.items():
            if key.startswith('kappa_') and key[len('kappa_'):] in SCALES:
                kappas[key[len('kappa_'):]] = float(raw)
            elif key in known:
                values[key] = None if raw is None else float(raw)
            else:
                unknown.append(key)
        if unknown:
            raise ParameterDomainError(f"Unknown parameter names: {', '.join(sorted(unknown))}",
                                       fields=sorted(unknown))

        _complete_reuss_triple(values, 'mu')

        for scale, kappa in kappas.items():
            mu_scale = values.get(f'mu_{scale}')
            if mu_scale is None:
                raise ParameterDomainError(f"kappa_{scale} given without mu_{scale}",
                                           fields=[f'kappa_{scale}'])
            values[f'lambda_{scale}'] = lambda_from_kappa(mu_scale, kappa)
        _complete_bulk_triple(values)

        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {key: value for key, value in dataclasses.asdict(self).items() if value is not None}

    def replace(self, **changes: Any) -> 'MaterialParameters':
        return dataclasses.replace(self, **changes)

    def with_overrides(self, **changes: Any) -> 'MaterialParameters':
        """Apply overrides and re-derive the dependent scale moduli."""
        data = self.to_dict()
        data.update(changes)
        changed = set(changes)
        if changed & {'mu_e', 'mu_micro'} and 'mu_macro' not in changed:
            data.pop('mu_macro', None)
        elif 'mu_macro' in changed and not changed & {'mu_e'}:
            data.pop('mu_e', None)
        return MaterialParameters.from_dict(data)

    def require(self, *names: str) -> Tuple[float, ...]:
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise ParameterDomainError(f"Missing parameters: {', '.join(missing)}", fields=missing)
        return tuple(float(getattr(self, name)) for name in names)

    def kappa(self, scale: str) -> Optional[float]:
        mu_scale = getattr(self, f'mu_{scale}')
        lam = getattr(self, f'lambda_{scale}')
        if mu_scale is None or lam is None:
            return None
        return kappa_from_lame(mu_scale, lam)

    @property
    def kappa_macro(self) -> Optional[float]:
        return self.kappa('macro')

    @property
    def kappa_e(self) -> Optional[float]:
        return self.kappa('e')

    @property
    def kappa_micro(self) -> Optional[float]:
        return self.kappa('micro')


@dataclass(frozen=True)
class ClassicalCosseratCoefficients:
    alpha: float
    beta: float
    gamma: float

    def total(self) -> float:
        return self.alpha + self.beta + self.gamma


@dataclass(frozen=True)
class EngineeringModuli:
    E: float
    nu: float
    kappa: float
    lambda_: float


def _series_combination(a: float, b: float) -> float:
    if math.isinf(a):
        return b
    if math.isinf(b):
        return a
    return a * b / (a + b)


def _complete_reuss_triple(values: Dict[str, Any], prefix: str):
    macro = values.get(f'{prefix}_macro')
    meso = values.get(f'{prefix}_e')
    micro = values.get(f'{prefix}_micro')
    if macro is None and meso is not None and micro is not None:
        values[f'{prefix}_macro'] = _series_combination(meso, micro)
    elif meso is None and macro is not None and micro is not None:
        values[f'{prefix}_e'] = reuss_mu_e(macro, micro)
    elif micro is None and macro is not None and meso is not None:
        values[f'{prefix}_micro'] = reuss_mu_e(macro, meso)


def _complete_bulk_triple(values: Dict[str, Any]):
    kappas = {}
    for scale in SCALES:
        mu_scale = values.get(f'mu_{scale}')
        lam = values.get(f'lambda_{scale}')
        if mu_scale is not None and lam is not None:
            kappas[scale] = kappa_from_lame(mu_scale, lam)
    if len(kappas) != 2:
        return
    missing = next(scale for scale in SCALES if scale not in kappas)
    if values.get(f'mu_{missing}') is None:
        return
    if missing == 'macro':
        kappa = _series_combination(kappas['e'], kappas['micro'])
    elif missing == 'e':
        kappa = reuss_kappa_e(kappas['macro'], kappas['micro'])
    else:
        kappa = reuss_kappa_e(kappas['macro'], kappas['e'])
    values[f'lambda_{missing}'] = lambda_from_kappa(values[f'mu_{missing}'], kappa)


def kappa_from_lame(mu: float, lam: float) -> float:
    return (2.0 * mu + 3.0 * lam) / 3.0


def lambda_from_kappa(mu: float, kappa: float) -> float:
    return (3.0 * kappa - 2.0 * mu) / 3.0


def reuss_mu_e(mu_macro: float, mu_micro: float) -> float:
    """Meso shear modulus from the springs-in-series relation mu_macro = mu_e mu_micro / (mu_e + mu_micro)."""
    if not mu_macro > 0:
        raise DegenerateInputError("mu_macro must be positive", mu_macro=mu_macro)
    if math.isinf(mu_micro):
        return float(mu_macro)
    if mu_micro <= mu_macro:
        raise DegenerateInputError("mu_micro must exceed mu_macro",
                                   mu_macro=mu_macro, mu_micro=mu_micro)
    return mu_macro * mu_micro / (mu_micro - mu_macro)


def reuss_kappa_e(kappa_macro: float, kappa_micro: float) -> float:
    if not kappa_macro > 0:
        raise DegenerateInputError("kappa_macro must be positive", kappa_macro=kappa_macro)
    if math.isinf(kappa_micro):
        return float(kappa_macro)
    if kappa_micro <= kappa_macro:
        raise DegenerateInputError("kappa_micro must exceed kappa_macro",
                                   kappa_macro=kappa_macro, kappa_micro=kappa_micro)
    return kappa_macro * kappa_micro / (kappa_micro - kappa_macro)


def reuss_macro(meso: float, micro: float) -> float:
    if meso <= 0 or micro <= 0:
        raise DegenerateInputError("Scale moduli must be positive", meso=meso, micro=micro)
    return _series_combination(meso, micro)


def classical_from_dislocation(a1: float, a2: float, a3: float,
                               mu: float, Lc: float) -> ClassicalCosseratCoefficients:
    if not mu > 0:
        raise ParameterDomainError("mu must be positive", fields=['mu'])
    if Lc < 0:
        raise ParameterDomainError("Lc must be nonnegative", fields=['Lc'])
    scale = mu * Lc * Lc
    return ClassicalCosseratCoefficients(
        alpha=scale * (4.0 * a3 - a1) / 3.0,
        beta=scale * (a1 - a2) / 2.0,
        gamma=scale * (a1 + a2) / 2.0,
    )


def dislocation_from_classical(alpha: float, beta: float, gamma: float,
                               mu: float, Lc: float) -> Tuple[float, float, float]:
    scale = mu * Lc * Lc
    if scale == 0:
        raise DegenerateInputError("mu * Lc**2 must be nonzero", mu=mu, Lc=Lc)
    a1 = (gamma + beta) / scale
    a2 = (gamma - beta) / scale
    a3 = (3.0 * alpha + beta + gamma) / (4.0 * scale)
    return a1, a2, a3


def wave_speeds(mu_macro: float, lambda_macro: float, rho: float) -> Tuple[float, float]:
    if not rho > 0:
        raise DomainError("Density must be positive", rho=rho)
    longitudinal = 2.0 * mu_macro + lambda_macro
    if not mu_macro > 0 or not longitudinal > 0:
        raise DomainError("Wave speed radicand must be positive",
                          mu_macro=mu_macro, lambda_macro=lambda_macro)
    return math.sqrt(mu_macro / rho), math.sqrt(longitudinal / rho)


def engineering_moduli(mu: float, kappa: float) -> EngineeringModuli:
    if not mu > 0 or not kappa > 0:
        raise ParameterDomainError("mu and kappa must be positive", fields=['mu', 'kappa'])
    return EngineeringModuli(
        E=9.0 * kappa * mu / (3.0 * kappa + mu),
        nu=(3.0 * kappa - 2.0 * mu) / (2.0 * (3.0 * kappa + mu)),
        kappa=kappa,
        lambda_=lambda_from_kappa(mu, kappa),
    )


def positive_definiteness_check(params: MaterialParameters,
                                coefficients: Optional[Iterable[str]] = None,
                                scales: Iterable[str] = SCALES) -> Dict[str, Any]:
    """Positivity of the energy for the moduli and curvature coefficients in use.

    ``coefficients`` names the curvature coefficients the model uses; every
    given one must be positive. ``scales`` restricts the shear/bulk checks.
    """
    issues = []
    warnings = []
    scales = tuple(scales)

    for scale in scales:
        mu_scale = getattr(params, f'mu_{scale}')
        if mu_scale is None:
            continue
        if not mu_scale > 0:
            issues.append(f"mu_{scale} must be positive (got {mu_scale})")
        kappa = params.kappa(scale)
        if kappa is not None and not kappa > 0:
            issues.append(f"kappa_{scale} must be positive (got {kappa})")

    if 'macro' in scales and 'micro' in scales and params.mu_macro is not None \
            and params.mu_micro is not None and params.mu_micro <= params.mu_macro:
        issues.append("mu_micro must exceed mu_macro")
    if 'e' in scales and params.mu_e is not None and params.mu_macro is not None \
            and params.mu_micro is not None and not math.isinf(params.mu_micro):
        expected = params.mu_e * params.mu_micro / (params.mu_e + params.mu_micro)
        if abs(expected - params.mu_macro) > 1e-10 * abs(params.mu_macro):
            warnings.append("mu_macro differs from the Reuss combination of mu_e and mu_micro")

    if params.mu_c < 0:
        issues.append(f"mu_c must be nonnegative (got {params.mu_c})")
    elif params.mu_c == 0:
        warnings.append("mu_c = 0: semi-definite but admissible")

    if not params.mu > 0:
        issues.append(f"mu must be positive (got {params.mu})")
    if params.Lc < 0:
        issues.append(f"Lc must be nonnegative (got {params.Lc})")

    for name in (coefficients or ()):
        value = getattr(params, name)
        if not value > 0:
            issues.append(f"{name} must be positive (got {value})")

    return {
        'valid': len(issues) == 0,
        'issues': issues,
        'warnings': warnings,
    }


# (strictly positive coefficients, scales in use) per evaluated model
MODEL_REQUIREMENTS: Dict[ModelKind, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    ModelKind.CAUCHY: ((), ('macro',)),
    ModelKind.RELAXED_MICROMORPHIC: (('a1',), SCALES),
    ModelKind.COSSERAT: (('a1',), ('macro',)),
    ModelKind.INDETERMINATE_COUPLE_STRESS: (('a1',), ('macro',)),
    ModelKind.MICROMORPHIC: (('a1', 'a2'), ('e', 'micro')),
    ModelKind.MICRO_STRAIN: (('a1',), ('e', 'micro')),
    ModelKind.SECOND_GRADIENT: (('a1',), ('macro',)),
    ModelKind.STRAIN_GRADIENT: (('a1',), ('macro',)),
    ModelKind.AD_HOC: (('a1', 'a4'), SCALES),
}


def model_positivity_check(model: Any, params: MaterialParameters) -> Dict[str, Any]:
    """positive_definiteness_check restricted to what ``model`` uses."""
    target, effective = effective_model(model, params)
    coefficients, scales = MODEL_REQUIREMENTS[target]
    report = positive_definiteness_check(effective, coefficients, scales)
    for name in ('a2', 'a3'):
        value = getattr(effective, name)
        if value < 0:
            report['issues'].append(f"{name} must be nonnegative (got {value})")
    report['valid'] = len(report['issues']) == 0
    report['model'] = ModelKind.parse(model).value
    return report


def _preset(model: str, R: float = 1.0, **params: float) -> Dict[str, Any]:
    return {'model': model, 'R': R, 'params': MaterialParameters.from_dict(params)}


# Named parameter sets of the stiffness-versus-Lc studies.
PRESETS: Dict[str, Dict[str, Any]] = {
    'relaxed': _preset('RelaxedMicromorphic', mu=1.0, mu_e=1 / 10, mu_micro=1 / 4, mu_c=1 / 2,
                       a1=1 / 5, a2=1 / 6, a3=1 / 7),
    'relaxed-vary-muc': _preset('RelaxedMicromorphic', mu=1.0, mu_e=1 / 3, mu_micro=1 / 4,
                                mu_c=0.0, a1=10.0, a3=1 / 50),
    'relaxed-sensitivity': _preset('RelaxedMicromorphic', mu=1.0, mu_e=1.0, mu_micro=1 / 9,
                                   mu_c=1 / 5, a1=20.0, a3=20.0),
    'cosserat': _preset('Cosserat', mu=1.0, mu_c=1 / 2, mu_macro=1 / 14, a1=1 / 5, a3=1 / 7),
    'cosserat-conformal': _preset('CosseratConformal', mu=1.0, mu_c=1 / 2, mu_macro=1 / 2, a1=5.0),
    'cosserat-sensitivity': _preset('Cosserat', mu=1.0, mu_c=1 / 5, mu_macro=1 / 10,
                                    a1=20.0, a3=20.0),
    'couple-stress': _preset('IndeterminateCoupleStress', mu=1.0, mu_macro=1 / 3, a1=1 / 5),
    'micromorphic': _preset('Micromorphic', mu=1.0, mu_e=1 / 3, mu_micro=1 / 4, mu_c=1 / 5,
                            a1=1 / 5, a2=1 / 6),
    'micro-strain': _preset('MicroStrain', mu=1.0, mu_e=1 / 3, mu_micro=1 / 4, a1=1 / 5),
    'second-gradient': _preset('SecondGradient', mu=1.0, mu_macro=1 / 4, a1=1 / 5, a2=1 / 6),
    'adhoc': _preset('AdHoc', mu=1.0, mu_c=1 / 2, mu_e=1 / 3, mu_micro=1 / 4,
                     a1=1 / 5, a3=1 / 6, a4=1 / 7),
    'lakes': _preset('Cosserat', mu=1.0, mu_c=1 / 2, mu_macro=1 / 14, a1=1 / 5, a3=1 / 37),
}
