from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional
import logging

import numpy as np
import pandas as pd

from core.errors import DomainError, ParameterDomainError

logger = logging.getLogger(__name__)


class BlockType(Enum):
    LOAD_PARAMETERS = "load_parameters"
    LOAD_OBSERVATIONS = "load_observations"

    CURVE = "curve"
    COMPARE = "compare"
    PROFILE = "profile"
    LIMITS = "limits"

    VERIFY = "verify"

    FIT = "fit"

    EXPORT = "export"


@dataclass
class BlockParameter:
    name: str
    param_type: str  # string, int, float, bool, file, grid, models, dict
    required: bool = True
    default: Any = None
    options: Optional[List[Any]] = None
    description: str = ""


class Block:

    PARAMETERS: List[BlockParameter] = []

    def __init__(self, block_id: str, block_type: BlockType):
        self.block_id = block_id
        self.block_type = block_type
        self.parameters: Dict[str, Any] = {
            param.name: param.default for param in self.PARAMETERS if param.default is not None
        }
        self.inputs: Dict[str, Any] = {}

    def set_parameter(self, name: str, value: Any):
        self.parameters[name] = value

    def set_input(self, name: str, value: Any):
        self.inputs[name] = value

    def execute(self) -> Dict[str, Any]:
        raise NotImplementedError

    def validate(self) -> Dict[str, Any]:
        missing = [param.name for param in self.PARAMETERS
                   if param.required and self.parameters.get(param.name) is None]
        issues = [f"{self.block_id}: missing parameter '{name}'" for name in missing]
        for param in self.PARAMETERS:
            value = self.parameters.get(param.name)
            if param.options and value is not None and value not in param.options:
                issues.append(f"{self.block_id}: {param.name} must be one of {', '.join(param.options)}")
        return {'valid': not issues, 'issues': issues, 'warnings': [], 'missing': missing}

    def _models(self) -> List[str]:
        models = self.parameters.get('models') or self.inputs.get('models')
        if not models:
            model = self.inputs.get('model')
            models = [model] if model else []
        if not models:
            raise ParameterDomainError("No model selected", fields=['model'])
        return list(models)

    def _radius(self) -> float:
        R = self.parameters.get('R')
        if R is None:
            R = self.inputs.get('R')
        return float(R)


class LoadParametersBlock(Block):

    PARAMETERS = [
        BlockParameter("model", "string", required=False,
                       description="Model tag; defaults to the preset's model"),
        BlockParameter("preset", "string", required=False,
                       description="Named parameter set"),
        BlockParameter("file_path", "file", required=False,
                       description="JSON parameter document"),
        BlockParameter("overrides", "dict", required=False,
                       description="key=value overrides applied last"),
        BlockParameter("R", "float", required=False,
                       description="Cylinder radius; defaults to the preset's radius or 1"),
        BlockParameter("allow_indefinite", "bool", required=False, default=False,
                       description="Skip positivity enforcement"),
    ]

    def __init__(self, block_id: str):
        super().__init__(block_id, BlockType.LOAD_PARAMETERS)

    def execute(self) -> Dict[str, Any]:
        from core.data_loader import DataLoader
        from core.materials import PRESETS, MaterialParameters, model_positivity_check

        preset_name = self.parameters.get('preset')
        model = self.parameters.get('model')
        R = self.parameters.get('R')
        params = MaterialParameters()
        if preset_name:
            if preset_name not in PRESETS:
                raise ParameterDomainError(f"Unknown preset: {preset_name}", fields=['preset'],
                                           available=sorted(PRESETS))
            preset = PRESETS[preset_name]
            params = preset['params']
            model = model or preset['model']
            R = preset['R'] if R is None else R
        file_path = self.parameters.get('file_path')
        if file_path:
            document = DataLoader().load_json(file_path)
            if preset_name:
                params = params.with_overrides(**document)
            else:
                params = MaterialParameters.from_dict(document)
        overrides = self.parameters.get('overrides') or {}
        if overrides:
            params = params.with_overrides(**overrides)
        if not model:
            raise ParameterDomainError("No model selected", fields=['model'])

        report = model_positivity_check(model, params)
        if not report['valid']:
            if self.parameters.get('allow_indefinite'):
                logger.warning("Indefinite parameters accepted: %s", "; ".join(report['issues']))
            else:
                raise ParameterDomainError("; ".join(report['issues']), fields=['params'])

        return {
            'model': model,
            'params': params,
            'R': 1.0 if R is None else float(R),
            'report': report,
        }


class LoadObservationsBlock(Block):

    PARAMETERS = [
        BlockParameter("file_path", "file", required=True,
                       description="CSV with columns R, T_w and optional weight")
    ]

    def __init__(self, block_id: str):
        super().__init__(block_id, BlockType.LOAD_OBSERVATIONS)

    def execute(self) -> Dict[str, Any]:
        from core.data_loader import DataLoader

        loader = DataLoader()
        data = loader.load_observations(self.parameters.get('file_path'))

        return {
            'data': data,
            'metadata': loader.get_metadata()
        }


class CurveBlock(Block):

    PARAMETERS = [
        BlockParameter("Lc_grid", "grid", required=True,
                       description="Characteristic lengths"),
        BlockParameter("models", "models", required=False,
                       description="Models to evaluate (empty = loaded model)"),
        BlockParameter("vary", "string", required=False,
                       description="Parameter varied across curves"),
        BlockParameter("values", "grid", required=False,
                       description="Values of the varied parameter"),
        BlockParameter("max_workers", "int", required=False, default=1,
                       description="Threads for grid evaluation"),
    ]

    def __init__(self, block_id: str):
        super().__init__(block_id, BlockType.CURVE)

    def execute(self) -> Dict[str, Any]:
        from core.closed_form import sensitivity_sweep, stiffness_curve

        params = self.inputs.get('params')
        R = self._radius()
        grid = self.parameters['Lc_grid']
        workers = int(self.parameters.get('max_workers', 1))
        vary = self.parameters.get('vary')

        rows = []
        for model in self._models():
            if vary:
                curves = sensitivity_sweep(model, params, R, grid, vary, self.parameters.get('values') or [],
                                           max_workers=workers)
            else:
                curves = {None: stiffness_curve(model, params, R, grid, max_workers=workers)}
            for value, triples in curves.items():
                for triple in triples:
                    row = {'model': triple.model.value}
                    if vary:
                        row[vary] = value
                    row.update({'Lc': triple.Lc, 'T_c': triple.T_c, 'T_m': triple.T_m, 'T_w': triple.T_w})
                    rows.append(row)

        return {'table': pd.DataFrame(rows)}


class CompareBlock(Block):

    PARAMETERS = [
        BlockParameter("Lc_grid", "grid", required=True,
                       description="Shared characteristic lengths"),
        BlockParameter("models", "models", required=True,
                       description="Models overlaid on the grid"),
        BlockParameter("quantity", "string", required=False, default='T_w',
                       options=['T_c', 'T_m', 'T_w'],
                       description="Stiffness component"),
        BlockParameter("max_workers", "int", required=False, default=1,
                       description="Threads for grid evaluation"),
    ]

    def __init__(self, block_id: str):
        super().__init__(block_id, BlockType.COMPARE)

    def execute(self) -> Dict[str, Any]:
        from core.closed_form import stiffness_curve

        params = self.inputs.get('params')
        R = self._radius()
        grid = self.parameters['Lc_grid']
        quantity = self.parameters.get('quantity', 'T_w')
        workers = int(self.parameters.get('max_workers', 1))

        table = pd.DataFrame({'Lc': [float(v) for v in grid]})
        for model in self._models():
            triples = stiffness_curve(model, params, R, grid, max_workers=workers)
            table[triples[0].model.value] = [getattr(t, quantity) for t in triples]

        return {'table': table}


class ProfileBlock(Block):

    PARAMETERS = [
        BlockParameter("n_samples", "int", required=False, default=101,
                       description="Radial samples on [0, R]"),
        BlockParameter("source", "string", required=False, default='closed_form',
                       options=['closed_form', 'oracle'],
                       description="Closed-form or collocation profiles"),
        BlockParameter("twist_rate", "float", required=False, default=1.0,
                       description="Twist per unit length"),
    ]

    def __init__(self, block_id: str):
        super().__init__(block_id, BlockType.PROFILE)

    def execute(self) -> Dict[str, Any]:
        from core import fields
        from core.closed_form import radial_profiles
        from core.oracle import solve_profile

        params = self.inputs.get('params')
        model = self._models()[0]
        R = self._radius()
        n_samples = int(self.parameters.get('n_samples', 101))
        twist = float(self.parameters.get('twist_rate', 1.0))

        if self.parameters.get('source') == 'oracle':
            profile = solve_profile(model, params, R)
            radii = np.linspace(0.0, R, n_samples)
            g_p, g_m = profile.at(radii)
            profile = type(profile).from_sum_difference(radii, g_p, g_m, profile.model,
                                                        evaluator=profile.evaluator)
        else:
            profile = radial_profiles(model, params, R, n_samples=n_samples)

        table = profile.to_frame()
        sigma_phiz, moment_torque, energy = [], [], []
        for r in profile.radii:
            # Cartesian fields; the profile evaluators carry the r -> 0 limits
            point = fields.Point.cylindrical(float(r), 0.0, 0.0)
            state = fields.field_state(model, params, point, twist, profile)
            sigma_phiz.append(float(fields.to_cylindrical_components(state.sigma_tilde, 0.0)[1, 2]))
            moment_torque.append(fields.higher_order_torque_integrand(model, state.moment, 0.0))
            energy.append(fields.energy_density(model, params, point, twist, profile))
        table['sigma_phiz'] = sigma_phiz
        table['moment_torque'] = moment_torque
        table['energy_density'] = energy

        return {'table': table, 'profile': profile}


class LimitsBlock(Block):

    PARAMETERS = [
        BlockParameter("models", "models", required=False,
                       description="Models to classify (empty = loaded model)")
    ]

    def __init__(self, block_id: str):
        super().__init__(block_id, BlockType.LIMITS)

    def execute(self) -> Dict[str, Any]:
        from core.closed_form import limits

        params = self.inputs.get('params')
        R = self._radius()
        rows = [limits(model, params, R) for model in self._models()]

        return {'table': pd.DataFrame(rows)}


class VerifyBlock(Block):

    PARAMETERS = [
        BlockParameter("Lc_grid", "grid", required=True,
                       description="Characteristic lengths checked"),
        BlockParameter("suite", "dict", required=False,
                       description="{name: (model, params, R)} checked instead of the loaded set"),
        BlockParameter("max_workers", "int", required=False, default=1,
                       description="Threads for the numerical path"),
    ]

    def __init__(self, block_id: str):
        super().__init__(block_id, BlockType.VERIFY)

    def _cases(self):
        suite = self.parameters.get('suite')
        if suite:
            return [(name, model, params, R) for name, (model, params, R) in suite.items()]
        return [(str(model), model, self.inputs.get('params'), self._radius()) for model in self._models()]

    def execute(self) -> Dict[str, Any]:
        from core.closed_form import stiffness_curve
        from core.oracle import numeric_curve, relative_errors

        grid = self.parameters['Lc_grid']
        workers = int(self.parameters.get('max_workers', 1))
        rows = []
        for name, model, params, R in self._cases():
            closed = stiffness_curve(model, params, R, grid, max_workers=workers)
            numeric = numeric_curve(model, params, R, grid, max_workers=workers)
            for reference, approx in zip(closed, numeric):
                errors = relative_errors(reference, approx)
                rows.append({
                    'case': name,
                    'model': reference.model.value,
                    'R': R,
                    'Lc': reference.Lc,
                    'T_w_closed': reference.T_w,
                    'T_w_numeric': approx.T_w,
                    'err_T_c': errors['T_c'],
                    'err_T_m': errors['T_m'],
                    'err_T_w': errors['T_w'],
                })
        table = pd.DataFrame(rows)
        max_deviation = float(table[['err_T_c', 'err_T_m', 'err_T_w']].to_numpy().max())
        logger.info("verify: %d comparisons, max relative deviation %.3e", len(table), max_deviation)

        return {'table': table, 'max_deviation': max_deviation}


class FitBlock(Block):

    PARAMETERS = [
        BlockParameter("config", "dict", required=True,
                       description="{model, free: {name: [lo, hi]}, fixed: {...}}"),
        BlockParameter("strict", "bool", required=False, default=False,
                       description="Raise on a rank-deficient Jacobian"),
        BlockParameter("seed", "int", required=False,
                       description="Noise seed of synthetic observations"),
        BlockParameter("max_iterations", "int", required=False, default=200,
                       description="Function evaluation cap"),
    ]

    def __init__(self, block_id: str):
        super().__init__(block_id, BlockType.FIT)

    def _observations(self, config: Dict[str, Any]) -> pd.DataFrame:
        from core.identify import synthetic_observations
        from core.materials import MaterialParameters

        data = self.inputs.get('data')
        if data is not None:
            return data
        synthetic = config.get('synthetic')
        if not synthetic:
            raise ParameterDomainError("Fit needs observations or a 'synthetic' section",
                                       fields=['data'])
        truth = MaterialParameters.from_dict(synthetic['params'])
        return synthetic_observations(config['model'], truth, synthetic['radii'],
                                      noise=float(synthetic.get('noise', 0.0)),
                                      seed=self.parameters.get('seed'),
                                      weighting=synthetic.get('weighting', 'uniform'))

    def execute(self) -> Dict[str, Any]:
        from core.identify import FitProblem, check_fit_parameters, fit

        config = self.parameters['config']
        observations = self._observations(config)
        problem = FitProblem.from_config(config, observations)
        result = fit(problem, max_iterations=int(self.parameters.get('max_iterations', 200)),
                     strict=bool(self.parameters.get('strict', False)))

        table = problem.observations.copy()
        table['T_fit'] = problem.predict(result.fitted_values)
        table['residual'] = result.per_point_residuals

        return {
            'table': table,
            'result': result.to_dict(),
            'report': check_fit_parameters(problem, result.fitted_values),
        }


class ExportBlock(Block):

    PARAMETERS = [
        BlockParameter("file_path", "file", required=False,
                       description="Output path (empty = text only)"),
        BlockParameter("format", "string", required=False, default='csv',
                       options=['csv', 'json'],
                       description="Output format"),
    ]

    def __init__(self, block_id: str):
        super().__init__(block_id, BlockType.EXPORT)

    def execute(self) -> Dict[str, Any]:
        from utils.helpers import write_table

        table = self.inputs.get('table')
        if table is None:
            raise DomainError("Nothing to export")
        extra = {}
        for key in ('result', 'report', 'max_deviation'):
            if self.inputs.get(key) is not None:
                extra[key] = self.inputs[key]
        text = write_table(table, self.parameters.get('file_path'),
                           self.parameters.get('format', 'csv'), extra=extra)

        return {'text': text, 'file_path': self.parameters.get('file_path')}


BLOCK_REGISTRY = {
    BlockType.LOAD_PARAMETERS: LoadParametersBlock,
    BlockType.LOAD_OBSERVATIONS: LoadObservationsBlock,
    BlockType.CURVE: CurveBlock,
    BlockType.COMPARE: CompareBlock,
    BlockType.PROFILE: ProfileBlock,
    BlockType.LIMITS: LimitsBlock,
    BlockType.VERIFY: VerifyBlock,
    BlockType.FIT: FitBlock,
    BlockType.EXPORT: ExportBlock,
}


def create_block(block_type: BlockType, block_id: str) -> Block:
    block_class = BLOCK_REGISTRY.get(block_type)
    if block_class:
        return block_class(block_id)
    raise ValueError(f"Unknown block type: {block_type}")
