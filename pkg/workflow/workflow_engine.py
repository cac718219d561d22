"""Block graphs for one CLI run and their execution."""
import logging
import uuid
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional

from core.errors import DomainError, ParameterDomainError, TorsionError
from workflow.blocks import Block, BlockType, create_block

logger = logging.getLogger(__name__)

COMMANDS = ('curve', 'profile', 'compare', 'verify', 'fit', 'limits')
DEFAULT_LC_GRID = [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3]


class Connection(NamedTuple):
    source: str
    output: str
    target: str
    input: str


class Workflow:
    """Blocks by id and the output -> input wiring between them."""

    def __init__(self, name: str = 'run'):
        self.name = name
        self.blocks: Dict[str, Block] = {}
        self.connections: List[Connection] = []

    def add_block(self, block_type: BlockType, block_id: Optional[str] = None) -> str:
        block_id = block_id or f"{block_type.value}_{uuid.uuid4().hex[:8]}"
        self.blocks[block_id] = create_block(block_type, block_id)
        return block_id

    def connect(self, source: str, output: str, target: str, input_name: str):
        unknown = [b for b in (source, target) if b not in self.blocks]
        if unknown:
            raise DomainError(f"Unknown block: {', '.join(unknown)}", workflow=self.name)
        self.connections.append(Connection(source, output, target, input_name))

    def get_block(self, block_id: str) -> Optional[Block]:
        return self.blocks.get(block_id)

    def set_block_parameter(self, block_id: str, name: str, value: Any):
        self.blocks[block_id].set_parameter(name, value)

    def upstream(self, block_id: str) -> List[Connection]:
        return [c for c in self.connections if c.target == block_id]

    def validate(self) -> Dict[str, Any]:
        issues, missing = [], []
        for block in self.blocks.values():
            report = block.validate()
            issues.extend(report['issues'])
            missing.extend(report['missing'])
        return {'valid': not issues, 'issues': issues, 'warnings': [], 'missing': missing}

    def to_dict(self) -> Dict[str, Any]:
        """Plan of the run: block types, parameters and wiring."""
        return {
            'name': self.name,
            'blocks': {block_id: {'type': block.block_type.value, 'parameters': dict(block.parameters)}
                       for block_id, block in self.blocks.items()},
            'connections': [c._asdict() for c in self.connections],
        }


class WorkflowEngine:

    def __init__(self, workflow: Workflow):
        self.workflow = workflow
        self.execution_log: List[Dict[str, Any]] = []
        self.results: Dict[str, Dict[str, Any]] = {}

    def execute(self) -> Dict[str, Any]:
        """Run every block in dependency order; failures become an ``error`` payload."""
        self.execution_log = []
        self.results = {}
        logger.debug("Workflow plan: %s", self.workflow.to_dict())

        report = self.workflow.validate()
        if not report['valid']:
            error = ParameterDomainError("; ".join(report['issues']), fields=report['missing'])
            return self._failure(error)
        order = self._execution_order()
        if order is None:
            return self._failure(None, {'error': 'WorkflowError',
                                        'message': 'Workflow has a cycle'})
        try:
            for block_id in order:
                self._run_block(block_id)
        except Exception as e:
            return self._failure(e)
        return {'status': 'success', 'results': self.results, 'execution_log': self.execution_log}

    def _failure(self, error: Optional[Exception], payload: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        if payload is None:
            payload = error.to_dict() if isinstance(error, TorsionError) else {
                'error': type(error).__name__, 'message': str(error)}
        return {'status': 'error', 'message': payload['message'], 'error': payload,
                'execution_log': self.execution_log}

    def _run_block(self, block_id: str):
        block = self.workflow.blocks[block_id]
        for conn in self.workflow.upstream(block_id):
            block.set_input(conn.input, self.results.get(conn.source, {}).get(conn.output))

        entry = {'block_id': block_id, 'block_type': block.block_type.value, 'status': 'executing'}
        self.execution_log.append(entry)
        try:
            result = block.execute()
        except Exception as e:
            entry.update(status='error', error=str(e))
            logger.debug("Block %s failed: %s", block_id, e)
            raise
        self.results[block_id] = result
        entry.update(status='success', result_keys=list(result))

    def _execution_order(self) -> Optional[List[str]]:
        """Kahn ordering; None when the wiring has a cycle."""
        pending = {block_id: 0 for block_id in self.workflow.blocks}
        for conn in self.workflow.connections:
            pending[conn.target] += 1
        ready = deque(block_id for block_id, count in pending.items() if count == 0)
        order = []
        while ready:
            block_id = ready.popleft()
            order.append(block_id)
            for conn in self.workflow.connections:
                if conn.source == block_id:
                    pending[conn.target] -= 1
                    if pending[conn.target] == 0:
                        ready.append(conn.target)
        return order if len(order) == len(self.workflow.blocks) else None


@dataclass
class RunConfig:
    """One CLI invocation."""
    command: str
    models: List[str] = field(default_factory=list)
    preset: Optional[str] = None
    params_file: Optional[str] = None
    overrides: Dict[str, float] = field(default_factory=dict)
    R: Optional[float] = None
    Lc_grid: Optional[List[float]] = None
    out: Optional[str] = None
    format: str = 'csv'
    seed: Optional[int] = None
    allow_indefinite: bool = False
    data_file: Optional[str] = None
    fit_config: Optional[Dict[str, Any]] = None
    vary: Optional[str] = None
    vary_values: Optional[List[float]] = None
    source: str = 'closed_form'
    n_samples: int = 101
    strict: bool = False
    max_workers: int = 1


def _default_suite():
    from core.materials import PRESETS

    return {name: (preset['model'], preset['params'], preset['R']) for name, preset in sorted(PRESETS.items())}


def build_run_workflow(config: RunConfig) -> Workflow:
    """Blocks for ``config.command``: load -> compute -> export."""
    if config.command not in COMMANDS:
        raise DomainError(f"Unknown command: {config.command}", choices=list(COMMANDS))
    workflow = Workflow(config.command)
    export = workflow.add_block(BlockType.EXPORT, 'export')
    workflow.set_block_parameter(export, 'file_path', config.out)
    workflow.set_block_parameter(export, 'format', config.format)

    if config.command == 'fit':
        fit = workflow.add_block(BlockType.FIT, 'fit')
        workflow.set_block_parameter(fit, 'config', config.fit_config or {})
        workflow.set_block_parameter(fit, 'seed', config.seed)
        workflow.set_block_parameter(fit, 'strict', config.strict)
        if config.data_file:
            data = workflow.add_block(BlockType.LOAD_OBSERVATIONS, 'observations')
            workflow.set_block_parameter(data, 'file_path', config.data_file)
            workflow.connect(data, 'data', fit, 'data')
        for output in ('table', 'result', 'report'):
            workflow.connect(fit, output, export, output)
        return workflow

    grid = config.Lc_grid or DEFAULT_LC_GRID
    if config.command == 'verify' and not (config.models or config.preset or config.params_file):
        verify = workflow.add_block(BlockType.VERIFY, 'verify')
        workflow.set_block_parameter(verify, 'Lc_grid', grid)
        workflow.set_block_parameter(verify, 'suite', _default_suite())
        workflow.set_block_parameter(verify, 'max_workers', config.max_workers)
        for output in ('table', 'max_deviation'):
            workflow.connect(verify, output, export, output)
        return workflow

    load = workflow.add_block(BlockType.LOAD_PARAMETERS, 'params')
    workflow.set_block_parameter(load, 'model', config.models[0] if config.models else None)
    workflow.set_block_parameter(load, 'preset', config.preset)
    workflow.set_block_parameter(load, 'file_path', config.params_file)
    workflow.set_block_parameter(load, 'overrides', dict(config.overrides))
    workflow.set_block_parameter(load, 'R', config.R)
    workflow.set_block_parameter(load, 'allow_indefinite', config.allow_indefinite)

    block_type = BlockType(config.command)
    compute = workflow.add_block(block_type, config.command)
    if config.models:
        workflow.set_block_parameter(compute, 'models', list(config.models))
    if block_type in (BlockType.CURVE, BlockType.COMPARE, BlockType.VERIFY):
        workflow.set_block_parameter(compute, 'Lc_grid', grid)
        workflow.set_block_parameter(compute, 'max_workers', config.max_workers)
    if block_type is BlockType.CURVE and config.vary:
        workflow.set_block_parameter(compute, 'vary', config.vary)
        workflow.set_block_parameter(compute, 'values', config.vary_values or [])
    if block_type is BlockType.PROFILE:
        workflow.set_block_parameter(compute, 'source', config.source)
        workflow.set_block_parameter(compute, 'n_samples', config.n_samples)
    for output in ('model', 'params', 'R'):
        workflow.connect(load, output, compute, output)

    workflow.connect(compute, 'table', export, 'table')
    if block_type is BlockType.VERIFY:
        workflow.connect(compute, 'max_deviation', export, 'max_deviation')
    return workflow
