import json
import logging
import math
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.errors import DomainError, ParameterDomainError
from core.materials import MaterialParameters

logger = logging.getLogger(__name__)

THREADS_ENV = 'TORSION_LAB_THREADS'
FLOAT_FORMAT = '%.16e'
OUTPUT_FORMATS = ('csv', 'json')


def parse_number(text: str) -> float:
    """Float, fraction (``1/14``) or ``inf``."""
    value = str(text).strip()
    if value.lower() in ('inf', '+inf', 'infinity'):
        return math.inf
    try:
        return float(value)
    except ValueError:
        pass
    try:
        return float(Fraction(value))
    except (ValueError, ZeroDivisionError):
        raise ParameterDomainError(f"Not a number: {text!r}") from None


def parse_grid(text: str) -> List[float]:
    """``min:max:count[:log]`` into an ascending list of values."""
    parts = [part.strip() for part in str(text).split(':')]
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ('log', 'lin')):
        raise DomainError(f"Grid must read min:max:count[:log], got {text!r}")
    lo, hi = parse_number(parts[0]), parse_number(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise DomainError(f"Grid count must be an integer, got {parts[2]!r}") from None
    if count < 1:
        raise DomainError("Grid must hold at least one point", count=count)
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise DomainError("Grid bounds must be finite with min <= max", min=lo, max=hi)
    if count == 1:
        return [lo]
    if len(parts) == 4 and parts[3] == 'log':
        if not lo > 0:
            raise DomainError("Log grid needs a positive minimum", min=lo)
        return [float(v) for v in np.logspace(math.log10(lo), math.log10(hi), count)]
    return [float(v) for v in np.linspace(lo, hi, count)]


def parse_assignment(text: str) -> Tuple[str, float]:
    """``key=value`` with a MaterialParameters (or kappa_*) key."""
    if '=' not in text:
        raise ParameterDomainError(f"Override must read key=value, got {text!r}")
    key, value = (part.strip() for part in text.split('=', 1))
    allowed = set(MaterialParameters.field_names()) | {'kappa_macro', 'kappa_e', 'kappa_micro'}
    if key not in allowed:
        raise ParameterDomainError(f"Unknown parameter name: {key}", fields=[key])
    return key, parse_number(value)


def parse_assignments(items: Optional[Sequence[str]]) -> Dict[str, float]:
    return dict(parse_assignment(item) for item in (items or ()))


def thread_cap(default: int = 1) -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == '':
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning("Ignoring non-integer %s=%r", THREADS_ENV, raw)
        return default
    if value < 1:
        logger.warning("Ignoring nonpositive %s=%r", THREADS_ENV, raw)
        return default
    return value


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, pd.DataFrame):
        return _jsonable(value.to_dict(orient='records'))
    return value


def to_json(document: Any) -> str:
    return json.dumps(_jsonable(document), indent=2, sort_keys=True)


def table_to_csv(table: pd.DataFrame) -> str:
    return table.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')


def write_table(table: pd.DataFrame, path: Optional[str], fmt: str = 'csv',
                extra: Optional[Dict[str, Any]] = None) -> str:
    """Serialize ``table`` as CSV or JSON, to ``path`` when given."""
    if fmt not in OUTPUT_FORMATS:
        raise DomainError(f"Unknown output format: {fmt}", format=fmt)
    if fmt == 'csv':
        text = table_to_csv(table)
    else:
        document = {'rows': table}
        document.update(extra or {})
        text = to_json(document) + '\n'
    if path:
        Path(path).write_text(text, encoding='utf-8')
        logger.debug("Wrote %d rows to %s", len(table), path)
    return text


def validate_run_config(command: str, R: Optional[float], Lc_grid: Optional[Sequence[float]],
                        files: Sequence[Optional[str]] = (), fmt: str = 'csv') -> Dict[str, Any]:
    issues = []
    warnings = []
    if R is None or not (R > 0) or math.isinf(R):
        issues.append(f"R must be positive and finite (got {R})")
    if Lc_grid is not None:
        if len(Lc_grid) == 0:
            issues.append("Lc grid is empty")
        elif any(v < 0 for v in Lc_grid):
            issues.append("Lc grid values must be nonnegative")
        elif len(Lc_grid) > 2000:
            warnings.append(f"Large Lc grid ({len(Lc_grid)} points)")
    for path in files:
        if path and not Path(path).exists():
            issues.append(f"File not found: {path}")
    if fmt not in OUTPUT_FORMATS:
        issues.append(f"Unknown output format: {fmt}")
    if command == 'verify' and Lc_grid is not None and any(math.isinf(v) for v in Lc_grid):
        issues.append("verify needs finite Lc values")
    return {
        'valid': len(issues) == 0,
        'issues': issues,
        'warnings': warnings,
    }
