from typing import Any, Dict, Optional


class TorsionError(Exception):

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            'error': type(self).__name__,
            'message': self.message,
        }
        for key, value in self.details.items():
            payload[key] = _jsonable(value)
        return payload


class DomainError(TorsionError, ValueError):
    pass


class DegenerateInputError(TorsionError, ValueError):
    pass


class ParameterDomainError(TorsionError, ValueError):

    def __init__(self, message: str, fields: Optional[list] = None, **details: Any):
        super().__init__(message, fields=list(fields or []), **details)
        self.fields = list(fields or [])


class UnsupportedModelError(TorsionError, ValueError):
    pass


class SingularityError(TorsionError, ValueError):
    pass


class SingularSystemError(TorsionError, RuntimeError):
    pass


class NonConvergenceError(TorsionError, RuntimeError):

    def __init__(self, message: str, residual: float = float('nan'), **details: Any):
        super().__init__(message, residual=residual, **details)
        self.residual = residual


class SingularJacobianError(TorsionError, RuntimeError):

    def __init__(self, message: str, condition_number: float = float('inf'), **details: Any):
        super().__init__(message, condition_number=condition_number, **details)
        self.condition_number = condition_number


class GridPointError(TorsionError):

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"Grid point {index} failed: {cause}", index=index,
                         cause=type(cause).__name__)
        self.index = index
        self.cause = cause


def _jsonable(value: Any) -> Any:
    if isinstance(value, float):
        if value != value:
            return 'nan'
        if value in (float('inf'), float('-inf')):
            return 'inf' if value > 0 else '-inf'
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value
