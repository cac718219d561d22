import json
import logging
from pathlib import Path
from typing import Any, Dict

import chardet
import pandas as pd

from core.errors import DomainError, ParameterDomainError

logger = logging.getLogger(__name__)


class DataLoader:

    def __init__(self):
        self.metadata: Dict[str, Any] = {}

    @staticmethod
    def _encoding(file_path: str) -> str:
        with open(file_path, 'rb') as f:
            raw_data = f.read(10000)
        return chardet.detect(raw_data)['encoding'] or 'utf-8'

    def load_observations(self, file_path: str) -> pd.DataFrame:
        """Read a stiffness dataset with columns R, T_w and optionally weight."""
        path = Path(file_path)
        if not path.exists():
            raise DomainError(f"Observation file not found: {file_path}", path=str(path))
        encoding = self._encoding(file_path)
        frame = pd.read_csv(file_path, encoding=encoding)
        frame.columns = [str(col).strip() for col in frame.columns]

        missing = [col for col in ('R', 'T_w') if col not in frame.columns]
        if missing:
            raise ParameterDomainError(f"Observation file lacks columns: {', '.join(missing)}",
                                       fields=missing)
        columns = ['R', 'T_w'] + (['weight'] if 'weight' in frame.columns else [])
        data = frame[columns].apply(pd.to_numeric, errors='coerce')
        if data.isna().any().any():
            raise DomainError("Observation file contains non-numeric or empty values", path=str(path))
        if 'weight' not in data.columns:
            data['weight'] = 1.0

        self.metadata = {
            'file_path': file_path,
            'file_name': path.name,
            'encoding': encoding,
            'rows': len(data),
            'columns': list(data.columns),
        }
        logger.debug("Loaded %d observations from %s (%s)", len(data), path.name, encoding)
        return data

    def load_json(self, file_path: str) -> Dict[str, Any]:
        path = Path(file_path)
        if not path.exists():
            raise DomainError(f"File not found: {file_path}", path=str(path))
        with open(file_path, 'r', encoding=self._encoding(file_path)) as f:
            document = json.load(f)
        if not isinstance(document, dict):
            raise ParameterDomainError(f"{path.name} must contain a JSON object")
        return document

    def get_metadata(self) -> Dict[str, Any]:
        return self.metadata
