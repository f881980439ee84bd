import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import ValidationError

from app.core.exceptions import ParameterError
from app.schemas.analysis import AnsatzFamily, AnsatzFit

logger = logging.getLogger(__name__)


class CoefficientService:
    """Reference below-threshold ansatz coefficients bundled with the package."""

    _instance = None
    _initialized = False

    def __new__(cls, data_file: Optional[Union[str, Path]] = None, _data: Optional[Dict] = None):
        """Singleton, rebuilt when a test injects data or a custom file."""
        if cls._instance is None or _data is not None or data_file is not None:
            cls._instance = super(CoefficientService, cls).__new__(cls)
        return cls._instance

    def __init__(self, data_file: Optional[Union[str, Path]] = None, _data: Optional[Dict] = None):
        if getattr(self, '_initialized', False) and _data is None and data_file is None:
            return

        if _data is not None:
            self._coefficients = _data
        else:
            if data_file is None:
                base_dir = Path(__file__).parent.parent
                self.data_file = base_dir / "data" / "ansatz_coefficients.json"
            else:
                self.data_file = Path(data_file)
            self._coefficients = self._load_coefficients()

        self._initialized = True

    def _load_coefficients(self) -> Dict[str, Any]:
        try:
            with open(self.data_file, 'r', encoding='utf-8') as f:
                data = json.load(f)
            return data.get('coefficients', {})
        except FileNotFoundError as e:
            raise RuntimeError(f"Coefficient file not found: {self.data_file}") from e
        except json.JSONDecodeError as e:
            raise RuntimeError(f"Invalid JSON in coefficient file: {e}") from e

    def get(self, family: Union[AnsatzFamily, str]) -> AnsatzFit:
        """Reference fit for one ansatz family."""
        family = AnsatzFamily(family)
        try:
            return AnsatzFit(**self._coefficients[family.value])
        except KeyError as e:
            raise ParameterError(f"No reference coefficients for {family.value}") from e
        except ValidationError as e:
            raise RuntimeError(f"Invalid coefficient data for {family.value}: {e}") from e

    def all(self) -> Dict[AnsatzFamily, AnsatzFit]:
        return {AnsatzFamily(name): self.get(name) for name in self._coefficients}


def get_coefficient_service() -> CoefficientService:
    return CoefficientService()
