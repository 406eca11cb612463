"""Earth-rotation-locked Bell tests probing finite-speed hidden influences."""
from ._accel import BACKEND
from .errors import (Dut1FormatError, OutOfValidityError, TableRangeError, ValidationError,
                     VCausalError)

__version__ = "0.1.0"

__all__ = ["BACKEND", "Dut1FormatError", "OutOfValidityError", "TableRangeError",
           "ValidationError", "VCausalError", "__version__"]
