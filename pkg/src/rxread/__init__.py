"""Handwritten prescription reading: preprocessing, a CTC recognizer and database correction."""

from .corpus import Charset, MedicineDb, MedicineEntry, default_charset, load_medicine_db
from .errors import RxError
from .pipeline import DATA_DIR, PipelineConfig, Recognizer, evaluate, load_page

__version__ = "0.1.0"

__all__ = [
    "Charset",
    "DATA_DIR",
    "MedicineDb",
    "MedicineEntry",
    "PipelineConfig",
    "Recognizer",
    "RxError",
    "default_charset",
    "evaluate",
    "load_medicine_db",
    "load_page",
]
