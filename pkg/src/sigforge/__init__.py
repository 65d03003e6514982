"""sigforge: deterministic synthetic RF modulation dataset engine.

Generates a 53-class complex-baseband IQ corpus (clean and impaired
variants), applies domain augmentations, measures signal properties, and
ships deterministic sharded datasets plus an online batch server.
"""

from sigforge.rng import RngStream, derive_stream
from sigforge.frame import mean_power, normalize_unit_power
from sigforge.registry import CLASS_LIST, SignalClass, SignalDescriptor, class_by_index, class_by_name

__all__ = [
    "RngStream",
    "derive_stream",
    "mean_power",
    "normalize_unit_power",
    "CLASS_LIST",
    "SignalClass",
    "SignalDescriptor",
    "class_by_index",
    "class_by_name",
]

__version__ = "0.1.0"
