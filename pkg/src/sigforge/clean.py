"""Clean-frame dispatcher over the three family generators."""

from __future__ import annotations

import numpy as np

from sigforge.frame import FRAME_LEN
from sigforge.fsk import fsk_spec, gen_fsk
from sigforge.linear import gen_linear_mod
from sigforge.ofdm import draw_ofdm_spec, gen_ofdm
from sigforge.registry import SignalDescriptor, class_by_index
from sigforge.rng import RngStream

CLEAN_RRC_ALPHA = 0.35
CLEAN_GAUSSIAN_BT = 0.35


def gen_clean(class_index: int, rng: RngStream,
              frame_len: int = FRAME_LEN) -> tuple[np.ndarray, SignalDescriptor]:
    """Generate one clean unit-power frame with the fixed clean defaults
    (RRC alpha 0.35, Gaussian BT 0.35, OFDM structure drawn 50/50)."""
    cls = class_by_index(class_index)
    if cls.is_linear:
        return gen_linear_mod(class_index, rng, alpha=CLEAN_RRC_ALPHA, frame_len=frame_len)
    if cls.family == "fsk":
        return gen_fsk(fsk_spec(cls), rng, bt=CLEAN_GAUSSIAN_BT, frame_len=frame_len)
    spec = draw_ofdm_spec(cls.num_subcarriers, rng)
    return gen_ofdm(spec, rng, frame_len=frame_len)
