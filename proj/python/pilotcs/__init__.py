"""Joint pilot allocation and sequence design for CS-based MIMO-OFDM channel estimation."""

from ._core import *  # noqa: F401,F403
from ._core import (  # noqa: F401
    CapacityError,
    ConfigError,
    DegenerateInputError,
    NumericalError,
)


def desk_system():
    """System and grid parameters of the small desk profile."""
    sc = SystemConfig()  # noqa: F405
    sc.num_rx, sc.num_tx, sc.seq_len, sc.num_subcarriers, sc.num_delay_taps = 4, 8, 4, 16, 8
    return sc, GridSpec(8, 16, 16)  # noqa: F405
