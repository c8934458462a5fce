"""Sub-sample time-of-arrival estimation for 5G NR positioning reference signals."""

from .channel import ChannelSpec, apply_channel, calibrate_noise, model_rx_bin
from .errors import (
    ConsistencyError,
    DegenerateInputError,
    InvalidArgumentError,
    StageError,
    WindowRangeError,
)
from .estimator import EstimatorOptions, ToaEstimate, estimate_toa, rtoa_from_slope
from .experiments import SweepSpec, Transmitter, compute_psd, mse, run_sweep
from .grid import PrsConfig, ResourceGrid, beta_for_energy, build_grid, map_prs, prs_energy
from .ofdm import FrameLayout, IqSignal, assemble_frame, extract_symbol, modulate
from .sequences import generate_gold, generate_preamble, map_qpsk

__version__ = "0.1.0"
