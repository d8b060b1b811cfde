"""Online learners that track dynamic regret and adaptive regret at the same time."""

from .ader import Ader, build_grid, hedge_update
from .anh import AnhRecord, anh_weight, combine_actions, normalize_weights, potential
from .combined import AOA, AOD
from .core import AbsoluteLoss, Ball, Box, Environment, LinearLoss, RunTrace, run_game
from .intervals import Interval, cover, dgc_starting_at, gc_starting_at
from .ogd import OGD, OgdState, ogd_step, static_step_size

__version__ = "0.1.0"
