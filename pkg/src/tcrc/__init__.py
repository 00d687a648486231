"""Deterministic temporal-convolution reservoir computing.

Modules
-------
mackey_glass
    Delay-equation data, z-scoring, trajectory windows.
activation
    tanh, sin, sigmoid and the Clausen/Lobachevsky activation.
mapping
    Random, Chebyshev and sparse logistic weight maps.
models
    ESN and TCRC state construction.
readout
    Ridge readout and closed-loop forecasting.
harness
    Experiments, search, benchmarks, reports, CLI.
"""

from . import activation, kernels, mackey_glass, mapping, models, readout
from .activation import ActivationKind, clausen, lobachevsky
from .mackey_glass import MGParams, TimeSeries, integrate_mg, make_trajectories, z_normalize
from .mapping import ChebyshevParams, LogisticParams, WeightMap
from .models import ESNConfig, RandomExpansion, TCRCConfig, build_model, collect_states
from .readout import fit_tikhonov, forecast_closed_loop, mse

__version__ = "0.1.0"
