"""Numerical analysis of real polynomial map germs: singular-value spectra of
gradient frames, Ł-weights, strong Łojasiewicz exponent fits, and sampled
detectors for Milnor's conditions (a), (b) and (c)."""

from .analytic import AnalyticMap, GradientFrame, compose, eval_map, gradient_frame
from .errors import (DegenerateMapError, InputError, InsufficientDataError, LojError,
                     PreconditionError)

__version__ = "0.1.0"
