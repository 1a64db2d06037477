"""Bayesian count stratification toolkit (Python bindings)."""

from ._crowdstrata import *  # noqa: F401,F403
from ._crowdstrata import __doc__  # noqa: F401
