"""Device-independent randomness bounds for two-qubit Bell experiments."""

from ._dirand import *  # noqa: F401,F403
from ._dirand import __doc__  # noqa: F401

__version__ = "0.1.0"
