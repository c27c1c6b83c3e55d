"""Random-effects meta-analysis prediction via p-value combination."""

from _edgemeta import *  # noqa: F401,F403
from _edgemeta import __doc__  # noqa: F401

__version__ = "0.1.0"
