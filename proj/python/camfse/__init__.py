"""Video error concealment by motion-compensated frequency selective extrapolation."""

from ._camfse import *  # noqa: F401,F403
from ._camfse import __doc__  # noqa: F401

__version__ = "0.1.0"
