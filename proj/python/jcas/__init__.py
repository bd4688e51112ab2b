"""Learned joint communication and sensing workbench."""

from ._jcas import *  # noqa: F401,F403
from ._jcas import __version__  # noqa: F401
