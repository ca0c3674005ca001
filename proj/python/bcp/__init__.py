"""Binarized CP decomposition for knowledge graph completion."""

from ._bcp import *  # noqa: F401,F403
from ._bcp import __doc__  # noqa: F401
