"""Nested GNN and 1-WL toolkit."""

from ._ngnn import *  # noqa: F401,F403
from ._ngnn import __doc__  # noqa: F401
