"""Synthetic wing bending-moment workbench: generator, codecs, tree ensembles."""

from ._core import *  # noqa: F401,F403
