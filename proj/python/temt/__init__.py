"""Temporal knowledge graph interval prediction."""

from ._temt import *  # noqa: F401,F403
