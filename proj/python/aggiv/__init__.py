"""Aggregate-treatment instrumental-variable toolkit.

Linear models with an aggregate treatment, interventional families on the
aggregate (ACIDs), closed-form IV estimands and average causal effects,
overidentification diagnostics, and the reproducible studies shipped with
the command line tool.
"""

from ._aggiv import *  # noqa: F401,F403
from ._aggiv import __version__  # noqa: F401
