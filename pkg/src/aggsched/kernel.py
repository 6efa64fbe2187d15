"""Select the episode kernel: compiled extension if importable, else pure Python.

Set ``AGGSCHED_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _episode_py

PythonEpisodeKernel = _episode_py.EpisodeKernel

try:
    if os.environ.get("AGGSCHED_PURE_PYTHON"):
        raise ImportError("pure-Python kernel forced by AGGSCHED_PURE_PYTHON")
    from ._episode import EpisodeKernel as CompiledEpisodeKernel
except ImportError:
    CompiledEpisodeKernel = None

EpisodeKernel = CompiledEpisodeKernel or PythonEpisodeKernel
COMPILED = CompiledEpisodeKernel is not None
