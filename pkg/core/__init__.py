"""
Core modules for clickboost.

Import submodules directly (core.dataset, core.boosting, ...); the workflow
orchestrator depends on learners/ and tools/, which depend back on core.
"""

__version__ = "1.0.0"
