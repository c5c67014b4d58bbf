"""
Pipelines package for the p-elastica toolkit
"""

from .probe_pipeline import probe_pipeline
from .verification_pipeline import verification_pipeline

__all__ = ["probe_pipeline", "verification_pipeline"]
