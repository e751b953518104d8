"""
Analysis modules for prediction evaluation and configuration sweeps
"""

__all__ = ['evaluation']
