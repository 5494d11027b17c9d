"""
Granularity adjustment engine for credit portfolio concentration risk.
"""
__version__ = '0.1.0'
