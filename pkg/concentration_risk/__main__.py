"""
Module entry point: ``python -m concentration_risk``.
"""
import sys

from concentration_risk.cli import main

if __name__ == '__main__':
    sys.exit(main())
