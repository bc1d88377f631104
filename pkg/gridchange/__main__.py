"""
Main entry point for running gridchange as a module.
Usage: python -m gridchange pipeline --t1 t1.raster --t2 t2.raster --out-dir run
"""

from .cli import main
import sys

if __name__ == '__main__':
    sys.exit(main())
