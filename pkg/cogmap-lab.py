"""
Command-line entry point for cogmap-lab.

This script delegates to the main CLI module in the package.
"""

import sys
from cogmap.cli import main

if __name__ == '__main__':
    sys.exit(main())
