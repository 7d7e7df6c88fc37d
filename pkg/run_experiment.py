#!/usr/bin/env python3
"""
Main runner for the partition-matroid continuous greedy toolkit
Puts src/ on the import path and hands the command line to the CLI
"""

import os
import sys

# Add src directory to path
sys.path.append(os.path.join(os.path.dirname(os.path.abspath(__file__)), 'src'))

from cli_io import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
