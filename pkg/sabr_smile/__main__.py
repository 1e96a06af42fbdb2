"""Run the command line with python -m sabr_smile."""

import sys

from .cli import main

sys.exit(main())
