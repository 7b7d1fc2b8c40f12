"""Module runner: python -m convabuse ..."""

import sys

from .cli import main

sys.exit(main())
