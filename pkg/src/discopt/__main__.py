import sys

from discopt.cli import main

sys.exit(main())
