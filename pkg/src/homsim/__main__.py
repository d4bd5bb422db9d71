import sys

from homsim.cli import main

sys.exit(main())
