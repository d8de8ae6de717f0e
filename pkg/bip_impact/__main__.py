import sys

from bip_impact.cli import main

sys.exit(main())
