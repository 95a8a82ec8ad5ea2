import sys

from nsklab.cli import main

sys.exit(main())
