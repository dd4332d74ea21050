import sys

from ecf.cli import main

sys.exit(main())
