import sys

from dpkcore.cli import main

sys.exit(main())
