import sys

from nestca.cli import main

sys.exit(main())
