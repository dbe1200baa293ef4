import sys

from bondent.cli import main

sys.exit(main())
