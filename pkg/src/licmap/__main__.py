import sys

from licmap.cli import main

sys.exit(main())
