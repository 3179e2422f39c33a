import sys

from ghostkitchen.cli import main

sys.exit(main())
