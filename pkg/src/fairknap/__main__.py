import sys

from fairknap.cli import main

sys.exit(main())
