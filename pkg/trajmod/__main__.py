import sys

from trajmod.cli import main

sys.exit(main())
