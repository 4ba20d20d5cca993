import sys

from multimon.cli.main import main

sys.exit(main())
