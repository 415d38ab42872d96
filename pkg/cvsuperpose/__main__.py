import sys

from cvsuperpose.cli import main

sys.exit(main())
