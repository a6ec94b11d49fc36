import sys

from nonconv.cli import main

sys.exit(main())
