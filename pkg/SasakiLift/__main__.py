import sys
from SasakiLift.cli import main

sys.exit(main())
