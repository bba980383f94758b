from fvie.cli import main
import sys
sys.exit(main())
