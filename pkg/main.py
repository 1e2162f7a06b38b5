"""
Entry point for the sos-lyapunov command line
"""
import sys

from cli_corpus import main

if __name__ == "__main__":
    sys.exit(main())
