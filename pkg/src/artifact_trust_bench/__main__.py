"""Entry point for ``python -m artifact_trust_bench``."""

import sys

from .cli import main

if __name__ == "__main__":
    try:
        main()
    except KeyboardInterrupt:
        print("Stopped by user", file=sys.stderr)
        sys.exit(130)
