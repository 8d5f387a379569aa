import sys

# Load environment variables
from dotenv import load_dotenv
load_dotenv()

from core.cli import run_cli

if __name__ == '__main__':
    try:
        sys.exit(run_cli(sys.argv[1:]))
    except KeyboardInterrupt:
        sys.exit(130)
