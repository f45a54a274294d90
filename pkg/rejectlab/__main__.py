import sys

from rejectlab.main import run

sys.exit(run())
