"""Entry point for the application - runs rejectlab.main"""
import sys

from rejectlab.main import run

if __name__ == "__main__":
    sys.exit(run())
