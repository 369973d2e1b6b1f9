"""Sleeps for argv[1] seconds (default 0.2) without using CPU."""
import sys
import time

time.sleep(float(sys.argv[1]) if len(sys.argv) > 1 else 0.2)
