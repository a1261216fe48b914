import sys
from pathlib import Path

# make the oracles module importable from any test file
sys.path.insert(0, str(Path(__file__).parent))

BENCH10_SPECTRUM = (0.6, 1.2, 6.7, 9.3, 10.5, 15.5, 17.2, 20.25, 30.1, 35.4)
