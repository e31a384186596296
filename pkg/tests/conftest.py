import sys
from pathlib import Path

# make tests/oracles.py and tests/helpers importable regardless of cwd
sys.path.insert(0, str(Path(__file__).parent))
