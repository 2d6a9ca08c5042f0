import sys
from pathlib import Path

# make the oracles module importable from all test files
sys.path.insert(0, str(Path(__file__).parent))
