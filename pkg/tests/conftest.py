import sys
from pathlib import Path

sys.path.append(str(Path(__file__).resolve().parents[1]))


def pytest_configure(config) -> None:
    config.addinivalue_line("markers", "slow: randomized suites and large stars")
