import os
from pathlib import Path

import pytest

from ccsubmod.problems import graph_to_coverage, parse_dimacs_edges

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"
FRB_EXTENSIONS = (".mis", ".clq", ".dimacs", ".txt", "")


def find_benchmark_graph(name: str) -> Path | None:
    """Locate a benchmark graph under data/ or $CCSUBMOD_DATA."""
    roots = [DATA_DIR]
    env = os.environ.get("CCSUBMOD_DATA")
    if env:
        roots.insert(0, Path(env))
    for root in roots:
        for ext in FRB_EXTENSIONS:
            candidate = root / f"{name}{ext}"
            if candidate.is_file():
                return candidate
    return None


def require_benchmark_graph(name: str) -> Path:
    path = find_benchmark_graph(name)
    if path is None:
        pytest.skip(f"{name} not available; download it with "
                    f"scripts/fetch_frb.py (needs network access)")
    return path


@pytest.fixture(scope="session")
def frb30_coverage():
    path = require_benchmark_graph("frb30-15-01")
    with open(path) as fh:
        n, edges = parse_dimacs_edges(fh)
    return graph_to_coverage(edges, n, problem_id="frb30-15-01")


@pytest.fixture(scope="session")
def frb35_coverage():
    path = require_benchmark_graph("frb35-17-01")
    with open(path) as fh:
        n, edges = parse_dimacs_edges(fh)
    return graph_to_coverage(edges, n, problem_id="frb35-17-01")
