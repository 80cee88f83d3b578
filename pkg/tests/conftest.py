import sys

import numpy as np
import pytest

from nilflow.algebra import Algebra2Step, heisenberg_algebra
from nilflow.flow import sample_states


def free_algebra_3() -> Algebra2Step:
    """Free 2-step nilpotent algebra on three generators: j(Z) V = Z x V."""
    eps = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[i, j, k], eps[i, k, j] = 1.0, -1.0
    # j(Z_i)_{ab} = eps_{i b a} so that j(Z) V = Z x V
    return Algebra2Step(np.transpose(eps, (0, 2, 1)), np.eye(6))


def random_metric_algebra(rng, dim_v=4, dim_z=2) -> Algebra2Step:
    """Random 2-step algebra with a non-orthonormal metric."""
    M = rng.normal(size=(dim_v, dim_v))
    Gv = M @ M.T + dim_v * np.eye(dim_v)
    N = rng.normal(size=(dim_z, dim_z))
    Gz = N @ N.T + dim_z * np.eye(dim_z)
    js = []
    for _ in range(dim_z):
        S = rng.normal(size=(dim_v, dim_v))
        js.append(np.linalg.solve(Gv, S - S.T))
    G = np.zeros((dim_v + dim_z,) * 2)
    G[:dim_v, :dim_v], G[dim_v:, dim_v:] = Gv, Gz
    return Algebra2Step(np.array(js), G)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[1, 2, 3], ids=lambda n: f"H{n}")
def hn(request):
    return heisenberg_algebra(request.param)


@pytest.fixture
def states_h2():
    return sample_states(heisenberg_algebra(2), 200, seed=7)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(mod.RESULTS.items()):
        terminalreporter.write_line(line)
