import numpy as np
import pytest

from supercrit.geometry import make_profile
from supercrit.reduction import hopf_reduce, plain_problem
from supercrit.solver.variational import SolverOptions, mountain_pass_solve

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def disk():
    return make_profile("ball", center=[0.0, 0.0], radius=1.0)


@pytest.fixture(scope="session")
def disk_problem(disk):
    return plain_problem(disk, 4.0)


@pytest.fixture(scope="session")
def disk_solution(disk_problem):
    return mountain_pass_solve(disk_problem, SolverOptions(h=1 / 128))


@pytest.fixture(scope="session")
def disk_solution_fine(disk_problem):
    return mountain_pass_solve(disk_problem, SolverOptions(h=1 / 256))


@pytest.fixture(scope="session")
def coarse_disk_solution(disk_problem):
    return mountain_pass_solve(disk_problem, SolverOptions(h=1 / 32))


@pytest.fixture(scope="session")
def shell():
    return make_profile("shell", center=[0.0, 0.0, 0.0], inner=0.5, outer=1.0)


@pytest.fixture(scope="session")
def hopf_shell_solution(shell):
    problem = hopf_reduce(shell, 0.0, 4.0)
    return mountain_pass_solve(problem, SolverOptions(h=1 / 32, symmetry="cube"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
