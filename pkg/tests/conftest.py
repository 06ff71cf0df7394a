import numpy as np
import pytest

from fvgrad.grids import EllipticGridSpec, GridSpec, generate

SMALL_ELLIPTIC = EllipticGridSpec(solver_n=33)

FAMILY_SPECS = {
    "cartesian": GridSpec("cartesian", 1),
    "perturbed": GridSpec("perturbed", 1, seed=7),
    "perturbed_straight": GridSpec("perturbed", 1, seed=7, straight_boundary=True),
    "composite": GridSpec("composite", 1),
    "elliptic": GridSpec("elliptic", 1, elliptic=SMALL_ELLIPTIC),
}


@pytest.fixture(scope="session", params=sorted(FAMILY_SPECS))
def family_mesh(request):
    return generate(FAMILY_SPECS[request.param])


def unit_square_2x2():
    from fvgrad.mesh import build_mesh

    v = np.array([[i * 0.5, j * 0.5] for j in range(3) for i in range(3)])
    cells = [[0, 1, 4, 3], [1, 2, 5, 4], [3, 4, 7, 6], [4, 5, 8, 7]]
    return build_mesh(v, cells, default_patch="wall")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
