import numpy as np
import pytest

import chiralfield as cf


@pytest.fixture(scope="session")
def bg_timelike():
    return cf.timelike()


@pytest.fixture(scope="session")
def bg_spacelike():
    return cf.spacelike()


@pytest.fixture(scope="session")
def one_sol_cfg():
    return cf.SolitonConfig(poles=(-2.0,), constants=(1.0,))


@pytest.fixture(scope="session")
def two_sol_cfg():
    return cf.SolitonConfig(poles=(-2.0, 3.0), constants=(1.0, 2.0))


@pytest.fixture(scope="session")
def one_sol_field_129(one_sol_cfg, bg_timelike):
    grid = cf.Grid.lab(-5, 5, 129, -5, 5, 129)
    return cf.soliton_field(one_sol_cfg, bg_timelike, grid)


def order_between(norms, hs, lo, hi):
    """Fitted convergence order lies in [lo, hi]."""
    fitted = cf.fit_order(hs, norms).fitted_order
    return lo <= fitted <= hi, fitted
