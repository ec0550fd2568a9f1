import pytest

from lrqbench import WmcInstance, solve_instance


@pytest.fixture
def triangle() -> WmcInstance:
    """Hand-checked 3-vertex instance.

    Cuts: 000/111 -> 0, 100/011 -> 1.5 (best), 010/101 -> 0.75, 001/110 -> 1.25.
    Total weight 1.75, so the uniform-sampler baseline is 0.875/1.5 = 7/12.
    """
    return WmcInstance(3, ((0, 1, 0.5), (0, 2, 1.0), (1, 2, 0.25)))


@pytest.fixture
def triangle_solved(triangle) -> WmcInstance:
    return solve_instance(triangle)
