import pathlib

import pytest

from hetnet.netspec import parse_spec
from hetnet.presets import load_preset

DATA = pathlib.Path(__file__).parent / "data"

# two saddles joined both ways by straight corridors; p1 -> p2 perturbed
MINIMAL = """\
format: hetnet-spec/1
name: minimal
fixedpoints:
  - {id: p1, position: [0.0, 0.0], lambda_s: -1.0, lambda_u: 0.5, stable_axis: vertical, region_radius: 0.3}
  - {id: p2, position: [2.0, 0.0], lambda_s: -1.0, lambda_u: 0.5, stable_axis: horizontal, region_radius: 0.3}
pieces:
  - {kind: linear, region: [-0.5, 0.5, -0.5, 0.5], slope: 40.0, fixed_point: p1}
  - {kind: linear, region: [1.5, 2.5, -0.5, 0.5], slope: 40.0, fixed_point: p2}
  - {kind: transversal, region: [0.5, 1.5, -0.25, 0.25], slope: 40.0, a: 2.0, b: 0.0, c: 1.0, orientation: horizontal, corridor: c12}
corridors:
  - {id: c12, from: p1, to: p2, path: [[0.5, 0.0], [1.5, 0.0]], speed: 1.0}
perturbations:
  - corridor: c12
    section: [[1.0, -0.25], [1.0, 0.25]]
    params: {L1: 0.1, L2: 0.1, s1: 5.0, s2: 5.0, s3: 5.0, b: 0.0}
    amplitude: 0.1
settings: {dt: 0.01}
"""


@pytest.fixture
def minimal_text():
    return MINIMAL


@pytest.fixture
def minimal_spec():
    return parse_spec(MINIMAL)


@pytest.fixture(scope="session")
def fig1():
    return load_preset("fig1-cycle3")


@pytest.fixture(scope="session")
def fig2_sine():
    return load_preset("fig2-twosaddle-sine")


@pytest.fixture(scope="session")
def nichols():
    return load_preset("nichols4")
