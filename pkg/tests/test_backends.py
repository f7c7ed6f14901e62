"""The compiled core and the pure-Python fallback must agree bit for bit."""
import numpy as np
import pytest

from hetnet import core
from hetnet.dynamics import advance, separation_growth
from hetnet.presets import load_preset

cython = pytest.importorskip("hetnet._core")


def test_selected_backend_name():
    assert core.BACKEND in ("cython", "python")
    assert core.get_backend("python").NAME == "python"
    assert core.get_backend("cython").NAME == "cython"
    with pytest.raises(ValueError):
        core.get_backend("fortran")


@pytest.mark.parametrize("name, init", [
    ("fig1-cycle3", (0.6, 0.1)),
    ("fig2-twosaddle-square", (0.5, 0.01)),
    ("nichols4", (0.5, 0.01)),
    ("linderman8", (0.5, 0.01)),
])
def test_trajectories_identical(name, init):
    spec = load_preset(name)
    a = advance(spec, init, 4000, backend="python")
    b = advance(spec, init, 4000, backend="cython")
    assert np.array_equal(a.points, b.points)
    assert a.perturbation_events == b.perturbation_events


def test_lyapunov_identical():
    spec = load_preset("fig2-twosaddle-sine")
    assert separation_growth(spec, (0.5, 0.01), n_steps=3000, backend="python") == \
        separation_growth(spec, (0.5, 0.01), n_steps=3000, backend="cython")


def test_visits_and_labels_identical():
    spec = load_preset("nichols4")
    c = core.compile_spec(spec)
    out = []
    for be in (core.get_backend("python"), core.get_backend("cython")):
        armed = np.ones(len(c.Q), dtype=np.uint8)
        vals, lens, status, steps, x, y = be.visits(c.P, c.Q, c.box, c.dt, 0.5, 0.01, 20_000,
                                                    10_000, 2, c.D, c.T, armed)
        pts = advance(spec, (0.5, 0.01), 2000).points
        out.append((np.asarray(vals).tolist(), np.asarray(lens).tolist(), status, steps, x, y,
                    armed.tolist(), be.label_points(c.D, c.T, pts).tolist()))
    assert out[0] == out[1]


def test_kernel_identical():
    py, cy = core.get_backend("python"), core.get_backend("cython")
    for a in np.linspace(-1.3, 1.3, 301):
        assert py.kernel_g(a, 0.1, 0.2, 50.0, 7.0, 20.0, -0.3) == cy.kernel_g(a, 0.1, 0.2, 50.0, 7.0, 20.0, -0.3)
