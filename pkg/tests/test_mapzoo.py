import numpy as np
import pytest

from setdyn import mapzoo
from setdyn.errors import ConfigError

ALL_SYSTEMS = mapzoo.list_systems()


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


def test_registry_contents():
    assert ALL_SYSTEMS == [
        "cat_map",
        "circle_semistable",
        "cubic_interval",
        "nested_rings",
        "nf_timeq",
        "periodic_spot",
    ]


def test_make_system_rejects_unknown_name():
    with pytest.raises(ConfigError, match="unknown system"):
        mapzoo.make_system("lorenz", {})


def test_make_system_rejects_unknown_and_bad_params():
    with pytest.raises(ConfigError, match="no parameter"):
        mapzoo.make_system("cubic_interval", {"b": 0.1})
    with pytest.raises(ConfigError):
        mapzoo.make_system("cubic_interval", {"a": float("inf")})
    with pytest.raises(ConfigError):
        mapzoo.make_system("cubic_interval", {"a": 0.7})
    with pytest.raises(ConfigError):
        mapzoo.make_system("periodic_spot", {"q": 3, "epsilon": 0.9})


# periodic_spot is a local chart around the periodic point, not an invariant
# set: the shear legitimately carries window points outside it.
@pytest.mark.parametrize("name", [n for n in ALL_SYSTEMS if n != "periodic_spot"])
def test_forward_keeps_sample_points_in_domain(name):
    system = mapzoo.make_system(name, {})
    pts = system.sample_points(200, seed=3)
    img = system.domain.wrap(system.forward(pts))
    assert np.all(system.domain.contains(img, atol=1e-9))


@pytest.mark.parametrize("name", ALL_SYSTEMS)
def test_inverse_round_trip(name):
    system = mapzoo.make_system(name, {})
    assert system.inverse is not None
    report = mapzoo.check_inverse_consistency(system, n_samples=60, seed=11)
    assert report.passed, f"{name}: round-trip error {report.max_error:.3e}"


def test_sample_points_deterministic():
    system = mapzoo.make_system("cat_map", {})
    a = system.sample_points(50, seed=5)
    b = system.sample_points(50, seed=5)
    assert np.array_equal(a, b)


def test_iterate_composes_forward():
    system = mapzoo.make_system("cat_map", {})
    pts = system.sample_points(10, seed=1)
    two = system.iterate(pts, 2)
    manual = system.domain.wrap(system.forward(system.domain.wrap(system.forward(pts))))
    assert np.allclose(two, manual, atol=1e-12)


# ---------------------------------------------------------------------------
# individual maps
# ---------------------------------------------------------------------------


def test_cat_map_known_image():
    system = mapzoo.make_system("cat_map", {})
    img = system.forward(np.array([[0.2, 0.3]]))
    assert np.allclose(img % 1.0, [[0.7, 0.5]], atol=1e-15)


def test_circle_fixed_point_and_monotone_lift():
    system = mapzoo.make_system("circle_semistable", {})
    assert system.forward(np.array([[0.0]]))[0, 0] == 0.0
    assert system.forward(np.array([[np.pi]]))[0, 0] == pytest.approx(np.pi + 1.0)
    grid = np.linspace(0.0, 2 * np.pi, 400, endpoint=False)[:, None]
    lift = system.forward(grid)[:, 0]
    assert np.all(np.diff(lift) > 0)


def test_cubic_is_odd_with_three_fixed_points():
    system = mapzoo.make_system("cubic_interval", {"a": 0.25})
    for x in (-1.0, 0.0, 1.0):
        assert system.forward(np.array([[x]]))[0, 0] == x
    xs = np.linspace(-1, 1, 101)[:, None]
    assert np.allclose(system.forward(-xs), -system.forward(xs), atol=1e-15)


def test_nested_rings_ring_invariance():
    system = mapzoo.make_system("nested_rings", {})
    for n in (2, 3, 4, 5):
        r = 1.0 / n
        pts = np.stack([r * np.cos([0.3, 1.1, 2.9]), r * np.sin([0.3, 1.1, 2.9])], axis=1)
        out = system.forward(pts)
        drift = np.abs(np.hypot(out[:, 0], out[:, 1]) - r)
        assert np.max(drift) < 1e-6, f"ring 1/{n} drifted by {np.max(drift):.2e}"


def test_nested_rings_rim_is_clamped():
    system = mapzoo.make_system("nested_rings", {})
    pts = np.array([[1.2, 0.3], [-0.9, 0.9]])
    out = system.forward(pts)
    assert np.all(np.hypot(out[:, 0], out[:, 1]) <= 1.25 + 1e-9)


def test_nf_timeq_fixes_origin():
    system = mapzoo.make_system("nf_timeq", {})
    out = system.forward(np.zeros((1, 2)))
    assert np.allclose(out, 0.0, atol=1e-14)


def test_nf_timeq_respects_parameter_overrides():
    system = mapzoo.make_system("nf_timeq", {"mu": 0.02, "q": 7})
    nf = system.extras["normal_form"]
    assert nf.mu == 0.02 and nf.q == 7


def test_periodic_spot_involution_conjugates_inverse():
    system = mapzoo.make_system("periodic_spot", {"q": 3, "epsilon": 0.2})
    h = system.involution
    pts = system.sample_points(50, seed=2)
    assert np.allclose(h(h(pts)), pts, atol=1e-14)
    lhs = h(system.forward(h(pts)))
    rhs = system.inverse(pts)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_newton_inverse_rejects_bad_bracket():
    # inverting y = x^3 around a bracket that excludes the preimage
    with pytest.raises(Exception):
        mapzoo.newton_inverse_1d(lambda x: x ** 3, np.array([8.0]), lo=-1.0, hi=1.0)
