import json
import math

import numpy as np
import pytest

from pychaoscipher.julia import (
    Family,
    JuliaApprox,
    OmegaSpec,
    default_escape_radius,
    escape_time,
    pixel_grid,
    read_pgm,
    realize_omega,
    render,
    STABILITY_MAX_ITER,
    stability_distance,
    stability_probe,
    write_pgm,
)


@pytest.fixture(scope="module")
def zero_delta_render():
    return render(OmegaSpec(b"seed", 0.0, 100), resolution=(64, 64), max_iter=100)


def test_zero_delta_is_unit_disc(zero_delta_render):
    grid = pixel_grid(zero_delta_render.window, zero_delta_render.resolution)
    members = zero_delta_render.members

    assert np.all(members[np.abs(grid) <= 0.9])
    assert not np.any(members[np.abs(grid) >= 1.1])


@pytest.mark.parametrize(
    "delta, family",
    [(0.0, Family.CUBIC), (0.5, Family.CUBIC), (3.5, Family.CUBIC), (0.3, Family.QUADRATIC)],
)
def test_render_symmetry(delta, family):
    julia = render(OmegaSpec(b"symmetry", delta, 64), resolution=(40, 30), max_iter=64, family=family)

    np.testing.assert_array_equal(julia.escape_iter, julia.escape_iter[::-1, ::-1])


def test_render_is_deterministic():
    spec = OmegaSpec(b"determinism", 0.5, 80)
    reference = render(spec, resolution=(33, 21), max_iter=80)

    for n_jobs in (1, 2, 5):
        julia = render(spec, resolution=(33, 21), max_iter=80, n_jobs=n_jobs)
        np.testing.assert_array_equal(julia.escape_iter, reference.escape_iter)


def test_render_output(zero_delta_render):
    assert zero_delta_render.escape_iter.shape == (64, 64)
    assert zero_delta_render.escape_iter.min() >= 0
    assert zero_delta_render.escape_iter.max() <= 100
    assert zero_delta_render.family is Family.CUBIC
    assert "resolution=64x64" in str(zero_delta_render)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"window": (1.0, -1.0, -1.0, 1.0)},
        {"window": (-1.0, 1.0, 1.0, 1.0)},
        {"resolution": (1, 10)},
        {"max_iter": 0},
        {"max_iter": 200},
    ],
)
def test_render_invalid_geometry(kwargs):
    with pytest.raises(ValueError):
        render(OmegaSpec(b"seed", 0.5, 100), **kwargs)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"seed": b"", "delta": 0.5},
        {"seed": b"seed", "delta": -0.5},
        {"seed": b"seed", "delta": math.inf},
        {"seed": b"seed", "delta": 0.5, "length": 0},
    ],
)
def test_omega_spec_invalid(kwargs):
    with pytest.raises(ValueError):
        OmegaSpec(**kwargs)


def test_realize_omega():
    short = realize_omega(OmegaSpec(b"omega", 0.8, 10))
    long = realize_omega(OmegaSpec(b"omega", 0.8, 20))

    assert long[:10] == short
    assert all(abs(c) <= 0.8 for c in long)
    assert realize_omega(OmegaSpec(b"other", 0.8, 10)) != short
    assert all(c == 0 for c in realize_omega(OmegaSpec(b"omega", 0.0, 10)))


def test_default_escape_radius():
    assert default_escape_radius(Family.CUBIC, 0.0) == pytest.approx(math.sqrt(2))
    assert default_escape_radius(Family.CUBIC, 3.5) == pytest.approx(math.sqrt(5.5))
    assert default_escape_radius(Family.QUADRATIC, 0.5) == 2.0
    assert default_escape_radius(Family.QUADRATIC, 3.0) == 3.0


def test_escape_time():
    omega = [0j] * 50

    assert escape_time(0.5 + 0j, omega, max_iter=50) == 50
    assert escape_time(2 + 0j, omega, max_iter=50) == 0
    # 1.2 -> 1.728 exceeds sqrt(2) after one step
    assert escape_time(1.2 + 0j, omega, max_iter=50) == 1

    with pytest.raises(ValueError):
        escape_time(0j, omega, max_iter=51)


def test_pixel_grid():
    grid = pixel_grid((0.0, 0.0, 1.0, 1.0), (2, 2))

    np.testing.assert_allclose(grid, [[0.25 + 0.75j, 0.75 + 0.75j], [0.25 + 0.25j, 0.75 + 0.25j]])

    grid = pixel_grid((-1.6, -1.6, 1.6, 1.6), (7, 6))
    np.testing.assert_array_equal(grid[::-1, ::-1], -grid)


def test_boundary():
    escape_iter = np.full((5, 5), 10)
    escape_iter[0, :] = 3
    julia = JuliaApprox((-1.0, -1.0, 1.0, 1.0), (5, 5), 10, escape_iter, Family.CUBIC, OmegaSpec(b"s", 0.1, 10))

    expected = np.zeros((5, 5), dtype=bool)
    expected[1, :] = True
    expected[4, :] = True
    expected[:, 0] = True
    expected[:, 4] = True
    expected[0, :] = False

    np.testing.assert_array_equal(julia.boundary(), expected)


def test_pgm(tmp_path, zero_delta_render):
    filename = tmp_path / "julia.pgm"
    zero_delta_render.to_pgm(filename)

    with open(filename, "rb") as fp:
        assert fp.readline() == b"P5 64 64 255\n"

    image = read_pgm(filename)
    np.testing.assert_array_equal(image, zero_delta_render.to_image())
    assert image[32, 32] == 255


def test_pgm_invalid(tmp_path):
    truncated = tmp_path / "truncated.pgm"
    truncated.write_bytes(b"P5 64")
    with pytest.raises(ValueError):
        read_pgm(truncated)

    not_pgm = tmp_path / "ascii.pgm"
    write_pgm(not_pgm, np.zeros((2, 2), dtype=np.uint8))
    not_pgm.write_bytes(b"P2" + not_pgm.read_bytes()[2:])
    with pytest.raises(ValueError):
        read_pgm(not_pgm)


def test_to_json(tmp_path, zero_delta_render):
    filename = tmp_path / "julia.json"
    zero_delta_render.to_json(filename)

    with open(filename) as fp:
        data = json.load(fp)

    assert data["resolution"] == [64, 64]
    assert data["family"] == "cubic"
    assert data["seed"] == b"seed".hex()
    assert np.array_equal(data["escape_iter"], zero_delta_render.escape_iter)


def test_stability_distance_zero_delta():
    assert stability_distance(0.0, b"a", b"b", resolution=(32, 32), max_iter=50) == 0.0


def test_stability_distance_range():
    distance = stability_distance(3.5, b"a", b"b", resolution=(32, 32), max_iter=50)

    assert 0.0 <= distance <= 1.0
    assert stability_distance(3.5, b"a", b"a", resolution=(32, 32), max_iter=50) == 0.0


def test_stability_probe():
    result = stability_probe(0.0, 2, resolution=(16, 16), max_iter=20)

    assert result == {
        "delta": 0.0,
        "trials": 2,
        "max_iter": 20,
        "empty_unions": 0,
        "mean_distance": 0.0,
        "stdev": 0.0,
        "distances": [0.0, 0.0],
    }

    with pytest.raises(ValueError) as excinfo:
        stability_probe(0.5, 1)
    assert "At least 2 trials" in str(excinfo.value)


def test_stability_distance_is_symmetric_difference_over_union():
    renders = [
        render(OmegaSpec(seed, 0.5, STABILITY_MAX_ITER), resolution=(24, 24), max_iter=STABILITY_MAX_ITER)
        for seed in (b"left", b"right")
    ]
    members_a, members_b = (julia.members for julia in renders)
    expected = np.count_nonzero(members_a ^ members_b) / max(np.count_nonzero(members_a | members_b), 1)

    assert stability_distance(0.5, b"left", b"right", resolution=(24, 24)) == pytest.approx(expected)


def test_stability_probe_counts_empty_unions():
    result = stability_probe(3.5, 3, resolution=(32, 32), max_iter=64)

    assert result["empty_unions"] >= 1
    assert result["distances"].count(0.0) >= result["empty_unions"]


@pytest.mark.parametrize("delta", [0.5, 3.5])
def test_members_shrink_with_budget(delta):
    spec = OmegaSpec(b"budget", delta, 64)
    shallow = render(spec, resolution=(48, 48), max_iter=32).members
    deep = render(spec, resolution=(48, 48), max_iter=64).members

    assert not np.any(deep & ~shallow)


@pytest.mark.slow
def test_stable_regime_is_more_stable():
    stable = stability_probe(0.5, 20, resolution=(128, 128))
    chaotic = stability_probe(3.5, 20, resolution=(128, 128))

    assert stable["max_iter"] == chaotic["max_iter"] == STABILITY_MAX_ITER
    assert chaotic["empty_unions"] == 0
    assert stable["mean_distance"] < chaotic["mean_distance"], (stable, chaotic)
