"""Tests for grid descriptors and the CSV field format."""
from __future__ import annotations

import numpy as np
import pytest

from lindquad import (ConfigError, GridField, GridSpec, centered_grid,
                      grid_from_dict, read_field_csv, write_field_csv)


def test_axes_and_points_layout() -> None:
    spec = GridSpec(origin=(-1.0, 2.0), spacing=(0.5, 0.25), shape=(3, 5))
    assert np.allclose(spec.p_axis, [-1.0, -0.5, 0.0])
    assert np.allclose(spec.q_axis, [2.0, 2.25, 2.5, 2.75, 3.0])
    assert spec.cell_area == pytest.approx(0.125)
    pts = spec.points()
    assert pts.shape == (3, 5, 2)
    # row index is p, column index is q
    assert np.allclose(pts[1, 3], [-0.5, 2.75])


def test_centered_grid_is_node_symmetric() -> None:
    spec = centered_grid((0.5, -1.0), (2.0, 3.0), (9, 17))
    assert spec.p_axis[0] == pytest.approx(-1.5)
    assert spec.p_axis[-1] == pytest.approx(2.5)
    assert np.mean(spec.p_axis) == pytest.approx(0.5)
    assert np.mean(spec.q_axis) == pytest.approx(-1.0)
    assert spec.q_axis[-1] == pytest.approx(2.0)


def test_grid_validation() -> None:
    with pytest.raises(ConfigError):
        GridSpec(origin=(0.0, 0.0), spacing=(0.0, 0.1), shape=(4, 4))
    with pytest.raises(ConfigError):
        GridSpec(origin=(0.0, 0.0), spacing=(0.1, 0.1), shape=(1, 4))
    with pytest.raises(ConfigError):
        GridSpec(origin=(np.nan, 0.0), spacing=(0.1, 0.1), shape=(4, 4))


def test_grid_dict_round_trip() -> None:
    spec = GridSpec(origin=(-2.0, -3.0), spacing=(0.1, 0.2), shape=(8, 6))
    back = grid_from_dict(spec.to_dict())
    assert back == spec

    centered = grid_from_dict({"center": [0.0, 0.0], "half_extent": [2.0, 2.0],
                               "shape": [5, 5]})
    assert centered.p_axis[0] == pytest.approx(-2.0)
    with pytest.raises(ConfigError):
        grid_from_dict({"origin": [0, 0], "spacing": [0.1, 0.1],
                        "shape": [4, 4], "bogus": 1})
    with pytest.raises(ConfigError):
        grid_from_dict({"shape": [4, 4]})


def test_field_integral_and_shape_check() -> None:
    spec = GridSpec(origin=(0.0, 0.0), spacing=(0.5, 0.5), shape=(4, 4))
    field = GridField(spec=spec, values=np.ones((4, 4)))
    assert field.integral == pytest.approx(16 * 0.25)
    with pytest.raises(ConfigError):
        GridField(spec=spec, values=np.ones((4, 3)))


def test_field_csv_round_trip_real(tmp_path) -> None:
    spec = centered_grid((0.0, 0.0), (1.0, 1.0), (6, 7))
    rng = np.random.default_rng(5)
    field = GridField(spec=spec, values=rng.normal(size=(6, 7)))
    path = str(tmp_path / "field.csv")
    write_field_csv(field, path)

    header = (tmp_path / "field.csv").read_text().splitlines()[0]
    assert header == "p,q,value_re,value_im"
    assert (tmp_path / "field.csv.json").exists()

    back = read_field_csv(path)
    assert back.spec == spec
    assert back.values.dtype == np.float64
    assert np.array_equal(back.values, field.values)


def test_field_csv_round_trip_complex(tmp_path) -> None:
    spec = centered_grid((0.0, 0.0), (1.0, 1.0), (4, 4))
    rng = np.random.default_rng(6)
    values = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    path = str(tmp_path / "field.csv")
    write_field_csv(GridField(spec=spec, values=values), path)
    back = read_field_csv(path)
    assert back.values.dtype == np.complex128
    assert np.array_equal(back.values, values)


def test_field_csv_rewrite_is_byte_identical(tmp_path) -> None:
    spec = centered_grid((0.0, 0.0), (2.0, 2.0), (5, 5))
    pts = spec.points()
    values = np.exp(-pts[..., 0] ** 2 - pts[..., 1] ** 2)
    path = str(tmp_path / "field.csv")
    write_field_csv(GridField(spec=spec, values=values), path)
    first = (tmp_path / "field.csv").read_bytes()
    write_field_csv(GridField(spec=spec, values=values), path)
    assert (tmp_path / "field.csv").read_bytes() == first
