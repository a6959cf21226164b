import struct

import numpy as np
import pytest

from ifsdim import (
    CifsSpec,
    CloudSizeError,
    ConfigurationError,
    GaussBranch,
    PointCloud,
    Similarity,
    build_fixed_point_cloud,
    build_limit_cloud,
)
from ifsdim.tails import ClusteredDigits, GaussDigitTail, PowerRule, SimilarityTail


def two_map_spec():
    return CifsSpec(1, (0.0, 1.0), ((1, Similarity(0.25, 0.0)), (2, Similarity(0.25, 0.75))))


def fp_spec(p=1.0, t=3.0):
    return CifsSpec(1, (0.0, 1.0), (),
                    SimilarityTail(PowerRule(1.0, t), PowerRule(1.0, p), start=2))


class TestLimitCloud:
    def test_binary_expansion_depth(self):
        # cylinders of diameter >= delta are expanded; at delta = 1/16 the
        # depth-2 cylinders (diameter exactly 1/16) still split, leaving
        # the eight depth-3 cylinders as frontier representatives
        cloud = build_limit_cloud(two_map_spec(), 1.0 / 16.0)
        assert len(cloud) == 8
        assert cloud.complete

    def test_frontier_points_are_anchor_images(self):
        cloud = build_limit_cloud(two_map_spec(), 1.0 / 16.0)
        # anchor defaults to the left endpoint, so representatives are
        # the left ends of depth-3 cylinders
        expect = sorted(
            o1 + 0.25 * (o2 + 0.25 * o3)
            for o1 in (0.0, 0.75) for o2 in (0.0, 0.75) for o3 in (0.0, 0.75)
        )
        assert np.allclose(cloud.points, expect)

    def test_tail_truncation_spacing_rule(self):
        delta = 1e-4
        cloud = build_fixed_point_cloud(fp_spec(), delta)
        pts = cloud.points
        assert pts[0] == 0.0  # accumulation representative
        # at most one representative per delta/2 cell, so any dropped
        # tail point sits within delta/2 of a kept one
        cells = np.floor(pts[1:] / (delta / 2.0)).astype(np.int64)
        assert len(np.unique(cells)) == len(cells)
        # sparse part of the tail is untouched: it is exactly {1/i}
        coarse = pts[pts > np.sqrt(delta)]
        i = np.round(1.0 / coarse)
        assert np.allclose(coarse, 1.0 / i)
        assert pts[-1] == pytest.approx(0.5)  # 1/i at i = 2

    def test_window_filters_to_tail_only(self):
        spec = CifsSpec(
            1, (0.0, 1.0),
            ((1, Similarity(0.2, 0.7)),),
            SimilarityTail(PowerRule(1.0, 3.0), PowerRule(1.0, 1.5), start=2),
        )
        # window below the explicit offset keeps only tail contributions
        cloud = build_limit_cloud(spec, 1e-4, window=(0.0, 0.3))
        assert np.all(cloud.points <= 0.3 + 1e-6)
        full = build_limit_cloud(spec, 1e-4)
        assert len(full) > len(cloud)

    def test_determinism_byte_for_byte(self):
        a = build_limit_cloud(fp_spec(), 1e-5)
        b = build_limit_cloud(fp_spec(), 1e-5)
        assert a.to_bytes() == b.to_bytes()

    def test_bad_delta(self):
        with pytest.raises(ConfigurationError):
            build_limit_cloud(two_map_spec(), 0.0)
        with pytest.raises(ConfigurationError):
            build_limit_cloud(two_map_spec(), 2.0)

    def test_cap_is_enforced_and_named(self):
        with pytest.raises(CloudSizeError) as err:
            build_limit_cloud(fp_spec(), 1e-7, cap=1000)
        assert "1000" in str(err.value)

    def test_generic_path_matches_similarity_path_geometry(self):
        # the same two-map system built via the generic Moebius walker
        spec = two_map_spec()
        via_sim = build_limit_cloud(spec, 1.0 / 16.0)
        forced = CifsSpec(1, (0.0, 1.0), spec.explicit + ((3, GaussBranch(97)),))
        cloud = build_limit_cloud(forced, 1.0 / 16.0)
        for p in via_sim.points:
            assert np.min(np.abs(cloud.points - p)) < 1e-12


class TestFixedPointCloud:
    def test_one_point_per_branch(self):
        spec = CifsSpec(1, (0.0, 1.0), ((2, GaussBranch(2)), (3, GaussBranch(3))))
        cloud = build_fixed_point_cloud(spec, 1e-3)
        assert cloud.label == "fixed_points"
        assert np.allclose(cloud.points, [1.0 / 3.0, 1.0 / 2.0])

    def test_clustered_digit_positions(self):
        spec = CifsSpec(1, (0.0, 1.0), (), GaussDigitTail(ClusteredDigits(0.5)))
        cloud = build_fixed_point_cloud(spec, 1e-5)
        # representatives near the reciprocal of every early block
        for b in (2, 3, 4, 5, 6, 8, 9, 10):
            assert np.min(np.abs(cloud.points - 1.0 / b)) < 1e-9


class TestPersistence:
    def test_binary_header_layout(self):
        cloud = PointCloud.from_points([0.25, 0.5], 1e-3, 1)
        blob = cloud.to_bytes()
        assert blob[:4] == b"IFSC"
        version, dim, delta, count = struct.unpack("<IId Q", blob[4:28])
        assert (version, dim, count) == (1, 1, 2)
        assert delta == 1e-3

    def test_round_trip(self, tmp_path):
        cloud = build_limit_cloud(two_map_spec(), 1.0 / 16.0)
        path = tmp_path / "cloud.bin"
        cloud.save(path)
        back = PointCloud.load(path)
        assert np.array_equal(back.points, cloud.points)
        assert back.delta == cloud.delta
        assert back.ambient_dim == cloud.ambient_dim

    def test_csv_export(self):
        cloud = PointCloud.from_points([0.1, 0.9], 1e-3, 1)
        text = cloud.to_csv()
        assert text.splitlines()[0] == "x"
        assert len(text.splitlines()) == 3

    def test_points_are_distinct_and_sorted(self):
        cloud = PointCloud.from_points([0.5, 0.1, 0.5], 1e-3, 1)
        assert np.array_equal(cloud.points, [0.1, 0.5])


def test_bad_magic_rejected():
    with pytest.raises(ConfigurationError):
        PointCloud.from_bytes(b"NOPE" + b"\x00" * 64)
