import re

import numpy as np
import pytest
from scipy.spatial import cKDTree

from kleinlab.gasket import CirclePacking, OrientedCircle, is_apollonian_like
from kleinlab.groups import Alphabet, MarkedGroup, solve_parabolic_commutator
from kleinlab.limitset import (
    DfsConfig,
    EllipticOnlyError,
    EmptyWindowError,
    LimitSetCloud,
    Rectangle,
    benchmark_word_traversal,
    hausdorff_distance,
    limit_points_by_fixed_points,
    limit_set_dfs,
    render,
)
from kleinlab.mobius import INFINITY, MoebiusMap, chordal_distance, sphere_coords

WINDOW = Rectangle(-1.0, -1.0, 2.0, 1.0)


@pytest.fixture(scope="module")
def group():
    return solve_parabolic_commutator().group


def strip_seeds():
    return (
        OrientedCircle.from_line(-1j, -0.5),
        OrientedCircle.from_line(1j, -0.5),
        OrientedCircle.from_center_radius(-0.5, 0.5),
        OrientedCircle.from_center_radius(0.5, 0.5),
    )


def cloud_of(points):
    cloud = LimitSetCloud(1e-9)
    for i, p in enumerate(points):
        cloud.try_add(p, "x" * i)
    return cloud


def test_rectangle_parse_and_validation():
    w = Rectangle.parse(" -1, -1, 2, 1 ")
    assert (w.x0, w.y0, w.x1, w.y1) == (-1.0, -1.0, 2.0, 1.0)
    assert w.contains(0.5j)
    assert not w.contains(3.0)
    with pytest.raises(ValueError):
        Rectangle(0, 0, 0, 1)
    with pytest.raises(ValueError):
        Rectangle.parse("1,2,3")


def test_fixed_point_cloud_of_diagonal_map():
    diag = MarkedGroup(Alphabet(["a"]), {"a": MoebiusMap(2, 0, 0, 0.5)})
    cloud = limit_points_by_fixed_points(diag, 3)
    assert [p.point for p in cloud.points] == [INFINITY, 0j]
    assert [p.word for p in cloud.points] == ["a", "A"]
    assert cloud.finite_points() == [0j]


def test_fixed_point_cloud_rejects_elliptic_group():
    rot = MarkedGroup(Alphabet(["a"]), {"a": MoebiusMap(0, -1, 1, 0)})
    with pytest.raises(EllipticOnlyError):
        limit_points_by_fixed_points(rot, 2)


def test_cloud_contains_generator_and_commutator_points(group):
    cloud = limit_points_by_fixed_points(group, 4)
    pts = [p.point for p in cloud.points]
    assert INFINITY in pts
    finite = cloud.finite_points()
    for target in (0j, (-1 + 1j) / 2):
        assert min(abs(z - target) for z in finite) < 1e-9


def test_cloud_sizes_are_reproducible(group):
    sizes = [len(limit_points_by_fixed_points(group, d)) for d in range(1, 7)]
    assert sizes == [2, 10, 38, 122, 422, 1302]


def test_deeper_cloud_extends_shallower_one(group):
    c4 = limit_points_by_fixed_points(group, 4)
    c5 = limit_points_by_fixed_points(group, 5)
    assert len(c5) > len(c4)
    for a, b in zip(c4.points, c5.points):
        assert a.word == b.word
        assert chordal_distance(a.point, b.point) == 0.0


def test_cloud_is_nearly_invariant_two_depths_up(group):
    # a generator image of a length-d fixed point is the fixed point of a
    # conjugate word of length at most d + 2
    c5 = limit_points_by_fixed_points(group, 5)
    c7 = limit_points_by_fixed_points(group, 7)
    tree = cKDTree(np.array([sphere_coords(p.point) for p in c7.points]))
    for letter in "aAbB":
        g = group.letter_map(letter)
        moved = np.array([sphere_coords(g.apply(p.point)) for p in c5.points])
        assert tree.query(moved)[0].max() < 1e-9


def test_dfs_with_huge_epsilon_emits_only_seeds(group):
    result = limit_set_dfs(group, DfsConfig(epsilon=10.0, max_depth=5, seeds=strip_seeds()))
    assert result.stats.words_visited == 4
    assert result.stats.circles_emitted == 4
    assert result.stats.branches_pruned == 4
    assert result.stats.depth_exhausted_branches == 0
    assert result.stats.max_depth_reached == 0
    assert [e.word for e in result.circles] == [""] * 4


def test_dfs_is_deterministic(group):
    cfg = DfsConfig(epsilon=0.2, max_depth=14, seeds=strip_seeds(), window=WINDOW)
    r1 = limit_set_dfs(group, cfg)
    r2 = limit_set_dfs(group, cfg)
    assert [e.word for e in r1.circles] == [e.word for e in r2.circles]
    assert [repr(e.circle) for e in r1.circles] == [repr(e.circle) for e in r2.circles]
    assert [p.point for p in r1.cloud.points] == [p.point for p in r2.cloud.points]
    assert r1.stats.words_visited == r2.stats.words_visited
    assert r1.stats.circles_emitted == r2.stats.circles_emitted


def test_dfs_stats_at_fixed_settings(group):
    cfg = DfsConfig(epsilon=0.2, max_depth=14, seeds=strip_seeds(), window=WINDOW)
    stats = limit_set_dfs(group, cfg).stats
    assert stats.circles_emitted == 33
    assert stats.words_visited == 48


def test_halving_epsilon_emits_more_circles(group):
    counts = []
    for eps in (0.4, 0.2, 0.1):
        cfg = DfsConfig(epsilon=eps, max_depth=14, seeds=strip_seeds(), window=WINDOW)
        counts.append(limit_set_dfs(group, cfg).stats.circles_emitted)
    assert counts == sorted(counts)
    assert counts[0] < counts[-1]
    assert counts == [19, 33, 63]


def test_dfs_emitted_circles_are_word_images_of_seeds(group):
    seeds = strip_seeds()
    cfg = DfsConfig(epsilon=0.05, max_depth=14, seeds=seeds, window=WINDOW)
    result = limit_set_dfs(group, cfg)
    for e in result.circles[::17]:
        if not e.word:
            continue
        m = group.evaluate(e.word)
        best = min(
            max(abs(img.A - e.circle.A), abs(img.B - e.circle.B), abs(img.C - e.circle.C))
            for img in (s.transform(m) for s in seeds)
        )
        assert best < 1e-9


def test_dfs_preserves_seed_tangencies(group):
    # the four seeds are mutually tangent (a 0,0,2,2 Descartes quadruple);
    # transport by any word keeps every pairwise inversive product at -2
    seeds = strip_seeds()
    for i in range(4):
        for j in range(i + 1, 4):
            assert seeds[i].inversive_product(seeds[j]) == pytest.approx(-2.0)
    for word in ("a", "b", "aB", "Aab", "bbA"):
        m = group.evaluate(word)
        moved = [s.transform(m) for s in seeds]
        for i in range(4):
            for j in range(i + 1, 4):
                assert moved[i].inversive_product(moved[j]) == pytest.approx(-2.0, abs=1e-6)


def test_dfs_config_validation(group):
    with pytest.raises(ValueError):
        DfsConfig(epsilon=0.0, max_depth=5, seeds=strip_seeds())
    with pytest.raises(ValueError):
        DfsConfig(epsilon=0.1, max_depth=0, seeds=strip_seeds())
    with pytest.raises(ValueError):
        DfsConfig(epsilon=0.1, max_depth=5, seeds=())


def test_hausdorff_basics():
    a = cloud_of([0j, 1j, 0.5 + 0.5j])
    w = Rectangle(-2.0, -2.0, 2.0, 2.0)
    assert hausdorff_distance(a, a, w) == 0.0
    assert hausdorff_distance(cloud_of([0j]), cloud_of([1.0 + 0j]), w) == pytest.approx(1.0)
    shifted = cloud_of([p + 0.5 for p in a.finite_points()])
    assert hausdorff_distance(a, shifted, w) == pytest.approx(0.5)


def test_hausdorff_ignores_infinity_and_needs_window_points():
    w = Rectangle(-1.0, -1.0, 1.0, 1.0)
    a = cloud_of([INFINITY, 0j])
    assert hausdorff_distance(a, cloud_of([0j]), w) == 0.0
    with pytest.raises(EmptyWindowError):
        hausdorff_distance(a, cloud_of([5.0 + 0j]), w)


def test_hausdorff_between_successive_clouds(group):
    c5 = limit_points_by_fixed_points(group, 5)
    c6 = limit_points_by_fixed_points(group, 6)
    assert hausdorff_distance(c5, c6, WINDOW) == pytest.approx(
        0.20710678118654746, rel=1e-9
    )


def test_clouds_converge_to_deep_reference(group):
    clouds = {d: limit_points_by_fixed_points(group, d) for d in range(3, 10)}
    gaps = [hausdorff_distance(clouds[d], clouds[9], WINDOW) for d in range(3, 9)]
    assert all(x > y for x, y in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.07


def test_render_blank_canvas():
    out = render(None, [], Rectangle(0.0, 0.0, 2.0, 1.0), 64)
    header = b"P6\n64 32\n255\n"
    assert out.ppm.startswith(header)
    assert len(out.ppm) == len(header) + 64 * 32 * 3
    assert set(out.ppm[len(header):]) == {255}
    assert out.svg.count("<circle") == 0
    assert out.svg.count("#c80000") == 0


def test_render_single_circle_and_point():
    w = Rectangle(-2.0, -2.0, 2.0, 2.0)
    out = render(cloud_of([1j]), [OrientedCircle.from_center_radius(0, 1.0)], w, 128)
    assert out.svg.count("<circle") == 1
    assert out.svg.count('fill="#c80000"') == 1
    m = re.search(r'<circle cx="([-0-9.]+)" cy="([-0-9.]+)" r="([0-9.]+)"', out.svg)
    assert (float(m.group(1)), float(m.group(2))) == (64.0, 64.0)
    assert float(m.group(3)) == pytest.approx(32.0)
    assert out.ppm.count(b"\xc8\x00\x00") >= 1


def test_render_comment_appears_in_both_outputs():
    out = render(None, [], Rectangle(0.0, 0.0, 1.0, 1.0), 32, comment="run 7")
    assert b"# run 7\n" in out.ppm.split(b"255\n")[0]
    assert "<!-- run 7 -->" in out.svg


def test_render_roundtrip_preserves_gasket_structure(group):
    # scrape the circle elements back out of the SVG and check that the
    # rebuilt packing still verifies; pixel coordinates are uniformly scaled,
    # which Descartes residuals and inversive products both survive
    cfg = DfsConfig(epsilon=0.05, max_depth=14, seeds=strip_seeds(), window=WINDOW)
    result = limit_set_dfs(group, cfg)
    out = render(result.cloud, [e.circle for e in result.circles], WINDOW, 800)
    rows = re.findall(r'<circle cx="([-0-9.]+)" cy="([-0-9.]+)" r="([0-9.]+)"', out.svg)
    lines = sum(1 for e in result.circles if e.circle.is_line)
    assert len(rows) == len(result.circles) - lines
    rebuilt = CirclePacking(
        [
            OrientedCircle.from_center_radius(complex(float(cx), float(cy)), float(r))
            for cx, cy, r in rows
        ]
    )
    verdict = is_apollonian_like(rebuilt, residual_tol=1e-2, tangency_tol=1e-3)
    assert verdict.passed
    assert verdict.connected
    assert verdict.quadruples_checked >= 50


def test_benchmark_counts_reduced_words(group):
    result = benchmark_word_traversal(group, 6)
    assert result.words_visited == 4 * (3**6 - 1) // 2
    assert result.seconds >= 0.0
    assert result.words_per_second > 0.0
