import pytest

from longtail.augment import (
    draw_mixup_lambda,
    mixup_labels,
    mosaic_labels,
    mosaic_plan_to_dict,
    mixup_plan_to_dict,
)
from longtail.errors import ConfigurationError
from oracles import mosaic_corner_boxes
from util import ann, entry


def four_entries(annotations, sizes=((640, 480),) * 4):
    return [
        entry(f"m{i}", annotations, w=sizes[i][0], h=sizes[i][1]) for i in range(4)
    ]


class TestMosaic:
    def test_centered_split_halves_boxes(self):
        # one full-height centered box per source
        src = four_entries([ann(0, 0.5, 0.5, 0.3, 1.0)])
        plan = mosaic_labels(src, 640, seed=0, center=(0.5, 0.5), min_area=0.0)
        assert len(plan.annotations) == 4
        quads = [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)]
        got = sorted((a.box.cx, a.box.cy) for a in plan.annotations)
        assert got == pytest.approx(sorted(quads), abs=1e-12)
        for a in plan.annotations:
            assert a.box.w == pytest.approx(0.15, abs=1e-12)
            assert a.box.h == pytest.approx(0.5, abs=1e-12)

    def test_boxes_confined_to_quadrants(self):
        src = four_entries([ann(0, 0.5, 0.5, 1.0, 1.0), ann(1, 0.9, 0.1, 0.4, 0.4)])
        plan = mosaic_labels(src, 512, seed=9, min_area=0.0)
        fx, fy = plan.center
        for a in plan.annotations:
            assert a.box.is_valid()
            x0, y0, x1, y1 = a.box.corners()
            assert -1e-12 <= x0 and x1 <= 1 + 1e-12
            assert -1e-12 <= y0 and y1 <= 1 + 1e-12
            # no box straddles the split lines
            assert x1 <= fx + 1e-9 or x0 >= fx - 1e-9
            assert y1 <= fy + 1e-9 or y0 >= fy - 1e-9

    def test_agrees_with_corner_oracle(self, rng):
        for trial in range(50):
            anns = [
                ann(
                    int(rng.integers(0, 3)),
                    rng.uniform(0, 1),
                    rng.uniform(0, 1),
                    rng.uniform(0.01, 1),
                    rng.uniform(0.01, 1),
                )
                for _ in range(int(rng.integers(0, 5)))
            ]
            sizes = tuple(
                (int(rng.integers(100, 800)), int(rng.integers(100, 800)))
                for _ in range(4)
            )
            src = four_entries(anns, sizes)
            center = (rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75))
            plan = mosaic_labels(src, 640, seed=trial, center=center, min_area=0.1)
            expected = mosaic_corner_boxes(src, 640, center, 0.1)
            got = [
                (a.class_id, a.box.cx, a.box.cy, a.box.w, a.box.h)
                for a in plan.annotations
            ]
            assert len(got) == len(expected)
            for g, e in zip(got, expected):
                assert g[0] == e[0]
                assert g[1:] == pytest.approx(e[1:], abs=1e-9)

    def test_min_area_zero_keeps_positive_area(self):
        src = four_entries([ann(0, 1.0, 0.5, 0.5, 0.5)])  # half pokes outside
        plan = mosaic_labels(src, 640, seed=0, center=(0.5, 0.5), min_area=0.0)
        assert len(plan.annotations) == 4
        assert all(a.box.area() > 0 for a in plan.annotations)

    def test_min_area_drops_slivers(self):
        src = four_entries([ann(0, 1.0, 0.5, 0.5, 0.5)])  # keeps ~50 percent
        plan = mosaic_labels(src, 640, seed=0, center=(0.5, 0.5), min_area=0.6)
        assert len(plan.annotations) == 0

    def test_merged_count_bounded(self):
        src = four_entries([ann(0, 0.5, 0.5, 0.4, 0.4)] * 3)
        plan = mosaic_labels(src, 640, seed=0)
        assert len(plan.annotations) <= 12

    def test_seeded_center_determinism(self):
        src = four_entries([ann(0, 0.5, 0.5, 0.4, 0.4)])
        a = mosaic_labels(src, 640, seed=4)
        b = mosaic_labels(src, 640, seed=4)
        c = mosaic_labels(src, 640, seed=5)
        assert a == b
        assert a.center != c.center
        lo, hi = 0.25, 0.75
        assert lo <= a.center[0] <= hi and lo <= a.center[1] <= hi

    def test_wrong_entry_count(self):
        with pytest.raises(ConfigurationError):
            mosaic_labels(four_entries([])[:3], 640, seed=0)

    def test_center_out_of_bounds(self):
        with pytest.raises(ConfigurationError):
            mosaic_labels(four_entries([]), 640, seed=0, center=(0.1, 0.5))

    def test_placements_cover_output(self):
        src = four_entries([])
        plan = mosaic_labels(src, 500, seed=1, center=(0.3, 0.6))
        total = sum(p.target.w * p.target.h for p in plan.placements)
        assert total == pytest.approx(500 * 500)
        assert [p.source_id for p in plan.placements] == ["m0", "m1", "m2", "m3"]

    def test_plan_dict_schema(self):
        plan = mosaic_labels(four_entries([ann(0, 0.5, 0.5, 0.2, 0.2)]), 640, seed=0)
        doc = mosaic_plan_to_dict(plan)
        assert doc["kind"] == "mosaic"
        assert len(doc["placements"]) == 4
        assert {"source_id", "target", "scale_x", "scale_y"} <= set(doc["placements"][0])


class TestMixup:
    def _pair(self):
        a = entry("a", [ann(0, 0.5, 0.5, 0.2, 0.2), ann(1, 0.4, 0.4, 0.1, 0.1)])
        b = entry("b", [ann(0, 0.3, 0.3, 0.1, 0.1)] * 3)
        return a, b

    def test_weights_split_by_source(self):
        a, b = self._pair()
        plan = mixup_labels(a, b, 0.5)
        assert len(plan.annotations) == 5
        assert all(w.weight == 0.5 for w in plan.annotations)

    def test_lambda_one_zeroes_b(self):
        a, b = self._pair()
        plan = mixup_labels(a, b, 1.0)
        weights = [w.weight for w in plan.annotations]
        assert weights == [1.0, 1.0, 0.0, 0.0, 0.0]

    def test_lambda_zero_zeroes_a(self):
        a, b = self._pair()
        plan = mixup_labels(a, b, 0.0)
        weights = [w.weight for w in plan.annotations]
        assert weights == [0.0, 0.0, 1.0, 1.0, 1.0]

    def test_boxes_unchanged(self):
        a, b = self._pair()
        plan = mixup_labels(a, b, 0.25)
        assert [w.annotation for w in plan.annotations] == list(a.annotations) + list(
            b.annotations
        )

    def test_out_of_range_lambda(self):
        a, b = self._pair()
        with pytest.raises(ConfigurationError):
            mixup_labels(a, b, 1.5)

    def test_plan_dict_schema(self):
        a, b = self._pair()
        doc = mixup_plan_to_dict(mixup_labels(a, b, 0.75))
        assert doc["kind"] == "mixup"
        assert doc["lambda"] == 0.75
        assert len(doc["annotations"]) == 5


class TestMixupLambdaDraw:
    def test_deterministic_and_in_range(self):
        a = draw_mixup_lambda(17)
        assert a == draw_mixup_lambda(17)
        assert 0.0 <= a <= 1.0
        assert a != draw_mixup_lambda(18)

    def test_concentrates_near_half_for_large_alpha(self):
        draws = [draw_mixup_lambda(s, alpha=32.0) for s in range(200)]
        mean = sum(draws) / len(draws)
        assert abs(mean - 0.5) < 0.02
        assert all(0.2 < v < 0.8 for v in draws)

    def test_bad_alpha(self):
        with pytest.raises(ConfigurationError):
            draw_mixup_lambda(0, alpha=0.0)
