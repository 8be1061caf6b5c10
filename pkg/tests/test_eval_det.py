import numpy as np
import pytest

from longtail.errors import (
    ConfigurationError,
    EmptyDatasetError,
    ParseError,
    ValidationError,
)
from longtail.eval_det import (
    Detection,
    average_precision,
    format_report_table,
    map_range,
    match_detections,
    parse_detections_jsonl,
    report_to_dict,
)
from oracles import brute_ap, brute_map, brute_match
from util import ann, box, entry, manifest


def det(image_id, class_id, b, conf):
    return Detection(image_id, class_id, b, conf)


class TestMatchDetections:
    def test_perfect_match(self):
        gts = {"i": [ann(0, 0.5, 0.5, 0.2, 0.2)]}
        dets = [det("i", 0, box(0.5, 0.5, 0.2, 0.2), 0.8)]
        flags, n_gt = match_detections(dets, gts, 0, 0.5)
        assert flags == [(0.8, True)]
        assert n_gt == 1

    def test_high_confidence_miss_blocks_nothing(self):
        gts = {"i": [ann(0, 0.5, 0.5, 0.2, 0.2)]}
        dets = [
            det("i", 0, box(0.9, 0.9, 0.1, 0.1), 0.9),  # IoU 0
            det("i", 0, box(0.5, 0.5, 0.2, 0.2), 0.8),  # IoU 1
        ]
        flags, n_gt = match_detections(dets, gts, 0, 0.5)
        assert flags == [(0.9, False), (0.8, True)]
        assert n_gt == 1

    def test_detection_without_gt_is_fp(self):
        flags, n_gt = match_detections(
            [det("i", 0, box(0.5, 0.5, 0.2, 0.2), 0.7)], {"i": []}, 0, 0.5
        )
        assert flags == [(0.7, False)]
        assert n_gt == 0

    def test_each_gt_matched_once(self):
        gts = {"i": [ann(0, 0.5, 0.5, 0.2, 0.2)]}
        dets = [
            det("i", 0, box(0.5, 0.5, 0.2, 0.2), 0.9),
            det("i", 0, box(0.5, 0.5, 0.2, 0.2), 0.8),
        ]
        flags, _ = match_detections(dets, gts, 0, 0.5)
        assert flags == [(0.9, True), (0.8, False)]

    def test_greedy_takes_highest_iou(self):
        gts = {"i": [ann(0, 0.3, 0.5, 0.2, 0.2), ann(0, 0.5, 0.5, 0.2, 0.2)]}
        dets = [det("i", 0, box(0.48, 0.5, 0.2, 0.2), 0.9)]
        flags, _ = match_detections(dets, gts, 0, 0.1)
        assert flags == [(0.9, True)]
        # second detection overlapping only the second gt still matches
        dets.append(det("i", 0, box(0.5, 0.5, 0.2, 0.2), 0.8))
        flags, _ = match_detections(dets, gts, 0, 0.1)
        assert flags == [(0.9, True), (0.8, False)]

    def test_matches_stay_within_image(self):
        gts = {"a": [ann(0, 0.5, 0.5, 0.2, 0.2)], "b": []}
        dets = [det("b", 0, box(0.5, 0.5, 0.2, 0.2), 0.9)]
        flags, n_gt = match_detections(dets, gts, 0, 0.5)
        assert flags == [(0.9, False)]
        assert n_gt == 1

    def test_agrees_with_brute_oracle(self, rng):
        for _ in range(100):
            images = [f"img{k}" for k in range(int(rng.integers(1, 4)))]
            gts = {
                img: [
                    ann(0, rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7),
                        rng.uniform(0.1, 0.5), rng.uniform(0.1, 0.5))
                    for _ in range(int(rng.integers(0, 4)))
                ]
                for img in images
            }
            dets = [
                det(
                    images[int(rng.integers(0, len(images)))],
                    0,
                    box(rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7),
                        rng.uniform(0.1, 0.5), rng.uniform(0.1, 0.5)),
                    float(np.round(rng.uniform(), 3)),
                )
                for _ in range(int(rng.integers(0, 6)))
            ]
            got = match_detections(dets, gts, 0, 0.5)
            expected = brute_match(dets, gts, 0, 0.5)
            assert got == expected

    def test_bad_threshold(self):
        with pytest.raises(ConfigurationError):
            match_detections([], {}, 0, 0.0)


class TestAveragePrecision:
    def test_perfect_detector(self):
        assert average_precision([(0.9, True)], 1) == 1.0

    def test_fp_then_tp_halves(self):
        assert average_precision([(0.9, False), (0.8, True)], 1) == pytest.approx(
            0.5, abs=1e-12
        )

    def test_nothing_detected(self):
        assert average_precision([], 5) == 0.0

    def test_no_gt_with_detection_is_zero(self):
        assert average_precision([(0.5, False)], 0) == 0.0

    def test_no_gt_no_detection_is_absent(self):
        assert average_precision([], 0) is None

    def test_negative_gt_count(self):
        with pytest.raises(ConfigurationError):
            average_precision([], -1)

    def test_matches_brute_oracle(self, rng):
        for _ in range(200):
            n_gt = int(rng.integers(1, 6))
            n = int(rng.integers(0, 10))
            flags = [
                (float(np.round(rng.uniform(), 2)), bool(rng.integers(0, 2)))
                for _ in range(n)
            ]
            # cap TPs at n_gt to keep the fixture coherent
            tp_seen = 0
            capped = []
            for conf, is_tp in flags:
                if is_tp and tp_seen >= n_gt:
                    capped.append((conf, False))
                else:
                    capped.append((conf, is_tp))
                    tp_seen += is_tp
            got = average_precision(capped, n_gt)
            assert got == pytest.approx(brute_ap(capped, n_gt), abs=1e-9)

    def test_confidence_order_invariance(self):
        flags = [(0.9, True), (0.7, False), (0.5, True), (0.2, False)]
        squashed = [(c**3, f) for c, f in flags]  # strictly monotone transform
        assert average_precision(flags, 3) == average_precision(squashed, 3)

    def test_duplicate_detection_never_helps(self, rng):
        for _ in range(50):
            flags = [
                (float(rng.uniform()), bool(rng.integers(0, 2))) for _ in range(6)
            ]
            n_gt = max(1, sum(f for _, f in flags))
            base = average_precision(flags, n_gt)
            # a duplicate of an already-matched detection arrives as an FP
            dup_conf = flags[0][0]
            worse = average_precision(flags + [(dup_conf, False)], n_gt)
            assert worse <= base + 1e-12


class TestMapRange:
    def _fixture(self):
        m = manifest(
            ["a", "b"],
            [
                entry("i1", [ann(0, 0.5, 0.5, 0.2, 0.2), ann(1, 0.25, 0.25, 0.1, 0.1)]),
                entry("i2", [ann(0, 0.7, 0.7, 0.2, 0.2)]),
            ],
        )
        return m

    def test_perfect_predictions_give_one(self):
        m = self._fixture()
        dets = [
            det(e.id, a.class_id, a.box, 1.0) for e in m.entries for a in e.annotations
        ]
        report = map_range(dets, m)
        assert report.map50_95 == 1.0
        for r in report.per_class:
            assert r.ap50_95 == 1.0
            assert all(v == 1.0 for v in r.ap_by_threshold)

    def test_empty_detections_give_zero(self):
        report = map_range([], self._fixture())
        assert report.map50_95 == 0.0

    def test_class_with_gt_but_no_dets_pulls_mean_down(self):
        m = self._fixture()
        dets = [det("i1", 0, box(0.5, 0.5, 0.2, 0.2), 1.0),
                det("i2", 0, box(0.7, 0.7, 0.2, 0.2), 1.0)]
        report = map_range(dets, m)
        by_id = {r.class_id: r for r in report.per_class}
        assert by_id[0].ap50_95 == 1.0
        assert by_id[1].ap50_95 == 0.0
        assert report.map50_95 == 0.5

    def test_absent_class_excluded(self):
        m = manifest(
            ["a", "ghost"], [entry("i1", [ann(0, 0.5, 0.5, 0.2, 0.2)])]
        )
        report = map_range([det("i1", 0, box(0.5, 0.5, 0.2, 0.2), 1.0)], m)
        by_id = {r.class_id: r for r in report.per_class}
        assert by_id[1].absent
        assert by_id[1].ap50_95 is None
        assert report.map50_95 == 1.0

    def test_no_gt_at_all_raises(self):
        m = manifest(["a"], [entry("i1", [])])
        with pytest.raises(EmptyDatasetError):
            map_range([], m)

    def test_threshold_monotonicity(self, rng):
        m = self._fixture()
        dets = [
            det(
                e.id,
                a.class_id,
                box(
                    a.box.cx + rng.uniform(-0.05, 0.05),
                    a.box.cy + rng.uniform(-0.05, 0.05),
                    a.box.w,
                    a.box.h,
                ),
                float(rng.uniform(0.5, 1.0)),
            )
            for e in m.entries
            for a in e.annotations
        ]
        report = map_range(dets, m, thresholds=(0.3, 0.5, 0.7, 0.9))
        for r in report.per_class:
            aps = r.ap_by_threshold
            assert all(aps[i] >= aps[i + 1] - 1e-12 for i in range(len(aps) - 1))

    def test_class_order_invariance(self):
        m = self._fixture()
        dets = [det("i1", 0, box(0.5, 0.5, 0.2, 0.2), 0.9),
                det("i1", 1, box(0.25, 0.25, 0.1, 0.1), 0.8)]
        report = map_range(dets, m)
        # same data with class ids swapped
        m2 = manifest(
            ["b", "a"],
            [
                entry("i1", [ann(1, 0.5, 0.5, 0.2, 0.2), ann(0, 0.25, 0.25, 0.1, 0.1)]),
                entry("i2", [ann(1, 0.7, 0.7, 0.2, 0.2)]),
            ],
        )
        dets2 = [det("i1", 1, box(0.5, 0.5, 0.2, 0.2), 0.9),
                 det("i1", 0, box(0.25, 0.25, 0.1, 0.1), 0.8)]
        assert map_range(dets, m).map50_95 == map_range(dets2, m2).map50_95
        assert report.map50_95 == map_range(dets2, m2).map50_95

    def test_agrees_with_brute_force(self, rng):
        thresholds = (0.5, 0.75)
        for _ in range(40):
            n_img = int(rng.integers(1, 4))
            entries = []
            for k in range(n_img):
                anns = [
                    ann(int(rng.integers(0, 2)), rng.uniform(0.3, 0.7),
                        rng.uniform(0.3, 0.7), rng.uniform(0.1, 0.4),
                        rng.uniform(0.1, 0.4))
                    for _ in range(int(rng.integers(0, 4)))
                ]
                entries.append(entry(f"img{k}", anns))
            m = manifest(["a", "b"], entries)
            if not any(e.annotations for e in m.entries):
                continue
            dets = [
                det(f"img{int(rng.integers(0, n_img))}", int(rng.integers(0, 2)),
                    box(rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7),
                        rng.uniform(0.1, 0.4), rng.uniform(0.1, 0.4)),
                    float(np.round(rng.uniform(), 3)))
                for _ in range(int(rng.integers(0, 6)))
            ]
            report = map_range(dets, m, thresholds)
            per_class, omap = brute_map(dets, m, thresholds)
            assert report.map50_95 == pytest.approx(omap, abs=1e-9)
            for r in report.per_class:
                expected = per_class[r.class_id]
                if expected is None:
                    assert r.absent
                else:
                    assert r.ap_by_threshold == pytest.approx(expected, abs=1e-9)


class TestWireFormats:
    def test_parse_jsonl(self):
        text = (
            '{"image_id": "i", "class_id": 0, "cx": 0.5, "cy": 0.5, "w": 0.2, '
            '"h": 0.2, "conf": 0.75}\n\n'
            '{"image_id": "j", "class_id": 1, "cx": 0.1, "cy": 0.2, "w": 0.1, '
            '"h": 0.1, "conf": 1.0}\n'
        )
        dets = parse_detections_jsonl(text, 2)
        assert len(dets) == 2
        assert dets[0].image_id == "i" and dets[0].confidence == 0.75

    def test_parse_errors(self):
        with pytest.raises(ParseError, match="line 1"):
            parse_detections_jsonl("not json", 2)
        with pytest.raises(ParseError, match="line 1"):
            parse_detections_jsonl('{"image_id": "i"}', 2)
        with pytest.raises(ValidationError):
            parse_detections_jsonl(
                '{"image_id":"i","class_id":9,"cx":0.5,"cy":0.5,"w":0.1,"h":0.1,'
                '"conf":0.5}',
                2,
            )
        with pytest.raises(ValidationError):
            parse_detections_jsonl(
                '{"image_id":"i","class_id":0,"cx":0.5,"cy":0.5,"w":0.1,"h":0.1,'
                '"conf":1.5}',
                2,
            )

    def test_report_dict_and_table(self):
        m = manifest(
            ["a", "b"],
            [entry("i1", [ann(0, 0.5, 0.5, 0.2, 0.2)])],
        )
        report = map_range([det("i1", 0, box(0.5, 0.5, 0.2, 0.2), 1.0)], m)
        doc = report_to_dict(report)
        assert doc["map50_95"] == 1.0
        assert len(doc["classes"]) == 2
        assert doc["classes"][1]["ap50_95"] is None
        assert len(doc["recall_grid"]) == 101

        table = format_report_table(report, percent=True)
        lines = table.splitlines()
        assert lines[0].split()[:1] == ["class"]
        assert lines[1].startswith("All classes")
        assert "100" in lines[1]
        assert any(row.startswith("b") and "-" in row for row in lines)
