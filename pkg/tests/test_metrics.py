"""
Tests for line accounting (src/metrics.py) and bundle_metrics (src/pipeline.py).

Covers: count_lines, comment_prefix, count_generated_vs_handwritten,
MetricsRow.ratio, render_metrics, scaled deployments.
"""

import pytest

from src.errors import ToolchainError
from src.metrics import (
    MetricsRow,
    comment_prefix,
    count_generated_vs_handwritten,
    count_lines,
    render_metrics,
)
from src.pipeline import bundle_metrics, generated_files


def _naive_count(text, prefix):
    kept = [line for line in text.split("\n") if line.strip() != ""]
    return len([line for line in kept if not line.lstrip().startswith(prefix)])


class TestCountLines:

    def test_skips_blank_and_comment_lines(self):
        text = "// header\n\nvocabulary V;\n   // indented comment\n  regions { }\n"
        assert count_lines(text) == 2

    def test_trailing_comment_still_counts(self):
        assert count_lines("device X { // note\n") == 1

    def test_hash_prefix(self):
        assert count_lines("# comment\nx = 1\n\n", "#") == 1

    def test_comment_prefix_by_extension(self):
        assert comment_prefix("logic.py") == "#"
        assert comment_prefix("profiles.tsv") == "#"
        assert comment_prefix("deployment.sdl") == "//"
        assert comment_prefix("services/Proximity.scaffold") == "//"


class TestMetricsRow:

    def test_ratio(self):
        row = MetricsRow({"logic": 10}, {"packages": 90})
        assert row.ratio == pytest.approx(0.9)

    def test_nothing_generated(self):
        assert MetricsRow({"logic": 10}, {}).ratio == 0.0
        assert MetricsRow().ratio == 0.0

    def test_render(self):
        text = render_metrics(MetricsRow({"logic": 10}, {"packages": 30}), devices=10)
        assert text.splitlines() == [
            "devices\t10",
            "handwritten.logic\t10",
            "generated.packages\t30",
            "handwritten.total\t10",
            "generated.total\t30",
            "ratio\t0.7500",
        ]


class TestCountGeneratedVsHandwritten:

    @pytest.mark.parametrize("bundle", ["smart_building", "fire_detection"])
    def test_generated_dominates(self, bundle, request):
        row = bundle_metrics(request.getfixturevalue(bundle))
        assert row.ratio >= 0.8
        assert set(row.handwritten) == {"vocabulary", "architecture", "deployment", "logic"}
        assert set(row.generated) == {"scaffolds", "manifests", "packages", "mapping"}

    def test_matches_naive_recount(self, smart_building, sb_build):
        generated = generated_files(sb_build)
        row = count_generated_vs_handwritten(generated, smart_building.spec_paths, smart_building.handler_sources)
        for path in smart_building.spec_paths:
            with open(path, encoding="utf-8") as handle:
                text = handle.read()
            category = {"svl": "vocabulary", "sal": "architecture", "sdl": "deployment"}[path.rsplit(".", 1)[1]]
            assert row.handwritten[category] == _naive_count(text, "//")
        for category, artifacts in generated.items():
            expected = sum(_naive_count(text, comment_prefix(path)) for path, text in artifacts)
            assert row.generated[category] == expected

    def test_shipped_deployment_lines(self, smart_building):
        assert bundle_metrics(smart_building).handwritten["deployment"] == 81

    def test_scaled_deployment_lines(self, smart_building):
        row = bundle_metrics(smart_building, devices=500, seed=3)
        assert row.handwritten["deployment"] == 4001

    def test_only_deployment_grows(self, smart_building):
        small = bundle_metrics(smart_building, devices=10)
        large = bundle_metrics(smart_building, devices=86)
        for category in ("vocabulary", "architecture", "logic"):
            assert small.handwritten[category] == large.handwritten[category]
        assert (small.handwritten["deployment"], large.handwritten["deployment"]) == (81, 689)

    def test_missing_file(self, smart_building, sb_build):
        with pytest.raises(ToolchainError) as exc:
            count_generated_vs_handwritten(generated_files(sb_build), ["/no/such/file.svl"], [])
        assert exc.value.code == "E-MISSING-FILE"
