"""
Tests for scaffold rendering (src/templates.py).

Covers: render_template (placeholders, loops and conditionals, standalone
block lines, errors), render_scaffolds (counts, content, template sets).
"""

import pytest

from src.config import Config
from src.errors import ToolchainError
from src.templates import TemplateError, render_scaffolds, render_template


# ─── engine ──────────────────────────────────────────────────────────

class TestRenderTemplate:

    def test_placeholder(self):
        assert render_template("a{{ x }}b", {"x": 1}) == "a1b"

    def test_dotted_lookup(self):
        assert render_template("{{ a.b }}", {"a": {"b": "deep"}}) == "deep"

    def test_booleans_lowercase(self):
        assert render_template("{{ on }}/{{ off }}", {"on": True, "off": False}) == "true/false"

    def test_loop_inline(self):
        assert render_template("{% for x in xs %}[{{ x }}]{% endfor %}", {"xs": [1, 2]}) == "[1][2]"

    def test_loop_sees_outer_scope(self):
        context = {"name": "outer", "items": [{"name": "inner"}, {"name": "other"}]}
        text = "{% for item in items %}{{ item.name }}@{{ name }};{% endfor %}"
        assert render_template(text, context) == "inner@outer;other@outer;"

    def test_standalone_block_lines_removed(self):
        text = "a\n{% if f %}\nb\n{% endif %}\nc\n"
        assert render_template(text, {"f": True}) == "a\nb\nc\n"
        assert render_template(text, {"f": False}) == "a\nc\n"

    def test_standalone_loop_lines_removed(self):
        text = "start\n{% for x in xs %}\n  - {{ x }}\n{% endfor %}\nend\n"
        assert render_template(text, {"xs": ["p", "q"]}) == "start\n  - p\n  - q\nend\n"

    def test_empty_list_renders_nothing(self):
        assert render_template("x{% for x in xs %}y{% endfor %}z", {"xs": []}) == "xz"

    def test_unknown_placeholder(self):
        with pytest.raises(TemplateError) as exc:
            render_template("{{ missing }}", {})
        assert exc.value.code == "E-TEMPLATE"

    def test_unknown_loop_source(self):
        with pytest.raises(TemplateError, match="unknown placeholder"):
            render_template("{% for x in missing %}{{ x }}{% endfor %}", {})

    @pytest.mark.parametrize("text", [
        "{% endfor %}",
        "{% for x in xs %}open",
        "{% frobnicate xs %}",
        "{% for x in xs %}{% endif %}",
    ])
    def test_malformed_blocks(self, text):
        with pytest.raises(TemplateError) as exc:
            render_template(text, {"xs": []})
        assert exc.value.code == "E-TEMPLATE"


# ─── scaffolds ───────────────────────────────────────────────────────

class TestRenderScaffolds:

    def test_one_per_service_and_resource(self, sb_build):
        paths = [path for path, _ in sb_build.scaffolds]
        assert len(paths) == 6 + 5
        assert "services/Proximity.scaffold" in paths
        assert "resources/Heater.scaffold" in paths

    def test_no_placeholders_left(self, sb_build, fd_build):
        for _, text in sb_build.scaffolds + fd_build.scaffolds:
            assert "{{" not in text and "}}" not in text

    def test_service_scaffold_content(self, sb_build):
        text = dict(sb_build.scaffolds)["services/Proximity.scaffold"]
        assert "abstract handler onNewbadgeDetected(event: badgeDetected, context: ServiceContext)" in text
        assert "// TODO implement onNewbadgeDisappeared in the application logic" in text
        assert "operation requestprofile(badgeID) returns TempStruct" in text
        assert "partitioned-by Room" in text

    def test_resource_scaffold_content(self, sb_build):
        text = dict(sb_build.scaffolds)["resources/Heater.scaffold"]
        assert "interface IHeater" in text
        assert "method doSetTemp(setTemp: double) returns void mode sync" in text
        assert 'binds IHeater to driver "Heater/JavaSE"' in text

    def test_deterministic(self, sb_build):
        again = render_scaffolds(sb_build.framework, sb_build.drivers)
        assert again == sb_build.scaffolds

    def test_unknown_template_set(self, sb_build):
        with pytest.raises(ToolchainError) as exc:
            render_scaffolds(sb_build.framework, sb_build.drivers, "does-not-exist")
        assert exc.value.code == "E-TEMPLATE-MISSING"

    def test_custom_template_set(self, sb_build, tmp_path, monkeypatch):
        custom = tmp_path / "brief"
        custom.mkdir()
        (custom / "service.tmpl").write_text("{{ service }}: {{ hooks | map(attribute='name') | join(' ') }}\n")
        (custom / "resource.tmpl").write_text("{{ interface }}\n")
        monkeypatch.setattr(Config, "TEMPLATE_DIR", str(tmp_path))
        files = dict(render_scaffolds(sb_build.framework, sb_build.drivers, "brief"))
        assert files["services/Proximity.scaffold"] == "Proximity: onNewbadgeDetected onNewbadgeDisappeared\n"
        assert files["resources/ProfileDB.scaffold"] == "IProfileDB\n"

    def test_template_set_missing_file(self, sb_build, tmp_path, monkeypatch):
        (tmp_path / "half").mkdir()
        (tmp_path / "half" / "service.tmpl").write_text("{{ service }}\n")
        monkeypatch.setattr(Config, "TEMPLATE_DIR", str(tmp_path))
        with pytest.raises(ToolchainError) as exc:
            render_scaffolds(sb_build.framework, sb_build.drivers, "half")
        assert exc.value.code == "E-TEMPLATE-MISSING"

    def test_template_set_syntax_error(self, sb_build, tmp_path, monkeypatch):
        (tmp_path / "broken").mkdir()
        (tmp_path / "broken" / "service.tmpl").write_text("{% for hook in hooks %}{{ hook.name }}\n")
        (tmp_path / "broken" / "resource.tmpl").write_text("{{ interface }}\n")
        monkeypatch.setattr(Config, "TEMPLATE_DIR", str(tmp_path))
        with pytest.raises(TemplateError) as exc:
            render_scaffolds(sb_build.framework, sb_build.drivers, "broken")
        assert exc.value.code == "E-TEMPLATE"
        assert "service.tmpl" in exc.value.message
