"""
Generated-versus-handwritten line accounting.

Counts non-blank, non-comment lines. Specification files and scaffolds use
`//` comments; Python handler sources and .tsv fixtures use `#`. JSON has no
comments, so every non-blank line counts.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple
import logging
import os

from src.errors import ToolchainError

logger = logging.getLogger(__name__)

SPEC_CATEGORIES = {".svl": "vocabulary", ".sal": "architecture", ".sdl": "deployment"}


@dataclass
class MetricsRow:
    handwritten: Dict[str, int] = field(default_factory=dict)
    generated: Dict[str, int] = field(default_factory=dict)

    @property
    def handwritten_total(self) -> int:
        return sum(self.handwritten.values())

    @property
    def generated_total(self) -> int:
        return sum(self.generated.values())

    @property
    def ratio(self) -> float:
        total = self.generated_total + self.handwritten_total
        return self.generated_total / total if self.generated_total else 0.0


def comment_prefix(path: str) -> str:
    return "#" if path.endswith((".py", ".tsv")) else "//"


def count_lines(text: str, prefix: str = "//") -> int:
    count = 0
    for line in text.splitlines():
        stripped = line.strip()
        if stripped and not (prefix and stripped.startswith(prefix)):
            count += 1
    return count


def _read(path: str) -> str:
    if not os.path.isfile(path):
        raise ToolchainError("E-MISSING-FILE", f"no such file: {path}")
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def count_generated_vs_handwritten(
    generated: Dict[str, Iterable[Tuple[str, str]]],
    spec_files: List[str],
    handler_sources: List[str],
) -> MetricsRow:
    """Line counts per category.

    `generated` maps a category (scaffolds, manifests, packages, mapping) to
    in-memory (path, text) artifacts; spec files and handler sources are read
    from disk.
    """
    row = MetricsRow()
    for path in spec_files:
        category = SPEC_CATEGORIES.get(os.path.splitext(path)[1], "specification")
        row.handwritten[category] = row.handwritten.get(category, 0) + count_lines(_read(path), "//")
    for path in handler_sources:
        row.handwritten["logic"] = row.handwritten.get("logic", 0) + count_lines(_read(path), comment_prefix(path))
    for category, artifacts in generated.items():
        row.generated[category] = sum(count_lines(text, comment_prefix(path)) for path, text in artifacts)
    logger.info(f"Metrics: handwritten={row.handwritten_total} generated={row.generated_total} "
                f"ratio={row.ratio:.4f}")
    return row


def render_metrics(row: MetricsRow, devices: int = 0) -> str:
    lines = []
    if devices:
        lines.append(f"devices\t{devices}")
    for category in sorted(row.handwritten):
        lines.append(f"handwritten.{category}\t{row.handwritten[category]}")
    for category in sorted(row.generated):
        lines.append(f"generated.{category}\t{row.generated[category]}")
    lines.append(f"handwritten.total\t{row.handwritten_total}")
    lines.append(f"generated.total\t{row.generated_total}")
    lines.append(f"ratio\t{row.ratio:.4f}")
    return "\n".join(lines) + "\n"
