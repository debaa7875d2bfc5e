#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import pandas as pd

REPORT_JSON = "report.json"
REPORT_CSV = "report.csv"
COST_JSON = "cost.json"
ROW_COLUMNS = ("image_id", "attack", "bitacc", "psnr", "ssim", "perceptual")


@dataclass(frozen=True)
class ImageRow:
    """The metrics of one attacked image."""

    image_id: int
    """Index of the image in the test set."""

    attack: str
    """The registered attack name."""

    bitacc: float
    """Bit accuracy of the detected message."""

    psnr: float | None = None
    """PSNR against the watermarked image, when requested."""

    ssim: float | None = None
    """SSIM against the watermarked image, when requested."""

    perceptual: float | None = None
    """Perceptual distance to the watermarked image, when requested."""


@dataclass(frozen=True)
class AttackSummary:
    """The aggregated metrics of one attack."""

    attack: str
    bitacc_mean: float
    detectacc: float | None = None
    psnr_median: float | None = None
    ssim_median: float | None = None
    perceptual_median: float | None = None
    frechet: float | None = None
    attack_success_rate: float | None = None
    slr_median: float | None = None


@dataclass
class EvalReport:
    """The result of one evaluation run."""

    provenance: dict[str, Any]
    """Config hash, seed and the calibration constants of the run."""

    summaries: dict[str, AttackSummary]
    """Per-attack aggregates, in evaluation order."""

    rows: list[ImageRow]
    """Per-image metrics."""

    cost: dict[str, Any] = field(default_factory=dict)
    """Wall-clock seconds per image of every attack and the attack model memory.

    Kept out of report.json, which only holds reproducible fields.
    """

    def to_dict(self: EvalReport) -> dict[str, Any]:
        """Returns the JSON form of the report."""
        return {
            "provenance": self.provenance,
            "per_attack": {name: asdict(summary) for name, summary in self.summaries.items()},
            "rows": [asdict(row) for row in self.rows],
        }

    def to_frame(self: EvalReport) -> pd.DataFrame:
        """Returns the per-image rows as a table with the fixed column order."""
        return pd.DataFrame([asdict(row) for row in self.rows], columns=list(ROW_COLUMNS))

    def rows_of(self: EvalReport, attack: str) -> list[ImageRow]:
        """Returns the rows of one attack."""
        return [row for row in self.rows if row.attack == attack]

    def write(self: EvalReport, output_dir: str | Path) -> tuple[Path, Path, Path]:
        """Writes report.json, report.csv and cost.json.

        Args:
            output_dir (str | Path): The destination directory. Created if missing.

        Returns:
            tuple[Path, Path, Path]: The report JSON, CSV and cost paths.
        """
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)

        json_path = output_dir / REPORT_JSON
        csv_path = output_dir / REPORT_CSV
        cost_path = output_dir / COST_JSON

        json_path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
        self.to_frame().to_csv(csv_path, index=False)
        cost_path.write_text(json.dumps(self.cost, indent=2, sort_keys=True), encoding="utf-8")

        return json_path, csv_path, cost_path
