"""CSV ingestion, report documents, and plot-ready data emission.

Reports are plain JSON documents with a canonical serialization: keys are
sorted, floats use their shortest exact decimal representation, and
non-finite values are stored as null. Serialize -> parse -> serialize is
byte-identical, and because every random stream is seed-derived, rerunning
a command with the same seed rewrites the same bytes.

CSV files follow RFC-4180 conventions: UTF-8, a header row, comma
separator, decimal points, no thousands separators.
"""

import csv
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .blocks import DataBlock
from .errors import EmptyFile, MissingSection, NonNumericCell, RaggedRows
from .harness import FullSampleResult, SubsampleReport
from .inference import BartlettResult, BootstrapResult, PermutationResult
from .pca import PcaModel, PcaStabilityResult
from .reproducibility import SplitHalfReport, TrainTestReport

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# CSV data blocks
# ---------------------------------------------------------------------------

def load_csv(path, header: bool = True, delimiter: str = ",") -> DataBlock:
    """Read a rectangular numeric CSV file into a DataBlock.

    The first row is treated as the header unless ``header`` is False, in
    which case labels v1..vk are synthesized. Empty cells, non-numeric
    cells, and non-finite values are rejected with their coordinates
    (1-based, counting the header).
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    rows = [r for r in rows if r]
    if not rows:
        raise EmptyFile(f"{path} contains no data")
    if header:
        labels = tuple(c.strip() for c in rows[0])
        body = rows[1:]
        offset = 2
    else:
        labels = tuple(f"v{j + 1}" for j in range(len(rows[0])))
        body = rows
        offset = 1
    if not body:
        raise EmptyFile(f"{path} has a header but no data rows")
    width = len(labels)
    values = np.empty((len(body), width))
    for i, row in enumerate(body):
        if len(row) != width:
            raise RaggedRows(
                f"expected {width} fields, found {len(row)}", row=i + offset
            )
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise NonNumericCell(
                    f"cell {cell!r} is not numeric", row=i + offset, col=j + 1
                ) from None
            if not np.isfinite(v):
                raise NonNumericCell(
                    f"cell {cell!r} is not finite", row=i + offset, col=j + 1
                )
            values[i, j] = v
    return DataBlock(values, labels)


def write_block_csv(block: DataBlock, path) -> Path:
    """Write a DataBlock with full-precision decimal values."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(block.labels)
        for row in block.values:
            writer.writerow([repr(float(v)) for v in row])
    return path


def write_matrix_csv(matrix: np.ndarray, path, prefix: str = "c") -> Path:
    """Write a bare matrix with generated column headers."""
    labels = tuple(f"{prefix}{j + 1}" for j in range(matrix.shape[1]))
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(labels)
        for row in np.atleast_2d(matrix):
            writer.writerow([repr(float(v)) for v in row])
    return path


# ---------------------------------------------------------------------------
# Report documents
# ---------------------------------------------------------------------------

def _plain(obj):
    """Convert to JSON-safe plain Python; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def _timestamp() -> str | None:
    """Deterministic timestamp: only SOURCE_DATE_EPOCH produces one.

    Reports must be byte-identical across reruns with the same seed, so
    wall-clock time is never written implicitly.
    """
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is None:
        return None
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()


@dataclass(frozen=True)
class ReportDocument:
    """A versioned, canonically serializable analysis report."""

    data: dict

    @classmethod
    def build(cls, kind: str, seed, config: dict, sections: dict) -> "ReportDocument":
        return cls(
            data=_plain(
                {
                    "schema_version": SCHEMA_VERSION,
                    "metadata": {
                        "tool": "crossblock",
                        "version": __version__,
                        "kind": kind,
                        "seed": seed,
                        "created_at": _timestamp(),
                        "config": config,
                    },
                    "sections": sections,
                }
            )
        )

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        return cls(data=json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2, allow_nan=False) + "\n"

    def section(self, name: str) -> dict:
        try:
            return self.data["sections"][name]
        except KeyError:
            raise MissingSection(f"report has no {name!r} section") from None

    @property
    def sections(self) -> dict:
        return self.data.get("sections", {})

    @property
    def metadata(self) -> dict:
        return self.data.get("metadata", {})


# ---------------------------------------------------------------------------
# Section builders (result dataclasses -> JSON-plain dicts)
# ---------------------------------------------------------------------------

def permutation_section(result: PermutationResult, include_draws: bool = False) -> dict:
    out = {
        "singular_values": result.observed_s,
        "p_values": result.p_values,
        "n_perm": result.n_perm,
    }
    if include_draws:
        out["null_singular_values"] = result.null_s
    return out


def bootstrap_section(result: BootstrapResult, x_labels, y_labels) -> dict:
    return {
        "n_boot": result.n_boot,
        "x": {
            "labels": list(x_labels),
            "observed": result.observed_us,
            "lower": result.us_lower,
            "upper": result.us_upper,
            "stable": result.us_stable,
        },
        "y": {
            "labels": list(y_labels),
            "observed": result.observed_vs,
            "lower": result.vs_lower,
            "upper": result.vs_upper,
            "stable": result.vs_stable,
        },
    }


def bartlett_section(result: BartlettResult) -> list:
    return [
        {
            "start_lv": t.start_lv,
            "chi_square": t.chi_square,
            "df": t.df,
            "p_value": t.p_value,
        }
        for t in result.tests
    ]


def train_test_section(report: TrainTestReport, include_draws: bool = True) -> dict:
    out = {
        "z": report.z,
        "degenerate": report.degenerate,
        "n_split": report.n_split,
        "n_failed": report.n_failed,
    }
    if include_draws:
        out["draws"] = report.s_test_draws
    return out


def split_half_section(report: SplitHalfReport, include_draws: bool = True) -> dict:
    out = {
        "z_u": report.z_u,
        "z_v": report.z_v,
        "degenerate_u": report.degenerate_u,
        "degenerate_v": report.degenerate_v,
        "n_split": report.n_split,
        "n_failed": report.n_failed,
    }
    if include_draws:
        out["u_draws"] = report.u_cosine_draws
        out["v_draws"] = report.v_cosine_draws
    return out


def pca_section(model: PcaModel, include_vectors: bool = True) -> dict:
    out = {
        "eigenvalues": model.eigenvalues,
        "variance_fraction": model.variance_fraction,
        "n_kept": model.n_kept,
    }
    if include_vectors:
        out["eigenvectors"] = model.eigenvectors
    return out


def pca_stability_section(result: PcaStabilityResult) -> dict:
    cells = []
    for row, size in enumerate(result.sample_sizes):
        for pc in range(result.n_pc):
            cells.append(
                {
                    "sample_size": size,
                    "pc": pc + 1,
                    "mean": result.mean[row, pc],
                    "sd": result.sd[row, pc],
                    "z": result.z[row, pc],
                }
            )
    return {
        "aligned": result.aligned,
        "n_iter": result.n_iter,
        "cells": cells,
    }


def full_sample_section(result: FullSampleResult, include_draws: bool = False) -> dict:
    per_method = {}
    for entry in result.per_method:
        if entry.status != "ok":
            per_method[entry.method] = {"status": entry.status, "reason": entry.reason}
            continue
        section = {
            "status": entry.status,
            "permutation": permutation_section(entry.permutation),
            "bootstrap": bootstrap_section(entry.bootstrap, result.x_labels, result.y_labels),
            "train_test": train_test_section(entry.train_test_report, include_draws),
            "split_half": split_half_section(entry.split_half_report, include_draws),
        }
        if entry.bartlett is not None:
            section["bartlett"] = bartlett_section(entry.bartlett)
        per_method[entry.method] = section
    out = {
        "x_labels": list(result.x_labels),
        "y_labels": list(result.y_labels),
        "per_method": per_method,
    }
    if result.pca_model is not None:
        out["pca"] = pca_section(result.pca_model, include_vectors=False)
        out["n_components_used"] = result.n_components_used
    return out


def subsample_section(report: SubsampleReport) -> dict:
    cells = [
        {
            "method": c.method,
            "sample_size": c.sample_size,
            "lv": c.lv,
            "status": c.status,
            "detectability": c.detectability,
            "train_test_z": c.train_test_z,
            "split_half_z_u": c.split_half_z_u,
            "split_half_z_v": c.split_half_z_v,
            "n_completed": c.n_completed,
            "n_skipped": c.n_skipped,
            "skip_reason": c.skip_reason,
        }
        for c in report.cells
    ]
    any_lv = [
        {
            "method": a.method,
            "sample_size": a.sample_size,
            "status": a.status,
            "fraction": a.fraction,
            "n_completed": a.n_completed,
        }
        for a in report.any_lv
    ]
    return {
        "kind": report.kind,
        "alpha": report.alpha,
        "lv_count": report.lv_count,
        "n_iterations": report.n_iterations,
        "cells": cells,
        "any_lv": any_lv,
    }


# ---------------------------------------------------------------------------
# Writing reports
# ---------------------------------------------------------------------------

def _write_table(path: Path, headers, rows) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        for row in rows:
            writer.writerow(["" if v is None else _cell(v) for v in row])
    return path


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def write_report(report: ReportDocument, out_dir, stem: str = "report",
                 format: str = "json") -> list[Path]:
    """Write a report as a single JSON document or a CSV bundle.

    The CSV bundle holds one table per file plus metadata.json carrying the
    seed and config needed for an exact rerun.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if format == "json":
        path = out_dir / f"{stem}.json"
        path.write_text(report.to_json(), encoding="utf-8")
        return [path]
    if format != "csv":
        raise ValueError(f"unknown report format {format!r}")
    written = []
    bundle = out_dir / stem
    bundle.mkdir(parents=True, exist_ok=True)
    meta = bundle / "metadata.json"
    meta.write_text(
        json.dumps(
            {"schema_version": report.data.get("schema_version"), "metadata": report.metadata},
            sort_keys=True, indent=2, allow_nan=False,
        )
        + "\n",
        encoding="utf-8",
    )
    written.append(meta)
    for name, section in report.sections.items():
        written.extend(_section_tables(bundle, name, section))
    return written


def _section_tables(bundle: Path, name: str, section) -> list[Path]:
    out = []
    if name == "subsample":
        rows = [
            [c["method"], c["sample_size"], c["lv"], c["status"], c["detectability"],
             c["train_test_z"], c["split_half_z_u"], c["split_half_z_v"],
             c["n_completed"], c["n_skipped"], c["skip_reason"]]
            for c in section["cells"]
        ]
        out.append(_write_table(
            bundle / "subsample_cells.csv",
            ["method", "sample_size", "lv", "status", "detectability", "train_test_z",
             "split_half_z_u", "split_half_z_v", "n_completed", "n_skipped", "skip_reason"],
            rows,
        ))
        if section.get("any_lv"):
            out.append(_write_table(
                bundle / "any_lv_rejection.csv",
                ["method", "sample_size", "status", "fraction", "n_completed"],
                [[a["method"], a["sample_size"], a["status"], a["fraction"], a["n_completed"]]
                 for a in section["any_lv"]],
            ))
        return out
    if name == "full_sample":
        for method, body in section["per_method"].items():
            if body.get("status") != "ok":
                out.append(_write_table(
                    bundle / f"status_{method}.csv", ["method", "status", "reason"],
                    [[method, body.get("status"), body.get("reason")]],
                ))
                continue
            perm = body["permutation"]
            out.append(_write_table(
                bundle / f"singular_values_{method}.csv",
                ["lv", "singular_value", "p_value"],
                [[i + 1, s, p] for i, (s, p) in
                 enumerate(zip(perm["singular_values"], perm["p_values"]))],
            ))
            out.append(_write_table(
                bundle / f"reproducibility_z_{method}.csv",
                ["lv", "train_test_z", "split_half_z_u", "split_half_z_v"],
                [[i + 1, tz, zu, zv] for i, (tz, zu, zv) in enumerate(zip(
                    body["train_test"]["z"], body["split_half"]["z_u"],
                    body["split_half"]["z_v"]))],
            ))
            if "bartlett" in body:
                out.append(_write_table(
                    bundle / f"bartlett_{method}.csv",
                    ["start_lv", "chi_square", "df", "p_value"],
                    [[t["start_lv"], t["chi_square"], t["df"], t["p_value"]]
                     for t in body["bartlett"]],
                ))
            out.extend(_weight_tables(bundle, method, body["bootstrap"]))
        return out
    if name == "pca":
        out.append(_write_table(
            bundle / "eigenspectrum.csv",
            ["component", "eigenvalue", "cumulative_variance_fraction"],
            [[i + 1, w, f] for i, (w, f) in
             enumerate(zip(section["eigenvalues"], section["variance_fraction"]))],
        ))
        return out
    if name == "pca_stability":
        out.append(_write_table(
            bundle / "pca_stability.csv",
            ["sample_size", "pc", "mean", "sd", "z", "aligned"],
            [[c["sample_size"], c["pc"], c["mean"], c["sd"], c["z"], section["aligned"]]
             for c in section["cells"]],
        ))
        return out
    # generic sections (permutation, bootstrap, reproducibility, ...) go to JSON
    path = bundle / f"{name}.json"
    path.write_text(
        json.dumps(section, sort_keys=True, indent=2, allow_nan=False) + "\n",
        encoding="utf-8",
    )
    return [path]


def _weight_tables(bundle: Path, method: str, boot: dict) -> list[Path]:
    rows = []
    for block_name in ("x", "y"):
        side = boot[block_name]
        labels = side["labels"]
        observed = side["observed"]
        for vi, label in enumerate(labels):
            for lv in range(len(observed[vi])):
                rows.append([
                    block_name, label, lv + 1, observed[vi][lv],
                    side["lower"][vi][lv], side["upper"][vi][lv], side["stable"][vi][lv],
                ])
    return [_write_table(
        bundle / f"stable_weights_{method}.csv",
        ["block", "variable", "lv", "observed", "lower", "upper", "stable"],
        rows,
    )]


# ---------------------------------------------------------------------------
# Plot-ready data emission
# ---------------------------------------------------------------------------

PLOT_KINDS = ("detectability-bars", "weight-intervals", "eigenspectrum", "z-distributions")


def emit_plot_data(report: ReportDocument, kind: str, out_dir) -> list[Path]:
    """Emit plot-ready CSV files for one figure family.

    detectability-bars: method,sample_size,lv,value (one row per bar).
    weight-intervals: block,variable,lv,lower,upper,stable (one file per method).
    eigenspectrum: component,eigenvalue,cumulative_variance_fraction.
    z-distributions: one file per metric, one column per LV, one row per draw.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if kind == "detectability-bars":
        section = report.section("subsample")
        rows = [
            [c["method"], c["sample_size"], c["lv"], c["detectability"]]
            for c in section["cells"]
            if c["status"] == "ok" and c["detectability"] is not None
        ]
        if not rows:
            raise MissingSection("report has no detectability cells")
        return [_write_table(out_dir / "detectability_bars.csv",
                             ["method", "sample_size", "lv", "value"], rows)]
    if kind == "weight-intervals":
        section = report.section("full_sample")
        written = []
        for method, body in section["per_method"].items():
            if body.get("status") != "ok":
                continue
            boot = body["bootstrap"]
            rows = []
            for block_name in ("x", "y"):
                side = boot[block_name]
                for vi, label in enumerate(side["labels"]):
                    for lv in range(len(side["observed"][vi])):
                        rows.append([block_name, label, lv + 1, side["lower"][vi][lv],
                                     side["upper"][vi][lv], side["stable"][vi][lv]])
            written.append(_write_table(
                out_dir / f"weight_intervals_{method}.csv",
                ["block", "variable", "lv", "lower", "upper", "stable"], rows,
            ))
        if not written:
            raise MissingSection("report has no bootstrap results")
        return written
    if kind == "eigenspectrum":
        for name in ("pca", "full_sample"):
            if name in report.sections:
                section = report.sections[name]
                if name == "full_sample":
                    section = section.get("pca")
                    if section is None:
                        continue
                return [_write_table(
                    out_dir / "eigenspectrum.csv",
                    ["component", "eigenvalue", "cumulative_variance_fraction"],
                    [[i + 1, w, f] for i, (w, f) in
                     enumerate(zip(section["eigenvalues"], section["variance_fraction"]))],
                )]
        raise MissingSection("report has no PCA section")
    if kind == "z-distributions":
        written = []
        for section_name, metrics in _draw_sources(report):
            for metric, draws in metrics:
                if draws is None:
                    continue
                headers = ["draw"] + [f"lv{j + 1}" for j in range(len(draws[0]))]
                rows = [[i + 1] + list(row) for i, row in enumerate(draws)]
                written.append(_write_table(
                    out_dir / f"z_distribution_{section_name}_{metric}.csv", headers, rows,
                ))
        if not written:
            raise MissingSection("report carries no reproducibility draw distributions")
        return written
    raise ValueError(f"unknown plot kind {kind!r}, expected one of {PLOT_KINDS}")


def _draw_sources(report: ReportDocument):
    out = []
    sections = report.sections
    for name, section in sections.items():
        if name.startswith("reproducibility"):
            metrics = []
            tt = section.get("train_test", {})
            sh = section.get("split_half", {})
            metrics.append(("train_test", tt.get("draws")))
            metrics.append(("split_half_u", sh.get("u_draws")))
            metrics.append(("split_half_v", sh.get("v_draws")))
            out.append((name, metrics))
    return out
