"""Serialization shared by the CLI: GeoJSON, run manifests, result CSVs.

Formats are CSV, JSON and GeoJSON only. Floats are written with repr()
so identical runs produce byte-identical files; wall-clock timings live
in the run manifest, never in result files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os

from . import __version__
from .domain import Instance
from .metrics import RADAR_AXES, RadarValues
from .scenarios import ScenarioResult
from .solver import ParetoFront, Selection

MANIFEST_FILE = "run_manifest.json"


def write_geojson(selection: Selection, instance: Instance, path: str) -> None:
    """Selection as a GeoJSON FeatureCollection of Point features."""
    by_id = {c.site_id: c for c in instance.candidates}
    features = []
    for sid in selection.site_ids:
        c = by_id[sid]
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [c.lon, c.lat]},
            "properties": {
                "site_id": c.site_id,
                "municipality_id": c.municipality_id,
                "capacity_mw": c.capacity,
                "lcoe": c.lcoe,
                "scenicness": c.scenicness,
                "network_length_km": c.network_length,
            },
        })
    doc = {"type": "FeatureCollection", "features": features}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def write_selection_csv(selection: Selection, instance: Instance, path: str) -> None:
    by_id = {c.site_id: c for c in instance.candidates}
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["site_id", "municipality_id", "capacity_mw", "lcoe",
                    "scenicness", "network_length_km"])
        for sid in selection.site_ids:
            c = by_id[sid]
            w.writerow([c.site_id, c.municipality_id, repr(c.capacity), repr(c.lcoe),
                        repr(c.scenicness),
                        "" if c.network_length is None else repr(c.network_length)])


def read_selection_csv(path: str) -> list[int]:
    with open(path, newline="", encoding="utf-8") as f:
        return [int(r["site_id"]) for r in csv.DictReader(f)]


def write_summary_json(selection: Selection, path: str) -> None:
    doc = {
        "n_sites": selection.n_sites,
        "objective": selection.objective_value,
        "lower_bound": selection.lower_bound,
        "gap": selection.gap,
        "totals": {
            "capacity_mw": selection.totals.capacity_mw,
            "lcoe": selection.totals.lcoe,
            "scenicness": selection.totals.scenicness,
            "network_length_km": selection.totals.network_length_km,
        },
        "means": {
            "lcoe": selection.means.lcoe,
            "scenicness": selection.means.scenicness,
            "network_length_km": selection.means.network_length_km,
            "lcoe_capacity_weighted": selection.means.lcoe_capacity_weighted,
        },
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def write_front_csv(front: ParetoFront, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["step", "cap", "achieved_min", "gap"])
        for p in front.points:
            w.writerow([p.step, repr(p.cap), repr(p.achieved_min), repr(p.gap)])


def write_results_csv(results: list[ScenarioResult], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["name", "w_c", "w_s", "w_l", "equity", "total_capacity_mw",
                    "added_target_mw", "n_sites", "mean_lcoe", "mean_scenicness",
                    "mean_network_length_km", "equity_pct", "south_quota_pct",
                    "objective", "lower_bound", "gap", "error"])
        for r in results:
            w.writerow([r.name, repr(r.weights.w_c), repr(r.weights.w_s),
                        repr(r.weights.w_l), int(r.equity), repr(r.total_capacity_mw),
                        repr(r.added_target_mw), r.n_sites, repr(r.mean_lcoe),
                        repr(r.mean_scenicness), repr(r.mean_network_length_km),
                        repr(r.equity_pct), repr(r.south_quota_pct), repr(r.objective),
                        repr(r.lower_bound), repr(r.gap), r.error or ""])


def write_radar_csv(radar: RadarValues, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["name"] + list(RADAR_AXES))
        for name in sorted(radar.values):
            row = [name] + [repr(radar.values[name][a]) for a in RADAR_AXES]
            w.writerow(row)


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(out_dir: str, inputs: list[str], config: dict,
                   timings_s: dict[str, float], warnings: list[str] | None = None) -> None:
    doc = {
        "tool_version": __version__,
        "inputs": {os.path.basename(p): _sha256(p) for p in sorted(inputs)
                   if os.path.isfile(p)},
        "config": config,
        "timings_s": timings_s,
        "warnings": warnings or [],
    }
    with open(os.path.join(out_dir, MANIFEST_FILE), "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def instance_files(directory: str) -> list[str]:
    return [os.path.join(directory, n) for n in
            ("candidates.csv", "municipalities.csv", "existing.csv", "transformers.csv")]
