#!/usr/bin/env python3
# Copyright 2026 The iea-sim Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Recomputes a run's summary.json from its run_log.csv and latency.csv and
checks every figure against the stored summary."""

import argparse
import csv
import json
import math
import sys
from pathlib import Path

SETTLE_AFTER_FIX = 10.0
TOLERANCE = 1e-9


def read_run_log(path):
    with open(path, newline="") as f:
        meta_line = f.readline().rstrip("\n")
        if not meta_line.startswith("#schema=1"):
            raise ValueError(f"{path}: unexpected schema line")
        meta = dict(field.split("=", 1) for field in meta_line[1:].split(";") if "=" in field)
        ids = meta["mssps"].split("|") if meta.get("mssps") else []
        plan = [tuple(float(v) for v in p.split(" ")) for p in meta["plan"].split("|")] if meta.get("plan") else []
        rows = []
        for rec in csv.DictReader(f):
            opt = lambda k: float(rec[k]) if rec[k] != "" else None
            est = []
            for i in ids:
                x, y, tc = opt(i + "_x"), opt(i + "_y"), opt(i + "_tcap")
                est.append((x, y, tc) if None not in (x, y, tc) else None)
            rows.append({
                "t": float(rec["t"]), "x": float(rec["true_x"]), "y": float(rec["true_y"]),
                "fx": opt("fused_x"), "fy": opt("fused_y"), "est": est, "phase": rec["phase"],
            })
    return {"name": meta.get("name", ""), "dt": float(meta["dt"]), "ids": ids, "plan": plan}, rows


def read_latency(path):
    with open(path, newline="") as f:
        f.readline()
        return [(r["link"], int(r["bytes"]), float(r["latency"])) for r in csv.DictReader(f)]


def truth_at(rows, t):
    if t <= rows[0]["t"]:
        return rows[0]["x"], rows[0]["y"]
    if t >= rows[-1]["t"]:
        return rows[-1]["x"], rows[-1]["y"]
    lo, hi = 0, len(rows) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if rows[mid]["t"] <= t:
            lo = mid
        else:
            hi = mid
    a, b = rows[lo], rows[hi]
    f = (t - a["t"]) / (b["t"] - a["t"])
    return a["x"] + f * (b["x"] - a["x"]), a["y"] + f * (b["y"] - a["y"])


def distance_to_polyline(plan, px, py):
    best = math.inf
    for (ax, ay), (bx, by) in zip(plan, plan[1:]):
        ex, ey = bx - ax, by - ay
        l2 = ex * ex + ey * ey
        f = min(1.0, max(0.0, ((px - ax) * ex + (py - ay) * ey) / l2)) if l2 > 0 else 0.0
        best = min(best, math.hypot(px - (ax + f * ex), py - (ay + f * ey)))
    return best


def nearest_rank(values, q):
    values = sorted(values)
    rank = math.ceil(q * len(values))
    return values[min(max(rank, 1), len(values)) - 1]


def rms(sq):
    return math.sqrt(sum(sq) / len(sq)) if sq else None


def recompute(meta, rows, latency):
    s = {"schema": 1, "scenario": meta["name"], "rows": len(rows)}
    duration = rows[-1]["t"] - rows[0]["t"] + meta["dt"] if rows else 0.0
    s["duration"] = duration
    s["end_phase"] = rows[-1]["phase"] if rows else ""
    first_fix = next((r["t"] for r in rows if r["fx"] is not None), None)
    s["first_fix_time"] = first_fix

    errs = []
    if first_fix is not None and len(meta["plan"]) >= 2:
        errs = [distance_to_polyline(meta["plan"], r["x"], r["y"]) for r in rows
                if r["t"] >= first_fix + SETTLE_AFTER_FIX]
    s["cross_track"] = {
        "samples": len(errs), "rms": rms([e * e for e in errs]), "max": max(errs) if errs else None,
        "settle_time": first_fix + SETTLE_AFTER_FIX if first_fix is not None else None,
    }

    overshoot = 0.0
    if first_fix is not None and len(meta["plan"]) >= 2:
        y_final = meta["plan"][-1][1]
        dy = y_final - meta["plan"][0][1]
        sign = (dy > 0) - (dy < 0)
        for r in rows:
            if r["t"] >= first_fix:
                dev = abs(r["y"] - y_final) if sign == 0 else sign * (r["y"] - y_final)
                overshoot = max(overshoot, dev)
    s["overshoot"] = overshoot

    per = {}
    for i, mid in enumerate(meta["ids"]):
        e = []
        for r in rows:
            if r["est"][i] is not None:
                x, y, tc = r["est"][i]
                tx, ty = truth_at(rows, tc)
                e.append(math.hypot(x - tx, y - ty))
        per[mid] = {"count": len(e), "rms": rms([v * v for v in e]), "max": max(e) if e else None}
    s["estimates"] = per

    max_jump, decreases, gaps, prev = 0.0, 0, 0, None
    for r in rows:
        if r["fx"] is None:
            if first_fix is not None and r["t"] > first_fix:
                gaps += 1
            prev = None
            continue
        if prev is not None:
            max_jump = max(max_jump, math.hypot(r["fx"] - prev["fx"], r["fy"] - prev["fy"]))
            decreases += r["fx"] < prev["fx"]
        prev = r
    s["fused"] = {"max_jump": max_jump, "x_decreases": decreases, "gap_rows": gaps}

    links = {}
    for link, nbytes, _ in latency:
        p, b = links.get(link, (0, 0))
        links[link] = (p + 1, b + nbytes)
    lat = [l for _, _, l in latency]
    s["network"] = {
        "links": {k: {"packets": p, "bytes": b,
                      "packets_per_s": p / duration if duration > 0 else 0.0,
                      "bytes_per_s": b / duration if duration > 0 else 0.0} for k, (p, b) in links.items()},
        "latency": {"count": len(lat),
                    "min": min(lat) if lat else None, "p50": nearest_rank(lat, 0.5) if lat else None,
                    "p95": nearest_rank(lat, 0.95) if lat else None, "max": max(lat) if lat else None},
    }
    return s


def compare(expected, actual, path, problems):
    if isinstance(expected, dict):
        if not isinstance(actual, dict):
            problems.append(f"{path}: expected an object")
            return
        for key, value in expected.items():
            if key not in actual:
                problems.append(f"{path}.{key}: missing")
            else:
                compare(value, actual[key], f"{path}.{key}", problems)
    elif isinstance(expected, (int, float)) and not isinstance(expected, bool):
        if not isinstance(actual, (int, float)) or abs(expected - actual) > TOLERANCE * max(1.0, abs(expected)):
            problems.append(f"{path}: recomputed {expected!r}, stored {actual!r}")
    elif expected != actual:
        problems.append(f"{path}: recomputed {expected!r}, stored {actual!r}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("run_dir", type=Path)
    args = parser.parse_args()
    meta, rows = read_run_log(args.run_dir / "run_log.csv")
    latency = read_latency(args.run_dir / "latency.csv")
    stored = json.loads((args.run_dir / "summary.json").read_text())
    problems = []
    compare(recompute(meta, rows, latency), stored, "summary", problems)
    for p in problems:
        print(p)
    print(f"{len(problems)} mismatches against {args.run_dir / 'summary.json'}")
    return 1 if problems else 0


if __name__ == "__main__":
    sys.exit(main())
