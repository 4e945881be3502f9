#!/usr/bin/env python3
"""Build data/top_40_pop_cities.csv from the Countries-States-Cities database
and a World Population Review city export.

    python3 scripts/build_dataset.py --csc-dir path/to/csc/json \
        --population world_cities_2025.csv --out data/top_40_pop_cities.csv

The CSC directory must hold regions.json, subregions.json, countries.json,
states.json and cities.json. The population CSV needs a city column, a country
column and a 2025 population column (names configurable below).
"""

import argparse
import csv
import json
import sys
import unicodedata
from pathlib import Path

COLUMNS = [
    "city_id", "city_name", "state_id", "state_name", "country_id", "country_name",
    "region_id", "region_name", "subregion_id", "subregion_name", "population_2025",
]


def norm(name):
    folded = unicodedata.normalize("NFKD", name)
    return "".join(c for c in folded if not unicodedata.combining(c)).strip().lower()


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def flatten(csc_dir):
    regions = {r["id"]: r for r in load(csc_dir / "regions.json")}
    subregions = {s["id"]: s for s in load(csc_dir / "subregions.json")}
    countries = {c["id"]: c for c in load(csc_dir / "countries.json")}
    states = {s["id"]: s for s in load(csc_dir / "states.json")}
    rows = []
    for city in load(csc_dir / "cities.json"):
        state = states.get(city.get("state_id"))
        country = countries.get(city.get("country_id"))
        if not state or not country:
            continue
        region = regions.get(country.get("region_id"))
        subregion = subregions.get(country.get("subregion_id"))
        if not region or not subregion:
            continue
        rows.append({
            "city_id": city["id"], "city_name": city["name"],
            "state_id": state["id"], "state_name": state["name"],
            "country_id": country["id"], "country_name": country["name"],
            "region_id": region["id"], "region_name": region["name"],
            "subregion_id": subregion["id"], "subregion_name": subregion["name"],
        })
    return rows


def load_population(path, city_col, country_col, pop_col):
    pops = {}
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            try:
                value = int(float(row[pop_col]))
            except (KeyError, ValueError):
                continue
            key = (norm(row[city_col]), norm(row[country_col]))
            pops[key] = max(value, pops.get(key, 0))
    return pops


def merge(rows, pops):
    # Several CSC cities can share a name within one country; keep the lowest city_id.
    best = {}
    for row in rows:
        key = (norm(row["city_name"]), norm(row["country_name"]))
        if key not in pops:
            continue
        merged = dict(row, population_2025=pops[key])
        held = best.get(key)
        if held is None or merged["city_id"] < held["city_id"]:
            best[key] = merged
    return list(best.values())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--csc-dir", type=Path, required=True)
    ap.add_argument("--population", type=Path, required=True)
    ap.add_argument("--city-column", default="city")
    ap.add_argument("--country-column", default="country")
    ap.add_argument("--population-column", default="pop2025")
    ap.add_argument("--top-n", type=int, default=40)
    ap.add_argument("--out", type=Path, default=Path("data/top_40_pop_cities.csv"))
    args = ap.parse_args(argv)

    rows = merge(flatten(args.csc_dir),
                 load_population(args.population, args.city_column, args.country_column, args.population_column))
    rows.sort(key=lambda r: (-r["population_2025"], r["city_id"]))
    rows = rows[: args.top_n]
    if len(rows) < args.top_n:
        print(f"only {len(rows)} cities matched", file=sys.stderr)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {len(rows)} cities to {args.out}")


if __name__ == "__main__":
    main()
