#!/usr/bin/env python3
"""Convert NYC TLC yellow-taxi records (2016 layout, with coordinates) to the
trip CSV read by `amodscale`.

Timestamps stay local wall-clock time; pass `--utc-offset -04:00` (EDT) to the
CLI. Rows with missing coordinates or non-positive duration are dropped.
"""

import argparse
import csv
import sys
from datetime import datetime

MILE_M = 1609.344
FMT = "%Y-%m-%d %H:%M:%S"


def convert(src, dst, bbox=None):
    reader = csv.DictReader(src)
    reader.fieldnames = [f.strip().lower() for f in reader.fieldnames]
    out = csv.writer(dst, lineterminator="\n")
    out.writerow(["pickup_datetime", "origin_lon", "origin_lat", "dest_lon", "dest_lat",
                  "duration_s", "distance_m"])
    kept = dropped = 0
    for row in reader:
        try:
            t0 = datetime.strptime(row["tpep_pickup_datetime"].strip(), FMT)
            t1 = datetime.strptime(row["tpep_dropoff_datetime"].strip(), FMT)
            olon, olat = float(row["pickup_longitude"]), float(row["pickup_latitude"])
            dlon, dlat = float(row["dropoff_longitude"]), float(row["dropoff_latitude"])
            dist = float(row["trip_distance"]) * MILE_M
        except (KeyError, ValueError):
            dropped += 1
            continue
        dur = (t1 - t0).total_seconds()
        inside = bbox is None or all(bbox[0] <= lon <= bbox[2] and bbox[1] <= lat <= bbox[3]
                                     for lon, lat in ((olon, olat), (dlon, dlat)))
        if dur <= 0 or dist <= 0 or 0.0 in (olon, olat, dlon, dlat) or not inside:
            dropped += 1
            continue
        out.writerow([t0.strftime(FMT), olon, olat, dlon, dlat, int(dur), round(dist, 1)])
        kept += 1
    return kept, dropped


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--bbox", type=float, nargs=4, metavar=("MIN_LON", "MIN_LAT", "MAX_LON", "MAX_LAT"),
                   help="keep trips with both ends inside this box")
    args = p.parse_args(argv)
    with open(args.input, newline="") as src, open(args.output, "w", newline="") as dst:
        kept, dropped = convert(src, dst, args.bbox)
    print(f"{kept} trips written, {dropped} dropped", file=sys.stderr)


if __name__ == "__main__":
    main()
