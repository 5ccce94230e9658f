#!/usr/bin/env python3
"""Regenerates the bundled test fixtures. Output is deterministic."""

import bz2
import csv
import gzip
import io
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent

COLUMNS = [
    "BEGIN_YEARMONTH", "BEGIN_DAY", "BEGIN_TIME", "END_YEARMONTH", "END_DAY",
    "END_TIME", "EPISODE_ID", "EVENT_ID", "STATE", "STATE_FIPS",
    "YEAR", "MONTH_NAME", "EVENT_TYPE", "CZ_TYPE", "CZ_FIPS",
    "CZ_NAME", "WFO", "BEGIN_DATE_TIME", "CZ_TIMEZONE", "END_DATE_TIME",
    "INJURIES_DIRECT", "INJURIES_INDIRECT", "DEATHS_DIRECT", "DEATHS_INDIRECT", "DAMAGE_PROPERTY",
    "DAMAGE_CROPS", "SOURCE", "MAGNITUDE", "MAGNITUDE_TYPE", "FLOOD_CAUSE",
    "CATEGORY", "TOR_F_SCALE", "TOR_LENGTH", "TOR_WIDTH", "TOR_OTHER_WFO",
    "TOR_OTHER_CZ_STATE", "TOR_OTHER_CZ_FIPS", "TOR_OTHER_CZ_NAME", "BEGIN_RANGE", "BEGIN_AZIMUTH",
    "BEGIN_LOCATION", "END_RANGE", "END_AZIMUTH", "END_LOCATION", "BEGIN_LAT",
    "BEGIN_LON", "END_LAT", "END_LON", "EPISODE_NARRATIVE", "EVENT_NARRATIVE",
    "DATA_SOURCE",
]

MONTHS = ["January", "February", "March", "April", "May", "June", "July",
          "August", "September", "October", "November", "December"]

STANDARD = ["TORNADO", "HAIL", "THUNDERSTORM WIND", "FLASH FLOOD", "FLOOD",
            "HEAVY SNOW", "WINTER STORM", "DROUGHT", "LIGHTNING", "HIGH WIND"]
ODD = ["THUNDERSTORM WIND/HAIL", "HAIL/TORNADO", "Tornado", "hail ", "TSTM WIND",
       "HAIL FLOODING", "  flash   flood"]
DAMAGE = ["0K", "0", "", "", "1K", "2.5K", "10K", "100K", "1.55B", "3M", "0.5M",
          "25.00K", "5H", "7h", "2.56", "1m", "k", "?", "12X", "4b"]
STATES = ["KANSAS", "TEXAS", "IOWA", "OHIO", "NEBRASKA"]


def base_row(rng, year, month, episode, event_id, event_type, prop, crop):
    row = {c: "" for c in COLUMNS}
    mi = MONTHS.index(month) + 1
    row.update({
        "BEGIN_YEARMONTH": f"{year}{mi:02d}",
        "BEGIN_DAY": str(rng.randint(1, 28)),
        "BEGIN_TIME": str(rng.randint(0, 2359)),
        "END_YEARMONTH": f"{year}{mi:02d}",
        "EPISODE_ID": episode,
        "EVENT_ID": str(event_id),
        "STATE": rng.choice(STATES),
        "YEAR": str(year),
        "MONTH_NAME": month,
        "EVENT_TYPE": event_type,
        "DAMAGE_PROPERTY": prop,
        "DAMAGE_CROPS": crop,
        "SOURCE": "NWS",
        "DATA_SOURCE": "CSV",
    })
    return row


def narrative(rng):
    words = ["storm", "moved", "across", "the", "county", "damaging", "roofs",
             "and", "trees,", "with", "\"large\"", "hail", "reported", "near", "town"]
    parts = [rng.choice(words) for _ in range(rng.randint(0, 12))]
    text = " ".join(parts)
    if rng.random() < 0.1:
        text += "\nSecond line, after a break."
    if rng.random() < 0.05:
        text += " café"
    return text


def write_csv(rows, header=COLUMNS, extra_lines=()):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([r[c] for c in header])
    text = buf.getvalue()
    for line in extra_lines:
        text += line
    return text.encode("utf-8")


def save(path, data, compression):
    path.parent.mkdir(parents=True, exist_ok=True)
    if compression == "gz":
        out = io.BytesIO()
        with gzip.GzipFile(fileobj=out, mode="wb", mtime=0, filename="") as gz:
            gz.write(data)
        data = out.getvalue()
    elif compression == "bz2":
        data = bz2.compress(data)
    path.write_bytes(data)


def make_corpus():
    rng = random.Random(20160223)
    out_dir = HERE / "corpus"
    for old in out_dir.glob("*"):
        old.unlink()
    years = list(range(1990, 2000))
    per_year = 1000
    event_id = 1
    for i, year in enumerate(years):
        rows = []
        n_episodes = 120
        for _ in range(per_year):
            ep_num = rng.randint(1, n_episodes)
            episode = "" if rng.random() < 0.05 else str(year * 1000 + ep_num)
            month = MONTHS[(ep_num * 7) % 12] if episode else rng.choice(MONTHS)
            etype = rng.choice(ODD) if rng.random() < 0.03 else rng.choice(STANDARD)
            if rng.random() < 0.01:
                etype = ""
            row = base_row(rng, year, month, episode, event_id, etype,
                           rng.choice(DAMAGE), rng.choice(DAMAGE))
            row["EPISODE_NARRATIVE"] = narrative(rng)
            row["EVENT_NARRATIVE"] = narrative(rng)
            rows.append(row)
            event_id += 1
        if year == 1993:
            rows[5]["YEAR"] = "1994"  # kept, flagged
            rows[6]["YEAR"] = "19x3"  # dropped
        extra = []
        if year == 1996:
            extra.append("1,2,3\n")  # short row
        compression = ["gz", "bz2", ""][i % 3]
        name = f"StormEvents_details-ftp_v1.0_d{year}_c20160223.csv"
        if compression:
            name += "." + compression
        save(out_dir / name, write_csv(rows, extra_lines=extra), compression)
    # superseded older snapshot for one year
    rows = [base_row(rng, 1991, "May", "1", 9_999_999, "TORNADO", "1B", "1B")]
    save(out_dir / "StormEvents_details-ftp_v1.0_d1991_c20150101.csv", write_csv(rows), "")


def make_planted():
    """Small corpus planting the cases the audit is meant to surface."""
    rng = random.Random(7)
    out_dir = HERE / "planted"
    for old in out_dir.glob("*"):
        old.unlink()

    # 1995: one non-standard combined name among tornado/hail events;
    # 31 of 50 crop fields empty.
    rows = []
    for k in range(50):
        etype = "HAIL/TORNADO" if k == 3 else ("TORNADO" if k % 2 else "HAIL")
        crop = "" if k < 31 else "0K"
        rows.append(base_row(rng, 1995, "June", str(40000 + k % 4), 500 + k, etype, "10K", crop))
    save(out_dir / "StormEvents_details-ftp_v1.0_d1995_c20160223.csv.gz", write_csv(rows), "gz")

    # 2006: 100 events, 62 with an empty crop damage field, so the whole
    # fixture has 93 of 150 crop values missing.
    rows = []
    for k in range(100):
        crop = "" if k < 62 else "0K"
        prop = "5K"
        etype = "THUNDERSTORM WIND"
        episode = str(1200000 + k % 10)
        month = "March"
        if k == 70:
            episode, month, etype = "1203478", "January", "FLOOD"
            prop, crop = "115B", "32.5M"
        if k == 71:
            prop = "2.56"
        row = base_row(rng, 2006, month, episode, 600 + k, etype, prop, crop)
        if k == 70:
            row["EPISODE_NARRATIVE"] = ("Heavy rain over several days flooded the Napa River valley, "
                                        "inundating homes and vineyards.")
        rows.append(row)
    save(out_dir / "StormEvents_details-ftp_v1.0_d2006_c20160223.csv.bz2", write_csv(rows), "bz2")


if __name__ == "__main__":
    make_corpus()
    make_planted()
