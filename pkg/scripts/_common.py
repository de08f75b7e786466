import argparse
import csv
from pathlib import Path

from repalloc.simulator import ScenarioConfig


def parser(doc, default_config=None):
    p = argparse.ArgumentParser(description=doc)
    p.add_argument("--config", default=default_config)
    p.add_argument("--seeds", type=int, default=30)
    p.add_argument("--out", default="out")
    return p


def load(path) -> ScenarioConfig:
    return ScenarioConfig() if path is None else ScenarioConfig.load(path)


def write_rows(out, name, header, rows):
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / name, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {d / name}")
