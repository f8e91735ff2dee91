"""File formats: distributions, results, sweep CSV, run manifests, bundled fixtures."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
import datetime as _dt
from importlib import resources
import io
import json
import time

import numpy as np

from . import __version__
from .constellation import InvalidArgument
from .info import InputDistribution

SWEEP_HEADER = ("snr_db", "family", "rate_bits")


class TranscriptionError(InvalidArgument):
    """Bundled fixture probabilities do not sum to one within 1e-3."""


@dataclass
class RunManifest:
    command: str
    flags: dict
    seed: int | None = None
    grid: dict = field(default_factory=dict)
    version: str = __version__
    started_utc: str = field(
        default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    wall_clock_s: float = 0.0
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def finish(self) -> "RunManifest":
        self.wall_clock_s = round(time.perf_counter() - self._t0, 3)
        return self

    def to_json(self) -> dict:
        return {"command": self.command, "flags": self.flags, "seed": self.seed,
                "grid": self.grid, "version": self.version,
                "started_utc": self.started_utc, "wall_clock_s": self.wall_clock_s}


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_default)


def load_distribution(path: str, M: int | None = None) -> InputDistribution:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"{path}: malformed JSON ({exc})") from exc
    except OSError as exc:
        raise InvalidArgument(f"{path}: {exc}") from exc
    if isinstance(obj, dict) and isinstance(obj.get("best_p"), dict):
        obj = obj["best_p"]
    if not isinstance(obj, dict) or "probs" not in obj:
        raise InvalidArgument(f"{path}: expected an object with a 'probs' list")
    dist = InputDistribution.from_json(obj)
    if M is not None and len(dist) != M:
        raise InvalidArgument(f"{path}: {len(dist)} probabilities, constellation has {M}")
    return dist


def save_distribution(dist: InputDistribution, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(dist.to_json()))


def rows_to_csv(rows: list[dict], header=SWEEP_HEADER) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(header), lineterminator="\r\n",
                       extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def csv_to_rows(text: str) -> list[dict]:
    out = []
    for r in csv.DictReader(io.StringIO(text)):
        out.append({"snr_db": float(r["snr_db"]), "family": r["family"],
                    "rate_bits": float(r["rate_bits"])})
    return out


def load_fixture(name: str) -> dict:
    text = resources.files("macshaping.data").joinpath(name).read_text()
    return json.loads(text)


def fixture_distribution(values, constellation: str, scale: float = 1.0) -> InputDistribution:
    """Hand-transcribed reference vector renormalized to sum one.

    A sum off by more than 1e-3 points to a transcription error.
    """
    p = np.asarray(values, dtype=float) * scale
    s = p.sum()
    if abs(s - 1.0) > 1e-3:
        raise TranscriptionError(f"fixture for {constellation} sums to {s:.6f}")
    return InputDistribution(p / s, constellation)


def table1() -> dict:
    t = load_fixture("table1.json")
    for col in t["columns"]:
        col["dist"] = fixture_distribution(col["probs"], t["constellation"])
    return t


def table2() -> dict:
    return load_fixture("table2.json")


def asymmetric_pair() -> dict:
    t = load_fixture("asymmetric_pair.json")
    t["p_dist"] = fixture_distribution(t["p"], t["constellation"], t["scale"])
    t["q_dist"] = fixture_distribution(t["q"], t["constellation"], t["scale"])
    return t
