"""Loading and aligning the monthly market panel.

Inputs are local CSV files: three decile files from the French data library
(``sizes.csv``, ``price_returns.csv``, ``total_returns.csv``, each
``YYYYMM,d1,...,d10``) and FRED series (``DATE,VALUE`` with ISO dates).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import total_ordering
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

N_DECILES = 10
BENCHMARK = 10

DECILE_FILES = {
    "size": "sizes.csv",
    "price_return": "price_returns.csv",
    "total_return": "total_returns.csv",
}


class DataError(ValueError):
    """Base class for input problems."""


class ParseError(DataError):
    pass


class ValidationError(DataError):
    pass


class AlignmentError(DataError):
    pass


@total_ordering
@dataclass(frozen=True)
class MonthKey:
    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValidationError(f"month must be in 1..12, got {self.month}")

    def __lt__(self, other: "MonthKey") -> bool:
        return (self.year, self.month) < (other.year, other.month)

    def __str__(self) -> str:
        return f"{self.year:04d}{self.month:02d}"

    @classmethod
    def parse(cls, text: str) -> "MonthKey":
        s = text.strip()
        if len(s) != 6 or not s.isdigit():
            raise ParseError(f"malformed month {text!r}, expected YYYYMM")
        return cls(int(s[:4]), int(s[4:]))

    @classmethod
    def from_iso(cls, text: str) -> "MonthKey":
        parts = text.strip().split("-")
        if len(parts) != 3 or not all(p.isdigit() for p in parts):
            raise ParseError(f"malformed date {text!r}, expected YYYY-MM-DD")
        return cls(int(parts[0]), int(parts[1]))

    def next(self) -> "MonthKey":
        if self.month == 12:
            return MonthKey(self.year + 1, 1)
        return MonthKey(self.year, self.month + 1)

    def index(self) -> int:
        return self.year * 12 + self.month - 1


def month_range(start: MonthKey, stop: MonthKey) -> list[MonthKey]:
    """Inclusive range of months."""
    out = []
    k = start
    while k <= stop:
        out.append(k)
        k = k.next()
    return out


@dataclass(frozen=True)
class MonthlySeries:
    keys: tuple[MonthKey, ...]
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or len(values) != len(self.keys):
            raise ValidationError(f"{self.name or 'series'}: keys and values differ in length")
        if len(self.keys) == 0:
            raise ValidationError(f"{self.name or 'series'}: no observations")
        for prev, cur in zip(self.keys, self.keys[1:]):
            if cur <= prev:
                raise ValidationError(f"{self.name or 'series'}: months not increasing at {cur}")
            if cur.index() != prev.index() + 1:
                raise AlignmentError(f"{self.name or 'series'}: missing month(s) between {prev} and {cur}")
        bad = ~np.isfinite(values)
        if bad.any():
            raise ValidationError(f"{self.name or 'series'}: non-finite value at {self.keys[int(np.argmax(bad))]}")

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def range(self) -> tuple[MonthKey, MonthKey]:
        return self.keys[0], self.keys[-1]

    def slice(self, start: MonthKey, stop: MonthKey) -> "MonthlySeries":
        i = self.keys.index(start)
        j = self.keys.index(stop) + 1
        return MonthlySeries(self.keys[i:j], self.values[i:j], self.name)


@dataclass(frozen=True)
class DecilePanel:
    """Three blocks of ``(T, 10)`` values on a shared month index.

    Column ``k - 1`` holds decile ``k``; decile 10 is the benchmark.
    """

    keys: tuple[MonthKey, ...]
    size: np.ndarray
    price_return: np.ndarray
    total_return: np.ndarray

    def __post_init__(self):
        T = len(self.keys)
        for name in DECILE_FILES:
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
            if arr.shape != (T, N_DECILES):
                raise AlignmentError(f"{name}: expected shape ({T}, {N_DECILES}), got {arr.shape}")
        # the MonthlySeries constructor enforces ordering, contiguity and finiteness
        MonthlySeries(self.keys, self.size[:, 0], "size")
        for name in DECILE_FILES:
            arr = getattr(self, name)
            if not np.isfinite(arr).all():
                raise ValidationError(f"{name}: non-finite values")
        if (self.size <= 0).any():
            t, k = np.argwhere(self.size <= 0)[0]
            raise ValidationError(f"nonpositive size {self.size[t, k]} for decile {k + 1} at {self.keys[t]}")

    @property
    def range(self) -> tuple[MonthKey, MonthKey]:
        return self.keys[0], self.keys[-1]

    def series(self, kind: str, decile: int) -> MonthlySeries:
        if kind not in DECILE_FILES:
            raise KeyError(kind)
        _check_decile(decile, allow_benchmark=True)
        return MonthlySeries(self.keys, getattr(self, kind)[:, decile - 1], f"{kind}[{decile}]")

    def slice(self, start: MonthKey, stop: MonthKey) -> "DecilePanel":
        i = self.keys.index(start)
        j = self.keys.index(stop) + 1
        return DecilePanel(self.keys[i:j], self.size[i:j], self.price_return[i:j], self.total_return[i:j])


@dataclass(frozen=True)
class MonthlyPanel:
    deciles: DecilePanel
    vix: MonthlySeries
    riskfree: MonthlySeries

    def __post_init__(self):
        rng = self.deciles.range
        for s in (self.vix, self.riskfree):
            if s.range != rng:
                raise AlignmentError(
                    f"{s.name or 'series'} covers {s.range[0]}..{s.range[1]}, panel covers {rng[0]}..{rng[1]}"
                )
        if (self.vix.values <= 0).any():
            raise ValidationError("VIX must be strictly positive")

    @property
    def range(self) -> tuple[MonthKey, MonthKey]:
        return self.deciles.range

    @property
    def keys(self) -> tuple[MonthKey, ...]:
        return self.deciles.keys

    @classmethod
    def align(cls, deciles: DecilePanel, vix: MonthlySeries, riskfree: MonthlySeries) -> "MonthlyPanel":
        """Trim all inputs to their common month range."""
        start = max(deciles.range[0], vix.range[0], riskfree.range[0])
        stop = min(deciles.range[1], vix.range[1], riskfree.range[1])
        if stop < start:
            raise AlignmentError("inputs share no common months")
        return cls(deciles.slice(start, stop), vix.slice(start, stop), riskfree.slice(start, stop))


@dataclass(frozen=True)
class ModelDataset:
    """Regression inputs, one row per month ``t`` with a following month.

    ``R[t, k-1] = ln(S_k(t+1) / S_k(t))``, ``C[t, k-1] = ln(S_k(t) / S_10(t))``,
    ``P`` is the log equity premium and ``V`` is VIX / 100.
    """

    keys: tuple[MonthKey, ...]
    R: np.ndarray
    P: np.ndarray
    C: np.ndarray
    V: np.ndarray
    price_log_return: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def R0(self) -> np.ndarray:
        return self.R[:, BENCHMARK - 1]

    @property
    def P0(self) -> np.ndarray:
        return self.P[:, BENCHMARK - 1]

    def decile(self, k: int) -> dict[str, np.ndarray]:
        _check_decile(k, allow_benchmark=True)
        return {"R": self.R[:, k - 1], "P": self.P[:, k - 1], "C": self.C[:, k - 1]}


def _check_decile(k: int, allow_benchmark: bool = False) -> None:
    top = N_DECILES if allow_benchmark else N_DECILES - 1
    if not 1 <= k <= top:
        raise ValueError(f"decile must be in 1..{top}, got {k}")


def _parse_float(text: str, where: str) -> float:
    s = text.strip()
    try:
        x = float(s)
    except ValueError:
        raise ParseError(f"{where}: cannot parse {text!r} as a number") from None
    if not math.isfinite(x) or s.lower() in {"nan", "inf", "+inf", "-inf", "infinity"}:
        raise ParseError(f"{where}: non-finite value {text!r}")
    return x


def read_decile_csv(path, name: str | None = None) -> tuple[tuple[MonthKey, ...], np.ndarray]:
    """Read one ``YYYYMM,d1,...,d10`` file with a single header row."""
    path = Path(path)
    name = name or path.name
    keys: list[MonthKey] = []
    rows: list[list[float]] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{name}: empty file")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            where = f"{name} row {lineno}"
            if len(row) - 1 != N_DECILES:
                raise ParseError(f"{where}: expected {N_DECILES} value columns, got {len(row) - 1}")
            try:
                key = MonthKey.parse(row[0])
            except DataError as exc:
                raise ParseError(f"{where}: {exc}") from None
            keys.append(key)
            rows.append([_parse_float(c, where) for c in row[1:]])
    if not rows:
        raise ParseError(f"{name}: no observations")
    values = np.array(rows, dtype=float)
    MonthlySeries(tuple(keys), values[:, 0], name)
    return tuple(keys), values


def load_french_deciles(path) -> DecilePanel:
    """Load the three decile files from the directory ``path``."""
    root = Path(path)
    if not root.is_dir():
        raise DataError(f"{root}: not a directory")
    blocks = {}
    keys = None
    for kind, fname in DECILE_FILES.items():
        fpath = root / fname
        if not fpath.exists():
            raise DataError(f"{fpath}: file not found")
        k, v = read_decile_csv(fpath)
        if keys is not None and k != keys:
            raise AlignmentError(
                f"{fname} covers {k[0]}..{k[-1]} but sizes.csv covers {keys[0]}..{keys[-1]}"
            )
        keys = k
        blocks[kind] = v
    return DecilePanel(keys, blocks["size"], blocks["price_return"], blocks["total_return"])


def write_decile_csv(path, keys: Sequence[MonthKey], values: np.ndarray) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write("month," + ",".join(f"d{k}" for k in range(1, N_DECILES + 1)) + "\n")
        for key, row in zip(keys, values):
            fh.write(str(key) + "," + ",".join(repr(float(x)) for x in row) + "\n")


def save_french_deciles(panel: DecilePanel, path) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    for kind, fname in DECILE_FILES.items():
        write_decile_csv(root / fname, panel.keys, getattr(panel, kind))


def load_fred_series(path, name: str) -> MonthlySeries:
    """Read a FRED CSV (``DATE,VALUE`` or ``observation_date,<id>``)."""
    path = Path(path)
    seen: dict[MonthKey, float] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{name}: no observations")
        if len(header) < 2 or header[0].strip().lower() not in {"date", "observation_date"}:
            raise ParseError(f"{name}: expected header DATE,VALUE, got {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise ParseError(f"{name} row {lineno}: expected 2 columns")
            try:
                key = MonthKey.from_iso(row[0])
            except DataError as exc:
                raise ParseError(f"{name} row {lineno}: {exc}") from None
            if row[1].strip() == ".":
                raise ParseError(f"{name}: missing value '.' for month {key}")
            if key in seen:
                raise ValidationError(f"{name}: duplicate observation for month {key}")
            seen[key] = _parse_float(row[1], f"{name} row {lineno}")
    if not seen:
        raise ParseError(f"{name}: no observations")
    keys = tuple(sorted(seen))
    return MonthlySeries(keys, np.array([seen[k] for k in keys]), name)


def write_fred_series(path, series: MonthlySeries) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write("DATE,VALUE\n")
        for key, v in zip(series.keys, series.values):
            fh.write(f"{key.year:04d}-{key.month:02d}-01,{float(v)!r}\n")


def build_dataset(panel: MonthlyPanel) -> ModelDataset:
    """Derive log returns, premia, relative sizes and normalized VIX."""
    d = panel.deciles
    T = len(panel.keys)
    if T < 2:
        raise ValidationError("need at least two months to form returns")
    if (d.size <= 0).any():
        raise ValidationError("sizes must be strictly positive")
    log_size = np.log(d.size)
    R = np.diff(log_size, axis=0)
    C = (log_size - log_size[:, [BENCHMARK - 1]])[:-1]
    rf_month = np.log1p(panel.riskfree.values / 100.0) / 12.0
    P = np.log1p(d.total_return / 100.0)[:-1] - rf_month[:-1, None]
    price = np.log1p(d.price_return / 100.0)[:-1]
    V = panel.vix.values[:-1] / 100.0
    out = ModelDataset(panel.keys[:-1], R, P, C, V, price)
    for name in ("R", "P", "C", "V"):
        if not np.isfinite(getattr(out, name)).all():
            raise ValidationError(f"{name}: non-finite derived values")
    return out


def load_panel(deciles_dir, vix_path, rf_path) -> MonthlyPanel:
    deciles = load_french_deciles(deciles_dir)
    vix = load_fred_series(vix_path, "vix")
    rf = load_fred_series(rf_path, "riskfree")
    return MonthlyPanel.align(deciles, vix, rf)


def series_from_values(values: Iterable[float], start: MonthKey = MonthKey(1990, 1), name: str = "") -> MonthlySeries:
    values = np.asarray(list(values), dtype=float)
    keys = [start]
    for _ in range(len(values) - 1):
        keys.append(keys[-1].next())
    return MonthlySeries(tuple(keys), values, name)
