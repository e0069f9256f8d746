"""End-to-end experiments: enumerate twists, batch central values, count
vanishings per progression class, and compare the empirical ratio against the
first- and second-order predictions.

Outputs are plain CSV with a fixed column order and provenance columns
(X, epsilon, prime cutoff, build id), so a rerun of the same pipeline yields
byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import math
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import central_values as cv
from . import characters, curve_model
from .characters import FamilySelector, kronecker
from .curve_model import CurveSpec
from .errors import ConfigError, RecordIOError
from .primes import is_prime, primes_up_to
from .ratio_conjecture import Prediction, r_predicted

AP_CACHE_MAGIC = b"ap"
AP_CACHE_HEADER = "<2sHI"  # magic, label hash (crc16), prime limit


@dataclass(frozen=True)
class RatioReport:
    curve_label: str
    sign: str
    q: int
    a_q: int
    X: int
    vanished_plus: int
    vanished_minus: int
    size_plus: int
    size_minus: int
    size_zero: int
    r_empirical: Optional[float]
    r_main: float
    r_second: float
    prediction: Prediction

    @property
    def resid1(self) -> Optional[float]:
        return None if self.r_empirical is None else self.r_empirical - self.r_main

    @property
    def resid2(self) -> Optional[float]:
        return None if self.r_empirical is None else self.r_empirical - self.r_second


@dataclass(frozen=True)
class Histogram:
    bin_width: float
    bins: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.bins.values())


def histogram(values: Sequence[float], bin_width: float = 0.0002) -> Histogram:
    """Counts per bin, with bin index floor(v / bin_width)."""
    if not bin_width > 0:
        raise ConfigError("bin width must be positive")
    bins: dict[int, int] = {}
    for v in values:
        idx = math.floor(v / bin_width)
        bins[idx] = bins.get(idx, 0) + 1
    return Histogram(bin_width, bins)


def ratio_report(
    records: Sequence[cv.TwistRecord],
    sel: FamilySelector,
    q: int,
    prediction: Prediction,
) -> RatioReport:
    """Vanishing counts per chi_d(q) class and both residuals.

    Discriminants with chi_d(q) = 0 belong to neither class and are excluded
    from both; a zero count in the lambda = -1 class leaves the ratio (and
    residuals) undefined while the counts are still reported.
    """
    if sel.curve.conductor % q == 0:
        raise ConfigError("ratio reports need q not dividing the conductor")
    n_plus = n_minus = n_zero = v_plus = v_minus = 0
    mod = 8 if q == 2 else q
    table = [kronecker(r, q) for r in range(mod)]
    for rec in records:
        lam = table[rec.d % mod]
        if lam == 0:
            n_zero += 1
            continue
        if lam == 1:
            n_plus += 1
            v_plus += rec.vanished
        else:
            n_minus += 1
            v_minus += rec.vanished
    r_emp = v_plus / v_minus if v_minus > 0 else None
    return RatioReport(
        curve_label=sel.curve.label,
        sign=sel.sign,
        q=q,
        a_q=prediction.a_q,
        X=sel.bound,
        vanished_plus=v_plus,
        vanished_minus=v_minus,
        size_plus=n_plus,
        size_minus=n_minus,
        size_zero=n_zero,
        r_empirical=r_emp,
        r_main=prediction.r_main,
        r_second=prediction.value,
        prediction=prediction,
    )


# ---------------------------------------------------------------------------
# coefficient cache files

def _crc16(label: str) -> int:
    return zlib.crc32(label.encode()) & 0xFFFF


def ap_cache_path(cache_dir: str | Path, curve: CurveSpec) -> Path:
    return Path(cache_dir) / f"{curve.label}.apc"


def write_ap_cache(path: str | Path, curve: CurveSpec, limit: int) -> None:
    ps, aps = curve_model.ap_table(curve, limit)
    if np.abs(aps).max(initial=0) > 32767:
        raise ConfigError("a_p exceeds the 16-bit cache format")
    with open(path, "wb") as fh:
        fh.write(struct.pack(AP_CACHE_HEADER, AP_CACHE_MAGIC, _crc16(curve.label), limit))
        fh.write(aps.astype("<i2").tobytes())


def read_ap_cache(path: str | Path, curve: CurveSpec) -> Optional[tuple[int, np.ndarray]]:
    """(limit, a_p by prime rank), or None if missing/corrupt/foreign."""
    path = Path(path)
    if not path.exists():
        return None
    blob = path.read_bytes()
    hsize = struct.calcsize(AP_CACHE_HEADER)
    if len(blob) < hsize:
        return None
    magic, label_hash, limit = struct.unpack_from(AP_CACHE_HEADER, blob)
    if magic != AP_CACHE_MAGIC or label_hash != _crc16(curve.label):
        return None
    aps = np.frombuffer(blob[hsize:], dtype="<i2").astype(np.int64)
    if len(aps) != len(primes_up_to(limit)):
        return None
    return limit, aps


def cache_management(
    curve: CurveSpec, N: int, cache_dir: str | Path
) -> tuple[np.ndarray, np.ndarray]:
    """Build or reuse the on-disk a_p cache covering primes <= N; idempotent.

    A valid cache with a larger limit is reused as-is (prefix semantics);
    a shorter one seeds the in-memory table before extension; anything
    corrupt is silently rebuilt.
    """
    Path(cache_dir).mkdir(parents=True, exist_ok=True)
    path = ap_cache_path(cache_dir, curve)
    cached = read_ap_cache(path, curve)
    if cached is not None:
        limit, aps = cached
        ps = primes_up_to(limit)
        if limit >= N:
            key = (curve.label, curve.weierstrass, limit)
            with curve_model._table_lock:
                curve_model._ap_cache.setdefault(key, (ps, aps))
            n = int(np.searchsorted(ps, N, side="right"))
            return ps[:n], aps[:n]
        key = (curve.label, curve.weierstrass, limit)
        with curve_model._table_lock:
            curve_model._ap_cache.setdefault(key, (ps, aps))
        ps_new = primes_up_to(N)
        tail = curve_model.compute_ap_range(curve, ps_new[len(ps):])
        aps_new = np.concatenate([aps, tail])
        key = (curve.label, curve.weierstrass, N)
        with curve_model._table_lock:
            curve_model._ap_cache[key] = (ps_new, aps_new)
        write_ap_cache(path, curve, N)
        return ps_new, aps_new
    ps, aps = curve_model.ap_table(curve, N)
    write_ap_cache(path, curve, N)
    return ps, aps


# ---------------------------------------------------------------------------
# provenance

def build_id() -> str:
    """Content hash of the package sources: stable across reruns, changes
    with the code."""
    src = Path(__file__).parent
    h = hashlib.sha1()
    for path in sorted(src.rglob("*.py")) + sorted(src.rglob("*.cfg")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:12]


# ---------------------------------------------------------------------------
# the residual suite

SUITE_COLUMNS = [
    "curve", "q", "a_q", "resid1", "resid2", "sign",
    "vanished_plus", "vanished_minus", "size_plus", "size_minus",
    "r_empirical", "r_main", "r_second",
    "X", "epsilon", "P", "build_id",
]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def residual_suite(
    curves: Sequence[CurveSpec],
    sign: str,
    X: int,
    q_max: int,
    prime_cutoff: int,
    epsilon: float,
    records_dir: str | Path,
    out_csv: str | Path,
    aggregates_csv: Optional[str | Path] = None,
) -> list[RatioReport]:
    """Rows (curve, q, a_q, resid1, resid2, ...) for all primes q <= q_max
    with q not dividing the conductor, from per-curve record files named
    records_<label>_<sign>.bin in records_dir."""
    reports: list[RatioReport] = []
    bid = build_id()
    for curve in curves:
        rec_path = Path(records_dir) / f"records_{curve.label}_{sign}.bin"
        if not rec_path.exists():
            raise RecordIOError(
                f"missing records file for curve {curve.label}: {rec_path}"
            )
        _, records = cv.read_records(rec_path, curve)
        sel = FamilySelector(sign, X, curve)
        for q in map(int, primes_up_to(q_max)):
            if curve.conductor % q == 0:
                continue
            pred = r_predicted(curve, sign, q, X, prime_cutoff=prime_cutoff)
            reports.append(ratio_report(records, sel, q, pred))
    with open(out_csv, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUITE_COLUMNS)
        for r in reports:
            writer.writerow(
                [
                    r.curve_label, r.q, r.a_q, _fmt(r.resid1), _fmt(r.resid2),
                    r.sign, r.vanished_plus, r.vanished_minus, r.size_plus,
                    r.size_minus, _fmt(r.r_empirical), _fmt(r.r_main),
                    _fmt(r.r_second), r.X, _fmt(epsilon), prime_cutoff, bid,
                ]
            )
    if aggregates_csv is not None:
        write_aggregates(reports, aggregates_csv, X, epsilon, prime_cutoff, bid)
    return reports


def write_aggregates(
    reports: Sequence[RatioReport],
    path: str | Path,
    X: int,
    epsilon: float,
    prime_cutoff: int,
    bid: Optional[str] = None,
) -> dict:
    """Mean/variance of both residual columns, overall and grouped by a_q."""
    bid = bid or build_id()
    groups: dict[str, list[RatioReport]] = {"all": []}
    for r in reports:
        if r.r_empirical is None:
            continue
        groups["all"].append(r)
        groups.setdefault(f"a_q={r.a_q}", []).append(r)
    rows = []
    for scope in ["all"] + sorted(
        (g for g in groups if g != "all"), key=lambda s: int(s.split("=")[1])
    ):
        rs = groups[scope]
        if not rs:
            continue
        r1 = np.array([r.resid1 for r in rs])
        r2 = np.array([r.resid2 for r in rs])
        rows.append(
            {
                "scope": scope,
                "n_rows": len(rs),
                "mean_resid1": float(r1.mean()),
                "var_resid1": float(r1.var(ddof=1)) if len(rs) > 1 else 0.0,
                "mean_resid2": float(r2.mean()),
                "var_resid2": float(r2.var(ddof=1)) if len(rs) > 1 else 0.0,
            }
        )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["scope", "n_rows", "mean_resid1", "var_resid1", "mean_resid2",
             "var_resid2", "X", "epsilon", "P", "build_id"]
        )
        for row in rows:
            writer.writerow(
                [row["scope"], row["n_rows"], _fmt(row["mean_resid1"]),
                 _fmt(row["var_resid1"]), _fmt(row["mean_resid2"]),
                 _fmt(row["var_resid2"]), X, _fmt(epsilon), prime_cutoff, bid]
            )
    return {row["scope"]: row for row in rows}


# ---------------------------------------------------------------------------
# suite manifest

@dataclass(frozen=True)
class SuiteManifest:
    curves: tuple[str, ...]
    X: int
    q_max: int
    sign: str
    epsilon: float = 1e-9
    prime_cutoff: int = 10**5
    workers: int = 1

    @staticmethod
    def load(path: str | Path) -> "SuiteManifest":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"manifest not found: {path}")
        fields: dict[str, str] = {}
        for line in path.read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            fields[key.strip()] = val.strip()
        try:
            return SuiteManifest(
                curves=tuple(s.strip() for s in fields["curves"].split(",") if s.strip()),
                X=int(fields["X"]),
                q_max=int(fields.get("q_max", "500")),
                sign=fields["sign"],
                epsilon=float(fields.get("epsilon", "1e-9")),
                prime_cutoff=int(fields.get("P", "100000")),
                workers=int(fields.get("workers", "1")),
            )
        except KeyError as exc:
            raise ConfigError(f"manifest missing field {exc}") from exc


def run_suite(
    manifest: SuiteManifest, out_dir: str | Path, cache_dir: Optional[str | Path] = None
) -> list[RatioReport]:
    """enumerate -> lvalues -> ratios -> CSVs, for every curve in the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache_dir = Path(cache_dir) if cache_dir else out_dir / "cache"
    curves = [curve_model.load_curve(c) for c in manifest.curves]
    policy = cv.VanishingPolicy(epsilon=manifest.epsilon)
    for curve in curves:
        rec_path = out_dir / f"records_{curve.label}_{manifest.sign}.bin"
        if rec_path.exists():
            continue
        sel = FamilySelector(manifest.sign, manifest.X, curve)
        ds = characters.enumerate_family(sel)
        if len(ds):
            n_max, _ = cv.cutoff_terms(curve, int(np.abs(ds).max()), manifest.epsilon)
            cache_management(curve, n_max, cache_dir)
            table = curve_model.an_table(curve, n_max)
        else:
            table = None
        cv.batch(curve, sel, policy, workers=manifest.workers, table=table, out=rec_path)
    return residual_suite(
        curves,
        manifest.sign,
        manifest.X,
        manifest.q_max,
        manifest.prime_cutoff,
        manifest.epsilon,
        out_dir,
        out_dir / f"suite_{manifest.sign}.csv",
        out_dir / f"aggregates_{manifest.sign}.csv",
    )
