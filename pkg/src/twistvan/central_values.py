"""Central values L_E(1, chi_d) in bulk, with truncation control and
vanishing classification.

For d in an even-sign family the central value is the smoothed series

    L_E(1, chi_d) = 2 * sum_{n>=1} (a_n chi_d(n) / n) * exp(-2 pi n / (sqrt(Q)|d|)),

truncated at the first N whose geometric tail bound (|a_n|/n <= 2 from the
divisor bound) drops below the requested epsilon.  Sums run in a fixed
ascending order with Kahan compensation, so batches are bit-identical across
reruns and worker counts.  Zero detection is a runtime-checked contract: the
classified zero cluster must sit a factor gap_min below the smallest kept
nonzero value.
"""

from __future__ import annotations

import math
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from numba import njit

from . import characters
from .characters import FamilySelector, chi_period, kronecker
from .curve_model import CoefficientTable, CurveSpec, an_table
from .errors import (
    CapacityError,
    ClassificationError,
    DomainError,
    NumericsError,
    RecordIOError,
)
from .primes import smallest_prime_factor

RECORD_MAGIC = b"TVLR"
RECORD_FORMAT = "<qddB"
RECORD_SIZE = struct.calcsize(RECORD_FORMAT)
HEADER_FORMAT = "<4sIQd"
HEADER_SIZE = struct.calcsize(HEADER_FORMAT)


@dataclass(frozen=True)
class VanishingPolicy:
    epsilon: float = 1e-9
    gap_min: float = 1e3

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if self.gap_min < 1e3:
            raise DomainError("gap_min below 1e3 gives meaningless zero calls")


@dataclass
class TwistRecord:
    d: int
    value: float
    err: float
    vanished: bool = False
    terms_used: int = 0


@njit(cache=True, nogil=True)
def _smoothed_sum(w, chi, m, x, N):
    """sum_{n=1}^{N} w[n] * chi[n mod m] * exp(-x n).

    The exponential advances by one multiplication per term and is re-anchored
    with an exact exp every 4096 terms to stop drift; accumulation is
    Kahan-compensated in a fixed ascending order.
    """
    r = math.exp(-x)
    s = 0.0
    c = 0.0
    e = 1.0
    idx = 1 % m
    for n in range(1, N + 1):
        if (n & 4095) == 1:
            e = math.exp(-x * n)
        else:
            e = e * r
        ch = chi[idx]
        if ch != 0:
            term = w[n] * e * ch
            y = term - c
            t = s + y
            c = (t - s) - y
            s = t
        idx += 1
        if idx == m:
            idx = 0
    return s


def cutoff_terms(curve: CurveSpec, d: int, epsilon: float) -> tuple[int, float]:
    """Smallest N with tail bound <= epsilon, and the bound itself.

    |2 a_n chi/n| <= 4 exp(-n x) (divisor bound d(n) <= 2 sqrt(n)), so the
    tail past N is below 4 exp(-(N+1)x) / (1 - exp(-x)).
    """
    x = 2.0 * math.pi / (math.sqrt(curve.conductor) * abs(d))
    one_minus = -math.expm1(-x)
    N = max(1, math.ceil(math.log(4.0 / (epsilon * one_minus)) / x - 1.0))
    err = 4.0 * math.exp(-(N + 1) * x) / one_minus
    while err > epsilon:
        N += 1
        err = 4.0 * math.exp(-(N + 1) * x) / one_minus
    return N, err


def lvalue(
    curve: CurveSpec,
    d: int,
    epsilon: float = 1e-9,
    table: Optional[CoefficientTable] = None,
    weights: Optional[np.ndarray] = None,
    spf: Optional[np.ndarray] = None,
) -> tuple[float, float, int]:
    """(value, err, terms) for one twist; the sign chi_d(-Q) w_E must be +1."""
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    if kronecker(d, -curve.conductor) * curve.root_number != 1:
        raise NumericsError(
            f"d={d} has functional-equation sign -1; the central value is "
            "trivially zero and outside this evaluator's contract"
        )
    N, err = cutoff_terms(curve, d, epsilon)
    if weights is None:
        if table is None:
            table = an_table(curve, N)
        if table.limit < N:
            raise CapacityError(
                f"coefficient table covers n <= {table.limit}, need {N}"
            )
        weights = table.values.astype(np.float64)
        weights[1:] /= np.arange(1, table.limit + 1, dtype=np.float64)
    elif len(weights) < N + 1:
        raise CapacityError(f"weight table covers n <= {len(weights)-1}, need {N}")
    if spf is None:
        spf = smallest_prime_factor(abs(d))
    chi = chi_period(d, spf)
    x = 2.0 * math.pi / (math.sqrt(curve.conductor) * abs(d))
    s = _smoothed_sum(weights, chi, abs(d), x, N)
    return 2.0 * s, err, N


def classify(
    drafts: Sequence[TwistRecord], policy: VanishingPolicy
) -> list[TwistRecord]:
    """Set vanished flags by the two-pass spectral-gap rule.

    Values below sqrt(epsilon) form the zero cluster; the smallest remaining
    nonzero must exceed the largest cluster member (or epsilon, if the cluster
    is empty) by at least gap_min.
    """
    for rec in drafts:
        if not rec.err < policy.epsilon:
            raise NumericsError(
                f"record d={rec.d} has err {rec.err} >= epsilon {policy.epsilon}"
            )
    threshold = math.sqrt(policy.epsilon)
    zeros = [r for r in drafts if abs(r.value) < threshold]
    nonzeros = [r for r in drafts if abs(r.value) >= threshold]
    if nonzeros:
        smallest = min(nonzeros, key=lambda r: abs(r.value))
        if zeros:
            largest = max(zeros, key=lambda r: abs(r.value))
            floor = max(abs(largest.value), 5e-324)
            offender = largest.d
        else:
            floor = policy.epsilon
            offender = None
        if abs(smallest.value) / floor < policy.gap_min:
            raise ClassificationError(
                f"zero/nonzero gap {abs(smallest.value) / floor:.3g} < "
                f"{policy.gap_min} between d={offender} and d={smallest.d}; "
                "epsilon is too coarse for this family",
                largest_zero=offender,
                smallest_nonzero=smallest.d,
            )
    out = []
    for rec in drafts:
        out.append(
            TwistRecord(rec.d, rec.value, rec.err, abs(rec.value) < threshold, rec.terms_used)
        )
    return out


def batch(
    curve: CurveSpec,
    sel: FamilySelector,
    policy: VanishingPolicy = VanishingPolicy(),
    workers: int = 1,
    table: Optional[CoefficientTable] = None,
    out: Optional[str | Path] = None,
) -> list[TwistRecord]:
    """One classified record per family member, ascending |d|.

    Deterministic: per-d sums are self-contained, so the output is identical
    for any worker count; persistence is single-writer at the end.
    """
    ds = characters.enumerate_family(sel)
    if len(ds) == 0:
        records: list[TwistRecord] = []
    else:
        n_max, _ = cutoff_terms(curve, int(ds[np.argmax(np.abs(ds))]), policy.epsilon)
        if table is None:
            table = an_table(curve, n_max)
        elif table.limit < n_max:
            raise CapacityError(
                f"coefficient table covers n <= {table.limit}, need {n_max}"
            )
        weights = table.values[: n_max + 1].astype(np.float64)
        weights[1:] /= np.arange(1, n_max + 1, dtype=np.float64)
        spf = smallest_prime_factor(int(np.abs(ds).max()))
        sqrt_q = math.sqrt(curve.conductor)

        def one(d: int) -> TwistRecord:
            N, err = cutoff_terms(curve, d, policy.epsilon)
            chi = chi_period(d, spf)
            x = 2.0 * math.pi / (sqrt_q * abs(d))
            s = _smoothed_sum(weights, chi, abs(d), x, N)
            return TwistRecord(d, 2.0 * s, err, False, N)

        if workers <= 1:
            records = [one(int(d)) for d in ds]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(one, (int(d) for d in ds)))
    records = classify(records, policy)
    if out is not None:
        write_records(out, curve, sel.bound, policy.epsilon, records)
    return records


# ---------------------------------------------------------------------------
# persistence

def _label_hash(label: str) -> int:
    return zlib.crc32(label.encode()) & 0xFFFFFFFF


def write_records(
    path: str | Path, curve: CurveSpec, X: int, epsilon: float, records: Sequence[TwistRecord]
) -> None:
    with open(path, "wb") as fh:
        fh.write(struct.pack(HEADER_FORMAT, RECORD_MAGIC, _label_hash(curve.label), X, epsilon))
        for rec in records:
            fh.write(
                struct.pack(RECORD_FORMAT, rec.d, rec.value, rec.err, 1 if rec.vanished else 0)
            )


def read_records(
    path: str | Path, curve: Optional[CurveSpec] = None
) -> tuple[dict, list[TwistRecord]]:
    path = Path(path)
    if not path.exists():
        raise RecordIOError(f"records file not found: {path}")
    blob = path.read_bytes()
    if len(blob) < HEADER_SIZE:
        raise RecordIOError(f"records file too short: {path}")
    magic, label_hash, X, epsilon = struct.unpack_from(HEADER_FORMAT, blob)
    if magic != RECORD_MAGIC:
        raise RecordIOError(f"bad records magic in {path}")
    if curve is not None and label_hash != _label_hash(curve.label):
        raise RecordIOError(f"records file {path} was written for another curve")
    body = blob[HEADER_SIZE:]
    if len(body) % RECORD_SIZE:
        raise RecordIOError(f"records file {path} is truncated")
    records = []
    for off in range(0, len(body), RECORD_SIZE):
        d, value, err, flags = struct.unpack_from(RECORD_FORMAT, body, off)
        records.append(TwistRecord(d, value, err, bool(flags & 1)))
    header = {"label_hash": label_hash, "X": X, "epsilon": epsilon}
    return header, records


def export_records_csv(records: Sequence[TwistRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("d,value,err,vanished\n")
        for rec in records:
            fh.write(f"{rec.d},{rec.value!r},{rec.err!r},{int(rec.vanished)}\n")
