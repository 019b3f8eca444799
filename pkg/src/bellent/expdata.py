"""Coincidence-count datasets: ingestion, mixing, Bell tests, resampling.

A record holds the 8 outcome counts measured for one triple of projection
directions.  A Bell test needs a full behavior, so records are grouped into
blocks of 8 settings (two directions per party, all combinations); grouping
matches directions with a 1e-6 tolerance since real data carries rounded
vectors.  Nonlocal fractions computed here share the estimator conventions
of the sampling module; with exact synthetic counts the two pipelines see
the same settings and produce the same violation flags.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _rng
from .bell import InequalitySet, batch_behaviors, pauli_tensor
from .errors import MissingDataError, ParameterError, ParseError
from .nlfrac import PvEstimate
from .qstate import DensityMatrix, basis_state

CC_HEADER = ("setting_id,u1x,u1y,u1z,u2x,u2y,u2z,u3x,u3y,u3z,"
             "r1,r2,r3,counts,duration_s")
DIR_TOL = 1e-6
DEFAULT_MARGIN = 0.015


@dataclass
class ProjectorSetting:
    """One projection direction per qubit, defining both outcome projectors."""

    setting_id: int
    directions: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        if d.shape != (3, 3):
            raise ParameterError(f"directions shape {d.shape}, expected (3, 3)")
        if np.max(np.abs(np.linalg.norm(d, axis=1) - 1.0)) > 1e-9:
            raise ParameterError(
                f"setting {self.setting_id}: directions must be unit vectors")
        d.setflags(write=False)
        self.directions = d


@dataclass
class CCRecord:
    """Counts for the 8 outcome combinations of one setting, index r1*4+r2*2+r3."""

    setting: ProjectorSetting
    counts: np.ndarray
    duration_s: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=float)
        if c.shape != (8,):
            raise ParameterError(f"counts shape {c.shape}, expected (8,)")
        if np.min(c) < 0:
            raise ParameterError(f"setting {self.setting.setting_id}: negative count")
        if not self.duration_s > 0:
            raise ParameterError(f"duration must be positive, got {self.duration_s!r}")
        c.setflags(write=False)
        self.counts = c


@dataclass
class CCDataset:
    records: list
    normalization: float = 1.0
    tag: str = ""

    def __post_init__(self):
        if not self.records:
            raise ParameterError("dataset has no records")
        ids = [r.setting.setting_id for r in self.records]
        if len(set(ids)) != len(ids):
            raise ParameterError("duplicate setting_ids in dataset")

    def total_counts(self) -> float:
        return float(sum(r.counts.sum() for r in self.records))


# ----------------------------------------------------------------- file IO

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_cc(dataset: CCDataset, path) -> None:
    """One CSV row per (setting, outcome); sidecar JSON at <path>.json."""
    lines = [CC_HEADER]
    for rec in dataset.records:
        u = rec.setting.directions
        dirs = ",".join(_fmt(x) for x in u.ravel())
        for r in range(8):
            bits = f"{r >> 2 & 1},{r >> 1 & 1},{r & 1}"
            lines.append(f"{rec.setting.setting_id},{dirs},{bits},"
                         f"{_fmt(rec.counts[r])},{_fmt(rec.duration_s)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    sidecar = {"tag": dataset.tag, "normalization": dataset.normalization}
    Path(str(path) + ".json").write_text(
        json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")


def load_cc(path) -> CCDataset:
    path = Path(path)
    if not path.is_file():
        raise MissingDataError(f"no such coincidence-count file: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CC_HEADER:
        raise ParseError(f"{path}: bad or missing header", line=1)
    by_id = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 15:
            raise ParseError(f"{path}: expected 15 fields, got {len(parts)}",
                             line=lineno)
        try:
            sid = int(parts[0])
            vals = [float(x) for x in parts[1:]]
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}", line=lineno) from None
        dirs = np.array(vals[0:9]).reshape(3, 3)
        bits = vals[9:12]
        if any(b not in (0.0, 1.0) for b in bits):
            raise ParseError(f"{path}: outcome bits must be 0 or 1", line=lineno)
        outcome = int(bits[0]) * 4 + int(bits[1]) * 2 + int(bits[2])
        count, duration = vals[12], vals[13]
        if count < 0:
            raise ParseError(f"{path}: negative count", line=lineno)
        if np.max(np.abs(np.linalg.norm(dirs, axis=1) - 1.0)) > DIR_TOL:
            raise ParseError(f"{path}: non-unit projection direction", line=lineno)
        entry = by_id.setdefault(sid, {"dirs": dirs, "duration": duration,
                                       "counts": np.zeros(8), "seen": set(),
                                       "line": lineno})
        if np.max(np.abs(entry["dirs"] - dirs)) > DIR_TOL:
            raise ParseError(f"{path}: directions differ within setting {sid}",
                             line=lineno)
        if outcome in entry["seen"]:
            raise ParseError(f"{path}: duplicate outcome for setting {sid}",
                             line=lineno)
        entry["seen"].add(outcome)
        entry["counts"][outcome] = count
    if not by_id:
        raise ParseError(f"{path}: no data rows")
    meta_path = Path(str(path) + ".json")
    tag, norm = path.stem, 1.0
    if meta_path.is_file():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        tag = str(meta.get("tag", tag))
        norm = float(meta.get("normalization", 1.0))
    records = [
        CCRecord(ProjectorSetting(sid, e["dirs"]), e["counts"], e["duration"])
        for sid, e in sorted(by_id.items())
    ]
    return CCDataset(records, norm, tag)


# ----------------------------------------------------------------- blocks

def _dir_key(u) -> tuple:
    return tuple(int(round(x / DIR_TOL)) for x in u)


def group_blocks(dataset: CCDataset):
    """Partition records into complete 2x2x2 setting blocks.

    Two records are partners when they share the direction of all but one
    party (keys quantized at 1e-6).  Returns (blocks, n_excluded_records);
    a block is a dict mapping (S1, S2, S3) to its CCRecord.
    """
    recs = dataset.records
    keys = [tuple(_dir_key(r.setting.directions[i]) for i in range(3)) for r in recs]
    patterns = {}
    for idx, k in enumerate(keys):
        for i in range(3):
            pat = (i, k[:i] + k[i + 1:])
            patterns.setdefault(pat, []).append(idx)
    visited = [False] * len(recs)
    blocks = []
    excluded = 0
    for start in range(len(recs)):
        if visited[start]:
            continue
        comp = [start]
        visited[start] = True
        queue = [start]
        while queue:
            cur = queue.pop()
            for i in range(3):
                pat = (i, keys[cur][:i] + keys[cur][i + 1:])
                for other in patterns[pat]:
                    if not visited[other]:
                        visited[other] = True
                        comp.append(other)
                        queue.append(other)
        party_keys = [sorted({keys[j][i] for j in comp}) for i in range(3)]
        combos = {tuple(pk.index(keys[j][i]) for i, pk in enumerate(party_keys)): j
                  for j in comp}
        if len(comp) == 8 and all(len(pk) == 2 for pk in party_keys) \
                and len(combos) == 8:
            blocks.append({s: recs[j] for s, j in combos.items()})
        else:
            excluded += len(comp)
    return blocks, excluded


def block_behavior_table(block: dict) -> np.ndarray:
    """Probability table [S1,S2,S3,r1,r2,r3] from one complete block."""
    table = np.empty((2,) * 6)
    for s, rec in block.items():
        total = rec.counts.sum()
        if total <= 0:
            raise ParameterError(
                f"setting {rec.setting.setting_id}: zero total count in block")
        table[s] = (rec.counts / total).reshape(2, 2, 2)
    return table


@dataclass
class CCPvResult:
    """Nonlocal fraction over blocks plus its threshold-margin bracket."""

    estimate: PvEstimate
    interval_low: float
    interval_high: float
    n_blocks: int
    n_excluded_records: int

    def to_json(self) -> str:
        obj = {"p_v": self.estimate.p_v, "std_err": self.estimate.std_err,
               "m": self.estimate.m, "violations": self.estimate.violations,
               "set_tag": self.estimate.set_tag,
               "interval_low": self.interval_low,
               "interval_high": self.interval_high,
               "n_excluded_records": self.n_excluded_records}
        return json.dumps(obj, indent=2) + "\n"


def pv_cc(dataset: CCDataset, iset: InequalitySet,
          margin: float = DEFAULT_MARGIN) -> CCPvResult:
    """Fraction of complete blocks whose behavior violates the set.

    The companion interval counts violations against thresholds 1 +- margin,
    bracketing the effect of finite Bell-value precision.  Incomplete blocks
    are excluded; their record count is reported.
    """
    if iset.n_parties != 3:
        raise ParameterError("coincidence-count analysis is three-party only")
    if margin < 0:
        raise ParameterError(f"margin must be >= 0, got {margin!r}")
    blocks, excluded = group_blocks(dataset)
    if not blocks:
        raise ParameterError("no complete setting blocks in dataset")
    flat = np.stack([block_behavior_table(b).ravel() for b in blocks])
    i_max = (flat @ iset.w_matrix.T).max(axis=1)
    n = len(blocks)
    violations = int(np.count_nonzero(i_max > 1.0))
    p = violations / n
    est = PvEstimate(p, math.sqrt(p * (1.0 - p) / n), n, violations, iset.tag)
    low = int(np.count_nonzero(i_max > 1.0 + margin)) / n
    high = int(np.count_nonzero(i_max > 1.0 - margin)) / n
    return CCPvResult(est, low, high, n, excluded)


# ----------------------------------------------------------------- mixing

def normalize_cc(dataset: CCDataset) -> CCDataset:
    """Divide all counts by the dataset total (the overall generation rate)."""
    total = dataset.total_counts()
    if total <= 0:
        raise ParameterError("cannot normalize a zero-count dataset")
    records = [CCRecord(r.setting, r.counts / total, r.duration_s)
               for r in dataset.records]
    return CCDataset(records, total, dataset.tag)


def _aligned(a: CCDataset, b: CCDataset) -> bool:
    if len(a.records) != len(b.records):
        return False
    for ra, rb in zip(a.records, b.records):
        if ra.setting.setting_id != rb.setting.setting_id:
            return False
        if np.max(np.abs(ra.setting.directions - rb.setting.directions)) > DIR_TOL:
            return False
    return True


def mix_counts(state_cc: CCDataset, basis_cc, v_c: float) -> CCDataset:
    """Probabilistic white-noise admixture at the counts level.

    mixed = v_c * state + (1 - v_c)/8 * sum(basis); the 8 basis datasets are
    the computational-basis states measured under the same settings, and all
    inputs are expected pre-normalized by their generation rate.
    """
    if not 0.0 <= v_c <= 1.0:
        raise ParameterError(f"v_c must be in [0, 1], got {v_c!r}")
    basis_cc = list(basis_cc)
    if len(basis_cc) != 8:
        raise ParameterError(f"need 8 basis datasets, got {len(basis_cc)}")
    for k, ds in enumerate(basis_cc):
        if not _aligned(state_cc, ds):
            raise ParameterError(f"basis dataset {k} settings misaligned with state")
    records = []
    for i, rec in enumerate(state_cc.records):
        counts = v_c * rec.counts + sum(
            (1.0 - v_c) / 8.0 * ds.records[i].counts for ds in basis_cc)
        records.append(CCRecord(rec.setting, counts, rec.duration_s))
    return CCDataset(records, 1.0, f"{state_cc.tag}:vc={v_c:g}")


# ----------------------------------------------------------- resampling

STATISTICS = ("pv_cc", "total_counts")


def poisson_resample(dataset: CCDataset, statistic, trials: int, seed: int,
                     iset: InequalitySet = None,
                     margin: float = DEFAULT_MARGIN):
    """Mean and std of a statistic under Poissonian count noise.

    Each trial redraws every count as Poisson(count) and recomputes the
    statistic; `statistic` is "pv_cc", "total_counts", or a callable taking
    a CCDataset.  Counts must be raw integers (resampling after mixing
    normalized data is not meaningful).
    """
    if trials < 2:
        raise ParameterError(f"need at least 2 trials, got {trials}")
    if callable(statistic):
        fn = statistic
    elif statistic == "pv_cc":
        if iset is None:
            raise ParameterError("statistic 'pv_cc' needs an inequality set")
        fn = lambda ds: pv_cc(ds, iset, margin).estimate.p_v
    elif statistic == "total_counts":
        fn = lambda ds: ds.total_counts()
    else:
        raise ParameterError(f"unknown statistic {statistic!r}; "
                             f"expected one of {STATISTICS} or a callable")
    for rec in dataset.records:
        if np.max(np.abs(rec.counts - np.round(rec.counts))) > 1e-9:
            raise ParameterError(
                "Poisson resampling needs raw integer counts "
                f"(setting {rec.setting.setting_id} has fractional values)")
    values = np.empty(trials)
    for t in range(trials):
        gen = _rng.generator(seed, "poisson", t)
        records = [CCRecord(r.setting, gen.poisson(r.counts).astype(float),
                            r.duration_s) for r in dataset.records]
        values[t] = fn(CCDataset(records, dataset.normalization, dataset.tag))
    return float(values.mean()), float(values.std(ddof=1))


# ----------------------------------------------------------- synthesis

def synth_cc_dataset(rho: DensityMatrix, n_blocks: int, seed: int,
                     scale: float = 1.0, tag: str = "synthetic") -> CCDataset:
    """Noiseless dataset: counts = scale * P(r|S) at Haar-sampled settings.

    Uses the same per-sample direction substream as the Monte Carlo
    estimator, so block b sees the directions of sample b for this seed.
    """
    if rho.n_qubits != 3:
        raise ParameterError("synthetic coincidence data is three-qubit only")
    if n_blocks < 1:
        raise ParameterError(f"need at least 1 block, got {n_blocks}")
    lam = pauli_tensor(rho)
    records = []
    chunk = 1 << 11
    for start in range(0, n_blocks, chunk):
        count = min(chunk, n_blocks - start)
        dirs = _rng.bloch_directions(seed, "bloch3", start, count, 3)
        tables = batch_behaviors(lam, dirs)
        for b in range(count):
            block = start + b
            for s in np.ndindex(2, 2, 2):
                sid = 8 * block + s[0] * 4 + s[1] * 2 + s[2]
                u = np.stack([dirs[b, i, s[i]] for i in range(3)])
                counts = scale * tables[(b,) + s].ravel()
                records.append(CCRecord(ProjectorSetting(sid, u), counts, 1.0))
    return CCDataset(records, 1.0, tag)


def synth_basis_datasets(n_blocks: int, seed: int, scale: float = 1.0) -> list:
    """The 8 computational-basis datasets under the same settings."""
    out = []
    for k in range(8):
        bits = f"{k:03b}"
        rho = basis_state(bits).projector()
        out.append(synth_cc_dataset(rho, n_blocks, seed, scale, tag=f"basis{bits}"))
    return out


def add_poisson_noise(dataset: CCDataset, seed: int) -> CCDataset:
    """One Poisson draw over all counts (counts' ~ Poisson(counts))."""
    gen = _rng.generator(seed, "poisson-noise", 0)
    records = [CCRecord(r.setting, gen.poisson(r.counts).astype(float), r.duration_s)
               for r in dataset.records]
    return CCDataset(records, dataset.normalization, dataset.tag + ":poisson")
