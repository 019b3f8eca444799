"""Nonlocal fraction p_V: Monte Carlo estimators and the analytic 2-qubit curve.

p_V is the probability that Haar-random local projective measurements on a
state produce a behavior violating at least one inequality of a given set.
Sampling uses counter-addressed RNG substreams keyed by (seed, sample index),
so results are bit-identical for any worker count and the same settings are
replayed for different states under a shared seed.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _rng
from .bell import InequalitySet, batch_i_max, pauli_tensor
from .errors import ParameterError
from .qstate import DensityMatrix

CHUNK = 1 << 14


@dataclass
class PvEstimate:
    """Estimated nonlocal fraction with its binomial standard error."""

    p_v: float
    std_err: float
    m: int
    violations: int
    set_tag: str

    def to_json(self) -> str:
        obj = {"p_v": self.p_v, "std_err": self.std_err, "m": self.m,
               "violations": self.violations, "set_tag": self.set_tag}
        return json.dumps(obj, indent=2) + "\n"


@dataclass
class ViolationSamples:
    """Per-sample maximal violation strengths I_max for one state and seed."""

    values: np.ndarray
    state_tag: str
    settings_seed: int
    set_tag: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ParameterError("violation samples must be finite")
        v.setflags(write=False)
        self.values = v

    @property
    def m(self) -> int:
        return self.values.size


def _chunk_ranges(m: int):
    for start in range(0, m, CHUNK):
        yield start, min(CHUNK, m - start)


def _run_chunks(n_parties: int, seed: int, m: int, workers: int, work):
    """Apply work(start, dirs) over disjoint sample ranges, 1 or more threads."""
    tag = f"bloch{n_parties}"

    def one(span):
        start, count = span
        dirs = _rng.bloch_directions(seed, tag, start, count, n_parties)
        return work(start, dirs)

    spans = list(_chunk_ranges(m))
    if workers <= 1:
        return [one(s) for s in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, spans))


def estimate_pv(rho: DensityMatrix, iset: InequalitySet, m: int, seed: int,
                workers: int = 1) -> PvEstimate:
    """Fraction of m Haar-sampled settings whose behavior violates the set.

    Deterministic for fixed (seed, m) regardless of workers: every sample's
    directions come from its own counter range and the reduction is a sum of
    integer counts.
    """
    if m < 1:
        raise ParameterError(f"sample count must be >= 1, got {m}")
    if iset.n_parties != rho.n_qubits:
        raise ParameterError("inequality set and state disagree on party count")
    lam = pauli_tensor(rho)
    w = iset.w_matrix

    def work(start, dirs):
        return int(np.count_nonzero(batch_i_max(lam, dirs, w) > 1.0))

    violations = sum(_run_chunks(rho.n_qubits, seed, m, workers, work))
    p = violations / m
    return PvEstimate(p, math.sqrt(p * (1.0 - p) / m), m, violations, iset.tag)


def violation_distribution(rho: DensityMatrix, iset: InequalitySet, m: int, seed: int,
                           workers: int = 1, state_tag: str = "rho") -> ViolationSamples:
    """All m values of I_max; the fraction above 1 recovers estimate_pv."""
    if m < 1:
        raise ParameterError(f"sample count must be >= 1, got {m}")
    if iset.n_parties != rho.n_qubits:
        raise ParameterError("inequality set and state disagree on party count")
    lam = pauli_tensor(rho)
    w = iset.w_matrix
    values = np.empty(m)

    def work(start, dirs):
        values[start:start + dirs.shape[0]] = batch_i_max(lam, dirs, w)
        return None

    _run_chunks(rho.n_qubits, seed, m, workers, work)
    return ViolationSamples(values, state_tag, seed, iset.tag)


def pv_from_distribution(samples: ViolationSamples, v: float) -> float:
    """Nonlocal fraction of the white-noise mixture at visibility v.

    Valid when the sampled reference state is mixed with white noise and the
    inequality set has full-correlation form, so I scales linearly with v and
    thresholding at 1/v replays the whole family from one sample set.
    """
    if not 0.0 < v <= 1.0:
        raise ParameterError(f"visibility must be in (0, 1], got {v!r}")
    return int(np.count_nonzero(samples.values > 1.0 / v)) / samples.m


def pv_threshold_sensitivity(samples: ViolationSamples, v: float,
                             epsilon: float) -> tuple:
    """Fractions above thresholds 1/v +- epsilon; brackets pv_from_distribution."""
    if epsilon < 0:
        raise ParameterError(f"epsilon must be >= 0, got {epsilon!r}")
    thr = 1.0 / v
    low = int(np.count_nonzero(samples.values > thr + epsilon)) / samples.m
    high = int(np.count_nonzero(samples.values > thr - epsilon)) / samples.m
    return low, high


# ---------------------------------------------------------------- analytic

def _check_v(v: float) -> None:
    if not 0.0 < v <= 1.0:
        raise ParameterError(f"visibility must be in (0, 1], got {v!r}")


def pv_werner2_closed(v: float) -> float:
    """Analytic nonlocal fraction of the 2-qubit Werner state under CHSH.

    2[(1 + v^2) arctan(s / (1 - v^2)) - 3 s] / v^2 with s = sqrt(2 v^2 - 1),
    arctan branch in [0, pi/2] so the v = 1 limit is pi/2 and the value there
    is 2(pi - 3).  Zero at and below v = 1/sqrt(2).
    """
    _check_v(v)
    if 2.0 * v * v - 1.0 <= 0.0:
        return 0.0
    s = math.sqrt(2.0 * v * v - 1.0)
    ang = math.atan2(s, 1.0 - v * v)
    return 2.0 * ((1.0 + v * v) * ang - 3.0 * s) / (v * v)


def pv_werner2_closed_as_printed(v: float) -> float:
    """Documentation-only variant with the (1 - v^2) arctan prefactor.

    Yields -6 at v = 1, contradicting the known 2(pi - 3); kept so the
    discrepancy with `pv_werner2_closed` can be demonstrated, not for use.
    """
    _check_v(v)
    if 2.0 * v * v - 1.0 <= 0.0:
        return 0.0
    s = math.sqrt(2.0 * v * v - 1.0)
    ang = math.atan2(s, 1.0 - v * v)
    return 2.0 * ((1.0 - v * v) * ang - 3.0 * s) / (v * v)


def _adaptive_simpson(f, a, b, tol, fa, fm, fb, whole, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return (_adaptive_simpson(f, a, m, tol / 2.0, fa, flm, fm, left, depth - 1)
            + _adaptive_simpson(f, m, b, tol / 2.0, fm, frm, fb, right, depth - 1))


def adaptive_simpson(f, a, b, tol=1e-10, max_depth=48) -> float:
    """Recursive Simpson quadrature with Richardson acceptance at 15 tol."""
    if a == b:
        return 0.0
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _adaptive_simpson(f, a, b, tol, fa, fm, fb, whole, max_depth)


def pv_werner2_quadrature(v: float) -> float:
    """Direct integration of the violating cube fraction (times 4).

    The x integrand has a 1/sqrt(1 - x^2) endpoint singularity at v = 1;
    substituting x = sin t removes it, leaving a smooth integrand on
    [0, arcsin(s / v^2)] integrated to absolute tolerance 1e-10.
    """
    _check_v(v)
    s2 = 2.0 * v * v - 1.0
    if s2 <= 0.0:
        return 0.0
    t_max = math.asin(min(1.0, math.sqrt(s2) / (v * v)))

    def g(t):
        x = math.sin(t)
        d = math.sqrt(2.0) - v * (math.sqrt(1.0 - x) + math.sqrt(1.0 + x))
        return d * d

    # even integrand in x: 4 * 2 * integral / (V_cube = 8) = integral
    return adaptive_simpson(g, 0.0, t_max, tol=1e-10) / (v * v)


def sample_chsh_reduced(v: float, m: int, seed: int) -> PvEstimate:
    """Monte Carlo on the reduced (alpha, beta, x) cube.

    Samples the two dot products and x uniformly from [-1, 1], counts points
    inside the violating wedges, and multiplies by 4 for the setting/outcome
    relabelings (at most one CHSH variant can be violated at a time).  The
    standard error accounts for that factor.
    """
    _check_v(v)
    if m < 1:
        raise ParameterError(f"sample count must be >= 1, got {m}")
    if 2.0 * v * v - 1.0 <= 0.0:
        # no admissible x: the wedges are empty for every sample
        return PvEstimate(0.0, 0.0, m, 0, "chsh-reduced-cube")
    hits = 0
    for start, count in _chunk_ranges(m):
        u = _rng.uniforms(seed, "chshcube", start, count, 3)
        pts = 2.0 * u - 1.0
        alpha, beta, x = pts[:, 0], pts[:, 1], pts[:, 2]
        lo = np.sqrt(2.0) - alpha * v * np.sqrt(1.0 + x)
        hi = -(np.sqrt(2.0) + alpha * v * np.sqrt(1.0 + x))
        den = v * np.sqrt(1.0 - x)
        hits += int(np.count_nonzero((beta * den > lo) | (beta * den < hi)))
    q = hits / m
    p = 4.0 * q
    return PvEstimate(p, 4.0 * math.sqrt(q * (1.0 - q) / m), m, 4 * hits,
                      "chsh-reduced-cube")


# ---------------------------------------------------------------- file IO

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_violation_samples(samples: ViolationSamples, path) -> None:
    """CSV with header `i_max` plus a JSON sidecar at <path>.json."""
    path = Path(path)
    lines = ["i_max"]
    lines.extend(_fmt(x) for x in samples.values)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    sidecar = {"state_tag": samples.state_tag, "seed": samples.settings_seed,
               "m": samples.m, "set_tag": samples.set_tag}
    Path(str(path) + ".json").write_text(
        json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")


def load_violation_samples(path) -> ViolationSamples:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "i_max":
        raise ParameterError(f"{path}: expected header 'i_max'")
    values = np.array([float(x) for x in lines[1:] if x.strip()])
    meta = json.loads(Path(str(path) + ".json").read_text(encoding="utf-8"))
    return ViolationSamples(values, str(meta["state_tag"]), int(meta["seed"]),
                            str(meta["set_tag"]))
