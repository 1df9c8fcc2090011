"""Round metrics (detection, monitoring, fragmentation) and aggregation.

Detection asks for one fixed footprint cell observed over a contiguous
window of at least one second (any camera may supply each instant); the
alternate cumulative-time and any-cell readings sit behind switches.
Monitoring asks for at least one observed cell at every instant of the
event's lifetime, camera handoffs allowed.  Fragmentation counts the
maximal per-camera observation runs that a stream combiner would have to
splice together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Two-sided 95% normal quantile, used by the Wilson score interval.
Z95 = 1.959963984540054

DETECTION_SECONDS = 1.0

WINDOW_CONTIGUOUS = "contiguous"
WINDOW_CUMULATIVE = "cumulative"
CELLS_FIXED = "fixed"
CELLS_ANY = "any"


@dataclass
class CoverageLog:
    """(camera id, cell index) observations over one event's lifetime.

    Conceptually one set of pairs per active sample; stored as flat parallel
    arrays (sample_idx, cameras, cells) for vectorized metric evaluation.
    Sample indices count from the first active sample; cell indices are fixed
    spiral slots below n_cells.
    """

    step: float
    n_cells: int
    n_samples: int
    sample_idx: np.ndarray
    cameras: np.ndarray
    cells: np.ndarray

    @classmethod
    def from_entries(cls, step: float, n_cells: int,
                     entries: list[list[tuple[int, int]]]) -> "CoverageLog":
        """Build from one list of (camera, cell) pairs per active sample."""
        sample_idx = []
        cameras = []
        cells = []
        for i, pairs in enumerate(entries):
            for cam, cell in pairs:
                sample_idx.append(i)
                cameras.append(cam)
                cells.append(cell)
        return cls(step, n_cells, len(entries),
                   np.array(sample_idx, dtype=np.int64),
                   np.array(cameras, dtype=np.int64),
                   np.array(cells, dtype=np.int64))

    def entries(self) -> list[list[tuple[int, int]]]:
        """Materialize the per-sample pair lists."""
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.n_samples)]
        for i, cam, cell in zip(self.sample_idx.tolist(), self.cameras.tolist(),
                                self.cells.tolist()):
            out[i].append((cam, cell))
        return out

    def validate(self) -> None:
        if len(self.sample_idx) != len(self.cameras) or len(self.cameras) != len(self.cells):
            raise ValueError("coverage log arrays are misaligned")
        if len(self.sample_idx) and (
            self.sample_idx.min() < 0 or self.sample_idx.max() >= self.n_samples
        ):
            raise ValueError("sample index outside the active interval")
        if len(self.cells) and (self.cells.min() < 0 or self.cells.max() >= self.n_cells):
            raise ValueError("cell index out of range")

    def cell_matrix(self) -> np.ndarray:
        """Boolean (samples, cells) matrix: cell observed by any camera."""
        mat = np.zeros((self.n_samples, self.n_cells), dtype=bool)
        mat[self.sample_idx, self.cells] = True
        return mat

    def covered_samples(self) -> int:
        """Number of active samples with at least one observation."""
        return len(np.unique(self.sample_idx))


def detection_threshold_steps(step: float) -> int:
    """Samples needed to span DETECTION_SECONDS at the given step size."""
    return math.ceil(DETECTION_SECONDS / step - 1e-9)


def _longest_run(col: np.ndarray) -> int:
    if not col.any():
        return 0
    padded = np.concatenate([[0], col.view(np.int8), [0]])
    edges = np.flatnonzero(np.diff(padded))
    return int((edges[1::2] - edges[0::2]).max())


def detect(log: CoverageLog, window: str = WINDOW_CONTIGUOUS,
           cells: str = CELLS_FIXED) -> bool:
    """True when enough of the event area was watched long enough.

    Default reading: some single cell covered for a contiguous run of at
    least one second.  window="cumulative" counts non-contiguous samples;
    cells="any" pools all cells into one coverage series.
    """
    if window not in (WINDOW_CONTIGUOUS, WINDOW_CUMULATIVE):
        raise ValueError(f"unknown detection window rule: {window}")
    if cells not in (CELLS_FIXED, CELLS_ANY):
        raise ValueError(f"unknown detection cell rule: {cells}")
    threshold = detection_threshold_steps(log.step)
    mat = log.cell_matrix()
    if cells == CELLS_ANY:
        mat = mat.any(axis=1)[:, None]
    if window == WINDOW_CUMULATIVE:
        return bool((mat.sum(axis=0) >= threshold).any())
    return any(_longest_run(mat[:, c]) >= threshold for c in range(mat.shape[1]))


def monitor(log: CoverageLog) -> bool:
    """True when every active sample has at least one observation."""
    return log.n_samples > 0 and log.covered_samples() == log.n_samples


def fragment_count(log: CoverageLog) -> int:
    """Number of per-camera maximal observation runs, summed over cameras.

    A camera opens a new fragment whenever it observes any cell after a
    sample in which it observed none.
    """
    if len(log.sample_idx) == 0:
        return 0
    # Dedupe to (camera, sample) pairs, ordered by camera then sample.
    key = np.unique(log.cameras * np.int64(log.n_samples) + log.sample_idx)
    cam = key // log.n_samples
    sample = key % log.n_samples
    breaks = (cam[1:] != cam[:-1]) | (sample[1:] != sample[:-1] + 1)
    return int(breaks.sum()) + 1


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score 95% interval for a binomial proportion; valid near 0 and 1."""
    if trials <= 0:
        raise ValueError("wilson_interval needs at least one trial")
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2 * trials)) / denom
    margin = (z / denom) * math.sqrt(p_hat * (1 - p_hat) / trials + z * z / (4 * trials * trials))
    return max(0.0, center - margin), min(1.0, center + margin)


@dataclass
class CellSummary:
    """Aggregated outcome of one experiment cell (one system/category/x point)."""

    rounds: int
    detected: int
    monitored: int
    fragment_hist: dict[int, int]  # over detected rounds only

    @property
    def p_detect(self) -> float:
        return self.detected / self.rounds

    @property
    def p_monitor(self) -> float:
        return self.monitored / self.rounds

    @property
    def detect_ci(self) -> tuple[float, float]:
        return wilson_interval(self.detected, self.rounds)

    @property
    def monitor_ci(self) -> tuple[float, float]:
        return wilson_interval(self.monitored, self.rounds)

    def fragment_distribution(self) -> list[tuple[int, float, float]]:
        """(fragments, pdf, cdf) rows over detected rounds; cdf ends at 1.0 exactly."""
        total = sum(self.fragment_hist.values())
        rows = []
        cumulative = 0
        for k in sorted(self.fragment_hist):
            cumulative += self.fragment_hist[k]
            rows.append((k, self.fragment_hist[k] / total, cumulative / total))
        return rows

    def fragment_cdf_at(self, k: int) -> float:
        """P(fragment_count <= k | detected)."""
        total = sum(self.fragment_hist.values())
        if total == 0:
            return 0.0
        return sum(v for kk, v in self.fragment_hist.items() if kk <= k) / total


def aggregate(results) -> CellSummary:
    """Reduce per-round outcomes to probabilities with Wilson intervals.

    Accepts any objects exposing detected, monitored and fragment_count;
    commutative over input order.
    """
    results = list(results)
    if not results:
        raise ValueError("aggregate needs at least one round result")
    detected = sum(1 for r in results if r.detected)
    monitored = sum(1 for r in results if r.monitored)
    hist: dict[int, int] = {}
    for r in results:
        if r.detected:
            hist[r.fragment_count] = hist.get(r.fragment_count, 0) + 1
    return CellSummary(len(results), detected, monitored, hist)


@dataclass
class MetricsReport:
    """Sweep-wide results keyed by (system, category, penetration-or-density)."""

    rows: dict[tuple[str, str, float], CellSummary] = field(default_factory=dict)

    def add(self, system: str, category: str, x: float, summary: CellSummary) -> None:
        self.rows[(system, category, float(x))] = summary

    def get(self, system: str, category: str, x: float) -> CellSummary:
        return self.rows[(system, category, float(x))]

    def sorted_items(self):
        return sorted(self.rows.items())
