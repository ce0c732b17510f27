"""
Tone injection by candidate ranking.

Each iteration finds the local peaks of the current time signal, scores
every unit Gaussian-integer perturbation (one subcarrier, one of +1, -1,
+j, -j) by the negated weighted cosine similarity summed over the
strongest peaks, and applies the best positively scored candidate. FCR
restricts candidates to the subcarriers dominating the clipping-noise
spectrum of the initial signal. No search steps into a b-state it has
already reached. With depth-first search the scheme keeps exploring the
candidate tree after a leaf; the output is the lowest-peak state reached,
b = 0 included.
"""
import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from waveform.peaks import PeakSet, find_local_peaks, peak_power, top_peaks
from waveform.transform import (
    CandidateId,
    Rotation,
    TransformPlan,
    candidate_phases,
    candidate_time_column,
    daft,
    idaft,
)

logger = logging.getLogger(__name__)


class Scheme(str, enum.Enum):
    CR = "CR"
    FCR = "FCR"


@dataclass(frozen=True)
class TiConfig:
    beta: float = 4.0
    max_iters: int = 20
    n_peaks: int = 16
    n_filtered: int = 32
    clip_threshold_db: float = 5.0
    scheme: Scheme = Scheme.CR
    dfs_enabled: bool = True

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        TiConfig.validate_config(
            {
                "beta": self.beta,
                "max_iters": self.max_iters,
                "n_peaks": self.n_peaks,
                "n_filtered": self.n_filtered,
            },
            ValueError,
        )

    @staticmethod
    def validate_config(attrs, error_to_raise, n_subcarriers=None):
        if attrs.get("beta", 1.0) <= 0:
            raise error_to_raise({"beta": "beta must be positive"})
        for name in ("max_iters", "n_peaks", "n_filtered"):
            count = attrs.get(name, 1)
            if int(count) != count or count < 1:
                raise error_to_raise(
                    {name: f"{name} must be a positive integer"}
                )
        if n_subcarriers is not None and attrs.get(
            "n_filtered", 1
        ) > n_subcarriers:
            raise error_to_raise(
                {
                    "n_filtered": f"n_filtered must be in available range: "
                    f"(1, n_subcarriers): (1, {n_subcarriers})"
                }
            )

    def clip_amplitude(self, avg_energy: float = 1.0) -> float:
        """eta = sqrt(10^(dB/10) E_s)"""
        return math.sqrt(10.0 ** (self.clip_threshold_db / 10.0) * avg_energy)


def scaling_rule(n_subcarriers: int, oversampling: int):
    """
    (n_peaks, n_filtered) with N_p = round(2 log2 N) and
    N_c = round(N L / (8 log2 N)), so that 4 N_c N_p ~ N L.
    """
    log_n = math.log2(n_subcarriers)
    n_peaks = max(1, round(2 * log_n))
    n_filtered = max(
        1,
        min(n_subcarriers, round(n_subcarriers * oversampling / (8 * log_n))),
    )
    return n_peaks, n_filtered


@dataclass(frozen=True)
class CandidateFilter:
    subcarriers: np.ndarray

    def __post_init__(self):
        subcarriers = np.asarray(self.subcarriers, dtype=np.int64)
        if len(np.unique(subcarriers)) != len(subcarriers):
            raise ValueError("filter subcarriers must be distinct")
        object.__setattr__(self, "subcarriers", subcarriers)

    @classmethod
    def full(cls, n_subcarriers: int) -> "CandidateFilter":
        return cls(np.arange(n_subcarriers))

    def __len__(self):
        return len(self.subcarriers)


@dataclass
class SearchCounters:
    nwcs_evaluations: int = 0
    iterations: int = 0
    leaves: int = 0
    nwcs_per_ranking: list = field(default_factory=list)

    def record_ranking(self, n_candidates: int, n_peaks: int):
        evaluations = 4 * n_candidates * n_peaks
        self.nwcs_evaluations += evaluations
        self.nwcs_per_ranking.append(evaluations)


@dataclass(frozen=True)
class CandidateScores:
    """Scores R of 4 N_c candidates: row i is filter subcarrier i, column
    j is Rotation(j)."""

    subcarriers: np.ndarray
    matrix: np.ndarray

    def score(self, cand: CandidateId) -> float:
        (row,) = np.flatnonzero(self.subcarriers == cand.subcarrier)
        return float(self.matrix[row, int(cand.rotation)])

    def ranked_valid(self) -> list:
        """Candidates with R > 0, by descending score then CandidateId."""
        rows, columns = np.nonzero(self.matrix > 0)
        if rows.size == 0:
            return []
        subcarriers = self.subcarriers[rows]
        order = np.lexsort((columns, subcarriers, -self.matrix[rows, columns]))
        return [
            CandidateId(int(subcarriers[i]), Rotation(int(columns[i])))
            for i in order
        ]


@dataclass
class TiResult:
    b: np.ndarray
    peak_power: float
    initial_peak_power: float
    iterations_used: int
    leaves_visited: int
    counters: SearchCounters

    @property
    def nwcs_evaluations(self) -> int:
        return self.counters.nwcs_evaluations


def nwcs(
    peak_magnitude: float, peak_angle: float, candidate_angle: float, beta
) -> float:
    """Negated weighted cosine similarity -|x|^beta cos(theta - phi)."""
    if peak_magnitude < 0:
        raise ValueError("peak magnitude must be non-negative")
    return -(peak_magnitude**beta) * math.cos(peak_angle - candidate_angle)


def score_candidates(
    peaks: PeakSet,
    candidate_filter: CandidateFilter,
    plan: TransformPlan,
    beta: float,
    counters: SearchCounters = None,
) -> CandidateScores:
    """
    R_k = sum over the given peaks of nwcs for every candidate of the
    filter. The +1 score is -Re(z), with
    z = sum_p |x_p|^beta exp(j(theta_p - psi_pk)); the other rotations
    shift psi by pi and +-pi/2.
    """
    if len(peaks) == 0:
        raise ValueError("cannot score candidates without peaks")
    weights = peaks.magnitudes**beta * np.exp(1j * peaks.angles)
    phasors = candidate_phases(
        plan, peaks.indices, candidate_filter.subcarriers
    )
    similarity = weights @ np.conj(phasors)
    matrix = np.stack(
        (
            -similarity.real,
            similarity.real,
            -similarity.imag,
            similarity.imag,
        ),
        axis=1,
    )
    if counters is not None:
        counters.record_ranking(len(candidate_filter), len(peaks))
    return CandidateScores(candidate_filter.subcarriers, matrix)


def select_best(scores: CandidateScores):
    ranked = scores.ranked_valid()
    return ranked[0] if ranked else None


def state_key(b_state) -> bytes:
    # adding 0.0 folds -0.0 into 0.0
    return (np.asarray(b_state, dtype=np.complex128) + 0.0).tobytes()


def clipping_noise_filter(
    initial_samples, eta: float, n_filtered: int, plan: TransformPlan
) -> CandidateFilter:
    """
    Subcarriers sorted by descending in-band clipping-noise magnitude
    |A f|, f keeping only samples with |x| >= eta, truncated to N_c.
    """
    if eta < 0:
        raise ValueError(f"eta must be non-negative, got {eta}")
    initial_samples = np.asarray(initial_samples, dtype=np.complex128)
    clipped = np.where(
        np.abs(initial_samples) >= eta, initial_samples, 0.0
    )
    subcarriers = np.arange(plan.n_subcarriers)
    if not np.any(clipped):
        logger.debug("No sample above eta=%g, natural subcarrier order", eta)
        return CandidateFilter(subcarriers[:n_filtered])
    spectrum = np.abs(daft(plan, clipped))
    order = np.lexsort((subcarriers, -spectrum))
    return CandidateFilter(order[:n_filtered])


class CandidateRankingSolver:
    """
    One CR/FCR solve, greedy or depth-first, for a fixed plan.

    Both searches keep the set of b-states already reached and never step
    into one again. Every reached state competes for the output, together
    with b = 0.
    """

    def __init__(
        self,
        plan: TransformPlan,
        config: TiConfig,
        delta: float,
        avg_energy: float = 1.0,
    ):
        if delta <= 0:
            raise ValueError(f"delta must be positive, got {delta}")
        if config.scheme is Scheme.FCR:
            TiConfig.validate_config(
                {"n_filtered": config.n_filtered},
                ValueError,
                n_subcarriers=plan.n_subcarriers,
            )
        self.plan = plan
        self.config = config
        self.delta = delta
        self.avg_energy = avg_energy

    def _candidate_filter(self, initial_samples) -> CandidateFilter:
        if self.config.scheme is Scheme.FCR:
            return clipping_noise_filter(
                initial_samples,
                self.config.clip_amplitude(self.avg_energy),
                self.config.n_filtered,
                self.plan,
            )
        return CandidateFilter.full(self.plan.n_subcarriers)

    def _rank(self, samples, candidate_filter, counters) -> list:
        peaks = top_peaks(find_local_peaks(samples), self.config.n_peaks)
        scores = score_candidates(
            peaks,
            candidate_filter,
            self.plan,
            self.config.beta,
            counters,
        )
        return scores.ranked_valid()

    def _children(self, node, candidate_filter, counters, visited) -> list:
        """Valid candidates of ``node`` leading to unvisited states."""
        ranked = self._rank(node.samples, candidate_filter, counters)
        moved = node.b_state.copy()
        children = []
        for cand in ranked:
            moved[cand.subcarrier] += cand.rotation.unit
            if state_key(moved) not in visited:
                children.append(cand)
            moved[cand.subcarrier] -= cand.rotation.unit
        return children

    def _descend(self, node, cand: CandidateId, visited):
        """Child node of ``node`` along ``cand``, None if already visited."""
        b_next = node.b_state.copy()
        b_next[cand.subcarrier] += cand.rotation.unit
        key = state_key(b_next)
        if key in visited:
            return None
        visited.add(key)
        samples_next = node.samples + candidate_time_column(
            self.plan, cand, self.delta
        )
        return SearchNode(b_state=b_next, samples=samples_next)

    def _root(self, initial_samples, visited):
        root = SearchNode(
            b_state=np.zeros(self.plan.n_subcarriers, dtype=np.complex128),
            samples=initial_samples,
        )
        visited.add(state_key(root.b_state))
        return root

    def solve(self, symbols) -> TiResult:
        symbols = np.asarray(symbols, dtype=np.complex128)
        initial_samples = idaft(self.plan, symbols)
        candidate_filter = self._candidate_filter(initial_samples)
        if self.config.dfs_enabled:
            return self._depth_first(initial_samples, candidate_filter)
        return self._greedy(initial_samples, candidate_filter)

    def _greedy(self, initial_samples, candidate_filter) -> TiResult:
        counters = SearchCounters()
        visited = set()
        node = self._root(initial_samples, visited)
        outputs = []
        for _ in range(self.config.max_iters):
            children = self._children(
                node, candidate_filter, counters, visited
            )
            if not children:
                logger.debug(
                    "No valid candidate after %d iterations",
                    counters.iterations,
                )
                counters.leaves = 1
                break
            node = self._descend(node, children[0], visited)
            counters.iterations += 1
            outputs.append((peak_power(node.samples), node.b_state))
        return self._best_of(outputs, initial_samples, counters)

    def _depth_first(self, initial_samples, candidate_filter) -> TiResult:
        counters = SearchCounters()
        visited = set()
        outputs = []
        budget = self.config.max_iters
        stack = [self._root(initial_samples, visited)]
        # budget is checked before a new node is ranked
        while stack and budget > 0:
            node = stack[-1]
            if node.children is None:
                node.children = self._children(
                    node, candidate_filter, counters, visited
                )
                if not node.children:
                    counters.leaves += 1
                    stack.pop()
                    continue
            cand = node.next_child()
            if cand is None:
                stack.pop()
                continue
            child = self._descend(node, cand, visited)
            if child is None:
                continue
            budget -= 1
            counters.iterations += 1
            outputs.append((peak_power(child.samples), child.b_state))
            stack.append(child)
        logger.debug(
            "Depth-first search: %d descents, %d leaves, %d states",
            counters.iterations, counters.leaves, len(visited),
        )
        return self._best_of(outputs, initial_samples, counters)

    def _best_of(self, outputs, initial_samples, counters) -> TiResult:
        initial = peak_power(initial_samples)
        best_power = initial
        best_b = np.zeros(self.plan.n_subcarriers, dtype=np.complex128)
        for power, b_state in outputs:
            if power < best_power:
                best_power, best_b = power, b_state
        return TiResult(
            b=best_b,
            peak_power=best_power,
            initial_peak_power=initial,
            iterations_used=counters.iterations,
            leaves_visited=counters.leaves,
            counters=counters,
        )


@dataclass(eq=False)
class SearchNode:
    """
    Node of the candidate tree; ``samples`` is idaft(s + delta b_state),
    maintained incrementally. ``children`` are the valid candidates into
    unvisited states, in descending score order, ranked on first visit.
    """

    b_state: np.ndarray
    samples: np.ndarray
    children: list = None
    cursor: int = 0

    def next_child(self):
        if self.cursor >= len(self.children):
            return None
        child = self.children[self.cursor]
        self.cursor += 1
        return child


def _solve(symbols, plan, cfg, delta, avg_energy, dfs_enabled, scheme=None):
    config = replace(
        cfg, dfs_enabled=dfs_enabled, scheme=scheme or cfg.scheme
    )
    solver = CandidateRankingSolver(plan, config, delta, avg_energy)
    return solver.solve(symbols)


def cr_ti(symbols, plan, cfg: TiConfig, delta, avg_energy=1.0) -> TiResult:
    """Greedy candidate ranking over the candidates selected by ``cfg``."""
    return _solve(symbols, plan, cfg, delta, avg_energy, dfs_enabled=False)


def fcr_ti(symbols, plan, cfg: TiConfig, delta, avg_energy=1.0) -> TiResult:
    """Candidate ranking restricted by the clipping-noise filter."""
    return _solve(
        symbols, plan, cfg, delta, avg_energy,
        dfs_enabled=cfg.dfs_enabled, scheme=Scheme.FCR,
    )


def dfs_ti(symbols, plan, cfg: TiConfig, delta, avg_energy=1.0) -> TiResult:
    """Depth-first search over the candidate tree."""
    return _solve(symbols, plan, cfg, delta, avg_energy, dfs_enabled=True)


def solve(symbols, plan, cfg: TiConfig, delta, avg_energy=1.0) -> TiResult:
    """Run the scheme and search mode ``cfg`` selects."""
    return CandidateRankingSolver(plan, cfg, delta, avg_energy).solve(symbols)
