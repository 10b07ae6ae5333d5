"""Average ranks, Friedman and Nemenyi tests, rank diagrams and parameter
transition matrices.

Ranks follow the "higher is better" convention: on each dataset the most
accurate method receives rank ``k`` and the least accurate rank 1, with tied
methods sharing the mean of the ranks they span.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

# Critical values q_alpha of the two-tailed Nemenyi test (studentized range
# statistic with infinite degrees of freedom divided by sqrt(2)). k = 2..10
# are Demsar's (2006) published values; k = 11..20 were computed with
# scipy.stats.studentized_range.ppf(1 - alpha, k, inf) / sqrt(2) and frozen.
Q_TABLE = {
    0.05: (1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164,
           3.219, 3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544),
    0.10: (1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920,
           2.978, 3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291, 3.319),
}
K_MIN, K_MAX = 2, 20

# rank gaps are differences of means of small rationals; this absorbs the
# rounding so that a gap equal to the CD on paper also compares equal here
_GAP_TOL = 1e-12


@dataclass(eq=False)
class RankTable:
    methods: List[str]
    datasets: List[str]
    accuracy: np.ndarray  # (n_datasets, n_methods)
    ranks: np.ndarray  # same shape, 1..k with ties averaged

    @property
    def avg_rank(self) -> np.ndarray:
        return self.ranks.mean(axis=0)

    @property
    def n_methods(self) -> int:
        return len(self.methods)

    @property
    def n_datasets(self) -> int:
        return len(self.datasets)


def average_ranks(accuracy, methods: Optional[Sequence[str]] = None,
                  datasets: Optional[Sequence[str]] = None) -> RankTable:
    """Rank the methods (columns) within every dataset (row).

    >>> average_ranks([[0.9, 0.8, 0.9]]).ranks.tolist()
    [[2.5, 1.0, 2.5]]
    """
    acc = np.asarray(accuracy, dtype=np.float64)
    if acc.ndim != 2:
        raise ValueError("accuracy must be a (datasets x methods) matrix")
    n, k = acc.shape
    if k < 2 or n < 1:
        raise ValueError("need at least two methods and one dataset")
    if not np.all(np.isfinite(acc)):
        raise ValueError("accuracy matrix contains non-finite values")
    methods = list(methods) if methods is not None else [f"m{j}" for j in range(k)]
    datasets = list(datasets) if datasets is not None else [f"d{i}" for i in range(n)]
    if len(methods) != k or len(datasets) != n:
        raise ValueError("name lists do not match the matrix shape")
    ranks = stats.rankdata(acc, method="average", axis=1)
    return RankTable(methods, datasets, acc, ranks)


@dataclass(frozen=True)
class FriedmanResult:
    chi2: float
    p_chi2: float
    f_stat: float  # Iman-Davenport correction
    p_f: float


def friedman(table: RankTable) -> FriedmanResult:
    """Friedman omnibus statistic over the average ranks, plus the
    Iman-Davenport F form that Demsar recommends."""
    n, k = table.n_datasets, table.n_methods
    R = table.avg_rank
    chi2 = 12.0 * n / (k * (k + 1)) * (np.sum(R ** 2) - k * (k + 1) ** 2 / 4.0)
    chi2 = max(float(chi2), 0.0)
    p_chi2 = float(stats.chi2.sf(chi2, k - 1))
    denom = n * (k - 1) - chi2
    if n < 2:
        f_stat, p_f = float("nan"), float("nan")
    elif denom <= 0:
        # every dataset ranks the methods identically
        f_stat, p_f = float("inf"), 0.0
    else:
        f_stat = (n - 1) * chi2 / denom
        p_f = float(stats.f.sf(f_stat, k - 1, (k - 1) * (n - 1)))
    return FriedmanResult(chi2, p_chi2, float(f_stat), p_f)


def nemenyi_q(k: int, alpha: float = 0.05) -> float:
    if alpha not in Q_TABLE:
        raise ValueError(f"alpha must be one of {sorted(Q_TABLE)}")
    if not K_MIN <= k <= K_MAX:
        raise ValueError(f"k must be in [{K_MIN}, {K_MAX}], got {k}")
    return Q_TABLE[alpha][k - K_MIN]


def nemenyi_cd(k: int, n: int, alpha: float = 0.05) -> float:
    """Critical difference ``q_alpha * sqrt(k (k + 1) / (6 n))`` between the
    average ranks of ``k`` methods compared over ``n`` datasets."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return nemenyi_q(k, alpha) * math.sqrt(k * (k + 1) / (6.0 * n))


@dataclass(eq=False)
class RankDiagram:
    """Methods ordered best first, with the groups joined by a bar.

    ``cliques`` holds the maximal runs of at least two methods whose average
    ranks are all within ``cd`` of each other.
    """

    methods: List[str]
    avg_rank: List[float]
    cd: float
    k: int
    cliques: List[tuple] = field(default_factory=list)

    def to_text(self) -> str:
        width = max(len(m) for m in self.methods)
        lines = [f"CD = {self.cd:.3f}"]
        for m, r in zip(self.methods, self.avg_rank):
            lines.append(f"  {m:<{width}}  {r:6.3f}")
        if self.cliques:
            for c in self.cliques:
                lines.append("  not significantly different: " + ", ".join(c))
        else:
            lines.append("  no two methods within CD")
        return "\n".join(lines) + "\n"

    def to_svg(self, width: int = 640) -> str:
        k = self.k
        margin = 60
        row_h = 18
        axis_y = 50
        n_cl = len(self.cliques)
        height = axis_y + 30 + row_h * (len(self.methods) + n_cl) + 20

        def x_of(rank):
            # higher ranks drawn on the left, as in the usual Demsar figure
            return margin + (k - rank) / max(k - 1, 1) * (width - 2 * margin)

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
               f'font-family="sans-serif" font-size="12">',
               f'<line x1="{x_of(k):.1f}" y1="{axis_y}" x2="{x_of(1):.1f}" y2="{axis_y}" '
               'stroke="black"/>']
        for r in range(1, k + 1):
            x = x_of(r)
            out.append(f'<line x1="{x:.1f}" y1="{axis_y - 5}" x2="{x:.1f}" y2="{axis_y}" '
                       'stroke="black"/>')
            out.append(f'<text x="{x:.1f}" y="{axis_y - 8}" text-anchor="middle">{r}</text>')
        cd_x0 = x_of(k)
        cd_x1 = cd_x0 + self.cd / max(k - 1, 1) * (width - 2 * margin)
        out.append(f'<line x1="{cd_x0:.1f}" y1="15" x2="{cd_x1:.1f}" y2="15" stroke="black" '
                   'stroke-width="2"/>')
        out.append(f'<text x="{cd_x1 + 6:.1f}" y="19">CD = {self.cd:.2f}</text>')
        y = axis_y + 20
        for j, c in enumerate(self.cliques):
            ranks = [self.avg_rank[self.methods.index(m)] for m in c]
            out.append(f'<line x1="{x_of(max(ranks)) - 3:.1f}" y1="{y + j * 6}" '
                       f'x2="{x_of(min(ranks)) + 3:.1f}" y2="{y + j * 6}" stroke="black" '
                       'stroke-width="3"/>')
        y += 6 * n_cl + 10
        for i, (m, r) in enumerate(zip(self.methods, self.avg_rank)):
            x = x_of(r)
            ty = y + i * row_h
            out.append(f'<polyline points="{x:.1f},{axis_y} {x:.1f},{ty} {width - margin + 5},{ty}" '
                       'fill="none" stroke="gray"/>')
            out.append(f'<text x="{width - margin + 8}" y="{ty + 4}">{_xml(m)} ({r:.2f})</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _xml(text):
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def rank_diagram_data(table: RankTable, cd: Optional[float] = None,
                      alpha: float = 0.05) -> RankDiagram:
    """Order methods by average rank and find the non-significant groups.

    Two methods are joined when their average ranks differ by at most
    ``cd``; ``cd`` defaults to the Nemenyi critical difference.
    """
    if cd is None:
        cd = nemenyi_cd(table.n_methods, table.n_datasets, alpha)
    avg = table.avg_rank
    # best (highest rank) first; stable on ties so input order decides
    order = np.argsort(-avg, kind="stable")
    names = [table.methods[i] for i in order]
    r = avg[order]
    cliques = []
    last_end = -1
    for i in range(len(r)):
        j = i
        while j + 1 < len(r) and r[i] - r[j + 1] <= cd + _GAP_TOL:
            j += 1
        # sorted ranks make every clique a contiguous run; keep the maximal ones
        if j > i and j > last_end:
            cliques.append(tuple(names[i:j + 1]))
            last_end = j
    return RankDiagram(names, [float(v) for v in r], float(cd), table.n_methods, cliques)


@dataclass(eq=False)
class TransitionMatrix:
    """``cells[a, b]``: percentage of grid points at ``values[a]`` whose
    average rank goes up when only this parameter moves to ``values[b]``.
    ``ties[a, b]`` is the percentage where the rank stays exactly equal."""

    parameter: str
    values: list
    cells: np.ndarray
    ties: np.ndarray
    n_pairs: int

    def to_rows(self, decimals: int = 1) -> List[List[str]]:
        head = [self.parameter] + [_fmt_value(v) for v in self.values]
        rows = [head]
        for a, va in enumerate(self.values):
            rows.append([_fmt_value(va)] + [f"{c:.{decimals}f}" for c in self.cells[a]])
        return rows


def _fmt_value(v):
    return "None" if v is None else str(v)


def config_average_ranks(accuracy) -> np.ndarray:
    """Average rank of each config across datasets.

    :param accuracy: ``(n_datasets, n_configs)`` mean test accuracies.
    """
    return average_ranks(accuracy).avg_rank


def transition_matrix(configs: Sequence[Dict], avg_rank, parameter: str,
                      values: Optional[Sequence] = None) -> TransitionMatrix:
    """Pairwise improvement percentages for one parameter of a full grid.

    Configs are paired when they agree on every other parameter. A higher
    average rank is better, and only strict increases count as improvements.
    """
    avg_rank = np.asarray(avg_rank, dtype=np.float64)
    if len(configs) != avg_rank.shape[0]:
        raise ValueError("one average rank per config is required")
    if not configs:
        raise ValueError("no configs")
    if values is None:
        values = []
        for c in configs:
            if parameter not in c:
                raise ValueError(f"config lacks parameter {parameter!r}")
            if c[parameter] not in values:
                values.append(c[parameter])
    values = list(values)
    pos = {_key(v): i for i, v in enumerate(values)}
    others = sorted(k for k in configs[0] if k != parameter)
    groups: Dict[tuple, Dict[int, float]] = {}
    for c, r in zip(configs, avg_rank):
        if sorted(k for k in c if k != parameter) != others or parameter not in c:
            raise ValueError("configs do not share one set of parameters")
        vi = pos.get(_key(c[parameter]))
        if vi is None:
            raise ValueError(f"value {c[parameter]!r} not among {values}")
        g = groups.setdefault(tuple(_key(c[k]) for k in others), {})
        if vi in g:
            raise ValueError("duplicate config in grid")
        g[vi] = float(r)
    for g in groups.values():
        if len(g) != len(values):
            raise ValueError("configs do not form a full grid over "
                             f"{parameter!r}; pairing is undefined")
    nv = len(values)
    R = np.array([[g[i] for i in range(nv)] for g in groups.values()])  # (pairs, nv)
    n_pairs = R.shape[0]
    cells = np.zeros((nv, nv))
    ties = np.zeros((nv, nv))
    for a in range(nv):
        for b in range(nv):
            if a == b:
                continue
            cells[a, b] = 100.0 * np.count_nonzero(R[:, b] > R[:, a]) / n_pairs
            ties[a, b] = 100.0 * np.count_nonzero(R[:, b] == R[:, a]) / n_pairs
    return TransitionMatrix(parameter, values, cells, ties, n_pairs)


def _key(v):
    # 1 and 1.0 are the same grid value; "sqrt" and None stay distinct
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return ("num", float(v))
    return ("obj", v)
