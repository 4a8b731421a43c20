"""
Information Tools - discrete entropies, mutual information, empirical
edge-signal distributions and the vanishing-error rate bound
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .config import get_settings
from .errors import ExhaustiveCheckTooLarge
from .netcode_engine import CodeSimulator, NetworkCode, message_count, message_from_index, zero_pattern_signals
from .network_model import Instance, NECInstance
from .reduction import BranchWiring

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
SUM_TOLERANCE = 1e-12
MODES = ("uniform", "subset", "uniform_a")

Probability = Union[float, Fraction]


@dataclass(frozen=True)
class JointDistribution:
    """pmf over value tuples of named discrete variables"""

    variables: Tuple[str, ...]
    pmf: Dict[Tuple[int, ...], Probability]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("variable names must be distinct")
        pmf = {tuple(key): value for key, value in self.pmf.items()}
        for key, value in pmf.items():
            if len(key) != len(self.variables):
                raise ValueError(f"outcome {key} does not match variables {self.variables}")
            if value < 0:
                raise ValueError(f"negative probability at {key}")
        total = sum(pmf.values())
        exact = all(isinstance(value, (int, Fraction)) for value in pmf.values())
        if (exact and total != 1) or (not exact and abs(float(total) - 1.0) > SUM_TOLERANCE):
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "pmf", pmf)

    @property
    def exact(self) -> bool:
        return all(isinstance(value, (int, Fraction)) for value in self.pmf.values())

    @property
    def support_size(self) -> int:
        return sum(1 for value in self.pmf.values() if value > 0)

    def positions(self, names: Sequence[str]) -> List[int]:
        """Column positions of `names` (ValueError on an unknown name)"""
        positions = []
        for name in names:
            if name not in self.variables:
                raise ValueError(f"unknown variable: {name}")
            positions.append(self.variables.index(name))
        return positions

    def marginal(self, names: Sequence[str]) -> "JointDistribution":
        positions = self.positions(names)
        collapsed: Dict[Tuple[int, ...], Probability] = {}
        for key, value in self.pmf.items():
            reduced = tuple(key[p] for p in positions)
            collapsed[reduced] = collapsed.get(reduced, 0) + value
        return JointDistribution(tuple(names), collapsed)

    def to_frame(self) -> pd.DataFrame:
        rows = [(*key, value) for key, value in sorted(self.pmf.items())]
        return pd.DataFrame(rows, columns=[*self.variables, "p"])

    def as_dict(self) -> Dict:
        return {
            "variables": list(self.variables),
            "pmf": [
                {"values": list(key), "p": str(value) if isinstance(value, Fraction) else value}
                for key, value in sorted(self.pmf.items())
            ],
        }


def entropy(dist: JointDistribution, names: Sequence[str]) -> float:
    """
    Shannon entropy in bits of the marginal on `names`

    Args:
        dist: Joint distribution
        names: Variable subset (empty gives 0)

    Returns:
        H in bits, with 0 log 0 = 0
    """
    if not names:
        return 0.0
    probabilities = np.array([float(p) for p in dist.marginal(names).pmf.values()], dtype=float)
    probabilities = probabilities[probabilities > 0]
    return float(-np.sum(probabilities * np.log2(probabilities))) + 0.0


def conditional_entropy(dist: JointDistribution, names: Sequence[str], given: Sequence[str]) -> float:
    """H(names | given) = H(names, given) - H(given)"""
    return entropy(dist, [*names, *given]) - entropy(dist, given)


def mutual_information(dist: JointDistribution, first: Sequence[str], second: Sequence[str]) -> float:
    """
    I(first; second) = H(first) + H(second) - H(first, second)

    Raises:
        ValueError: if the two groups share a variable
    """
    overlap = set(first) & set(second)
    if overlap:
        raise ValueError(f"variable groups overlap: {sorted(overlap)}")
    return entropy(dist, first) + entropy(dist, second) - entropy(dist, [*first, *second])


def triangle_bound_check(
    dist: JointDistribution,
    x: Optional[Sequence[str]] = None,
    y: Optional[Sequence[str]] = None,
    z: Optional[Sequence[str]] = None,
) -> Tuple[float, float, bool]:
    """
    Check I(X;Z) >= I(X;Y) + I(Y;Z) - H(Y)

    Groups default to the first, second and third variable of `dist`.

    Returns:
        (lhs, rhs, holds) with a 1e-9 tolerance
    """
    x = list(x) if x is not None else [dist.variables[0]]
    y = list(y) if y is not None else [dist.variables[1]]
    z = list(z) if z is not None else [dist.variables[2]]
    lhs = mutual_information(dist, x, z)
    rhs = mutual_information(dist, x, y) + mutual_information(dist, y, z) - entropy(dist, y)
    return lhs, rhs, lhs >= rhs - TOLERANCE


def random_joint_distribution(
    shape: Sequence[int],
    rng: np.random.Generator,
    names: Sequence[str] = ("X", "Y", "Z"),
    sparsity: float = 0.0,
) -> JointDistribution:
    """
    Dirichlet-random pmf over a product alphabet

    Args:
        shape: Alphabet size per variable
        rng: numpy Generator
        names: Variable names, one per axis
        sparsity: Probability that an outcome is forced to zero mass

    Returns:
        JointDistribution
    """
    if len(shape) != len(names):
        raise ValueError("one name per axis required")
    outcomes = list(product(*(range(size) for size in shape)))
    weights = rng.dirichlet(np.ones(len(outcomes)))
    if sparsity > 0:
        keep = rng.random(len(outcomes)) >= sparsity
        if keep.any():
            weights = np.where(keep, weights, 0.0)
            weights = weights / weights.sum()
    return JointDistribution(tuple(names), {key: float(w) for key, w in zip(outcomes, weights)})


def _from_rows(frame: pd.DataFrame, exact: bool) -> JointDistribution:
    total = len(frame)
    counts = frame.value_counts(sort=False)
    pmf: Dict[Tuple[int, ...], Probability] = {}
    for key, count in counts.items():
        key = key if isinstance(key, tuple) else (key,)
        key = tuple(int(value) for value in key)
        pmf[key] = Fraction(int(count), total) if exact else int(count) / total
    return JointDistribution(tuple(frame.columns), pmf)


def edge_joint_distribution(
    code: NetworkCode,
    inst: Instance,
    edges: Sequence[str],
    mode: str = "uniform",
    messages: Optional[Sequence[int]] = None,
    exact: bool = False,
    jobs: int = 1,
) -> JointDistribution:
    """
    Joint pmf of error-free edge signals under a message distribution

    Modes:
        uniform: every message equally likely
        subset: uniform over `messages` (e.g. M°)
        uniform_a: every a-tuple equally likely, injected on the a edges of
            a reduced instance

    Args:
        code: Network code
        inst: Instance (reduced NEC instance for uniform_a)
        edges: Edge ids; they become the variable names
        mode: One of MODES
        messages: Message indices for subset mode
        exact: Use Fractions instead of floats
        jobs: Worker count

    Returns:
        JointDistribution over `edges`

    Raises:
        ExhaustiveCheckTooLarge: more scenarios than NETREDUCE_MAX_EVALUATIONS
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")
    edges = list(edges)
    if len(set(edges)) != len(edges):
        raise ValueError("edge list has duplicates")
    for edge_id in edges:
        if not inst.graph.has_edge(edge_id):
            raise ValueError(f"unknown edge: {edge_id}")

    limit = get_settings().max_evaluations
    if mode == "uniform_a":
        if not isinstance(inst, NECInstance):
            raise ValueError("uniform_a mode needs a reduced NEC instance")
        a_edges = [branch.edge("a") for branch in BranchWiring.from_instance(inst).branches]
        size = (2 ** code.n) ** len(a_edges)
        if size > limit:
            raise ExhaustiveCheckTooLarge(size, limit)
        simulator = CodeSimulator(code, inst)
        rows = []
        for values in product(range(2 ** code.n), repeat=len(a_edges)):
            trace = simulator.run(0, overrides=dict(zip(a_edges, values)))
            rows.append([trace.transmitted[edge_id] for edge_id in edges])
        frame = pd.DataFrame(rows, columns=edges)
    else:
        if mode == "subset":
            if not messages:
                raise ValueError("subset mode needs a nonempty message list")
            chosen = [message_from_index(inst, code.n, int(m)) for m in messages]
        else:
            if message_count(code) > limit:
                raise ExhaustiveCheckTooLarge(message_count(code), limit)
            chosen = None
        signals = zero_pattern_signals(code, inst, edges, messages=chosen, jobs=jobs)
        frame = pd.DataFrame({edge_id: signals[edge_id] for edge_id in edges}, columns=edges)

    return _from_rows(frame, exact)


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the per-branch rate bound"""

    n: int
    eps: float
    l: int
    k: int
    uniform_a: bool = False

    def __post_init__(self):
        if self.n < 1 or self.l < 1 or self.k < 1:
            raise ValueError("n, l and k must be positive integers")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")

    @property
    def eps_prime(self) -> float:
        return 4 * self.eps


@dataclass(frozen=True)
class BoundReport:
    """Bound value (None outside its domain) plus a vacuity flag"""

    value: Optional[float]
    vacuous: bool
    terms: Dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> Dict:
        return {"value": self.value, "vacuous": self.vacuous, "terms": dict(self.terms)}


def rate_bound(params: BoundParams) -> BoundReport:
    """
    Lower bound on I(z_i; z'_i) for a code with error probability eps

    value = H_floor - penalty - 1 - 2 k eps' n / (1 - eps'), where
    H_floor = (1 - eps' - 1/l)(1 - l eps')(n + log2(1 - eps')) and
    penalty = (1/l + l eps') n + eps' n / ((1 - eps')(1 - l eps')).
    With uniform_a the value is scaled by (1 - eps').

    Args:
        params: BoundParams

    Returns:
        BoundReport; vacuous when the value is <= 0 or eps' >= min(1, 1/l)
    """
    n, l, k = params.n, params.l, params.k
    eps_prime = params.eps_prime
    if eps_prime >= 1 or l * eps_prime >= 1:
        logger.info(f"Bound undefined for eps'={eps_prime}, l={l}")
        return BoundReport(value=None, vacuous=True)

    entropy_floor = (1 - eps_prime - 1 / l) * (1 - l * eps_prime) * (n + math.log2(1 - eps_prime))
    penalty = (1 / l + l * eps_prime) * n + eps_prime * n / ((1 - eps_prime) * (1 - l * eps_prime))
    ab_floor = entropy_floor - penalty
    b_given_zp = 1 + 2 * k * eps_prime * n / (1 - eps_prime)
    value = ab_floor - b_given_zp
    if params.uniform_a:
        value *= 1 - eps_prime

    terms = {
        "entropy_floor": entropy_floor,
        "b_given_a_ceiling": penalty,
        "ab_floor": ab_floor,
        "b_given_zp_ceiling": b_given_zp,
    }
    return BoundReport(value=value, vacuous=value <= 0, terms=terms)
