"""Dataset data model, admissibility checks and neighbouring-dataset construction"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .constants import ProblemConstants

logger = logging.getLogger(__name__)

# Treatments are stored as {-1,+1}; weight solvers see {0,1} group labels.
TREATED = 1
CONTROL = -1


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Record:
    """A single observation (x, a, y)"""
    x: np.ndarray
    a: int
    y: float

    def __post_init__(self):
        object.__setattr__(self, 'x', _frozen(self.x))
        if int(self.a) not in (TREATED, CONTROL):
            raise ValueError(f"treatment must be -1 or +1, got {self.a}")
        object.__setattr__(self, 'a', int(self.a))
        object.__setattr__(self, 'y', float(self.y))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Record):
            return NotImplemented
        return self.a == other.a and self.y == other.y and np.array_equal(self.x, other.x)

    def __hash__(self) -> int:
        return hash((self.a, self.y, self.x.tobytes()))


@dataclass(frozen=True)
class Dataset:
    """n records of (covariate vector, treatment in {-1,+1}, outcome)"""
    covariates: np.ndarray
    treatments: np.ndarray
    outcomes: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.covariates, dtype=float))
        a = np.asarray(self.treatments).ravel()
        y = np.asarray(self.outcomes, dtype=float).ravel()

        if X.shape[0] != a.shape[0] or X.shape[0] != y.shape[0]:
            raise ValueError(
                f"length mismatch: covariates {X.shape[0]}, treatments {a.shape[0]}, outcomes {y.shape[0]}"
            )
        if not np.all(np.isin(a, (TREATED, CONTROL))):
            raise ValueError("treatments must be coded as -1 (control) or +1 (treated)")

        object.__setattr__(self, 'covariates', _frozen(X))
        object.__setattr__(self, 'treatments', _frozen(a, dtype=int))
        object.__setattr__(self, 'outcomes', _frozen(y))

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    @property
    def groups(self) -> np.ndarray:
        """Treatments mapped to group labels: +1 -> 1 (treated), -1 -> 0 (control)"""
        return (self.treatments == TREATED).astype(int)

    def arm_sizes(self) -> tuple:
        """(n0, n1)"""
        n1 = int(np.sum(self.treatments == TREATED))
        return self.n - n1, n1

    def record(self, index: int) -> Record:
        return Record(self.covariates[index], int(self.treatments[index]), float(self.outcomes[index]))

    def records(self) -> List[Record]:
        return [self.record(i) for i in range(self.n)]

    def subset(self, indices) -> 'Dataset':
        idx = np.asarray(indices, dtype=int)
        return Dataset(self.covariates[idx], self.treatments[idx], self.outcomes[idx])

    def replace(self, index: int, record: Record) -> 'Dataset':
        X = np.array(self.covariates)
        a = np.array(self.treatments)
        y = np.array(self.outcomes)
        X[index] = record.x
        a[index] = record.a
        y[index] = record.y
        return Dataset(X, a, y)

    @classmethod
    def from_dict(cls, data: dict) -> 'Dataset':
        """Create Dataset from a dictionary with covariates / treatments / outcomes keys"""
        return cls(
            covariates=data.get('covariates') if data.get('covariates') is not None else data.get('X'),
            treatments=data.get('treatments') if data.get('treatments') is not None else data.get('a'),
            outcomes=data.get('outcomes') if data.get('outcomes') is not None else data.get('y')
        )

    def to_dict(self) -> dict:
        """Convert Dataset to a plain dictionary of lists"""
        return {
            'covariates': self.covariates.tolist(),
            'treatments': self.treatments.tolist(),
            'outcomes': self.outcomes.tolist()
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (np.array_equal(self.covariates, other.covariates)
                and np.array_equal(self.treatments, other.treatments)
                and np.array_equal(self.outcomes, other.outcomes))

    def __hash__(self) -> int:
        return hash((self.covariates.tobytes(), self.treatments.tobytes(), self.outcomes.tobytes()))

    def __repr__(self) -> str:
        n0, n1 = self.arm_sizes()
        return f"Dataset(n={self.n}, p={self.p}, control={n0}, treated={n1})"


@dataclass(frozen=True)
class NeighborPair:
    """Two datasets differing in (at most) the record at `index`"""
    base: Dataset
    perturbed: Dataset
    index: int

    def hamming(self) -> int:
        """Number of differing records"""
        return sum(
            1 for i in range(self.base.n) if self.base.record(i) != self.perturbed.record(i)
        )


@dataclass
class ValidationReport:
    """Violated admissibility conditions; empty means admissible"""
    issues: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return bool(self.issues)

    def __len__(self) -> int:
        return len(self.issues)

    def __iter__(self):
        return iter(self.issues)


def validate(dataset: Dataset, constants: Optional[ProblemConstants] = None) -> ValidationReport:
    """List every violated dataset invariant. Never raises, never mutates."""
    report = ValidationReport()
    X, a, y = dataset.covariates, dataset.treatments, dataset.outcomes

    if dataset.n < 2:
        report.issues.append(f"too few records: n={dataset.n} (need n >= 2)")

    n0, n1 = dataset.arm_sizes()
    if n0 == 0:
        report.issues.append("control arm empty")
    if n1 == 0:
        report.issues.append("treated arm empty")

    bad_x = np.where(~np.all(np.isfinite(X), axis=1))[0]
    for i in bad_x:
        report.issues.append(f"non-finite covariate at row {i}")
    bad_y = np.where(~np.isfinite(y))[0]
    for i in bad_y:
        report.issues.append(f"non-finite outcome at row {i}")

    if constants is not None:
        norms = np.linalg.norm(np.where(np.isfinite(X), X, 0.0), axis=1)
        for i in np.where(norms > constants.M * (1 + 1e-12))[0]:
            report.issues.append(f"norm bound exceeded at row {i}: ||x||={norms[i]:.6g} > M={constants.M:.6g}")
        if constants.M_out is not None:
            for i in np.where(np.abs(np.where(np.isfinite(y), y, 0.0)) > constants.M_out * (1 + 1e-12))[0]:
                report.issues.append(f"outcome bound exceeded at row {i}: |y|={abs(y[i]):.6g} > M_out={constants.M_out:.6g}")

    if report.issues:
        logger.debug(f"Dataset validation found {len(report.issues)} issue(s)")
    return report


def make_neighbor(dataset: Dataset, index: int, replacement: Record,
                  constants: Optional[ProblemConstants] = None) -> NeighborPair:
    """Replace one record, leaving the base dataset untouched"""
    if not 0 <= index < dataset.n:
        raise IndexError(f"index {index} out of range for n={dataset.n}")
    if replacement.x.shape != (dataset.p,):
        raise ValueError(f"replacement covariates have shape {replacement.x.shape}, expected ({dataset.p},)")
    if not np.all(np.isfinite(replacement.x)) or not np.isfinite(replacement.y):
        raise ValueError("replacement record contains non-finite values")
    if constants is not None:
        if np.linalg.norm(replacement.x) > constants.M * (1 + 1e-12):
            raise ValueError(f"replacement violates covariate bound M={constants.M}")
        if constants.M_out is not None and abs(replacement.y) > constants.M_out * (1 + 1e-12):
            raise ValueError(f"replacement violates outcome bound M_out={constants.M_out}")

    return NeighborPair(base=dataset, perturbed=dataset.replace(index, replacement), index=index)
