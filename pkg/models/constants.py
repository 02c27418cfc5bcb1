"""Problem constants data model"""
import math
from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class ProblemConstants:
    """Data and loss bounds entering the privacy calibration.

    M is the covariate L2 bound, M_out the outcome magnitude bound, lambda1 the
    L1-ball radius of the parameter set, zeta the per-sample gradient bound and
    lam_tr the per-sample Hessian-trace bound.
    """
    M: float
    M_out: Optional[float]
    lambda1: float
    zeta: float
    lam_tr: float

    @classmethod
    def for_itr(cls, M: float, M_out: float, lambda1: float) -> 'ProblemConstants':
        """Constants of the squared ITR loss: zeta = 2M^2 lambda1 + 4 M M_out, lam_tr = 2M^2"""
        if M <= 0 or M_out < 0 or lambda1 <= 0:
            raise ValueError(f"invalid ITR constants: M={M}, M_out={M_out}, lambda1={lambda1}")
        return cls(
            M=float(M),
            M_out=float(M_out),
            lambda1=float(lambda1),
            zeta=2.0 * M * M * lambda1 + 4.0 * M * M_out,
            lam_tr=2.0 * M * M
        )

    def with_lambda1(self, lambda1: float) -> 'ProblemConstants':
        """Same bounds, new L1 radius (zeta recomputed for the ITR loss)"""
        return ProblemConstants.for_itr(self.M, self.M_out, lambda1)

    def is_itr_consistent(self, rel_tol: float = 1e-12) -> bool:
        if self.M_out is None:
            return False
        zeta = 2.0 * self.M ** 2 * self.lambda1 + 4.0 * self.M * self.M_out
        return (math.isclose(self.zeta, zeta, rel_tol=rel_tol)
                and math.isclose(self.lam_tr, 2.0 * self.M ** 2, rel_tol=rel_tol))

    @classmethod
    def from_dict(cls, data: dict) -> 'ProblemConstants':
        """Create ProblemConstants from a dictionary; derives zeta/lam_tr when absent"""
        if data.get('zeta') is None or data.get('lam_tr') is None:
            return cls.for_itr(float(data['M']), float(data['M_out']), float(data['lambda1']))
        return cls(
            M=float(data['M']),
            M_out=None if data.get('M_out') is None else float(data['M_out']),
            lambda1=float(data['lambda1']),
            zeta=float(data['zeta']),
            lam_tr=float(data['lam_tr'])
        )

    def to_dict(self) -> dict:
        return {
            'M': self.M,
            'M_out': self.M_out,
            'lambda1': self.lambda1,
            'zeta': self.zeta,
            'lam_tr': self.lam_tr
        }

    def __repr__(self) -> str:
        return f"ProblemConstants(M={self.M:.4g}, M_out={self.M_out}, lambda1={self.lambda1}, zeta={self.zeta:.4g})"


