"""Integrals over domains as truncated wavelet pairings.

``<T, h> = sum_k c_k(T) c_k(h) + sum_j sum_{i,k} 2^(-dj) c_ijk(T) c_ijk(h)``
in the orthonormal Daubechies basis with the ``2^(dj)`` coefficient
normalization. The tail beyond the truncation level is estimated from the
fitted growth of the distribution's coefficients and a geometric
extrapolation of the indicator's per-level l1 mass; it is a heuristic bound.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

from .distribution import DistributionRep, coeff_sweep, regularity_fit
from .geometry import (DEFAULT_SUBSAMPLES, DomainSpec, besov_criterion,
                       box_counts, build_grid, indicator_coeffs, lebesgue_boundary)
from .wavelets import CoefficientField, _overlap


class PairingWarning(UserWarning):
    pass


@dataclass
class PairingResult:
    value: float
    J: int
    tail_estimate: float
    per_level: list
    warnings: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"value": self.value, "J": self.J, "tail_estimate": self.tail_estimate,
                "per_level": self.per_level, "warnings": list(self.warnings),
                "tail_is_heuristic": True}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


def _level_sum(T: CoefficientField, h: CoefficientField, j: int) -> float:
    total = 0.0
    for i, blk in h.level_blocks(j):
        other = T.details.get((i, j))
        if other is not None:
            total += _overlap(other, blk)
    return total * 2.0 ** (-T.d * j)


def tail_estimate(T: CoefficientField, h: CoefficientField, J: int) -> tuple[float, list]:
    """``C_T sum_{j > J} 2^((gamma - d) j) m_j`` with ``m_j`` extrapolated from the last levels.

    ``C_T`` and ``gamma`` come from :func:`regularity_fit` on the levels of
    ``T`` up to ``J``; ``m_j`` is the indicator's level-``j`` l1 mass, grown
    geometrically at the ratio observed over the last three levels.
    """
    notes = []
    mass = h.l1(J)
    if mass == 0.0:
        return 0.0, notes
    try:
        gamma, log_c = regularity_fit(T, max(1, J - 5), J)
    except ValueError:
        try:
            gamma, log_c = regularity_fit(T, 0, J)
        except ValueError:
            notes.append("tail unavailable: fewer than 3 nonzero distribution levels")
            return math.inf, notes
    C = 2.0**log_c
    ratio = 1.0
    if J >= 2 and h.l1(J - 2) > 0:
        ratio = (mass / h.l1(J - 2)) ** 0.5
    q = 2.0 ** (gamma - T.d) * ratio
    if q >= 1.0:
        notes.append(f"tail ratio {q:.3g} >= 1: pairing truncation does not contract")
        return math.inf, notes
    return C * 2.0 ** (gamma * J) * 2.0 ** (-T.d * J) * mass * q / (1.0 - q), notes


def pair(T: CoefficientField, h: CoefficientField, J: int) -> PairingResult:
    """Truncated Parseval pairing of two coefficient fields up to level ``J``."""
    if T.normalization != h.normalization:
        raise ValueError("normalization mismatch between fields")
    if T.d != h.d or T.basis_order != h.basis_order:
        raise ValueError("fields use different dimensions or bases")
    if h.is_empty():
        return PairingResult(0.0, J, 0.0, [{"level": "scaling", "value": 0.0}]
                             + [{"level": j, "value": 0.0} for j in range(J + 1)])
    if any(j not in h.levels for j in range(J + 1)):
        raise ValueError(f"indicator field is not populated to level {J}")
    missing = [j for j in range(J + 1) if j not in T.levels]
    per = []
    scal = 0.0
    if T.scaling is not None and h.scaling is not None:
        scal = _overlap(T.scaling, h.scaling)
    per.append({"level": "scaling", "value": scal})
    for j in range(J + 1):
        per.append({"level": j, "value": _level_sum(T, h, j)})
    # fixed summation order keeps the value deterministic
    value = math.fsum(p["value"] for p in per)
    tail, notes = tail_estimate(T, h, J)
    if missing:
        notes.append(f"distribution field lacks levels {missing}")
    return PairingResult(value, J, tail, per, notes)


def integrate_over_domain(D: DistributionRep, omega: DomainSpec, J: int,
                          s: int = DEFAULT_SUBSAMPLES, lattice_level: int | None = None
                          ) -> PairingResult:
    """``int_Omega f dg^1 ^ ... ^ dg^d`` as the pairing of ``f dg`` with the indicator."""
    if omega.d != D.d:
        raise ValueError("domain and distribution dimensions differ")
    notes = []
    G = build_grid(omega, J + 1, s)
    target = omega.boundary_target()
    levels = list(range(1, J + 2))
    if target is not None and target.exact:
        counts = box_counts(omega, levels)
    else:
        counts = box_counts(G, levels)
    check = besov_criterion(counts, D.beta, J + 1)
    if check.verdict != "converging":
        msg = (f"boundary criterion at beta = {D.beta:.4g} is {check.verdict}; "
               "the pairing may not converge")
        warnings.warn(msg, PairingWarning, stacklevel=2)
        notes.append(msg)
    h = indicator_coeffs(G, D.basis, J)
    T = coeff_sweep(D, J, omega.bbox, lattice_level=lattice_level)
    if not T.complete:
        notes.append("distribution field incomplete (budget)")
    res = pair(T, h, J)
    res.warnings = notes + res.warnings + list(D.warnings)
    res.meta = {"besov": check.to_json(), "distribution_gaps": T.meta.get("gaps"),
                "lattice_level": T.meta.get("lattice_level"),
                "boundary_cubes": lebesgue_boundary(G, J).count}
    return res

