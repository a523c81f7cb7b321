"""Criterion scaling and weighted site-cost evaluation.

Single-criterion runs price sites by the raw criterion (physical units,
argmin-equivalent). Multi-criterion runs min-max scale each criterion to
[0, 1] and then rescale each distribution to a common mean of 1.0 so
that outlier-compressed criteria still carry weight in the sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import CandidateSite, ValidationError

TARGET_MEAN = 1.0
CRITERIA = ("lcoe", "scenicness", "network_length")


@dataclass(frozen=True)
class Weights:
    w_c: float
    w_s: float
    w_l: float

    def __post_init__(self):
        for name, w in (("w_c", self.w_c), ("w_s", self.w_s), ("w_l", self.w_l)):
            if not 0.0 <= w <= 1.0:
                raise ValidationError(f"weight {name}={w} outside [0, 1]")
        if self.w_c == self.w_s == self.w_l == 0.0:
            raise ValidationError("at least one weight must be positive")

    def active(self) -> list[str]:
        return [n for n, w in zip(CRITERIA, (self.w_c, self.w_s, self.w_l)) if w > 0]

    def single_criterion(self) -> str | None:
        """The lone active criterion name, or None if several are active."""
        act = self.active()
        return act[0] if len(act) == 1 else None


@dataclass
class ScaledCriteria:
    """Per-site scaled-and-mean-equalized criterion values."""
    lcoe: np.ndarray
    scenicness: np.ndarray
    network_length: np.ndarray
    x_min: dict[str, float]
    x_max: dict[str, float]
    mean_factor: dict[str, float]
    target_mean: float = TARGET_MEAN
    degenerate: tuple[str, ...] = ()

    def by_name(self, name: str) -> np.ndarray:
        return getattr(self, name)


def minmax_scale(values) -> tuple[np.ndarray, float, float, bool]:
    """Affine map of values onto [0, 1]; (scaled, x_min, x_max, degenerate).

    A constant input is degenerate: everything maps to 0 and the flag is
    set.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValidationError("minmax_scale: empty value list")
    x_min = float(arr.min())
    x_max = float(arr.max())
    if x_max == x_min:
        return np.zeros_like(arr), x_min, x_max, True
    return (arr - x_min) / (x_max - x_min), x_min, x_max, False


def equalize_means(scaled: dict[str, np.ndarray],
                   x_min: dict[str, float], x_max: dict[str, float],
                   degenerate: tuple[str, ...] = ()) -> ScaledCriteria:
    """Multiply each already-scaled criterion so all means equal 1.0."""
    out = {}
    factors = {}
    for name, arr in scaled.items():
        mean = float(arr.mean())
        if mean == 0.0:
            raise ValidationError(f"criterion {name!r} has zero mean; cannot equalize")
        factors[name] = TARGET_MEAN / mean
        out[name] = arr * factors[name]
    return ScaledCriteria(lcoe=out["lcoe"], scenicness=out["scenicness"],
                          network_length=out["network_length"],
                          x_min=x_min, x_max=x_max, mean_factor=factors,
                          degenerate=degenerate)


def _raw_arrays(candidates: list[CandidateSite]) -> dict[str, np.ndarray]:
    lengths = []
    for c in candidates:
        if c.network_length is None:
            raise ValidationError(f"site {c.site_id} has no network_length; run prep first")
        lengths.append(c.network_length)
    return {
        "lcoe": np.array([c.lcoe for c in candidates], dtype=float),
        "scenicness": np.array([c.scenicness for c in candidates], dtype=float),
        "network_length": np.array(lengths, dtype=float),
    }


def scale_candidates(candidates: list[CandidateSite]) -> ScaledCriteria:
    """Min-max scale + mean-equalize all three criteria over the pool."""
    raw = _raw_arrays(candidates)
    scaled, x_min, x_max = {}, {}, {}
    degenerate = []
    for name, arr in raw.items():
        scaled[name], x_min[name], x_max[name], degen = minmax_scale(arr)
        if degen:
            degenerate.append(name)
    return equalize_means(scaled, x_min, x_max, tuple(degenerate))


def site_costs(candidates: list[CandidateSite], weights: Weights,
               scaled: ScaledCriteria | None = None) -> np.ndarray:
    """Per-site objective contribution, aligned with the candidate order.

    Exactly one active weight: raw criterion values (times the weight).
    Several active weights: scaled-equalized values; `scaled` is computed
    over the given pool when not supplied.
    """
    single = weights.single_criterion()
    if single is not None:
        raw = _raw_arrays(candidates)
        w = {"lcoe": weights.w_c, "scenicness": weights.w_s,
             "network_length": weights.w_l}[single]
        return w * raw[single]
    if scaled is None:
        scaled = scale_candidates(candidates)
    return (weights.w_c * scaled.lcoe + weights.w_s * scaled.scenicness
            + weights.w_l * scaled.network_length)


def site_cost(site: CandidateSite, weights: Weights,
              scaled_triple: tuple[float, float, float] | None = None) -> float:
    """Objective contribution of one site.

    With several active weights a (lcoe, scenicness, length) triple of
    scaled-equalized values must be supplied.
    """
    single = weights.single_criterion()
    if single is not None:
        if single == "network_length" and site.network_length is None:
            raise ValidationError(f"site {site.site_id} has no network_length")
        raw = {"lcoe": site.lcoe, "scenicness": site.scenicness,
               "network_length": site.network_length}[single]
        w = {"lcoe": weights.w_c, "scenicness": weights.w_s,
             "network_length": weights.w_l}[single]
        return w * raw
    if scaled_triple is None:
        raise ValidationError("multi-criterion site_cost needs scaled values")
    c, s, l = scaled_triple
    return weights.w_c * c + weights.w_s * s + weights.w_l * l
