"""Probabilistic certificate: Ps over a derivation report plus a Monte-Carlo
confidence under parameter uncertainty.

Draws use one independent substream per uncertain parameter, deterministic in
the draw index, so serial and parallel evaluation give identical results for
a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ReportError


@dataclass(frozen=True)
class ParameterUncertainty:
    """Beta-shaped uncertainty on one base probability: `mean` is the central
    value, `strength` the concentration (higher = tighter; inf = point mass)."""

    mean: float
    strength: float

    def __post_init__(self):
        if not 0.0 <= self.mean <= 1.0:
            raise ConfigError("uncertainty mean must be in [0,1]")
        if not self.strength > 0:
            raise ConfigError("uncertainty strength must be > 0")

    @property
    def degenerate(self) -> bool:
        return math.isinf(self.strength) or self.mean in (0.0, 1.0)


def parse_uncertainty(raw: dict | None) -> dict[str, ParameterUncertainty]:
    out: dict[str, ParameterUncertainty] = {}
    for key, value in (raw or {}).items():
        if not isinstance(value, dict) or "mean" not in value:
            raise ConfigError(f"uncertainty {key}: expected {{mean, strength}}")
        out[key] = ParameterUncertainty(
            mean=float(value["mean"]),
            strength=float(value.get("strength", math.inf)),
        )
    return out


def _suffix(cause: dict) -> str:
    return cause["attack"] if cause["kind"] == "cyber-attack" else cause["kind"]


def _cause_key(cause: dict) -> str:
    return f"{cause['component']}:{_suffix(cause)}"


def _effective(cause: dict, base: float, alpha: float) -> float:
    adjusted = base * alpha ** cause["distance"]
    if cause["mitigated"]:
        adjusted *= 1.0 - cause["effectiveness"]
    return adjusted


def compute_ps(report: dict) -> float:
    """Probability of satisfying the cyber requirements: the product over all
    assertions of (1 - final residual risk)."""
    ps = 1.0
    for entry in report["ledger"]:
        ps *= 1.0 - entry["residual_risk"]
    return ps


def per_assertion_contributions(report: dict) -> list[dict]:
    return [
        {
            "assertion": entry["assertion"],
            "residual": entry["residual_risk"],
            "contribution": 1.0 - entry["residual_risk"],
        }
        for entry in report["ledger"]
    ]


def compute_confidence(
    report: dict,
    uncertainty: dict[str, ParameterUncertainty],
    required_ps: float,
    samples: int,
    seed: int,
) -> float:
    """Fraction of Monte-Carlo draws whose recomputed Ps meets required_ps.

    Each uncertain base probability is redrawn per sample; adjusted
    probabilities, residuals, and Ps are recomputed from the report ledger.
    """
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    alpha = report["config"]["alpha"]

    known_keys = {
        _cause_key(cause) for entry in report["ledger"] for cause in entry["causes"]
    }
    for key in uncertainty:
        if key not in known_keys:
            raise ReportError(f"uncertainty references unknown parameter {key!r}")

    columns: dict[str, np.ndarray] = {}
    for index, key in enumerate(sorted(uncertainty)):
        spec = uncertainty[key]
        if spec.degenerate:
            columns[key] = np.full(samples, spec.mean)
        else:
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=seed, spawn_key=(index,))
            )
            a = spec.mean * spec.strength
            b = (1.0 - spec.mean) * spec.strength
            columns[key] = rng.beta(a, b, size=samples)

    # Mirror the ledger arithmetic exactly (same cause order, same
    # residual -> Ps composition) so degenerate draws reproduce the analytic
    # Ps bit for bit.
    ps = np.ones(samples)
    for entry in report["ledger"]:
        healthy = np.ones(samples)
        for cause in sorted(entry["causes"], key=lambda c: (c["component"], _suffix(c))):
            key = _cause_key(cause)
            if key in columns:
                base = columns[key]
                adjusted = base * alpha ** cause["distance"]
                if cause["mitigated"]:
                    adjusted = adjusted * (1.0 - cause["effectiveness"])
                healthy = healthy * (1.0 - adjusted)
            else:
                healthy = healthy * (1.0 - _effective(cause, cause["base"], alpha))
        residual = 1.0 - healthy
        ps = ps * (1.0 - residual)
    return float(np.count_nonzero(ps >= required_ps)) / samples


def build_certificate(
    report: dict,
    uncertainty: dict[str, ParameterUncertainty] | None = None,
    required_ps: float = 0.9,
    samples: int = 10000,
    seed: int | None = None,
) -> dict:
    """Certificate block appended to the report file."""
    if not 0.0 <= required_ps <= 1.0:
        raise ConfigError("required_ps must be in [0,1]")
    uncertainty = uncertainty or {}
    if seed is None:
        seed = report["config"]["seed"]
    confidence = compute_confidence(report, uncertainty, required_ps, samples, seed)
    return {
        "ps": compute_ps(report),
        "required_ps": required_ps,
        "confidence": confidence,
        "samples": samples,
        "seed": seed,
        "uncertainty": {
            key: {"mean": spec.mean, "strength": spec.strength if not math.isinf(spec.strength) else "inf"}
            for key, spec in sorted(uncertainty.items())
        },
        "per_assertion": per_assertion_contributions(report),
    }
