"""Stream-count recommendation from fitted timing models.

For every candidate stream count ``n`` the predicted saving is
``(n - 1) / n * sum - overhead(size, n)``. The recommendation is the ``n``
with the largest positive saving, or 1 (do not stream) when none is positive.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal

from . import regression
from .errors import BundleFormatError, NonPositiveTauError, ValidationError
from .timing import STREAM_COUNTS, check_stream_count, overlap_benefit

# per-stream creation cost measured on an RTX 2080 Ti
TAU_RTX2080TI_MS = 0.004448

# largest size the published models were fitted on
MAX_FITTED_SIZE = 10**8

DEFAULT_CANDIDATES = (2, 4, 8, 16, 32)


@dataclass(frozen=True)
class ModelBundle:
    sum_a: float
    sum_b: float
    small_a: float
    small_b: float
    small_c: float
    big_a: float
    big_b: float
    big_c: float
    size_threshold: int = 10**6
    candidates: tuple[int, ...] = DEFAULT_CANDIDATES
    provenance: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        cands = tuple(check_stream_count(n) for n in self.candidates)
        if not cands or 1 in cands or any(a >= b for a, b in zip(cands, cands[1:])):
            raise ValidationError(f"candidates must be strictly increasing stream counts > 1, got {cands}")
        object.__setattr__(self, "candidates", cands)
        if int(self.size_threshold) != self.size_threshold or self.size_threshold < 1:
            raise ValidationError(f"size_threshold must be a positive integer, got {self.size_threshold}")
        object.__setattr__(self, "size_threshold", int(self.size_threshold))
        for name in ("sum_a", "sum_b", "small_a", "small_b", "small_c", "big_a", "big_b", "big_c"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")

    @classmethod
    def from_fits(cls, sum_fit, small_fit, big_fit, **kwargs) -> "ModelBundle":
        s, lo, hi = sum_fit.coefficients, small_fit.coefficients, big_fit.coefficients
        return cls(
            s["a"], s["b"], lo["a"], lo["b"], lo["c"], hi["a"], hi["b"], hi["c"], **kwargs
        )

    def to_document(self) -> dict:
        doc = {
            "sum": {"a": self.sum_a, "b": self.sum_b},
            "overhead_small": {"a": self.small_a, "b": self.small_b, "c": self.small_c},
            "overhead_big": {"a": self.big_a, "b": self.big_b, "c": self.big_c},
            "size_threshold": self.size_threshold,
            "candidates": list(self.candidates),
        }
        if self.provenance is not None:
            doc["provenance"] = self.provenance
        return doc

    @classmethod
    def from_document(cls, doc: dict) -> "ModelBundle":
        try:
            return cls(
                sum_a=float(doc["sum"]["a"]),
                sum_b=float(doc["sum"]["b"]),
                small_a=float(doc["overhead_small"]["a"]),
                small_b=float(doc["overhead_small"]["b"]),
                small_c=float(doc["overhead_small"]["c"]),
                big_a=float(doc["overhead_big"]["a"]),
                big_b=float(doc["overhead_big"]["b"]),
                big_c=float(doc["overhead_big"]["c"]),
                size_threshold=doc.get("size_threshold", 10**6),
                candidates=tuple(doc.get("candidates", DEFAULT_CANDIDATES)),
                provenance=doc.get("provenance"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise BundleFormatError(str(exc)) from exc
            raise BundleFormatError(f"malformed model bundle: {exc!r}") from exc

    def dumps(self) -> str:
        # json writes floats with repr(), the shortest exact round-trip form
        return json.dumps(self.to_document(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "ModelBundle":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise BundleFormatError(f"model bundle is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise BundleFormatError("model bundle must be a JSON object")
        return cls.from_document(doc)


PUBLISHED_BUNDLE = ModelBundle(
    sum_a=0.0000021890017149,
    sum_b=0.1470644998564126,
    small_a=0.0000002245645331,
    small_b=0.6009426920043296,
    small_c=-0.0605183610625299,
    big_a=0.0000000356594859,
    big_b=0.0522781620855163,
    big_c=0.3941472844770443,
    provenance={"fitted_on": "published RTX 2080 Ti FP64 coefficients"},
)


@dataclass(frozen=True)
class BenefitRow:
    n: int
    predicted_sum: float
    predicted_overhead: float
    benefit: float


@dataclass(frozen=True)
class Recommendation:
    slae_size: int
    chosen: int
    rows: tuple[BenefitRow, ...]
    model_used: Literal["small", "big"]

    def to_dict(self) -> dict:
        return {
            "slae_size": self.slae_size,
            "chosen": self.chosen,
            "model_used": self.model_used,
            "rows": [vars(r) for r in self.rows],
        }


def _check_size(slae_size) -> int:
    if isinstance(slae_size, bool) or int(slae_size) != slae_size or slae_size < 1:
        raise ValidationError(f"slae_size must be a positive integer, got {slae_size!r}")
    return int(slae_size)


def model_for(bundle: ModelBundle, slae_size: int) -> Literal["small", "big"]:
    return "small" if slae_size <= bundle.size_threshold else "big"


def predict_sum(bundle: ModelBundle, slae_size: int) -> float:
    return regression.sum_model(slae_size, bundle.sum_a, bundle.sum_b)


def predict_overhead(bundle: ModelBundle, slae_size: int, n: int) -> float:
    if n < 1:
        raise ValidationError(f"stream count must be >= 1, got {n}")
    if model_for(bundle, slae_size) == "small":
        return regression.overhead_small_model(slae_size, n, bundle.small_a, bundle.small_b, bundle.small_c)
    return regression.overhead_big_model(slae_size, n, bundle.big_a, bundle.big_b, bundle.big_c)


def recommend(bundle: ModelBundle, slae_size: int) -> Recommendation:
    slae_size = _check_size(slae_size)
    if slae_size > MAX_FITTED_SIZE:
        warnings.warn(
            f"slae_size {slae_size} exceeds the largest fitted size {MAX_FITTED_SIZE}; extrapolating",
            stacklevel=2,
        )
    s = predict_sum(bundle, slae_size)
    rows = []
    for n in bundle.candidates:
        ov = predict_overhead(bundle, slae_size, n)
        rows.append(BenefitRow(n, s, ov, overlap_benefit(n, s, ov)))
    chosen, best = 1, 0.0
    for r in rows:
        # strict > keeps the smaller n on ties
        if r.benefit > best:
            chosen, best = r.n, r.benefit
    return Recommendation(slae_size, chosen, tuple(rows), model_for(bundle, slae_size))


def recommend_fp32(bundle: ModelBundle, slae_size: int) -> int:
    """Single-precision rule of thumb: half the FP64 recommendation, at least 1."""
    return max(1, recommend(bundle, slae_size).chosen // 2)


def recommend_many(bundle: ModelBundle, sizes: Iterable[int], precision: str = "fp64") -> list[int]:
    if precision == "fp64":
        return [recommend(bundle, s).chosen for s in sizes]
    if precision == "fp32":
        return [recommend_fp32(bundle, s) for s in sizes]
    raise ValidationError(f"precision must be 'fp64' or 'fp32', got {precision!r}")


def gomez_luna_optimum(sum_ms: float, tau: float = TAU_RTX2080TI_MS) -> float:
    """Continuous optimum of ``sum / n + n * tau`` over ``n``.

    Baseline that charges a fixed ``tau`` per created stream. Setting the
    derivative ``-sum / n**2 + tau`` to zero gives ``sqrt(sum / tau)``.
    Rounding to a realizable stream count is left to the caller.
    """
    if not tau > 0:
        raise NonPositiveTauError(f"tau must be > 0, got {tau}")
    if sum_ms < 0:
        raise ValidationError(f"sum must be >= 0, got {sum_ms}")
    return math.sqrt(sum_ms / tau)


def scaled(bundle: ModelBundle, factor: float) -> ModelBundle:
    """Bundle with every sum and overhead coefficient multiplied by ``factor``."""
    return replace(
        bundle,
        **{k: getattr(bundle, k) * factor
           for k in ("sum_a", "sum_b", "small_a", "small_b", "small_c", "big_a", "big_b", "big_c")},
    )


__all__ = [
    "STREAM_COUNTS",
    "TAU_RTX2080TI_MS",
    "PUBLISHED_BUNDLE",
    "ModelBundle",
    "BenefitRow",
    "Recommendation",
    "predict_sum",
    "predict_overhead",
    "recommend",
    "recommend_fp32",
    "recommend_many",
    "gomez_luna_optimum",
    "scaled",
]
