"""Study statistics: correlations between automatic distances and human
ratings, paired tests, effect sizes, Likert aggregation, and the report
builder that ties them together.

The Student-t tail probability is computed through the regularized
incomplete beta function (Lentz continued fraction), so no statistics
dependency is needed and accuracy is testable against an independent
numerical-integration oracle.

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .errors import (
    AllTied,
    DegenerateDifferences,
    LengthMismatch,
    MissingRatings,
    ParseError,
    TooFew,
    UnpairedStory,
    ZeroVariance,
)


# --- regularized incomplete beta and the Student-t distribution ---

_MAX_CF_ITER = 500
_CF_EPS = 1e-15
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified
    Lentz method)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_CF_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x < 0.0 or x > 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_tailed_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for T ~ Student-t with df degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def student_t_quantile(p: float, df: float) -> float:
    """Inverse CDF for p in (0.5, 1), by bisection on the tail probability."""
    if not 0.5 < p < 1.0:
        raise ValueError("quantile implemented for p in (0.5, 1)")
    tail = 2.0 * (1.0 - p)  # two-tailed mass outside +-t
    lo, hi = 0.0, 1.0
    while student_t_two_tailed_p(hi, df) > tail:
        hi *= 2.0
        if hi > 1e12:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if student_t_two_tailed_p(mid, df) > tail:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --- descriptive helpers ---

def _mean(x: Sequence[float]) -> float:
    return math.fsum(x) / len(x)


def _sample_sd(x: Sequence[float]) -> float:
    m = _mean(x)
    return math.sqrt(math.fsum((v - m) ** 2 for v in x) / (len(x) - 1))


# --- correlations ---

def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} vs {len(y)}")
    n = len(x)
    if n < 3:
        raise LengthMismatch("need at least 3 observations")
    mx, my = _mean(x), _mean(y)
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("an argument is constant")
    return sxy / math.sqrt(sxx * syy)


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Tie-corrected (tau-b) Kendall rank correlation by pair counting."""
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} vs {len(y)}")
    n = len(x)
    if n < 3:
        raise LengthMismatch("need at least 3 observations")
    concordant = discordant = tied_x_only = tied_y_only = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                tied_x_only += 1
            elif dy == 0:
                tied_y_only += 1
            elif (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    cd = concordant + discordant
    denom = math.sqrt((cd + tied_x_only) * (cd + tied_y_only))
    if denom == 0.0:
        raise AllTied("an argument has no untied pairs")
    return (concordant - discordant) / denom


# --- paired comparisons ---

@dataclass
class PairedTResult:
    t: float
    df: int
    p_two_tailed: float


def _differences(a: Sequence[float], b: Sequence[float]) -> list[float]:
    if len(a) != len(b):
        raise LengthMismatch(f"{len(a)} vs {len(b)}")
    if len(a) < 2:
        raise LengthMismatch("need at least 2 pairs")
    d = [ai - bi for ai, bi in zip(a, b)]
    if _sample_sd(d) == 0.0:
        raise DegenerateDifferences("differences have zero variance")
    return d


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> PairedTResult:
    d = _differences(a, b)
    n = len(d)
    t = _mean(d) / (_sample_sd(d) / math.sqrt(n))
    return PairedTResult(t=t, df=n - 1,
                         p_two_tailed=student_t_two_tailed_p(t, n - 1))


def cohens_d_paired(a: Sequence[float], b: Sequence[float]) -> float:
    d = _differences(a, b)
    return _mean(d) / _sample_sd(d)


def ci95_mean(x: Sequence[float]) -> tuple[float, float]:
    if len(x) < 2:
        raise TooFew("need at least 2 observations")
    sd = _sample_sd(x)
    if sd == 0.0:
        raise ZeroVariance("constant data")
    m = _mean(x)
    half = student_t_quantile(0.975, len(x) - 1) * sd / math.sqrt(len(x))
    return m - half, m + half


# --- Likert ratings ---

class Condition(str, Enum):
    ROLE = "ROLE"
    NO_ROLE = "NO_ROLE"


class Aspect(str, Enum):
    RELEVANCE = "RELEVANCE"
    LEGITIMATE = "LEGITIMATE"
    CREATIVE = "CREATIVE"
    INTERESTING = "INTERESTING"
    WILLING_TO_READ = "WILLING_TO_READ"
    SURPRISING = "SURPRISING"


class Level(str, Enum):
    ITEM = "ITEM"
    STORY = "STORY"


@dataclass
class RatingRecord:
    item_id: str
    story_id: str
    condition: Condition
    aspect: Aspect
    rater_id: str
    score: int

    def __post_init__(self):
        if self.score not in (1, 2, 3, 4, 5):
            raise ValueError(f"score {self.score} outside 1..5")


def aggregate_likert(records: Sequence[RatingRecord], aspect: Aspect,
                     condition: Condition, level: Level = Level.ITEM
                     ) -> dict[str, float]:
    """Mean rating per item, or per story (mean of its item means).

    Keys are item ids or story ids.  An item that exists in the condition
    but carries no rating for the aspect is an error, not a silent skip.
    """
    aspect, condition, level = Aspect(aspect), Condition(condition), Level(level)
    items: dict[str, list[int]] = {}
    story_of: dict[str, str] = {}
    universe: set[str] = set()
    for rec in records:
        if rec.condition is not condition:
            continue
        universe.add(rec.item_id)
        story_of[rec.item_id] = rec.story_id
        if rec.aspect is aspect:
            items.setdefault(rec.item_id, []).append(rec.score)
    missing = universe - set(items)
    if missing:
        raise MissingRatings(
            f"items without {aspect.value} ratings: {sorted(missing)}")
    item_means = {iid: _mean(scores) for iid, scores in items.items()}
    if level is Level.ITEM:
        return item_means
    stories: dict[str, list[float]] = {}
    for iid, m in item_means.items():
        stories.setdefault(story_of[iid], []).append(m)
    return {sid: _mean(ms) for sid, ms in stories.items()}


# --- study report ---

@dataclass
class ConditionStats:
    mean: float
    ci95_low: float
    ci95_high: float


@dataclass
class AspectComparison:
    t: float
    df: int
    p_two_tailed: float
    cohens_d: float  # reported as NO_ROLE minus ROLE


@dataclass
class MetricCorrelation:
    pearson_rho: float
    kendall_tau: float
    n_items: int
    expected_negative: bool = True


@dataclass
class StudyReport:
    conditions: dict[str, dict[str, ConditionStats]] = field(default_factory=dict)
    comparisons: dict[str, AspectComparison] = field(default_factory=dict)
    correlations: dict[str, MetricCorrelation] = field(default_factory=dict)
    n_stories: int = 0


def load_ratings_csv(path: str) -> list[RatingRecord]:
    expected = ["item_id", "story_id", "condition", "aspect", "rater_id", "score"]
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != expected:
            raise ParseError(f"ratings header must be {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                records.append(RatingRecord(
                    item_id=row["item_id"],
                    story_id=row["story_id"],
                    condition=Condition(row["condition"]),
                    aspect=Aspect(row["aspect"]),
                    rater_id=row["rater_id"],
                    score=int(row["score"]),
                ))
            except (ValueError, TypeError) as exc:
                raise ParseError(f"ratings line {lineno}: {exc}", line=lineno)
    return records


def load_distances_csv(path: str) -> dict[str, dict[str, float]]:
    """Returns metric -> item_id -> distance."""
    expected = ["item_id", "metric", "distance"]
    out: dict[str, dict[str, float]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != expected:
            raise ParseError(f"distances header must be {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                out.setdefault(row["metric"], {})[row["item_id"]] = float(row["distance"])
            except (ValueError, TypeError) as exc:
                raise ParseError(f"distances line {lineno}: {exc}", line=lineno)
    return out


def build_study_report(ratings_path: str, distances_path: str) -> StudyReport:
    """Aggregate ratings and automatic distances into the full report:
    per-aspect condition means with 95% CIs, story-level paired tests and
    effect sizes, and distance-vs-relevance correlations."""
    records = load_ratings_csv(ratings_path)
    distances = load_distances_csv(distances_path)

    stories = {c: {r.story_id for r in records if r.condition is c}
               for c in Condition}
    unpaired = stories[Condition.ROLE] ^ stories[Condition.NO_ROLE]
    if unpaired:
        raise UnpairedStory(f"stories present in one condition only: {sorted(unpaired)}")
    story_ids = sorted(stories[Condition.ROLE])
    if len(story_ids) < 2:
        raise TooFew("need at least 2 paired stories")

    aspects = sorted({r.aspect for r in records}, key=lambda a: a.value)
    report = StudyReport(n_stories=len(story_ids))
    for aspect in aspects:
        per_cond = {}
        for cond in Condition:
            story_means = aggregate_likert(records, aspect, cond, Level.STORY)
            values = [story_means[s] for s in story_ids]
            low, high = ci95_mean(values)
            per_cond[cond] = values
            report.conditions.setdefault(aspect.value, {})[cond.value] = \
                ConditionStats(mean=_mean(values), ci95_low=low, ci95_high=high)
        a = per_cond[Condition.NO_ROLE]
        b = per_cond[Condition.ROLE]
        tres = paired_t_test(a, b)
        report.comparisons[aspect.value] = AspectComparison(
            t=tres.t, df=tres.df, p_two_tailed=tres.p_two_tailed,
            cohens_d=cohens_d_paired(a, b))

    relevance: dict[str, float] = {}
    for cond in Condition:
        relevance.update(aggregate_likert(records, Aspect.RELEVANCE, cond, Level.ITEM))
    for metric in sorted(distances):
        per_item = distances[metric]
        common = sorted(set(per_item) & set(relevance))
        xs = [per_item[i] for i in common]
        ys = [relevance[i] for i in common]
        report.correlations[metric] = MetricCorrelation(
            pearson_rho=pearson(xs, ys),
            kendall_tau=kendall_tau(xs, ys),
            n_items=len(common))
    return report
