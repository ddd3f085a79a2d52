"""Inter-rater agreement on value-source classifications.

Stakeholders rate each value source on two dimensions (business value,
usage).  Chance-corrected agreement is reported as kappa = (Po - Pe) /
(1 - Pe): Cohen's variant for exactly two raters, Fleiss' fixed-panel
variant for two or more.  Disagreements are listed explicitly so they can
be negotiated rather than averaged away.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from fractions import Fraction
from itertools import combinations


class Dimension(str, Enum):
    BUSINESS_VALUE = "business_value"
    USAGE = "usage"


@dataclass(frozen=True)
class RatingEvent:
    """One rater's classification of one value source on one dimension.

    Later timestamps supersede earlier ones for the same
    (rater, value source, dimension); categories are opaque labels.
    """

    rater_id: str
    value_source_id: str
    dimension: Dimension
    category: str
    timestamp: datetime


@dataclass(frozen=True)
class AgreementScore:
    kappa: float
    n_subjects: int
    n_raters: int
    n_categories: int
    observed_agreement: float
    expected_agreement: float
    method: str
    excluded_subjects: int = 0
    degenerate: bool = False


class NoCommonSubjects(Exception):
    """The two raters share no rated subject on the dimension."""


class NoCompleteSubjects(Exception):
    """No subject was rated by the full rater panel on the dimension."""


def effective_ratings(ratings: list[RatingEvent], dimension: Dimension) -> dict[tuple[str, str], str]:
    """Latest category per (rater, value source) for the dimension.

    Equal timestamps resolve to the later event in input order, so
    re-rating always replaces, never duplicates.
    """
    latest: dict[tuple[str, str], tuple[datetime, str]] = {}
    for event in ratings:
        if event.dimension != dimension:
            continue
        key = (event.rater_id, event.value_source_id)
        if key not in latest or event.timestamp >= latest[key][0]:
            latest[key] = (event.timestamp, event.category)
    return {key: category for key, (_, category) in latest.items()}


def _by_subject(effective: dict[tuple[str, str], str]) -> dict[str, dict[str, str]]:
    subjects: dict[str, dict[str, str]] = {}
    for (rater, subject), category in effective.items():
        subjects.setdefault(subject, {})[rater] = category
    return subjects


def _kappa_from(po: Fraction, pe: Fraction) -> tuple[float, bool]:
    # Pe == 1 makes the standard formula 0/0; it only happens when every
    # rating is one single category, which is full agreement.  Counts are
    # integers, so everything stays exact until the final float.
    if pe >= 1:
        return 1.0, True
    return float((po - pe) / (1 - pe)), False


def cohen_kappa(ratings: list[RatingEvent], dimension: Dimension, raters: tuple[str, str]) -> AgreementScore:
    """Two-rater kappa over the subjects both raters rated.

    Po is the share of common subjects with identical categories; Pe is the
    chance agreement from the two raters' marginal distributions.  Subjects
    rated by only one of the two raters are excluded and counted in
    ``excluded_subjects``.
    """
    rater_a, rater_b = raters
    effective = effective_ratings(ratings, dimension)
    subjects = _by_subject(effective)

    common: dict[str, tuple[str, str]] = {}
    excluded = 0
    for subject, per_rater in subjects.items():
        has_a, has_b = rater_a in per_rater, rater_b in per_rater
        if has_a and has_b:
            common[subject] = (per_rater[rater_a], per_rater[rater_b])
        elif has_a or has_b:
            excluded += 1
    if not common:
        raise NoCommonSubjects(f"raters {rater_a!r} and {rater_b!r} share no subject on {dimension.value}")

    n = len(common)
    categories = sorted({c for pair in common.values() for c in pair})
    agreements = sum(1 for a, b in common.values() if a == b)
    po = Fraction(agreements, n)
    pe = sum(
        (
            Fraction(sum(1 for a, _ in common.values() if a == cat), n)
            * Fraction(sum(1 for _, b in common.values() if b == cat), n)
        )
        for cat in categories
    )
    kappa, degenerate = _kappa_from(po, pe)
    return AgreementScore(
        kappa=kappa,
        n_subjects=n,
        n_raters=2,
        n_categories=len(categories),
        observed_agreement=float(po),
        expected_agreement=float(pe),
        method="cohen",
        excluded_subjects=excluded,
        degenerate=degenerate,
    )


def fleiss_kappa(ratings: list[RatingEvent], dimension: Dimension) -> AgreementScore:
    """Fixed-panel multi-rater kappa.

    The panel is every rater that rated the dimension; subjects missing any
    panel rater are excluded and counted in ``excluded_subjects``.  With
    n raters and category counts c_j per subject, per-subject agreement is
    (sum c_j^2 - n) / (n (n - 1)); Pe is the sum of squared marginal
    category shares.
    """
    effective = effective_ratings(ratings, dimension)
    subjects = _by_subject(effective)
    panel = sorted({rater for rater, _ in effective})
    n_raters = len(panel)
    if n_raters < 2:
        raise NoCompleteSubjects(f"need at least 2 raters on {dimension.value}, found {n_raters}")

    complete = {
        subject: per_rater
        for subject, per_rater in subjects.items()
        if set(per_rater) == set(panel)
    }
    excluded = len(subjects) - len(complete)
    if not complete:
        raise NoCompleteSubjects(f"no subject rated by the full {n_raters}-rater panel on {dimension.value}")

    categories = sorted({c for per_rater in complete.values() for c in per_rater.values()})
    n_subjects = len(complete)

    per_subject_agreement = []
    marginal_counts = {cat: 0 for cat in categories}
    for per_rater in complete.values():
        counts = {cat: 0 for cat in categories}
        for category in per_rater.values():
            counts[category] += 1
            marginal_counts[category] += 1
        sum_sq = sum(c * c for c in counts.values())
        per_subject_agreement.append(Fraction(sum_sq - n_raters, n_raters * (n_raters - 1)))

    po = sum(per_subject_agreement) / n_subjects
    total = n_subjects * n_raters
    pe = sum(Fraction(count, total) ** 2 for count in marginal_counts.values())
    kappa, degenerate = _kappa_from(po, pe)
    return AgreementScore(
        kappa=kappa,
        n_subjects=n_subjects,
        n_raters=n_raters,
        n_categories=len(categories),
        observed_agreement=float(po),
        expected_agreement=float(pe),
        method="fleiss",
        excluded_subjects=excluded,
        degenerate=degenerate,
    )


@dataclass(frozen=True)
class Disagreement:
    value_source_id: str
    ratings: dict[str, str]
    dissent: int

    def __lt__(self, other: "Disagreement") -> bool:
        return (-self.dissent, self.value_source_id) < (-other.dissent, other.value_source_id)


def disagreements(ratings: list[RatingEvent], dimension: Dimension) -> list[Disagreement]:
    """Subjects where at least two effective ratings differ.

    ``dissent`` counts the raters outside the largest camp; results sort by
    dissent descending, then subject id.
    """
    effective = effective_ratings(ratings, dimension)
    found = []
    for subject, per_rater in _by_subject(effective).items():
        if len(set(per_rater.values())) < 2:
            continue
        counts: dict[str, int] = {}
        for category in per_rater.values():
            counts[category] = counts.get(category, 0) + 1
        dissent = len(per_rater) - max(counts.values())
        found.append(Disagreement(value_source_id=subject, ratings=dict(sorted(per_rater.items())), dissent=dissent))
    return sorted(found)


def pairwise_scores(
    ratings: list[RatingEvent], dimension: Dimension
) -> dict[tuple[str, str], AgreementScore | None]:
    """Cohen's kappa for every rater pair; None where no common subject."""
    raters = sorted({e.rater_id for e in ratings if e.dimension == dimension})
    scores: dict[tuple[str, str], AgreementScore | None] = {}
    for pair in combinations(raters, 2):
        try:
            scores[pair] = cohen_kappa(ratings, dimension, pair)
        except NoCommonSubjects:
            scores[pair] = None
    return scores
