"""Pre/post survey statistics: factor scores, normality screening, paired
tests, and the paired-samples effect size.

The pipeline per factor is: descriptives, Shapiro-Wilk on the paired
differences, a two-tailed paired t-test (always), a Wilcoxon signed-rank
test additionally when normality is rejected, then the effect size

    d = mean(x_a - x_b) / sqrt( n/(n-1) * (s_a^2 + s_b^2 - 2*s_ab) )

with s_a^2, s_b^2, s_ab the population (divide-by-n) moments, which makes
the denominator the unbiased standard deviation of the differences and
ties the statistic to the paired t via t = sqrt(n) * d.

The Shapiro-Wilk implementation follows Royston's 1995 approximation
(order-statistic weights from Blom scores with polynomial corrections for
the two extreme weights, then a normalizing transform of 1 - W).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .ingestion import ParseError, SurveyResponseSet
from .numerics import normal_quantile, normal_sf, student_t_two_sided_p

logger = logging.getLogger(__name__)

SD_BASIS = "unbiased (n-1)"  # reported descriptive SDs use the sample formula


class StatsError(ValueError):
    pass


class SampleSizeError(StatsError):
    pass


class ZeroVarianceError(StatsError):
    pass


@dataclass(frozen=True)
class InstrumentDefinition:
    """Named factors over ordered Likert items."""

    instrument_id: str
    factors: tuple[tuple[str, tuple[str, ...]], ...]
    scale_min: int = 1
    scale_max: int = 7

    def __post_init__(self) -> None:
        if not self.factors:
            raise ValueError("instrument needs at least one factor")
        items = self.item_ids()
        if len(set(items)) != len(items):
            raise ValueError("item ids must be unique across factors")
        if any(not ids for _, ids in self.factors):
            raise ValueError("every factor needs at least one item")
        if self.scale_min >= self.scale_max:
            raise ValueError("scale_min must be below scale_max")

    def item_ids(self) -> tuple[str, ...]:
        return tuple(item for _, items in self.factors for item in items)

    def factor_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.factors)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "InstrumentDefinition":
        try:
            factors = tuple(
                (f["name"], tuple(f["items"])) for f in doc["factors"]
            )
            return cls(
                instrument_id=doc["instrument_id"],
                factors=factors,
                scale_min=int(doc.get("scale_min", 1)),
                scale_max=int(doc.get("scale_max", 7)),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"invalid instrument definition: {exc}") from exc

    @classmethod
    def from_json(cls, data: bytes) -> "InstrumentDefinition":
        return cls.from_dict(json.loads(data.decode("utf-8")))


def _items(prefix: str, start: int, count: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i:02d}" for i in range(start, start + count))


# Behavioral-intention instrument: 16 items over four factors (4/6/3/3).
TPB_INSTRUMENT = InstrumentDefinition(
    instrument_id="TPB",
    factors=(
        ("intention", _items("i", 1, 4)),
        ("attitude", _items("i", 5, 6)),
        ("subjective_norm", _items("i", 11, 3)),
        ("behavioral_control", _items("i", 14, 3)),
    ),
)

# Dashboard-success instrument: 28 items over five factors.  The published
# instrument fixes only the factor names and the 28-item total; the
# per-factor split below is this deployment's default and is overridable
# through a custom instrument definition.
LADS_INSTRUMENT = InstrumentDefinition(
    instrument_id="LADS",
    factors=(
        ("visual_attraction", _items("i", 1, 5)),
        ("usability", _items("i", 6, 6)),
        ("understanding_level", _items("i", 12, 5)),
        ("perceived_usefulness", _items("i", 17, 6)),
        ("behavioral_changes", _items("i", 23, 6)),
    ),
)

_PRESETS = {"tpb": TPB_INSTRUMENT, "lads": LADS_INSTRUMENT}


def get_instrument(name: str) -> InstrumentDefinition:
    try:
        return _PRESETS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown instrument '{name}'; presets: {sorted(_PRESETS)}") from None


@dataclass(frozen=True)
class PairedSample:
    """Per-respondent (x_a, x_b) score pairs for one factor."""

    factor_name: str
    pairs: tuple[tuple[str, float, float], ...]

    def __post_init__(self) -> None:
        ids = [r for r, _, _ in self.pairs]
        if len(set(ids)) != len(ids):
            raise ValueError("each respondent may appear only once")

    @property
    def n(self) -> int:
        return len(self.pairs)

    def differences(self) -> list[float]:
        return [a - b for _, a, b in self.pairs]


@dataclass(frozen=True)
class EffectSize:
    d_abs: float
    mean_diff: float
    s_d: float
    s_a_sq: float
    s_b_sq: float
    s_ab: float

    @property
    def d(self) -> float:
        return self.mean_diff / self.s_d

    def to_dict(self) -> dict:
        return {
            "d_abs": self.d_abs,
            "mean_diff": self.mean_diff,
            "s_d": self.s_d,
            "s_a_sq": self.s_a_sq,
            "s_b_sq": self.s_b_sq,
            "s_ab": self.s_ab,
        }


@dataclass(frozen=True)
class TestReport:
    factor_name: str
    n: int
    mean_pre: float
    sd_pre: float
    mean_post: float
    sd_post: float
    shapiro_w: float | None = None
    shapiro_p: float | None = None
    normal: bool | None = None
    t_stat: float | None = None
    t_p: float | None = None
    df: int | None = None
    wilcoxon_stat: float | None = None
    wilcoxon_p: float | None = None
    wilcoxon_method: str | None = None
    effect: EffectSize | None = None
    stars: str = ""
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "factor_name": self.factor_name,
            "n": self.n,
            "mean_pre": self.mean_pre,
            "sd_pre": self.sd_pre,
            "mean_post": self.mean_post,
            "sd_post": self.sd_post,
            "shapiro_w": self.shapiro_w,
            "shapiro_p": self.shapiro_p,
            "normal": self.normal,
            "t_stat": self.t_stat,
            "t_p": self.t_p,
            "df": self.df,
            "wilcoxon_stat": self.wilcoxon_stat,
            "wilcoxon_p": self.wilcoxon_p,
            "wilcoxon_method": self.wilcoxon_method,
            "effect": self.effect.to_dict() if self.effect else None,
            "stars": self.stars,
            "error": self.error,
        }


def stars_for(p: float) -> str:
    """Significance stars; thresholds are right-open (p = 0.01 earns '*')."""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def factor_scores(
    responses: Iterable[SurveyResponseSet], instrument: InstrumentDefinition
) -> dict[tuple[str, str, str], float]:
    """Mean item value per (respondent, phase, factor)."""
    scores: dict[tuple[str, str, str], float] = {}
    seen: set[tuple[str, str]] = set()
    for response in responses:
        key = (response.respondent_id, response.phase)
        if key in seen:
            raise StatsError(f"duplicate {response.phase} response for '{response.respondent_id}'")
        seen.add(key)
        values = dict(response.answers)
        for factor_name, item_ids in instrument.factors:
            try:
                vals = [values[item] for item in item_ids]
            except KeyError as exc:
                raise StatsError(
                    f"respondent '{response.respondent_id}' is missing item {exc}"
                ) from None
            scores[(response.respondent_id, response.phase, factor_name)] = math.fsum(
                vals
            ) / len(vals)
    return scores


def build_paired_samples(
    pre: Iterable[SurveyResponseSet],
    post: Iterable[SurveyResponseSet],
    instrument: InstrumentDefinition,
) -> tuple[list[PairedSample], list[str]]:
    """Pair pre/post factor scores per respondent; unpaired ids are excluded."""
    pre_scores = factor_scores(pre, instrument)
    post_scores = factor_scores(post, instrument)
    pre_ids = {r for r, phase, _ in pre_scores if phase == "pre"}
    post_ids = {r for r, phase, _ in post_scores if phase == "post"}
    paired = sorted(pre_ids & post_ids)
    excluded = sorted(pre_ids ^ post_ids)
    if excluded:
        logger.info("excluding unpaired respondents: %s", ", ".join(excluded))
    samples = []
    for factor_name in instrument.factor_names():
        samples.append(
            PairedSample(
                factor_name=factor_name,
                pairs=tuple(
                    (
                        rid,
                        pre_scores[(rid, "pre", factor_name)],
                        post_scores[(rid, "post", factor_name)],
                    )
                    for rid in paired
                ),
            )
        )
    return samples, excluded


# Shapiro-Wilk polynomial coefficients (ascending powers).
_SW_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_SW_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_SW_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_SW_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_SW_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_SW_C6 = (-0.4803, -0.082676, 0.0030302)
_SW_G = (-2.273, 0.459)


def _poly(coeffs: Sequence[float], x: float) -> float:
    result = 0.0
    for c in reversed(coeffs):
        result = result * x + c
    return result


def _sw_weights_upper(n: int) -> list[float]:
    """Weight magnitudes for the k-th largest order statistics, k = 1..n//2."""
    nn2 = n // 2
    if n == 3:
        return [math.sqrt(0.5)]
    an25 = n + 0.25
    m = [normal_quantile((i - 0.375) / an25) for i in range(1, nn2 + 1)]  # negative half
    summ2 = 2.0 * math.fsum(v * v for v in m)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a1 = _poly(_SW_C1, rsn) - m[0] / ssumm2
    if n > 5:
        a2 = _poly(_SW_C2, rsn) - m[1] / ssumm2
        fac = math.sqrt(
            (summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2)
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)
        )
        return [a1, a2] + [-v / fac for v in m[2:]]
    fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1 * a1))
    return [a1] + [-v / fac for v in m[1:]]


def _sw_pvalue(w: float, n: int) -> float:
    if w >= 1.0:
        return 1.0
    if n == 3:  # exact small-sample distribution
        p = 1.90985931710274 * (math.asin(math.sqrt(w)) - 1.04719755119660)
        return min(max(p, 0.0), 1.0)
    y = math.log(1.0 - w)
    if n <= 11:
        gamma = _poly(_SW_G, float(n))
        if y >= gamma:
            return 1e-99
        y = -math.log(gamma - y)
        mu = _poly(_SW_C3, float(n))
        sigma = math.exp(_poly(_SW_C4, float(n)))
    else:
        ln_n = math.log(n)
        mu = _poly(_SW_C5, ln_n)
        sigma = math.exp(_poly(_SW_C6, ln_n))
    return normal_sf((y - mu) / sigma)


def shapiro_wilk(sample: Sequence[float]) -> tuple[float, float]:
    """Shapiro-Wilk normality test; returns (W, p) for 3 <= n <= 5000."""
    xs = sorted(float(v) for v in sample)
    n = len(xs)
    if n < 3 or n > 5000:
        raise SampleSizeError(f"Shapiro-Wilk requires 3 <= n <= 5000, got {n}")
    if xs[0] == xs[-1]:
        raise ZeroVarianceError("all sample values are identical")
    weights = _sw_weights_upper(n)
    mean = math.fsum(xs) / n
    ssq = math.fsum((x - mean) ** 2 for x in xs)
    num = math.fsum(weights[k] * (xs[n - 1 - k] - xs[k]) for k in range(len(weights)))
    w = min(1.0, num * num / ssq)
    return w, _sw_pvalue(w, n)


def paired_t_test(sample: PairedSample) -> tuple[float, float, int]:
    """Two-tailed paired t-test; returns (t, p, df)."""
    if sample.n < 2:
        raise SampleSizeError(f"paired t-test requires n >= 2, got {sample.n}")
    diffs = sample.differences()
    n = len(diffs)
    mean_d = math.fsum(diffs) / n
    ss = math.fsum((d - mean_d) ** 2 for d in diffs)
    if ss == 0.0:
        raise ZeroVarianceError("differences have zero variance")
    sd = math.sqrt(ss / (n - 1))
    t = mean_d / (sd / math.sqrt(n))
    df = n - 1
    return t, student_t_two_sided_p(t, df), df


def _average_ranks(values: Sequence[float]) -> tuple[list[float], bool]:
    """Average ranks of |values|; also reports whether any tie occurred."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    tied = False
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j + 2) / 2.0  # positions i..j carry ranks i+1..j+1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        tied = tied or j > i
        i = j + 1
    return ranks, tied


def _signed_rank_counts(n: int) -> list[int]:
    """counts[s] = number of subsets of ranks {1..n} summing to s."""
    max_sum = n * (n + 1) // 2
    counts = [0] * (max_sum + 1)
    counts[0] = 1
    for rank in range(1, n + 1):
        for s in range(max_sum, rank - 1, -1):
            counts[s] += counts[s - rank]
    return counts


WILCOXON_EXACT_MAX_N = 25


def wilcoxon_signed_rank(sample: PairedSample) -> tuple[float, float, str]:
    """Two-sided Wilcoxon signed-rank test; returns (stat, p, method).

    Zero differences are dropped; tied magnitudes get average ranks.  The
    p-value comes from the exact signed-rank distribution when the
    effective n is at most 25 and no ties exist, otherwise from the normal
    approximation with tie and continuity corrections.  The statistic is
    the smaller of the positive- and negative-rank sums.
    """
    diffs = [d for d in sample.differences() if d != 0.0]
    if not diffs:
        raise ZeroVarianceError("all differences are zero")
    n = len(diffs)
    if n < 3:
        raise SampleSizeError(f"Wilcoxon requires n >= 3 after dropping zeros, got {n}")
    ranks, tied = _average_ranks([abs(d) for d in diffs])
    r_plus = math.fsum(r for r, d in zip(ranks, diffs) if d > 0)
    r_minus = math.fsum(r for r, d in zip(ranks, diffs) if d < 0)
    stat = min(r_plus, r_minus)

    if n <= WILCOXON_EXACT_MAX_N and not tied:
        counts = _signed_rank_counts(n)
        total = 2**n
        w = int(round(r_plus))
        cdf = sum(counts[: w + 1]) / total
        sf = sum(counts[w:]) / total
        return stat, min(1.0, 2.0 * min(cdf, sf)), "exact"

    mean_w = n * (n + 1) / 4.0
    variance = n * (n + 1) * (2 * n + 1) / 24.0
    # Tie correction: subtract sum(t^3 - t)/48 over tied groups of |d|.
    group_sizes: dict[float, int] = {}
    for d in diffs:
        group_sizes[abs(d)] = group_sizes.get(abs(d), 0) + 1
    variance -= sum(t**3 - t for t in group_sizes.values()) / 48.0
    se = math.sqrt(variance)
    shift = 0.0
    if r_plus > mean_w:
        shift = 0.5
    elif r_plus < mean_w:
        shift = -0.5
    z = (r_plus - mean_w - shift) / se
    return stat, min(1.0, 2.0 * normal_sf(abs(z))), "approx"


def effect_size_dd(sample: PairedSample) -> EffectSize:
    """Paired-samples standardized mean difference.

    The covariance decomposition uses population (divide-by-n) moments;
    the n/(n-1) factor then makes the denominator the unbiased standard
    deviation of the differences.
    """
    if sample.n < 2:
        raise SampleSizeError(f"effect size requires n >= 2, got {sample.n}")
    n = sample.n
    xa = [a for _, a, _ in sample.pairs]
    xb = [b for _, _, b in sample.pairs]
    mean_a = math.fsum(xa) / n
    mean_b = math.fsum(xb) / n
    s_a_sq = math.fsum((a - mean_a) ** 2 for a in xa) / n
    s_b_sq = math.fsum((b - mean_b) ** 2 for b in xb) / n
    s_ab = math.fsum((a - mean_a) * (b - mean_b) for a, b in zip(xa, xb)) / n
    var_d = (n / (n - 1)) * (s_a_sq + s_b_sq - 2.0 * s_ab)
    if var_d <= 0.0:
        raise ZeroVarianceError("differences have zero variance; effect size undefined")
    s_d = math.sqrt(var_d)
    mean_diff = math.fsum(sample.differences()) / n
    d = mean_diff / s_d
    return EffectSize(
        d_abs=abs(d), mean_diff=mean_diff, s_d=s_d, s_a_sq=s_a_sq, s_b_sq=s_b_sq, s_ab=s_ab
    )


def _descriptives(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    sd = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1)) if n > 1 else 0.0
    return mean, sd


def run_comparison(
    pre: Iterable[SurveyResponseSet],
    post: Iterable[SurveyResponseSet],
    instrument: InstrumentDefinition,
    alpha_normality: float = 0.05,
) -> list[TestReport]:
    """Full per-factor comparison pipeline.

    Factors are processed independently: a degenerate factor (for example
    zero-variance differences) yields a report carrying the error message
    while the remaining factors still compute.
    """
    samples, _ = build_paired_samples(pre, post, instrument)
    reports = []
    for sample in samples:
        reports.append(_compare_factor(sample, alpha_normality))
    return reports


def _compare_factor(sample: PairedSample, alpha_normality: float) -> TestReport:
    if sample.n == 0:
        mean_pre = sd_pre = mean_post = sd_post = math.nan
    else:
        mean_pre, sd_pre = _descriptives([a for _, a, _ in sample.pairs])
        mean_post, sd_post = _descriptives([b for _, _, b in sample.pairs])
    if sample.n < 3:
        return TestReport(
            factor_name=sample.factor_name,
            n=sample.n,
            mean_pre=mean_pre,
            sd_pre=sd_pre,
            mean_post=mean_post,
            sd_post=sd_post,
            error=f"needs at least 3 paired respondents, got {sample.n}",
        )
    notes: list[str] = []

    shapiro_w = shapiro_p = None
    normal = None
    try:
        shapiro_w, shapiro_p = shapiro_wilk(sample.differences())
        normal = shapiro_p >= alpha_normality
    except StatsError as exc:
        notes.append(f"shapiro_wilk: {exc}")

    t_stat = t_p = None
    df = None
    stars = ""
    try:
        t_stat, t_p, df = paired_t_test(sample)
        stars = stars_for(t_p)
    except StatsError as exc:
        notes.append(f"paired_t_test: {exc}")

    wilcoxon_stat = wilcoxon_p = None
    wilcoxon_method = None
    if normal is False:
        try:
            wilcoxon_stat, wilcoxon_p, wilcoxon_method = wilcoxon_signed_rank(sample)
        except StatsError as exc:
            notes.append(f"wilcoxon_signed_rank: {exc}")

    effect = None
    try:
        effect = effect_size_dd(sample)
    except StatsError as exc:
        notes.append(f"effect_size_dd: {exc}")

    return TestReport(
        factor_name=sample.factor_name,
        n=sample.n,
        mean_pre=mean_pre,
        sd_pre=sd_pre,
        mean_post=mean_post,
        sd_post=sd_post,
        shapiro_w=shapiro_w,
        shapiro_p=shapiro_p,
        normal=normal,
        t_stat=t_stat,
        t_p=t_p,
        df=df,
        wilcoxon_stat=wilcoxon_stat,
        wilcoxon_p=wilcoxon_p,
        wilcoxon_method=wilcoxon_method,
        effect=effect,
        stars=stars,
        error="; ".join(notes) if notes else None,
    )


def render_markdown(reports: Sequence[TestReport], labels: tuple[str, str] = ("pre", "post")) -> str:
    """Markdown table in the published comparison layout."""
    lines = [
        f"| Factor | {labels[0]} mean (SD) | {labels[1]} mean (SD) | t | \\|d_D\\| |",
        "|---|---|---|---|---|",
    ]
    for r in reports:
        if r.error and r.t_stat is None:
            t_cell = "n/a"
        else:
            t_cell = f"{r.t_stat:.2f}{r.stars}"
        d_cell = f"{r.effect.d_abs:.2f}" if r.effect else "n/a"
        lines.append(
            f"| {r.factor_name} | {r.mean_pre:.2f} ({r.sd_pre:.2f}) "
            f"| {r.mean_post:.2f} ({r.sd_post:.2f}) | {t_cell} | {d_cell} |"
        )
    return "\n".join(lines) + "\n"


def reports_to_json(reports: Sequence[TestReport]) -> list[dict]:
    return [r.to_dict() for r in reports]


def parse_survey_pair(
    pre_csv: bytes, post_csv: bytes, instrument: InstrumentDefinition
):
    """Parse a pre/post CSV pair, failing loudly on any rejected row.

    Statistics over silently partial survey data would be misleading, so
    row rejects in either file raise :class:`ParseError` here.
    """
    from .ingestion import parse_survey_csv

    parsed = {}
    for phase, data in (("pre", pre_csv), ("post", post_csv)):
        result = parse_survey_csv(data, instrument)
        if result.rejects:
            detail = "; ".join(f"line {r.line}: {r.reason}" for r in result.rejects[:5])
            raise ParseError(
                f"{len(result.rejects)} rejected row(s) in {phase} survey: {detail}",
                f"{phase} survey",
            )
        parsed[phase] = [r for r in result.responses if r.phase == phase]
    return parsed["pre"], parsed["post"]
