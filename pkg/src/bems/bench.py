"""Benchmark harness: the scoring rubric, the battery runner with its
per-query logs, metric aggregation, and the statistics used for the
cross-building generalizability analysis (one-way ANOVA, Tukey HSD,
Pearson correlation).

Scoring is a pure function of (machine-readable run log, query), so
re-scoring archived logs reproduces a report exactly.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

from .agent import AgentEnvironment, SimulatedClock, run_query
from .battery import (
    BenchmarkQuery,
    Comparator,
    build_battery,
    build_environment,
)
from .core import SECONDARY_TO_PRIMARY, TokenUsage
from .memstore import MemoryStore
from .provider import NEEDS_CLARIFICATION, Provider, ScriptedProvider

OUTLIER_THRESHOLD_S = 600.0

_TOOL_CATEGORY = {
    "analysis.run": "analysis",
    "pricing.search": "analysis",
    "meters.query": "device",
    "devices.sync": "device",
    "devices.query": "device",
    "devices.execute": "device",
    "schedule.create": "schedule",
    "schedule.sync": "schedule",
    "schedule.change": "schedule",
    "memory.create": "memory",
    "memory.sync": "memory",
    "memory.change": "memory",
}

METRICS = (
    "latency_s",
    "tool_call_score",
    "response_score",
    "classification_executed",
    "primary_correct",
    "secondary_correct",
    "total_tokens",
    "cost_dollars",
)


class BenchError(Exception):
    pass


@dataclass
class ScoreCard:
    """One scored query: the per-query row of the benchmark."""

    building_id: str
    query_id: str
    primary: str
    secondary: str
    latency_s: float
    classification_executed: bool
    primary_correct: bool
    secondary_correct: bool
    tool_call_count: int
    tool_counts: dict[str, int]
    tool_call_score: float
    response_score: float
    prompt_tokens: int
    completion_tokens: int
    total_tokens: int
    cost_dollars: float

    def metric(self, name: str) -> float:
        value = getattr(self, name)
        return float(value)

    def to_dict(self) -> dict[str, Any]:
        return {
            "building_id": self.building_id,
            "query_id": self.query_id,
            "primary": self.primary,
            "secondary": self.secondary,
            "latency_s": self.latency_s,
            "classification_executed": self.classification_executed,
            "primary_correct": self.primary_correct,
            "secondary_correct": self.secondary_correct,
            "tool_call_count": self.tool_call_count,
            "tool_counts": self.tool_counts,
            "tool_call_score": self.tool_call_score,
            "response_score": self.response_score,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "total_tokens": self.total_tokens,
            "cost_dollars": self.cost_dollars,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScoreCard":
        return cls(**d)


_NUMBER = re.compile(r"-?\d[\d,]*(?:\.\d+)?")


def _extract_numbers(text: str) -> list[float]:
    return [float(m.group(0).replace(",", "")) for m in _NUMBER.finditer(text)]


def _within(value: float, expected: float, rel: float, abs_: float) -> bool:
    return abs(value - expected) <= max(abs_, rel * abs(expected))


def _tool_call_score(called: set[str], expected: frozenset[str]) -> float:
    allowed_categories = {_TOOL_CATEGORY.get(t) for t in expected}
    wrong_category = any(_TOOL_CATEGORY.get(t) not in allowed_categories for t in called)
    if called >= expected and not wrong_category:
        return 1.0
    if called and called < expected:
        return 0.5
    return 0.0


def _response_score(run: dict[str, Any], query: BenchmarkQuery, called: set[str]) -> float:
    # Clarification turns are scored by the ambiguity flag, not the comparator.
    if run.get("response_type") == NEEDS_CLARIFICATION:
        return 0.5 if query.ambiguous else 0.0
    spec = query.answer_spec
    text = run.get("response", "")
    if spec.kind == "numeric":
        numbers = _extract_numbers(text)
        if not numbers:
            return 0.0
        if any(_within(n, spec.expected, spec.rel_tol, spec.abs_tol) for n in numbers):
            return 1.0
        # off-tolerance but the method (the expected tools) was sound
        return 0.5 if query.expected_tools <= called else 0.0
    if spec.kind == "set":
        lowered = text.lower()
        hits = sum(1 for item in spec.expected if str(item).lower() in lowered)
        if hits == len(spec.expected):
            return 1.0
        return 0.5 if hits else 0.0
    if spec.kind == "state_diff":
        applied: dict[tuple[str, str], Any] = {}
        for entry in run.get("audit_entries", []):
            if entry.get("applied"):
                applied[(entry["device_id"], entry["attribute"])] = entry["requested"]
        hits = sum(
            1 for device_id, attribute, value in spec.expected
            if applied.get((device_id, attribute)) == value
        )
        if hits == len(spec.expected):
            return 1.0
        return 0.5 if hits else 0.0
    if spec.kind == "response_type":
        return 1.0 if run.get("response_type") == spec.expected else 0.0
    if spec.kind == "artifact":
        kinds = [a.get("type") for a in run.get("artifacts", [])]
        if spec.expected in kinds:
            return 1.0
        return 0.5 if kinds else 0.0
    raise BenchError(f"unknown comparator kind {spec.kind!r}")


def score_run(run: dict[str, Any], query: BenchmarkQuery) -> ScoreCard:
    """Score one completed run document against its benchmark query.

    Pure: consumes only the machine-readable log (which embeds the
    relevant audit slice) and the query definition.
    """
    if run.get("state") != "end":
        raise BenchError(f"run {run.get('run_id')!r} has not ended")
    tool_counts: dict[str, int] = {}
    for call in run.get("tool_calls", []):
        tool_counts[call["tool"]] = tool_counts.get(call["tool"], 0) + 1
    called = set(tool_counts)
    classification = run.get("classification")
    label = query.ground_truth_label
    usage = run.get("token_usage", {})
    return ScoreCard(
        building_id=run.get("building_id", ""),
        query_id=query.query_id,
        primary=label.primary,
        secondary=label.secondary,
        latency_s=float(run.get("wall_time", 0.0)),
        classification_executed=classification is not None,
        primary_correct=bool(classification and classification["primary"] == label.primary),
        secondary_correct=bool(classification and classification["secondary"] == label.secondary),
        tool_call_count=sum(tool_counts.values()),
        tool_counts=tool_counts,
        tool_call_score=_tool_call_score(called, query.expected_tools),
        response_score=_response_score(run, query, called),
        prompt_tokens=usage.get("prompt_tokens", 0),
        completion_tokens=usage.get("completion_tokens", 0),
        total_tokens=usage.get("total", 0),
        cost_dollars=usage.get("cost", 0.0),
    )


# -- the battery runner -------------------------------------------------------


@dataclass
class BatteryResult:
    building_id: str
    cards: list[ScoreCard]
    run_docs: list[dict[str, Any]]


def _log_paths(out_dir: Path, building_id: str) -> tuple[Path, Path, Path]:
    results = out_dir / f"{building_id}-results.jsonl"
    memory_file = out_dir / f"{building_id}-memory.json"
    log_dir = out_dir / "logs"
    return results, memory_file, log_dir


def run_battery(
    building_id: str,
    out_dir: Optional[Path] = None,
    seed: int = 7,
    drop_classification: Iterable[str] = (),
    provider: Optional[Provider] = None,
    env: Optional[AgentEnvironment] = None,
    limit: Optional[int] = None,
    resume: bool = False,
    clock_factory: Callable[[], Callable[[], float]] = SimulatedClock,
) -> BatteryResult:
    """Run the canonical battery sequentially on one building.

    With ``out_dir`` set, every query appends one machine-readable JSONL
    record and writes one markdown interaction log, and the memory file is
    rewritten after each run so an aborted battery can be resumed
    (``resume=True`` skips persisted rows and reloads the memory file).
    ``limit`` stops after N queries, preserving partial results.
    """
    if env is None:
        env = build_environment(building_id, seed)
    queries, fixture = build_battery(env, drop_classification)
    if provider is None:
        provider = ScriptedProvider(fixture)

    results_path = memory_path = log_dir = None
    done: dict[str, dict[str, Any]] = {}
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        results_path, memory_path, log_dir = _log_paths(out_dir, building_id)
        log_dir.mkdir(exist_ok=True)
        if resume and results_path.exists():
            for line in results_path.read_text().splitlines():
                record = json.loads(line)
                done[record["query_id"]] = record
            if memory_path.exists():
                env.memory = MemoryStore.load(memory_path)
        elif results_path.exists():
            results_path.unlink()

    cards: list[ScoreCard] = []
    run_docs: list[dict[str, Any]] = []
    executed = 0
    for query in queries:
        if query.query_id in done:
            record = done[query.query_id]
            cards.append(ScoreCard.from_dict(record["card"]))
            run_docs.append(record["run"])
            continue
        if limit is not None and executed >= limit:
            break
        run = run_query(
            query.text, env, provider,
            clock=clock_factory(),
            run_id=f"{building_id}-{query.query_id}",
        )
        executed += 1
        doc = run.to_dict()
        doc["building_id"] = building_id
        card = score_run(doc, query)
        cards.append(card)
        run_docs.append(doc)
        if out_dir is not None:
            record = {"query_id": query.query_id, "run": doc, "card": card.to_dict()}
            with results_path.open("a") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
            (log_dir / f"{run.run_id}.md").write_text(run.to_markdown())
            env.memory.save(memory_path)
    return BatteryResult(building_id=building_id, cards=cards, run_docs=run_docs)


def rescore(results_path: Path, queries: Sequence[BenchmarkQuery]) -> list[ScoreCard]:
    """Re-score archived machine logs; must reproduce the original cards."""
    by_id = {q.query_id: q for q in queries}
    cards = []
    for line in Path(results_path).read_text().splitlines():
        record = json.loads(line)
        cards.append(score_run(record["run"], by_id[record["query_id"]]))
    return cards


# -- aggregation --------------------------------------------------------------


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


@dataclass
class BenchmarkReport:
    per_building: dict[str, dict[str, float]]
    per_primary: dict[str, dict[str, float]]
    per_secondary: dict[str, dict[str, float]]
    heatmaps: dict[str, dict[str, dict[str, float]]]  # metric -> secondary -> building
    outliers_removed: int
    outlier_threshold_s: float
    overall: dict[str, float] = field(default_factory=dict)

    def to_markdown(self) -> str:
        lines = ["# Benchmark report", ""]

        def table(title: str, rows: dict[str, dict[str, float]]) -> None:
            lines.append(f"## {title}")
            lines.append("")
            header = ["group"] + list(METRICS) + ["latency_trimmed_s"]
            lines.append("| " + " | ".join(header) + " |")
            lines.append("|" + "---|" * len(header))
            for name, metrics in rows.items():
                cells = [name] + [
                    f"{metrics.get(m, 0.0):.4f}" for m in METRICS
                ] + [f"{metrics.get('latency_trimmed_s', 0.0):.4f}"]
                lines.append("| " + " | ".join(cells) + " |")
            lines.append("")

        table("Per building", self.per_building)
        table("Per primary category", self.per_primary)
        table("Per secondary category", self.per_secondary)
        lines.append(
            f"Latency outliers above {self.outlier_threshold_s:.0f} s removed "
            f"from the trimmed mean: {self.outliers_removed}"
        )
        lines.append("")
        return "\n".join(lines)

    def to_dict(self) -> dict[str, Any]:
        return {
            "per_building": self.per_building,
            "per_primary": self.per_primary,
            "per_secondary": self.per_secondary,
            "heatmaps": self.heatmaps,
            "outliers_removed": self.outliers_removed,
            "outlier_threshold_s": self.outlier_threshold_s,
            "overall": self.overall,
        }


def _group_means(cards: Sequence[ScoreCard], key: Callable[[ScoreCard], str],
                 threshold: float) -> dict[str, dict[str, float]]:
    groups: dict[str, list[ScoreCard]] = {}
    for card in cards:
        groups.setdefault(key(card), []).append(card)
    out = {}
    for name in sorted(groups):
        rows = groups[name]
        metrics = {m: _mean([r.metric(m) for r in rows]) for m in METRICS}
        kept = [r.latency_s for r in rows if r.latency_s <= threshold]
        metrics["latency_trimmed_s"] = _mean(kept)
        metrics["count"] = float(len(rows))
        out[name] = metrics
    return out


def aggregate_report(
    cards: Sequence[ScoreCard],
    outlier_threshold_s: float = OUTLIER_THRESHOLD_S,
) -> BenchmarkReport:
    """Arithmetic-mean aggregation of score cards.

    Latency is reported both raw and with rows above the threshold
    excluded; all other metrics always use every row.
    """
    if not cards:
        raise BenchError("no score cards to aggregate")
    outliers = sum(1 for c in cards if c.latency_s > outlier_threshold_s)
    per_building = _group_means(cards, lambda c: c.building_id, outlier_threshold_s)
    per_primary = _group_means(cards, lambda c: c.primary, outlier_threshold_s)
    per_secondary = _group_means(cards, lambda c: c.secondary, outlier_threshold_s)

    heatmaps: dict[str, dict[str, dict[str, float]]] = {}
    for metric in ("response_score", "tool_call_score", "latency_s"):
        matrix: dict[str, dict[str, float]] = {}
        for secondary in sorted({c.secondary for c in cards}):
            row = {}
            for building in sorted({c.building_id for c in cards}):
                values = [
                    c.metric(metric) for c in cards
                    if c.secondary == secondary and c.building_id == building
                ]
                if values:
                    row[building] = _mean(values)
            matrix[secondary] = row
        heatmaps[metric] = matrix

    overall = {m: _mean([c.metric(m) for c in cards]) for m in METRICS}
    kept = [c.latency_s for c in cards if c.latency_s <= outlier_threshold_s]
    overall["latency_trimmed_s"] = _mean(kept)
    return BenchmarkReport(
        per_building=per_building,
        per_primary=per_primary,
        per_secondary=per_secondary,
        heatmaps=heatmaps,
        outliers_removed=outliers,
        outlier_threshold_s=outlier_threshold_s,
        overall=overall,
    )


def token_cost_dollars(prompt_tokens: int, completion_tokens: int,
                       input_price: float = 2.5, output_price: float = 10.0) -> float:
    """Per-query cost in dollars at per-million-token prices."""
    return TokenUsage(prompt_tokens, completion_tokens,
                      input_price=input_price, output_price=output_price).cost()


# -- statistics ---------------------------------------------------------------


@dataclass
class TukeyPair:
    group_a: str
    group_b: str
    mean_difference: float
    q_statistic: float
    p_value: float
    significant: bool


@dataclass
class AnovaResult:
    group_names: list[str]
    f_value: float
    p_value: float
    df_between: int
    df_within: int
    tukey: list[TukeyPair] = field(default_factory=list)


def anova_oneway(
    groups: Sequence[Sequence[float]],
    labels: Optional[Sequence[str]] = None,
    tukey: bool = False,
    alpha: float = 0.05,
) -> AnovaResult:
    """One-way ANOVA by direct sum-of-squares decomposition.

    Identical groups (zero between-group variance) yield F = 0, p = 1,
    including the fully degenerate 0/0 case. p-values come from scipy's F
    and studentized-range distributions; the decomposition itself is
    computed here so it stays auditable against hand calculations.
    """
    from scipy import stats

    if len(groups) < 2:
        raise BenchError("ANOVA needs at least 2 groups")
    if any(len(g) < 2 for g in groups):
        raise BenchError("every group needs at least 2 values")
    labels = list(labels) if labels else [f"group{i}" for i in range(len(groups))]

    k = len(groups)
    n_total = sum(len(g) for g in groups)
    grand_mean = sum(sum(g) for g in groups) / n_total
    means = [sum(g) / len(g) for g in groups]
    ss_between = sum(len(g) * (m - grand_mean) ** 2 for g, m in zip(groups, means))
    ss_within = sum(
        sum((x - m) ** 2 for x in g) for g, m in zip(groups, means)
    )
    df_between = k - 1
    df_within = n_total - k

    if ss_between == 0.0:
        f_value, p_value = 0.0, 1.0
    elif ss_within == 0.0:
        f_value, p_value = math.inf, 0.0
    else:
        ms_between = ss_between / df_between
        ms_within = ss_within / df_within
        f_value = ms_between / ms_within
        p_value = float(stats.f.sf(f_value, df_between, df_within))

    result = AnovaResult(
        group_names=labels,
        f_value=f_value,
        p_value=p_value,
        df_between=df_between,
        df_within=df_within,
    )
    if tukey:
        ms_within = ss_within / df_within if df_within else 0.0
        for i in range(k):
            for j in range(i + 1, k):
                diff = means[i] - means[j]
                # Tukey-Kramer standard error for (possibly) unequal n
                se = math.sqrt(ms_within / 2 * (1 / len(groups[i]) + 1 / len(groups[j])))
                if se == 0.0:
                    q = math.inf if diff != 0 else 0.0
                    p = 0.0 if diff != 0 else 1.0
                else:
                    q = abs(diff) / se
                    p = float(stats.studentized_range.sf(q, k, df_within))
                result.tukey.append(
                    TukeyPair(
                        group_a=labels[i],
                        group_b=labels[j],
                        mean_difference=diff,
                        q_statistic=q,
                        p_value=p,
                        significant=p < alpha,
                    )
                )
    return result


def pearson(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Pearson correlation; None when either column has zero variance."""
    n = len(xs)
    if n != len(ys) or n < 2:
        raise BenchError("pearson needs two equal-length columns, n >= 2")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    syy = sum((y - mean_y) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return None
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


def correlation_matrix(
    cards: Sequence[ScoreCard],
    metrics: Sequence[str] = METRICS,
) -> dict[str, dict[str, Optional[float]]]:
    """Pairwise Pearson coefficients over the per-query metrics.

    Zero-variance columns produce None cells (rendered empty downstream);
    the diagonal of a varying column is exactly 1.0.
    """
    if len(cards) < 2:
        raise BenchError("need at least 2 score cards")
    columns = {m: [c.metric(m) for c in cards] for m in metrics}
    matrix: dict[str, dict[str, Optional[float]]] = {}
    for a in metrics:
        matrix[a] = {}
        for b in metrics:
            if a == b:
                matrix[a][b] = 1.0 if pearson(columns[a], columns[a]) is not None else None
            else:
                matrix[a][b] = pearson(columns[a], columns[b])
    return matrix


def four_building_anova(
    results: Sequence[BatteryResult],
    metrics: Sequence[str] = METRICS,
    alpha: float = 0.05,
) -> dict[str, AnovaResult]:
    """The generalizability pipeline: one ANOVA per metric across buildings."""
    out = {}
    for metric in metrics:
        groups = [[c.metric(metric) for c in r.cards] for r in results]
        labels = [r.building_id for r in results]
        out[metric] = anova_oneway(groups, labels=labels, tukey=True, alpha=alpha)
    return out
