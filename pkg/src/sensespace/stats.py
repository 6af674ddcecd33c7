"""Count tables and unpaired permutation tests over binary image judgments.

Outcomes are binary per image (a concept was realised or it was not). The
test statistic is the difference in success counts between two groups, and
the p-value is the one-sided tail probability of that statistic under
uniform relabeling of the pooled outcomes.

Because the statistic depends on a relabeling only through how many
successes land in group A, exact enumeration reduces to counting label
assignments per success count (a hypergeometric sum over C(n, |A|)
assignments), and sampled mode draws the success count of group A
directly. Sampled draws are generated in fixed-size chunks with
per-chunk generators spawned from the seed, so results depend only on
(seed, draw count) no matter how chunks are scheduled.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from pathlib import Path

import numpy as np

from .errors import (
    EmptyGroup,
    MissingFixture,
    NonBinaryOutcome,
    ZeroTotal,
)

DEFAULT_EXACT_CAP = 2_000_000
DEFAULT_DRAWS = 100_000
DEFAULT_SEED = 0

#: cap used by the fixture suites so 30-vs-30 comparisons run exact; several
#: published cells sit within Monte Carlo noise of the 0.05 line
SUITE_EXACT_CAP = 10**18

_CHUNK = 10_000

CSV_FIELDS = ("condition", "sense1_only", "sense2_only", "both", "neither")


@dataclass(frozen=True)
class CountTable:
    """Image counts for one condition: each image realised sense 1 only,
    sense 2 only, both, or neither."""

    condition: str
    sense1_only: int
    sense2_only: int
    both: int
    neither: int

    def __post_init__(self):
        for name in CSV_FIELDS[1:]:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def total(self) -> int:
        return self.sense1_only + self.sense2_only + self.both + self.neither

    def successes(self, sense: int, count_both: bool = False) -> int:
        """Number of images realising the given sense (alone, unless
        ``count_both``)."""
        alone = self.sense1_only if sense == 1 else self.sense2_only
        return alone + (self.both if count_both else 0)


@dataclass(frozen=True)
class PermutationResult:
    observed_statistic: int
    p_value: float
    mode: str  # "exact" | "sampled"
    permutations_evaluated: int


def _validate_group(group, name: str) -> list[int]:
    values = list(group)
    if not values:
        raise EmptyGroup(f"group {name} is empty")
    out = []
    for v in values:
        if isinstance(v, bool):
            out.append(int(v))
            continue
        try:
            iv = int(v)
        except (TypeError, ValueError):
            raise NonBinaryOutcome(f"group {name} contains non-binary value {v!r}")
        if iv != v or iv not in (0, 1):
            raise NonBinaryOutcome(f"group {name} contains non-binary value {v!r}")
        out.append(iv)
    return out


def _exact_tail(successes_a: int, n_a: int, total_successes: int, n: int) -> Fraction:
    """Fraction of the C(n, n_a) label assignments whose statistic is at
    least the observed one. The statistic 2k - K is monotone in k, the
    number of successes assigned to group A, so the tail is k >= successes_a."""
    k_max = min(total_successes, n_a)
    hits = 0
    for k in range(successes_a, k_max + 1):
        if n_a - k > n - total_successes:
            continue
        hits += comb(total_successes, k) * comb(n - total_successes, n_a - k)
    return Fraction(hits, comb(n, n_a))


def _sampled_tail(
    successes_a: int, n_a: int, total_successes: int, n: int, seed: int, draws: int
) -> float:
    root = np.random.SeedSequence(seed)
    children = root.spawn((draws + _CHUNK - 1) // _CHUNK)
    hits = 0
    remaining = draws
    for child in children:
        size = min(_CHUNK, remaining)
        remaining -= size
        rng = np.random.Generator(np.random.PCG64(child))
        ks = rng.hypergeometric(
            ngood=total_successes, nbad=n - total_successes, nsample=n_a, size=size
        )
        hits += int(np.count_nonzero(ks >= successes_a))
    return (hits + 1) / (draws + 1)


def permutation_test(
    group_a,
    group_b,
    seed: int = DEFAULT_SEED,
    exact_cap: int = DEFAULT_EXACT_CAP,
    draws: int = DEFAULT_DRAWS,
) -> PermutationResult:
    """One-sided unpaired permutation test on binary outcomes.

    The statistic is (successes in A) - (successes in B) and the tail is
    ``statistic >= observed``. Enumeration is exact when C(|A|+|B|, |A|)
    does not exceed ``exact_cap``; otherwise ``draws`` Monte Carlo
    relabelings are sampled with an add-one correction so the reported
    p-value is never zero.
    """
    a = _validate_group(group_a, "A")
    b = _validate_group(group_b, "B")
    n_a, n_b = len(a), len(b)
    n = n_a + n_b
    sa, sb = sum(a), sum(b)
    total = sa + sb
    observed = sa - sb
    n_assignments = comb(n, n_a)
    if n_assignments <= exact_cap:
        p = _exact_tail(sa, n_a, total, n)
        return PermutationResult(
            observed_statistic=observed,
            p_value=float(p),
            mode="exact",
            permutations_evaluated=n_assignments,
        )
    p = _sampled_tail(sa, n_a, total, n, seed, draws)
    return PermutationResult(
        observed_statistic=observed,
        p_value=p,
        mode="sampled",
        permutations_evaluated=draws,
    )


# --- count-table CSV files ---

def read_counts_csv(path) -> list[CountTable]:
    path = Path(path)
    if not path.exists():
        raise MissingFixture(f"count table file not found: {path}")
    tables = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_FIELDS:
            raise MissingFixture(
                f"{path}: expected header {','.join(CSV_FIELDS)}, "
                f"got {reader.fieldnames}"
            )
        for row in reader:
            tables.append(
                CountTable(
                    condition=row["condition"],
                    sense1_only=int(row["sense1_only"]),
                    sense2_only=int(row["sense2_only"]),
                    both=int(row["both"]),
                    neither=int(row["neither"]),
                )
            )
    return tables


def write_counts_csv(path, tables) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for t in tables:
            writer.writerow([t.condition, t.sense1_only, t.sense2_only, t.both, t.neither])


# --- reports ---

def _percentages(t: CountTable) -> dict:
    if t.total == 0:
        raise ZeroTotal(f"condition {t.condition!r} has zero total")
    return {
        name: round(getattr(t, name) / t.total * 100.0, 1)
        for name in CSV_FIELDS[1:]
    }


def proportions_report(tables) -> dict:
    """Per-condition percentages plus aggregates over same-named conditions.

    Aggregation sums raw counts across tables before dividing, so the
    aggregate is the pooled proportion, not a mean of percentages.
    """
    tables = list(tables)
    if not tables:
        raise EmptyGroup("no count tables given")
    rows = [
        {"condition": t.condition, "total": t.total, "percent": _percentages(t)}
        for t in tables
    ]
    pooled: dict[str, list[int]] = {}
    for t in tables:
        acc = pooled.setdefault(t.condition, [0, 0, 0, 0])
        for i, name in enumerate(CSV_FIELDS[1:]):
            acc[i] += getattr(t, name)
    aggregate = {}
    for condition, counts in pooled.items():
        agg_table = CountTable(condition, *counts)
        aggregate[condition] = {
            "total": agg_table.total,
            "percent": _percentages(agg_table),
        }
    return {"conditions": rows, "aggregate": aggregate}


def _binary_groups(successes: int, total: int) -> list[int]:
    if successes > total:
        raise ValueError(f"successes {successes} exceed total {total}")
    return [1] * successes + [0] * (total - successes)


def _tables_by_condition(path) -> dict[str, CountTable]:
    tables = read_counts_csv(path)
    return {t.condition: t for t in tables}


def pair_significance_suite(
    table_files,
    seed: int = DEFAULT_SEED,
    exact_cap: int = SUITE_EXACT_CAP,
    draws: int = DEFAULT_DRAWS,
) -> list[dict]:
    """Did the weighted sum realise both concepts more often than either
    single prompt did?

    Each file holds conditions ``s1``, ``s2``, and ``sum``; the success is
    "both concepts realised" and the sum row is compared against each
    single-prompt row.
    """
    results = []
    for path in table_files:
        by_cond = _tables_by_condition(path)
        try:
            sum_t = by_cond["sum"]
            singles = [("s1", by_cond["s1"]), ("s2", by_cond["s2"])]
        except KeyError as exc:
            raise MissingFixture(f"{path}: missing condition row {exc}") from exc
        group_sum = _binary_groups(sum_t.both, sum_t.total)
        for name, single in singles:
            group_single = _binary_groups(single.both, single.total)
            res = permutation_test(group_sum, group_single, seed, exact_cap, draws)
            results.append(
                {
                    "table": Path(path).stem,
                    "baseline": name,
                    "sum_both": sum_t.both,
                    "baseline_both": single.both,
                    "p_value": res.p_value,
                    "significant": res.p_value < 0.05,
                    "mode": res.mode,
                }
            )
    return results


def significance_suite(
    table_files,
    both_counts_as_success: bool = False,
    seed: int = DEFAULT_SEED,
    exact_cap: int = SUITE_EXACT_CAP,
    draws: int = DEFAULT_DRAWS,
) -> list[dict]:
    """Did each edited encoding realise its target sense more often than
    the unedited one?

    Each file holds conditions ``unedited``, ``edited_to_1`` and
    ``edited_to_2``. The success for direction d is "sense d realised"; by
    default an image counted under "both" is not a success, matching how
    the bundled reference flags were assigned. Set ``both_counts_as_success``
    to include them.
    """
    results = []
    for path in table_files:
        by_cond = _tables_by_condition(path)
        try:
            unedited = by_cond["unedited"]
            edited = {1: by_cond["edited_to_1"], 2: by_cond["edited_to_2"]}
        except KeyError as exc:
            raise MissingFixture(f"{path}: missing condition row {exc}") from exc
        for sense in (1, 2):
            succ_e = edited[sense].successes(sense, both_counts_as_success)
            succ_u = unedited.successes(sense, both_counts_as_success)
            res = permutation_test(
                _binary_groups(succ_e, edited[sense].total),
                _binary_groups(succ_u, unedited.total),
                seed,
                exact_cap,
                draws,
            )
            results.append(
                {
                    "table": Path(path).stem,
                    "direction": sense,
                    "edited_successes": succ_e,
                    "unedited_successes": succ_u,
                    "p_value": res.p_value,
                    "significant": res.p_value < 0.05,
                    "mode": res.mode,
                }
            )
    return results
