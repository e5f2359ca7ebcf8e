"""Rejection-sampling generator for cascade PBE instances.

Inputs and rules are sampled from seeded uniform distributions; candidates
are pruned to their effective cascade (rules that change nothing are
dropped), classified, and accepted against per-bin quotas until a patience
budget is exhausted, after which the quota constraints are relaxed.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import (
    Alphabet,
    Cascade,
    RewriteRule,
    apply_rule_vec,
    render_cascade,
    substrings_of_length,
)
from .relations import ALL_CATEGORIES, CategoryString, RelationEdge, classify_bfcc

QUOTA_MODES = ("category-balanced", "length-balanced", "both")
POST_PATIENCE_POLICIES = ("accept-any", "keep-length-quota")


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs for one generation run.

    ``tau`` is the number of sampling iterations during which every quota
    constraint is enforced; afterwards ``post_patience_policy`` decides what
    still applies.
    """

    n: int
    alphabet: Alphabet
    l_min: int
    l_max: int
    L_min: int
    L_max: int
    s_min: int
    s_max: int
    D: int
    tau: int
    seed: int
    quota_mode: str = "category-balanced"
    post_patience_policy: str = "keep-length-quota"

    def __post_init__(self) -> None:
        if not (1 <= self.l_min <= self.l_max):
            raise ValueError("need 1 <= l_min <= l_max")
        if not (1 <= self.L_min <= self.L_max):
            raise ValueError("need 1 <= L_min <= L_max")
        if not (1 <= self.s_min <= self.s_max):
            raise ValueError("need 1 <= s_min <= s_max")
        if self.n < 1:
            raise ValueError("need n >= 1")
        if self.D < 1:
            raise ValueError("need D >= 1")
        if self.tau < 0:
            raise ValueError("need tau >= 0")
        if self.quota_mode not in QUOTA_MODES:
            raise ValueError(f"unknown quota_mode {self.quota_mode!r}")
        if self.post_patience_policy not in POST_PATIENCE_POLICIES:
            raise ValueError(
                f"unknown post_patience_policy {self.post_patience_policy!r}"
            )

    @property
    def num_lengths(self) -> int:
        return self.L_max - self.L_min + 1

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alphabet": "".join(self.alphabet.symbols),
            "l_min": self.l_min,
            "l_max": self.l_max,
            "L_min": self.L_min,
            "L_max": self.L_max,
            "s_min": self.s_min,
            "s_max": self.s_max,
            "D": self.D,
            "tau": self.tau,
            "seed": self.seed,
            "quota_mode": self.quota_mode,
            "post_patience_policy": self.post_patience_policy,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorParams":
        known = {
            "n", "alphabet", "l_min", "l_max", "L_min", "L_max",
            "s_min", "s_max", "D", "tau", "seed", "quota_mode",
            "post_patience_policy",
        }
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown generator keys: {sorted(unknown)}")
        kwargs = dict(data)
        kwargs["alphabet"] = Alphabet.from_string(kwargs["alphabet"])
        return cls(**kwargs)


def lite_params(seed: int, D: int = 1008, tau: int = 100_000) -> GeneratorParams:
    """The small category-balanced configuration: 5 examples, 17-symbol
    alphabet, cascades of length 2..5, inputs of length 2..6, rule sides of
    length 1..3."""
    from .core import LITE_ALPHABET

    return GeneratorParams(
        n=5, alphabet=LITE_ALPHABET, l_min=2, l_max=6, L_min=2, L_max=5,
        s_min=1, s_max=3, D=D, tau=tau, seed=seed,
        quota_mode="category-balanced",
    )


@dataclass(frozen=True)
class PbeInstance:
    """One generated problem: inputs, the effective cascade that produced the
    outputs, and its relation metadata."""

    id: str
    inputs: tuple[str, ...]
    cascade: Cascade
    outputs: tuple[str, ...]
    category: CategoryString
    fb_edges: tuple[RelationEdge, ...]

    @property
    def effective_length(self) -> int:
        return len(self.cascade)

    @property
    def complexity(self) -> int:
        return sum(len(r.source) + len(r.target) for r in self.cascade)

    def dedup_signature(self) -> tuple:
        return (
            self.inputs,
            self.outputs,
            render_cascade(self.cascade),
            len(self.cascade),
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "programs": [{"find": r.source, "replace": r.target} for r in self.cascade],
            "cascade_length": len(self.cascade),
            "category": self.category.render(),
            "fb_edges": [[e.i, e.kind, e.j] for e in self.fb_edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PbeInstance":
        return cls(
            id=data["id"],
            inputs=tuple(data["inputs"]),
            cascade=tuple(
                RewriteRule(p["find"], p["replace"]) for p in data["programs"]
            ),
            outputs=tuple(data["outputs"]),
            category=CategoryString.parse(data["category"]),
            fb_edges=tuple(RelationEdge(i, k, j) for i, k, j in data["fb_edges"]),
        )


@dataclass
class GenerationStats:
    attempts: int = 0
    acceptances: int = 0
    patience_exhausted: bool = False

    def to_dict(self) -> dict:
        return {
            "attempts": self.attempts,
            "acceptances": self.acceptances,
            "patience_exhausted": self.patience_exhausted,
        }


@dataclass
class Dataset:
    params: GeneratorParams
    instances: list[PbeInstance]
    stats: GenerationStats = field(default_factory=GenerationStats)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "instances": [inst.to_dict() for inst in self.instances],
            "stats": self.stats.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Dataset":
        stats = GenerationStats(**data.get("stats", {}))
        return cls(
            params=GeneratorParams.from_dict(data["params"]),
            instances=[PbeInstance.from_dict(d) for d in data["instances"]],
            stats=stats,
        )

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "Dataset":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def sample_input_vector(params: GeneratorParams, rng: random.Random) -> list[str]:
    """n strings with uniform lengths in [l_min, l_max] and i.i.d. uniform
    characters."""
    symbols = params.alphabet.symbols
    out = []
    for _ in range(params.n):
        length = rng.randint(params.l_min, params.l_max)
        out.append("".join(rng.choice(symbols) for _ in range(length)))
    return out


def sample_rule(
    intermediate: Sequence[str], params: GeneratorParams, rng: random.Random
) -> Optional[RewriteRule]:
    """Draw one rule against the current intermediate vector.

    The find pattern is drawn uniformly from the distinct substrings of the
    drawn length present anywhere in the vector; the replacement is i.i.d.
    uniform characters. Returns None when no feasible find-pattern length
    exists.
    """
    source_len = rng.randint(params.s_min, params.s_max)
    candidates = substrings_of_length(intermediate, source_len)
    if not candidates:
        feasible = [
            length
            for length in range(params.s_min, params.s_max + 1)
            if any(len(s) >= length for s in intermediate)
        ]
        if not feasible:
            return None
        source_len = rng.choice(feasible)
        candidates = substrings_of_length(intermediate, source_len)
    source = rng.choice(candidates)
    target_len = rng.randint(params.s_min, params.s_max)
    target = "".join(rng.choice(params.alphabet.symbols) for _ in range(target_len))
    return RewriteRule(source, target)


@dataclass(frozen=True)
class Candidate:
    """An accepted-or-not sample before id assignment."""

    inputs: tuple[str, ...]
    cascade: Cascade
    outputs: tuple[str, ...]
    category: CategoryString
    fb_edges: tuple[RelationEdge, ...]


def sample_candidate(
    params: GeneratorParams, rng: random.Random
) -> Optional[Candidate]:
    """One full sampling iteration: inputs, a target-length cascade pruned to
    its effective rules, and classification. None encodes rejection."""
    target_length = rng.randint(params.L_min, params.L_max)
    inputs = sample_input_vector(params, rng)
    intermediate = list(inputs)
    kept: list[RewriteRule] = []
    for _ in range(target_length):
        rule = sample_rule(intermediate, params, rng)
        if rule is None:
            break
        changed = apply_rule_vec(rule, intermediate)
        if changed != intermediate:
            kept.append(rule)
            intermediate = changed
    if len(kept) < params.L_min or intermediate == inputs:
        return None
    category, edges = classify_bfcc(kept)
    return Candidate(
        inputs=tuple(inputs),
        cascade=tuple(kept),
        outputs=tuple(intermediate),
        category=category,
        fb_edges=tuple(edges),
    )


def generate_dataset(params: GeneratorParams) -> Dataset:
    """Run rejection sampling until D instances are collected.

    Before iteration ``tau``, a candidate is accepted only if its quota bins
    (per ``quota_mode``) have room and its dedup signature is unseen; after
    ``tau`` the post-patience policy applies. Deterministic in (params, seed).
    """
    rng = random.Random(params.seed)
    cat_quota = params.D // 16
    len_quota = params.D // params.num_lengths
    # Post-patience length cap rounds up so a partially uneven fill cannot
    # deadlock the keep-length-quota policy.
    len_cap_relaxed = math.ceil(params.D / params.num_lengths)

    cat_counts = {cat: 0 for cat in ALL_CATEGORIES}
    len_counts = {length: 0 for length in range(params.L_min, params.L_max + 1)}
    seen: set[tuple] = set()
    instances: list[PbeInstance] = []
    stats = GenerationStats()

    enforce_category = params.quota_mode in ("category-balanced", "both")
    enforce_length = params.quota_mode in ("length-balanced", "both")

    t = 0
    while len(instances) < params.D:
        t += 1
        candidate = sample_candidate(params, rng)
        if candidate is None:
            continue
        signature = (
            candidate.inputs,
            candidate.outputs,
            render_cascade(candidate.cascade),
            len(candidate.cascade),
        )
        if signature in seen:
            continue
        cat = candidate.category.render()
        length = len(candidate.cascade)

        if t < params.tau:
            if enforce_category and cat_counts[cat] >= cat_quota:
                continue
            if enforce_length and len_counts[length] >= len_quota:
                continue
        else:
            stats.patience_exhausted = True
            if (
                params.post_patience_policy == "keep-length-quota"
                and len_counts[length] >= len_cap_relaxed
            ):
                continue

        instance = PbeInstance(
            id=f"inst-{len(instances):05d}",
            inputs=candidate.inputs,
            cascade=candidate.cascade,
            outputs=candidate.outputs,
            category=candidate.category,
            fb_edges=candidate.fb_edges,
        )
        instances.append(instance)
        seen.add(signature)
        cat_counts[cat] += 1
        len_counts[length] += 1

    stats.attempts = t
    stats.acceptances = len(instances)
    return Dataset(params=params, instances=instances, stats=stats)


@dataclass
class BalanceReport:
    """Counts per category bin and cascade length, plus the divergence of the
    category distribution from uniform."""

    category_counts: dict[str, int]
    length_counts: dict[int, int]
    kl_nats: float
    smoothing: float

    def to_dict(self) -> dict:
        return {
            "category_counts": dict(self.category_counts),
            "length_counts": {str(k): v for k, v in sorted(self.length_counts.items())},
            "kl_nats": self.kl_nats,
            "smoothing": self.smoothing,
        }


def kl_from_counts(counts: Sequence[int], smoothing: float = 1.0) -> float:
    """KL divergence (nats) of the uniform distribution from the smoothed
    empirical one.

    Add-``smoothing`` is applied to every bin before normalization, so empty
    bins contribute a finite penalty and exactly-uniform counts give 0.
    """
    if not counts:
        raise ValueError("need at least one bin")
    bins = len(counts)
    smoothed = [c + smoothing for c in counts]
    total = sum(smoothed)
    u = 1.0 / bins
    kl = sum(u * math.log(u / (q / total)) for q in smoothed)
    # Clamp away the negative epsilon that float rounding can leave behind.
    return max(kl, 0.0)


def kl_balance_report(dataset: Dataset, smoothing: float = 1.0) -> BalanceReport:
    """Tabulate category/length counts for a dataset and the category KL."""
    if not dataset.instances:
        raise ValueError("dataset is empty")
    category_counts = {cat: 0 for cat in ALL_CATEGORIES}
    length_counts: dict[int, int] = {}
    for inst in dataset.instances:
        category_counts[inst.category.render()] += 1
        length_counts[inst.effective_length] = (
            length_counts.get(inst.effective_length, 0) + 1
        )
    kl = kl_from_counts(
        [category_counts[cat] for cat in ALL_CATEGORIES], smoothing=smoothing
    )
    return BalanceReport(
        category_counts=category_counts,
        length_counts=length_counts,
        kl_nats=kl,
        smoothing=smoothing,
    )
