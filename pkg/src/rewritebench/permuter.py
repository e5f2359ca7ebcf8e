"""Construction of the program-reordering task.

A reorder instance is a cascade scrambled by one transposition of a
feeding- or bleeding-related rule pair, chosen so that the scrambled
order no longer reproduces the outputs. Recovering the original order
is then a non-trivial puzzle, and exhaustive permutation enumeration
decides whether the solution is unique.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

from .core import Cascade, RewriteRule, apply_cascade
from .proposer import Dataset, PbeInstance


class CapacityError(ValueError):
    """Raised when exhaustive order enumeration would exceed the cap."""


@dataclass(frozen=True)
class ReorderInstance:
    """A scrambled cascade together with the original I/O pair.

    ``gt_order`` lists indices into ``scrambled`` in the order they must be
    applied to reproduce ``outputs``. ``n_valid_orders`` is None when the
    cascade was too long to enumerate under the cap.
    """

    source_id: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    scrambled: Cascade
    gt_order: tuple[int, ...]
    n_valid_orders: Optional[int] = None
    is_unique: bool = False

    def reordered(self, order: tuple[int, ...]) -> Cascade:
        return tuple(self.scrambled[i] for i in order)

    def to_dict(self) -> dict:
        return {
            "id": self.source_id,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "scrambled_programs": [
                {"find": r.source, "replace": r.target} for r in self.scrambled
            ],
            "gt_order": list(self.gt_order),
            "n_valid_orders": self.n_valid_orders,
            "is_unique": self.is_unique,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReorderInstance":
        return cls(
            source_id=data["id"],
            inputs=tuple(data["inputs"]),
            outputs=tuple(data["outputs"]),
            scrambled=tuple(
                RewriteRule(p["find"], p["replace"])
                for p in data["scrambled_programs"]
            ),
            gt_order=tuple(data["gt_order"]),
            n_valid_orders=data.get("n_valid_orders"),
            is_unique=data.get("is_unique", False),
        )


def fb_swap(instance: PbeInstance) -> Optional[ReorderInstance]:
    """Scramble a cascade by its first output-changing FB transposition.

    FB edges are visited in stored order (row-major over ordered pairs) with
    unordered duplicates skipped, so the result is deterministic. Returns
    None when no edge exists or no single transposition changes the outputs.
    """
    seen_pairs: set[frozenset[int]] = set()
    rules = list(instance.cascade)
    for edge in instance.fb_edges:
        pair = frozenset((edge.i, edge.j))
        if pair in seen_pairs:
            continue
        seen_pairs.add(pair)
        a, b = min(edge.i, edge.j), max(edge.i, edge.j)
        swapped = list(rules)
        swapped[a], swapped[b] = swapped[b], swapped[a]
        if tuple(apply_cascade(swapped, instance.inputs)) == instance.outputs:
            continue
        order = list(range(len(rules)))
        order[a], order[b] = order[b], order[a]
        return ReorderInstance(
            source_id=instance.id,
            inputs=instance.inputs,
            outputs=instance.outputs,
            scrambled=tuple(swapped),
            gt_order=tuple(order),
        )
    return None


def count_valid_orders(instance: ReorderInstance, cap: int = 40320) -> int:
    """Number of permutations of the scrambled rules reproducing the outputs.

    Exhaustive, so |scrambled|! must not exceed ``cap``. Always at least 1
    because gt_order is valid by construction.
    """
    m = len(instance.scrambled)
    if math.factorial(m) > cap:
        raise CapacityError(
            f"{m}! = {math.factorial(m)} permutations exceed cap {cap}"
        )
    count = 0
    for perm in itertools.permutations(range(m)):
        cascade = tuple(instance.scrambled[i] for i in perm)
        if tuple(apply_cascade(cascade, instance.inputs)) == instance.outputs:
            count += 1
    return count


def build_perm_dataset(
    dataset: Dataset, order_count_cap: int = 40320
) -> list[ReorderInstance]:
    """fb_swap every instance, keep the successes, and annotate uniqueness
    whenever enumeration fits under the cap."""
    if order_count_cap < 1:
        raise ValueError("order_count_cap must be at least 1")
    out: list[ReorderInstance] = []
    for inst in dataset.instances:
        reorder = fb_swap(inst)
        if reorder is None:
            continue
        m = len(reorder.scrambled)
        if math.factorial(m) <= order_count_cap:
            n = count_valid_orders(reorder, cap=order_count_cap)
            reorder = ReorderInstance(
                source_id=reorder.source_id,
                inputs=reorder.inputs,
                outputs=reorder.outputs,
                scrambled=reorder.scrambled,
                gt_order=reorder.gt_order,
                n_valid_orders=n,
                is_unique=(n == 1),
            )
        out.append(reorder)
    return out


def save_perm_dataset(instances: list[ReorderInstance], path: str) -> None:
    import json

    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"instances": [r.to_dict() for r in instances]}, fh, indent=2)
        fh.write("\n")


def load_perm_dataset(path: str) -> list[ReorderInstance]:
    import json

    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return [ReorderInstance.from_dict(d) for d in data["instances"]]
