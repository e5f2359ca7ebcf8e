"""Build reordering puzzles from generated instances.

Demonstrates the single-transposition scramble and uniqueness counting,
and prints one rendered puzzle prompt. Run with:

    python3 demos/03_reordering_task.py
"""

from rewritebench.core import Alphabet, apply_cascade
from rewritebench.gateway import render_reorder_prompt
from rewritebench.permuter import build_perm_dataset
from rewritebench.proposer import GeneratorParams, generate_dataset


def main() -> None:
    params = GeneratorParams(
        n=2, alphabet=Alphabet.from_string("abcde"),
        l_min=2, l_max=5, L_min=2, L_max=3, s_min=1, s_max=2,
        D=48, tau=50_000, seed=7,
    )
    dataset = generate_dataset(params)
    puzzles = build_perm_dataset(dataset)
    unique = [p for p in puzzles if p.is_unique]
    print(f"{len(dataset.instances)} instances -> {len(puzzles)} puzzles, "
          f"{len(unique)} with a unique solution")

    puzzle = (unique or puzzles)[0]
    print(f"\npuzzle from {puzzle.source_id}:")
    print("  scrambled:", [r.render() for r in puzzle.scrambled])
    print("  scrambled output:",
          apply_cascade(puzzle.scrambled, puzzle.inputs))
    print("  expected output: ", list(puzzle.outputs))
    print("  recovery order:  ", list(puzzle.gt_order),
          f"({puzzle.n_valid_orders} valid order(s))")

    print("\nthe solver sees:\n")
    print(render_reorder_prompt(puzzle))


if __name__ == "__main__":
    main()
