"""Walkthrough: predicting drug-target interactions from paired features.

Run with ``python3 demos/04_interaction_pairs.py``.

Each example is a (small molecule, protein) pair with a +1/-1 interaction
label.  The protein is modeled as a chain graph (one node per residue), the
molecule as its usual atom graph.  Featurization happens per side and the
two count vectors are concatenated under ``drug:`` / ``target:`` namespaces,
so a forest can pick up joint conditions like "carboxyl group on the drug
AND a WKY motif in the target's sequence".

The dataset here is the committed synthetic fixture used by the test suite:
200 pairs whose interaction rule is exactly that conjunction.
"""

import os

from submol import (
    ForestConfig,
    PipelineSpec,
    Protocol,
    build_matrix,
    featurize_pairs,
    load_pairs,
    run_protocol,
)

FIXTURE = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    "tests", "data", "interaction_200.csv",
)


def main():
    with open(FIXTURE, encoding="utf-8", newline="") as handle:
        dataset = load_pairs(handle)
    pos = sum(1 for p in dataset.pairs if p.label == 1)
    print(f"loaded {len(dataset.pairs)} pairs "
          f"({pos} interacting, {len(dataset.pairs) - pos} not)")
    first = dataset.pairs[0]
    print(f"first pair: {first.id_a} ({len(first.graph_a)} atoms) ~ "
          f"{first.id_b} ({len(first.graph_b)} residues), label {first.label:+d}\n")

    vectors, labels, ids = featurize_pairs(dataset, heights=[0, 1])
    drug_keys = sum(1 for k in vectors[0].entries if k.startswith("drug:"))
    target_keys = sum(1 for k in vectors[0].entries if k.startswith("target:"))
    print(f"pair feature vectors concatenate both sides; the first pair has")
    print(f"{drug_keys} drug-side and {target_keys} target-side keys, e.g.:")
    for key in sorted(vectors[0].entries)[:3]:
        print(f"  {key}")
    print()

    data = build_matrix(vectors, labels, ids=ids)
    result = run_protocol(
        data,
        PipelineSpec("rf", ForestConfig(trees=50)),
        Protocol.parse("kfold:10"),
        seed=0,
    )
    au = result.samples["auroc"]
    acc = result.samples["val_acc"]
    print("10-fold cross-validation, 50-tree forest:")
    print("  fold  AUROC   val accuracy")
    for trial, trial_auroc, _, val_acc in result.rows:
        print(f"  {trial:>4d}  {trial_auroc:.3f}   {val_acc:.3f}")
    print(f"  mean  {au.mean:.3f}   {acc.mean:.3f}")
    print()
    print("The rule behind the labels is a conjunction of one drug-side and")
    print("one target-side motif, so neither namespace alone suffices; the")
    print("forest finds the interaction by splitting on both.")


if __name__ == "__main__":
    main()
