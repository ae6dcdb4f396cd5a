"""The scoring rules by example: match classes, partial credit, dataset
scores, and aggregation over mapping iterations.

Run from the repository root:  python demos/04_scoring.py
"""
from fhirmap import (
    EvaluationPair,
    aggregate,
    classify,
    parse_path,
    partial_credit,
    score_dataset,
)

cases = [
    ("Observation.valueQuantity.value", "Observation.valueQuantity.value"),
    ("Observation.component.valueQuantity.value", "Observation.valueQuantity.value"),
    ("Patient.birthDate", "Observation.valueQuantity.value"),
    (None, "Observation.valueQuantity.value"),
]

print("Match classes:")
for pred_text, gt_text in cases:
    pred = parse_path(pred_text) if pred_text else None
    gt = parse_path(gt_text)
    label = classify(pred, gt).value
    extra = ""
    if label == "partial_match":
        extra = f"  (partial credit {partial_credit(pred, gt):.4f})"
    print(f"  {str(pred_text):55s} vs {gt_text:35s} -> {label}{extra}")

pairs = [
    EvaluationPair(("DEMO", f"f{i}"), parse_path(p) if p else None, parse_path(g))
    for i, (p, g) in enumerate(cases)
]
score = score_dataset(pairs, "DEMO")
print(
    f"\nDataset score: {score.absolute_matches} absolute, {score.partial_matches} partial "
    f"(credit {score.partial_credit_sum:.2f}), {score.total} total"
)
print(f"  Score               = {score.score:.4f}")
print(f"  Resource match score = {score.resource_match_score:.4f}")

# several mapping iterations: per-dataset means with sample standard deviation
def one_iteration(absolute_count):
    rows = [
        EvaluationPair(
            ("DEMO", f"f{i}"),
            parse_path("Observation.value" if i < absolute_count else "Patient.name"),
            parse_path("Observation.value"),
        )
        for i in range(10)
    ]
    return {"DEMO": score_dataset(rows, "DEMO")}

result = aggregate([one_iteration(7), one_iteration(8)])
stats = result.per_dataset["DEMO"]
print(f"\nOver {result.iteration_count} iterations:")
print(f"  score {stats.score_mean:.2f} +/- {stats.score_stddev:.4f}")
print(f"  resource match {stats.resource_match_mean:.2f} +/- {stats.resource_match_stddev:.4f}")
