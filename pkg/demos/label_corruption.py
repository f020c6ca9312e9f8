"""
Calibrating on partly corrupted labels
======================================

Replace the labels of one class by uniformly random labels, which affects
about a tenth of a balanced ten-class set. Then see how the two temperature
fits react. Expectation consistency only needs the accuracy, so it follows
the drop in accuracy directly.
"""

import numpy as np

from expcal import LabeledLogits, corrupt_labels, fit_ec, fit_ts, report

rng = np.random.default_rng(1)
n, K = 10_000, 10
labels = rng.integers(0, K, n)
logits = 1.5 * rng.standard_normal((n, K))
logits[np.arange(n), labels] += 3.0
clean = LabeledLogits(logits, labels)
dirty = corrupt_labels(clean, [0], seed=2)
print(f"rows with a changed label: {np.mean(clean.labels != dirty.labels):.3f}")

for name, data in [("clean", clean), ("corrupted", dirty)]:
    ts, ec = fit_ts(data), fit_ec(data)
    print(f"{name:>9}: accuracy {report(data).accuracy:.3f}  T_TS {ts.temperature:.3f}  "
          f"T_EC {ec.temperature:.3f}  ECE after EC {report(data, ec.temperature).ece:.4f}")
