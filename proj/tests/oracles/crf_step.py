"""One mean-field step on a 2x2, two-label field, summed pair by pair.

Q_i = softmax(log(max(U_i, floor)) + w * sum_{j != i} k(i, j) * U_j),
k(i, j) = exp(-|p_i - p_j|^2 / (2 theta^2)). On a 2x2 grid every other patch
lies inside the truncation radius ceil(3 theta).
"""
import math

import numpy as np

w, theta, floor = 6.0, 0.8, 1e-6
U = np.array([[0.9, 0.1], [0.2, 0.8], [0.6, 0.4], [0.0, 1.0]])  # (0,0) (0,1) (1,0) (1,1)
pos = [(0, 0), (0, 1), (1, 0), (1, 1)]

out = []
for i, (ri, ci) in enumerate(pos):
    msg = np.zeros(2)
    for j, (rj, cj) in enumerate(pos):
        if i == j:
            continue
        d2 = (ri - rj) ** 2 + (ci - cj) ** 2
        msg += math.exp(-d2 / (2 * theta * theta)) * U[j]
    logits = np.log(np.maximum(U[i], floor)) + w * msg
    e = np.exp(logits - logits.max())
    out.append(e / e.sum())
print("{" + ", ".join(f"{v:.17g}" for row in out for v in row) + "}")
