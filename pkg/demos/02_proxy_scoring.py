"""Scoring untrained networks: Jacobians, correlations, and the final score.

Run: python demos/02_proxy_scoring.py
"""

import numpy as np

from evonas import (
    ArchEncoding,
    OpKind,
    ProxyParams,
    RngStream,
    SkeletonConfig,
    SyntheticBatchSpec,
    build_network,
    finite_diff_jacobian,
    input_jacobian,
    make_batch,
    random_arch,
    score_arch,
)
from evonas.zeroproxy import eval_matrix, per_class_correlation

cfg = SkeletonConfig()  # desk-scale: 3x16x16 inputs, 8 stem channels
batch, labels = make_batch(SyntheticBatchSpec(num_classes=5, samples_per_class=3, seed=7))
params = ProxyParams()
print(f"batch {batch.shape}, labels {np.bincount(labels).tolist()} per class")

# Build an untrained network and differentiate the total logit sum with
# respect to every input sample.
arch = random_arch(RngStream(1, ("demo",)))
net = build_network(arch, cfg, RngStream(2, ("init",)))
jac = input_jacobian(net, batch, labels)
print(f"\narchitecture: {arch}")
print(f"jacobian: {jac.J.shape} (N samples x D input dims)")

# The analytic rows agree with central finite differences.
small_cfg = SkeletonConfig(input_channels=2, input_hw=8, stem_channels=4, num_classes=3)
small_batch, small_labels = batch[:4, :2, :8, :8].copy(), labels[:4] % 3
small_net = build_network(arch, small_cfg, RngStream(3, ("init",)))
fd = finite_diff_jacobian(small_net, small_batch, 1e-4)
J = input_jacobian(small_net, small_batch, small_labels).J
print(f"finite-difference check: rel err {np.linalg.norm(J - fd) / np.linalg.norm(fd):.2e}")

# Per-class correlation matrices condense into one E value per class and a
# single score z; higher ranks better.
for corr in per_class_correlation(jac):
    print(f"class {corr.class_id}: corr {corr.sigma.shape}, E = {eval_matrix(corr, params):+.4f}")
result = score_arch(arch, batch, labels, cfg, params, RngStream(2, ("init",)))
print(f"score z = {result.value:.4f}")

# Degenerate genotypes (for instance all-zeroize, whose Jacobian vanishes)
# rank below every finite score.
dead = ArchEncoding((OpKind.ZEROIZE,) * 6)
dead_score = score_arch(dead, batch, labels, cfg, params, RngStream(2, ("init",)))
print(f"\nall-zeroize genotype -> sentinel score: {dead_score.value}")

# Rank a handful of random candidates the way the search loop would.
stream = RngStream(5, ("rank",))
scored = []
for i in range(8):
    cand = random_arch(stream.child(i))
    s = score_arch(cand, batch, labels, cfg, params, stream.child(i, "net"))
    scored.append((s.value, cand))
scored.sort(key=lambda pair: -pair[0])
print("\ncandidates by proxy score:")
for value, cand in scored:
    print(f"  {value:+9.4f}  {cand}")
