"""Relative inconsistency: the same sheaf under two groundings.

The intrinsic Laplacians cannot distinguish two groundings of one fixed
sheaf. The relative cone channel L1 + eps^T eps can: it acquires a kernel
exactly when the grounding annihilates an intrinsic harmonic mode. The
separation check verifies that equivalence by explicit ranks.
"""

import numpy as np

from sheafgauge import (
    channel_set,
    eigendecompose,
    grounding_identity_c1,
    grounding_killing_kernel,
    kernel_dim,
    separation_check,
    trivial_bundle,
)

sheaf = trivial_bundle(10)
groundings = {
    "full-rank": grounding_identity_c1(sheaf),
    "rank-deficient": grounding_killing_kernel(sheaf),
}

base = {}
for name, grounding in groundings.items():
    channels = channel_set(sheaf, grounding)
    base[name] = (channels.l0.matrix, channels.l1.matrix)
    relative = eigendecompose(channels.relative)
    print(f"{name:14s}  dim ker (L1 + eps^T eps) = {kernel_dim(relative)}")

identical = np.array_equal(base["full-rank"][0], base["rank-deficient"][0]) and \
    np.array_equal(base["full-rank"][1], base["rank-deficient"][1])
print(f"\nbase channels identical across the pair: {identical}")

print("\nseparation check (kernel of the relative channel vs grounding on harmonics):")
for name, grounding in groundings.items():
    report = separation_check(sheaf, grounding)
    gamma = "gap > 0" if report.gamma else "kernel present"
    print(f"  {name:14s} dims (a, b, c) = ({report.dim_a}, {report.dim_b}, "
          f"{report.dim_c})  ->  {gamma}")
