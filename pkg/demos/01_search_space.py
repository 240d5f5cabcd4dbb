"""Tour of the cell search space: sampling, mutation, string codec.

Run: python demos/01_search_space.py
"""

import collections

from evonas import ArchEncoding, OpKind, RngStream, decode_str, encode_str, enumerate_all, mutate, random_arch

# The genotype assigns one of 5 operations to each of the 6 cell edges,
# giving 5**6 = 15625 architectures.
space = list(enumerate_all())
print(f"search space size: {len(space)}")
print(f"first genotype:    {encode_str(space[0])}")
print(f"last genotype:     {encode_str(space[-1])}")

# Uniform sampling is driven by named deterministic streams: the same seed
# always produces the same architecture.
stream = RngStream(2024)
arch = random_arch(stream.child("demo"))
print(f"\nsampled:  {encode_str(arch)}")
print(f"replayed: {encode_str(random_arch(RngStream(2024).child('demo')))}")

# Mutation changes exactly one edge to a different operation, so every
# child sits at Hamming distance 1 from its parent.
parent = ArchEncoding((OpKind.SKIP_CONNECT,) * 6)
print(f"\nparent:   {encode_str(parent)}")
for i in range(4):
    child = mutate(parent, stream.child("mut", i))
    changed = [e for e in range(6) if child.edge_ops[e] != parent.edge_ops[e]]
    print(f"child {i}:  {encode_str(child)}   (edge {changed[0]} changed)")

# Each of the 24 possible children of a fixed parent appears equally often.
counts = collections.Counter()
for i in range(24_000):
    counts[mutate(parent, stream.child("freq", i)).edge_ops] += 1
print(f"\ndistinct children of one parent: {len(counts)} (expected 24)")
print(f"min/max frequency: {min(counts.values())}/{max(counts.values())} (expected ~1000)")

# The canonical string round-trips exactly.
text = encode_str(arch)
assert decode_str(text) == arch
print(f"\ncodec round-trip ok for {text}")
