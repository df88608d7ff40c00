#!/usr/bin/env python3
"""The two top-k comparison metrics on worked examples: common elements ratio
and Fagin's generalized Kendall distance with its overlap-aware normalization.
"""

from lexrefine.rankcompare import (
    common_elements_ratio,
    fagin_k,
    max_fagin_distance,
    normalized_fagin_k,
)

a = ["depression", "anxiety", "insomnia", "migraine", "fatigue"]
b = ["anxiety", "depression", "stress", "migraine", "tremor"]

print("list a:", a)
print("list b:", b)
print(f"\ncommon elements ratio: {common_elements_ratio(a, b):.2f}")
print(f"Fagin K (p=0.5):       {fagin_k(a, b, 0.5):g}")
print(f"normalized K:          {normalized_fagin_k(a, b, 0.5):.3f}")

print("\npenalty cases, via small examples:")
print(f"  identical lists          -> K = {fagin_k(a, a):g}")
print(f"  swapped pair [x,y]/[y,x] -> K = {fagin_k(['x','y'], ['y','x']):g}")
print(f"  disjoint k=2 (p=0.5)     -> K = {fagin_k(['x','y'], ['u','v'], 0.5):g} "
      "(4 cross pairs at 1 + 2 single-list pairs at 0.5)")

print("\nworst case for k=5 by overlap z:")
for z in range(6):
    print(f"  z={z}: union {10 - z:2d} elements -> max K = {max_fagin_distance(5, z)}")

print("\nnormalization in action (same K, different overlap):")
for a2, b2 in [
    (["a", "b", "c"], ["a", "c", "b"]),
    (["a", "b", "c"], ["c", "d", "e"]),
]:
    K = fagin_k(a2, b2, 0.5)
    print(f"  {a2} vs {b2}: K={K:g}, normalized={normalized_fagin_k(a2, b2, 0.5):.3f}")
