"""
Mixing partial labels with three-valued OR
==========================================

Two images are blended; what should the label of the blend be when some
labels are unknown? A category is present in the blend if it is present
in any source. So a known positive anywhere makes the blend positive, a
negative survives only when every source is a known negative, and anything
else stays unknown.
"""
import numpy as np

from logicmix.mixing import Sample, mix_samples
from logicmix.ternary import LabelVector, enumerate_completions, mix_label_vectors

# categories: person, dog, car
a = LabelVector.parse("1?0")
b = LabelVector.parse("?00")
print("a        ", a)
print("b        ", b)
print("a OR b   ", mix_label_vectors([a, b]))

# The same answer by brute force: OR every completion of a with every
# completion of b and keep the positions on which all of them agree.
outcomes = np.array([np.maximum(ca, cb) for ca in enumerate_completions(a)
                     for cb in enumerate_completions(b)])
agreed = np.where(outcomes.min(axis=0) == outcomes.max(axis=0), outcomes[0], -1)
print("oracle   ", LabelVector(agreed))

# More than two samples: one positive anywhere settles the category.
vectors = [LabelVector.parse(s) for s in ("1?", "?0", "00")]
print("3-way mix", mix_label_vectors(vectors))

# Images are averaged with equal weights.
rng = np.random.default_rng(0)
samples = [Sample(f"img{i}", rng.random((2, 2, 3)), v) for i, v in enumerate(vectors)]
mixed = mix_samples(samples)
print(mixed.id, mixed.labels, "mean intensity", round(float(mixed.image.mean()), 4))
