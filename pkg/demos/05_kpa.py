# %% [markdown]
# # Known-plaintext attack by column fingerprints
#
# At a width of 400 every pixel of a column shares one masking byte, so the
# multiset of value counts in a column survives encryption. Columns with unique
# profiles can be matched across a plain/cipher pair.

# %%
import itertools

import numpy as np

from chaoscrack import MasterKey, decrypt_with_equivalent, encrypt, random_image, run_kpa_attack


def partitions(n, largest=None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


rng = np.random.default_rng(0)
plain = np.empty((64, 400), dtype=np.uint8)
for j, part in enumerate(itertools.islice(partitions(64), 400)):
    plain[:, j] = rng.permutation(np.repeat(rng.choice(256, len(part), replace=False), part))

key = MasterKey(0.41337, 0.11121, 0.24494)
result = run_kpa_attack([(plain, encrypt(plain, key))])
print("resolved fraction:", result.resolved_fraction, "stream coverage:", result.coverage_fraction)

secret = random_image(3, 64, 400)
print("pixel errors:", int(np.count_nonzero(decrypt_with_equivalent(encrypt(secret, key), result.key) != secret)))

# %% [markdown]
# Smooth images share profiles between many columns. Those stay ambiguous
# instead of being guessed.

# %%
gradient = ((np.arange(64)[:, None] * 3 + np.arange(400)[None, :] // 7) % 256).astype(np.uint8)
res = run_kpa_attack([(gradient, encrypt(gradient, key))])
print("gradient image resolved fraction:", round(res.resolved_fraction, 3), "key:", res.key)
