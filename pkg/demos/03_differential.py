# %% [markdown]
# # Differential attack with two chosen images
#
# XOR cancels the mask. Encrypting an all-zero image and an upper-triangular
# white image, then XORing the results, leaves a shuffled triangle whose column
# counts spell out the permutation.

# %%
import numpy as np

from chaoscrack import (IntegratorParams, MasterKey, decrypt_with_equivalent, encrypt, equivalent_from_master,
                        make_local_oracle, random_image, run_differential_attack)

key = MasterKey(0.41337, 0.11121, 0.24494)
oracle = make_local_oracle(key)
ek = run_differential_attack(oracle, 512, 512)
print("oracle queries:", oracle.queries)
print("matches the key derived from the master key:", ek == equivalent_from_master(key, IntegratorParams(), 512, 512))

# %% [markdown]
# With the equivalent key any ciphertext of this size can be read without the master key.

# %%
secret = random_image(99, 512, 512)
recovered = decrypt_with_equivalent(encrypt(secret, key), ek)
print("pixel errors:", int(np.count_nonzero(recovered != secret)))
