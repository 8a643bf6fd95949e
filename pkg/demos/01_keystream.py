# %% [markdown]
# # The chaotic keystream
#
# A master key is the initial state of a third-order jerk system. We integrate
# it with fixed-step RK4, interleave two of the state components, and turn the
# result into 400 permutation values and 400 masking bytes.

# %%
import numpy as np

from chaoscrack import IntegratorParams, MasterKey, generate_keystream, integrate_trajectory

key = MasterKey(0.41337, 0.11121, 0.24494)
params = IntegratorParams()
traj = integrate_trajectory(key, params, 200)
print("first samples after warm-up:\n", traj[:3])

# %% [markdown]
# The keystream is deterministic. `c` drives the permutations, `c_bytes` masks the pixels.

# %%
ks = generate_keystream(key, params)
print("c[:5] =", np.round(ks.c[:5], 6))
print("c_bytes[:16] =", ks.c_bytes[:16].tolist())
print("count of the most common byte:", np.bincount(ks.c_bytes, minlength=256).max())

# %% [markdown]
# Tiny changes in the key give an unrelated stream.

# %%
other = generate_keystream(MasterKey(0.41337, 0.11121, 0.24495), params)
print("bytes that differ:", int(np.count_nonzero(other.c_bytes != ks.c_bytes)), "of 400")
