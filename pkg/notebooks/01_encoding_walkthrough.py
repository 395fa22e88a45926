# %% [markdown]
# # Shift-interleave encoding, step by step
#
# A tiny configuration (m=4 block rows, s=2 sub-rows, d=1, L=3 codewords)
# small enough to print every matrix. Codeword bits here are random rather
# than LDPC codewords; the layout does not care.

# %%
import numpy as np

from sicode.channel import ChannelParams, to_string, transmit_pool
from sicode.encoder import RowPermutation, SiConfig, encode_all, interleave, metadata_for, pack_codewords, shift

cfg = SiConfig(m=4, s=2, d=1, L=3, t1=(0, 1, 2, 3), t2=(0, 1, 2, 3))
rng = np.random.default_rng(0)
c1 = rng.integers(0, 2, (cfg.L, cfg.N), dtype=np.uint8)
c2 = rng.integers(0, 2, (cfg.L, cfg.N), dtype=np.uint8)
print("N =", cfg.N, " T_max =", cfg.t_max, " columns =", cfg.n_columns)

# %% [markdown]
# ## Shifting
# Block row i moves right by T[i] block columns. Vacated cells get padding
# bits that both ends regenerate from the padding seed. `#` marks codeword
# bits, `.` marks padding: the staircase.

# %%
m1 = shift(pack_codewords(c1, cfg), cfg.t1, cfg, 1)
for row in m1.padding_mask:
    print("".join("." if p else "#" for p in row))

# %% [markdown]
# ## Mapping and interleaving
# Bit pairs become bases (00 A, 01 C, 10 T, 11 G). The row permutation then
# spreads each block row across the column, so every transmitted column
# carries a regular comb of rows from all block rows.

# %%
print("row order:", (RowPermutation.for_config(cfg).forward + 1).tolist())
x, meta = encode_all(c1, c2, cfg)
for row in x:
    print(to_string(row))

# %% [markdown]
# Cells where both bits are padding are fully known to the receiver and act
# as markers. In the fully loaded third column they sit at rows 4 and 8.

# %%
rx = metadata_for(cfg)
known = interleave(rx.m1.padding_mask & rx.m2.padding_mask, cfg)
for j in range(cfg.n_columns):
    print(f"column {j + 1}: known rows {(np.flatnonzero(known[:, j]) + 1).tolist()}")

# %% [markdown]
# ## Channel
# Each column goes through insertions, deletions and substitutions, then may
# be lost altogether (`?`).

# %%
pool = transmit_pool(x, ChannelParams.from_ids(0.2, p_e=0.2), seed=3)
print(pool.dumps())
