# %% [markdown]
# # Undoing one alignment at a time
#
# Each control changes a single setting on the PPO side only. All but one
# break bit-level equality within 3000 environment steps.

# %%
from a2cppo.harness import NEGATIVE_CONTROLS, check_equivalence

for name, override in NEGATIVE_CONTROLS.items():
    rep = check_equivalence(1, 3000, override)
    print(f"{name:24s} equal={rep.bitwise_equal!s:5s} max|diff|={rep.max_abs_param_diff:.3e}")

# %% [markdown]
# Value clipping stays equal. With one full-batch epoch the value network has
# not moved yet when the loss is taken, so `v_new - v_old` is exactly zero and
# the clipped term coincides with the plain squared error. Give it a second
# epoch and the clip has something to act on:

# %%
rep = check_equivalence(1, 3000, {"clip_vloss": True, "update_epochs": 2})
print("clip_vloss + 2 epochs:", rep.bitwise_equal, rep.max_abs_param_diff)
