# %% [markdown]
# # A2C as a configuration of PPO
#
# Train the same seed twice: once through the plain A2C update (one full-batch
# step on the log-probability objective), once through the PPO update loop
# with its knobs aligned to A2C. Then compare every weight bit for bit.

# %%
from a2cppo import a2c_preset, check_equivalence, run_training
from a2cppo.harness import compare_params

hp = a2c_preset()
hp

# %%
a2c = run_training(hp, seed=1, total_env_steps=3000, algo="a2c")
ppo = run_training(hp, seed=1, total_env_steps=3000, algo="ppo")
print(len(a2c.metrics), "iterations each")

# %%
equal, max_diff, per_tensor = compare_params(a2c.params, ppo.params)
print("bitwise equal:", equal, " max |diff|:", max_diff)
for name, diff in per_tensor:
    print(f"  {name:12s} {diff}")

# %% [markdown]
# `check_equivalence` wraps the two runs and the comparison into one report.

# %%
for seed in (1, 2, 3):
    rep = check_equivalence(seed, 3000)
    print(seed, rep.bitwise_equal, rep.max_abs_param_diff)
