# %% [markdown]
# # PPO on cart-pole
#
# Adam, 32-step rollouts over 4 environments, 4 epochs of 4 minibatches,
# GAE with lambda 0.95. About 100k environment steps; takes a minute or two.

# %%
import math

from a2cppo import ppo_preset, run_training
from a2cppo.harness import evaluate_returns
from a2cppo.net import init_params
from a2cppo.prng import seed_stream

hp = ppo_preset().override(num_steps=32, minibatch_size=32)
res = run_training(hp, seed=1, total_env_steps=782 * hp.batch_size, algo="ppo", log="ppo_metrics.csv")

# %%
for rec in res.metrics[::50]:
    r = rec["mean_episodic_return"]
    print(f"{rec['env_steps']:7d}  {'-' if math.isnan(r) else f'{r:6.1f}'}")

# %%
before = evaluate_returns(init_params(seed_stream(1, 0)), seed=99, episodes=50)
after = evaluate_returns(res.params, seed=99, episodes=20)
print("untrained:", sum(before) / len(before), " trained:", sum(after) / len(after))
