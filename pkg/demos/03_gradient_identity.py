# %% [markdown]
# # One gradient, two objectives
#
# On on-policy data the probability ratio is exp(0) = 1 exactly, so the
# clipped surrogate has nothing to clip and its gradient reduces to that of
# mean(log pi * A).

# %%
import numpy as np

from a2cppo import net
from a2cppo.learner import a2c_policy_objective, policy_objective
from a2cppo.net import init_params
from a2cppo.prng import seed_stream

params = init_params(seed_stream(0, 0))
obs = np.random.default_rng(0).uniform(-1, 1, size=(8, 4))
pol = net.policy_forward(params, obs)
actions = pol.log_probs.argmax(axis=1)
logp = pol.log_probs[np.arange(8), actions]
adv = np.linspace(-1, 1, 8)

_, seed_ppo = policy_objective(logp, logp, adv, clip_coef=0.2)
_, seed_a2c = a2c_policy_objective(logp, adv)
print("per-sample seeds identical:", seed_ppo.tobytes() == seed_a2c.tobytes())

# %%
from a2cppo import gradient_identity_check

print(gradient_identity_check(seed=0, trials=100)["max_abs_grad_diff"])
print(gradient_identity_check(seed=0, trials=5, logp_offset=0.1)["max_abs_grad_diff"])
