import logging

from gym.envs.registration import register

logger = logging.getLogger(__name__)

# one candidate site per step; v0 rewards the marginal gain, v1 the predicted total after the step
for i, reward in enumerate(['marginal', 'total']):
    register(
        id='SiteExpansion-v{}'.format(i),
        entry_point='expansion_gym.envs.site_expansion:SiteExpansion',
        kwargs={'reward': reward}
    )
