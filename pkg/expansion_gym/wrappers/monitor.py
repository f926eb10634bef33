import logging
import os

import gym
import pandas as pd

logger = logging.getLogger(__name__)


class Monitor(gym.Wrapper):
    """
    Records every step of a SiteExpansion episode: episode number, step, added site, its marginal and the total.

    With a `directory`, each finished episode is appended to `<directory>/steps.csv`.
    """

    def __init__(self, env, directory=None):
        super().__init__(env)
        self.directory = directory
        self.records = []
        self.episode_id = -1
        self._step_id = 0

        if directory is not None and not os.path.exists(directory):
            logger.info('Creating monitor directory %s', directory)
            os.makedirs(directory, exist_ok=True)

    def reset(self, **kwargs):
        self.episode_id += 1
        self._step_id = 0
        return self.env.reset(**kwargs)

    def step(self, action):
        observation, reward, done, info = self.env.step(action)
        self._step_id += 1
        network = self.env.unwrapped.problem.network
        self.records.append({
            'episode': self.episode_id,
            'step': self._step_id,
            'site_id': network.ids[info['site']],
            'site': info['site'],
            'marginal': info['marginal'],
            'total': info['total'],
            'reward': reward,
        })
        if done and self.directory is not None:
            self._flush()
        return observation, reward, done, info

    def episode(self, episode_id=None):
        episode_id = self.episode_id if episode_id is None else episode_id
        return [record for record in self.records if record['episode'] == episode_id]

    def to_frame(self):
        return pd.DataFrame(self.records, columns=RECORD_COLUMNS)

    def _flush(self):
        path = os.path.join(self.directory, STEPS_FILE)
        frame = pd.DataFrame(self.episode(), columns=RECORD_COLUMNS)
        frame.to_csv(path, mode='a', header=not os.path.exists(path), index=False)


RECORD_COLUMNS = ['episode', 'step', 'site_id', 'site', 'marginal', 'total', 'reward']
STEPS_FILE = 'steps.csv'
