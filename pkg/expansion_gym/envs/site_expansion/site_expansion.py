import copy
import logging

import gym
import numpy as np
from gym import spaces
from gym.utils import seeding

from ..utils.draw import draw_canvas, draw_circle, draw_score_board, draw_square, project, scale_radii

logger = logging.getLogger(__name__)


class SiteExpansion(gym.Env):
    """
    Opening the add-on product at candidate sites, one site per step.

    The environment wraps an `ExpansionProblem`. An episode starts from the fixed (active) sites only; each action
    is the position of a candidate in `problem.candidates` and adds it to the offering set. The episode ends after
    `problem.K` additions.

    Observation: binary mask over the candidates, 1 where the add-on is already offered.
    Reward: with `reward='marginal'`, the increase of predicted total add-on sales caused by the step; with
    `reward='total'`, the predicted total after the step.
    `info` carries the added site (network position), its marginal and the running total.

    Choosing an already selected candidate is an error.
    """
    metadata = {'render.modes': ['rgb_array']}

    def __init__(self, problem=None, reward: str = 'marginal', canvas_size=400):
        assert problem is not None, 'SiteExpansion needs an ExpansionProblem'
        assert reward in REWARDS, 'reward should be one of {}, found {}'.format(REWARDS, reward)
        self.problem = problem
        self._reward = reward
        self._canvas_size = canvas_size
        self.n_candidates = len(problem.candidates)

        self.action_space = spaces.Discrete(self.n_candidates)
        self.observation_space = spaces.MultiBinary(self.n_candidates)

        self._mask = None
        self._order = None
        self._step_count = None
        self._total = None
        self._base_img = None
        self.seed()

    @property
    def chosen(self):
        return tuple(self.problem.candidates[i] for i in self._order)

    @property
    def total(self):
        return self._total

    def get_action_meanings(self):
        return [self.problem.network.ids[site] for site in self.problem.candidates]

    def reset(self):
        self._mask = np.zeros(self.n_candidates, dtype=np.int8)
        self._order = []
        self._step_count = 0
        self._total = self.problem.evaluate(())
        return self._mask.copy()

    def marginal_gains(self):
        """Objective increase of adding each candidate now; -inf for candidates already selected."""
        assert self._step_count is not None, "Call reset before using marginal_gains method."
        gains = np.full(self.n_candidates, -np.inf)
        open_positions = np.flatnonzero(self._mask == 0)
        if open_positions.size:
            sites = np.asarray(self.problem.candidates)[open_positions]
            gains[open_positions] = self.problem.marginal_gains(self.chosen, sites)
        return gains

    def step(self, action):
        assert self._step_count is not None, "Call reset before using step method."
        assert self.action_space.contains(action), 'invalid action {}'.format(action)
        assert self._mask[action] == 0, 'candidate {} is already selected'.format(action)
        assert self._step_count < self.problem.K, 'episode is over, call reset'

        site = self.problem.candidates[action]
        marginal = float(self.problem.marginal_gains(self.chosen, [site])[0])
        self._mask[action] = 1
        self._order.append(int(action))
        self._step_count += 1
        self._total = self.problem.evaluate(self.chosen)

        reward = marginal if self._reward == 'marginal' else self._total
        done = self._step_count >= self.problem.K
        logger.debug('Step %d: added %s, marginal %.6g, total %.6g', self._step_count,
                     self.problem.network.ids[site], marginal, self._total)
        return self._mask.copy(), reward, done, {'site': site, 'marginal': marginal, 'total': self._total}

    def __draw_base_img(self):
        network = self.problem.network
        self._points = project(network.coordinates, self._canvas_size)
        g = network.base_sales
        self._radii = scale_radii(g[list(self.problem.candidates)], MIN_RADIUS, MAX_RADIUS)
        self._base_img = draw_canvas(self._canvas_size, fill='white')
        for site in self.problem.fixed:
            draw_square(self._base_img, self._points[site], fill=ACTIVE_COLOR)

    def render(self, mode='rgb_array'):
        assert self._step_count is not None, "Call reset before using render method."
        assert mode in self.metadata['render.modes'], 'unsupported render mode {}'.format(mode)
        if self._base_img is None:
            self.__draw_base_img()

        img = copy.copy(self._base_img)
        for position, site in enumerate(self.problem.candidates):
            fill = CHOSEN_COLOR if self._mask[position] else None
            draw_circle(img, self._points[site], radius=self._radii[position], fill=fill, outline=CANDIDATE_COLOR)
        img = draw_score_board(img, 'K={}/{}  total={:.2f}'.format(self._step_count, self.problem.K, self._total))
        return np.asarray(img)

    def seed(self, n=None):
        self.np_random, seed = seeding.np_random(n)
        return [seed]

    def close(self):
        self._base_img = None


REWARDS = ('marginal', 'total')

ACTIVE_COLOR = 'gold'
CANDIDATE_COLOR = 'steelblue'
CHOSEN_COLOR = 'steelblue'

MIN_RADIUS = 3.0
MAX_RADIUS = 10.0
