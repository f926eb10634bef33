"""
Usage: python scripts/record_environment.py --sites region.csv --model model.json --k 10
"""

import argparse
import os

import gym
import imageio
import numpy as np

from expansion_gym.cli_io import load_sites
from expansion_gym.demand_models import DemandModel
from expansion_gym.optimize import build_problem


def parse_arguments():
    parser = argparse.ArgumentParser(description='Record a greedy SiteExpansion rollout.')
    parser.add_argument('--output_dir', type=str, default='static/gif/',
                        help='Output directory with GIF record.')
    parser.add_argument('--sites', type=str, required=True, help='Site CSV.')
    parser.add_argument('--model', type=str, required=True, help='Fitted model file.')
    parser.add_argument('--k', type=int, default=10, help='Number of sites to open.')
    parser.add_argument('--fps', type=int, default=2,
                        help='Frame per second.')
    return parser.parse_args()


def main(args):
    network = load_sites(args.sites)
    problem = build_problem(DemandModel.load(args.model), network, args.k, solver='greedy')
    env = gym.make('expansion_gym:SiteExpansion-v0', problem=problem)
    pics = []
    done = False

    env.reset()
    while not done:
        pics.append(env.render(mode='rgb_array'))
        gains = env.marginal_gains()
        _, _, done, _ = env.step(int(np.argmax(gains)))
    pics.append(env.render(mode='rgb_array'))

    print("Environment finished.")
    os.makedirs(args.output_dir, exist_ok=True)
    imageio.mimwrite(os.path.join(args.output_dir, 'site_expansion.gif'), pics, fps=args.fps)


if __name__ == "__main__":
    args = parse_arguments()
    main(args)
