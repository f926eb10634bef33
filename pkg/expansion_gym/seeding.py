from gym.utils import seeding


def np_random(seed=None, stream=None):
    """
    Random state for `seed`, optionally on a named sub-stream.

    Sub-streams hash '<stream>:<seed>' so simulation, CV folds and permutations can each be rerun in isolation
    and still draw the numbers they drew inside a full run.
    """
    if stream is not None and seed is not None:
        seed = seeding.create_seed('{}:{}'.format(stream, seed))
    rng, _ = seeding.np_random(seed)
    return rng


def child_seed(rng):
    """Integer seed for libraries that take their own `random_state`."""
    return int(rng.randint(0, 2 ** 31 - 1))
