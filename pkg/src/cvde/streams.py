"""Named random sub-streams derived from one master seed."""
import numpy as np

STREAMS = {"directions": 1, "chains": 2, "splits": 3, "train": 4, "test": 5, "runs": 6}


def substream(seed, name, *extra):
    """SeedSequence for stream ``name`` (plus optional integer tags) under ``seed``."""
    if seed is None:
        return np.random.SeedSequence()
    return np.random.SeedSequence([int(seed), STREAMS[name], *map(int, extra)])
