"""Deterministic RNG stream derivation.

Every random object in the package is a pure function of a 64-bit master
seed.  Per-sample streams are keyed by (master seed, experiment tag, sample
index) through numpy's SeedSequence, so results do not depend on worker
count or scheduling.  PCG64 with numpy's standard normal/uniform generators
is the fixed algorithm everywhere.
"""

import numpy as np

# stable numeric tags; never reorder or reuse
STREAM_TAGS = {
    "convergence": 1,
    "clt": 2,
    "overlap-decay": 3,
    "derivative-check": 4,
    "interp-check": 5,
    "mcmc": 6,
    "chain": 7,
}


def derive_seed(master_seed: int, tag: str, index: int) -> int:
    """64-bit seed for stream `index` of the experiment `tag`."""
    ss = np.random.SeedSequence((int(master_seed), STREAM_TAGS[tag], int(index)))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(hi) << 32 | int(lo)


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))
