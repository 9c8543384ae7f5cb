"""Counter-style random streams: one independent generator per (seed, trial index)."""
import numpy as np


def trial_rng(seed: int, *index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(i) for i in index)))


DENSITY_AMPLITUDES = (0.5, 2.0, 5.0)


def random_log_density(rng: np.random.Generator, size: int, amplitude: float) -> np.ndarray:
    return rng.uniform(-amplitude, amplitude, size=size)


def random_density(rng: np.random.Generator, size: int, amplitude: float) -> np.ndarray:
    """f = e^g with g i.i.d. uniform on [-amplitude, amplitude]."""
    return np.exp(random_log_density(rng, size, amplitude))


def density_trials(seed: int, n: int, size: int, amplitudes=DENSITY_AMPLITUDES):
    """Yield n random positive densities, cycling through the amplitudes."""
    for t in range(n):
        yield random_density(trial_rng(seed, t), size, amplitudes[t % len(amplitudes)])
