from collections import OrderedDict

import numpy as np
from scipy.linalg import expm

from subreak.abc import Propagator


class ScalingSquaringPropagator(Propagator):
    """Evaluates the propagator as a dense matrix exponential (Pade
    approximation with scaling and squaring) of the growth-shifted
    generator ``-i t (K - i mu)``.

    Propagator matrices are cached per time span, so repeated steps of equal
    length cost one matrix-vector product each.
    """

    cache_size = 8

    def __init__(self, generator, rel_tolerance=1e-10, time_step=None):
        super().__init__(generator, rel_tolerance, time_step)
        self._shifted = self.generator \
            - 1j * self.growth_bound * np.eye(self.dimension)
        self._cache = OrderedDict()

    def matrix(self, t):
        """Non-expanding propagator ``exp(-i t (K - i mu))``."""
        if t in self._cache:
            self._cache.move_to_end(t)
            return self._cache[t]
        propagator = expm(-1j * t * self._shifted)
        self._cache[t] = propagator
        if len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)
        return propagator

    def _evolve(self, vector, t):
        return self.matrix(t) @ vector, self.growth_bound * t


__all__ = ['ScalingSquaringPropagator']
