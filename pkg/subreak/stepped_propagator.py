import math

import numpy as np
from scipy.integrate import solve_ivp

from subreak.abc import Propagator
from subreak.errors import InvalidArgumentError, SubreakError


class SteppedIntegrationPropagator(Propagator):
    """Integrates ``d psi/dt = -i (K - i mu) psi`` with an explicit
    eighth-order Runge-Kutta scheme (DOP853) over steps of length
    ``time_step``, renormalizing after every step and accumulating the
    log-norm. Long spans therefore never overflow.
    """

    stepped = True

    def __init__(self, generator, rel_tolerance=1e-10, time_step=None):
        super().__init__(generator, rel_tolerance, time_step)
        if time_step is None or not time_step > 0:
            raise InvalidArgumentError(
                f'time_step={time_step} must be positive for stepped '
                'integration')
        self._shifted = self.generator \
            - 1j * self.growth_bound * np.eye(self.dimension)
        self._rtol = max(rel_tolerance * 1e-2, 1e-13)
        self._atol = self._rtol * 1e-2

    def _rhs(self, _, psi):
        return -1j * (self._shifted @ psi)

    def _evolve(self, vector, t):
        n_steps = max(1, math.ceil(t / self.time_step * (1 - 1e-12)))
        step = t / n_steps
        log_scale = self.growth_bound * t
        psi = np.asarray(vector, dtype=complex)
        for _ in range(n_steps):
            solution = solve_ivp(self._rhs, (0.0, step), psi,
                                 method='DOP853',
                                 rtol=self._rtol,
                                 atol=self._atol)
            if not solution.success:
                raise SubreakError(
                    f'stepped integration failed: {solution.message}')
            psi = solution.y[:, -1]
            norm = np.linalg.norm(psi)
            psi = psi / norm
            log_scale += math.log(norm)
        return psi, log_scale


__all__ = ['SteppedIntegrationPropagator']
