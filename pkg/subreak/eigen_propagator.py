import logging

import numpy as np
from scipy.linalg import eig, lu_factor, lu_solve

from subreak.abc import Propagator
from subreak.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


class DenseEigenPropagator(Propagator):
    """Reference backend: evaluates the propagator from a general complex
    eigendecomposition ``K = V diag(lambda) V^-1``.

    ``K`` is complex-symmetric but not Hermitian, so the eigenvectors are
    not orthogonal; the expansion coefficients come from an LU solve with
    ``V`` and every eigenpair is checked against
    ``||K v - lambda v|| <= residual_tolerance ||K||``.
    """

    residual_tolerance = 1e-10

    def __init__(self, generator, rel_tolerance=1e-10, time_step=None):
        super().__init__(generator, rel_tolerance, time_step)
        values, vectors = eig(self.generator)
        scale = max(np.linalg.norm(self.generator, 2), np.finfo(float).tiny)
        residuals = np.linalg.norm(
            self.generator @ vectors - vectors * values, axis=0)
        worst = float(np.max(residuals))
        if worst > self.residual_tolerance * scale:
            raise InvalidArgumentError(
                f'eigendecomposition residual {worst:.3g} exceeds '
                f'{self.residual_tolerance:g} * ||K|| = '
                f'{self.residual_tolerance * scale:.3g}')
        condition = np.linalg.cond(vectors)
        if condition * np.finfo(float).eps > rel_tolerance:
            logger.warning('eigenvector matrix has condition number %.3g; '
                           'dense_eigen results may miss rel_tolerance=%g',
                           condition, rel_tolerance)
        self.eigenvalues = values
        self.eigenvectors = vectors
        self._lu = lu_factor(vectors)

    def _evolve(self, vector, t):
        coefficients = lu_solve(self._lu, vector)
        exponents = -1j * self.eigenvalues * t
        shift = float(np.max(exponents.real))
        scaled = self.eigenvectors @ (np.exp(exponents - shift)
                                      * coefficients)
        return scaled, shift


__all__ = ['DenseEigenPropagator']
