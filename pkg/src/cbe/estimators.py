"""Scikit-learn style wrappers around the sign-projection encoders.

Each estimator draws (or learns) its projection parameters in ``fit`` and
maps data to k-bit codes in ``transform``. Codes come back as an
(n_samples, n_bits) int8 array in {-1, +1} so they compose with the rest
of the ecosystem; ``encode`` returns the bit-packed form used for Hamming
search.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .codes import BinaryCodes
from .encoders import (
    bilinear_encode,
    bilinear_random,
    cbe_encode,
    cbe_random,
    encode_matrix,
    fjlt_encode,
    fjlt_random,
    lsh_encode,
    lsh_random,
)
from .optimizer import OptConfig, train
from .validation import check_data_matrix


class _SignProjectionMixin(TransformerMixin):
    params_ = None

    def _check_fitted(self):
        if self.params_ is None:
            raise NotFittedError(
                f"This {type(self).__name__} instance is not fitted yet; call fit first."
            )

    def _encode(self, X):
        raise NotImplementedError

    def transform(self, X) -> np.ndarray:
        """Project to (n_samples, n_bits) codes in {-1, +1} (int8)."""
        self._check_fitted()
        X = check_data_matrix(X, d=self.n_features_in_)
        return self._encode(X)

    def encode(self, X, threads: int = 1) -> BinaryCodes:
        """Project and bit-pack; identical bytes for any thread count."""
        self._check_fitted()
        X = check_data_matrix(X, d=self.n_features_in_)
        return encode_matrix(self.params_, X, threads=threads)


class CirculantBinaryEmbedding(_SignProjectionMixin, BaseEstimator):
    """Binary codes from a circulant sign projection, O(d log d) per point.

    Parameters
    ----------
    n_bits : int or None
        Output code length; defaults to the input dimension.
    optimize : bool
        If True, learn the generator from the fitted data by alternating
        time/frequency minimization; otherwise draw it at random.
    lam : float
        Orthogonality penalty weight for the learned variant.
    mu : float
        Weight of the pairwise similar/dissimilar term (0 = unsupervised).
    max_iter : int
        Outer alternation iterations for the learned variant.
    tol : float
        Relative objective-decrease stopping tolerance.
    solver : str
        Pair-subproblem solver: "radial_exact" or "gradient_descent".
    random_state : int
        Seed for the parameter draw / initialization.
    """

    def __init__(self, n_bits=None, optimize=False, lam=1.0, mu=0.0, max_iter=10,
                 tol=1e-4, solver="radial_exact", random_state=0):
        self.n_bits = n_bits
        self.optimize = optimize
        self.lam = lam
        self.mu = mu
        self.max_iter = max_iter
        self.tol = tol
        self.solver = solver
        self.random_state = random_state

    def fit(self, X, y=None, constraints=None):
        X = check_data_matrix(X)
        self.n_features_in_ = X.shape[1]
        k = self.n_features_in_ if self.n_bits is None else int(self.n_bits)
        if self.optimize:
            config = OptConfig(k=k, lam=self.lam, mu=self.mu, max_outer_iters=self.max_iter,
                               objective_rel_tol=self.tol, solver_mode=self.solver)
            self.params_, state = train(X, config, constraints=constraints,
                                        seed=self.random_state)
            self.objective_trace_ = list(state.objective_trace)
        else:
            self.params_ = cbe_random(self.n_features_in_, k, self.random_state)
            self.objective_trace_ = []
        return self

    def _encode(self, X):
        return cbe_encode(self.params_, X)


class SignRandomProjection(_SignProjectionMixin, BaseEstimator):
    """Classic LSH: sign of a dense Gaussian projection, O(dk) per point."""

    def __init__(self, n_bits=None, random_state=0):
        self.n_bits = n_bits
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_data_matrix(X)
        self.n_features_in_ = X.shape[1]
        k = self.n_features_in_ if self.n_bits is None else int(self.n_bits)
        self.params_ = lsh_random(self.n_features_in_, k, self.random_state)
        return self

    def _encode(self, X):
        return lsh_encode(self.params_, X)


class BilinearSignProjection(_SignProjectionMixin, BaseEstimator):
    """Sign of a two-sided projection of the reshaped input, O(d sqrt(k))."""

    def __init__(self, n_bits=None, random_state=0):
        self.n_bits = n_bits
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_data_matrix(X)
        self.n_features_in_ = X.shape[1]
        k = self.n_features_in_ if self.n_bits is None else int(self.n_bits)
        self.params_ = bilinear_random(self.n_features_in_, k, self.random_state)
        return self

    def _encode(self, X):
        return bilinear_encode(self.params_, X)


class FjltSignProjection(_SignProjectionMixin, BaseEstimator):
    """Sign of a sparse Gaussian projection after a signed Hadamard mix."""

    def __init__(self, n_bits=None, density=0.1, random_state=0):
        self.n_bits = n_bits
        self.density = density
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_data_matrix(X)
        self.n_features_in_ = X.shape[1]
        k = self.n_features_in_ if self.n_bits is None else int(self.n_bits)
        self.params_ = fjlt_random(self.n_features_in_, k, self.density, self.random_state)
        return self

    def _encode(self, X):
        return fjlt_encode(self.params_, X)
