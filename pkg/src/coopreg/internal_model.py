"""Exosystem description and p-copy internal model construction.

The reference and disturbance signals are generated by an autonomous
exosystem ``v(t+1) = S v(t)``; each agent's regulated error is
``e_i = C_i x_i + F v``.  Asymptotic regulation for every initial
``v(0)`` requires the controller to embed a model of ``S``.  The
minimal such model replicates, once per error channel, a companion
realization of the minimal polynomial of ``S``:

* ``beta`` -- ``d x d`` companion matrix of the minimal polynomial,
* ``sigma`` -- its ``d x 1`` controllable input column,
* ``g1 = I_p (x) beta``, ``g2 = I_p (x) sigma``.

Callers with a preferred realization (for instance reusing ``S`` itself
when it is cyclic) can pass ``beta_override``; the override is accepted
only if it has the right characteristic polynomial and the pair stays
controllable.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError
from .matrixops import (
    as_matrix,
    companion_pair,
    controllability_matrix,
    eigenvalues,
    kron,
    minimal_polynomial,
    numeric_rank,
    require_square,
)

__all__ = ["Exosystem", "InternalModel", "build_internal_model", "char_poly"]


@dataclass(frozen=True, eq=False)
class Exosystem:
    """Autonomous signal generator ``v(t+1) = S v(t)`` with output map ``F``.

    Parameters
    ----------
    s : array_like
        ``q x q`` dynamics matrix.
    f : array_like
        ``p x q`` map from exosystem state to the error equation,
        ``e_i = C_i x_i + F v``.
    v0 : array_like, optional
        Initial exosystem state; zeros when omitted.
    """

    s: np.ndarray
    f: np.ndarray
    v0: np.ndarray = None

    def __post_init__(self):
        s = require_square(as_matrix(self.s, "exosystem.s"), "exosystem.s")
        f = as_matrix(self.f, "exosystem.f")
        if f.shape[1] != s.shape[0]:
            raise DimensionError(
                f"exosystem.f: expected {f.shape[0]} x {s.shape[0]}, got {f.shape[0]} x {f.shape[1]}"
            )
        v0 = self.v0
        if v0 is None:
            v0 = np.zeros(s.shape[0])
        v0 = np.asarray(v0, dtype=float).reshape(-1)
        if v0.size != s.shape[0]:
            raise DimensionError(
                f"exosystem.v0: expected length {s.shape[0]}, got {v0.size}"
            )
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "v0", v0)

    @property
    def q(self):
        return self.s.shape[0]

    @property
    def p(self):
        return self.f.shape[0]

    def modes_on_unit_circle(self, tol=1e-9):
        """True if every eigenvalue of ``S`` has modulus within ``tol`` of 1."""
        return bool(np.max(np.abs(np.abs(eigenvalues(self.s, "S")) - 1.0)) <= tol)


@dataclass(frozen=True, eq=False)
class InternalModel:
    """Minimal p-copy internal model of an exosystem.

    Attributes
    ----------
    g1, g2 : ndarray
        Controller matrices ``I_p (x) beta`` and ``I_p (x) sigma``.
    beta, sigma : ndarray
        The per-channel companion pair.
    p : int
        Number of replicated error channels.
    """

    g1: np.ndarray
    g2: np.ndarray
    beta: np.ndarray
    sigma: np.ndarray
    p: int

    @property
    def degree(self):
        """Degree of the replicated polynomial (size of ``beta``)."""
        return self.beta.shape[0]

    @property
    def dim(self):
        """State dimension of the internal model, ``p * degree``."""
        return self.p * self.degree


def char_poly(m):
    """Characteristic polynomial of ``m`` as ascending non-leading coefficients."""
    m = require_square(np.asarray(m, dtype=float), "matrix")
    return np.poly(m)[1:][::-1].astype(float)


def build_internal_model(exo_or_s, p=None, beta_override=None, tol=1e-9):
    """Construct the minimal p-copy internal model for an exosystem.

    Parameters
    ----------
    exo_or_s : Exosystem or array_like
        The exosystem, or its dynamics matrix ``S`` directly (in which
        case ``p`` must be given).
    p : int, optional
        Number of error channels; defaults to ``exo.p`` when an
        :class:`Exosystem` is passed.
    beta_override : tuple of array_like, optional
        A pair ``(beta, sigma)`` replacing the companion realization.
        It must satisfy two checks, each reported separately on failure:
        the characteristic polynomial of ``beta`` must match the
        minimal polynomial of ``S`` coefficient-wise to ``1e-8``, and
        ``(beta, sigma)`` must be controllable.
    tol : float, optional
        Tolerance forwarded to the minimal-polynomial search.

    Returns
    -------
    InternalModel
    """
    if isinstance(exo_or_s, Exosystem):
        s = exo_or_s.s
        if p is None:
            p = exo_or_s.p
    else:
        s = require_square(as_matrix(exo_or_s, "S"), "S")
        if p is None:
            raise ConfigurationError("build_internal_model: p is required when passing S directly")
    p = int(p)
    if p < 1:
        raise ConfigurationError(f"build_internal_model: p must be positive, got {p}")

    min_coeffs = minimal_polynomial(s, tol=tol)

    if beta_override is None:
        beta, sigma = companion_pair(min_coeffs)
    else:
        try:
            beta_raw, sigma_raw = beta_override
        except (TypeError, ValueError):
            raise ConfigurationError(
                "internal_model.beta_override: expected a (beta, sigma) pair"
            )
        beta = require_square(as_matrix(beta_raw, "beta_override.beta"), "beta_override.beta")
        sigma = as_matrix(sigma_raw, "beta_override.sigma")
        d = beta.shape[0]
        if sigma.shape != (d, 1):
            raise ConfigurationError(
                f"beta_override.sigma: expected shape ({d}, 1), got {sigma.shape}"
            )
        if d != min_coeffs.size:
            raise ConfigurationError(
                f"beta_override.beta: degree {d} does not match the minimal polynomial "
                f"degree {min_coeffs.size} of S"
            )
        beta_coeffs = char_poly(beta)
        dev = float(np.max(np.abs(beta_coeffs - min_coeffs)))
        if dev > 1e-8:
            raise ConfigurationError(
                "beta_override.beta: characteristic polynomial does not match the minimal "
                f"polynomial of S (max coefficient deviation {dev:.3e} > 1e-8)"
            )
        if numeric_rank(controllability_matrix(beta, sigma)) < d:
            raise ConfigurationError(
                "beta_override: the pair (beta, sigma) is not controllable"
            )

    g1 = kron(np.eye(p), beta)
    g2 = kron(np.eye(p), sigma)
    return InternalModel(g1=g1, g2=g2, beta=beta, sigma=sigma, p=p)
