"""Estimator-style wrappers around the synthesis functions.

The controllers follow the scikit-learn conventions: hyperparameters are
set in ``__init__`` and exposed through ``get_params``; ``fit`` takes the
plant and cost, stores fitted attributes with a trailing underscore and
returns ``self``; ``predict`` maps an information set to an input.  They
plug straight into :func:`previewlqr.simulate.rollout`.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .model import CostSchedule, CostWeights, DisturbanceWindow, LtiSystem, LtvSystem
from .preview_fh import fh_control, fh_synthesize, fh_value, fh_value_coeffs
from .preview_ih import (
    cost_gap,
    ih_control,
    ih_optimal_cost,
    ih_synthesize,
    lqr_cost,
    nc_cost,
    nc_feedforward,
    nc_synthesize,
)


def _check_lti(system, cost):
    if not isinstance(system, LtiSystem):
        raise TypeError(f"expected LtiSystem, got {type(system).__name__}")
    if not isinstance(cost, CostWeights):
        raise TypeError(f"expected CostWeights, got {type(cost).__name__}")


class PreviewLQR(BaseEstimator):
    """Optimal infinite-horizon controller with ``preview`` steps of
    disturbance preview.

    Parameters
    ----------
    preview : int
        Number of future disturbances available at each step.
    tol, max_iter : float, int
        DARE solver settings.
    validate : bool
        Check the standing assumptions before synthesis.

    Attributes
    ----------
    synthesis_ : IhSynthesis
    Kx_, Kw_, Kv_, P_, Ahat_ : ndarray
    """

    def __init__(self, preview=0, tol=1e-10, max_iter=200, validate=True):
        self.preview = preview
        self.tol = tol
        self.max_iter = max_iter
        self.validate = validate

    def fit(self, system, cost):
        _check_lti(system, cost)
        self.synthesis_ = ih_synthesize(system, cost, self.preview, check=self.validate,
                                        tol=self.tol, max_iter=self.max_iter)
        s = self.synthesis_
        self.Kx_, self.Kw_, self.Kv_, self.P_, self.Ahat_ = s.Kx, s.Kw, s.Kv, s.P, s.Ahat
        return self

    def predict(self, x, window):
        check_is_fitted(self, "synthesis_")
        return ih_control(self.synthesis_, x, window)

    def linear_policy(self):
        """``(Kx, [G_0..G_p])`` with ``u = -Kx x - sum_j G_j w[t+j]``."""
        check_is_fitted(self, "synthesis_")
        return self.Kx_, self.synthesis_.preview_gains()

    def expected_cost(self):
        """Optimal average per-step cost for this preview length."""
        check_is_fitted(self, "synthesis_")
        return ih_optimal_cost(self.synthesis_)

    def state_feedback_cost(self):
        check_is_fitted(self, "synthesis_")
        return lqr_cost(self.synthesis_)

    def score(self, system=None, cost=None):
        """Negative expected cost, so that larger is better."""
        return -self.expected_cost()


class FiniteHorizonPreviewLQR(BaseEstimator):
    """Optimal finite-horizon controller with ``preview`` steps of preview
    on a time-varying plant.  ``predict`` reads the time index from the
    window start."""

    def __init__(self, preview=0, validate=True):
        self.preview = preview
        self.validate = validate

    def fit(self, system, cost):
        if not isinstance(system, LtvSystem) or not isinstance(cost, CostSchedule):
            raise TypeError("FiniteHorizonPreviewLQR.fit expects (LtvSystem, CostSchedule)")
        self.synthesis_ = fh_synthesize(system, cost, self.preview, check=self.validate)
        s = self.synthesis_
        self.Kx_, self.Kw_, self.Kv_, self.P_ = s.Kx_seq, s.Kw_seq, s.Kv_seq, s.P_seq
        return self

    def predict(self, x, window):
        check_is_fitted(self, "synthesis_")
        return fh_control(self.synthesis_, x, window, window.start)

    def value(self, x, window):
        """Optimal expected cost-to-go from ``(x, window)`` at ``window.start``."""
        check_is_fitted(self, "synthesis_")
        return fh_value(self.synthesis_, x, window, window.start)

    def expected_cost(self, x0, w_known):
        """``J*_{T,p}(i_0)`` given ``x0`` and the known ``w_0..w_p``."""
        check_is_fitted(self, "synthesis_")
        window = DisturbanceWindow(0, np.atleast_2d(w_known), self.preview)
        return fh_value_coeffs(self.synthesis_, window, x0)[1]


class NoncausalLQR(BaseEstimator):
    """Optimal controller with the whole disturbance record known.

    Windows passed to ``predict`` hold ``w[t], w[t+1], ...`` up to the end
    of the record; later disturbances are taken as zero.
    """

    preview = None

    def __init__(self, tol=1e-10, validate=True):
        self.tol = tol
        self.validate = validate

    def fit(self, system, cost):
        _check_lti(system, cost)
        self.synthesis_ = nc_synthesize(system, cost, check=self.validate, tol=self.tol)
        s = self.synthesis_
        self.Kx_, self.Kw_, self.Kv_, self.X_ = s.Kx, s.Kw, s.Kv, s.X
        return self

    def predict(self, x, window):
        check_is_fitted(self, "synthesis_")
        g = self.synthesis_.ih
        w = window.values
        v = nc_feedforward(g, w, 0)
        return -g.Kx @ np.asarray(x, dtype=float) - g.Kw @ window[window.start] - g.Kv @ v

    def expected_cost(self):
        check_is_fitted(self, "synthesis_")
        return nc_cost(self.synthesis_)

    def cost_gap(self, preview):
        check_is_fitted(self, "synthesis_")
        return cost_gap(self.synthesis_, preview)

    def score(self, system=None, cost=None):
        return -self.expected_cost()
