"""Independent reference computations used by the tests.

Nothing here calls into the filtering or scoring code under test; each helper
recomputes its quantity from first principles (batch algebra, sampling).
"""

import numpy as np
from scipy import stats

from carxefe.belief import NormalGammaBelief


def random_belief(rng, dim, shape_range=(1.5, 6.0)):
    a = rng.normal(size=(dim, dim))
    precision = a @ a.T / dim + np.eye(dim) * rng.uniform(0.5, 2.0)
    return NormalGammaBelief(
        rng.normal(scale=0.5, size=dim),
        0.5 * (precision + precision.T),
        rng.uniform(*shape_range),
        rng.uniform(0.5, 5.0),
    )


def batch_posterior(prior, X, y):
    """One-shot Normal-Gamma posterior from the stacked design matrix."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    lam = X.T @ X + prior.precision
    mu = np.linalg.solve(lam, X.T @ y + prior.precision @ prior.mean)
    shape = prior.shape + 0.5 * len(y)
    rate = prior.rate + 0.5 * (y @ y + prior.mean @ prior.precision @ prior.mean - mu @ lam @ mu)
    return mu, lam, shape, rate


def sample_params(belief, n, rng):
    """Draw ``(theta, tau)`` pairs from the Normal-Gamma belief."""
    tau = rng.gamma(belief.shape, 1.0 / belief.rate, size=n)
    chol = np.linalg.cholesky(belief.precision)
    z = rng.standard_normal((n, belief.dim))
    # theta - mean ~ N(0, (tau * L L^T)^-1)  =>  L^T (theta - mean) sqrt(tau) ~ N(0, I)
    theta = belief.mean + np.linalg.solve(chol.T, z.T).T / np.sqrt(tau)[:, None]
    return theta, tau


def mc_predictive_density(belief, x, ys, n, rng):
    """Monte Carlo marginal of the Gaussian likelihood over the belief at each ``y``."""
    theta, tau = sample_params(belief, n, rng)
    m = theta @ x
    out = []
    for y in np.atleast_1d(ys):
        out.append(np.mean(np.sqrt(tau / (2 * np.pi)) * np.exp(-0.5 * tau * (y - m) ** 2)))
    return np.array(out)


def mc_efe_samples(belief, xs, goal_mean, goal_var, n, rng):
    """Per-sample integrands of cross-entropy minus mutual information, one row per regressor.

    The same ``(theta, tau, noise)`` draws are shared across regressors so
    differences between rows have reduced variance.
    """
    theta, tau = sample_params(belief, n, rng)
    eps = rng.standard_normal(n)
    chol = np.linalg.cholesky(belief.precision)
    rows = []
    for x in xs:
        x = np.asarray(x, dtype=float)
        mean = theta @ x
        y = mean + eps / np.sqrt(tau)
        w = np.linalg.solve(chol, x)
        loc = belief.mean @ x
        scale = belief.rate / belief.shape * (w @ w + 1.0)
        log_pred = stats.t.logpdf(y, df=2 * belief.shape, loc=loc, scale=np.sqrt(scale))
        log_lik = stats.norm.logpdf(y, loc=mean, scale=1.0 / np.sqrt(tau))
        cross_entropy = -stats.norm.logpdf(y, loc=goal_mean, scale=np.sqrt(goal_var))
        rows.append(cross_entropy - (log_lik - log_pred))
    return np.array(rows)
