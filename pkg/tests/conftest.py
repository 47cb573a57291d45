"""Shared generators and fixtures for the test suite."""

import numpy as np
import pytest

from gokbounds import EnergySpectrum, WeightVector


def make_strict_full(rng, D, mu_lo=0.05, mu_hi=1.0):
    """Random strictly descending weight vector with controlled gaps.

    Drawing the gap view mu and accumulating keeps every adjacent
    difference bounded away from the degeneracy tolerance even after
    normalization.
    """
    mu = rng.uniform(mu_lo, mu_hi, size=D)
    w = np.cumsum(mu[::-1])[::-1]
    return WeightVector(w / w.sum())


def make_strict_head(rng, D, K, mu_lo=0.05, mu_hi=1.0):
    """Random zero-tail weight vector with K strictly descending positives."""
    if not 0 < K < D - 1:
        raise ValueError("strict head needs 0 < K < D-1")
    mu = rng.uniform(mu_lo, mu_hi, size=K)
    head = np.cumsum(mu[::-1])[::-1]
    w = np.concatenate([head, np.zeros(D - K)])
    return WeightVector(w / w.sum())


def make_spectrum(rng, D, gap_lo=0.1, gap_hi=1.0):
    gaps = rng.uniform(gap_lo, gap_hi, size=D - 1)
    e0 = rng.uniform(-2.0, 0.0)
    return EnergySpectrum(np.concatenate([[e0], e0 + np.cumsum(gaps)]))


def random_pair(rng, D, head_K=None, mu_lo=0.05, gap_lo=0.1):
    """A (WeightVector, EnergySpectrum) pair, strictly full unless head_K set."""
    if head_K is None:
        w = make_strict_full(rng, D, mu_lo=mu_lo)
    else:
        w = make_strict_head(rng, D, head_K, mu_lo=mu_lo)
    return w, make_spectrum(rng, D, gap_lo=gap_lo)


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)


# Weight vectors used throughout the scatter reproduction tests: a nearly
# uniform one, the equal-gap optimum, and two geometric profiles with
# adjacent ratios 4 and 8.
FIG5_E = (-1.0, 0.0, 2.0)
FIG5_WEIGHTS = (
    (0.35, 0.33, 0.32),
    (2.0 / 3.0, 1.0 / 3.0, 0.0),
    (16.0 / 21.0, 4.0 / 21.0, 1.0 / 21.0),
    (64.0 / 73.0, 8.0 / 73.0, 1.0 / 73.0),
)

FIG6_E = (-1.0, 0.0, 2.0, 5.0, 8.0)
FIG6_WEIGHTS = (
    (0.35, 0.33, 0.32, 0.0, 0.0),
    (5.0 / 9.0, 3.0 / 9.0, 1.0 / 9.0, 0.0, 0.0),
    (16.0 / 21.0, 4.0 / 21.0, 1.0 / 21.0, 0.0, 0.0),
    (64.0 / 73.0, 8.0 / 73.0, 1.0 / 73.0, 0.0, 0.0),
)
