import warnings

import numpy as np
import pytest
from hypothesis import settings

from magbilliard import GeodesicCircleBoundary, MagneticBilliard, SphericalEllipse, Surface

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

KINDS = [Surface.SPHERE, Surface.HYPERBOLIC]


@pytest.fixture(scope="session")
def ellipse21():
    return SphericalEllipse(2.0, 1.0)


@pytest.fixture(scope="session")
def ellipse_billiard(ellipse21):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return MagneticBilliard(ellipse21, beta=1.0).fit()


@pytest.fixture(scope="session")
def round_billiard():
    """Circle of radius 1 about the pole with Larmor radius 0.4."""
    b = GeodesicCircleBoundary(Surface.SPHERE, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return MagneticBilliard(b, r=0.4).fit()


def random_states(kind, n, rng):
    """Random surface points with metric-unit tangents."""
    from magbilliard.geometry import normalize_point, normalize_tangent

    rng = np.random.default_rng(rng)
    if kind is Surface.SPHERE:
        x = normalize_point(kind, rng.normal(size=(n, 3)))
    else:
        u = rng.uniform(-1.5, 1.5, size=(n, 2))
        x = np.column_stack([u, np.sqrt(1 + np.sum(u * u, axis=1))])
    v = normalize_tangent(kind, x, rng.normal(size=(n, 3)))
    return x, v


def _klein_oval(t, a=0.5, b=0.3):
    z = np.zeros_like(t)
    c, s = np.cos(t), np.sin(t)
    return (np.stack([a * c, b * s, np.ones_like(t)], -1),
            np.stack([-a * s, b * c, z], -1),
            np.stack([-a * c, -b * s, z], -1))


@pytest.fixture(scope="session")
def hyper_oval():
    """Non-round convex curve on the hyperboloid: an ellipse in the Klein chart."""
    from magbilliard.billiard import ParametricBoundary

    return ParametricBoundary(Surface.HYPERBOLIC, _klein_oval)
