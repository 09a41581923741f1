import numpy as np
import pytest

from klsurv import CLOGLOG, LOG, LOGIT, DomainError, Link, get_link, link_inverse
from klsurv.links import HAZARD_EPS

from helpers import all_links


def test_logit_at_zero():
    assert link_inverse(LOGIT, 0.0) == pytest.approx(0.5)


def test_cloglog_at_zero():
    assert link_inverse(CLOGLOG, 0.0) == pytest.approx(1.0 - np.exp(-1.0), abs=1e-12)


def test_log_at_minus_one():
    assert link_inverse(LOG, -1.0) == pytest.approx(np.exp(-1.0), abs=1e-12)


def test_log_rejects_nonnegative_predictor():
    with pytest.raises(DomainError):
        LOG.inverse(0.5)
    with pytest.raises(DomainError):
        LOG.inverse(0.0)
    with pytest.raises(DomainError):
        LOG.inverse(np.array([-1.0, 0.2]))


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        Link("probit")
    with pytest.raises(ValueError):
        get_link("identity")


def test_derivative_values():
    assert LOGIT.inverse_derivative(0.0) == pytest.approx(0.25)
    assert LOG.inverse_derivative(-1.0) == pytest.approx(np.exp(-1.0))


def test_cloglog_derivative_matches_finite_difference():
    h = 1e-6
    fd = (CLOGLOG.inverse(0.3 + h) - CLOGLOG.inverse(0.3 - h)) / (2.0 * h)
    exact = CLOGLOG.inverse_derivative(0.3)
    assert abs(exact - fd) / abs(fd) < 1e-8


@pytest.mark.parametrize("link", all_links(), ids=lambda lnk: lnk.kind)
def test_inverse_in_unit_interval_and_increasing(link):
    # stay below the saturation range where clamping flattens the curve
    if link.kind == "log":
        grid = np.linspace(-8.0, -1e-3, 200)
    elif link.kind == "cloglog":
        grid = np.linspace(-8.0, 2.5, 200)
    else:
        grid = np.linspace(-8.0, 8.0, 200)
    g = link.inverse(grid)
    assert np.all(g > 0.0) and np.all(g < 1.0)
    assert np.all(np.diff(g) > 0.0)


@pytest.mark.parametrize("link", all_links(), ids=lambda lnk: lnk.kind)
def test_derivatives_match_finite_differences_on_grid(link):
    grid = np.linspace(-4.0, -0.1, 25) if link.kind == "log" else np.linspace(-4.0, 4.0, 25)
    h = 1e-6
    fd1 = (link.inverse(grid + h) - link.inverse(grid - h)) / (2.0 * h)
    np.testing.assert_allclose(link.inverse_derivative(grid), fd1, rtol=1e-6, atol=1e-10)
    fd2 = (link.inverse_derivative(grid + h) - link.inverse_derivative(grid - h)) / (2.0 * h)
    np.testing.assert_allclose(link.inverse_second_derivative(grid), fd2, rtol=1e-5, atol=1e-9)


@pytest.mark.parametrize("link", all_links(), ids=lambda lnk: lnk.kind)
def test_forward_inverts_inverse(link):
    grid = np.linspace(-3.0, -0.1, 20) if link.kind == "log" else np.linspace(-3.0, 3.0, 20)
    np.testing.assert_allclose(link.forward(link.inverse(grid)), grid, rtol=1e-9, atol=1e-12)


def test_forward_domain_checked():
    for link in all_links():
        with pytest.raises(DomainError):
            link.forward(0.0)
        with pytest.raises(DomainError):
            link.forward(1.0)


def test_extreme_predictors_clamped():
    assert LOGIT.inverse(50.0) == 1.0 - HAZARD_EPS
    assert LOGIT.inverse(-50.0) == HAZARD_EPS
    assert CLOGLOG.inverse(10.0) == 1.0 - HAZARD_EPS
    assert LOG.inverse(-40.0) == HAZARD_EPS
