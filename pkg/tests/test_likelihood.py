import numpy as np
import pytest

from klsurv import (
    AlignmentError,
    DimensionError,
    LOGIT,
    ParamVector,
    SurvivalDataset,
    expand_person_period,
    gradient,
    hessian,
    log_likelihood,
    pseudo_responses,
    weighted_log_likelihood,
)

from helpers import all_links, fd_gradient, fd_jacobian, product_form_log_likelihood, random_instance


def one_row_table(event=True):
    data = SurvivalDataset.from_arrays([1], [event], np.zeros((1, 0)), tau=1)
    return expand_person_period(data)


def test_single_row_values():
    params = ParamVector(np.array([0.0]), np.array([]))
    assert log_likelihood(params, one_row_table(True), LOGIT) == pytest.approx(np.log(0.5))
    assert log_likelihood(params, one_row_table(False), LOGIT) == pytest.approx(np.log(0.5))


@pytest.mark.parametrize("link", all_links(), ids=lambda lnk: lnk.kind)
def test_matches_product_form_oracle(link):
    rng = np.random.default_rng(2024)
    for _ in range(20):
        data, params = random_instance(rng, n=5, tau=3, p=2, link_kind=link.kind)
        table = expand_person_period(data)
        ours = log_likelihood(params, table, link)
        oracle = product_form_log_likelihood(data, params, link)
        assert ours == pytest.approx(oracle, abs=1e-10)


def test_pseudo_responses_basics():
    death = np.array([1.0, 0.0, 1.0])
    preds = np.array([0.2, 0.8, 0.5])
    blended = pseudo_responses(death, preds, 1.0)
    np.testing.assert_allclose(blended, [(1.0 + 0.2) / 2, 0.4, 0.75])
    assert np.all((blended >= 0.0) & (blended <= 1.0))
    # lam = 0 reproduces the indicators bit for bit
    zero = pseudo_responses(death, preds, 0.0)
    assert np.array_equal(zero, death)


def test_pseudo_responses_validation():
    death = np.zeros(2)
    with pytest.raises(ValueError):
        pseudo_responses(death, np.array([0.5, 0.5]), -1.0)
    with pytest.raises(AlignmentError):
        pseudo_responses(death, np.array([0.5]), 1.0)
    with pytest.raises(ValueError):
        pseudo_responses(death, np.array([0.5, 1.0]), 1.0)


def test_weighted_equals_unweighted_at_lambda_zero():
    rng = np.random.default_rng(7)
    for _ in range(10):
        data, params = random_instance(rng, n=6, tau=4, p=3)
        table = expand_person_period(data)
        preds = rng.uniform(0.05, 0.95, size=table.n_rows)
        plain = log_likelihood(params, table, LOGIT)
        weighted = weighted_log_likelihood(params, table, preds, 0.0, LOGIT)
        assert weighted == plain  # bit-for-bit


def test_weighted_trivial_cases():
    # delta = 1, pred ~ 1, lam = 7: pseudo-response is (1 + 7p)/8 with p -> 1
    table = one_row_table(True)
    params = ParamVector(np.array([0.3]), np.array([]))
    preds = np.array([1.0 - 1e-12])
    plain = log_likelihood(params, table, LOGIT)
    assert weighted_log_likelihood(params, table, preds, 7.0, LOGIT) == pytest.approx(
        plain, abs=1e-10
    )
    # one censored row at eta = 0: the first term vanishes because logit(g) = 0
    table0 = one_row_table(False)
    params0 = ParamVector(np.array([0.0]), np.array([]))
    value = weighted_log_likelihood(params0, table0, np.array([0.8]), 1.0, LOGIT)
    assert value == pytest.approx(np.log(0.5))


def test_weighted_is_continuous_in_lambda():
    rng = np.random.default_rng(11)
    data, params = random_instance(rng, n=8, tau=3, p=2)
    table = expand_person_period(data)
    preds = rng.uniform(0.1, 0.9, size=table.n_rows)
    lams = np.linspace(0.0, 10.0, 200)
    values = np.array(
        [weighted_log_likelihood(params, table, preds, lam, LOGIT) for lam in lams]
    )
    psi = params.eta[table.period - 1] + table.covariates @ params.beta
    g = LOGIT.inverse(psi)
    max_logit = np.max(np.abs(np.log(g / (1.0 - g))))
    for i in range(1, lams.size):
        resp_jump = np.abs(
            pseudo_responses(table.death, preds, lams[i])
            - pseudo_responses(table.death, preds, lams[i - 1])
        ).sum()
        assert abs(values[i] - values[i - 1]) <= max_logit * resp_jump + 1e-12


def test_gradient_single_row_logistic_score():
    params = ParamVector(np.array([0.0]), np.array([]))
    grad = gradient(params, one_row_table(True), LOGIT)
    assert grad.shape == (1,)
    assert grad[0] == pytest.approx(0.5)


def test_hessian_single_row():
    params = ParamVector(np.array([0.0]), np.array([]))
    hess = hessian(params, one_row_table(True), LOGIT)
    assert hess.shape == (1, 1)
    assert hess[0, 0] == pytest.approx(-0.25)


@pytest.mark.parametrize("link", all_links(), ids=lambda lnk: lnk.kind)
def test_gradient_matches_finite_differences(link):
    rng = np.random.default_rng(33)
    for use_prior in (False, True):
        for _ in range(5):
            data, params = random_instance(rng, n=6, tau=3, p=2, link_kind=link.kind)
            table = expand_person_period(data)
            preds = rng.uniform(0.2, 0.8, size=table.n_rows) if use_prior else None
            lam = 0.7 if use_prior else 0.0

            def value(arr):
                pv = ParamVector.from_array(arr, table.tau)
                if preds is None:
                    return log_likelihood(pv, table, link)
                return weighted_log_likelihood(pv, table, preds, lam, link)

            x0 = params.as_array()
            analytic = gradient(params, table, link, preds, lam)
            np.testing.assert_allclose(analytic, fd_gradient(value, x0), rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("link", all_links(), ids=lambda lnk: lnk.kind)
def test_hessian_matches_finite_differences(link):
    rng = np.random.default_rng(44)
    for _ in range(5):
        data, params = random_instance(rng, n=6, tau=3, p=2, link_kind=link.kind)
        table = expand_person_period(data)
        preds = rng.uniform(0.2, 0.8, size=table.n_rows)

        def grad_at(arr):
            pv = ParamVector.from_array(arr, table.tau)
            return gradient(pv, table, link, preds, 0.5)

        analytic = hessian(params, table, link, preds, 0.5)
        fd = fd_jacobian(grad_at, params.as_array())
        np.testing.assert_allclose(analytic, fd, rtol=1e-5, atol=1e-7)
        np.testing.assert_allclose(analytic, analytic.T, atol=1e-12)


def test_logit_hessian_negative_semidefinite():
    rng = np.random.default_rng(55)
    for _ in range(10):
        data, params = random_instance(rng, n=10, tau=4, p=3)
        table = expand_person_period(data)
        preds = rng.uniform(0.05, 0.95, size=table.n_rows)
        hess = hessian(params, table, LOGIT, preds, rng.uniform(0.0, 5.0))
        eigvals = np.linalg.eigvalsh(hess)
        assert np.all(eigvals <= 1e-10)


def test_dimension_errors():
    data, params = random_instance(np.random.default_rng(1), n=4, tau=3, p=2)
    table = expand_person_period(data)
    with pytest.raises(DimensionError):
        log_likelihood(ParamVector(np.zeros(2), params.beta), table, LOGIT)
    with pytest.raises(DimensionError):
        log_likelihood(ParamVector(params.eta, np.zeros(5)), table, LOGIT)
    with pytest.raises(ValueError):
        gradient(params, table, LOGIT, None, 1.0)  # lam > 0 needs predictions
