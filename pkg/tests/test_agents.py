import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfvnet import matrixkit as mk
from gfvnet.agents import (AgentModel, RationalTF, closed_agent_matrix, minimality,
                           realize_siso)
from gfvnet.errors import DimensionError

from conftest import PENDULUM_DEN, PENDULUM_NUM


def test_realize_integrator():
    a = realize_siso(RationalTF([1.0], [1.0, 0.0]))
    np.testing.assert_array_equal(a.Ah, [[0.0]])
    np.testing.assert_array_equal(a.Bh, [[1.0]])
    np.testing.assert_array_equal(a.Ch, [[1.0]])


def test_realize_second_order():
    a = realize_siso(RationalTF([1.0], [1.0, 3.0, 2.0]))
    np.testing.assert_array_equal(a.Ah, [[0, 1], [-2, -3]])
    np.testing.assert_array_equal(a.Bh, [[0], [1]])
    np.testing.assert_array_equal(a.Ch, [[1, 0]])
    for s in (1 + 1j, -0.3 + 2j):
        assert abs(a.transfer(s)[0, 0] - 1 / (s * s + 3 * s + 2)) < 1e-14


def test_realize_pendulum(pendulum_agent):
    a = pendulum_agent
    assert (a.n, a.m) == (4, 1)
    np.testing.assert_allclose(a.Ah[-1], [0.0, 10.0, 7.0, -4.0])
    np.testing.assert_allclose(a.Ch[0], [2.1, 1.048, 1.899, 0.95])
    s = 1 + 1j
    expected = (0.5 * s + 1) * (1.9 * s**2 - 0.002 * s + 2.1) / (s * (s - 2) * (s + 1) * (s + 5))
    assert abs(a.transfer(s)[0, 0] - expected) < 1e-13


def test_realize_normalizes_denominator():
    a = realize_siso(RationalTF([2.0], [2.0, 6.0, 4.0]))
    np.testing.assert_array_equal(a.Ah, [[0, 1], [-2, -3]])
    np.testing.assert_array_equal(a.Ch, [[1, 0]])


@pytest.mark.parametrize("num, den", [([1.0, 0.0], [1.0, 2.0]), ([1.0, 2.0, 3.0], [1.0, 1.0]),
                                      ([1.0], [0.0])])
def test_rational_tf_rejects(num, den):
    with pytest.raises(ValueError):
        RationalTF(num, den)


def test_near_cancellation_warns():
    with pytest.warns(UserWarning, match="share a root"):
        realize_siso(RationalTF([1.0, 1.0], [1.0, 3.0, 2.0]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        realize_siso(RationalTF(PENDULUM_NUM, PENDULUM_DEN))


@settings(max_examples=60)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_realization_matches_tf(n, seed):
    rng = np.random.default_rng(seed)
    den = np.concatenate([[1.0], rng.standard_normal(n)])
    num = rng.standard_normal(int(rng.integers(1, n + 1)))
    tf = RationalTF(num, den)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = realize_siso(tf)
    for s in rng.standard_normal(10) + 1j * rng.standard_normal(10):
        want = tf(s)
        assert abs(a.transfer(s)[0, 0] - want) <= 1e-8 * max(1.0, abs(want))


def test_agent_dimension_checks():
    with pytest.raises(DimensionError):
        AgentModel(np.zeros((2, 2)), np.zeros((3, 1)), np.zeros((1, 2)))
    with pytest.raises(DimensionError):
        AgentModel(np.zeros((2, 2)), np.zeros((2, 1)), np.zeros((2, 2)))


def test_minimality_examples(mimo_counterexample):
    rep = minimality(realize_siso(RationalTF([1.0], [1.0, 0.0])))
    assert (rep.controllable, rep.observable, rep.rank_Bh, rep.rank_Ch) == (True, True, 1, 1)
    rep = minimality(mimo_counterexample.agent)
    assert (rep.controllable, rep.observable, rep.rank_Bh, rep.rank_Ch) == (True, True, 2, 2)
    rep = minimality(AgentModel(np.diag([1.0, 2.0]), [[1.0], [0.0]], [[1.0, 1.0]]))
    assert rep.controllable is False


@settings(max_examples=40)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_canonical_realization_always_controllable(n, seed):
    rng = np.random.default_rng(seed)
    den = np.concatenate([[1.0], rng.standard_normal(n)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = realize_siso(RationalTF(rng.standard_normal(n), den))
    assert minimality(a).controllable


def test_closed_agent_matrix_examples(pendulum_agent, integrator):
    np.testing.assert_array_equal(closed_agent_matrix(pendulum_agent, 0), pendulum_agent.Ah)
    np.testing.assert_array_equal(closed_agent_matrix(integrator, -1), [[-1.0]])
    M = closed_agent_matrix(pendulum_agent, 10)
    assert np.isrealobj(M) and M.shape == (4, 4)
    assert np.max(np.linalg.eigvals(M).real) > 0


@settings(max_examples=60)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_siso_characteristic_polynomial(n, seed):
    # det(sI - Ah - lam Bh Ch) = d(s) - lam n(s)
    rng = np.random.default_rng(seed)
    den = np.concatenate([[1.0], rng.standard_normal(n)])
    num = rng.standard_normal(n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = realize_siso(RationalTF(num, den))
    lam = complex(rng.standard_normal(), rng.standard_normal())
    char = np.poly(closed_agent_matrix(a, lam))
    want = den.astype(complex)
    want[1:] -= lam * num
    np.testing.assert_allclose(char, want, atol=1e-8 * max(1.0, np.max(np.abs(want))))
