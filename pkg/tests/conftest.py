import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

VARS = ("u", "w", "z")


def safe_exprs(names=VARS, max_depth=6):
    """Expression sources that are smooth and finite on [-1.5, 1.5]^n.

    Divisions and square roots are wrapped so the denominator or radicand
    stays away from zero.
    """
    leaves = st.one_of(
        st.sampled_from(names),
        st.floats(-3, 3, allow_nan=False).map(lambda c: f"({c!r})"),
    )

    def grow(children):
        unary = st.tuples(st.sampled_from(["sin({})", "cos({})", "exp(sin({}))",
                                           "sqrt(1 + ({})^2)", "-({})", "({})^2", "({})^3",
                                           "(2 + cos({}))^-1"]), children)
        binary = st.tuples(st.sampled_from(["({}) + ({})", "({}) - ({})", "({}) * ({})",
                                            "({}) / (2 + sin({}))"]), children, children)
        return st.one_of(unary.map(lambda t: t[0].format(t[1])),
                         binary.map(lambda t: t[0].format(t[1], t[2])))

    return st.recursive(leaves, grow, max_leaves=2 ** (max_depth - 2))


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
