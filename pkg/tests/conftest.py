from fractions import Fraction

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from uthchern import Chart, Poly
from uthchern.superlin import EndMap

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

R1 = Chart(("x",))
R2 = Chart(("x", "y"))
R3 = Chart(("x", "y", "z"))

small_fracs = st.builds(Fraction, st.integers(-4, 4), st.integers(1, 3))


def polys(chart: Chart, max_deg: int = 2, max_terms: int = 4):
    exps = st.tuples(*[st.integers(0, max_deg)] * chart.dim).filter(lambda e: sum(e) <= max_deg)
    return st.dictionaries(exps, small_fracs, max_size=max_terms).map(lambda d: Poly(chart, d))


def endmaps(chart: Chart, r0: int, r1: int, parity: int | None = None, max_deg: int = 2):
    """Random EndMaps; ``parity`` 0 or 1 restricts to homogeneous ones."""
    n = r0 + r1

    def build(entries):
        rows = [list(entries[i * n:(i + 1) * n]) for i in range(n)]
        for i in range(n):
            for j in range(n):
                block_par = int(i >= r0) ^ int(j >= r0)
                if parity is not None and block_par != parity:
                    rows[i][j] = Poly.zero(chart)
        return EndMap(chart, r0, r1, rows)

    return st.lists(polys(chart, max_deg, 3), min_size=n * n, max_size=n * n).map(build)


@pytest.fixture
def r2():
    return R2


@pytest.fixture
def r3():
    return R3
