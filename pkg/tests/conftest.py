"""Shared fixtures: the three reference surfaces used across the suite.

The trivial surface (b = c = 1, p = q = 0) satisfies every characterization.
The coincidence surface (p = 1, q = 2) is projectively minimal with flat
first family but is not Demoulin.  The nonminimal surface (p = x, q = y) is
a valid coefficient set that fails projective minimality, so its families
are flat only at the unit spectral value.
"""

import pytest

from demoulin import SurfaceSpec, parse


def make_trivial() -> SurfaceSpec:
    return SurfaceSpec(name="trivial", b=parse("1"), c=parse("1"),
                       p=parse("0"), q=parse("0"))


def make_coincidence() -> SurfaceSpec:
    return SurfaceSpec(name="coincidence", b=parse("1"), c=parse("1"),
                       p=parse("1"), q=parse("2"))


def make_nonminimal() -> SurfaceSpec:
    return SurfaceSpec(name="nonminimal", b=parse("1"), c=parse("1"),
                       p=parse("x"), q=parse("y"))


@pytest.fixture
def trivial():
    return make_trivial()


@pytest.fixture
def coincidence():
    return make_coincidence()


@pytest.fixture
def nonminimal():
    return make_nonminimal()
