"""Hypothesis strategies shared by the test modules."""

import math

from hypothesis import strategies as st

from fuchsqd.hypgeo import DiscAutomorphism, DiscPoint

angles = st.floats(0.0, 2 * math.pi)


@st.composite
def disc_points(draw, max_radius=4.0):
    return DiscPoint.from_polar(draw(st.floats(0.0, max_radius)), draw(angles))


@st.composite
def automorphisms(draw, max_shift=3.0):
    p = draw(disc_points(max_shift))
    return DiscAutomorphism(p.z, draw(angles))


coeffs = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)
