"""Reference values for the test suite.

Every value is either a closed form evaluated here, or a number frozen from
an independent computation whose derivation is written next to it. None of
them is produced by the package under test.
"""

import math

import numpy as np

PI = math.pi
SQRT5 = math.sqrt(5.0)

# double curve C(s) = (cos s, sin s, cos 2s, sin 2s)
# |C'|^2 = 1 + 4 = 5, so length = 2 pi sqrt(5)
DOUBLE_LENGTH = 2 * PI * SQRT5
# the shoelace sum over a trigonometric polynomial of degree < N is exact:
# V01 = (1/2) int (x0 x1' - x1 x0') = pi, V23 = (1/2) int 2 ds = 2 pi; cross terms average to 0
DOUBLE_MV = {(0, 1): PI, (0, 2): 0.0, (0, 3): 0.0, (1, 2): 0.0, (1, 3): 0.0, (2, 3): 2 * PI}
# multiplier form: kappa = -(1/5)(e^{is}, 4 e^{2is}) must equal Omega _| T with T = C'/sqrt(5);
# matching the two planes gives coefficients 1/sqrt(5) and 2/sqrt(5)
DOUBLE_OMEGA = {(0, 1): 1 / SQRT5, (2, 3): 2 / SQRT5}
DOUBLE_OMEGA_VOLUME = (PI + 2 * 2 * PI) / SQRT5  # = pi sqrt(5)
DOUBLE_CURVATURE_NORM = math.sqrt(17) / 5
# cone from the origin: |C|^2 = 2, |C'|^2 = 5, C . C' = 0, so |C ^ C'| = sqrt(10)
# and the cone area is (1/2) * 2 pi * sqrt(10)
DOUBLE_CONE_AREA = PI * math.sqrt(10)


def double_polygon_length(N):
    """Chord of C between s and s + h is 2 sqrt(sin^2(h/2) + sin^2 h), h = 2 pi / N."""
    h = 2 * PI / N
    return N * 2 * math.sqrt(math.sin(h / 2) ** 2 + math.sin(h) ** 2)


def regular_polygon_area(N, r=1.0):
    """Inscribed regular N-gon."""
    return 0.5 * N * r * r * math.sin(2 * PI / N)


def regular_polygon_length(N, r=1.0):
    return 2 * N * r * math.sin(PI / N)


def double_curvature(s):
    """-(1/5)(cos s, sin s, 4 cos 2s, 4 sin 2s)."""
    s = np.asarray(s, dtype=float)
    return -np.stack([np.cos(s), np.sin(s), 4 * np.cos(2 * s), 4 * np.sin(2 * s)], axis=-1) / 5


def double_interior_product(s):
    """Omega _| T for the double curve; equals its curvature vector (hand expansion)."""
    return double_curvature(s)


def circle_profile_length(V):
    """Least length enclosing signed area V in a plane: 2 sqrt(pi V)."""
    return 2 * math.sqrt(PI * V)


# comass of dx0^dx1 + 2 dx2^dx3: singular values of the block skew matrix are {1, 1, 2, 2}
COMASS_BLOCK_FORM = 2.0

# tangency of x0 dx1 - x1 dx0 on the inscribed polygon at edge midpoints:
# |m| = cos(pi / N), and omega_m(T) = |m|, so the polygon route defect is 1 - cos(pi / N)
def polygon_tangency_defect(N):
    return 1 - math.cos(PI / N)


# |x0 dx1 - x1 dx0| = |x|; on [-2, 2]^2 the maximum is at a corner: 2 sqrt(2)
ENLARGED_BOX_MARGIN = 1 - 2 * math.sqrt(2)


def double_polygon_mv(N):
    """Shoelace values of the sampled double curve: inscribed N-gon in (0, 1), doubly wound N-gon in (2, 3).

    The cross-plane sums vanish by orthogonality of distinct discrete Fourier modes.
    """
    h = 2 * PI / N
    return {(0, 1): 0.5 * N * math.sin(h), (0, 2): 0.0, (0, 3): 0.0, (1, 2): 0.0, (1, 3): 0.0, (2, 3): 0.5 * N * math.sin(2 * h)}


# swapped windings: z1 = e^{2is}/sqrt2, z2 = sqrt2 e^{is}.
# V01 = (1/2)(2)(1/2)(2 pi) = pi, V23 = (1/2)(1)(2)(2 pi) = 2 pi, cross terms vanish (distinct frequencies);
# |C'|^2 = 4/2 + 2 = 4, so length 4 pi < 2 pi sqrt5 with the same six volumes
SWAPPED_LENGTH = 4 * PI
