"""Built-in PDE systems so runs and tests need no external files."""
from .prolongation import PDESystem


def cauchy_riemann():
    """u_x - v_y = 0, u_y + v_x = 0 (conformal vector fields of the plane)."""
    return PDESystem.build(
        2, 2, 2,
        A={},
        B=[
            {(0, 0): [[1, 0], [0, 1]]},
            {(0, 0): [[0, -1], [1, 0]]},
        ],
        name="cauchy_riemann",
    )


def divergence_free(nu=2):
    """sum_i d_i y^i = 0 (volume-preserving vector fields)."""
    B = []
    for i in range(nu):
        row = [[1 if j == i else 0 for j in range(nu)]]
        B.append({(0,) * nu: row})
    return PDESystem.build(nu, nu, 1, A={}, B=B, name=f"divergence_free_{nu}")


def weighted_divergence_free():
    """div((1 + z1) y) = 0 in the plane: variable coefficients, nonzero tails."""
    return PDESystem.build(
        2, 2, 1,
        A={(0, 0): [[1, 0]]},
        B=[
            {(0, 0): [[1, 0]], (1, 0): [[1, 0]]},
            {(0, 0): [[0, 1]], (1, 0): [[0, 1]]},
        ],
        name="weighted_divergence_free",
    )


def gaussian_ode():
    """y' = z y in one variable; solutions c exp(z^2/2)."""
    return PDESystem.build(1, 1, 1, A={(1,): [[-1]]}, B=[{(0,): [[1]]}], name="gaussian_ode")


def vanishing(p=2, q=1):
    """y = 0: only the zero solution."""
    eye = [[1 if i == j else 0 for j in range(q)] for i in range(q)]
    return PDESystem.build(p, q, q, A={(0,) * p: eye}, B=[{} for _ in range(p)], name="vanishing")


def constants(p=2, q=1):
    """y_i = 0 for every i: constant solutions only (r = p q equations)."""
    r = p * q
    B = []
    for i in range(p):
        block = [[0] * q for _ in range(r)]
        for j in range(q):
            block[i * q + j][j] = 1
        B.append({(0,) * p: block})
    return PDESystem.build(p, q, r, A={}, B=B, name="constants")


SYSTEMS = {
    "cr": cauchy_riemann,
    "cauchy_riemann": cauchy_riemann,
    "divergence_free": divergence_free,
    "weighted_divergence_free": weighted_divergence_free,
    "gaussian_ode": gaussian_ode,
    "constants": constants,
    "vanishing": vanishing,
}


def system(name):
    try:
        return SYSTEMS[name]()
    except KeyError:
        raise KeyError(f"unknown built-in system {name!r}; known: {sorted(SYSTEMS)}") from None
