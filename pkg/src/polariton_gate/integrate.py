"""Fixed-step integration primitives shared by the trajectory and Fock solvers."""
import numpy as np


def simpson(y, dx):
    """Composite Simpson rule on uniformly spaced samples.

    ``y`` must have an odd number of samples (an even number of intervals).
    Summation goes through numpy's pairwise reduction, so the result does not
    depend on evaluation order elsewhere in the program.
    """
    y = np.asarray(y)
    n = y.shape[0]
    if n < 3 or n % 2 == 0:
        raise ValueError(f"Simpson rule needs an odd number >= 3 of samples, got {n}")
    total = y[0] + y[-1] + 4.0 * np.sum(y[1:-1:2]) + 2.0 * np.sum(y[2:-1:2])
    return total * dx / 3.0


def rk4_step(f, t, y, h):
    """One classical fourth-order Runge-Kutta step of ``dy/dt = f(t, y)``."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_affine_propagator(a, h):
    """Coefficients of one RK4 step for the scalar affine ODE ``y' = a y + g(t)``.

    The step map is affine in ``(y, g(t), g(t + h/2), g(t + h))``, so it is
    recovered exactly by pushing unit inputs through :func:`rk4_step`::

        y_next = R * y + w0 * g(t) + wm * g(t + h/2) + w1 * g(t + h)

    Returns ``(R, w0, wm, w1)``.
    """
    a = complex(a)

    def stepped(y0, g0, gm, g1):
        forcing = {0.0: g0, 0.5 * h: gm, h: g1}
        return rk4_step(lambda t, y: a * y + forcing[t], 0.0, complex(y0), h)

    R = stepped(1.0, 0.0, 0.0, 0.0)
    w0 = stepped(0.0, 1.0, 0.0, 0.0)
    wm = stepped(0.0, 0.0, 1.0, 0.0)
    w1 = stepped(0.0, 0.0, 0.0, 1.0)
    return R, w0, wm, w1
