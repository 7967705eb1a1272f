"""Classical fourth-order Runge-Kutta step shared by the integrators."""


def rk4_step(rhs, t, y, dt):
    """Advance ``y' = rhs(t, y)`` by ``dt``; ``dt`` may be an array broadcasting against ``y``."""
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
