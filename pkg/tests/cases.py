"""Reference ODEs, their 3D systems and known invariants, shared by the tests."""
from __future__ import annotations

import sympy as sp

from elemps.algebra.poly import U, X, Y

x, y, u = X, Y, U
i = sp.I

ODES = {
    "log_shift": "diff(y(x),x) = (x - y(x) - ln(x-5))/(-x-4)",
    "exp_quadratic": "diff(y(x),x) = (x - y(x) - exp(x^2+x))/x",
    "sin_cos": "diff(y(x),x) = x - sin(x) - cos(x) - y(x)",
    "exp_ratio": "diff(y(x),x) = -(x^2*exp(y(x)^2/x) - x^2*y(x) + y(x)^3)/(x*(-2*y(x)^2+x))",
    "log_product": ("diff(y(x),x) = -(ln(x*y(x)-1)^2*x*y(x) - ln(x*y(x)-1)*x*y(x)^2 - ln(x*y(x)-1)^2"
                    " + y(x)*ln(x*y(x)-1) - y(x)^2)/(ln(x*y(x)-1)*x*y(x) - x*y(x) - ln(x*y(x)-1))"),
    "tan_self": ("diff(y(x),x) = ((tan((x-y(x))/(x*y(x))))^2 - x*tan((x-y(x))/(x*y(x))) + x*y(x) + 1)"
                 "*y(x)^2/(x^2*((tan((x-y(x))/(x*y(x))))^2 + y(x)^2 + 1))"),
}

# (f, g, h) of dx/dt = f, dy/dt = g, du/dt = h, up to a common constant factor
SYSTEMS = {
    "log_shift": ((x + 4) * (x - 5), (-x + y + u) * (x - 5), x + 4),
    "exp_quadratic": (x, x - y - u, (2 * x + 1) * u * x),
    "sin_cos": (2 * u, i * u**2 - 2 * y * u - u**2 + 2 * x * u - 1 - i, 2 * i * u**2),
    "exp_ratio": (-x * (-2 * y**2 + x), -x**2 * y + x**2 * u + y**3, -u * (2 * x * y - 2 * x * u - y) * y),
    "log_product": (x * y * u - x * y - u, x * y**2 * u - x * y * u**2 + y**2 - y * u + u**2,
                    (x * y - x * u + y) * u),
}

# tan generator used directly (u = tan((x - y)/(x y)), du = (1 + u^2) d[(x - y)/(x y)])
TAN_SELF_SYSTEM = (x**2 * (u**2 + y**2 + 1), y**2 * (u**2 - u * x + x * y + 1),
                   -(u**2 + 1) * (-u * x + x * y - y**2))

# known first integrals, in the variables of the systems above (u a coordinate)
INVARIANTS = {
    "log_shift": -sp.Rational(1, 9) * (sp.log(x - 5) * x - 10 * sp.log(x + 4) * x - 5 * sp.log(x - 5)
                                       - 40 * sp.log(x + 4) - 9 * y - 36) / (x + 4),
    "sin_cos": sp.exp((1 - i) * x)
    * (i * u**2 + i * u + 2 * x * u - 2 * y * u - i - u) ** -1
    * (-u**2 + 2 * i * x * u - 2 * i * y * u + i * u**2 - 2 * i * u + 2 * x * u - 2 * y * u + 1 - i - 2 * u)
    * (-2 * i * x * u + 2 * i * y * u + i * u**2 + 2 * i * u + 2 * x * u - 2 * y * u + u**2 - 1 - i),
    "exp_ratio": (y - u) * sp.exp(-x) / u,
    "log_product": (y - sp.log(x * y - 1)) * sp.exp(-x) / sp.log(x * y - 1),
    "tan_self": -(y - sp.tan((x - y) / (x * y))) / x,
}

# displayed invariants in the ODE's own variables
REFERENCE_XY = {
    "log_shift": INVARIANTS["log_shift"],
    "exp_ratio": (y - sp.exp(y**2 / x)) * sp.exp(-x) / sp.exp(y**2 / x),
}
