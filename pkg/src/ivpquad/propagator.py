"""Adaptive element-by-element propagation of ``dy/dx = f``.

Each element ``[x_i, x_i + 2q]`` carries the expansion
``y(tau) = sum_mu u_mu(tau) B_mu + s_0(tau) q f(x_i) + y(x_i)``, so value and
slope are continuous at every boundary by construction. An element is
accepted when the slope it predicts at its right end agrees with a direct
evaluation of ``f`` there to within ``|f| delta_rel + delta_abs``; otherwise
``q`` is halved and the element is re-solved.
"""
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .basis import derivative_values_at_end, s_derivative_values_at_end
from .collocation import build_system, solve_coefficients
from .errors import ConfigurationError, IntegrandError, NonConvergence, StiffnessError

EPS = np.finfo(float).eps
STANDARD = "standard"
SINGULAR = "singular"
PREDICTORS = ("controller", "taylor")


@dataclass(frozen=True)
class ToleranceConfig:
    """Propagation settings.

    ``predictor`` picks how the next element is sized. ``"controller"``
    (default) scales ``q`` by ``step_safety * (tol / err) ** (1 / M)``, where
    ``err`` and ``tol`` are the two sides of the end-slope test of the element
    just accepted; the slope error of an ``M``-node element shrinks like
    ``q ** M``. ``"taylor"`` sizes the element so that the cubic Taylor
    change of ``f`` built from the end derivatives of ``y`` equals
    ``delta_rel ** (1 / step_order)`` times ``max(|f|, delta_abs/delta_rel)``;
    ``step_order=None`` uses ``delta_rel`` itself. Either way the growth per
    element is capped at ``max_growth``.

    Below ``min_width_rel * max(1, |x|)`` rounding of the node abscissas
    swamps the end-slope test, so a failing element that narrow is accepted
    (flagged as forced) once its estimated integral error ``err * width`` is
    below one ulp of ``y``. ``singular_width_rel`` is the absolute limit: an
    element that narrow is always accepted, which ends the approach to a
    point where ``f`` blows up.
    ``open_rtol``/``open_window`` define convergence of open integrals.
    """

    delta_rel: float = 2.22e-4
    delta_abs: float = 2.22e-19
    first_step: float = 0.5
    M: int = 13
    max_bisections: int = 60
    max_elements: int = 10_000_000
    step_safety: float = 0.9
    max_growth: float = 4.0
    predictor: str = "controller"
    step_order: float | None = None
    min_width_rel: float = 1e5 * EPS
    singular_width_rel: float = 4 * EPS
    open_rtol: float = 1e-15
    open_window: int = 5
    x_stop: float = math.inf

    def __post_init__(self):
        if not self.delta_rel > 0:
            raise ConfigurationError("delta_rel must be positive")
        if not self.delta_abs >= 0:
            raise ConfigurationError("delta_abs must be non-negative")
        if not self.first_step > 0:
            raise ConfigurationError("first_step must be positive")
        if self.M < 4:
            raise ConfigurationError("M must be at least 4")
        if self.max_bisections < 1 or self.max_elements < 1 or self.open_window < 1:
            raise ConfigurationError("caps must be at least 1")
        if not 0 < self.step_safety <= 1:
            raise ConfigurationError("step_safety must lie in (0, 1]")
        if not self.max_growth >= 1:
            raise ConfigurationError("max_growth must be >= 1")
        if self.predictor not in PREDICTORS:
            raise ConfigurationError(
                f"predictor must be one of {', '.join(PREDICTORS)}")
        if self.step_order is not None and not self.step_order > 0:
            raise ConfigurationError("step_order must be positive")
        if not 0 < self.singular_width_rel <= self.min_width_rel:
            raise ConfigurationError(
                "singular_width_rel must lie in (0, min_width_rel]")

    @property
    def step_ratio(self):
        if self.step_order is None:
            return self.delta_rel
        return self.delta_rel ** (1.0 / self.step_order)

    def replace(self, **changes):
        return replace(self, **changes)

    def as_dict(self):
        return asdict(self)


class Element:
    """One accepted (or candidate) finite element."""

    __slots__ = ("x_left", "q", "B", "f_left", "y_left", "variant")

    def __init__(self, x_left, q, B, f_left, y_left, variant=STANDARD):
        self.x_left = x_left
        self.q = q
        self.B = B
        self.f_left = f_left
        self.y_left = y_left
        self.variant = variant

    @property
    def x_right(self):
        return self.x_left + 2.0 * self.q

    @property
    def y_right(self):
        B = self.B
        if self.variant == SINGULAR:
            return 2.0 * B[0] + self.y_left
        return 2.0 * B[0] - (2.0 / 3.0) * B[1] + 2.0 * self.q * self.f_left + self.y_left

    @property
    def slope_right(self):
        """``dy/dx`` at the right end as predicted by the expansion."""
        if self.variant == SINGULAR:
            return float(np.sum(self.B)) / self.q
        return 2.0 * self.B[0] / self.q + self.f_left

    def end_derivatives(self):
        """x-derivatives 2..4 of ``y`` at the right end."""
        q = self.q
        if self.variant == SINGULAR:
            _, t2, t3, t4 = s_derivative_values_at_end(self.B)
        else:
            _, t2, t3, t4 = derivative_values_at_end(self.B)
        return t2 / q ** 2, t3 / q ** 3, t4 / q ** 4

    def __repr__(self):
        return (f"Element(x_left={self.x_left!r}, q={self.q!r}, "
                f"variant={self.variant!r})")


@dataclass
class StepOutcome:
    element: Element
    f_right: float
    err: float
    bisections_used: int
    forced: bool = False


@dataclass
class RunStats:
    n_evals: int = 0
    n_elements: int = 0
    n_attempts: int = 0
    n_bisections: int = 0
    n_forced: int = 0
    n_iterations: int = 0
    min_width: float = math.inf
    max_width: float = 0.0
    converged: bool = True
    trace: list | None = field(default=None, repr=False)


def _evaluate(f, xs):
    vals = np.asarray(f(xs), dtype=float)
    if vals.shape != np.shape(xs):
        vals = np.broadcast_to(vals, np.shape(xs)).astype(float)
    return vals


def solve_element(f, x_left, q, f_left, y_left, system):
    """Collocate one standard element; evaluates ``f`` at the M nodes only.

    Raises :class:`IntegrandError` if any node value is non-finite.
    """
    xs = x_left + q * (system.nodes + 1.0)
    fv = _evaluate(f, xs)
    if not np.all(np.isfinite(fv)):
        bad = xs[~np.isfinite(fv)][0]
        raise IntegrandError(f"integrand is not finite at x={bad!r}", bad)
    B = solve_coefficients(system, q * (fv - f_left))
    return Element(x_left, q, B, f_left, y_left, STANDARD)


def solve_first_element_singular(f, a, q, y_a, system):
    """First element expanded in s polynomials; ``f(a)`` is never evaluated.

    Collocating ``sum_mu P_mu(tau_nu) B_mu = q f(tau_nu)`` gives an element
    whose end value is ``2 B_0 + y_a``.
    """
    xs = a + q * (system.nodes + 1.0)
    fv = _evaluate(f, xs)
    if not np.all(np.isfinite(fv)):
        bad = xs[~np.isfinite(fv)][0]
        raise IntegrandError(f"integrand is not finite at x={bad!r}", bad)
    B = system.solve_legendre(q * fv)
    return Element(a, q, B, math.nan, y_a, SINGULAR)


def end_error(element, f_right):
    """Mismatch between the predicted end slope and ``f(x_right)``."""
    return abs(element.slope_right - f_right)


def end_tolerance(f_right, config):
    return abs(f_right) * config.delta_rel + config.delta_abs


def _smallest_positive_root(c3, c2, c1, c0):
    coeffs = np.array([c3, c2, c1, c0], dtype=float)
    nz = np.flatnonzero(coeffs)
    if len(nz) == 0 or nz[0] == 3:
        return math.inf
    roots = np.roots(coeffs[nz[0]:])
    best = math.inf
    for r in roots:
        if abs(r.imag) <= 1e-9 * max(1.0, abs(r.real)) and r.real > 0:
            best = min(best, r.real)
    return best


def _clamp_step(q_new, q, config, x):
    q_min = 1e-13 * abs(x) + 1e-290
    return min(max(q_new, q_min), config.max_growth * q)


def predict_taylor_step(element, f_right, config, x=None):
    """Half-width from the cubic Taylor model of ``f`` at the element end.

    With ``D2, D3, D4`` the second to fourth x-derivatives of ``y`` there,
    ``h`` is the smallest positive root of
    ``|D2 h + D3 h^2/2 + D4 h^3/6| = step_ratio * max(|f_right|, floor)``
    and the result is ``step_safety * h / 2``.
    """
    q = element.q
    x = element.x_right if x is None else x
    D2, D3, D4 = element.end_derivatives()
    if not (math.isfinite(D2) and math.isfinite(D3) and math.isfinite(D4)):
        return q
    if D2 == 0.0 and D3 == 0.0 and D4 == 0.0:
        return config.max_growth * q
    floor = config.delta_abs / config.delta_rel
    target = config.step_ratio * max(abs(f_right), floor)
    c3, c2, c1 = D4 / 6.0, D3 / 2.0, D2
    h = min(_smallest_positive_root(c3, c2, c1, -target),
            _smallest_positive_root(c3, c2, c1, target))
    if not math.isfinite(h):
        return config.max_growth * q
    return _clamp_step(config.step_safety * h / 2.0, q, config, x)


def predict_controller_step(element, f_right, config, x=None):
    """Half-width scaled by how well the end-slope test was met."""
    q = element.q
    x = element.x_right if x is None else x
    if not math.isfinite(f_right):
        return q
    err = end_error(element, f_right)
    if not math.isfinite(err):
        return q
    tol = end_tolerance(f_right, config)
    if err == 0.0:
        return config.max_growth * q
    factor = config.step_safety * (tol / err) ** (1.0 / len(element.B))
    factor = max(factor, 1.0 / config.max_growth)
    return _clamp_step(factor * q, q, config, x)


def predict_next_step(element, f_right, config, x=None):
    """Half-width for the element following ``element``."""
    if config.predictor == "taylor":
        return predict_taylor_step(element, f_right, config, x)
    return predict_controller_step(element, f_right, config, x)


class LinearStepper:
    """Element solver for ``dy/dx = f(x)``."""

    def __init__(self, f, system, singular_start=False):
        self.f = f
        self.system = system
        self.singular_start = singular_start
        self.n_evals = 0

    def start(self, a):
        if self.singular_start:
            return math.nan
        fa = float(_evaluate(self.f, np.array([a]))[0])
        self.n_evals += 1
        if not math.isfinite(fa):
            raise IntegrandError(
                f"integrand is not finite at the lower limit x={a!r}; "
                "use a singular start", a)
        return fa

    def attempt(self, x_left, q, y_left, f_left, x_right, first):
        """Return ``(element, f_right)``; element is None if a node value is
        non-finite."""
        M = self.system.M
        self.n_evals += M + 1
        try:
            if first and self.singular_start:
                el = solve_first_element_singular(self.f, x_left, q, y_left, self.system)
            else:
                el = solve_element(self.f, x_left, q, f_left, y_left, self.system)
        except IntegrandError:
            return None, math.nan
        f_right = float(_evaluate(self.f, np.array([x_right]))[0])
        return el, f_right

    def accepted(self, element):
        pass

    def step_hint(self, element, q_next):
        return q_next


def _sliver_element(x, q, y, f_left, elements, M):
    """Close the last few ulps before an endpoint where ``f`` blows up.

    ``f`` is modelled as ``C (b - x)^-alpha`` with ``alpha`` fitted to
    ``f_left`` and the left value of the previous element, which integrates
    to ``f_left * 2q / (1 - alpha)``. The excess over the linear part goes
    into ``B_0``.
    """
    alpha = 0.0
    prev = elements[-1] if elements else None
    if prev is not None and prev.variant == STANDARD:
        d_near, d_far = 2.0 * q, 2.0 * q + (x - prev.x_left)
        if f_left * prev.f_left > 0 and d_far > d_near:
            alpha = math.log(abs(f_left / prev.f_left)) / math.log(d_far / d_near)
            alpha = min(max(alpha, 0.0), 0.9)
    B = np.zeros(M)
    B[0] = f_left * q * alpha / (1.0 - alpha)
    return Element(x, q, B, f_left, y)


def _open_converged(history, a, config):
    """Open-range stop test on the ``(x, y)`` history of accepted ends.

    The gain over the last ``open_window`` elements must be below
    ``open_rtol * |y|`` and those elements must span at least a tenth of the
    range covered so far, so a run of tiny steps near a zero of ``f`` does
    not pass for convergence.
    """
    k = config.open_window
    if len(history) <= k:
        return False
    x_now, y_now = history[-1]
    x_then, y_then = history[-1 - k]
    if abs(y_now - y_then) > config.open_rtol * abs(y_now):
        return False
    return x_now - x_then >= 0.1 * (x_now - a)


def propagate(f, a, y_a=0.0, b=None, config=None, *, singular_start=False,
              trace=False, stepper=None):
    """Propagate ``y`` from ``y(a) = y_a`` to ``b`` (or until convergence).

    ``f`` must accept a 1-D float array and return values of the same shape.
    With ``b=None`` the integral is open and propagation stops once the gain
    over the last ``open_window`` elements falls below ``open_rtol * |y|``.
    Returns a :class:`~ivpquad.solution.SolutionFunction`.
    """
    from .solution import SolutionFunction

    config = config or ToleranceConfig()
    if not (math.isfinite(a) and math.isfinite(y_a)):
        raise ConfigurationError("lower limit and initial value must be finite")
    open_ = b is None or math.isinf(b)
    if not open_ and not b > a:
        raise ConfigurationError("upper limit must lie above the lower limit")
    system = build_system(config.M)
    if stepper is None:
        stepper = LinearStepper(f, system, singular_start)
    stats = RunStats(trace=[] if trace else None)

    elements = []
    x = float(a)
    y = float(y_a)
    f_left = stepper.start(x)
    q = config.first_step / 2.0
    history = [(x, y)]
    tail = None

    def finish(converged=True):
        stats.n_evals = stepper.n_evals
        stats.n_iterations = getattr(stepper, "n_iterations", 0)
        stats.n_elements = len(elements)
        stats.converged = converged
        x_end = x
        return SolutionFunction(a, y_a, elements, x_end=x_end, M=config.M,
                                tail=tail, stats=stats)

    while True:
        if len(elements) >= config.max_elements:
            raise NonConvergence(
                f"element budget {config.max_elements} exhausted at x={x!r}",
                partial=finish(converged=False))
        first = not elements
        scale = max(1.0, abs(x))
        floor_width = config.min_width_rel * scale
        tight_width = config.singular_width_rel * scale
        q = max(q, tight_width / 2.0)
        final = False
        if not open_:
            remaining = b - x
            if 2.0 * q >= remaining or remaining <= floor_width:
                q = remaining / 2.0
                final = True
        bisections = 0
        while True:
            x_right = b if final else x + 2.0 * q
            el, f_right = stepper.attempt(x, q, y, f_left, x_right, first)
            stats.n_attempts += 1
            width = x_right - x
            forced = False
            if el is None:
                err = math.inf
                if final and width <= tight_width and math.isfinite(f_left):
                    # the nodes of a sliver this thin round onto the
                    # singular end itself
                    el = _sliver_element(x, q, y, f_left, elements, stepper.system.M)
                    forced = True
                    break
            else:
                err = end_error(el, f_right) if math.isfinite(f_right) else math.inf
                if math.isfinite(err) and err <= end_tolerance(f_right, config):
                    break
                if final or math.isfinite(f_right):
                    # below the floor the slope test drowns in rounding, so
                    # judge by the integral error estimate err * width
                    small = (width <= floor_width
                             and err * width <= EPS * abs(el.y_right))
                    if small or width <= tight_width or q <= tight_width / 2.0:
                        forced = True
                        break
            bisections += 1
            stats.n_bisections += 1
            if bisections > config.max_bisections:
                raise StiffnessError(
                    f"no acceptable element after {config.max_bisections} "
                    f"bisections at x={x!r}", x)
            q = max(q / 2.0, tight_width / 2.0)
            final = not open_ and 2.0 * q >= b - x
            if final:
                q = (b - x) / 2.0

        elements.append(el)
        stepper.accepted(el)
        stats.min_width = min(stats.min_width, width)
        stats.max_width = max(stats.max_width, width)
        if forced:
            stats.n_forced += 1
        y = el.y_right
        if stats.trace is not None:
            stats.trace.append({
                "x_left": x, "width": width, "y_right": y, "f_right": f_right,
                "err": err,
                "tol": end_tolerance(f_right, config) if math.isfinite(f_right) else math.inf,
                "bisections": bisections, "forced": forced,
            })
        x = x_right
        f_left = f_right
        if final:
            break
        if open_:
            history.append((x, y))
            if _open_converged(history, a, config):
                tail = y
                break
            if x >= config.x_stop:
                return finish(converged=False)
        q = predict_next_step(el, f_right, config, x)
        q = stepper.step_hint(el, q)
    return finish()
