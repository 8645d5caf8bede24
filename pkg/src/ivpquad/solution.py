"""The solved integral as a reusable, dense-evaluable object."""
import json
import math
from pathlib import Path

import numpy as np

from .basis import LEGENDRE, S_FAMILY, U_FAMILY, clenshaw_sum, clenshaw_sum_array
from .errors import DomainError, SolutionFormatError
from .propagator import SINGULAR, STANDARD, Element

FORMAT_NAME = "ivpquad-solution"
FORMAT_VERSION = 1


def _element_value(el, tau):
    if el.variant == SINGULAR:
        return clenshaw_sum(el.B, tau, S_FAMILY) + el.y_left
    return (clenshaw_sum(el.B, tau, U_FAMILY) + (tau + 1.0) * el.q * el.f_left
            + el.y_left)


def _element_slope(el, tau):
    if el.variant == SINGULAR:
        return clenshaw_sum(el.B, tau, LEGENDRE) / el.q
    return clenshaw_sum(el.B, tau, S_FAMILY) / el.q + el.f_left


class SolutionFunction:
    """Piecewise spectral representation of ``y`` on ``[a, x_end]``.

    Immutable once built. ``tail`` (if not None) is the converged value
    returned for every ``x > x_end``.
    """

    def __init__(self, a, y_a, elements, x_end=None, M=None, tail=None, stats=None):
        if not elements:
            raise SolutionFormatError("a solution needs at least one element")
        self.a = float(a)
        self.y_a = float(y_a)
        self.elements = tuple(elements)
        self.M = M if M is not None else len(elements[0].B)
        self.x_end = float(x_end) if x_end is not None else elements[-1].x_right
        self.tail = None if tail is None else float(tail)
        self.stats = stats
        self._edges = np.array([el.x_left for el in self.elements])
        self._edges.setflags(write=False)

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return (f"SolutionFunction(a={self.a!r}, x_end={self.x_end!r}, "
                f"elements={len(self)}, tail={self.tail!r})")

    @property
    def edges(self):
        return self._edges

    @property
    def value(self):
        """``y`` at the right end of the solved range."""
        if self.tail is not None:
            return self.tail
        return float(self.elements[-1].y_right)

    @property
    def has_tail(self):
        return self.tail is not None

    def _check(self, x):
        if not (x >= self.a) or (x > self.x_end and self.tail is None):
            raise DomainError(
                f"x={x!r} outside solved range [{self.a!r}, {self.x_end!r}]")

    def locate(self, x):
        """Index of the element containing ``x`` (binary search).

        Interior boundaries belong to the element on their right; ``x_end``
        belongs to the last element.
        """
        self._check(x)
        i = int(np.searchsorted(self._edges, x, side="right")) - 1
        return min(max(i, 0), len(self.elements) - 1)

    def local_coordinate(self, i, x):
        el = self.elements[i]
        upper = self.x_end if i == len(self.elements) - 1 else self._edges[i + 1]
        if x >= upper:
            return 1.0
        return min(max((x - el.x_left) / el.q - 1.0, -1.0), 1.0)

    def eval(self, x):
        """``y(x)``; beyond ``x_end`` the converged tail value if present."""
        x = float(x)
        self._check(x)
        if x > self.x_end:
            return self.tail
        i = self.locate(x)
        return _element_value(self.elements[i], self.local_coordinate(i, x))

    __call__ = eval

    def eval_derivative(self, x):
        x = float(x)
        self._check(x)
        if x > self.x_end:
            return 0.0
        i = self.locate(x)
        return _element_slope(self.elements[i], self.local_coordinate(i, x))

    def eval_many(self, xs):
        """Vectorised :meth:`eval` for an array of abscissas."""
        xs = np.asarray(xs, dtype=float)
        flat = xs.ravel()
        if flat.size and (np.min(flat) < self.a or (
                self.tail is None and np.max(flat) > self.x_end)):
            raise DomainError("some abscissas lie outside the solved range")
        out = np.empty_like(flat)
        beyond = flat > self.x_end
        out[beyond] = self.tail if self.tail is not None else np.nan
        inside = ~beyond
        if np.any(inside):
            xi = flat[inside]
            idx = np.clip(np.searchsorted(self._edges, xi, side="right") - 1,
                          0, len(self.elements) - 1)
            res = np.empty_like(xi)
            for i in np.unique(idx):
                sel = idx == i
                el = self.elements[i]
                upper = (self.x_end if i == len(self.elements) - 1
                         else self._edges[i + 1])
                tau = np.clip((xi[sel] - el.x_left) / el.q - 1.0, -1.0, 1.0)
                tau[xi[sel] >= upper] = 1.0
                if el.variant == SINGULAR:
                    res[sel] = clenshaw_sum_array(el.B, tau, S_FAMILY) + el.y_left
                else:
                    res[sel] = (clenshaw_sum_array(el.B, tau, U_FAMILY)
                                + (tau + 1.0) * el.q * el.f_left + el.y_left)
            out[inside] = res
        return out.reshape(xs.shape)

    def reader(self):
        """A :class:`SolutionReader` with its own locality cache."""
        return SolutionReader(self)

    # serialisation -------------------------------------------------------

    def to_dict(self):
        elements = []
        for el in self.elements:
            elements.append({
                "x_left": el.x_left,
                "q": el.q,
                "f_left": None if el.variant == SINGULAR else el.f_left,
                "y_left": el.y_left,
                "variant": el.variant,
                "B": [float(v) for v in el.B],
            })
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "a": self.a,
            "y_a": self.y_a,
            "M": self.M,
            "x_end": self.x_end,
            "tail": None if self.tail is None else {"value": self.tail},
            "elements": elements,
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            if doc.get("format") != FORMAT_NAME:
                raise SolutionFormatError("not an ivpquad solution document")
            if doc.get("version") != FORMAT_VERSION:
                raise SolutionFormatError(
                    f"unsupported solution version {doc.get('version')!r}")
            M = int(doc["M"])
            raw = doc["elements"]
            if not raw:
                raise SolutionFormatError("solution document has no elements")
            elements = []
            for e in raw:
                variant = e.get("variant", STANDARD)
                if variant not in (STANDARD, SINGULAR):
                    raise SolutionFormatError(f"unknown element variant {variant!r}")
                B = np.array(e["B"], dtype=float)
                if B.shape != (M,):
                    raise SolutionFormatError("coefficient vector length != M")
                f_left = math.nan if variant == SINGULAR else float(e["f_left"])
                elements.append(Element(float(e["x_left"]), float(e["q"]), B,
                                        f_left, float(e["y_left"]), variant))
            tail = doc.get("tail")
            sol = cls(float(doc["a"]), float(doc["y_a"]), elements,
                      x_end=float(doc["x_end"]), M=M,
                      tail=None if tail is None else float(tail["value"]))
        except SolutionFormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise SolutionFormatError(f"malformed solution document: {exc}") from exc
        sol.validate()
        return sol

    def validate(self):
        """Check the structural invariants; raise SolutionFormatError."""
        els = self.elements
        if els[0].x_left != self.a:
            raise SolutionFormatError("first element does not start at a")
        if els[0].y_left != self.y_a:
            raise SolutionFormatError("first element does not carry y_a")
        for i, el in enumerate(els):
            if not el.q > 0:
                raise SolutionFormatError(f"element {i} has non-positive q")
            finite = [el.x_left, el.q, el.y_left, *el.B]
            if el.variant == STANDARD:
                finite.append(el.f_left)
            elif i != 0:
                raise SolutionFormatError("only the first element may be singular")
            if not all(math.isfinite(v) for v in finite):
                raise SolutionFormatError(f"element {i} has non-finite data")
        for i in range(len(els) - 1):
            right = els[i].x_left + 2.0 * els[i].q
            nxt = els[i + 1].x_left
            if abs(right - nxt) > 8 * np.spacing(max(abs(right), abs(nxt), 1e-300)):
                raise SolutionFormatError(f"elements {i} and {i + 1} are not contiguous")
            if els[i + 1].y_left != els[i].y_right:
                raise SolutionFormatError(f"value chain broken after element {i}")
        last = els[-1]
        if abs(last.x_left + 2.0 * last.q - self.x_end) > 8 * np.spacing(
                max(abs(self.x_end), 1e-300)):
            raise SolutionFormatError("x_end does not match the last element")

    def save(self, destination):
        text = json.dumps(self.to_dict(), indent=1)
        if hasattr(destination, "write"):
            destination.write(text)
        else:
            Path(destination).write_text(text)
        return text

    @classmethod
    def load(cls, source):
        if hasattr(source, "read"):
            text = source.read()
        elif isinstance(source, dict):
            return cls.from_dict(source)
        else:
            text = Path(source).read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SolutionFormatError(f"invalid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise SolutionFormatError("solution document must be a JSON object")
        return cls.from_dict(doc)


def save(solution, destination):
    return solution.save(destination)


def load(source):
    return SolutionFunction.load(source)


class SolutionReader:
    """Per-reader locality cache around a shared :class:`SolutionFunction`.

    Consecutive nearby queries are found by hunting outward from the last
    index before bisecting, as in the classic ``hunt`` routine.
    ``probes`` counts element-edge comparisons for diagnostics.
    """

    def __init__(self, solution):
        self.solution = solution
        self.last = 0
        self.probes = 0
        self.queries = 0

    def locate(self, x):
        sol = self.solution
        sol._check(x)
        edges = sol.edges
        n = len(edges)
        self.queries += 1

        def owns(i):
            # x belongs to i iff edges[i] <= x < edges[i+1] (last: up to x_end)
            self.probes += 1
            if x < edges[i]:
                return -1
            if i + 1 < n and x >= edges[i + 1]:
                return 1
            return 0

        i = self.last
        direction = owns(i)
        if direction == 0:
            return i
        step = 1
        if direction > 0:
            lo, hi = i, None
            while True:
                j = min(i + step, n - 1)
                d = owns(j)
                if d == 0:
                    self.last = j
                    return j
                if d < 0:
                    hi = j
                    break
                lo = j
                step *= 2
        else:
            hi, lo = i, None
            while True:
                j = max(i - step, 0)
                d = owns(j)
                if d == 0:
                    self.last = j
                    return j
                if d > 0:
                    lo = j
                    break
                hi = j
                step *= 2
        # owner lies strictly between lo and hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            d = owns(mid)
            if d == 0:
                self.last = mid
                return mid
            if d > 0:
                lo = mid
            else:
                hi = mid
        self.last = lo
        return lo

    def eval(self, x):
        x = float(x)
        sol = self.solution
        sol._check(x)
        if x > sol.x_end:
            return sol.tail
        i = self.locate(x)
        return _element_value(sol.elements[i], sol.local_coordinate(i, x))

    def eval_derivative(self, x):
        x = float(x)
        sol = self.solution
        sol._check(x)
        if x > sol.x_end:
            return 0.0
        i = self.locate(x)
        return _element_slope(sol.elements[i], sol.local_coordinate(i, x))
