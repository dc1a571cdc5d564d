"""Zeros of the characteristic functions: seeding, Newton, certification.

Roots are located in the rho = sqrt(lambda) plane where they are
asymptotically unit-spaced (rho_n ~ n for the Dirichlet pair, n - 1/2 for
the Dirichlet-Neumann pair).  Each refined root is certified by an
argument-principle count over a small rectangle, and the full sweep
rectangle is counted to guarantee no root was missed; deficits trigger a
strip-by-strip hunt with dense re-seeding.  Strong potentials shift the
low-lying roots by O(1) in rho, so certification rather than seed quality
is what guarantees completeness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .charfn import CharFnEval, eval_delta, eval_theta
from .errors import ContourThroughZero, LeftTrustRegion, NoConvergence
from .grid import PI

_FUNCS = {"delta": eval_delta, "theta": eval_theta}


def residual_bound(j: int, lam: complex, tol: float = 1e-9) -> float:
    """Admissible |char fn| at a reported zero, scaled to the leading term."""
    scale = max(1.0, abs(lam)) if j == 0 else max(1.0, math.sqrt(abs(lam)))
    return tol * scale


def seeds(j: int, n_max: int) -> list[float]:
    """Asymptotic rho seeds: n for j=0, n - 1/2 for j=1."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    off = 0.0 if j == 0 else 0.5
    return [n - off for n in range(1, n_max + 1)]


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in the rho plane."""

    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    def corners(self) -> list[complex]:
        return [complex(self.re_lo, self.im_lo), complex(self.re_hi, self.im_lo),
                complex(self.re_hi, self.im_hi), complex(self.re_lo, self.im_hi)]

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        return (self.re_lo + margin <= z.real <= self.re_hi - margin
                and self.im_lo + margin <= z.imag <= self.im_hi - margin)

    def shifted(self, d: complex) -> "Rect":
        return Rect(self.re_lo + d.real, self.re_hi + d.real,
                    self.im_lo + d.imag, self.im_hi + d.imag)


def _eval_rho(ev: CharFnEval, j: int, rho: np.ndarray, which: str) -> np.ndarray:
    return _FUNCS[which](ev, j, np.asarray(rho) ** 2)


def refine(ev: CharFnEval, j: int, seed: complex, which: str = "delta",
           max_iter: int = 50, tol: float = 1e-9) -> complex:
    """Newton in rho from a seed; returns lambda = rho^2.

    The derivative is a central difference with step 1e-6 (1 + |rho|).
    Convergence requires both the residual bound and a final step below
    1e-10.
    """
    rho = complex(seed)
    re_max, im_max = ev.rho_trust
    f = _FUNCS[which]
    for _ in range(max_iter):
        if abs(rho.real) > re_max or abs(rho.imag) > im_max:
            raise LeftTrustRegion(f"iterate rho={rho:.4g} left the trusted region")
        hstep = 1e-6 * (1.0 + abs(rho))
        vals = f(ev, j, np.array([rho, rho + hstep, rho - hstep]) ** 2)
        val, vp, vm = vals
        deriv = (vp - vm) / (2 * hstep)
        if deriv == 0:
            raise NoConvergence(f"zero derivative at rho={rho:.4g}")
        step = val / deriv
        rho = rho - step
        if abs(step) < 1e-10 and abs(val) <= residual_bound(j, rho * rho, tol):
            return rho * rho
    raise NoConvergence(f"no convergence from seed {seed:.4g} after {max_iter} its")


def count_zeros(ev: CharFnEval, j: int, rect: Rect, which: str = "delta",
                clearance: float = 1e-12, max_retries: int = 5) -> int:
    """Argument-principle zero count of the characteristic function over a
    rho-rectangle: trapezoid phase accumulation with adaptive edge bisection
    until every increment is below pi/2."""
    for attempt in range(max_retries + 1):
        r = rect if attempt == 0 else rect.shifted(attempt * (1e-4 + 1e-4j))
        try:
            return _winding(ev, j, r, which, clearance)
        except ContourThroughZero:
            if attempt == max_retries:
                raise
    raise ContourThroughZero("unreachable")


def _winding(ev: CharFnEval, j: int, rect: Rect, which: str,
             clearance: float) -> int:
    corners = rect.corners()
    total = 0.0
    for k in range(4):
        z0, z1 = corners[k], corners[(k + 1) % 4]
        n0 = max(8, int(abs(z1 - z0) * 16))
        pts = z0 + (z1 - z0) * np.linspace(0.0, 1.0, n0 + 1)
        vals = _eval_rho(ev, j, pts, which)
        for _ in range(40):
            if np.abs(vals).min() <= clearance:
                zmin = pts[np.abs(vals).argmin()]
                raise ContourThroughZero(
                    f"|f| <= {clearance} on the contour near rho={zmin:.4g}")
            dphi = np.angle(vals[1:] / vals[:-1])
            bad = np.nonzero(np.abs(dphi) >= 0.5 * np.pi)[0]
            if bad.size == 0:
                total += dphi.sum()
                break
            mids = 0.5 * (pts[bad] + pts[bad + 1])
            mvals = _eval_rho(ev, j, mids, which)
            pts = np.insert(pts, bad + 1, mids)
            vals = np.insert(vals, bad + 1, mvals)
        else:
            raise ContourThroughZero("phase increments did not settle below pi/2")
    w = total / (2 * PI)
    n = round(w)
    if abs(w - n) > 0.1:
        raise ContourThroughZero(f"non-integer winding {w:.3f}")
    return int(n)


@dataclass(frozen=True)
class Spectrum:
    """Ordered zeros of one characteristic function with certificates."""

    j: int
    which: str
    eigenvalues: tuple[complex, ...]
    residuals: tuple[float, ...]
    seeds_used: tuple[complex, ...]
    certified: tuple[bool, ...]
    windows: tuple[Rect, ...]
    sweep_rect: Rect | None = None
    sweep_count: int | None = None
    lambda_zero_value: complex | None = None

    @property
    def complete(self) -> bool:
        return (self.sweep_count is not None
                and self.sweep_count == len(self.eigenvalues)
                and all(self.certified))

    def to_records(self) -> list[dict]:
        return [{
            "j": self.j, "n": n + 1,
            "re_lambda": lam.real, "im_lambda": lam.imag,
            "residual": res, "certified": cert,
        } for n, (lam, res, cert) in enumerate(
            zip(self.eigenvalues, self.residuals, self.certified))]


def _order_lams(lams: list[complex], tol: float = 1e-6) -> list[complex]:
    """Order by real part, then imaginary part, treating real parts closer
    than tol as ties -- stable against roundoff in conjugate pairs."""
    lams = sorted(lams, key=lambda z: z.real)
    out: list[complex] = []
    i = 0
    while i < len(lams):
        k = i
        while k + 1 < len(lams) and lams[k + 1].real - lams[k].real <= tol:
            k += 1
        out.extend(sorted(lams[i:k + 1], key=lambda z: z.imag))
        i = k + 1
    return out


def _dedupe_lams(lams: list[complex], tol: float = 1e-6) -> list[complex]:
    """Ordered list with duplicates closer than tol dropped."""
    out: list[complex] = []
    for z in _order_lams(lams, tol):
        if all(abs(z - s) > tol for s in out):
            out.append(z)
    return out


def find_spectrum(ev: CharFnEval, j: int, n_eigs: int, which: str = "delta",
                  im_halfwidth: float = 2.0, tol: float = 1e-9,
                  certify: bool = True) -> Spectrum:
    """Locate the first n_eigs zeros (ordered by Re lambda, then Im).

    Hunts inside the sweep rectangle 0 < Re rho < n_eigs + 1/2 (+ margin),
    |Im rho| <= im_halfwidth; completeness of the hunt is certified by the
    argument principle over the sweep rectangle and per-root windows.
    """
    off = 0.25 if j == 1 else 0.75
    rho_lo = 0.05
    rho_hi = n_eigs + off
    sweep = Rect(rho_lo, rho_hi, -im_halfwidth, im_halfwidth)
    f = _FUNCS[which]

    roots_lam: list[complex] = []
    used: list[complex] = []
    for s in seeds(j, n_eigs):
        try:
            lam = refine(ev, j, s, which, tol=tol)
        except (NoConvergence, LeftTrustRegion):
            continue
        if sweep.contains(complex(np.sqrt(lam))):
            roots_lam.append(complex(lam))
            used.append(complex(s))
    roots_lam = _dedupe_lams(roots_lam)

    target = count_zeros(ev, j, sweep, which)
    hunts = 0
    while len(roots_lam) < target and hunts < 4:
        hunts += 1
        rhos_found = [complex(np.sqrt(z)) for z in roots_lam]
        k0 = int(math.floor(rho_lo))
        for k in range(k0, int(math.ceil(rho_hi))):
            strip = Rect(max(rho_lo, k + 0.003), min(rho_hi, k + 1.003),
                         -im_halfwidth, im_halfwidth)
            if strip.re_hi <= strip.re_lo:
                continue
            inside = sum(1 for r in rhos_found
                         if strip.re_lo < r.real <= strip.re_hi
                         and abs(r.imag) <= im_halfwidth)
            deficit = count_zeros(ev, j, strip, which) - inside
            if deficit <= 0:
                continue
            # dense sampling of |f|, best candidates first
            re = np.linspace(strip.re_lo, strip.re_hi, 41)
            im = np.linspace(strip.im_lo, strip.im_hi, 33)
            grid_pts = (re[:, None] + 1j * im[None, :]).ravel()
            vals = np.abs(_eval_rho(ev, j, grid_pts, which))
            found = 0
            for idx in np.argsort(vals):
                if found >= deficit:
                    break
                try:
                    lam = refine(ev, j, grid_pts[idx], which, tol=tol)
                except (NoConvergence, LeftTrustRegion):
                    continue
                lam = complex(lam)
                if (sweep.contains(complex(np.sqrt(lam)))
                        and all(abs(lam - s) > 1e-6 for s in roots_lam)):
                    roots_lam.append(lam)
                    used.append(complex(grid_pts[idx]))
                    found += 1
        roots_lam = _dedupe_lams(roots_lam)

    # order by lambda, keep the first n_eigs
    lams = roots_lam[:n_eigs]
    rhos = [complex(np.sqrt(z)) for z in lams]

    residuals = tuple(float(abs(f(ev, j, z))) for z in lams)
    windows: list[Rect] = []
    certified: list[bool] = []
    for r in rhos:
        if not certify:
            windows.append(Rect(0, 0, 0, 0))
            certified.append(False)
            continue
        dmin = min((abs(r - s) for s in rhos if s != r), default=1.0)
        hw = min(0.4, 0.45 * dmin) if dmin > 0 else 0.4
        hw_re = min(hw, 0.9 * r.real) if r.real > 0 else hw
        win = Rect(r.real - hw_re, r.real + hw_re, r.imag - hw, r.imag + hw)
        try:
            certified.append(count_zeros(ev, j, win, which) == 1)
        except ContourThroughZero:
            certified.append(False)
        windows.append(win)

    lam0 = complex(f(ev, j, 0.0))
    return Spectrum(j=j, which=which, eigenvalues=tuple(lams),
                    residuals=residuals, seeds_used=tuple(used),
                    certified=tuple(certified), windows=tuple(windows),
                    sweep_rect=sweep, sweep_count=target,
                    lambda_zero_value=lam0 if abs(lam0) < 1e-6 else None)
