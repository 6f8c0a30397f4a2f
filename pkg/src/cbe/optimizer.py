"""Learning the circulant generator by alternating time/frequency updates.

For an n x d data matrix X, binary target matrix B, and circulant
projection R generated by r, training minimizes

    ||B - X R^T||_F^2  +  lam * ||R R^T - I||_F^2  (+ mu * pairwise term)

by alternating two exact coordinate updates. With r fixed, the best B is
the elementwise sign of the projections (computed in the signal domain).
With B fixed, the circulant structure diagonalizes in the frequency
domain: writing s = fft(r), the objective separates into one scalar
quartic per self-conjugate spectrum bin and one bivariate quartic per
conjugate pair (re s_i, im s_i), subject to the conjugate symmetry that
keeps r real. Both subproblem shapes admit exact minimization through the
closed-form roots of a depressed cubic, so every half-step is a true
argmin and the objective trace never increases.

The optional pairwise term pulls "similar" index pairs together and pushes
"dissimilar" ones apart; in the frequency domain it only shifts the
quadratic diagonal, so the same subproblem solvers apply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dsp
from .encoders import CirculantParams, cbe_random
from .validation import check_data_matrix, check_power_of_two, check_vector

_SOLVER_MODES = ("radial_exact", "gradient_descent")


class UnboundedObjectiveError(ArithmeticError):
    """A spectrum subproblem has no finite minimizer.

    Happens when the orthogonality weight is zero (or the pairwise weight
    drives a quadratic coefficient negative) with no quartic term left to
    keep the objective coercive.
    """


@dataclass
class OptConfig:
    """Knobs for the alternating optimization."""

    k: int
    lam: float = 1.0
    mu: float = 0.0
    max_outer_iters: int = 10
    objective_rel_tol: float = 1e-4
    solver_mode: str = "radial_exact"
    gd_max_steps: int = 200
    gd_step_init: float = 0.1
    gd_backtrack: float = 0.5
    normalized_targets: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.mu < 0:
            raise ValueError(f"mu must be nonnegative, got {self.mu}")
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.max_outer_iters < 0:
            raise ValueError(f"max_outer_iters must be nonnegative, got {self.max_outer_iters}")
        if self.solver_mode not in _SOLVER_MODES:
            raise ValueError(f"solver_mode must be one of {_SOLVER_MODES}, got {self.solver_mode!r}")


@dataclass
class PairConstraints:
    """Index pairs labeled similar / dissimilar for semi-supervised training."""

    similar: list = field(default_factory=list)
    dissimilar: list = field(default_factory=list)

    def __post_init__(self):
        self.similar = [(int(i), int(j)) for i, j in self.similar]
        self.dissimilar = [(int(i), int(j)) for i, j in self.dissimilar]
        overlap = set(self.similar) & set(self.dissimilar)
        if overlap:
            raise ValueError(f"pairs in both similar and dissimilar sets: {sorted(overlap)}")

    def check_range(self, n: int):
        for i, j in self.similar + self.dissimilar:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"constraint pair ({i}, {j}) out of range for n={n}")

    def __bool__(self):
        return bool(self.similar or self.dissimilar)


@dataclass
class FreqStats:
    """Frequency-domain sufficient statistics of (X, B) for the r-update.

    ``m`` is the quadratic diagonal (per-bin input energy), ``h``/``g`` the
    linear coefficients on the real/imaginary spectrum parts, ``a`` the
    pairwise-constraint diagonal, and ``b_sq`` the constant ||B||_F^2 the
    frequency form of the binarization term carries.
    """

    m: np.ndarray
    h: np.ndarray
    g: np.ndarray
    a: np.ndarray
    b_sq: float


@dataclass
class OptState:
    """Mutable training state: spectrum, targets, statistics, objective trace."""

    spectrum: np.ndarray
    targets: np.ndarray
    stats: FreqStats | None
    objective_trace: list = field(default_factory=list)


def update_targets(r, X, k: int, scale: float = 1.0, x_spectra=None, r_spectrum=None) -> np.ndarray:
    """Exact B-step: sign of each circulant projection, columns >= k zeroed.

    Entry (i, j) is +scale when row j of circ(r) dotted with x_i is >= 0 and
    -scale otherwise, for j < k; columns k..d-1 stay identically zero (the
    reduced-bit heuristic). Projections go through the FFT, one batch for
    all rows. Pass ``x_spectra=fft(X)`` and/or ``r_spectrum=fft(r)`` to
    reuse transforms across iterations.
    """
    if x_spectra is None:
        X = check_data_matrix(X)
        x_spectra = dsp.fft(X)
    d = x_spectra.shape[-1]
    if not 1 <= k <= d:
        raise ValueError(f"k must be in [1, {d}], got {k}")
    if r_spectrum is None:
        r_spectrum = dsp.fft(check_vector(r, d=d))
    projections = dsp.ifft(x_spectra * r_spectrum).real
    targets = np.where(projections >= 0, scale, -scale)
    targets[:, k:] = 0.0
    return targets


def accumulate_stats(X, B, constraints: PairConstraints | None = None, mu: float = 0.0,
                     x_spectra=None) -> FreqStats:
    """Reduce (X, B) to the per-bin statistics the spectrum update needs.

    With FX = fft(x_i) and FB = fft(i-th row of B), per bin l:

        m[l] =      sum_i |FX[l]|^2
        h[l] = -2 * sum_i (Re FX[l] Re FB[l] + Im FX[l] Im FB[l])
        g[l] =  2 * sum_i (Im FX[l] Re FB[l] - Re FX[l] Im FB[l])
        a[l] =      sum_(i,j) similar |fft(x_i - x_j)[l]|^2  -  same over dissimilar

    The effective quadratic diagonal used downstream is m + mu * a.
    """
    X = check_data_matrix(X)
    B = np.asarray(B, dtype=np.float64)
    if B.shape != X.shape:
        raise ValueError(f"B shape {B.shape} does not match X shape {X.shape}")
    if x_spectra is None:
        x_spectra = dsp.fft(X)
    b_spectra = dsp.fft(B)
    m = np.sum(x_spectra.real**2 + x_spectra.imag**2, axis=0)
    h = -2.0 * np.sum(x_spectra.real * b_spectra.real + x_spectra.imag * b_spectra.imag, axis=0)
    g = 2.0 * np.sum(x_spectra.imag * b_spectra.real - x_spectra.real * b_spectra.imag, axis=0)
    a = np.zeros_like(m)
    if constraints:
        constraints.check_range(X.shape[0])
        for pairs, sign in ((constraints.similar, 1.0), (constraints.dissimilar, -1.0)):
            if pairs:
                ii = np.fromiter((p[0] for p in pairs), dtype=np.intp)
                jj = np.fromiter((p[1] for p in pairs), dtype=np.intp)
                delta_spectra = dsp.fft(X[ii] - X[jj])
                a += sign * np.sum(delta_spectra.real**2 + delta_spectra.imag**2, axis=0)
    return FreqStats(m=m, h=h, g=g, a=a, b_sq=float(np.sum(B * B)))


def _real_cubic_roots(p: float, q: float) -> list[float]:
    """Real roots of the depressed cubic t^3 + p t + q = 0 (Cardano/trigonometric)."""
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0:
        root = math.sqrt(disc)
        return [float(np.cbrt(-q / 2.0 + root) + np.cbrt(-q / 2.0 - root))]
    if p == 0:
        return [0.0]
    radius = math.sqrt(-p / 3.0)
    arg = min(1.0, max(-1.0, 3.0 * q / (2.0 * p) * math.sqrt(-3.0 / p)))
    phi = math.acos(arg)
    return [2.0 * radius * math.cos((phi - 2.0 * math.pi * i) / 3.0) for i in range(3)]


def solve_dc(m: float, h: float, c: float) -> float:
    """Global minimizer of the scalar spectrum quartic m t^2 + h t + c (t^2 - 1)^2.

    Used for the self-conjugate bins (index 0 and, for even d, index d/2),
    which conjugate symmetry forces to be real. Stationary points satisfy
    4c t^3 + (2m - 4c) t + h = 0, solved in closed form; ties break toward
    the larger t. With c <= 0 the quartic term is gone: the quadratic
    minimizer is returned when m > 0, otherwise the objective is unbounded.
    """
    if c <= 0:
        if m > 0:
            return -h / (2.0 * m)
        raise UnboundedObjectiveError(
            f"spectrum subproblem unbounded below (m={m}, c={c}); requires lam > 0"
        )
    roots = _real_cubic_roots((m - 2.0 * c) / (2.0 * c), h / (4.0 * c))
    best_t = None
    best_f = math.inf
    for t in sorted(roots, reverse=True):
        f = m * t * t + h * t + c * (t * t - 1.0) ** 2
        if f < best_f:
            best_t, best_f = t, f
    return float(best_t)


def _pair_objective(a, b, m_sum, h_sum, g_diff, c):
    s2 = a * a + b * b
    return m_sum * s2 + c * (s2 - 1.0) ** 2 + h_sum * a + g_diff * b


def _gradient_descent(m_sum, h_sum, g_diff, c, start, max_steps, step_init, backtrack):
    a, b = float(start[0]), float(start[1])
    f = _pair_objective(a, b, m_sum, h_sum, g_diff, c)
    for _ in range(max_steps):
        s2 = a * a + b * b
        common = 2.0 * m_sum + 4.0 * c * (s2 - 1.0)
        ga = common * a + h_sum
        gb = common * b + g_diff
        grad_sq = ga * ga + gb * gb
        if grad_sq < 1e-16:
            break
        step = step_init
        moved = False
        while step > 1e-18:
            na, nb = a - step * ga, b - step * gb
            nf = _pair_objective(na, nb, m_sum, h_sum, g_diff, c)
            if nf <= f - 1e-4 * step * grad_sq:
                a, b, f = na, nb, nf
                moved = True
                break
            step *= backtrack
        if not moved:
            break
    return a, b, f


def solve_pair(m_sum: float, h_sum: float, g_diff: float, c: float,
               mode: str = "radial_exact", warm=(0.0, 0.0),
               gd_max_steps: int = 200, gd_step_init: float = 0.1,
               gd_backtrack: float = 0.5) -> tuple[float, float]:
    """Minimize the conjugate-pair quartic over (a, b) = (re, im) of one bin.

    Objective: m_sum (a^2+b^2) + c (a^2+b^2-1)^2 + h_sum a + g_diff b.

    radial_exact: away from the linear term the objective depends only on
    the radius s, and at fixed s the linear term is minimized along
    -(h_sum, g_diff); so the problem reduces to a scalar quartic in s >= 0
    solved exactly as in solve_dc. If the linear term vanishes the
    direction is degenerate: the warm-start direction is kept, falling back
    to (s, 0) when that is zero too.

    gradient_descent: backtracking-line-search descent, run from the warm
    start and from the two well floors along the tilt direction, keeping
    the best local minimum found. Retained as a cross-check; the radial
    reduction is exact.
    """
    if mode not in _SOLVER_MODES:
        raise ValueError(f"mode must be one of {_SOLVER_MODES}, got {mode!r}")
    tilt = math.hypot(h_sum, g_diff)
    if c <= 0:
        if m_sum > 0:
            return -h_sum / (2.0 * m_sum), -g_diff / (2.0 * m_sum)
        raise UnboundedObjectiveError(
            f"spectrum subproblem unbounded below (m={m_sum}, c={c}); requires lam > 0"
        )
    if tilt > 0:
        direction = (-h_sum / tilt, -g_diff / tilt)
    else:
        warm_norm = math.hypot(warm[0], warm[1])
        direction = (warm[0] / warm_norm, warm[1] / warm_norm) if warm_norm > 0 else (1.0, 0.0)
    if mode == "radial_exact":
        roots = _real_cubic_roots((m_sum - 2.0 * c) / (2.0 * c), -tilt / (4.0 * c))
        best_s, best_f = 0.0, c  # s = 0 has objective c
        for s in roots:
            if s < 0:
                continue
            f = m_sum * s * s + c * (s * s - 1.0) ** 2 - tilt * s
            if f < best_f or (f == best_f and s > best_s):
                best_s, best_f = s, f
        return best_s * direction[0], best_s * direction[1]
    well = math.sqrt(max(1.0 - m_sum / (2.0 * c), 0.0)) or 1.0
    starts = [tuple(warm), (well * direction[0], well * direction[1]),
              (-well * direction[0], -well * direction[1])]
    best = None
    for start in starts:
        a, b, f = _gradient_descent(m_sum, h_sum, g_diff, c, start,
                                    gd_max_steps, gd_step_init, gd_backtrack)
        if best is None or f < best[2]:
            best = (a, b, f)
    return best[0], best[1]


def update_spectrum(spectrum, stats: FreqStats, config: OptConfig) -> np.ndarray:
    """Exact r-step: solve every per-bin subproblem, rebuild a symmetric spectrum.

    Bin 0 (and bin d/2 for even d) are real and get the scalar quartic with
    c = lam * d; bins i = 1..d/2-1 get the bivariate quartic with c =
    2 lam d, and bin d-i is set to the conjugate. Each new bin value is
    kept only if it strictly improves its own subproblem over the incumbent,
    which makes a converged spectrum bit-stable and the objective trace
    monotone.
    """
    spectrum = np.asarray(spectrum, dtype=np.complex128)
    d = spectrum.shape[0]
    m_eff = stats.m if config.mu == 0 else stats.m + config.mu * stats.a
    c_real = config.lam * d
    c_pair = 2.0 * config.lam * d

    def scalar_obj(t, m, h):
        return m * t * t + h * t + c_real * (t * t - 1.0) ** 2

    out = spectrum.copy()
    candidate = solve_dc(m_eff[0], stats.h[0], c_real)
    if scalar_obj(candidate, m_eff[0], stats.h[0]) < scalar_obj(spectrum[0].real, m_eff[0], stats.h[0]):
        out[0] = candidate
    else:
        out[0] = spectrum[0].real
    for i in range(1, (d + 1) // 2):
        m_sum = m_eff[i] + m_eff[d - i]
        h_sum = stats.h[i] + stats.h[d - i]
        g_diff = stats.g[i] - stats.g[d - i]
        warm = (spectrum[i].real, spectrum[i].imag)
        a, b = solve_pair(m_sum, h_sum, g_diff, c_pair, mode=config.solver_mode, warm=warm,
                          gd_max_steps=config.gd_max_steps, gd_step_init=config.gd_step_init,
                          gd_backtrack=config.gd_backtrack)
        if not _pair_objective(a, b, m_sum, h_sum, g_diff, c_pair) < _pair_objective(
                warm[0], warm[1], m_sum, h_sum, g_diff, c_pair):
            a, b = warm
        out[i] = complex(a, b)
        out[d - i] = complex(a, -b)
    if d >= 2 and d % 2 == 0:
        nyq = d // 2
        candidate = solve_dc(m_eff[nyq], stats.h[nyq], c_real)
        incumbent = spectrum[nyq].real
        if scalar_obj(candidate, m_eff[nyq], stats.h[nyq]) < scalar_obj(incumbent, m_eff[nyq], stats.h[nyq]):
            out[nyq] = candidate
        else:
            out[nyq] = incumbent
    return out


def _frequency_objective(spectrum, stats: FreqStats, lam: float, mu: float) -> float:
    re, im = spectrum.real, spectrum.imag
    d = spectrum.shape[0]
    binarization = (re @ (stats.m * re) + im @ (stats.m * im) + re @ stats.h + im @ stats.g) / d \
        + stats.b_sq
    penalty = lam * float(np.sum((re * re + im * im - 1.0) ** 2))
    value = binarization + penalty
    if mu:
        value += mu * (re @ (stats.a * re) + im @ (stats.a * im)) / d
    return float(value)


def dense_circulant(r) -> np.ndarray:
    """Materialize circ(r) with r as its first column (test/reference scale only)."""
    r = check_vector(r)
    d = r.shape[0]
    idx = (np.arange(d)[:, None] - np.arange(d)[None, :]) % d
    return r[idx]


def objective(r, X, B, lam: float, mu: float = 0.0,
              constraints: PairConstraints | None = None, domain: str = "time") -> float:
    """Full training objective, evaluated in either domain.

    ``domain="time"`` materializes circ(r) and evaluates the Frobenius
    norms directly (reference path, small d). ``domain="frequency"``
    evaluates through the per-bin statistics; Parseval makes the two agree
    to rounding.
    """
    X = check_data_matrix(X)
    B = np.asarray(B, dtype=np.float64)
    r = check_vector(r, d=X.shape[1])
    if domain == "frequency":
        stats = accumulate_stats(X, B, constraints=constraints, mu=mu)
        return _frequency_objective(dsp.fft(r), stats, lam, mu)
    if domain != "time":
        raise ValueError(f"domain must be 'time' or 'frequency', got {domain!r}")
    R = dense_circulant(r)
    value = float(np.sum((B - X @ R.T) ** 2))
    value += lam * float(np.sum((R @ R.T - np.eye(r.shape[0])) ** 2))
    if mu and constraints:
        constraints.check_range(X.shape[0])
        for pairs, sign in ((constraints.similar, 1.0), (constraints.dissimilar, -1.0)):
            for i, j in pairs:
                value += mu * sign * float(np.sum((R @ (X[i] - X[j])) ** 2))
    return value


def train(X, config: OptConfig, constraints: PairConstraints | None = None,
          seed: int = 0) -> tuple[CirculantParams, OptState]:
    """Alternate the B-step and the spectrum step from a random initialization.

    The generator starts as a CBE-rand draw (unit Gaussian, seeded); the
    sign diagonal is drawn once and folded into X as preprocessing, so the
    alternation optimizes r alone. The objective (including the pairwise
    term when mu > 0) is recorded after every half-step and is
    non-increasing. Stops after ``max_outer_iters`` or when the relative
    per-iteration decrease falls below ``objective_rel_tol``.
    """
    X = check_data_matrix(X)
    n, d = X.shape
    check_power_of_two(d, "d")
    if config.k > d:
        raise ValueError(f"k={config.k} exceeds d={d}; training learns a single generator")
    if constraints is not None:
        constraints.check_range(n)
    init = cbe_random(d, config.k, seed)
    state = OptState(spectrum=dsp.fft(init.r), targets=np.zeros((0, d)), stats=None)
    if config.max_outer_iters == 0:
        return init, state

    scale = 1.0 / math.sqrt(d) if config.normalized_targets else 1.0
    x_signed = X * init.signs
    x_spectra = dsp.fft(x_signed)
    spectrum = state.spectrum
    trace = state.objective_trace
    previous = None
    for _ in range(config.max_outer_iters):
        targets = update_targets(None, None, config.k, scale=scale,
                                 x_spectra=x_spectra, r_spectrum=spectrum)
        stats = accumulate_stats(x_signed, targets, constraints=constraints, mu=config.mu,
                                 x_spectra=x_spectra)
        trace.append(_frequency_objective(spectrum, stats, config.lam, config.mu))
        spectrum = update_spectrum(spectrum, stats, config)
        current = _frequency_objective(spectrum, stats, config.lam, config.mu)
        trace.append(current)
        state.spectrum = spectrum
        state.targets = targets
        state.stats = stats
        if previous is not None and previous - current < config.objective_rel_tol * max(1.0, abs(previous)):
            break
        previous = current

    r_time = dsp.ifft(spectrum)
    residual = float(np.max(np.abs(r_time.imag)))
    if residual > 1e-9:
        raise ArithmeticError(f"learned spectrum lost conjugate symmetry (residual {residual:.3e})")
    params = CirculantParams(r=r_time.real, signs=init.signs, k=config.k)
    return params, state
