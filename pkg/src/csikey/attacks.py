"""Eve's decoders and the reduction machinery: zero-forcing, LLL+Babai,
exact maximum-likelihood search, solution verification, noise-padding
error handling, decision-to-search, and solving bounded-distance decoding
through a MIMO-search oracle.

Reduction-land sample batches carry per-sample noise of width alpha (or a
padded width), not the channel's M*alpha; pass noise_width accordingly.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .distributions import psi_sample, psi_std, smoothing_upper_bound
from .errors import (ConfigurationError, DimensionGuardError, ParameterError,
                     ReductionFailureError, SearchFailureError)
from .lattice import LatticeBasis, babai_nearest_plane, dual_basis, lll_reduce
from .numerics import pseudo_inverse
from .wiretap import SampleBatch, SystemParams, make_instance, random_message, \
    transmit_to_bob, bob_decode, eve_receive

ML_SPACE_GUARD = 10**7

METHOD_ZF = "ZF"
METHOD_BABAI = "BabaiLLL"
METHOD_ML = "ExactML"


@dataclass
class DecoderOutcome:
    estimate: np.ndarray
    method: str
    exact_match: bool | None = None
    symbol_errors: int | None = None

    def score_against(self, truth: np.ndarray) -> "DecoderOutcome":
        errs = int(np.sum(self.estimate != np.asarray(truth)))
        return DecoderOutcome(self.estimate, self.method,
                              exact_match=errs == 0, symbol_errors=errs)


@dataclass
class BddInstance:
    basis: LatticeBasis
    target: np.ndarray
    bound_d: float

    def __post_init__(self):
        self.target = np.asarray(self.target, dtype=float)
        if self.bound_d <= 0:
            raise ParameterError("bound_d must be positive")


def zf_decode(g: np.ndarray, y: np.ndarray, M: int) -> DecoderOutcome:
    """Zero-forcing: pseudo-inverse then per-symbol rounding and clamping."""
    est = np.rint(pseudo_inverse(g) @ np.asarray(y, dtype=float)).astype(np.int64)
    return DecoderOutcome(np.clip(est, 0, M - 1), METHOD_ZF)


def babai_attack(g: np.ndarray, y: np.ndarray, M: int) -> DecoderOutcome:
    """LLL-reduce the lattice of channel columns, Babai-decode, map the
    coefficients back through the recorded unimodular transform."""
    red = lll_reduce(LatticeBasis(g))
    _, coeffs = babai_nearest_plane(red.reduced, np.asarray(y, dtype=float))
    orig = red.transform @ coeffs.astype(object)
    est = np.array([int(c) for c in orig], dtype=np.int64)
    return DecoderOutcome(np.clip(est, 0, M - 1), METHOD_BABAI)


def exact_ml_decode(g: np.ndarray, y: np.ndarray, M: int) -> DecoderOutcome:
    """Exact ML over [0, M)^n: argmin ||y - g x||, lexicographic ties.

    Evaluates the quadratic form x^T (G^T G) x - 2 (G^T y)^T x over the full
    candidate grid, so cost is independent of the sample count.
    """
    g = np.asarray(g, dtype=float)
    y = np.asarray(y, dtype=float)
    n = g.shape[1]
    if M**n > ML_SPACE_GUARD:
        raise DimensionGuardError(f"M^n = {M**n} exceeds guard {ML_SPACE_GUARD}")
    h = g.T @ g
    b = g.T @ y
    vals = np.arange(M, dtype=float)
    score = np.zeros((M,) * n)
    for i in range(n):
        shape = [1] * n
        shape[i] = M
        xi = vals.reshape(shape)
        score += h[i, i] * xi**2 - 2.0 * b[i] * xi
        for j in range(i + 1, n):
            shape_j = [1] * n
            shape_j[j] = M
            score += 2.0 * h[i, j] * xi * vals.reshape(shape_j)
    idx = np.unravel_index(np.argmin(score), score.shape)
    return DecoderOutcome(np.array(idx, dtype=np.int64), METHOD_ML)


def make_exact_ml_oracle(p: SystemParams):
    """Search-oracle adapter: SampleBatch -> estimated symbol vector."""

    def oracle(batch: SampleBatch) -> np.ndarray:
        return exact_ml_decode(batch.a, batch.y, p.M).estimate

    return oracle


def verify_solution(batch: SampleBatch, candidate: np.ndarray, p: SystemParams,
                    noise_width: float | None = None) -> bool:
    """Accept iff the residual sample standard deviation is below the
    midpoint between the two hypothesis values.

    Correct candidate: residual width w0 (default alpha).  Any candidate
    off by >= 1 symbol: width at least sqrt(w0^2 + k^2).
    """
    if len(batch) == 0:
        raise ParameterError("empty batch")
    w0 = p.alpha if noise_width is None else noise_width
    res = batch.y - batch.a @ np.asarray(candidate, dtype=float)
    res_std = math.sqrt(float(np.mean(res**2)))
    threshold = 0.5 * (psi_std(w0) + psi_std(math.sqrt(w0**2 + p.k**2)))
    return res_std < threshold


def error_handling_search(batch: SampleBatch, oracle, p: SystemParams,
                          rng: np.random.Generator, c: float = 1.0,
                          grid_cap: int = 10**4) -> np.ndarray:
    """Solve from samples with unknown noise width beta <= alpha by padding
    with widths from a grid of multiples of n^(-2c) * alpha^2."""
    n = p.n
    step = p.alpha**2 * n ** (-2.0 * c)
    npoints = min(int(math.floor(p.alpha**2 / step)) + 1, grid_cap)
    for idx in range(npoints):
        gamma = idx * step
        padded_width = math.sqrt(p.alpha**2 + gamma)
        for _ in range(max(1, n)):
            if gamma > 0:
                pad = psi_sample(math.sqrt(gamma), rng, size=len(batch))
                padded = SampleBatch(a=batch.a, y=batch.y + pad, label=batch.label)
            else:
                padded = batch
            cand = oracle(padded)
            if verify_solution(padded, cand, p, noise_width=padded_width):
                return np.asarray(cand, dtype=np.int64)
    raise SearchFailureError("no padded noise level produced a verified answer")


def decision_to_search(batch: SampleBatch, decision_oracle, p: SystemParams,
                       rng: np.random.Generator,
                       noise_width: float | None = None) -> np.ndarray:
    """Recover x coordinate by coordinate from a decision oracle.

    For each coordinate, re-randomize that channel column and shift y by
    the column change times a guessed symbol; only the correct guess keeps
    the batch inside the structured distribution.
    """
    if p.M > 16:
        raise DimensionGuardError("decision_to_search budget limited to M <= 16")
    x = np.zeros(p.n, dtype=np.int64)
    if p.M == 1:
        return x
    for j in range(p.n):
        a_new = psi_sample(p.k, rng, size=len(batch))
        tiny = np.abs(a_new) < 1e-300
        while np.any(tiny):
            a_new[tiny] = psi_sample(p.k, rng, size=int(np.sum(tiny)))
            tiny = np.abs(a_new) < 1e-300
        shift = a_new - batch.a[:, j]
        accepted = None
        for m in range(p.M):
            a_mod = batch.a.copy()
            a_mod[:, j] = a_new
            shifted = SampleBatch(a=a_mod, y=batch.y + shift * m)
            if decision_oracle(shifted):
                accepted = m
                break
        if accepted is None:
            raise ReductionFailureError(f"no guess accepted for coordinate {j}")
        x[j] = accepted
    if not verify_solution(batch, x, p, noise_width=noise_width):
        raise ReductionFailureError("recovered vector failed verification")
    return x


def make_decision_oracle(p: SystemParams, noise_width: float | None = None):
    """Test-grade decision oracle: YES iff exact ML finds a verified solution."""

    def oracle(batch: SampleBatch) -> bool:
        cand = exact_ml_decode(batch.a, batch.y, p.M).estimate
        return verify_solution(batch, cand, p, noise_width=noise_width)

    return oracle


def bdd_sample_count(p: SystemParams, r: float, sigma: float, d: float) -> int:
    """Sample count needed for a reliable ML digit at the implied SNR.

    Per-sample noise relative to a one-symbol signal difference combines the
    injected channel noise and the cross term from the target's offset.
    """
    rho = math.hypot(p.M * p.alpha / (r * math.sqrt(2)), d / sigma)
    return max(256, int(math.ceil(120.0 * rho**2)))


def bdd_via_mimo(inst: BddInstance, r: float, mimo_oracle, p: SystemParams,
                 rng: np.random.Generator, eps: float = 0.01,
                 samples: int | None = None, max_attempts: int = 3):
    """Solve bounded-distance decoding with a MIMO-search oracle.

    Draws dual-lattice discrete Gaussians of width r and emits noisy
    inner-product samples whose hidden symbol vector is the coefficient
    vector of the closest lattice point (reduced to [0, M)); the high-order
    digits are recovered from the target magnitude and the oracle resolves
    the fine structure.  Returns (closest point, coefficient vector).
    """
    basis = inst.basis
    bmat = basis.matrix
    n = basis.rank
    sigma = float(np.linalg.svd(bmat, compute_uv=False)[-1])

    eta_bound = smoothing_upper_bound(bmat, eps)
    if r <= math.sqrt(2) * eta_bound:
        raise ConfigurationError(
            f"width r={r:.4g} violates r > sqrt(2)*smoothing bound "
            f"({math.sqrt(2) * eta_bound:.4g})")
    d_cap = p.M * sigma * p.alpha / (p.k**2 * r * math.sqrt(2))
    if inst.bound_d >= d_cap:
        raise ConfigurationError(
            f"bound_d={inst.bound_d:.4g} violates d < M*sigma*alpha/(k^2 r sqrt(2)) "
            f"= {d_cap:.4g}")
    claim7_ok = d_cap > math.sqrt(n) / math.sqrt(2)
    if not claim7_ok:
        warnings.warn(
            f"iteration-progress inequality fails: {d_cap:.4g} <= "
            f"{math.sqrt(n) / math.sqrt(2):.4g}", stacklevel=2)

    dual = dual_basis(basis)
    # Statistical-hiding precondition: the cross-term-plus-noise width must
    # dominate the smoothing width of the scaled dual lattice.
    xi = p.k * inst.bound_d / sigma
    lhs = 1.0 / math.sqrt(1.0 / p.k**2 + (math.sqrt(2) * xi / (p.M * p.alpha)) ** 2)
    eta_dual_scaled = (r / p.k) * smoothing_upper_bound(dual.matrix, eps)
    if not (lhs >= p.k / math.sqrt(2) > eta_dual_scaled):
        raise ConfigurationError(
            f"statistical-hiding inequality fails: need "
            f"{lhs:.4g} >= {p.k / math.sqrt(2):.4g} > {eta_dual_scaled:.4g}")

    if samples is None:
        samples = bdd_sample_count(p, r, sigma, inst.bound_d)

    from .distributions import DiscreteGaussianSpec, discrete_gaussian_sample

    binv = pseudo_inverse(bmat)
    y = inst.target
    # High-order digits come from the target magnitude; the oracle only has
    # to resolve the residual, shifted into [0, M).  Coordinates whose
    # coefficient sits near a half-integer multiple of M round ambiguously,
    # so both roundings are tried there (verification certifies the answer).
    z = binv @ y / p.M
    base = np.rint(z)
    frac = z - base
    amb_margin = 1.5 * inst.bound_d / (sigma * p.M) + 1e-9
    ambiguous = np.flatnonzero(np.abs(frac) > 0.5 - amb_margin)[:6]
    offset = np.full(n, p.M // 2, dtype=np.int64)

    dg = DiscreteGaussianSpec(dual.matrix, r, allow_narrow=True)
    for _ in range(max_attempts):
        for mask in range(2 ** len(ambiguous)):
            t0 = base.copy()
            for bit, j in enumerate(ambiguous):
                if mask >> bit & 1:
                    t0[j] += math.copysign(1.0, frac[j])
            t0 = t0.astype(np.int64)
            coord = binv @ (y - bmat @ (p.M * t0).astype(float)) + offset
            v, _ = discrete_gaussian_sample(dg, rng, size=samples)
            a = p.k * v / r
            e = psi_sample(p.alpha / math.sqrt(2), rng, size=samples)
            y_samp = p.k * (v @ coord) / (r * p.M) + p.k * e / r
            batch = SampleBatch(a=a / p.M, y=y_samp)
            guess = np.asarray(mimo_oracle(batch), dtype=np.int64)
            coeffs = p.M * t0 + (guess - offset)
            point = bmat @ coeffs.astype(float)
            if np.linalg.norm(y - point) <= inst.bound_d * (1 + 1e-9):
                return point, coeffs
    raise SearchFailureError(
        "oracle answers never landed within the bounding distance")


def toy_bdd_setup(n: int, rng: np.random.Generator, M: int = 12,
                  alpha: float = 3.0, k: float = 2.5, r: float = 2.5):
    """Rotated-Z^n toy family for exercising bdd_via_mimo end to end.

    All singular values equal 1, so the smoothing, distance-cap, progress and
    statistical-hiding preconditions reduce to scalar inequalities that the
    defaults satisfy for n <= 4.  Returns (params, instance, planted closest
    point, width r).
    """
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    basis = LatticeBasis(q)
    coeffs = rng.integers(-3 * M, 3 * M + 1, size=n)
    point = q @ coeffs.astype(float)
    direction = rng.normal(size=n)
    direction /= np.linalg.norm(direction)
    bound_d = 0.45
    target = point + direction * (bound_d * rng.uniform(0.2, 0.9))
    p = SystemParams(n=n, m_rx=n, M=M, alpha=alpha, k=k)
    return p, BddInstance(basis, target, bound_d), point, r


@dataclass
class BerResult:
    method: str
    n: int
    M: int
    alpha: float
    k: float
    trials: int
    ser: float
    ser_ci_low: float
    ser_ci_high: float
    seed: int


def _binom_ci(errors: int, total: int):
    p_hat = errors / total
    half = 1.96 * math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / total)
    return max(0.0, p_hat - half), min(1.0, p_hat + half)


def ber_experiment(p: SystemParams, trials: int, methods, rng,
                   seed: int = 0, noise_scale: float = 1.0) -> list[BerResult]:
    """Monte Carlo symbol-error-rate comparison.  Bob's SVD decoder is
    always measured alongside the requested eavesdropper methods."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    methods = set(methods)
    counts = {"bob": 0}
    for m in methods:
        counts[m] = 0
    total = 0
    for _ in range(trials):
        inst = make_instance(p, rng)
        x = random_message(p, rng)
        y_b = transmit_to_bob(inst, x, p, rng, noise_scale=noise_scale)
        counts["bob"] += int(np.sum(bob_decode(inst, y_b, p) != x))
        g, y_e = eve_receive(inst, x, p, rng, noise_scale=noise_scale)
        if "zf" in methods:
            counts["zf"] += int(np.sum(zf_decode(g, y_e, p.M).estimate != x))
        if "babai" in methods:
            counts["babai"] += int(np.sum(babai_attack(g, y_e, p.M).estimate != x))
        if "ml" in methods:
            counts["ml"] += int(np.sum(exact_ml_decode(g, y_e, p.M).estimate != x))
        total += p.n
    results = []
    for method, errs in sorted(counts.items()):
        lo, hi = _binom_ci(errs, total)
        results.append(BerResult(method, p.n, p.M, p.alpha, p.k, trials,
                                 errs / total, lo, hi, seed))
    return results
