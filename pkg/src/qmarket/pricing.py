"""Replication, arbitrage-free price intervals, and optional decomposition.

Price bounds are computed by an interior-point pass: maximize
tr(rho A) + tau * logdet(rho) over the affine martingale slice with damped
Newton steps, driving tau down a geometric schedule; the endpoints of the
tau-path converge to the closed-set optima, which by density of the
faithful states equal the sup/inf over risk-neutral states.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .arbitrage import (
    DEFAULT_MAX_ITERS,
    FAITHFUL_STATE_FOUND,
    NO_FAITHFUL_STATE,
    build_constraints,
    check_no_arbitrage,
    martingale_affine_slice,
    maximize_lambda_min,
)
from .errors import ArbitrageError, InternalConsistencyError, SolverError, ValidationError
from .market import (
    TradingStrategy,
    _gram_schmidt,
    attainable_generators,
    gain_process,
)
from .operators import as_hermitian, hs_inner, vec_to_herm
from .quantum import DensityState

ATTAINABLE_RESIDUAL_TOL = 1e-8
INTERVAL_WIDTH_TOL = 1e-7
CONSUMPTION_PSD_TOL = 1e-8


@dataclass
class Replication:
    """Least-squares replication A = alpha I + (H # S)_T over the gain basis."""

    alpha: float
    strategy: TradingStrategy
    residual: float
    scale: float = 1.0

    @property
    def attainable(self):
        return self.residual <= ATTAINABLE_RESIDUAL_TOL * self.scale


@dataclass
class PriceInterval:
    lower: float
    upper: float
    attainable: bool
    witness_states: tuple = (None, None)
    interval_open: bool = True

    @property
    def width(self):
        return self.upper - self.lower


@dataclass
class PriceClassification:
    interval: PriceInterval
    replication: Replication
    unique_price: Optional[float] = None


@dataclass
class OptionalDecompositionResult:
    v0: float
    strategy: TradingStrategy
    consumption: list


@dataclass
class CompletenessReport:
    complete: bool
    affine_dim: int
    observable_dim: int


def _require_discounted(market):
    if not market.is_discounted():
        raise ValidationError("pricing operations require a discounted market (B = 1)")


def _require_terminal_observable(a, market):
    a = as_hermitian(a)
    if not market.filtration[market.horizon].contains(a):
        raise ValidationError("claim is not adapted to the terminal algebra A_T")
    return a


def _attainable_basis_with_preimages(market, periods=None):
    gens = attainable_generators(market, periods)
    vecs, weights = _gram_schmidt(gens)
    basis = [vec_to_herm(v, market.dim) for v in vecs]
    strategies = []
    for w in weights:
        parts = [gens[r].strategy(w[r]) for r in np.nonzero(np.abs(w) > 1e-14)[0]]
        strategies.append(TradingStrategy.combine(parts, [1.0] * len(parts)))
    return basis, strategies


def replicate(a, market):
    """Replicate A = alpha I + sum_i c_i K_i; alpha is the candidate price."""
    _require_discounted(market)
    a = _require_terminal_observable(a, market)
    basis, strategies = _attainable_basis_with_preimages(market)
    d = market.dim
    eye = np.eye(d, dtype=complex)
    cols = np.column_stack(
        [eye.reshape(-1)] + [k.reshape(-1) for k in basis]
    )
    coef, *_ = np.linalg.lstsq(cols, a.reshape(-1), rcond=None)
    coef = coef.real
    residual = float(np.linalg.norm(cols @ coef - a.reshape(-1)))
    alpha = float(coef[0])
    strategy = TradingStrategy.combine(strategies, coef[1:])
    return Replication(
        alpha, strategy, residual, scale=max(1.0, float(np.linalg.norm(a)))
    )


# --- log-det barrier over the martingale slice ------------------------------


def _barrier_maximize(x0, basis, objective, start_c, tau_floor=1e-10):
    """max tr(rho(c) A) + tau logdet rho(c) along tau = 1, 0.5, ..., floor."""
    if not basis:
        return float(hs_inner(x0, objective)), np.zeros(0)
    stack = np.array(basis)
    q = np.array([hs_inner(b, objective) for b in basis])
    c = np.array(start_c, dtype=float)

    def assemble(cv):
        return x0 + np.tensordot(cv, stack, axes=1)

    def f_value(cv, tau):
        rho = assemble(cv)
        vals = np.linalg.eigvalsh(rho)
        if vals[0] <= 0:
            return -np.inf
        return float(q @ cv) + tau * float(np.log(vals).sum())

    tau = 1.0
    while tau >= tau_floor:
        for _ in range(60):
            rho = assemble(c)
            inv = np.linalg.inv(rho)
            inv = 0.5 * (inv + inv.conj().T)
            grad = q + tau * np.einsum("ab,iab->i", inv.conj(), stack).real
            m = np.einsum("ab,ibc->iac", inv, stack)
            hess = tau * np.einsum("iab,jba->ij", m, m).real
            hess = 0.5 * (hess + hess.T)
            try:
                step = np.linalg.solve(hess + 1e-14 * np.eye(len(c)), grad)
            except np.linalg.LinAlgError:
                step = grad
            decrement = float(grad @ step)
            if decrement < max(1e-10 * tau, 1e-18):
                break
            t = 1.0
            f0 = f_value(c, tau)
            while t > 1e-14:
                if f_value(c + t * step, tau) > f0 - 1e-18:
                    break
                t *= 0.5
            c = c + t * step
        tau *= 0.5
    rho = assemble(c)
    return float(hs_inner(rho, objective)), c


def price_bounds(a, market, max_iters=DEFAULT_MAX_ITERS):
    """Arbitrage-free price interval [inf, sup] of tr(rho A) over martingale states."""
    _require_discounted(market)
    a = _require_terminal_observable(a, market)
    na = check_no_arbitrage(market, max_iters=max_iters)
    if na.status == NO_FAITHFUL_STATE:
        raise ArbitrageError(
            "market admits arbitrage; price bounds undefined",
            certificate=na.arbitrage_claim,
        )
    if na.status != FAITHFUL_STATE_FOUND:
        raise SolverError("no-arbitrage decision is indeterminate")

    cs = build_constraints(market)
    slice_ = martingale_affine_slice(cs)
    if slice_ is None:
        raise SolverError("martingale slice unexpectedly empty")
    x0, basis = slice_
    if na.witness_state is not None:
        # re-express the interior witness in slice coordinates for a warm start
        start = np.array(
            [hs_inner(na.witness_state.mat - x0, b) for b in basis]
        )
    else:
        start = np.zeros(len(basis))

    upper, c_hi = _barrier_maximize(x0, basis, a, start)
    lower_neg, c_lo = _barrier_maximize(x0, basis, -a, start)
    lower = -lower_neg

    def state_at(cv):
        rho = x0 + (np.tensordot(cv, np.array(basis), axes=1) if len(basis) else 0.0)
        return DensityState(rho)

    rep = replicate(a, market)
    scale = max(1.0, abs(upper))
    width_small = upper - lower <= INTERVAL_WIDTH_TOL * scale
    if rep.attainable != width_small:
        raise InternalConsistencyError(
            f"attainability disagreement: replication residual {rep.residual:.3e}, "
            f"interval width {upper - lower:.3e}"
        )
    return PriceInterval(
        lower,
        upper,
        attainable=rep.attainable,
        witness_states=(state_at(c_lo), state_at(c_hi)),
        interval_open=not rep.attainable,
    )


def arbitrage_free_prices(a, market, max_iters=DEFAULT_MAX_ITERS):
    """Classify the price set: singleton (attainable) or open interval."""
    interval = price_bounds(a, market, max_iters=max_iters)
    rep = replicate(a, market)
    unique = None
    if interval.attainable:
        scale = max(1.0, abs(interval.upper))
        if (
            abs(rep.alpha - interval.upper) > 1e-6 * scale
            or abs(rep.alpha - interval.lower) > 1e-6 * scale
        ):
            raise InternalConsistencyError(
                f"replication price {rep.alpha!r} disagrees with bounds "
                f"({interval.lower!r}, {interval.upper!r})"
            )
        unique = rep.alpha
    return PriceClassification(interval, rep, unique_price=unique)


def is_complete(market):
    """Rank test: span{I} + span(K) against the Hermitian part of A_T."""
    _require_discounted(market)
    from .market import attainable_space_basis
    from .operators import herm_to_vec

    basis = attainable_space_basis(market)
    d = market.dim
    rows = [herm_to_vec(np.eye(d, dtype=complex))] + [herm_to_vec(k) for k in basis]
    affine_dim = int(np.linalg.matrix_rank(np.array(rows), tol=1e-9))
    obs_dim = market.filtration[market.horizon].herm_dim()
    return CompletenessReport(affine_dim == obs_dim, affine_dim, obs_dim)


def supermartingale_check(values, rho, market, tol=1e-8):
    """Gram-matrix test of E_rho A* V_t A <= E_rho A* V_{t-1} A per period."""
    mat = rho.mat if isinstance(rho, DensityState) else rho
    for t in range(1, market.horizon + 1):
        dv = as_hermitian(values[t]) - as_hermitian(values[t - 1])
        basis = market.filtration[t - 1].basis
        gram = np.array(
            [
                [np.trace(mat @ ap.conj().T @ dv @ aq) for aq in basis]
                for ap in basis
            ]
        )
        gram = 0.5 * (gram + gram.conj().T)
        if np.linalg.eigvalsh(gram)[-1] > tol:
            return False
    return True


def optional_decomposition(values, market, max_iters=DEFAULT_MAX_ITERS):
    """Constructive decomposition V = V_0 + H # S - C with C increasing.

    Per period, super-replicates the increment of V inside the one-period
    gain span by maximizing the minimum eigenvalue of the hedge slack; the
    slack itself is the consumption increment.
    """
    _require_discounted(market)
    horizon = market.horizon
    if len(values) != horizon + 1:
        raise ValidationError("value process length does not match the horizon")
    vals = [as_hermitian(v) for v in values]
    for t, v in enumerate(vals):
        if not market.filtration[t].contains(v):
            raise ValidationError(f"value process not adapted at t={t}")
    d = market.dim
    v0 = float(np.trace(vals[0]).real) / d

    na = check_no_arbitrage(market, max_iters=max_iters)
    if na.status != FAITHFUL_STATE_FOUND:
        raise ArbitrageError("optional decomposition requires an arbitrage-free market")
    if na.witness_state is not None and not supermartingale_check(vals, na.witness_state, market):
        raise ValidationError(
            "value process is not a supermartingale under the risk-neutral witness"
        )

    eye_zero = np.zeros((d, d), dtype=complex)
    consumption = [eye_zero]
    period_strategies = []
    for t in range(1, horizon + 1):
        dv = vals[t] - vals[t - 1]
        basis, strategies = _attainable_basis_with_preimages(market, periods=[t])
        lam, c, _ = maximize_lambda_min(-dv, basis, max_iters)
        if lam < -CONSUMPTION_PSD_TOL:
            raise SolverError(
                f"one-period super-replication infeasible at t={t}: "
                f"best minimum eigenvalue {lam:.3e}"
            )
        if basis:
            hedge_gain = np.tensordot(c, np.array(basis), axes=1)
            period_strategies.append(TradingStrategy.combine(strategies, c))
        else:
            hedge_gain = eye_zero
        dc = hedge_gain - dv
        consumption.append(consumption[-1] + 0.5 * (dc + dc.conj().T))
    strategy = TradingStrategy.combine(
        period_strategies, [1.0] * len(period_strategies)
    )
    return OptionalDecompositionResult(v0, strategy, consumption)
