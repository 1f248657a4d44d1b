"""No-arbitrage decision via faithful martingale-state feasibility.

A state rho is a martingale state iff tr(rho G_m) = 0 for an orthonormal
family G_m generated from the attainable-claim space.  Arbitrage-freeness
is decided by maximizing the minimum eigenvalue of rho over the affine
slice {rho Hermitian : tr rho = 1, tr(rho G_m) = 0}: a strictly positive
optimum certifies a faithful (risk-neutral) witness, a non-positive one
triggers a search for a positive attainable claim as the opposing
certificate.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import ValidationError
from .market import _gram_schmidt, attainable_generators, discount
from .operators import herm_to_vec, hs_inner, vec_to_herm
from .quantum import DensityState

FAITHFUL_STATE_FOUND = "FAITHFUL_STATE_FOUND"
NO_FAITHFUL_STATE = "NO_FAITHFUL_STATE"
INDETERMINATE = "INDETERMINATE"

FEASIBILITY_THRESHOLD = 1e-9
AFFINE_RESIDUAL_TOL = 1e-8
CLAIM_PSD_TOL = 1e-8
DEFAULT_MAX_ITERS = 50_000


@dataclass
class MartingaleConstraintSet:
    """Orthonormal Hermitian functionals G_m with tr(rho G_m) = 0 required."""

    dim: int
    operators: list
    provenance: list = field(default_factory=list)

    def __len__(self):
        return len(self.operators)


@dataclass
class FeasibilityResult:
    status: str
    lambda_star: float
    witness_state: Optional[DensityState] = None
    arbitrage_claim: Optional[np.ndarray] = None
    iterations: int = 0
    note: str = ""


def build_constraints(market):
    """Martingale-state constraints of a discounted market.

    The constraint family equals an orthonormalized basis of the attainable
    space: rho is a martingale state iff it annihilates every element.
    """
    gens = attainable_generators(market)
    vecs, weights = _gram_schmidt(gens)
    d = market.dim
    ops = [vec_to_herm(v, d) for v in vecs]
    prov = []
    for w in weights:
        pivot = int(np.nonzero(np.abs(w) > 1e-14)[0].max())
        g = gens[pivot]
        prov.append((g.period, g.asset, g.kind, g.pair))
    return MartingaleConstraintSet(d, ops, prov)


def is_martingale_state(rho, market, tol=1e-8):
    """True iff rho annihilates every (unit-norm) martingale constraint."""
    cs = build_constraints(discount(market))
    mat = rho.mat if isinstance(rho, DensityState) else rho
    return all(abs(hs_inner(mat, g)) <= tol for g in cs.operators)


# --- concave spectral solver ------------------------------------------------


def maximize_lambda_min(x0, basis, max_iters=DEFAULT_MAX_ITERS):
    """Maximize lambda_min(x0 + sum_i c_i B_i) over real coefficients c.

    The objective is concave and piecewise smooth; it is ascended through a
    sequence of smoothed surrogates -log sum exp(-beta * spectrum) / beta
    with increasing beta, each maximized by quasi-Newton steps using the
    exact eigenprojector gradient.  Returns (lambda, c, evaluations).
    """
    if not basis:
        return float(np.linalg.eigvalsh(x0)[0]), np.zeros(0), 1
    stack = np.array(basis)
    sigma = max(1.0, float(np.linalg.norm(x0, 2)))
    x0n = np.asarray(x0, dtype=complex) / sigma
    stackn = stack / sigma

    def objective(c, beta):
        rho = x0n + np.tensordot(c, stackn, axes=1)
        vals, vecs = np.linalg.eigh(rho)
        m = vals[0]
        z = np.exp(-beta * (vals - m))
        s = z.sum()
        f = m - np.log(s) / beta
        w = z / s
        big_w = (vecs * w) @ vecs.conj().T
        grad = np.einsum("ab,iab->i", big_w.conj(), stackn).real
        return -f, -grad

    c = np.zeros(len(basis))
    evals = 0
    beta = 8.0
    while beta <= 1.2e12 and evals < max_iters:
        res = scipy.optimize.minimize(
            objective,
            c,
            args=(beta,),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": 500, "ftol": 1e-18, "gtol": 1e-14},
        )
        c = res.x
        evals += res.nfev
        beta *= 8.0
    lam = float(np.linalg.eigvalsh(x0 + np.tensordot(c, stack, axes=1))[0])
    return lam, c, evals


def martingale_affine_slice(constraints):
    """Particular point and orthonormal tangent basis of the constraint slice.

    The slice is {X Hermitian : tr X = 1, tr(X G_m) = 0}; the particular
    point is the least-squares projection of I/d onto it.  Returns
    (x0, basis_ops) or None when the slice is empty.
    """
    d = constraints.dim
    eye = np.eye(d, dtype=complex)
    rows = [herm_to_vec(eye)] + [herm_to_vec(g) for g in constraints.operators]
    mat = np.array(rows)
    rhs = np.zeros(len(rows))
    rhs[0] = 1.0
    v0 = herm_to_vec(eye / d)
    corr, *_ = np.linalg.lstsq(mat, rhs - mat @ v0, rcond=None)
    v = v0 + corr
    if np.linalg.norm(mat @ v - rhs) > AFFINE_RESIDUAL_TOL:
        return None
    null = scipy.linalg.null_space(mat)
    basis = [vec_to_herm(null[:, i], d) for i in range(null.shape[1])]
    return vec_to_herm(v, d), basis


def max_min_eig_over_slice(constraints, objective_shift=None, max_iters=DEFAULT_MAX_ITERS):
    """Solve max lambda_min(rho + shift) over the martingale-state slice."""
    slice_ = martingale_affine_slice(constraints)
    if slice_ is None:
        return FeasibilityResult(NO_FAITHFUL_STATE, float("-inf"), note="affine set empty")
    x0, basis = slice_
    if objective_shift is not None:
        x0 = x0 + objective_shift
    lam, c, evals = maximize_lambda_min(x0, basis, max_iters)
    rho = x0 + sum(ci * b for ci, b in zip(c, basis)) if len(basis) else x0
    witness = None
    status = NO_FAITHFUL_STATE
    if lam > FEASIBILITY_THRESHOLD and objective_shift is None:
        witness = DensityState(rho)
        status = FAITHFUL_STATE_FOUND
    elif abs(lam) <= FEASIBILITY_THRESHOLD:
        status = INDETERMINATE
    return FeasibilityResult(status, lam, witness_state=witness, iterations=evals)


def _positive_claim_search(constraints, max_iters):
    """Maximize lambda_min(K) over {K in span(K-basis), tr K = 1}."""
    ops = constraints.operators
    traces = np.array([float(np.trace(g).real) for g in ops])
    nrm2 = float(traces @ traces)
    if nrm2 <= 1e-20:
        return None, 0.0, 0
    c0 = traces / nrm2
    x0 = np.tensordot(c0, np.array(ops), axes=1)
    null = scipy.linalg.null_space(traces.reshape(1, -1))
    basis = [
        np.tensordot(null[:, i], np.array(ops), axes=1) for i in range(null.shape[1])
    ]
    lam, c, evals = maximize_lambda_min(x0, basis, max_iters)
    claim = x0 + sum(ci * b for ci, b in zip(c, basis)) if len(basis) else x0
    return claim, lam, evals


def check_no_arbitrage(market, max_iters=DEFAULT_MAX_ITERS):
    """Fundamental-theorem decision: faithful witness or positive-claim certificate."""
    m = discount(market)
    cs = build_constraints(m)
    d = m.dim
    if len(cs) == 0:
        witness = DensityState.maximally_mixed(d)
        return FeasibilityResult(
            FAITHFUL_STATE_FOUND, 1.0 / d, witness_state=witness,
            note="no constraints: every state is a martingale state",
        )
    result = max_min_eig_over_slice(cs, max_iters=max_iters)
    if result.status == FAITHFUL_STATE_FOUND:
        return result
    if result.status == INDETERMINATE:
        return result
    claim, lam_claim, extra = _positive_claim_search(cs, max_iters)
    iters = result.iterations + extra
    if claim is None:
        # trace vanishes identically on the attainable span: a PSD traceless
        # operator is zero, so no positive claim can exist
        return FeasibilityResult(
            FAITHFUL_STATE_FOUND, result.lambda_star, iterations=iters,
            note="trace functional vanishes on the attainable span",
        )
    if lam_claim >= -CLAIM_PSD_TOL:
        return FeasibilityResult(
            NO_FAITHFUL_STATE, result.lambda_star,
            arbitrage_claim=claim, iterations=iters,
        )
    return FeasibilityResult(
        INDETERMINATE, result.lambda_star, iterations=iters,
        note=f"no faithful state, best positive-claim lambda {lam_claim:.3e}",
    )
