"""Filtered operator algebras, markets, trading strategies, and gains.

A market is a bank account plus adapted positive asset operators over a
filtration of unital *-subalgebras.  Trading strategies are per-period
biprocesses sum_k a_k A_k* (.) A_k with coefficients from the previous
algebra; their cumulative action on asset increments is the gain process.
The real span of all terminal gains (claims attainable at price zero) is
generated by polarization over an algebra basis and orthonormalized by
Gram-Schmidt in the trace inner product.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ValidationError
from .operators import as_hermitian, check_matrix, herm_to_vec, hs_inner, min_eigenvalue

SPAN_TOL = 1e-9
POSITIVITY_TOL = 1e-10
GS_TOL = 1e-9


class OperatorAlgebra:
    """Unital *-subalgebra of B(C^d), given by a spanning basis.

    Two representations are supported:

    * ``tensor_factor(m, dim)`` -- the structured algebra B(C^m) (x) I_{dim/m},
      with membership tested structurally and matrix units enumerated lazily.
      ``m = 1`` gives the trivial algebra CI, ``m = dim`` the full algebra.
    * ``from_basis(mats)`` -- an explicit complex-spanning basis, validated
      for identity membership, adjoint/product closure, and independence.
    """

    def __init__(self, dim, *, factor_dim=None, basis=None):
        self.dim = int(dim)
        self._factor_dim = factor_dim
        self._explicit_basis = basis

    # -- constructors --------------------------------------------------------

    @classmethod
    def tensor_factor(cls, active_dim, dim):
        if dim % active_dim != 0:
            raise ValidationError(f"{active_dim} does not divide ambient dim {dim}")
        return cls(dim, factor_dim=int(active_dim))

    @classmethod
    def trivial(cls, dim):
        return cls.tensor_factor(1, dim)

    @classmethod
    def full(cls, dim):
        return cls.tensor_factor(dim, dim)

    @classmethod
    def from_basis(cls, mats, check=True):
        mats = [check_matrix(m) for m in mats]
        if not mats:
            raise ValidationError("empty algebra basis")
        dim = mats[0].shape[0]
        if any(m.shape[0] != dim for m in mats):
            raise ValidationError("algebra basis has mixed dimensions")
        alg = cls(dim, basis=mats)
        if check:
            alg._check_explicit()
        return alg

    # -- representation ------------------------------------------------------

    @property
    def is_factor(self):
        return self._factor_dim is not None

    @property
    def factor_dim(self):
        return self._factor_dim

    @cached_property
    def basis(self):
        """Complex-spanning basis (matrix units E_ab (x) I for factor algebras)."""
        if self._explicit_basis is not None:
            return list(self._explicit_basis)
        m, k = self._factor_dim, self.dim // self._factor_dim
        eye_k = np.eye(k, dtype=complex)
        out = []
        for a in range(m):
            for b in range(m):
                unit = np.zeros((m, m), dtype=complex)
                unit[a, b] = 1.0
                out.append(np.kron(unit, eye_k))
        return out

    @cached_property
    def _basis_matrix(self):
        # columns are flattened basis elements; used for least-squares membership
        return np.column_stack([b.reshape(-1) for b in self.basis])

    def herm_dim(self):
        """Real dimension of the Hermitian part O(A)."""
        if self.is_factor:
            return self._factor_dim ** 2
        rows = []
        for b in self.basis:
            rows.append(herm_to_vec(0.5 * (b + b.conj().T)))
            rows.append(herm_to_vec(0.5j * (b - b.conj().T)))
        return int(np.linalg.matrix_rank(np.array(rows), tol=1e-9))

    # -- membership ----------------------------------------------------------

    def contains(self, x, tol=SPAN_TOL):
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim, self.dim):
            return False
        scale = max(1.0, np.linalg.norm(x))
        return self._membership_residual(x) <= tol * scale

    def _membership_residual(self, x):
        if self.is_factor:
            m, k = self._factor_dim, self.dim // self._factor_dim
            # X in B(C^m) (x) I_k  iff  X[a,i,b,j] = delta_ij * Y[a,b]
            t = x.reshape(m, k, m, k)
            y = np.trace(t, axis1=1, axis2=3) / k
            recon = np.einsum("ab,ij->aibj", y, np.eye(k)).reshape(self.dim, self.dim)
            return float(np.linalg.norm(x - recon))
        coeffs, *_ = np.linalg.lstsq(self._basis_matrix, x.reshape(-1), rcond=None)
        return float(np.linalg.norm(self._basis_matrix @ coeffs - x.reshape(-1)))

    def _check_explicit(self):
        mats = self._explicit_basis
        stacked = np.column_stack([m.reshape(-1) for m in mats])
        if np.linalg.matrix_rank(stacked, tol=1e-9) < len(mats):
            raise ValidationError("algebra basis is linearly dependent")
        eye = np.eye(self.dim, dtype=complex)
        if not self.contains(eye):
            raise ValidationError("algebra does not contain the identity")
        for i, a in enumerate(mats):
            if not self.contains(a.conj().T):
                raise ValidationError(f"algebra not closed under adjoint (element {i})")
            for j, b in enumerate(mats):
                if not self.contains(a @ b):
                    raise ValidationError(
                        f"algebra not closed under products (elements {i}, {j})"
                    )

    def is_trivial(self):
        if self.is_factor:
            return self._factor_dim == 1
        eye = np.eye(self.dim, dtype=complex)
        return all(
            np.linalg.norm(b - (np.trace(b) / self.dim) * eye) <= SPAN_TOL
            for b in self.basis
        )

    def is_subalgebra_of(self, other, tol=SPAN_TOL):
        if self.is_factor and other.is_factor:
            return self._factor_dim <= other._factor_dim and self.dim == other.dim
        return all(other.contains(b, tol) for b in self.basis)


class Filtration:
    """Increasing family A_0 subset ... subset A_T with A_0 = CI."""

    def __init__(self, algebras, check=True):
        self.algebras = list(algebras)
        if not self.algebras:
            raise ValidationError("empty filtration")
        dim = self.algebras[0].dim
        if any(a.dim != dim for a in self.algebras):
            raise ValidationError("filtration algebras have mixed ambient dimensions")
        if check:
            if not self.algebras[0].is_trivial():
                raise ValidationError("A_0 must be the scalars CI")
            for s in range(len(self.algebras) - 1):
                if not self.algebras[s].is_subalgebra_of(self.algebras[s + 1]):
                    raise ValidationError(f"A_{s} is not contained in A_{s + 1}")

    @property
    def dim(self):
        return self.algebras[0].dim

    @property
    def horizon(self):
        return len(self.algebras) - 1

    def __getitem__(self, t):
        return self.algebras[t]


def tensor_qubit_filtration(n_periods):
    """The filtration A_n = B((C^2)^(x)n) (x) I of the N-period tensor market."""
    dim = 2 ** n_periods
    return Filtration(
        [OperatorAlgebra.tensor_factor(2 ** n, dim) for n in range(n_periods + 1)]
    )


class MarketModel:
    """Bank account B_0..B_T plus d adapted positive asset processes."""

    def __init__(self, filtration, bank, assets, check=True):
        self.filtration = filtration
        self.bank = [float(b) for b in bank]
        self.assets = [[as_hermitian(s) for s in proc] for proc in assets]
        T = filtration.horizon
        if len(self.bank) != T + 1:
            raise ValidationError("bank account length does not match filtration")
        if check:
            if any(b <= 0 for b in self.bank):
                raise ValidationError("bank account must be strictly positive")
            for j, proc in enumerate(self.assets):
                if len(proc) != T + 1:
                    raise ValidationError(f"asset {j} has wrong process length")
                for t, s in enumerate(proc):
                    if min_eigenvalue(s) < -POSITIVITY_TOL:
                        raise ValidationError(f"asset {j} not positive at t={t}")
                    if not filtration[t].contains(s):
                        raise ValidationError(f"asset {j} not adapted at t={t}")

    @property
    def dim(self):
        return self.filtration.dim

    @property
    def horizon(self):
        return len(self.bank) - 1

    @property
    def n_assets(self):
        return len(self.assets)

    def is_discounted(self, tol=1e-12):
        return all(abs(b - 1.0) <= tol for b in self.bank)

    def increment(self, j, t):
        return self.assets[j][t] - self.assets[j][t - 1]


def discount(market):
    """Replace (B, S) by (1, S_t / B_t); the filtration is unchanged."""
    assets = [
        [proc[t] / market.bank[t] for t in range(market.horizon + 1)]
        for proc in market.assets
    ]
    return MarketModel(
        market.filtration, [1.0] * (market.horizon + 1), assets, check=False
    )


class TradingStrategy:
    """Per-period biprocess sum_k a_k A_k* (.) A_k, stored in factored form.

    ``terms`` maps (period t, asset j) to a list of (a_k, A_k) pairs with
    A_k in A_{t-1}.  The initial scalar h0 enters only the value process at
    time zero, mirroring its role in the market definition.
    """

    def __init__(self, terms=None, h0=0.0):
        self.terms = {}
        for key, pairs in (terms or {}).items():
            t, j = key
            self.terms[(int(t), int(j))] = [
                (float(a), check_matrix(mat)) for a, mat in pairs
            ]
        self.h0 = float(h0)

    def validate(self, filtration):
        for (t, _j), pairs in self.terms.items():
            if t < 1 or t > filtration.horizon:
                raise ValidationError(f"strategy period {t} outside 1..{filtration.horizon}")
            for _a, mat in pairs:
                if not filtration[t - 1].contains(mat):
                    raise ValidationError(
                        f"strategy coefficient at period {t} is not in A_{t - 1}"
                    )

    def scaled(self, c):
        return TradingStrategy(
            {key: [(c * a, mat) for a, mat in pairs] for key, pairs in self.terms.items()},
            h0=c * self.h0,
        )

    @classmethod
    def combine(cls, strategies, coeffs):
        terms = {}
        h0 = 0.0
        for strat, c in zip(strategies, coeffs):
            if c == 0.0:
                continue
            h0 += c * strat.h0
            for key, pairs in strat.terms.items():
                terms.setdefault(key, []).extend((c * a, mat) for a, mat in pairs)
        return cls(terms, h0=h0)

    def apply_increment(self, market, t):
        """sum_j sum_k a_k A_k* (S^j_t - S^j_{t-1}) A_k for one period."""
        d = market.dim
        out = np.zeros((d, d), dtype=complex)
        for j in range(market.n_assets):
            pairs = self.terms.get((t, j), [])
            if not pairs:
                continue
            ds = market.increment(j, t)
            for a, mat in pairs:
                out += a * (mat.conj().T @ ds @ mat)
        return 0.5 * (out + out.conj().T)


def bimodule_apply(h_term, u):
    """(A (x) B) # U = A U B."""
    a, b = (check_matrix(m) for m in h_term)
    u = check_matrix(u)
    if not (a.shape == b.shape == u.shape):
        raise ValidationError("dimension mismatch in bimodule action")
    return a @ u @ b


def gain_process(strategy, market):
    """Cumulative gains (H # S)_t on a discounted market; (H # S)_0 = 0."""
    if not market.is_discounted():
        raise ValidationError("gain process requires a discounted market (B = 1)")
    strategy.validate(market.filtration)
    d = market.dim
    gains = [np.zeros((d, d), dtype=complex)]
    for t in range(1, market.horizon + 1):
        gains.append(gains[-1] + strategy.apply_increment(market, t))
    return gains


def value_process(beta, strategy, market):
    """Portfolio values beta_t B_t I + sum_j H^j_t # S^j_t."""
    if len(beta) != market.horizon + 1:
        raise ValidationError("beta length does not match the horizon")
    strategy.validate(market.filtration)
    d = market.dim
    eye = np.eye(d, dtype=complex)
    values = []
    for t in range(market.horizon + 1):
        v = beta[t] * market.bank[t] * eye
        for j in range(market.n_assets):
            if t == 0:
                v = v + strategy.h0 * market.assets[j][0]
            else:
                for a, mat in strategy.terms.get((t, j), []):
                    v = v + a * (mat.conj().T @ market.assets[j][t] @ mat)
        values.append(0.5 * (v + v.conj().T))
    return values


@dataclass
class GainGenerator:
    """One polarization generator of the attainable space, with provenance.

    The operator is A_p* dS A_q + A_q* dS A_p (kind "sym") or
    i(A_p* dS A_q - A_q* dS A_p) (kind "asym"); ``terms`` is a strategy
    realization of it as a real combination of compressions A* dS A.
    """

    period: int
    asset: int
    kind: str
    pair: tuple
    operator: np.ndarray
    terms: list = field(default_factory=list)

    def strategy(self, scale=1.0):
        return TradingStrategy(
            {(self.period, self.asset): [(scale * a, m) for a, m in self.terms]}
        )


def attainable_generators(market, periods=None):
    """Raw polarization generators of span{ A* dS A : A in A_{t-1} }."""
    if not market.is_discounted():
        raise ValidationError("attainable space requires a discounted market")
    gens = []
    period_range = periods if periods is not None else range(1, market.horizon + 1)
    for t in period_range:
        basis = market.filtration[t - 1].basis
        for j in range(market.n_assets):
            ds = market.increment(j, t)
            if np.abs(ds).max() == 0.0:
                continue
            for p in range(len(basis)):
                ap = basis[p]
                for q in range(p, len(basis)):
                    aq = basis[q]
                    cross = ap.conj().T @ ds @ aq
                    sym = cross + cross.conj().T
                    gens.append(
                        GainGenerator(
                            t, j, "sym", (p, q), 0.5 * (sym + sym.conj().T),
                            # polarization: A_p* dS A_q + A_q* dS A_p
                            #   = ((Ap+Aq)* dS (Ap+Aq) - (Ap-Aq)* dS (Ap-Aq)) / 2
                            [(0.5, ap + aq), (-0.5, ap - aq)],
                        )
                    )
                    if q > p:
                        asym = 1j * (cross - cross.conj().T)
                        gens.append(
                            GainGenerator(
                                t, j, "asym", (p, q), 0.5 * (asym + asym.conj().T),
                                [(0.5, ap + 1j * aq), (-0.5, ap - 1j * aq)],
                            )
                        )
    return gens


def _gram_schmidt(generators, tol=GS_TOL):
    """Orthonormalize generator operators, tracking raw-combination weights."""
    basis = []
    weights = []
    n = len(generators)
    for r, gen in enumerate(generators):
        v = herm_to_vec(gen.operator)
        w = np.zeros(n)
        w[r] = 1.0
        orig = np.linalg.norm(v)
        for b, wb in zip(basis, weights):
            c = float(v @ b)
            v = v - c * b
            w = w - c * wb
        # re-orthogonalize once for numerical safety
        for b, wb in zip(basis, weights):
            c = float(v @ b)
            v = v - c * b
            w = w - c * wb
        nrm = np.linalg.norm(v)
        if nrm > tol * max(1.0, orig):
            basis.append(v / nrm)
            weights.append(w / nrm)
    return basis, weights


def attainable_space_basis(market, with_preimages=False):
    """Orthonormal real basis of the attainable-claim space K.

    With ``with_preimages=True`` also returns, per basis element, a
    TradingStrategy whose terminal gain equals that element.
    """
    gens = attainable_generators(market)
    vecs, weights = _gram_schmidt(gens)
    d = market.dim
    from .operators import vec_to_herm

    basis = [vec_to_herm(v, d) for v in vecs]
    if not with_preimages:
        return basis
    strategies = []
    for w in weights:
        parts = [gens[r].strategy(w[r]) for r in np.nonzero(np.abs(w) > 1e-14)[0]]
        strategies.append(TradingStrategy.combine(parts, [1.0] * len(parts)))
    return basis, strategies
