"""Relative entropy on multi-matrix algebras, by three independent routes.

rel_entropy_closed works directly on densities.  rel_entropy_modular builds
the relative modular operator on the trace GNS space and integrates log
against its spectral resolution.  kosaki_eval maximizes the variational
functional over step functions and is a certified lower bound; restricted
to a subspace V of the algebra it computes the subspace relative entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import MultiMatrixAlgebra, TraceWeight
from .linalg import check_hermitian, dagger, frob, herm_eig, matrix_function
from .states import POS_INF, State, restrict

_LOG = lambda x: math.log(x.real)
_INV = lambda x: 1.0 / x
_SQRT = lambda x: math.sqrt(x.real)


def _support_projection(rho):
    es = herm_eig(rho)
    w = es.eigenvalues
    cutoff = 1e-12 * float(np.max(np.abs(w))) if w.size else 0.0
    keep = w > cutoff
    v = es.eigenvectors[:, keep]
    return v @ dagger(v)


def _check_same_algebra(phi: State, psi: State):
    if phi.algebra is not psi.algebra and not phi.algebra.same_span(psi.algebra):
        raise ValueError("relative entropy requires functionals on the same algebra")
    if phi.tau is not psi.tau and not np.allclose(phi.tau.weights, psi.tau.weights):
        raise ValueError("functionals must be expressed against the same trace weight")


def rel_entropy_closed(phi: State, psi: State) -> float:
    """S(phi||psi) = tau(rho_phi (log rho_phi - log rho_psi)).

    Support violation (phi charging the kernel of psi) yields +inf.
    """
    _check_same_algebra(phi, psi)
    p_psi = _support_projection(psi.rho)
    leak = float(np.real(phi.tau.value(phi.rho @ (np.eye(phi.algebra.dim) - p_psi))))
    if leak > 1e-10 * max(1.0, phi.mass):
        return POS_INF
    log_phi = matrix_function(phi.rho, _LOG, support_only=True)
    log_psi = matrix_function(psi.rho, _LOG, support_only=True)
    val = phi.tau.value(phi.rho @ (log_phi - log_psi))
    return float(np.real(val))


# -- the standard form and the modular route ---------------------------------


@dataclass(eq=False)
class StandardForm:
    """Trace GNS space L^2(A, tau) with a concrete orthonormal basis.

    Members vectorize to coordinates against matrix units scaled by the
    block weights; left and right multiplications become explicit matrices
    acting on those coordinates.
    """

    algebra: MultiMatrixAlgebra
    tau: TraceWeight

    def __post_init__(self):
        elems = []
        for k, (n, _) in enumerate(self.algebra.blocks):
            s = 1.0 / math.sqrt(self.tau.weights[k])
            for i in range(n):
                for j in range(n):
                    elems.append(s * self.algebra.matrix_unit(k, i, j))
        self.onb = elems
        self.hs_dim = len(elems)
        gram = np.array([[self.tau.inner(a, b) for b in elems] for a in elems])
        if frob(gram - np.eye(self.hs_dim)) > 1e-9:
            raise ArithmeticError("GNS basis failed orthonormality check")

    def vectorize(self, x) -> np.ndarray:
        return np.array([self.tau.inner(e, x) for e in self.onb])

    def unvectorize(self, coords):
        out = np.zeros((self.algebra.dim, self.algebra.dim), dtype=complex)
        for c, e in zip(coords, self.onb):
            out += c * e
        return out

    def left_matrix(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        cols = [self.vectorize(a @ e) for e in self.onb]
        return np.stack(cols, axis=1)

    def right_matrix(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        cols = [self.vectorize(e @ a) for e in self.onb]
        return np.stack(cols, axis=1)

    def left_algebra_basis(self):
        return [self.left_matrix(b) for b in self.algebra.basis]

    def subspace_projection(self, sub: MultiMatrixAlgebra) -> np.ndarray:
        """Orthogonal projection of the GNS space onto the closure of a subalgebra."""
        rows = np.stack([self.vectorize(b) for b in sub.basis])
        u, s, vh = np.linalg.svd(rows, full_matrices=False)
        rank = int(np.sum(s > 1e-10 * s[0]))
        vh = vh[:rank]
        return dagger(vh) @ vh

    def cyclic_vector(self, phi: State) -> np.ndarray:
        return self.vectorize(matrix_function(phi.rho, _SQRT, support_only=True))


@dataclass(eq=False)
class RelativeModularOperator:
    """Delta_{psi,phi} on the trace GNS space: x -> rho_psi x rho_phi^+."""

    form: StandardForm
    matrix: np.ndarray

    @classmethod
    def build(cls, phi: State, psi: State, form: StandardForm | None = None):
        _check_same_algebra(phi, psi)
        form = form or StandardForm(phi.algebra, phi.tau)
        inv_phi = matrix_function(phi.rho, _INV, support_only=True)
        mat = form.left_matrix(psi.rho) @ form.right_matrix(inv_phi)
        mat = check_hermitian(mat, tol=1e-9)
        return cls(form=form, matrix=mat)

    def apply_to_member(self, x):
        return self.form.unvectorize(self.matrix @ self.form.vectorize(x))

    def eigensystem(self):
        return herm_eig(self.matrix)


def rel_entropy_modular(phi: State, psi: State, form: StandardForm | None = None) -> float:
    """S(phi||psi) = -(xi_phi, log Delta xi_phi) via the spectral resolution.

    Independent of rel_entropy_closed: the value is assembled from the
    eigenpairs of the modular matrix, with vanishing spectral weight on the
    kernel required for finiteness.
    """
    delta = RelativeModularOperator.build(phi, psi, form)
    xi = delta.form.cyclic_vector(phi)
    es = delta.eigensystem()
    weights = np.abs(dagger(es.eigenvectors) @ xi) ** 2
    lam = es.eigenvalues
    lam_cut = 1e-13 * max(1.0, float(np.max(lam)) if lam.size else 0.0)
    w_cut = 1e-12 * max(1.0, float(np.sum(weights)))
    total = 0.0
    for l, w in zip(lam, weights):
        if l <= lam_cut:
            if w > w_cut:
                return POS_INF
            continue
        total -= w * math.log(l)
    return float(total)


# -- Kosaki variational formula ----------------------------------------------


@dataclass(frozen=True)
class KosakiGrid:
    """Step-function grid for the variational formula.

    breakpoints run from 1/n to the tail cut; the step function is
    optimized per slice and pinned to the identity on the tail, so the
    evaluation is an exact lower bound for the supremum.
    """

    breakpoints: np.ndarray

    @property
    def n(self) -> float:
        return 1.0 / float(self.breakpoints[0])

    @property
    def t_max(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def slices(self) -> int:
        return len(self.breakpoints) - 1

    @classmethod
    def default(cls, psi_mass: float = 1.0, n: float = 2.0 ** 20, slices: int = 400,
                t_max: float | None = None) -> "KosakiGrid":
        t_max = t_max if t_max is not None else 1e6 * max(1.0, float(psi_mass))
        return cls(breakpoints=np.geomspace(1.0 / n, t_max, slices + 1))

    def refined(self) -> "KosakiGrid":
        """Nest the old breakpoints: split every slice and push the left edge to 1/n^2."""
        b = self.breakpoints
        mids = np.sqrt(b[:-1] * b[1:])
        merged = np.sort(np.concatenate([b, mids]))
        density = 2.0 * self.slices / math.log(self.t_max * self.n)
        ext_slices = max(1, int(math.ceil(math.log(self.n) * density)))
        left = np.geomspace(1.0 / self.n ** 2, 1.0 / self.n, ext_slices + 1)
        return KosakiGrid(breakpoints=np.concatenate([left[:-1], merged]))


def kosaki_eval(phi: State, psi: State, subspace=None, grid: KosakiGrid | None = None) -> float:
    """Lower bound for S_V(phi||psi) from the variational formula.

    The functional phi(1) log n - integral of [phi(y* y) + t^{-1} psi(x x*)]
    dt/t is evaluated exactly at the step function that solves the convex
    quadratic slice problems over V, with x = 1 on the tail.  The value
    never exceeds the supremum and is nondecreasing under grid refinement
    (nested breakpoints), enlargement of V, and decrease of psi.
    """
    _check_same_algebra(phi, psi)
    span = list(subspace) if subspace is not None else list(phi.algebra.basis)
    basis = [np.asarray(v, dtype=complex) for v in span]
    dim = phi.algebra.dim
    eye = np.eye(dim, dtype=complex)

    # the tail step needs the identity in V
    rows = np.stack([v.ravel() for v in basis])
    u, s, vh = np.linalg.svd(rows, full_matrices=False)
    keep = s > 1e-10 * s[0]
    proj = dagger(vh[keep]) @ vh[keep]
    if frob(eye.ravel() - proj @ eye.ravel()) > 1e-9 * math.sqrt(dim):
        raise ValueError("kosaki_eval requires the identity to lie in the subspace")

    nb = len(basis)
    g = np.zeros((nb, nb), dtype=complex)
    h = np.zeros((nb, nb), dtype=complex)
    for i, vi in enumerate(basis):
        for j, vj in enumerate(basis):
            g[i, j] = phi(dagger(vi) @ vj)
            h[i, j] = psi(vj @ dagger(vi))
    g = 0.5 * (g + dagger(g))
    h = 0.5 * (h + dagger(h))
    f = np.array([phi(v) for v in basis])
    phi1 = float(np.real(phi(eye)))
    psi1 = float(np.real(psi(eye)))

    if grid is None:
        grid = KosakiGrid.default(psi_mass=psi1)
    b = grid.breakpoints
    a_w = np.log(b[1:] / b[:-1])
    b_w = 1.0 / b[:-1] - 1.0 / b[1:]

    reg = 1e-12 * max(1.0, float(np.real(np.trace(g))), float(np.real(np.trace(h))))
    total = phi1 * math.log(grid.n)
    for aw, bw in zip(a_w, b_w):
        q = aw * g + bw * h + reg * max(aw, bw) * np.eye(nb)
        c = np.linalg.solve(q, aw * np.conj(f))
        lin = np.dot(f, c)
        quad = float(np.real(np.conj(c) @ g @ c))
        quad_h = float(np.real(np.conj(c) @ h @ c))
        slice_val = aw * (phi1 - 2.0 * float(np.real(lin)) + quad) + bw * quad_h
        total -= slice_val
    total -= psi1 / grid.t_max
    return float(total)


# -- identities around conditional expectations -------------------------------


@dataclass(frozen=True)
class PetzDecomposition:
    """Both sides of the chain rule across a conditional expectation."""

    lhs: float
    restriction_term: float
    expectation_term: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.restriction_term - self.expectation_term)


def petz_decompose(phi: State, psi: State, inc) -> PetzDecomposition:
    """S(phi||psi o eps) = S(phi|_B||psi|_B) + S(phi||phi o eps) for eps onto B."""
    _check_same_algebra(phi, psi)
    a = phi.algebra
    psi_eps = State(a, phi.tau, inc.apply(psi.rho))
    phi_eps = State(a, phi.tau, inc.apply(phi.rho))
    lhs = rel_entropy_closed(phi, psi_eps)
    restriction = rel_entropy_closed(restrict(phi, inc.sub), restrict(psi, inc.sub))
    expectation = rel_entropy_closed(phi, phi_eps)
    return PetzDecomposition(lhs=lhs, restriction_term=restriction, expectation_term=expectation)


def reverse_entropy(tau: TraceWeight, phi: State) -> float:
    """S(tau||phi) = -tau(log rho_phi) for the tracial state of a normalized trace.

    +inf when phi is not faithful (the tracial state charges every corner).
    """
    if abs(tau.total - 1.0) > 1e-10:
        raise ValueError(f"reverse_entropy requires a normalized trace, got tau(1) = {tau.total}")
    if not phi.is_faithful:
        return POS_INF
    log_rho = matrix_function(phi.rho, _LOG)
    return float(-np.real(tau.value(log_rho)))


def bounded_entropy_approximation(phi: State, k: float) -> State:
    """Bounded approximant of the trace from below: density min(1, k rho_phi).

    The approximants increase to tau as k grows (equality once k exceeds
    1 over the least eigenvalue of rho), and S(phi||psi_k) decreases to
    S(phi||tau).
    """
    if not k > 0:
        raise ValueError("cutoff index k must be positive")
    rho_k = matrix_function(phi.rho, lambda s: min(1.0, k * s.real))
    return State(phi.algebra, phi.tau, rho_k)
