"""States and positive functionals on multi-matrix algebras.

A functional phi is stored through its density rho with respect to a trace
weight tau: phi(x) = tau(rho x).  States have mass tau(rho) = 1; general
positive functionals carry any positive mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import MultiMatrixAlgebra, TraceWeight, tensor_algebra
from .linalg import dagger, frob, herm_eig, matrix_function

NEG_INF = float("-inf")
POS_INF = float("inf")

_XLOGX = lambda x: x * math.log(x.real) if x.real > 0 else 0.0


@dataclass(eq=False)
class State:
    """Positive functional phi(x) = tau(rho x) on a multi-matrix algebra."""

    algebra: MultiMatrixAlgebra
    tau: TraceWeight
    rho: np.ndarray
    mass: float = field(default=None)

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        self.algebra.require_member(self.rho, "density")
        w = herm_eig(self.rho, tol=1e-10).eigenvalues
        scale = max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
        if w.size and float(w[0]) < -1e-10 * scale:
            raise ValueError(f"density has negative eigenvalue {float(w[0]):.3e}")
        mass = float(np.real(self.tau.value(self.rho)))
        if self.mass is None:
            self.mass = mass
        elif abs(mass - self.mass) > 1e-10 * max(1.0, abs(self.mass)):
            raise ValueError(f"declared mass {self.mass} but tau(rho) = {mass}")

    def __call__(self, x) -> complex:
        return self.tau.value(self.rho @ np.asarray(x, dtype=complex))

    @property
    def is_state(self) -> bool:
        return abs(self.mass - 1.0) <= 1e-10

    def min_eigenvalue(self) -> float:
        return float(herm_eig(self.rho).eigenvalues[0])

    @property
    def is_faithful(self) -> bool:
        return self.min_eigenvalue() > 1e-12 * max(1.0, frob(self.rho))

    def scaled(self, c: float) -> "State":
        if not c > 0:
            raise ValueError("scaling of a positive functional must be positive")
        return State(self.algebra, self.tau, c * self.rho)

    def with_trace(self, new_tau: TraceWeight) -> "State":
        """Same functional re-expressed against another trace weight."""
        if new_tau.algebra is not self.algebra and not new_tau.algebra.same_span(self.algebra):
            raise ValueError("trace weight belongs to a different algebra")
        comps = self.algebra.block_components(self.rho)
        ratios = [w_old / w_new for w_old, w_new in zip(self.tau.weights, new_tau.weights)]
        return State(new_tau.algebra, new_tau,
                     new_tau.algebra.embed([r * c for r, c in zip(ratios, comps)]))


def state_from_density(algebra: MultiMatrixAlgebra, tau: TraceWeight, rho,
                       expect_mass: float | None = None) -> State:
    return State(algebra, tau, rho, mass=expect_mass)


def maximally_mixed(algebra: MultiMatrixAlgebra, tau: TraceWeight) -> State:
    """The tracial state tau / tau(1)."""
    return State(algebra, tau, algebra.identity() / tau.total)


def pure_state(algebra: MultiMatrixAlgebra, tau: TraceWeight, vector) -> State:
    """Vector state on a full matrix algebra (single block, multiplicity one)."""
    if algebra.blocks != ((algebra.dim, 1),):
        raise ValueError("pure_state requires a full matrix algebra acting on its own space")
    v = np.asarray(vector, dtype=complex).reshape(-1, 1)
    p = v @ dagger(v)
    return State(algebra, tau, p / float(np.real(tau.value(p))))


# -- entropies ---------------------------------------------------------------


def s_tau(phi: State, require_faithful: bool = False) -> float:
    """Entropy relative to the trace: -tau(rho log rho), 0 log 0 = 0.

    With require_faithful=True a support-deficient density yields the
    distinguished -inf marker instead of the finite spectral sum.
    """
    if require_faithful and not phi.is_faithful:
        return NEG_INF
    xlx = matrix_function(phi.rho, _XLOGX, support_only=True)
    val = -np.real(phi.tau.value(xlx))
    return float(val)


def s_vn(phi: State) -> float:
    """Von Neumann entropy of phi on the abstract block algebra (+)_k M_{n_k}.

    The density against the block trace (1 on minimal projections,
    multiplicities quotiented out) is sigma_k = w_k rho_k; the entropy is
    -sum_k Tr(sigma_k log sigma_k). On a full matrix algebra this is the
    usual -Tr(sigma log sigma).
    """
    if not phi.is_state:
        raise ValueError(f"s_vn requires a normalized state, got mass {phi.mass}")
    total = 0.0
    for w, c in zip(phi.tau.weights, phi.algebra.block_components(phi.rho)):
        xlx = matrix_function(w * c, _XLOGX, support_only=True)
        total -= float(np.real(np.trace(xlx)))
    return total


def rescale_trace(phi: State, lam: float) -> State:
    """Re-express phi against lam * tau; the density becomes rho / lam."""
    return State(phi.algebra, phi.tau.scaled(lam), phi.rho / lam)


def tensor_state(phi: State, psi: State,
                 product_algebra: MultiMatrixAlgebra | None = None) -> State:
    """Product functional phi (x) psi on the tensor product algebra."""
    alg = product_algebra if product_algebra is not None \
        else tensor_algebra(phi.algebra, psi.algebra)
    weights = tuple(wa * wb for wa in phi.tau.weights for wb in psi.tau.weights)
    tau = TraceWeight(alg, weights)
    return State(alg, tau, np.kron(phi.rho, psi.rho))


def restrict(phi: State, sub: MultiMatrixAlgebra) -> State:
    """Restriction phi|_B as a state on the subalgebra with the restricted trace.

    The density is the unique member of B representing phi against tau|_B;
    this is the image of rho under the trace-preserving conditional
    expectation onto B.
    """
    tau_b = phi.tau.restricted_to(sub)
    rho_b = tau_b.functional_density(phi)
    rho_b = 0.5 * (rho_b + dagger(rho_b))
    return State(sub, tau_b, rho_b)
