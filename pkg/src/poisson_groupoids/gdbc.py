"""Generalised double Bruhat cells as groupoids with compatible bivectors.

Elements are quadruples ([c], b, b_-, [c_-]) with c_ b = b_- c__ ; the
groupoid composes the Borel slots when the cell slots match.  The bivector
is assembled from the four-line mixed-product formula in the product chart
(cells x B x B_- x cells) and cross-checked against an independent quotient
pushforward; the factorization groupoid acts on both moment maps.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .charts import BorelChart, BorelMinusChart, Chart
from .cells import (
    BminusCellStratum,
    CellBorelStratum,
    CellTupleChart,
    act_b_on_tuple,
    act_tuple_on_bminus,
    cell_left_action_vector,
    cell_right_action_vector,
    cocycle_b_derivative,
    cocycle_bminus_derivative,
    factor_BminusUBminus,
    factor_BuB,
    pi_n_at,
    reduce_to_cells_left,
    reduce_to_cells_right,
)
from .double import BorelPair, GammaElement
from .errors import InvariantViolation, NotComposable
from .lie import dual_borel_bases, lie_basis
from .linalg import numeric_jacobian, solve_det_one
from .poisson import (
    Bivector,
    R_MATRIX_SCALE,
    ambient_to_chart,
    pi_st_chart,
    tangent_coords,
    wedge_sum,
)

INVARIANT_RTOL = 1e-10
COMPOSE_RTOL = 1e-9


@dataclass(frozen=True)
class GDBCElement:
    """Quadruple ([c], b, b_-, [c_-]) with c_ b = b_- c__."""

    c: Tuple[np.ndarray, ...]
    b: np.ndarray
    bm: np.ndarray
    cm: Tuple[np.ndarray, ...]

    def as_tuple(self):
        return (self.c, self.b, self.bm, self.cm)


class QuadChart(Chart):
    """Ambient product chart around the constraint manifold."""

    def __init__(self, chart_u: CellTupleChart, chart_v: CellTupleChart):
        n = chart_u.n
        self.cu = chart_u
        self.cv = chart_v
        self.cb = BorelChart(n)
        self.cbm = BorelMinusChart(n)
        self.dim = chart_u.dim + self.cb.dim + self.cbm.dim + chart_v.dim
        self.label = f"{chart_u.label}xBxB-x{chart_v.label}"
        self._splits = np.cumsum([chart_u.dim, self.cb.dim, self.cbm.dim])[:3]

    def coords(self, x) -> np.ndarray:
        c, b, bm, cm = x.as_tuple() if isinstance(x, GDBCElement) else x
        return np.concatenate(
            [self.cu.coords(c), self.cb.coords(b), self.cbm.coords(bm), self.cv.coords(cm)]
        )

    def point(self, z: np.ndarray):
        zc, zb, zbm, zcm = np.split(np.asarray(z, dtype=np.complex128), self._splits)
        return (self.cu.point(zc), self.cb.point(zb), self.cbm.point(zbm), self.cv.point(zcm))

    def embed(self, x) -> np.ndarray:
        c, b, bm, cm = x.as_tuple() if isinstance(x, GDBCElement) else x
        return np.concatenate(
            [self.cu.embed(c), b.reshape(-1), bm.reshape(-1), self.cv.embed(cm)]
        )

    def block_slices(self):
        d = [self.cu.dim, self.cb.dim, self.cbm.dim, self.cv.dim]
        edges = np.concatenate([[0], np.cumsum(d)])
        return [slice(int(edges[i]), int(edges[i + 1])) for i in range(4)]


class GdbcSpace:
    """All chart and basis data for one pair of cell sequences."""

    def __init__(self, n: int, words_u: Sequence[Sequence[int]], words_v: Sequence[Sequence[int]]):
        self.n = n
        self.chart_u = CellTupleChart(n, words_u)
        self.chart_v = CellTupleChart(n, words_v)
        self.pair = BorelPair(n)
        self.cb = BorelChart(n)
        self.cbm = BorelMinusChart(n)
        self.quad = QuadChart(self.chart_u, self.chart_v)
        self.db = dual_borel_bases(n)
        self.same_words = list(map(tuple, words_u)) == list(map(tuple, words_v))

    def element(self, c, b, bm, cm, validate: bool = True) -> GDBCElement:
        x = GDBCElement(tuple(c), b, bm, tuple(cm))
        if validate:
            self.validate(x)
        return x

    def residual(self, x: GDBCElement) -> float:
        lhs = self.chart_u.product(x.c) @ x.b
        rhs = x.bm @ self.chart_v.product(x.cm)
        return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1.0))

    def validate(self, x: GDBCElement, tol: float = INVARIANT_RTOL) -> GDBCElement:
        res = self.residual(x)
        if res > tol:
            raise InvariantViolation(f"cell quadruple constraint off by {res:.3e}")
        return x

    # -- groupoid structure (equal sequences) --------------------------------
    def source(self, x: GDBCElement):
        return x.c

    def target(self, x: GDBCElement):
        return x.cm

    def identity(self, c) -> GDBCElement:
        e = np.eye(self.n, dtype=np.complex128)
        return GDBCElement(tuple(c), e, e, tuple(c))

    def inverse(self, x: GDBCElement) -> GDBCElement:
        return GDBCElement(x.cm, np.linalg.inv(x.b), np.linalg.inv(x.bm), x.c)

    def cells_dist(self, c1, c2) -> float:
        z1 = np.concatenate([ci.reshape(-1) for ci in c1])
        z2 = np.concatenate([ci.reshape(-1) for ci in c2])
        return float(np.linalg.norm(z1 - z2) / max(np.linalg.norm(z1), 1.0))

    def mult(self, x1: GDBCElement, x2: GDBCElement, tol: float = COMPOSE_RTOL) -> GDBCElement:
        if self.cells_dist(x1.cm, x2.c) > tol:
            raise NotComposable("target cell of the left factor must match")
        return self.validate(
            GDBCElement(x1.c, x1.b @ x2.b, x1.bm @ x2.bm, x2.cm), tol=10 * tol
        )

    def mu_plus(self, x: GDBCElement) -> np.ndarray:
        return x.b

    def mu_minus(self, x: GDBCElement) -> np.ndarray:
        return x.bm

    # -- actions of the factorization groupoid -------------------------------
    def act_gammaB(self, x: GDBCElement, gamma: GammaElement, tol: float = COMPOSE_RTOL) -> GDBCElement:
        """Right action along mu_plus: composable when gamma.b = b."""
        if self.pair.edist(gamma.b, x.b) > tol:
            raise NotComposable("moment mismatch for the upper-Borel action")
        coc_u, c_new = act_tuple_on_bminus(x.c, gamma.u_prime, self.chart_u)
        coc_v, cm_new = act_tuple_on_bminus(x.cm, gamma.u, self.chart_v)
        bm_new = np.linalg.inv(coc_u) @ x.bm @ coc_v
        return self.validate(GDBCElement(c_new, gamma.b_prime, bm_new, cm_new), tol=10 * tol)

    def act_gammaBminus(self, x: GDBCElement, gamma: GammaElement, tol: float = COMPOSE_RTOL) -> GDBCElement:
        """Right action along mu_minus: composable when gamma.u = b_-."""
        if self.pair.edist(gamma.u, x.bm) > tol:
            raise NotComposable("moment mismatch for the lower-Borel action")
        c_new, coc_u = act_b_on_tuple(gamma.b, x.c, self.chart_u)
        cm_new, coc_v = act_b_on_tuple(gamma.b_prime, x.cm, self.chart_v)
        b_new = coc_u @ x.b @ np.linalg.inv(coc_v)
        return self.validate(GDBCElement(c_new, b_new, gamma.u_prime, cm_new), tol=10 * tol)

    # -- sampling -------------------------------------------------------------
    def _upper_basis(self):
        n = self.n
        return [
            (i, j) for i in range(n) for j in range(i, n)
        ]

    def borel_solution_space(self, c, cm) -> np.ndarray:
        """Basis of upper-triangular b with c_ b c__^{-1} lower triangular."""
        n = self.n
        cb_ = self.chart_u.product(c)
        cmb = self.chart_v.product(cm)
        cmb_inv = np.linalg.inv(cmb)
        rows = []
        upper = self._upper_basis()
        for (i, j) in upper:
            e = np.zeros((n, n), dtype=np.complex128)
            e[i, j] = 1.0
            m = cb_ @ e @ cmb_inv
            rows.append(m[np.triu_indices(n, 1)])
        a = np.array(rows).T  # strict-upper conditions by upper-entry unknowns
        return scipy.linalg.null_space(a)

    def _b_from_upper_vec(self, v: np.ndarray) -> np.ndarray:
        n = self.n
        b = np.zeros((n, n), dtype=np.complex128)
        for k, (i, j) in enumerate(self._upper_basis()):
            b[i, j] = v[k]
        return b

    def _upper_vec_from_b(self, b: np.ndarray) -> np.ndarray:
        return np.array([b[i, j] for (i, j) in self._upper_basis()])

    def solve_element(self, c, cm, seed_vec: np.ndarray) -> GDBCElement:
        """Project a seed onto the solution space and close up the quadruple."""
        ns = self.borel_solution_space(c, cm)
        v = ns @ (ns.conj().T @ seed_vec)
        b = solve_det_one(self._b_from_upper_vec(v))
        bm = self.chart_u.product(c) @ b @ np.linalg.inv(self.chart_v.product(cm))
        bm = np.tril(bm)
        return self.validate(GDBCElement(tuple(c), b, bm, tuple(cm)))

    def u_prime_of(self, gamma: GammaElement):
        return gamma.u_prime

    def sample(self, rng: np.random.Generator, scale: float = 0.45,
               c: Optional[tuple] = None, cm: Optional[tuple] = None) -> GDBCElement:
        """Random element: random cells, random point of the Borel fiber."""
        for _ in range(100):
            try:
                cc = c if c is not None else self.chart_u.point(
                    rng.normal(size=self.chart_u.dim) * scale
                    + 1j * rng.normal(size=self.chart_u.dim) * scale
                )
                ccm = cm if cm is not None else self.chart_v.point(
                    rng.normal(size=self.chart_v.dim) * scale
                    + 1j * rng.normal(size=self.chart_v.dim) * scale
                )
                nb = len(self._upper_basis())
                seed = rng.normal(size=nb) * scale + 1j * rng.normal(size=nb) * scale
                seed[: self.n] += 1.0  # bias towards nonsingular diagonals
                x = self.solve_element(cc, ccm, seed)
                if abs(np.linalg.det(x.b)) < 1e-6 or np.any(np.abs(np.diag(x.b)) < 1e-3):
                    continue
                return x
            except (InvariantViolation, np.linalg.LinAlgError):
                continue
        raise InvariantViolation("sampler failed to find a regular point")


def _quad_blocks(space: GdbcSpace):
    return space.quad.block_slices()


# ---------------------------------------------------------------------------
# the four-line bivector


def pi_uv_at(space: GdbcSpace, x: GDBCElement, step: float = 1e-6) -> Bivector:
    """Mixed-product bivector in the (cells, B, B_-, cells) product chart.

    Line 1 is the block diagonal (pi_n, pi_st, pi_st, -pi_n); the four wedge
    lines couple cell actions, Borel translations, and infinitesimal
    cocycles.  Signs are those of the four-line assembly calibrated against
    the independent quotient pushforward (`pi_uv_independent`).
    """
    quad = space.quad
    db = space.db
    c, b, bm, cm = x.as_tuple()
    dims = quad.block_slices()
    dim = quad.dim
    coeffs = np.zeros((dim, dim), dtype=np.complex128)
    coeffs[dims[0], dims[0]] = pi_n_at(space.chart_u, c, step).coeffs
    coeffs[dims[1], dims[1]] = pi_st_chart(space.cb, b).coeffs
    coeffs[dims[2], dims[2]] = pi_st_chart(space.cbm, bm).coeffs
    coeffs[dims[3], dims[3]] = -pi_n_at(space.chart_v, cm, step).coeffs

    rho_u = [cell_right_action_vector(space.chart_u, c, xi, step) for xi in db.xi_basis]
    lam_v = [cell_left_action_vector(space.chart_v, cm, xx, step) for xx in db.x_basis]
    lam_u = [cell_left_action_vector(space.chart_u, c, xx, step) for xx in db.x_basis]
    rho_v = [cell_right_action_vector(space.chart_v, cm, xi, step) for xi in db.xi_basis]
    x_r = tangent_coords(space.cb, b, [xx @ b for xx in db.x_basis])
    x_l = tangent_coords(space.cb, b, [b @ xx for xx in db.x_basis])
    xi_r = tangent_coords(space.cbm, bm, [xi @ bm for xi in db.xi_basis])
    xi_l = tangent_coords(space.cbm, bm, [bm @ xi for xi in db.xi_basis])
    coc_b = [cocycle_b_derivative(space.chart_u, c, xx, step) for xx in db.x_basis]
    coc_b_r = tangent_coords(space.cb, b, [d @ b for d in coc_b])
    coc_bm = [cocycle_bminus_derivative(space.chart_v, cm, xi, step) for xi in db.xi_basis]
    coc_bm_l = tangent_coords(space.cbm, bm, [bm @ d for d in coc_bm])

    def embed_vec(block: int, v: np.ndarray) -> np.ndarray:
        out = np.zeros(dim, dtype=np.complex128)
        out[dims[block]] = v
        return out

    pairs = []
    for i in range(db.dim):
        # line 2: rho_u against right-invariant fields on B
        pairs.append((embed_vec(0, rho_u[i]), embed_vec(1, x_r[i])))
        # line 3: left-invariant fields on B_- against lam_v, opposite sign
        pairs.append((-embed_vec(2, xi_l[i]), embed_vec(3, lam_v[i])))
        # line 4: (lam_u, cocycle^R) against right-invariant fields on B_-
        pairs.append((embed_vec(0, lam_u[i]) + embed_vec(1, coc_b_r[i]), embed_vec(2, xi_r[i])))
        # line 5: left-invariant fields on B against (cocycle^L, rho_v), opposite
        pairs.append((-embed_vec(1, x_l[i]), embed_vec(2, coc_bm_l[i]) + embed_vec(3, rho_v[i])))
    coeffs += wedge_sum(pairs)
    return Bivector(quad.label, coeffs)


# ---------------------------------------------------------------------------
# independent construction through the doubled quotient


@lru_cache(maxsize=None)
def _gg_r_matrix(n: int):
    """Wedge pairs of the r-matrix for the diagonal splitting of g + g."""
    lb = lie_basis(n)
    pairs = []
    for ep, em in zip(lb.pos_root_vectors, lb.neg_root_vectors):
        pairs.append(((ep, ep), (np.zeros_like(ep), -em)))
        pairs.append(((em, em), (ep, np.zeros_like(ep))))
    for h in lb.cartan_basis:
        k = np.sqrt(2.0) * h
        pairs.append(((k, k), (k / 2.0, -k / 2.0)))
    return pairs


def pi_gg_ambient(n: int, g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """The doubled standard structure at (g, h), frame of stacked entries."""
    pairs = []
    for (a1, a2), (b1, b2) in _gg_r_matrix(n):
        pairs.append(
            (
                np.concatenate([(g @ a1).reshape(-1), (h @ a2).reshape(-1)]),
                np.concatenate([(g @ b1).reshape(-1), (h @ b2).reshape(-1)]),
            )
        )
        pairs.append(
            (
                -np.concatenate([(a1 @ g).reshape(-1), (a2 @ h).reshape(-1)]),
                np.concatenate([(b1 @ g).reshape(-1), (b2 @ h).reshape(-1)]),
            )
        )
    return R_MATRIX_SCALE * wedge_sum(pairs)


class _DoubledStratum(Chart):
    """Stratum chart of products of (B u_i B) x (B_- v_i B_-) pairs."""

    def __init__(self, space: GdbcSpace):
        self.space = space
        self.n = space.n
        fu, fv = space.chart_u.factors, space.chart_v.factors
        self.dim = sum(f.dim for f in fu) + sum(f.dim for f in fv) + len(fu) * (
            space.cb.dim + space.cbm.dim
        )
        self.label = "FF" + space.quad.label

    def coords(self, pts) -> np.ndarray:
        out = []
        for (gi, hi), fu, fv in zip(pts, self.space.chart_u.factors, self.space.chart_v.factors):
            ci, bi = factor_BuB(gi, fu)
            bmi, cmi = factor_BminusUBminus(hi, fv)
            out.extend([fu.coords(ci), self.space.cb.coords(bi),
                        self.space.cbm.coords(bmi), fv.coords(cmi)])
        return np.concatenate(out)

    def point(self, z: np.ndarray):
        out = []
        lo = 0
        for fu, fv in zip(self.space.chart_u.factors, self.space.chart_v.factors):
            t = z[lo: lo + fu.dim]; lo += fu.dim
            beta = z[lo: lo + self.space.cb.dim]; lo += self.space.cb.dim
            bem = z[lo: lo + self.space.cbm.dim]; lo += self.space.cbm.dim
            tm = z[lo: lo + fv.dim]; lo += fv.dim
            out.append((fu.point(t) @ self.space.cb.point(beta),
                        self.space.cbm.point(bem) @ fv.point(tm)))
        return tuple(out)

    def embed(self, pts) -> np.ndarray:
        return np.concatenate(
            [np.concatenate([gi.reshape(-1), hi.reshape(-1)]) for (gi, hi) in pts]
        )


def pi_uv_independent(space: GdbcSpace, x: GDBCElement, step: float = 1e-6) -> Bivector:
    """Quotient-pushforward oracle for the four-line bivector.

    Pushes the doubled standard structure from the doubled stratum through
    the two junction sweeps into the product chart; shares no code path with
    `pi_uv_at`'s assembly.
    """
    c, b, bm, cm = x.as_tuple()
    k = len(space.chart_u.factors)
    gs = list(c[:-1]) + [c[-1] @ b]
    hs = [bm @ cm[0]] + list(cm[1:])
    pts = tuple(zip(gs, hs))
    stratum = _DoubledStratum(space)

    amb_dim = 2 * k * space.n * space.n
    amb = np.zeros((amb_dim, amb_dim), dtype=np.complex128)
    for i, (gi, hi) in enumerate(pts):
        sl = slice(i * 2 * space.n**2, (i + 1) * 2 * space.n**2)
        amb[sl, sl] = pi_gg_ambient(space.n, gi, hi)
    strat_pi = ambient_to_chart(stratum, pts, amb).coeffs

    def sweep(ptuple):
        gs_ = [g for (g, _) in ptuple]
        hs_ = [h for (_, h) in ptuple]
        cs, bee = reduce_to_cells_left(gs_, space.chart_u)
        bem, cms = reduce_to_cells_right(hs_, space.chart_v)
        return np.concatenate(
            [space.chart_u.coords(cs), space.cb.coords(bee),
             space.cbm.coords(bem), space.chart_v.coords(cms)]
        )

    z0 = stratum.coords(pts)
    j = numeric_jacobian(lambda z: sweep(stratum.point(z)), z0, step)
    return Bivector(space.quad.label, j @ strat_pi @ j.T)


# ---------------------------------------------------------------------------
# dirac conditions for the two groupoid actions


def _act_B_unvalidated(space: GdbcSpace, pt, gamma: GammaElement):
    """Formula of the upper action on an ambient quadruple (no constraint)."""
    c, b, bm, cm = pt
    coc_u, c_new = act_tuple_on_bminus(c, gamma.u_prime, space.chart_u)
    coc_v, cm_new = act_tuple_on_bminus(cm, gamma.u, space.chart_v)
    bm_new = np.linalg.inv(coc_u) @ bm @ coc_v
    return (c_new, gamma.b_prime, bm_new, cm_new)


def _act_Bm_unvalidated(space: GdbcSpace, pt, gamma: GammaElement):
    c, b, bm, cm = pt
    c_new, coc_u = act_b_on_tuple(gamma.b, c, space.chart_u)
    cm_new, coc_v = act_b_on_tuple(gamma.b_prime, cm, space.chart_v)
    b_new = coc_u @ b @ np.linalg.inv(coc_v)
    return (c_new, b_new, gamma.u_prime, cm_new)


def dressing_vector_B(space: GdbcSpace, x: GDBCElement, xi: np.ndarray,
                      pi: Optional[Bivector] = None, step: float = 1e-6) -> np.ndarray:
    """sharp of the mu_plus pullback of the left-invariant form of xi."""
    from .poisson import dressing_field

    if pi is None:
        pi = pi_uv_at(space, x, step)
    return dressing_field(lambda pt: pt[1], space.quad, x.as_tuple(), pi, xi,
                          side="left_b", step=step)


def dressing_vector_Bm(space: GdbcSpace, x: GDBCElement, xx: np.ndarray,
                       pi: Optional[Bivector] = None, step: float = 1e-6) -> np.ndarray:
    """sharp of the mu_minus pullback of the right-invariant form of x."""
    from .poisson import dressing_field

    if pi is None:
        pi = pi_uv_at(space, x, step)
    return dressing_field(lambda pt: pt[2], space.quad, x.as_tuple(), pi, xx,
                          side="right_bminus", step=step)


def dirac1_residual(space: GdbcSpace, x: GDBCElement, direction: str,
                    step: float = 1e-6) -> float:
    """Largest defect of the moment dressing field against the action curve."""
    from .linalg import expm_tri

    quad = space.quad
    pi = pi_uv_at(space, x, step)
    worst = 0.0
    if direction == "B":
        for xi in space.db.xi_basis:
            def curve(t):
                gam = space.pair.gamma_lower(x.b, expm_tri(t * xi))
                return quad.coords(space.act_gammaB(x, gam))
            d = (curve(step) - curve(-step)) / (2.0 * step)
            v = dressing_vector_B(space, x, xi, pi, step)
            worst = max(worst, float(np.linalg.norm(d - v)))
    elif direction == "Bm":
        for xx in space.db.x_basis:
            def curve(t):
                gam = space.pair.gamma_lower(expm_tri(t * xx), x.bm)
                return quad.coords(space.act_gammaBminus(x, gam))
            d = (curve(step) - curve(-step)) / (2.0 * step)
            v = dressing_vector_Bm(space, x, xx, pi, step)
            worst = max(worst, float(np.linalg.norm(d - v)))
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return worst


def dirac2_residual(space: GdbcSpace, x: GDBCElement, gamma: GammaElement,
                    direction: str, step: float = 1e-6) -> float:
    """Defect of the bisection identity for the bivector along the action.

    pi(x <| gamma) = L_x(fiber term) + R_{S_gamma} pi(x), where the fiber
    term is the translated base structure on the appropriate Borel slot
    (the two point evaluations of the groupoid bivector collapse to it).
    """
    quad = space.quad
    pair = space.pair
    lhs = pi_uv_at(space, space.act_gammaB(x, gamma) if direction == "B"
                   else space.act_gammaBminus(x, gamma), step).coeffs
    if direction == "B":
        uref = np.diag(np.diag(gamma.u_prime))

        def fiber_map(z):
            u = space.cbm.point(z)
            gam = pair.gamma_lower(x.b, u, ref=uref)
            return quad.coords(space.act_gammaB(x, gam))

        j1 = numeric_jacobian(fiber_map, space.cbm.coords(gamma.u), step)
        term1 = j1 @ pi_st_chart(space.cbm, gamma.u).coeffs @ j1.T

        def rs_map(z):
            pt = quad.point(z)
            h = pt[1] @ np.linalg.inv(gamma.b)
            el = pair.bisection_S(gamma, h, ref=uref)
            return quad.coords(_act_B_unvalidated(space, pt, el))

        j2 = numeric_jacobian(rs_map, quad.coords(x), step)
        term2 = j2 @ pi_uv_at(space, x, step).coeffs @ j2.T
    elif direction == "Bm":
        uref = np.diag(np.diag(gamma.u_prime))

        def fiber_map(z):
            g = space.cb.point(z)
            gam = pair.gamma_lower(g, x.bm, ref=uref)
            return quad.coords(space.act_gammaBminus(x, gam))

        j1 = numeric_jacobian(fiber_map, space.cb.coords(gamma.b), step)
        term1 = j1 @ pi_st_chart(space.cb, gamma.b).coeffs @ j1.T

        def rs_map(z):
            pt = quad.point(z)
            k = np.linalg.inv(gamma.u) @ pt[2]
            tail = pair.gamma_lower(gamma.b_prime, k)
            el = pair.g_mult(gamma, tail, tol=np.inf)
            return quad.coords(_act_Bm_unvalidated(space, pt, el))

        j2 = numeric_jacobian(rs_map, quad.coords(x), step)
        term2 = j2 @ pi_uv_at(space, x, step).coeffs @ j2.T
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return float(np.linalg.norm(lhs - term1 - term2))


def dirac_residuals(space: GdbcSpace, x: GDBCElement, direction: str,
                    rng: np.random.Generator, scale: float = 0.3,
                    step: float = 1e-6) -> Tuple[float, float]:
    """Both dirac residuals at x, with a random composable groupoid element."""
    from .linalg import expm_tri

    r1 = dirac1_residual(space, x, direction, step)
    db = space.db
    if direction == "B":
        xi = sum(float(a) * v for a, v in zip(rng.normal(size=db.dim) * scale, db.xi_basis))
        gamma = space.pair.gamma_lower(x.b, expm_tri(xi))
    else:
        xx = sum(float(a) * v for a, v in zip(rng.normal(size=db.dim) * scale, db.x_basis))
        gamma = space.pair.gamma_lower(expm_tri(xx), x.bm)
    r2 = dirac2_residual(space, x, gamma, direction, step)
    return r1, r2


# ---------------------------------------------------------------------------
# local parametrizations and multiplication graphs


class GdbcLocalParam:
    """Smooth local parametrization of the constraint manifold near a base
    element: cell coordinates on both sides plus fiber coordinates obtained
    by projecting a fixed seed frame onto the varying Borel solution space.
    """

    def __init__(self, space: GdbcSpace, base: GDBCElement):
        self.space = space
        self.base = base
        ns = space.borel_solution_space(base.c, base.cm)
        v0 = space._upper_vec_from_b(base.b)
        stack = np.column_stack([v0, ns])
        q, _ = np.linalg.qr(stack)
        self.w0 = v0
        self.wk = q[:, 1 : ns.shape[1]]
        self.fiber_dim = self.wk.shape[1]
        self.dim = space.chart_u.dim + self.fiber_dim + space.chart_v.dim

    def coords0(self) -> np.ndarray:
        return np.concatenate(
            [
                self.space.chart_u.coords(self.base.c),
                np.zeros(self.fiber_dim, dtype=np.complex128),
                self.space.chart_v.coords(self.base.cm),
            ]
        )

    def point(self, z: np.ndarray, c_override=None) -> GDBCElement:
        lu = self.space.chart_u.dim
        r = self.fiber_dim
        t, s, tm = z[:lu], z[lu : lu + r], z[lu + r :]
        c = c_override if c_override is not None else self.space.chart_u.point(t)
        cm = self.space.chart_v.point(tm)
        seed = self.w0 + (self.wk @ s if r else 0.0)
        return self.space.solve_element(c, cm, seed)


def mult_graph_param(space: GdbcSpace, x1: GDBCElement, x2: GDBCElement):
    """Parametrization of the multiplication graph near a composable pair.

    Returns (param, z0): param maps local coordinates to the stacked quad
    coordinates of (x1, x2, x1 x2); the x2 block reuses the cell of x1's
    target, which keeps the pair composable identically in the parameters.
    """
    p1 = GdbcLocalParam(space, x1)
    p2 = GdbcLocalParam(space, x2)
    lu, lv = space.chart_u.dim, space.chart_v.dim
    d1 = p1.dim
    d2 = p2.fiber_dim + lv

    def param(z: np.ndarray) -> np.ndarray:
        z1 = z[:d1]
        s2 = z[d1 : d1 + p2.fiber_dim]
        tm2 = z[d1 + p2.fiber_dim :]
        a = p1.point(z1)
        b = p2.point(
            np.concatenate([np.zeros(lu, dtype=np.complex128), s2, tm2]),
            c_override=a.cm,
        )
        c = space.mult(a, b)
        return np.concatenate(
            [space.quad.coords(a), space.quad.coords(b), space.quad.coords(c)]
        )

    z0 = np.concatenate([p1.coords0(), np.zeros(p2.fiber_dim, dtype=np.complex128),
                         space.chart_v.coords(x2.cm)])
    return param, z0, d1 + d2


def sample_composable_pair(space: GdbcSpace, rng: np.random.Generator,
                           scale: float = 0.45) -> Tuple[GDBCElement, GDBCElement]:
    x1 = space.sample(rng, scale)
    x2 = space.sample(rng, scale, c=x1.cm)
    return x1, x2
