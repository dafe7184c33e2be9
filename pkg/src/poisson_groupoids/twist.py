"""The local-groupoid twist of a product of groupoids along the diagonal
Lagrangian bisection, its instances, and the concatenation of cell pairs.

Given two groupoid objects with moment morphisms into the two legs of a
dual pair and compatible twisted-multiplicative actions of the
factorization groupoid, the product carries a local groupoid structure
whose multiplication inserts a re-factorization element between the two
halves; the cotangent-line instance reproduces closed-form structure maps,
and the cell instance composes through the concatenation map.
"""

from dataclasses import dataclass
from typing import Any, Callable, Tuple

import numpy as np

from .cells import CellTupleChart, act_b_on_tuple, act_tuple_on_bminus
from .double import DualPairBase, GammaElement
from .errors import NotComposable
from .gdbc import GDBCElement, GdbcSpace

COMPOSE_RTOL = 1e-9


@dataclass
class GroupoidOps:
    """Structure maps of a groupoid object together with its moment data."""

    source: Callable
    target: Callable
    identity: Callable
    inverse: Callable
    mult: Callable
    moment: Callable
    act: Callable  # right action of the factorization groupoid on the moment
    base_dist: Callable
    # dressing actions on the base induced by identity-bisection actions
    base_dress: Callable  # Y side: (y, u) -> y^u ; Z side: (g, z) -> g[z]


@dataclass
class TwistContext:
    """Everything the generic twist needs: the pair and the two objects."""

    pair: DualPairBase
    Y: GroupoidOps
    Z: GroupoidOps


def twist_source(ctx: TwistContext, p) -> Tuple[Any, Any]:
    y, z = p
    return (ctx.Y.source(y), ctx.Z.base_dress(ctx.Y.moment(y), ctx.Z.source(z)))


def twist_target(ctx: TwistContext, p) -> Tuple[Any, Any]:
    y, z = p
    return (ctx.Y.base_dress(ctx.Y.target(y), ctx.Z.moment(z)), ctx.Z.target(z))


def twist_identity(ctx: TwistContext, base: Tuple[Any, Any]):
    return (ctx.Y.identity(base[0]), ctx.Z.identity(base[1]))


def twist_inverse(ctx: TwistContext, p):
    y, z = p
    gamma = ctx.pair.gamma_lower(ctx.Y.moment(y), ctx.Z.moment(z))
    return (ctx.Y.inverse(ctx.Y.act(y, gamma)), ctx.Z.inverse(ctx.Z.act(z, gamma)))


def twist_composable(ctx: TwistContext, p1, p2, tol: float = COMPOSE_RTOL) -> bool:
    s = twist_source(ctx, p2)
    t = twist_target(ctx, p1)
    return ctx.Y.base_dist(t[0], s[0]) <= tol and ctx.Z.base_dist(t[1], s[1]) <= tol


def twist_mult(ctx: TwistContext, p1, p2, tol: float = COMPOSE_RTOL):
    """(y1 (gamma |> y2), (gamma |> z1) z2) with gamma refactorizing the
    inner pair of moments."""
    y1, z1 = p1
    y2, z2 = p2
    if not twist_composable(ctx, p1, p2, tol):
        raise NotComposable("twisted target/source mismatch")
    gamma = ctx.pair.gamma_upper(ctx.Z.moment(z1), ctx.Y.moment(y2))
    y2_t = ctx.Y.act(y2, ctx.pair.g_inverse(gamma))
    z1_t = ctx.Z.act(z1, ctx.pair.star_inverse(gamma))
    return (ctx.Y.mult(y1, y2_t), ctx.Z.mult(z1_t, z2))


def R_L(ctx: TwistContext, z, y):
    """The Lagrangian-bisection exchange map on a (Z, Y) pair."""
    gamma = ctx.pair.gamma_lower(ctx.Y.moment(y), ctx.Z.moment(z))
    return (ctx.Z.act(z, gamma), ctx.Y.act(y, gamma))


def R_L_inverse(ctx: TwistContext, z, y):
    gamma = ctx.pair.gamma_upper(ctx.Z.moment(z), ctx.Y.moment(y))
    return (ctx.Z.act(z, ctx.pair.star_inverse(gamma)), ctx.Y.act(y, ctx.pair.g_inverse(gamma)))


# ---------------------------------------------------------------------------
# the cotangent-line instance on the trivial dual pair


class TrivialPair(DualPairBase):
    """The pair (C^*, C^*) with vanishing structures and trivial dressing."""

    def emult(self, a, b):
        return a * b

    def einv(self, a):
        return 1.0 / a

    def edist(self, a, b) -> float:
        return abs(a - b) / max(abs(a), 1.0)

    @property
    def unit(self):
        return 1.0 + 0.0j

    def dress(self, b, u, ref=None):
        return u, b

    def dress_inverse(self, u_prime, b_prime, ref=None):
        return b_prime, u_prime

    def gamma_residual(self, gamma: GammaElement) -> float:
        return max(
            abs(gamma.b - gamma.b_prime), abs(gamma.u - gamma.u_prime)
        ) / max(abs(gamma.b), 1.0)


def tstar_line_ops() -> GroupoidOps:
    """The cotangent line of the complex line as a bundle of groups over it.

    Elements (p, q); source = target = q, fiberwise addition in p, moment
    e^{pq} into the trivial pair, action by the reciprocal scaling.
    """

    def act(y, gamma: GammaElement):
        p, q = y
        if abs(np.exp(p * q) - gamma.b) > COMPOSE_RTOL * max(abs(gamma.b), 1.0):
            raise NotComposable("moment mismatch in the line action")
        z = gamma.u
        return (p / z, z * q)

    return GroupoidOps(
        source=lambda y: y[1],
        target=lambda y: y[1],
        identity=lambda q: (0.0 + 0.0j, q),
        inverse=lambda y: (-y[0], y[1]),
        mult=_line_mult,
        moment=lambda y: np.exp(y[0] * y[1]),
        act=act,
        base_dist=lambda a, b: abs(a - b) / max(abs(a), 1.0),
        base_dress=lambda g, q: g * q,
    )


def _line_mult(y1, y2, tol: float = COMPOSE_RTOL):
    if abs(y1[1] - y2[1]) > tol * max(abs(y1[1]), 1.0):
        raise NotComposable("line elements compose over one base point")
    return (y1[0] + y2[0], y1[1])


def tstar_line_ops_dual() -> GroupoidOps:
    """Same bundle, acting along the dual leg of the trivial pair."""

    def act(z, gamma: GammaElement):
        p, q = z
        if abs(np.exp(p * q) - gamma.u) > COMPOSE_RTOL * max(abs(gamma.u), 1.0):
            raise NotComposable("moment mismatch in the dual line action")
        g = gamma.b
        return (p / g, g * q)

    ops = tstar_line_ops()
    ops.act = act
    return ops


def tstar_context() -> TwistContext:
    return TwistContext(TrivialPair(), tstar_line_ops(), tstar_line_ops_dual())


def tstar_structure_maps_closed_form():
    """Closed forms of the five twisted structure maps on the double line.

    theta, tau, epsilon, multiplication as displayed; the inverse is the
    four-component map forced by the groupoid axioms.
    """

    def theta(p1, p2, q1, q2):
        return (q1, np.exp(p1 * q1) * q2)

    def tau(p1, p2, q1, q2):
        return (np.exp(p2 * q2) * q1, q2)

    def eps(q1, q2):
        return (0.0 + 0.0j, 0.0 + 0.0j, q1, q2)

    def inv(p1, p2, q1, q2):
        return (
            -np.exp(-p2 * q2) * p1,
            -np.exp(-p1 * q1) * p2,
            np.exp(p2 * q2) * q1,
            np.exp(p1 * q1) * q2,
        )

    def mult(a, b):
        p1, p2, q1, q2 = a
        p1b, p2b, q1b, q2b = b
        return (p1 + np.exp(p2 * q2) * p1b, p2b + np.exp(p1b * q1b) * p2, q1, q2b)

    return theta, tau, eps, inv, mult


# ---------------------------------------------------------------------------
# the cell instance: context, concatenation, torus equivalence


def gdbc_context(space: GdbcSpace, space_z: GdbcSpace) -> TwistContext:
    """Twist context on a pair of equal-sequence cell groupoids."""

    def y_ops() -> GroupoidOps:
        return GroupoidOps(
            source=space.source,
            target=space.target,
            identity=space.identity,
            inverse=space.inverse,
            mult=space.mult,
            moment=space.mu_plus,
            act=space.act_gammaB,
            base_dist=space.cells_dist,
            base_dress=lambda c, u: act_tuple_on_bminus(c, u, space.chart_u)[1],
        )

    def z_ops() -> GroupoidOps:
        return GroupoidOps(
            source=space_z.source,
            target=space_z.target,
            identity=space_z.identity,
            inverse=space_z.inverse,
            mult=space_z.mult,
            moment=space_z.mu_minus,
            act=space_z.act_gammaBminus,
            base_dist=space_z.cells_dist,
            base_dress=lambda g, c: act_b_on_tuple(g, c, space_z.chart_u)[0],
        )

    return TwistContext(space.pair, y_ops(), z_ops())


def concat_space(space_u: GdbcSpace, space_v: GdbcSpace) -> GdbcSpace:
    words_u = [f.word.letters for f in space_u.chart_u.factors]
    words_v = [f.word.letters for f in space_v.chart_u.factors]
    return GdbcSpace(space_u.n, list(words_u) + list(words_v), list(words_u) + list(words_v))


def concat_kappa(space_u: GdbcSpace, space_v: GdbcSpace, space_w: GdbcSpace,
                 y: GDBCElement, z: GDBCElement) -> GDBCElement:
    """Concatenate a pair of equal-sequence elements into the long cell.

    ([c, b[c']], cocycle_v b', b_- cocycle_u, [c_-^{b'_-}, c'_-]).
    """
    c1n, coc_v = act_b_on_tuple(y.b, z.c, space_v.chart_u)
    coc_u, cmn = act_tuple_on_bminus(y.cm, z.bm, space_u.chart_v)
    return space_w.element(
        tuple(y.c) + tuple(c1n),
        coc_v @ z.b,
        y.bm @ coc_u,
        tuple(cmn) + tuple(z.cm),
    )


def t_equivalence(space_u: GdbcSpace, space_v: GdbcSpace, y: GDBCElement,
                  z: GDBCElement, t: np.ndarray) -> Tuple[GDBCElement, GDBCElement]:
    """The torus action defining the quotient on which concatenation is a
    groupoid isomorphism; concatenation is constant along it."""
    coc_u, cm_t = act_tuple_on_bminus(y.cm, t, space_u.chart_v)
    y_t = space_u.element(y.c, y.b @ t, y.bm @ coc_u, cm_t)
    t_inv = np.linalg.inv(t)
    c_t, coc_v = act_b_on_tuple(t_inv, z.c, space_v.chart_u)
    z_t = space_v.element(c_t, coc_v @ z.b, t_inv @ z.bm, z.cm)
    return y_t, z_t


def kappa_image_condition(space_u: GdbcSpace, space_w: GdbcSpace,
                          x: GDBCElement) -> bool:
    """Membership in the open concatenation image: the half products must
    refactorize across the two Borels."""
    k = len(space_u.chart_u.factors)
    g_half = np.eye(space_w.n, dtype=np.complex128)
    for ci in x.c[:k]:
        g_half = g_half @ ci
    h_half = x.bm
    for ci in x.cm[:k]:
        h_half = h_half @ ci
    m = np.linalg.inv(h_half) @ g_half
    try:
        from .errors import NotInOpenCell
        from .linalg import gauss_decompose

        gauss_decompose(m)
        return True
    except NotInOpenCell:
        return False
