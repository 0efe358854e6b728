"""Automorphism charts that move a base point to a normal position.

The Kobayashi metric and distance are invariant under biholomorphisms, so
every estimate is computed after sending the base point ``z`` to

* the origin, for balls (Moebius map) and polydiscs (coordinatewise disc maps),
* a point with vanishing exponent-one block, for generalized ellipses
  (Webster map built from the Moebius map of the ball factor).

The Siegel domain is handled by pulling back to the ball through the Cayley
map, and a ball of radius ``R`` by rescaling.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import automorphisms as au
from ..domains import WHP, Ball, Domain, Ellipse, Polydisc, as_point, cayley, cayley_inverse, cayley_inverse_pushforward
from ..errors import PreconditionError


@dataclass(frozen=True)
class Chart:
    """Biholomorphism ``psi`` from the query domain onto ``target``.

    ``forward`` and ``inverse`` act on batches of rows; ``push(z, v)`` is the
    differential of ``psi`` at ``z``.
    """

    target: Domain
    forward: Callable
    inverse: Callable
    push: Callable


def _rows(Z):
    return np.atleast_2d(np.asarray(Z, dtype=complex))


def model_domain(domain: Domain):
    """``(model, to_model, from_model, push)`` reducing ``domain`` to a unit-scale bounded model."""
    if isinstance(domain, Ball) and domain.radius != 1.0:
        R = domain.radius
        return (Ball(domain.dim), lambda Z: _rows(Z) / R, lambda Z: _rows(Z) * R, lambda z, v: as_point(v) / R)
    if isinstance(domain, WHP):
        if not domain.is_siegel():
            raise PreconditionError("metric queries on WHP domains are only supported for the Siegel model {Im w > |z|^2}")
        return (
            Ball(domain.dim),
            lambda Z: np.array([cayley_inverse(p) for p in _rows(Z)]),
            lambda Z: np.array([cayley(p) for p in _rows(Z)]),
            lambda z, v: cayley_inverse_pushforward(z, v),
        )
    if isinstance(domain, (Ball, Polydisc, Ellipse)):
        ident = lambda Z: _rows(Z)
        return domain, ident, ident, lambda z, v: as_point(v)
    raise PreconditionError(f"unsupported domain {domain!r}")


def _polydisc_chart(P: Polydisc, z):
    a = as_point(z, P.dim)

    def fwd(Z):
        Z = _rows(Z)
        return (Z - a) / (1 - a.conj() * Z)

    def inv(W):
        W = _rows(W)
        return (W + a) / (1 + a.conj() * W)

    def push(x, v):
        x = as_point(x)
        return as_point(v) * (1 - np.abs(a) ** 2) / (1 - a.conj() * x) ** 2

    return Chart(P, fwd, inv, push)


def normalizing_chart(domain: Domain, z) -> Chart:
    """Chart with ``psi(z)`` in normal position (see module docstring)."""
    model, to_model, from_model, push_model = model_domain(domain)
    z = as_point(z, domain.dim)
    zm = to_model(z)[0]
    if isinstance(model, Ball):
        g = au.moebius_to_origin(zm)
        ginv = au.inverse(g)
        inner = Chart(model, lambda Z: au.moebius_apply(g, _rows(Z), check=False),
                      lambda W: au.moebius_apply(ginv, _rows(W), check=False),
                      lambda x, v: au.pushforward(g, x, v))
    elif isinstance(model, Polydisc):
        inner = _polydisc_chart(model, zm)
    elif isinstance(model, Ellipse):
        k = model.k
        if k == 0:
            inner = Chart(model, _rows, _rows, lambda x, v: as_point(v))
        else:
            g = au.WebsterAut(model, au.moebius_to_origin(zm[:k]))
            ginv = au.inverse(g)
            inner = Chart(model, lambda Z: au.webster_apply(g, _rows(Z), check=False),
                          lambda W: au.webster_apply(ginv, _rows(W), check=False),
                          lambda x, v: au.pushforward(g, x, v))
    else:
        raise PreconditionError(f"unsupported model domain {model!r}")
    if model is domain:
        return inner
    return Chart(
        model,
        lambda Z: inner.forward(to_model(Z)),
        lambda W: from_model(inner.inverse(W)),
        lambda x, v: inner.push(to_model(x)[0], push_model(x, v)),
    )
