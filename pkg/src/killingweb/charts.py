"""Coordinate charts of the eleven separable webs and the diagonalization check."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .classify import WebClass
from .exactmath import UsageError
from .killing import KTParams, kt_matrix_at

# names of the separable coordinates and of the essential parameters, per web
COORDINATES = {
    WebClass.CARTESIAN: ("x", "y", "z"),
    WebClass.CIRCULAR_CYLINDRICAL: ("r", "theta", "z"),
    WebClass.PARABOLIC_CYLINDRICAL: ("mu", "nu", "z"),
    WebClass.ELLIPTIC_HYPERBOLIC: ("eta", "psi", "z"),
    WebClass.SPHERICAL: ("r", "theta", "phi"),
    WebClass.PROLATE_SPHEROIDAL: ("eta", "theta", "psi"),
    WebClass.OBLATE_SPHEROIDAL: ("eta", "theta", "psi"),
    WebClass.PARABOLIC: ("mu", "nu", "psi"),
    WebClass.CONICAL: ("r", "theta", "lambda"),
    WebClass.PARABOLOIDAL: ("mu", "nu", "lambda"),
    WebClass.ELLIPSOIDAL: ("eta", "theta", "lambda"),
}

ESSENTIAL = {
    WebClass.ELLIPTIC_HYPERBOLIC: ("a",),
    WebClass.PROLATE_SPHEROIDAL: ("a",),
    WebClass.OBLATE_SPHEROIDAL: ("a",),
    WebClass.CONICAL: ("b", "c"),
    WebClass.PARABOLOIDAL: ("b", "c"),
    WebClass.ELLIPSOIDAL: ("a", "b", "c"),
}

# webs whose chart only fixes squares of Cartesian coordinates
SQUARED = {WebClass.CONICAL: 3, WebClass.PARABOLOIDAL: 2, WebClass.ELLIPSOIDAL: 3}


def _need(params: Mapping[str, float], names: Sequence[str]) -> list[float]:
    try:
        return [float(params[n]) for n in names]
    except KeyError as exc:
        raise UsageError(f"missing essential parameter {exc.args[0]}") from None


def _range(cond: bool, what: str) -> None:
    if not cond:
        raise UsageError(f"coordinates outside the chart domain: {what}")


def _signed_root(v: float, s: int) -> float:
    return s * math.sqrt(max(v, 0.0))


def catalog_point(web: WebClass, u: Sequence[float], params: Mapping[str, float] | None = None,
                  signs: Sequence[int] = (1, 1, 1)) -> np.ndarray:
    """Cartesian point of the separable coordinates ``u`` in the web's own frame.

    ``signs`` picks the octant for the charts that only determine squares.
    """
    web = WebClass(web)
    params = params or {}
    u1, u2, u3 = (float(t) for t in u)
    if web == WebClass.CARTESIAN:
        return np.array([u1, u2, u3])
    if web == WebClass.CIRCULAR_CYLINDRICAL:
        return np.array([u1 * math.cos(u2), u1 * math.sin(u2), u3])
    if web == WebClass.PARABOLIC_CYLINDRICAL:
        return np.array([(u1 * u1 - u2 * u2) / 2, u1 * u2, u3])
    if web == WebClass.ELLIPTIC_HYPERBOLIC:
        (a,) = _need(params, ("a",))
        return np.array([a * math.cosh(u1) * math.cos(u2), a * math.sinh(u1) * math.sin(u2), u3])
    if web == WebClass.SPHERICAL:
        return np.array([u1 * math.sin(u2) * math.cos(u3), u1 * math.sin(u2) * math.sin(u3),
                         u1 * math.cos(u2)])
    if web == WebClass.PROLATE_SPHEROIDAL:
        (a,) = _need(params, ("a",))
        s = a * math.sinh(u1) * math.sin(u2)
        return np.array([s * math.cos(u3), s * math.sin(u3), a * math.cosh(u1) * math.cos(u2)])
    if web == WebClass.OBLATE_SPHEROIDAL:
        (a,) = _need(params, ("a",))
        s = a * math.cosh(u1) * math.sin(u2)
        return np.array([s * math.cos(u3), s * math.sin(u3), a * math.sinh(u1) * math.cos(u2)])
    if web == WebClass.PARABOLIC:
        s = u1 * u2
        return np.array([s * math.cos(u3), s * math.sin(u3), (u1 * u1 - u2 * u2) / 2])
    if web == WebClass.CONICAL:
        b, c = _need(params, ("b", "c"))
        r, th, la = u1, u2, u3
        _range(0 < b < c, "need 0 < b < c")
        _range(b * b < th * th < c * c and 0 < la * la < b * b,
               "need b^2 < theta^2 < c^2 and 0 < lambda^2 < b^2")
        x2 = (r * th * la / (b * c)) ** 2
        y2 = r * r * (th * th - b * b) * (b * b - la * la) / (b * b * (c * c - b * b))
        z2 = r * r * (c * c - th * th) * (c * c - la * la) / (c * c * (c * c - b * b))
        return np.array([_signed_root(x2, signs[0]), _signed_root(y2, signs[1]),
                         _signed_root(z2, signs[2])])
    if web == WebClass.PARABOLOIDAL:
        b, c = _need(params, ("b", "c"))
        mu, nu, la = u1, u2, u3
        _range(nu < c < la < b < mu, "need nu < c < lambda < b < mu")
        x2 = 4 * (mu - b) * (b - nu) * (b - la) / (b - c)
        y2 = 4 * (mu - c) * (c - nu) * (la - c) / (b - c)
        return np.array([_signed_root(x2, signs[0]), _signed_root(y2, signs[1]),
                         mu + nu + la - b - c])
    if web == WebClass.ELLIPSOIDAL:
        a, b, c = _need(params, ("a", "b", "c"))
        eta, th, la = u1, u2, u3
        _range(a > eta > b > th > c > la, "need a > eta > b > theta > c > lambda")
        x2 = (a - eta) * (a - th) * (a - la) / ((a - b) * (a - c))
        y2 = (b - eta) * (b - th) * (b - la) / ((b - a) * (b - c))
        z2 = (c - eta) * (c - th) * (c - la) / ((c - a) * (c - b))
        return np.array([_signed_root(x2, signs[0]), _signed_root(y2, signs[1]),
                         _signed_root(z2, signs[2])])
    raise UsageError(f"unknown web {web}")


def sample_coordinates(web: WebClass, params: Mapping[str, float] | None, rng) -> list[float]:
    """A random interior point of the chart domain, away from its boundary."""
    web = WebClass(web)
    params = params or {}
    U = rng.uniform
    if web == WebClass.CARTESIAN:
        return [U(-2, 2), U(-2, 2), U(-2, 2)]
    if web == WebClass.CIRCULAR_CYLINDRICAL:
        return [U(0.5, 2), U(0.2, 6.0), U(-2, 2)]
    if web == WebClass.PARABOLIC_CYLINDRICAL:
        return [U(0.3, 2), U(0.3, 2), U(-2, 2)]
    if web == WebClass.ELLIPTIC_HYPERBOLIC:
        return [U(0.3, 1.5), U(0.2, 1.4), U(-2, 2)]
    if web in (WebClass.SPHERICAL, WebClass.PROLATE_SPHEROIDAL, WebClass.OBLATE_SPHEROIDAL):
        return [U(0.3, 1.5), U(0.3, 2.8), U(0.2, 6.0)]
    if web == WebClass.PARABOLIC:
        return [U(0.3, 2), U(0.3, 2), U(0.2, 6.0)]
    if web == WebClass.CONICAL:
        b, c = _need(params, ("b", "c"))
        th = U(0.2, 0.8)
        la = U(0.2, 0.8)
        return [U(0.5, 2), math.sqrt(b * b + th * (c * c - b * b)), b * la]
    if web == WebClass.PARABOLOIDAL:
        b, c = _need(params, ("b", "c"))
        g = b - c
        return [b + g * U(0.2, 1.5), c - g * U(0.2, 1.5), c + g * U(0.2, 0.8)]
    if web == WebClass.ELLIPSOIDAL:
        a, b, c = _need(params, ("a", "b", "c"))
        return [b + (a - b) * U(0.2, 0.8), c + (b - c) * U(0.2, 0.8), c - (b - c) * U(0.2, 1.5)]
    raise UsageError(f"unknown web {web}")


def catalog_jacobian(web: WebClass, u: Sequence[float], params: Mapping[str, float] | None = None,
                     signs: Sequence[int] = (1, 1, 1)) -> np.ndarray:
    """Exact dx/du of the web's chart at u, columns indexed by coordinate."""
    web = WebClass(web)
    params = params or {}
    u1, u2, u3 = (float(t) for t in u)
    cos, sin, cosh, sinh = math.cos, math.sin, math.cosh, math.sinh
    if web == WebClass.CARTESIAN:
        return np.eye(3)
    if web == WebClass.CIRCULAR_CYLINDRICAL:
        return np.array([[cos(u2), -u1 * sin(u2), 0], [sin(u2), u1 * cos(u2), 0], [0, 0, 1.0]])
    if web == WebClass.PARABOLIC_CYLINDRICAL:
        return np.array([[u1, -u2, 0], [u2, u1, 0], [0, 0, 1.0]])
    if web == WebClass.ELLIPTIC_HYPERBOLIC:
        (a,) = _need(params, ("a",))
        p, q = a * sinh(u1) * cos(u2), a * cosh(u1) * sin(u2)
        return np.array([[p, -q, 0], [q, p, 0], [0, 0, 1.0]])
    if web in (WebClass.SPHERICAL, WebClass.PROLATE_SPHEROIDAL, WebClass.OBLATE_SPHEROIDAL,
               WebClass.PARABOLIC):
        # x = s(u1, u2) (cos u3, sin u3) and z = h(u1, u2)
        if web == WebClass.SPHERICAL:
            s, s1, s2 = u1 * sin(u2), sin(u2), u1 * cos(u2)
            h1, h2 = cos(u2), -u1 * sin(u2)
        elif web == WebClass.PARABOLIC:
            s, s1, s2 = u1 * u2, u2, u1
            h1, h2 = u1, -u2
        else:
            (a,) = _need(params, ("a",))
            ch, sh = a * cosh(u1), a * sinh(u1)
            if web == WebClass.PROLATE_SPHEROIDAL:
                s, s1, s2 = sh * sin(u2), ch * sin(u2), sh * cos(u2)
                h1, h2 = sh * cos(u2), -ch * sin(u2)
            else:
                s, s1, s2 = ch * sin(u2), sh * sin(u2), ch * cos(u2)
                h1, h2 = ch * cos(u2), -sh * sin(u2)
        c3, s3 = cos(u3), sin(u3)
        return np.array([[s1 * c3, s2 * c3, -s * s3], [s1 * s3, s2 * s3, s * c3], [h1, h2, 0.0]])
    # squared charts: each x_i^2 is a product of factors linear in u,
    # so d(x_i)/du_k = x_i / 2 * d log(x_i^2)/du_k
    x = catalog_point(web, u, params, signs)
    if web == WebClass.CONICAL:
        b, c = _need(params, ("b", "c"))
        r, th, la = u1, u2, u3
        L = [[2 / r, 2 / th, 2 / la],
             [2 / r, 2 * th / (th * th - b * b), -2 * la / (b * b - la * la)],
             [2 / r, -2 * th / (c * c - th * th), -2 * la / (c * c - la * la)]]
        return np.array([[x[i] / 2 * L[i][k] for k in range(3)] for i in range(3)])
    if web == WebClass.PARABOLOIDAL:
        b, c = _need(params, ("b", "c"))
        L = [[1 / (u1 - b), -1 / (b - u2), -1 / (b - u3)],
             [1 / (u1 - c), -1 / (c - u2), 1 / (u3 - c)]]
        J = [[x[i] / 2 * L[i][k] for k in range(3)] for i in range(2)]
        return np.array(J + [[1.0, 1.0, 1.0]])
    if web == WebClass.ELLIPSOIDAL:
        e = _need(params, ("a", "b", "c"))
        return np.array([[-x[i] / (2 * (e[i] - uk)) for uk in (u1, u2, u3)] for i in range(3)])
    raise UsageError(f"unknown web {web}")


def _jacobian(f, u: np.ndarray) -> np.ndarray:
    J = np.empty((3, 3))
    for k in range(3):
        h = 1e-6 * max(1.0, abs(u[k]))
        up, um = u.copy(), u.copy()
        up[k] += h
        um[k] -= h
        J[:, k] = (f(up) - f(um)) / (2 * h)
    return J


def max_offdiagonal(K: KTParams, f, u: Sequence[float], relative: bool = False,
                    jacobian=None) -> float:
    """Largest |off-diagonal| of K pulled back through the coordinate map f at u,
    optionally divided by the largest |diagonal| entry.

    ``jacobian(u)`` may supply dx/du; otherwise it is differenced numerically.
    """
    u = np.array([float(t) for t in u])
    J = jacobian(u) if jacobian is not None else None
    if J is None:
        J = _jacobian(f, u)
    if abs(np.linalg.det(J)) < 1e-300:
        raise UsageError("singular chart Jacobian")
    Ku = np.linalg.solve(J, np.linalg.solve(J, kt_matrix_at(K, f(u))).T)
    off = max(abs(Ku[i, j]) for i in range(3) for j in range(3) if i != j)
    if relative:
        return off / (float(np.abs(np.diag(Ku)).max()) or 1.0)
    return off


def symmetric_eig3(M, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvector columns of a real symmetric 3x3.

    Inside a numerically degenerate cluster the basis is rebuilt by
    Gram-Schmidt on the standard basis, so it does not depend on LAPACK's
    arbitrary choice.  Columns get a positive largest entry and the frame is
    made right-handed by flipping the last column.
    """
    A = np.array(M, dtype=float)
    norm = max(1.0, float(np.abs(A).max())) if A.size else 1.0
    if A.shape != (3, 3) or not np.allclose(A, A.T, rtol=0.0, atol=tol * norm):
        raise UsageError("symmetric_eig3 needs a symmetric 3x3 matrix")
    w, V = np.linalg.eigh((A + A.T) / 2)
    start = 0
    while start < 3:
        stop = start + 1
        while stop < 3 and w[stop] - w[stop - 1] < tol * norm:
            stop += 1
        if stop - start > 1:
            P = V[:, start:stop] @ V[:, start:stop].T
            cols = []
            for e in np.eye(3):
                v = P @ e
                for q in cols:
                    v = v - (q @ v) * q
                if np.linalg.norm(v) > 1e-6:
                    cols.append(v / np.linalg.norm(v))
                if len(cols) == stop - start:
                    break
            V[:, start:stop] = np.column_stack(cols)
        start = stop
    for k in range(3):
        i = int(np.argmax(np.abs(V[:, k])))
        if V[i, k] < 0:
            V[:, k] = -V[:, k]
    if np.linalg.det(V) < 0:
        V[:, 2] = -V[:, 2]
    return w, V
