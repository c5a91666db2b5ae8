"""Forward-mode dual numbers over numpy arrays.

A :class:`Dual` carries a value array ``val`` (real or complex, any shape) and
its partial derivatives ``der`` with shape ``(nvar,) + val.shape``, one slice
per seeded direction. All seeds are real, so ``conj`` and ``real`` commute
with differentiation.

The module-level functions (:func:`sqrt`, :func:`exp`, :func:`conj`, ...)
dispatch on the argument type, which lets the same construction code run on
plain floats, numpy arrays and duals.
"""
from __future__ import annotations

import numpy as np


class Dual:
    __slots__ = ("val", "der")
    __array_ufunc__ = None  # numpy binary operators defer to our reflected methods

    def __init__(self, val, der):
        self.val = np.asarray(val)
        self.der = np.asarray(der)

    @classmethod
    def constant(cls, val, nvar: int) -> "Dual":
        val = np.asarray(val)
        return cls(val, np.zeros((nvar,) + val.shape, dtype=val.dtype))

    @property
    def nvar(self) -> int:
        return self.der.shape[0]

    @property
    def shape(self):
        return self.val.shape

    @property
    def ndim(self) -> int:
        return self.val.ndim

    def __len__(self):
        return len(self.val)

    def __repr__(self):
        return f"Dual({self.val!r}, der={self.der!r})"

    # derivative array right-aligned to ``ndim`` value dimensions
    def _pad(self, ndim: int) -> np.ndarray:
        extra = (1,) * (ndim - self.val.ndim)
        return self.der.reshape((self.nvar,) + extra + self.val.shape)

    def _out(self, val, der) -> "Dual":
        val = np.asarray(val)
        return Dual(val, np.broadcast_to(der, (self.nvar,) + val.shape))

    # ---------- arithmetic ----------
    def __add__(self, other):
        if isinstance(other, Dual):
            val = np.asarray(self.val + other.val)
            return self._out(val, self._pad(val.ndim) + other._pad(val.ndim))
        val = np.asarray(self.val + other)
        return self._out(val, self._pad(val.ndim))

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Dual):
            val = np.asarray(self.val * other.val)
            k = val.ndim
            return self._out(val, self._pad(k) * other.val + self.val * other._pad(k))
        other = np.asarray(other)
        val = np.asarray(self.val * other)
        return self._out(val, self._pad(val.ndim) * other)

    __rmul__ = __mul__

    def reciprocal(self) -> "Dual":
        inv = 1.0 / self.val
        return Dual(inv, -self.der * inv * inv)

    def __truediv__(self, other):
        if isinstance(other, Dual):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Dual):
            raise TypeError("dual exponents are not supported")
        if p == 2:
            return self * self
        return Dual(self.val**p, p * self.val ** (p - 1) * self.der)

    def __matmul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val @ other.val, self.der @ other.val + self.val @ other.der)
        other = np.asarray(other)
        return Dual(self.val @ other, self.der @ other)

    def __rmatmul__(self, other):
        other = np.asarray(other)
        return Dual(other @ self.val, other @ self.der)

    # ---------- structure ----------
    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Dual(self.val[idx], self.der[(slice(None),) + idx])

    @property
    def T(self) -> "Dual":
        return Dual(self.val.T, np.swapaxes(self.der, -1, -2))

    def sum(self, axis=None) -> "Dual":
        if axis is None:
            return Dual(self.val.sum(), self.der.reshape(self.nvar, -1).sum(axis=1))
        axis = axis % self.val.ndim
        return Dual(self.val.sum(axis=axis), self.der.sum(axis=axis + 1))

    def trace(self) -> "Dual":
        return Dual(np.trace(self.val), np.trace(self.der, axis1=1, axis2=2))

    def conj(self) -> "Dual":
        return Dual(np.conj(self.val), np.conj(self.der))

    @property
    def real(self) -> "Dual":
        return Dual(np.real(self.val), np.real(self.der))

    @property
    def imag(self) -> "Dual":
        return Dual(np.imag(self.val), np.imag(self.der))

    # ---------- elementary functions ----------
    def sqrt(self) -> "Dual":
        s = np.sqrt(self.val)
        return Dual(s, self.der / (2.0 * s))

    def exp(self) -> "Dual":
        e = np.exp(self.val)
        return Dual(e, self.der * e)

    def log(self) -> "Dual":
        return Dual(np.log(self.val), self.der / self.val)

    def cosh(self) -> "Dual":
        return Dual(np.cosh(self.val), self.der * np.sinh(self.val))

    def sinh(self) -> "Dual":
        return Dual(np.sinh(self.val), self.der * np.cosh(self.val))

    def __abs__(self) -> "Dual":
        a = np.abs(self.val)
        if np.iscomplexobj(self.val):
            return Dual(a, np.real(np.conj(self.val) * self.der) / a)
        return Dual(a, np.sign(self.val) * self.der)


def seed_phase(lam, theta) -> tuple[Dual, Dual]:
    """Duals for positions and momenta seeded along all ``2n`` coordinates.

    Direction ``k`` is ``lam[k]`` for ``k < n`` and ``theta[k - n]`` otherwise.
    """
    lam = np.asarray(lam, dtype=float)
    theta = np.asarray(theta, dtype=float)
    n = lam.shape[0]
    eye = np.eye(2 * n)
    return Dual(lam, eye[:, :n]), Dual(theta, eye[:, n:])


def value(x):
    return x.val if isinstance(x, Dual) else x


def gradient(x) -> np.ndarray:
    """Derivative vector of a scalar dual (zeros are not inferable for constants)."""
    return np.asarray(x.der)


def _nvar(items) -> int | None:
    for x in items:
        if isinstance(x, Dual):
            return x.nvar
    return None


def sqrt(x):
    return x.sqrt() if isinstance(x, Dual) else np.sqrt(x)


def exp(x):
    return x.exp() if isinstance(x, Dual) else np.exp(x)


def log(x):
    return x.log() if isinstance(x, Dual) else np.log(x)


def cosh(x):
    return x.cosh() if isinstance(x, Dual) else np.cosh(x)


def sinh(x):
    return x.sinh() if isinstance(x, Dual) else np.sinh(x)


def conj(x):
    return x.conj() if isinstance(x, Dual) else np.conj(x)


def real(x):
    return x.real if isinstance(x, Dual) else np.real(x)


def imag(x):
    return x.imag if isinstance(x, Dual) else np.imag(x)


def trace(x):
    return x.trace() if isinstance(x, Dual) else np.trace(x)


def diag(x):
    """Square matrix with the vector ``x`` on its diagonal."""
    if not isinstance(x, Dual):
        return np.diag(x)
    m = x.val.shape[0]
    eye = np.eye(m)
    return Dual(np.diag(x.val), x.der[:, :, None] * eye)


def _lift(items):
    nvar = _nvar(items)
    if nvar is None:
        return None
    return [x if isinstance(x, Dual) else Dual.constant(x, nvar) for x in items]


def concatenate(items):
    lifted = _lift(items)
    if lifted is None:
        return np.concatenate(items)
    return Dual(
        np.concatenate([d.val for d in lifted]),
        np.concatenate([d.der for d in lifted], axis=1),
    )


def stack(items):
    lifted = _lift(items)
    if lifted is None:
        return np.stack([np.asarray(x) for x in items])
    return Dual(np.stack([d.val for d in lifted]), np.stack([d.der for d in lifted], axis=1))


def prod(x, axis=None):
    """Product along ``axis`` by sequential multiplication (zero-safe for duals)."""
    if not isinstance(x, Dual):
        return np.prod(x, axis=axis)
    if axis is None:
        flat = Dual(x.val.reshape(-1), x.der.reshape(x.nvar, -1))
        return prod(flat, axis=0)
    axis = axis % x.ndim
    index = [slice(None)] * x.ndim
    result = None
    for k in range(x.val.shape[axis]):
        index[axis] = k
        part = x[tuple(index)]
        result = part if result is None else result * part
    return result
