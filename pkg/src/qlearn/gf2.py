"""Linear algebra over F_2 on integer bit vectors.

A vector in F_2^m is an int; coordinate 1 is the most significant of the m
bits, matching how inputs are written as bit strings elsewhere.
"""

from __future__ import annotations

from typing import Iterable, Sequence


def rref(vectors: Iterable[int]) -> list[int]:
    """Reduced row-echelon basis, pivots (leading bits) in decreasing order.

    The result is canonical: two spanning sets of the same subspace give the
    same list.
    """
    basis: list[int] = []
    for v in vectors:
        v = int(v)
        for b in basis:
            if v ^ b < v:
                v ^= b
        if v:
            # clear the new pivot from existing rows
            top = v.bit_length() - 1
            basis = [b ^ v if (b >> top) & 1 else b for b in basis]
            basis.append(v)
    basis.sort(reverse=True)
    # full reduction: every pivot column is zero in the other rows
    for i, b in enumerate(basis):
        top = b.bit_length() - 1
        for j in range(len(basis)):
            if j != i and (basis[j] >> top) & 1:
                basis[j] ^= b
    basis.sort(reverse=True)
    return basis


def rank(vectors: Iterable[int]) -> int:
    return len(rref(vectors))


def reduce(v: int, echelon: Sequence[int]) -> int:
    """Canonical coset representative of ``v`` modulo ``span(echelon)``."""
    for b in echelon:
        if (v >> (b.bit_length() - 1)) & 1:
            v ^= b
    return v


def span_contains(basis: Sequence[int], v: int) -> bool:
    return reduce(int(v), rref(basis)) == 0


def span(basis: Sequence[int]) -> list[int]:
    out = [0]
    for b in rref(basis):
        out += [x ^ b for x in out]
    return sorted(out)


def dot(a: int, b: int) -> int:
    return (a & b).bit_count() & 1


def nullspace_basis(vectors: Iterable[int], m: int) -> list[int]:
    """Basis (in echelon form) of ``{y : y.v = 0 for every v}``."""
    echelon = rref(vectors)
    pivots = {b.bit_length() - 1 for b in echelon}
    free = [c for c in range(m) if c not in pivots]
    out = []
    for f in free:
        y = 1 << f
        for b in echelon:
            p = b.bit_length() - 1
            if (b >> f) & 1:
                y |= 1 << p
        out.append(y)
    return rref(out)


def orthogonal_complement(basis: Sequence[int], m: int) -> list[int]:
    return nullspace_basis(basis, m)
