"""Fraction-free (Bareiss) determinant over an exact integral domain."""


def bareiss_det(rows, zero, one, exact_div, is_zero=None):
    """Determinant of a square matrix given as a list of rows.

    ``exact_div(a, b)`` must return ``a / b`` for ``b`` dividing ``a``.
    Works for Python ints and for :class:`~torsionlab.fox.LaurentPolynomial`.
    """
    if is_zero is None:
        is_zero = lambda v: v == zero  # noqa: E731
    n = len(rows)
    if n == 0:
        return one
    m = [list(r) for r in rows]
    if any(len(r) != n for r in m):
        raise ValueError("matrix is not square")
    sign = 1
    prev = one
    for k in range(n - 1):
        if is_zero(m[k][k]):
            for i in range(k + 1, n):
                if not is_zero(m[i][k]):
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return zero
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = exact_div(m[i][j] * pivot - m[i][k] * m[k][j], prev)
            m[i][k] = zero
        prev = pivot
    det = m[n - 1][n - 1]
    return det if sign == 1 else zero - det
