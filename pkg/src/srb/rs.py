"""Reed-Solomon decoding over arbitrary evaluation points.

Welch-Berlekamp decoding of an evaluation-style codeword: given n pairs
(x_i, y_i) with distinct x_i, recover the coefficient vector of the unique
polynomial of degree < dim that agrees with all but at most
e = (n - dim) // 2 of them.  No structure is assumed on the evaluation
points, so this works for any set of node encoder coefficients.

A decoded polynomial is accepted only if it agrees with at least n - e of
the supplied points; with at most e corruptions that polynomial is unique,
so a success is never a silently wrong answer within the error budget.
"""

from __future__ import annotations

from .errors import DecodeFailure
from .field import Field


def solve_linear(field: Field, rows: list[list[int]], rhs: list[int]) -> list[int] | None:
    """One solution of rows * x = rhs by Gauss-Jordan, or None if inconsistent.

    Free variables are set to zero. The system may be over- or
    under-determined.
    """
    aug = [row[:] + [r] for row, r in zip(rows, rhs)]
    n_rows = len(aug)
    n_cols = len(rows[0]) if rows else 0
    pivot_cols = []
    rank = 0
    for col in range(n_cols):
        pivot = next((i for i in range(rank, n_rows) if aug[i][col] != 0), None)
        if pivot is None:
            continue
        aug[rank], aug[pivot] = aug[pivot], aug[rank]
        inv = field.inv(aug[rank][col])
        aug[rank] = [field.mul(inv, v) for v in aug[rank]]
        lead = aug[rank]
        for i in range(n_rows):
            if i != rank and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [field.sub(v, field.mul(f, w)) for v, w in zip(aug[i], lead)]
        pivot_cols.append(col)
        rank += 1
        if rank == n_rows:
            break
    for i in range(rank, n_rows):
        if aug[i][-1] != 0:
            return None
    solution = [0] * n_cols
    for r, col in enumerate(pivot_cols):
        solution[col] = aug[r][-1]
    return solution


def invert_matrix(field: Field, matrix: list[list[int]]) -> list[list[int]] | None:
    """Inverse of a square matrix, or None if singular."""
    n = len(matrix)
    aug = [row[:] + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = field.inv(aug[col][col])
        aug[col] = [field.mul(inv, v) for v in aug[col]]
        lead = aug[col]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [field.sub(v, field.mul(f, w)) for v, w in zip(aug[i], lead)]
    return [row[n:] for row in aug]


def mat_vec(field: Field, matrix: list[list[int]], vec: list[int]) -> list[int]:
    out = []
    for row in matrix:
        acc = 0
        for c, v in zip(row, vec):
            acc = field.add(acc, field.mul(c, v))
        out.append(acc)
    return out


def poly_divmod(field: Field, num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Quotient and remainder of polynomial division; coefficients ascending."""
    den = den[:]
    while den and den[-1] == 0:
        den.pop()
    if not den:
        raise ZeroDivisionError("division by the zero polynomial")
    rem = num[:]
    while rem and rem[-1] == 0:
        rem.pop()
    if len(rem) < len(den):
        return [], rem
    lead_inv = field.inv(den[-1])
    quot = [0] * (len(rem) - len(den) + 1)
    for shift in range(len(quot) - 1, -1, -1):
        if len(rem) < len(den) + shift:
            continue
        coeff = field.mul(rem[len(den) + shift - 1], lead_inv)
        quot[shift] = coeff
        if coeff != 0:
            for i, d in enumerate(den):
                rem[i + shift] = field.sub(rem[i + shift], field.mul(coeff, d))
        while rem and rem[-1] == 0:
            rem.pop()
    return quot, rem


def _interpolate(field: Field, xs: list[int], ys: list[int]) -> list[int]:
    rows = [field.vandermonde_row(x, len(xs)) for x in xs]
    solution = solve_linear(field, rows, ys)
    if solution is None:  # distinct xs make the system regular
        raise DecodeFailure("interpolation failed")
    return solution


def _agreement(field: Field, coeffs: list[int], points: list[tuple[int, int]]) -> int:
    return sum(1 for x, y in points if field.poly_eval(coeffs, x) == y)


def rs_decode(field: Field, points: list[tuple[int, int]], dim: int) -> list[int]:
    """Recover the length-dim coefficient vector behind noisy evaluations.

    Corrects up to (len(points) - dim) // 2 wrong values; with zero slack it
    degenerates to plain interpolation.  Raises DecodeFailure when no
    polynomial of degree < dim agrees with enough points, ValueError on
    malformed input (too few points, duplicate evaluation points).
    """
    n = len(points)
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if n < dim:
        raise ValueError(f"need at least dim={dim} points, got {n}")
    xs = [field.check(x) for x, _ in points]
    ys = [field.check(y) for _, y in points]
    if len(set(xs)) != n:
        raise ValueError("duplicate evaluation points")
    e = (n - dim) // 2
    threshold = n - e

    coeffs = _interpolate(field, xs[:dim], ys[:dim])
    if _agreement(field, coeffs, points) >= threshold:
        return coeffs
    if e == 0:
        raise DecodeFailure("received word is not a codeword and there is no error budget")

    # Welch-Berlekamp: find Q, E with deg Q < dim + e, E monic of degree e,
    # such that Q(x_i) = y_i * E(x_i) for all i; then the message is Q / E.
    q_terms = dim + e
    rows = []
    rhs = []
    for x, y in zip(xs, ys):
        powers = field.vandermonde_row(x, q_terms)
        row = powers[:q_terms] + [field.neg(field.mul(y, powers[j])) for j in range(e)]
        rows.append(row)
        rhs.append(field.mul(y, powers[e]))
    solution = solve_linear(field, rows, rhs)
    if solution is None:
        raise DecodeFailure("no consistent codeword within the error budget")
    q_poly = solution[:q_terms]
    e_poly = solution[q_terms:] + [1]
    quot, rem = poly_divmod(field, q_poly, e_poly)
    if rem:
        raise DecodeFailure("no consistent codeword within the error budget")
    if len(quot) > dim:
        raise DecodeFailure("no consistent codeword within the error budget")
    coeffs = quot + [0] * (dim - len(quot))
    if _agreement(field, coeffs, points) < threshold:
        raise DecodeFailure("no consistent codeword within the error budget")
    return coeffs


def rs_decode_many(
    field: Field,
    xs: list[int],
    ys_list: list[list[int]],
    dim: int,
) -> list[list[int]]:
    """Decode many received words sharing one evaluation-point set.

    Amortizes the interpolation matrix across words; words that fail the
    fast zero-error path fall back to the full Welch-Berlekamp decode.
    """
    n = len(xs)
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if n < dim:
        raise ValueError(f"need at least dim={dim} points, got {n}")
    if len(set(xs)) != n:
        raise ValueError("duplicate evaluation points")
    e = (n - dim) // 2
    base = invert_matrix(field, [field.vandermonde_row(x, dim) for x in xs[:dim]])
    if base is None:  # distinct xs make the Vandermonde block regular
        raise DecodeFailure("interpolation failed")
    tail = xs[dim:]
    need_tail = (n - e) - dim
    out = []
    for ys in ys_list:
        coeffs = mat_vec(field, base, ys[:dim])
        hits = sum(1 for x, y in zip(tail, ys[dim:]) if field.poly_eval(coeffs, x) == y)
        if hits >= need_tail:
            out.append(coeffs)
        else:
            out.append(rs_decode(field, list(zip(xs, ys)), dim))
    return out
