"""Pure-Python secp256k1 point arithmetic (reference kernel).

Affine points are (x, y) tuples of ints; None is the identity. Internally
addition chains run in Jacobian coordinates so a scalar multiplication
costs one modular inversion instead of one per group operation.
"""

P_FIELD = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F
ORDER = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8

_p = P_FIELD


def _jac_double(X1, Y1, Z1):
    # doubling for y^2 = x^3 + 7 (a = 0)
    if Y1 == 0:
        return (0, 1, 0)
    A = (X1 * X1) % _p
    B = (Y1 * Y1) % _p
    C = (B * B) % _p
    D = (2 * ((X1 + B) * (X1 + B) - A - C)) % _p
    E = (3 * A) % _p
    F = (E * E) % _p
    X3 = (F - 2 * D) % _p
    Y3 = (E * (D - X3) - 8 * C) % _p
    Z3 = (2 * Y1 * Z1) % _p
    return (X3, Y3, Z3)


def _jac_add(X1, Y1, Z1, X2, Y2, Z2):
    if Z1 == 0:
        return (X2, Y2, Z2)
    if Z2 == 0:
        return (X1, Y1, Z1)
    Z1Z1 = (Z1 * Z1) % _p
    Z2Z2 = (Z2 * Z2) % _p
    U1 = (X1 * Z2Z2) % _p
    U2 = (X2 * Z1Z1) % _p
    S1 = (Y1 * Z2 * Z2Z2) % _p
    S2 = (Y2 * Z1 * Z1Z1) % _p
    if U1 == U2:
        if S1 != S2:
            return (0, 1, 0)
        return _jac_double(X1, Y1, Z1)
    H = (U2 - U1) % _p
    I = (4 * H * H) % _p
    J = (H * I) % _p
    r = (2 * (S2 - S1)) % _p
    V = (U1 * I) % _p
    X3 = (r * r - J - 2 * V) % _p
    Y3 = (r * (V - X3) - 2 * S1 * J) % _p
    Z3 = (((Z1 + Z2) * (Z1 + Z2) - Z1Z1 - Z2Z2) * H) % _p
    return (X3, Y3, Z3)


def _to_affine(X, Y, Z):
    if Z == 0:
        return None
    zinv = pow(Z, _p - 2, _p)
    zinv2 = (zinv * zinv) % _p
    return ((X * zinv2) % _p, (Y * zinv2 * zinv) % _p)


def point_add(P, Q):
    """Add two affine points (None = identity)."""
    if P is None:
        return Q
    if Q is None:
        return P
    X, Y, Z = _jac_add(P[0], P[1], 1, Q[0], Q[1], 1)
    return _to_affine(X, Y, Z)


def point_mul(P, k):
    """Multiply affine point P by scalar k >= 0 (None = identity)."""
    if k < 0:
        raise ValueError("scalar must be non-negative")
    if P is None or k == 0:
        return None
    X, Y, Z = (0, 1, 0)
    AX, AY, AZ = (P[0], P[1], 1)
    while k:
        if k & 1:
            X, Y, Z = _jac_add(X, Y, Z, AX, AY, AZ)
        AX, AY, AZ = _jac_double(AX, AY, AZ)
        k >>= 1
    return _to_affine(X, Y, Z)
