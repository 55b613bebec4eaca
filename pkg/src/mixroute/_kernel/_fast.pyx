# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled secp256k1 kernel: 4x64-bit limb field arithmetic.

Same API as mixroute._kernel.pure. Field elements are little-endian
uint64 limb arrays; the prime 2^256 - 2^32 - 977 allows the cheap
fold-by-0x1000003D1 reduction. Points cross the Python boundary as
affine (x, y) int tuples, identity = None.
"""

from libc.stdint cimport uint64_t
from libc.string cimport memset, memmove

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

P_FIELD = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F
ORDER = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8

cdef uint64_t FOLD = 0x1000003D1  # 2^32 + 977; 2^256 = FOLD (mod p)

cdef uint64_t[4] P_LIMBS
P_LIMBS[0] = 0xFFFFFFFEFFFFFC2F
P_LIMBS[1] = 0xFFFFFFFFFFFFFFFF
P_LIMBS[2] = 0xFFFFFFFFFFFFFFFF
P_LIMBS[3] = 0xFFFFFFFFFFFFFFFF

cdef uint64_t[4] EXP_PM2  # p - 2, exponent for inversion
EXP_PM2[0] = 0xFFFFFFFEFFFFFC2D
EXP_PM2[1] = 0xFFFFFFFFFFFFFFFF
EXP_PM2[2] = 0xFFFFFFFFFFFFFFFF
EXP_PM2[3] = 0xFFFFFFFFFFFFFFFF


cdef inline int fe_cmp(const uint64_t* a, const uint64_t* b) nogil:
    cdef int i
    for i in range(3, -1, -1):
        if a[i] < b[i]:
            return -1
        if a[i] > b[i]:
            return 1
    return 0


cdef inline void fe_sub_p(uint64_t* a) nogil:
    # a -= p, assuming a >= p
    cdef u128 t
    cdef uint64_t borrow = 0
    cdef int i
    for i in range(4):
        t = <u128>a[i] - P_LIMBS[i] - borrow
        a[i] = <uint64_t>t
        borrow = 1 if (t >> 64) else 0


cdef inline void fe_add(uint64_t* r, const uint64_t* a, const uint64_t* b) nogil:
    cdef u128 t = 0
    cdef int i
    for i in range(4):
        t = t + a[i] + b[i]
        r[i] = <uint64_t>t
        t >>= 64
    if t:
        # overflowed 2^256: fold the carry back in, cannot overflow again
        t = <u128>r[0] + FOLD
        r[0] = <uint64_t>t
        t >>= 64
        for i in range(1, 4):
            if not t:
                break
            t = t + r[i]
            r[i] = <uint64_t>t
            t >>= 64
    if fe_cmp(r, P_LIMBS) >= 0:
        fe_sub_p(r)


cdef inline void fe_sub(uint64_t* r, const uint64_t* a, const uint64_t* b) nogil:
    # r = a - b mod p
    cdef u128 t
    cdef uint64_t borrow = 0
    cdef int i
    for i in range(4):
        t = <u128>a[i] - b[i] - borrow
        r[i] = <uint64_t>t
        borrow = 1 if (t >> 64) else 0
    if borrow:
        # wrapped below zero: add p back
        t = 0
        for i in range(4):
            t = t + r[i] + P_LIMBS[i]
            r[i] = <uint64_t>t
            t >>= 64


cdef void fe_mul(uint64_t* r, const uint64_t* a, const uint64_t* b) nogil:
    cdef uint64_t w[8]
    cdef uint64_t m[5]
    cdef uint64_t s[5]
    cdef u128 t
    cdef u128 acc
    cdef uint64_t carry
    cdef int i, j
    memset(w, 0, sizeof(w))
    for i in range(4):
        carry = 0
        for j in range(4):
            t = <u128>a[i] * b[j] + w[i + j] + carry
            w[i + j] = <uint64_t>t
            carry = <uint64_t>(t >> 64)
        w[i + 4] = carry

    # fold high 256 bits: r = lo + hi * FOLD  (hi*FOLD < 2^290)
    carry = 0
    for i in range(4):
        t = <u128>w[4 + i] * FOLD + carry
        m[i] = <uint64_t>t
        carry = <uint64_t>(t >> 64)
    m[4] = carry

    t = 0
    for i in range(4):
        t = t + w[i] + m[i]
        s[i] = <uint64_t>t
        t >>= 64
    s[4] = <uint64_t>t + m[4]

    # second fold of the ~34-bit overflow limb
    t = <u128>s[4] * FOLD
    acc = <u128>s[0] + <uint64_t>t
    r[0] = <uint64_t>acc
    acc = (acc >> 64) + s[1] + <uint64_t>(t >> 64)
    r[1] = <uint64_t>acc
    acc = (acc >> 64) + s[2]
    r[2] = <uint64_t>acc
    acc = (acc >> 64) + s[3]
    r[3] = <uint64_t>acc
    if acc >> 64:
        # third fold: carry out of 2^256
        acc = <u128>r[0] + FOLD
        r[0] = <uint64_t>acc
        acc >>= 64
        for i in range(1, 4):
            if not acc:
                break
            acc = acc + r[i]
            r[i] = <uint64_t>acc
            acc >>= 64
    if fe_cmp(r, P_LIMBS) >= 0:
        fe_sub_p(r)


cdef inline void fe_sqr(uint64_t* r, const uint64_t* a) nogil:
    fe_mul(r, a, a)


cdef inline int fe_is_zero(const uint64_t* a) nogil:
    return a[0] == 0 and a[1] == 0 and a[2] == 0 and a[3] == 0


cdef void fe_inv(uint64_t* r, const uint64_t* a) nogil:
    # a^(p-2) by square-and-multiply, MSB first
    cdef uint64_t acc[4]
    cdef uint64_t base[4]
    cdef int i, bit
    memmove(base, a, sizeof(base))
    memset(acc, 0, sizeof(acc))
    acc[0] = 1
    for i in range(3, -1, -1):
        for bit in range(63, -1, -1):
            fe_sqr(acc, acc)
            if (EXP_PM2[i] >> bit) & 1:
                fe_mul(acc, acc, base)
    memmove(r, acc, sizeof(acc))


cdef struct Jac:
    uint64_t X[4]
    uint64_t Y[4]
    uint64_t Z[4]


cdef inline void jac_set_infinity(Jac* p) nogil:
    memset(p, 0, sizeof(Jac))
    p.Y[0] = 1


cdef inline int jac_is_infinity(const Jac* p) nogil:
    return fe_is_zero(p.Z)


cdef void jac_double(Jac* r, const Jac* p) nogil:
    # dbl-2009-l for a = 0; safe when r aliases p
    cdef uint64_t A[4]
    cdef uint64_t B[4]
    cdef uint64_t C[4]
    cdef uint64_t D[4]
    cdef uint64_t E[4]
    cdef uint64_t F[4]
    cdef uint64_t t[4]
    cdef uint64_t t2[4]
    cdef uint64_t z3[4]
    if fe_is_zero(p.Y) or jac_is_infinity(p):
        jac_set_infinity(r)
        return
    fe_sqr(A, p.X)
    fe_sqr(B, p.Y)
    fe_sqr(C, B)
    fe_add(t, p.X, B)
    fe_sqr(t, t)
    fe_sub(t, t, A)
    fe_sub(t, t, C)
    fe_add(D, t, t)
    fe_add(E, A, A)
    fe_add(E, E, A)
    fe_sqr(F, E)
    fe_mul(z3, p.Y, p.Z)
    fe_add(z3, z3, z3)
    # X3 = F - 2D
    fe_add(t, D, D)
    fe_sub(r.X, F, t)
    # Y3 = E*(D - X3) - 8C
    fe_sub(t, D, r.X)
    fe_mul(t, E, t)
    fe_add(t2, C, C)
    fe_add(t2, t2, t2)
    fe_add(t2, t2, t2)
    fe_sub(r.Y, t, t2)
    memmove(r.Z, z3, sizeof(z3))


cdef void jac_add(Jac* r, const Jac* p, const Jac* q) nogil:
    # add-2007-bl; safe when r aliases p or q
    cdef uint64_t Z1Z1[4]
    cdef uint64_t Z2Z2[4]
    cdef uint64_t U1[4]
    cdef uint64_t U2[4]
    cdef uint64_t S1[4]
    cdef uint64_t S2[4]
    cdef uint64_t H[4]
    cdef uint64_t I[4]
    cdef uint64_t J[4]
    cdef uint64_t rr[4]
    cdef uint64_t V[4]
    cdef uint64_t t[4]
    cdef uint64_t t2[4]
    cdef uint64_t z3[4]
    if jac_is_infinity(p):
        memmove(r, q, sizeof(Jac))
        return
    if jac_is_infinity(q):
        memmove(r, p, sizeof(Jac))
        return
    fe_sqr(Z1Z1, p.Z)
    fe_sqr(Z2Z2, q.Z)
    fe_mul(U1, p.X, Z2Z2)
    fe_mul(U2, q.X, Z1Z1)
    fe_mul(t, q.Z, Z2Z2)
    fe_mul(S1, p.Y, t)
    fe_mul(t, p.Z, Z1Z1)
    fe_mul(S2, q.Y, t)
    if fe_cmp(U1, U2) == 0:
        if fe_cmp(S1, S2) != 0:
            jac_set_infinity(r)
            return
        jac_double(r, p)
        return
    fe_sub(H, U2, U1)
    fe_add(t, H, H)
    fe_sqr(I, t)
    fe_mul(J, H, I)
    fe_sub(t, S2, S1)
    fe_add(rr, t, t)
    fe_mul(V, U1, I)
    # Z3 = ((Z1+Z2)^2 - Z1Z1 - Z2Z2) * H, before any write to r
    fe_add(z3, p.Z, q.Z)
    fe_sqr(z3, z3)
    fe_sub(z3, z3, Z1Z1)
    fe_sub(z3, z3, Z2Z2)
    fe_mul(z3, z3, H)
    # X3 = rr^2 - J - 2V
    fe_sqr(t, rr)
    fe_sub(t, t, J)
    fe_sub(t, t, V)
    fe_sub(t, t, V)
    # Y3 = rr*(V - X3) - 2*S1*J
    fe_sub(t2, V, t)
    fe_mul(t2, rr, t2)
    memmove(r.X, t, sizeof(t))
    fe_mul(t, S1, J)
    fe_add(t, t, t)
    fe_sub(r.Y, t2, t)
    memmove(r.Z, z3, sizeof(z3))


cdef void jac_to_affine(const Jac* p, uint64_t* ax, uint64_t* ay) nogil:
    cdef uint64_t zi[4]
    cdef uint64_t zi2[4]
    fe_inv(zi, p.Z)
    fe_sqr(zi2, zi)
    fe_mul(ax, p.X, zi2)
    fe_mul(zi2, zi2, zi)
    fe_mul(ay, p.Y, zi2)


cdef void _int_to_fe(object n, uint64_t* out):
    cdef bytes raw = int(n).to_bytes(32, "little")
    cdef const unsigned char* pb = raw
    cdef int i, j
    cdef uint64_t limb
    for i in range(4):
        limb = 0
        for j in range(8):
            limb |= (<uint64_t>pb[8 * i + j]) << (8 * j)
        out[i] = limb


cdef object _fe_to_int(const uint64_t* a):
    cdef unsigned char raw[32]
    cdef int i, j
    for i in range(4):
        for j in range(8):
            raw[8 * i + j] = <unsigned char>((a[i] >> (8 * j)) & 0xFF)
    return int.from_bytes(raw[:32], "little")


cdef int _load_point(object P, Jac* out) except -1:
    if P is None:
        jac_set_infinity(out)
        return 0
    _int_to_fe(P[0], out.X)
    _int_to_fe(P[1], out.Y)
    memset(out.Z, 0, sizeof(out.Z))
    out.Z[0] = 1
    return 0


cdef object _dump_point(const Jac* p):
    cdef uint64_t ax[4]
    cdef uint64_t ay[4]
    if jac_is_infinity(p):
        return None
    jac_to_affine(p, ax, ay)
    return (_fe_to_int(ax), _fe_to_int(ay))


def point_add(P, Q):
    """Add two affine points (None = identity)."""
    cdef Jac a, b, r
    _load_point(P, &a)
    _load_point(Q, &b)
    jac_add(&r, &a, &b)
    return _dump_point(&r)


def point_mul(P, k):
    """Multiply affine point P by scalar k >= 0 (None = identity)."""
    if k < 0:
        raise ValueError("scalar must be non-negative")
    if P is None:
        return None
    k = k % ORDER  # prime-order group: k*P depends only on k mod n
    if k == 0:
        return None

    cdef Jac base, acc
    cdef Jac table[16]
    cdef bytes kb = int(k).to_bytes(32, "big")
    cdef const unsigned char* pk = kb
    cdef int i, started = 0
    cdef unsigned char nib

    _load_point(P, &base)
    # 4-bit window table: table[i] = i * P
    jac_set_infinity(&table[0])
    memmove(&table[1], &base, sizeof(Jac))
    for i in range(2, 16):
        jac_add(&table[i], &table[i - 1], &base)

    jac_set_infinity(&acc)
    for i in range(64):
        if i & 1:
            nib = pk[i >> 1] & 0xF
        else:
            nib = pk[i >> 1] >> 4
        if started:
            jac_double(&acc, &acc)
            jac_double(&acc, &acc)
            jac_double(&acc, &acc)
            jac_double(&acc, &acc)
        if nib:
            jac_add(&acc, &acc, &table[nib])
            started = 1
    return _dump_point(&acc)
