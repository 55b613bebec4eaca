"""Permute-and-re-randomize with a cut-and-choose proof of correct shuffle.

The prover publishes k independent shadow shuffles of the input list C.
A Fiat-Shamir challenge picks, per shadow, whether to reveal the witness
linking C to the shadow or the witness linking the shadow to the output
list C'. Each response alone is an independent permutation or a blinded
composition, so neither the permutation nor the re-randomization scalars
of the real shuffle leak; forging both links for one shadow requires the
shadow to connect C and C', so a bogus C' survives with probability
2^-k.
"""

from dataclasses import dataclass

from mixroute.elgamal import Ciphertext, reencrypt_with
from mixroute.hashing import FIAT_SHAMIR, tagged_hash
from mixroute.serialization import Reader, prefixed, u32


class WitnessError(ValueError):
    """Claimed witness does not connect the input and output lists."""


@dataclass(frozen=True)
class ShuffleWitness:
    phi: tuple  # output position i holds a re-encryption of C[phi[i]], 0-based
    scalars: tuple  # per output position, per block


@dataclass(frozen=True)
class ShadowResponse:
    perm: tuple
    scalars: tuple


@dataclass(frozen=True)
class ShuffleProof:
    shadows: tuple  # k lists of ciphertexts
    challenge: bytes  # ceil(k/8) bytes, k bits used
    responses: tuple  # k ShadowResponses

    def serialize(self, group) -> bytes:
        k = len(self.shadows)
        w = len(self.shadows[0]) if k else 0
        out = [u32(k), u32(w), prefixed(self.challenge)]
        for shadow in self.shadows:
            for ct in shadow:
                out.append(ct.serialize(group))
        for resp in self.responses:
            for idx in resp.perm:
                out.append(u32(idx))
            for per_block in resp.scalars:
                out.append(u32(len(per_block)))
                for s in per_block:
                    out.append(s.to_bytes(group.scalar_bytes, "big"))
        return b"".join(out)

    @classmethod
    def deserialize(cls, group, data: bytes) -> "ShuffleProof":
        r = Reader(data)
        k = r.u32()
        w = r.u32()
        challenge = r.prefixed()
        shadows = tuple(
            tuple(Ciphertext.read_from(group, r) for _ in range(w)) for _ in range(k)
        )
        responses = []
        for _ in range(k):
            perm = tuple(r.u32() for _ in range(w))
            scalars = []
            for _ in range(w):
                nb = r.u32()
                scalars.append(
                    tuple(
                        int.from_bytes(r.take(group.scalar_bytes), "big")
                        for _ in range(nb)
                    )
                )
            responses.append(ShadowResponse(perm, tuple(scalars)))
        r.expect_end()
        return cls(shadows, challenge, tuple(responses))


def random_permutation(w: int, rng) -> tuple:
    perm = list(range(w))
    rng.shuffle(perm)
    return tuple(perm)


def shuffle(group, pke, cts, phi, rng):
    """Permute and re-randomize: returns (C', per-position scalars)."""
    if sorted(phi) != list(range(len(cts))):
        raise WitnessError("phi is not a permutation of the input positions")
    out, scalars = [], []
    for i in range(len(cts)):
        src = cts[phi[i]]
        s = tuple(group.random_scalar(rng) for _ in src.blocks)
        out.append(reencrypt_with(group, pke, src, s))
        scalars.append(s)
    return out, ShuffleWitness(tuple(phi), tuple(scalars))


def apply_witness(group, pke, cts, perm, scalars):
    """Deterministic shuffle under an explicit witness."""
    return [
        reencrypt_with(group, pke, cts[perm[i]], scalars[i]) for i in range(len(cts))
    ]


def challenge_bytes(group, context, c_in, c_out, shadows, k):
    transcript = [context, u32(k)]
    for cts in (c_in, c_out, *shadows):
        transcript.append(u32(len(cts)))
        transcript.extend(ct.serialize(group) for ct in cts)
    digest = tagged_hash(FIAT_SHAMIR, b"".join(transcript))
    while len(digest) * 8 < k:
        digest += tagged_hash(FIAT_SHAMIR, digest)
    return digest[: (k + 7) // 8]


def challenge_bit(challenge: bytes, j: int) -> int:
    return (challenge[j // 8] >> (7 - j % 8)) & 1


def prove_shuffle(group, pke, context: bytes, c_in, c_out, witness, k: int, rng):
    """Prove that c_out is a re-randomized permutation of c_in."""
    if apply_witness(group, pke, c_in, witness.phi, witness.scalars) != list(c_out):
        raise WitnessError("witness does not map the input list to the output list")
    w = len(c_in)
    shadow_witnesses = []
    shadows = []
    for _ in range(k):
        psi = random_permutation(w, rng)
        cts, sw = shuffle(group, pke, c_in, psi, rng)
        shadows.append(tuple(cts))
        shadow_witnesses.append(sw)

    challenge = challenge_bytes(group, context, c_in, c_out, shadows, k)

    responses = []
    for j in range(k):
        sw = shadow_witnesses[j]
        if challenge_bit(challenge, j) == 0:
            responses.append(ShadowResponse(sw.phi, sw.scalars))
        else:
            # rho sends output position i to the shadow position holding
            # the same original ciphertext; the scalar gap blinds the link
            psi_inv = {src: pos for pos, src in enumerate(sw.phi)}
            rho = tuple(psi_inv[witness.phi[i]] for i in range(w))
            gap = tuple(
                tuple(
                    (si - ti) % group.q
                    for si, ti in zip(witness.scalars[i], sw.scalars[rho[i]])
                )
                for i in range(w)
            )
            responses.append(ShadowResponse(rho, gap))
    return ShuffleProof(tuple(shadows), challenge, tuple(responses))


def check_responses(group, pke, c_in, c_out, shadows, bits, responses) -> bool:
    """Challenge-response predicate shared by the verifier and the
    transcript simulator (which programs the bits instead of hashing)."""
    w = len(c_in)
    if len(c_out) != w:
        return False
    for shadow, bit, resp in zip(shadows, bits, responses):
        if len(shadow) != w or len(resp.perm) != w:
            return False
        if sorted(resp.perm) != list(range(w)):
            return False
        try:
            if bit == 0:
                ok = apply_witness(group, pke, c_in, resp.perm, resp.scalars) == list(
                    shadow
                )
            else:
                ok = apply_witness(group, pke, shadow, resp.perm, resp.scalars) == list(
                    c_out
                )
        except ValueError:
            return False
        if not ok:
            return False
    return True


def verify_shuffle(group, pke, context: bytes, c_in, c_out, proof) -> bool:
    k = len(proof.shadows)
    if k == 0 or len(proof.responses) != k:
        return False
    expected = challenge_bytes(group, context, c_in, c_out, proof.shadows, k)
    if expected != proof.challenge:
        return False
    bits = [challenge_bit(proof.challenge, j) for j in range(k)]
    return check_responses(
        group, pke, c_in, c_out, proof.shadows, bits, proof.responses
    )


def simulate_proof(group, pke, c_in, c_out, bits, rng):
    """Build an accepting transcript for programmed challenge bits without
    knowing any witness linking c_in to c_out."""
    w = len(c_in)
    shadows, responses = [], []
    for bit in bits:
        perm = random_permutation(w, rng)
        if bit == 0:
            cts, sw = shuffle(group, pke, c_in, perm, rng)
            shadows.append(tuple(cts))
            responses.append(ShadowResponse(sw.phi, sw.scalars))
        else:
            # choose the shadow as the preimage of c_out under a random witness
            scalars = tuple(
                tuple(group.random_scalar(rng) for _ in ct.blocks) for ct in c_out
            )
            shadow = [None] * w
            for i in range(w):
                neg = tuple((-s) % group.q for s in scalars[i])
                shadow[perm[i]] = reencrypt_with(group, pke, c_out[i], neg)
            shadows.append(tuple(shadow))
            responses.append(ShadowResponse(perm, scalars))
    return tuple(shadows), tuple(responses)
