"""Layer sizing and the stratified mix topology.

Mixes are partitioned into ordered layers of equal total throughput; all
mixes of one organization stay in one layer so no single organization
can mix a message end to end.
"""

from dataclasses import dataclass


class TopologyError(ValueError):
    def __init__(self, constraint: str, detail: str):
        super().__init__(f"{constraint}: {detail}")
        self.constraint = constraint


@dataclass(frozen=True)
class MixSpec:
    identity: str
    throughput: int
    organization: str = ""
    layer: int = 0  # 0 = let the solver place it


@dataclass(frozen=True)
class LayerTopology:
    layers: tuple  # tuple of tuples of MixSpec, layer 1 first
    layer_total: int  # B, equal across layers

    @property
    def depth(self) -> int:
        return len(self.layers)

    def capacities(self, layer: int):
        """(mix_id, throughput) pairs in canonical order for one layer."""
        return sorted((m.identity, m.throughput) for m in self.layers[layer - 1])


def layer_count(n_messages: int) -> int:
    """Number of mixing layers for a batch of n messages.

    One layer per decimal order of magnitude, at least one: 1000
    messages need 3 layers, 100000 need 5. Integer arithmetic so the
    boundary cases never fall to float rounding.
    """
    if n_messages < 1:
        raise ValueError("message count must be >= 1")
    if n_messages == 1:
        return 1
    return max(len(str(n_messages - 1)), 1)


def _org_of(mix: MixSpec) -> str:
    return mix.organization or mix.identity


def build_topology(mixes, depth: int) -> LayerTopology:
    """Partition mixes into `depth` layers of equal total throughput.

    Explicit layer assignments (every mix carries one) are validated;
    otherwise a deterministic search places whole organizations. Raises
    TopologyError naming the violated constraint.
    """
    mixes = list(mixes)
    if not mixes:
        raise TopologyError("empty", "no mixes registered")
    if depth < 1:
        raise TopologyError("depth", "layer count must be >= 1")
    for m in mixes:
        if m.throughput < 1:
            raise TopologyError("throughput", f"mix {m.identity} has b < 1")
    ids = [m.identity for m in mixes]
    if len(set(ids)) != len(ids):
        raise TopologyError("identity", "duplicate mix identity")

    total = sum(m.throughput for m in mixes)
    if total % depth != 0:
        raise TopologyError(
            "equal-throughput",
            f"total throughput {total} not divisible into {depth} equal layers",
        )
    target = total // depth

    explicit = [m for m in mixes if m.layer]
    if explicit and len(explicit) != len(mixes):
        raise TopologyError(
            "layer-assignment", "either all mixes carry a layer or none do"
        )

    if explicit:
        layers = [[] for _ in range(depth)]
        org_layer = {}
        for m in mixes:
            if not 1 <= m.layer <= depth:
                raise TopologyError(
                    "layer-assignment", f"mix {m.identity} assigned to layer {m.layer}"
                )
            org = _org_of(m)
            if org_layer.setdefault(org, m.layer) != m.layer:
                raise TopologyError(
                    "organization-span",
                    f"organization {org!r} spans layers {org_layer[org]} and {m.layer}",
                )
            layers[m.layer - 1].append(m)
        for i, layer in enumerate(layers, start=1):
            b = sum(m.throughput for m in layer)
            if b != target:
                raise TopologyError(
                    "equal-throughput",
                    f"layer {i} throughput {b} != required {target}",
                )
        return LayerTopology(tuple(tuple(l) for l in layers), target)

    # solver path: place whole organizations, first-appearance order
    orgs = []
    seen = {}
    for m in mixes:
        org = _org_of(m)
        if org not in seen:
            seen[org] = len(orgs)
            orgs.append([org, 0, []])
        orgs[seen[org]][1] += m.throughput
        orgs[seen[org]][2].append(m)

    sums = [0] * depth
    placement = [0] * len(orgs)

    def place(i):
        if i == len(orgs):
            return all(s == target for s in sums)
        for layer in range(depth):
            if sums[layer] + orgs[i][1] <= target:
                sums[layer] += orgs[i][1]
                placement[i] = layer
                if place(i + 1):
                    return True
                sums[layer] -= orgs[i][1]
        return False

    if not place(0):
        raise TopologyError(
            "equal-throughput",
            f"no placement of organizations achieves {target} per layer",
        )
    layers = [[] for _ in range(depth)]
    for i, (_, _, members) in enumerate(orgs):
        for m in members:
            layers[placement[i]].append(
                MixSpec(m.identity, m.throughput, m.organization, placement[i] + 1)
            )
    return LayerTopology(tuple(tuple(l) for l in layers), target)
