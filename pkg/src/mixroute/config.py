"""Run configuration: JSON schema, loading, and echoing.

Schema (all throughputs are integers; defaults in brackets):

    {
      "seed": 0,                      // [0] recorded in every output
      "group": "schnorr256",          // [schnorr256] or "secp256k1"
      "n_messages": 12,               // required
      "v": 3, "d": 3, "z": 2,         // routing entities; auditors and threshold
      "k": 16,                        // shuffle-proof soundness (2^-k)
      "blocks": 2,                    // ciphertext blocks per message
      "layers": 3,                    // [derived from n_messages when absent]
      "mixes": [                      // required
        {"id": "m1", "b": 1, "org": "acme", "layer": 1}   // org, layer optional
      ],
      "adversary": {"servers": [      // optional
        {"id": "m4", "behavior": "wrong-routing",
         "grind_attempts": 1, "grind_target": ""}
      ]},
      "faults": [                     // optional scheduled removals
        {"phase": "mix", "ctr": 2, "scope": "mix:m4"}
      ],
      "messages": [                   // optional; generated when absent
        {"receiver": "alice", "payload": "hello"}          // or "payload_hex"
      ]
    }
"""

import json

from mixroute.engine import (
    AdversarySpec,
    ConfigError,
    CorruptSpec,
    FaultEvent,
    TimeFrameConfig,
)
from mixroute.topology import MixSpec


def _require(obj, key, kind, where):
    if key not in obj:
        raise ConfigError(f"config field '{where}{key}' is required")
    value = obj[key]
    if not isinstance(value, kind):
        raise ConfigError(
            f"config field '{where}{key}' must be {kind.__name__}, got {type(value).__name__}"
        )
    return value


def _optional(obj, key, kind, default, where):
    if key not in obj:
        return default
    value = obj[key]
    if not isinstance(value, kind):
        raise ConfigError(
            f"config field '{where}{key}' must be {kind.__name__}, got {type(value).__name__}"
        )
    return value


def parse_config(data: dict) -> TimeFrameConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    mixes = []
    for i, m in enumerate(_require(data, "mixes", list, "")):
        where = f"mixes[{i}]."
        mixes.append(
            MixSpec(
                identity=_require(m, "id", str, where),
                throughput=_require(m, "b", int, where),
                organization=_optional(m, "org", str, "", where),
                layer=_optional(m, "layer", int, 0, where),
            )
        )
    servers = []
    adv = _optional(data, "adversary", dict, {}, "")
    for i, s in enumerate(_optional(adv, "servers", list, [], "adversary.")):
        where = f"adversary.servers[{i}]."
        servers.append(
            CorruptSpec(
                identity=_require(s, "id", str, where),
                behavior=_require(s, "behavior", str, where),
                grind_attempts=_optional(s, "grind_attempts", int, 1, where),
                grind_target=_optional(s, "grind_target", str, "", where),
            )
        )
    faults = []
    for i, f in enumerate(_optional(data, "faults", list, [], "")):
        where = f"faults[{i}]."
        faults.append(
            FaultEvent(
                phase=_require(f, "phase", str, where),
                ctr=_require(f, "ctr", int, where),
                scope=_require(f, "scope", str, where),
            )
        )
    messages = None
    if "messages" in data:
        messages = []
        for i, m in enumerate(_require(data, "messages", list, "")):
            where = f"messages[{i}]."
            receiver = _require(m, "receiver", str, where)
            if "payload_hex" in m:
                payload = bytes.fromhex(_require(m, "payload_hex", str, where))
            else:
                payload = _require(m, "payload", str, where).encode()
            messages.append((receiver, payload))
    return TimeFrameConfig(
        n_messages=_require(data, "n_messages", int, ""),
        mixes=mixes,
        v=_optional(data, "v", int, 3, ""),
        d=_optional(data, "d", int, 3, ""),
        z=_optional(data, "z", int, 2, ""),
        k=_optional(data, "k", int, 16, ""),
        blocks=_optional(data, "blocks", int, 2, ""),
        seed=_optional(data, "seed", int, 0, ""),
        group_name=_optional(data, "group", str, "schnorr256", ""),
        layers=_optional(data, "layers", int, 0, ""),
        adversary=AdversarySpec(tuple(servers)),
        faults=tuple(faults),
        messages=messages,
    )


def load_config(path: str) -> TimeFrameConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno}: {exc.msg}") from exc
    return parse_config(data)


def config_echo(cfg: TimeFrameConfig) -> dict:
    """JSON-serializable echo of a config, for run manifests."""
    return {
        "seed": cfg.seed,
        "group": cfg.group_name,
        "n_messages": cfg.n_messages,
        "v": cfg.v,
        "d": cfg.d,
        "z": cfg.z,
        "k": cfg.k,
        "blocks": cfg.blocks,
        "layers": cfg.depth(),
        "mixes": [
            {"id": m.identity, "b": m.throughput, "org": m.organization, "layer": m.layer}
            for m in cfg.mixes
        ],
        "adversary": {
            "servers": [
                {
                    "id": s.identity,
                    "behavior": s.behavior,
                    "grind_attempts": s.grind_attempts,
                    "grind_target": s.grind_target,
                }
                for s in cfg.adversary.servers
            ]
        },
        "faults": [
            {"phase": f.phase, "ctr": f.ctr, "scope": f.scope} for f in cfg.faults
        ],
    }
