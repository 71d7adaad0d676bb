"""Deterministic synthetic knowledge-base generator for benchmarks.

Uses SplitMix64 so the same (sensors, components, seed) arguments produce
bit-identical knowledge bases on every platform.
"""

from __future__ import annotations

from .model import (
    ComponentDescription,
    CostVector,
    KnowledgeBase,
    PropertyRef,
    SensorDescription,
    build_kb,
)

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4B9C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """The standard 64-bit SplitMix generator (golden-gamma increment, Stafford mix13)."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform draw in [0, bound) by modulo reduction."""
        return self.next_u64() % bound


def synth_kb(n_sensors: int, n_components: int, seed: int) -> KnowledgeBase:
    """Generate a reproducible benchmark KB.

    Sensors are formulaic: sensor i produces one of the max(1, n_sensors // 10)
    base properties round-robin.  Each component draws its two inputs from the
    properties producible so far (base properties, then earlier component
    outputs, in construction order), so every component output is producible.
    """
    if n_sensors < 1:
        raise ValueError("n_sensors must be >= 1")
    if n_components < 0:
        raise ValueError("n_components must be >= 0")
    rng = SplitMix64(seed)

    n_base = max(1, n_sensors // 10)
    pool = [PropertyRef(f"p0-{k}", "u") for k in range(n_base)]

    sensors = [
        SensorDescription(
            id=f"s-{i}",
            produces=pool[i % n_base],
            location=f"loc-{i % 5}",
            wrapper_type="synthetic",
            cost=CostVector(energy=float(1 + i % 7), bandwidth=8.0, latency=10.0, price=0.0),
        )
        for i in range(n_sensors)
    ]

    components = []
    for j in range(n_components):
        first = pool[rng.below(len(pool))]
        second = pool[rng.below(len(pool))]
        output = PropertyRef(f"pc-{j}", "u")
        components.append(
            ComponentDescription(
                id=f"c-{j}",
                inputs=(first, second),
                output=output,
                class_name=f"SynthProc{j}",
                cost=CostVector(energy=0.5, bandwidth=4.0, latency=5.0, price=0.0),
            )
        )
        pool.append(output)

    return build_kb(sensors, components, ())
