"""Deterministic 64-bit PRNG shared by both kernel backends.

SplitMix64 is implemented here and, identically, in the compiled kernel,
so that a run produces the same sampled paths regardless of which backend
is active. Stream seeds are derived by mixing the run seed with stable
per-task integers (case ids, relation ids), which keeps parallel and
serial execution order-independent.
"""

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(state: int) -> tuple[int, int]:
    """Advance one SplitMix64 step; returns (new_state, output)."""
    state = (state + _GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    z = z ^ (z >> 31)
    return state, z


def derive_seed(*parts: int) -> int:
    """Mix integers into one 64-bit stream seed, independent of call site."""
    state = 0x8E1FDE12D9B26C1F
    for p in parts:
        state, out = splitmix64((state ^ (p & MASK64)) & MASK64)
        state ^= out
    _, out = splitmix64(state)
    return out


class SplitMix64:
    """Tiny deterministic generator for the pure-Python kernels."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state, out = splitmix64(self.state)
        return out

    def randbelow(self, n: int) -> int:
        """Uniform-ish draw in [0, n); modulo bias is negligible for graph degrees."""
        return self.next_u64() % n
