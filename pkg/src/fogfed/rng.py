"""Independent named random streams derived from one master seed."""

import hashlib
import random


class Streams:
    """``Streams(seed).get("arrivals/7")`` always yields the same generator state.

    Each name hashes to its own seed, so adding a stream never shifts the
    draws of another.
    """

    def __init__(self, seed: int):
        self.seed = seed

    def get(self, name: str) -> random.Random:
        digest = hashlib.sha256(f"{self.seed}/{name}".encode()).digest()
        return random.Random(int.from_bytes(digest[:16], "big"))
