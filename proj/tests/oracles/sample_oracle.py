#!/usr/bin/env python3
"""Reference draw for eval::sample_indices.

Pure-Python mt19937_64 (the standard 64-bit Mersenne Twister), rejection
sampling on the raw output and a partial Fisher-Yates shuffle. Prints the
sorted indices frozen into tests/test_eval.cpp.
"""
import sys

MASK = (1 << 64) - 1


class MT64:
    def __init__(self, seed):
        self.mt = [0] * 312
        self.mt[0] = seed & MASK
        for i in range(1, 312):
            self.mt[i] = (6364136223846793005 * (self.mt[i - 1] ^ (self.mt[i - 1] >> 62)) + i) & MASK
        self.idx = 312

    def twist(self):
        for i in range(312):
            x = (self.mt[i] & 0xFFFFFFFF80000000) | (self.mt[(i + 1) % 312] & 0x7FFFFFFF)
            xa = x >> 1
            if x & 1:
                xa ^= 0xB5026F5AA96619E9
            self.mt[i] = self.mt[(i + 156) % 312] ^ xa
        self.idx = 0

    def __call__(self):
        if self.idx >= 312:
            self.twist()
        y = self.mt[self.idx]
        self.idx += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & MASK


def below(rng, bound):
    limit = MASK - (MASK % bound)
    while True:
        x = rng()
        if x < limit:
            return x % bound


def sample(n, k, seed):
    rng = MT64(seed)
    idx = list(range(n))
    for i in range(k):
        j = i + below(rng, n - i)
        idx[i], idx[j] = idx[j], idx[i]
    return sorted(idx[:k])


if __name__ == "__main__":
    # Known-answer check: the 10000th output of a default-seeded mt19937_64.
    r = MT64(5489)
    for _ in range(9999):
        r()
    assert r() == 9981545732273789042
    n, k, seed = (int(a) for a in sys.argv[1:4]) if len(sys.argv) > 3 else (100, 10, 42)
    print(", ".join(str(i) for i in sample(n, k, seed)))
