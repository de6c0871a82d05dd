"""Counted random bit source"""

import logging

import numpy as np

from ..common.common_errors import InvalidArgumentError, RejectionLimitError, TapeExhaustedError
from ..common.common_settings import Settings

class BitSource:
    """Seeded bit stream on top of numpy's PCG64 with an exact consumed-bit counter

    Words are taken from ``PCG64.random_raw`` and handed out most significant bit
    first, so ``next_bits(8) + next_bits(8) == next_bits(16)`` for equal states.
    A source is single-owner: derive independent sources for parallel work.
    """

    generator_name : str = "PCG64"
    word_bits : int = 64

    def __init__(self, seed : int) -> None:
        if seed < 0 or seed >= 1 << 64:
            raise InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.__seed : int = int(seed)
        self.__bit_generator = np.random.PCG64(self.__seed)
        self.__buffer : int = 0
        self.__buffered : int = 0
        self.__bits_consumed : int = 0

    @property
    def seed(self) -> int:
        """Returns the seed"""
        return self.__seed

    @property
    def bits_consumed(self) -> int:
        """Returns the number of bits handed out so far"""
        return self.__bits_consumed

    def _chunk(self) -> tuple[int, int]:
        """Returns the next raw chunk as (value, width)"""
        return int(self.__bit_generator.random_raw()), self.word_bits

    def next_int(self, k : int) -> int:
        """Returns the next k bits as a non-negative integer"""
        if k < 0:
            raise InvalidArgumentError(f"bit count must be non-negative, got {k}")
        if k == 0:
            return 0
        while self.__buffered < k:
            value, width = self._chunk()
            self.__buffer = (self.__buffer << width) | value
            self.__buffered += width
        shift = self.__buffered - k
        value = self.__buffer >> shift
        self.__buffer &= (1 << shift) - 1
        self.__buffered = shift
        self.__bits_consumed += k
        return value

    def next_bits(self, k : int) -> str:
        """Returns the next k bits as a string of '0' and '1'"""
        if k <= 0:
            self.next_int(k)
            return ""
        return format(self.next_int(k), f"0{k}b")

    def next_signs(self, count : int) -> np.ndarray:
        """Returns count signs, bit 0 maps to +1 and bit 1 to -1"""
        bits = np.frombuffer(self.next_bits(count).encode("ascii"), dtype=np.uint8) - ord("0")
        return (1 - 2 * bits.astype(np.int8)).astype(np.int8)

    def uniform_int(self, m : int) -> int:
        """Returns an integer uniform on [0, m) by rejection over ceil(log2 m) bits"""
        if m < 1:
            raise InvalidArgumentError(f"range must be positive, got {m}")
        if m == 1:
            return 0
        width = (m - 1).bit_length()
        rejections = 0
        while True:
            value = self.next_int(width)
            if value < m:
                return value
            rejections += 1
            if rejections >= Settings.rejection_cap:
                logging.error("uniform_int(%d) rejected %d draws in a row", m, rejections)
                raise RejectionLimitError(
                    f"uniform_int({m}) exceeded {Settings.rejection_cap} rejections, generator looks broken")

    def sample_k_subset(self, n : int, k : int) -> list[int]:
        """Returns a uniform k-subset of [1, n], sorted ascending

        Partial Fisher-Yates walk driven by Unif([n]), Unif([n-1]), ... with the
        swaps kept in a dictionary so a call costs O(k) memory.
        """
        if k < 1 or k > n:
            raise InvalidArgumentError(f"subset size must satisfy 1 <= K <= n, got K={k}, n={n}")
        swaps : dict[int, int] = {}
        chosen : list[int] = []
        for t in range(k):
            u = t + self.uniform_int(n - t)
            picked = swaps.get(u, u)
            swaps[u] = swaps.get(t, t)
            chosen.append(picked + 1)
        chosen.sort()
        return chosen

    def numpy_generator(self) -> np.random.Generator:
        """Returns a numpy Generator seeded from 64 bits of this source"""
        return np.random.Generator(np.random.PCG64(self.next_int(64)))

    def derive(self, *keys : int) -> "BitSource":
        """Returns an independent source keyed by (seed, keys) without consuming bits"""
        sequence = np.random.SeedSequence([self.__seed, *keys])
        return BitSource(int(sequence.generate_state(1, dtype=np.uint64)[0]))

class TapeBitSource(BitSource):
    """Bit source replaying a fixed tape, used for forced and exhaustive sweeps"""

    def __init__(self, tape : str) -> None:
        if any(bit not in "01" for bit in tape):
            raise InvalidArgumentError("tape must contain only '0' and '1'")
        super().__init__(0)
        self.__tape : str = tape
        self.__delivered : bool = False

    @property
    def tape(self) -> str:
        """Returns the tape"""
        return self.__tape

    def _chunk(self) -> tuple[int, int]:
        if self.__delivered or not self.__tape:
            raise TapeExhaustedError(f"bit tape of length {len(self.__tape)} exhausted")
        self.__delivered = True
        return int(self.__tape, 2), len(self.__tape)

    def derive(self, *keys : int) -> BitSource:
        raise InvalidArgumentError("a fixed tape cannot be split")
