"""Words over {1..n}, their ranks, and permutations of word sets.

Ranks are little-endian: the first letter varies fastest, so for n = 3 the
two-letter words 11, 21, 31, 12, ... receive ranks 1, 2, 3, 4, ...

Internally every permutation is a read-only numpy array of 0-based ranks;
the public ``rank``/``unrank`` functions and the cycle notation are 1-based.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: largest domain a dense permutation may have
MAX_DOMAIN = 1 << 31

Word = tuple  # tuple of letters in 1..n


class DomainError(ValueError):
    """A word or shape lies outside the admissible range."""


class CycleParseError(ValueError):
    """Malformed cycle notation; ``position`` is the offending offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


@dataclass(frozen=True)
class Shape:
    n: int
    k: int

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"alphabet size must be >= 2, got {self.n}")
        if self.k < 1:
            raise DomainError(f"word length must be >= 1, got {self.k}")
        if self.n ** self.k > MAX_DOMAIN:
            raise DomainError(f"n^k = {self.n}^{self.k} exceeds the index range")

    @property
    def size(self) -> int:
        return self.n ** self.k

    @property
    def states(self) -> int:
        """Number of words of length k-1 (tree vertices, transducer states)."""
        return self.n ** (self.k - 1)


def rank(word: Sequence[int], n: int) -> int:
    """1-based little-endian rank of ``word``."""
    r = 0
    for j, a in enumerate(word):
        if not 1 <= a <= n:
            raise DomainError(f"letter {a} at position {j + 1} not in 1..{n}")
        r += (a - 1) * n ** j
    return r + 1


def unrank(r: int, n: int, length: int) -> Word:
    if not 1 <= r <= n ** length:
        raise DomainError(f"rank {r} not in 1..{n ** length}")
    r -= 1
    out = []
    for _ in range(length):
        r, a = divmod(r, n)
        out.append(a + 1)
    return tuple(out)


def all_words(n: int, length: int) -> list[Word]:
    return [unrank(r, n, length) for r in range(1, n ** length + 1)]


class WordPerm:
    """A permutation of W_n^k stored as a dense array of 0-based ranks.

    ``images[r]`` is the 0-based rank of the image of the word with 0-based
    rank ``r``.  Instances are immutable and hashable.
    """

    __slots__ = ("n", "k", "images", "_hash")

    def __init__(self, n: int, k: int, images, check: bool = True):
        arr = np.array(images, dtype=np.int64)
        if check:
            Shape(n, k)
            if arr.shape != (n ** k,):
                raise DomainError(f"expected {n ** k} images, got shape {arr.shape}")
            seen = np.zeros(n ** k, dtype=bool)
            if arr.size and (arr.min() < 0 or arr.max() >= n ** k):
                raise DomainError("image rank out of range")
            seen[arr] = True
            if not seen.all():
                raise DomainError("images do not form a bijection")
        arr.setflags(write=False)
        self.n = n
        self.k = k
        self.images = arr
        self._hash = None

    # construction helpers

    @classmethod
    def identity(cls, n: int, k: int) -> "WordPerm":
        return cls(n, k, np.arange(n ** k), check=False)

    @classmethod
    def from_mapping(cls, n: int, k: int, mapping) -> "WordPerm":
        """Build from a callable or dict taking and returning letter tuples."""
        f = mapping.__getitem__ if isinstance(mapping, dict) else mapping
        return cls(n, k, [rank(f(w), n) - 1 for w in all_words(n, k)])

    @classmethod
    def from_images(cls, n: int, k: int, images_1based: Iterable[int]) -> "WordPerm":
        return cls(n, k, [r - 1 for r in images_1based])

    @property
    def shape(self) -> Shape:
        return Shape(self.n, self.k)

    @property
    def level(self) -> int:
        return self.k

    def __len__(self):
        return self.images.size

    def __call__(self, word: Sequence[int]) -> Word:
        if len(word) != self.k:
            raise DomainError(f"word of length {len(word)} applied to level {self.k}")
        return unrank(int(self.images[rank(word, self.n) - 1]) + 1, self.n, self.k)

    def image_rank(self, r: int) -> int:
        """1-based rank of the image of the word of 1-based rank ``r``."""
        return int(self.images[r - 1]) + 1

    def _check_same(self, other: "WordPerm"):
        if not isinstance(other, WordPerm):
            return NotImplemented
        if (self.n, self.k) != (other.n, other.k):
            raise DomainError(
                f"shape mismatch: ({self.n},{self.k}) vs ({other.n},{other.k})")

    def __mul__(self, other: "WordPerm") -> "WordPerm":
        # (p * q)(a) = p(q(a))
        self._check_same(other)
        return WordPerm(self.n, self.k, self.images[other.images], check=False)

    def inverse(self) -> "WordPerm":
        inv = np.empty_like(self.images)
        inv[self.images] = np.arange(self.images.size)
        return WordPerm(self.n, self.k, inv, check=False)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.images, np.arange(self.images.size)))

    def __eq__(self, other):
        if not isinstance(other, WordPerm):
            return NotImplemented
        return (self.n, self.k) == (other.n, other.k) and np.array_equal(
            self.images, other.images)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, self.k, self.images.tobytes()))
        return self._hash

    def __repr__(self):
        return f"WordPerm(n={self.n}, k={self.k}, {format_cycles(self)!r})"

    def cycles(self) -> list[tuple[int, ...]]:
        """Non-trivial cycles, 1-based, each starting at its smallest point."""
        return _cycles_of(self.images.tolist())


# level permutations carry the same data; the level is ``k``
LevelPerm = WordPerm


def compose(p: WordPerm, q: WordPerm) -> WordPerm:
    """compose(p, q)(a) = p(q(a))."""
    return p * q


def invert(p: WordPerm) -> WordPerm:
    return p.inverse()


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def _tokens(body: str, start: int, size: int):
    """Entries of one cycle body with their positions.

    Entries are separated by commas or blanks; below ten points a run of
    digits such as ``1243`` also reads as one point per digit.
    """
    out = []
    for m in re.finditer(r"[^,\s]+", body):
        tok = m.group()
        if size < 10 and len(tok) > 1 and tok.isdigit():
            out.extend((ch, start + m.start() + i) for i, ch in enumerate(tok))
        else:
            out.append((tok, start + m.start()))
    if not out:
        raise CycleParseError("empty cycle", start)
    return out


def parse_cycle_images(text: str, size: int) -> list[int]:
    """Parse cycle notation on {1..size} into a 0-based image list."""
    img = list(range(size))
    stripped = text.strip()
    if stripped in ("Id", "id", "()", ""):
        return img
    pos = 0
    seen = set()
    s = text
    while pos < len(s):
        if s[pos].isspace():
            pos += 1
            continue
        m = _CYCLE_RE.match(s, pos)
        if not m:
            if s[pos] == "(":
                raise CycleParseError("unclosed or nested cycle", pos)
            raise CycleParseError(f"expected '(' but found {s[pos]!r}", pos)
        body_start = m.start(1)
        entries = []
        for tok, at in _tokens(m.group(1), body_start, size):
            if not tok.isdigit():
                raise CycleParseError(f"bad entry {tok!r}", at)
            v = int(tok)
            if not 1 <= v <= size:
                raise CycleParseError(f"point {v} not in 1..{size}", at)
            if v in seen:
                raise CycleParseError(f"point {v} repeated", at)
            seen.add(v)
            entries.append(v - 1)
        for a, b in zip(entries, entries[1:] + entries[:1]):
            img[a] = b
        pos = m.end()
    return img


def parse_cycles(text: str, n: int, k: int) -> WordPerm:
    """Parse e.g. ``"(3, 7, 14, 10, 6, 4)(5, 13, 9)"`` as a permutation of W_n^k."""
    return WordPerm(n, k, parse_cycle_images(text, n ** k), check=False)


def _format(cyc) -> str:
    if not cyc:
        return "Id"
    return "".join("(" + ", ".join(map(str, c)) + ")" for c in cyc)


def format_cycles(p: WordPerm) -> str:
    return _format(p.cycles())


def canonical_cycles(text: str, size: int) -> str:
    """Normalise cycle notation so each cycle starts at its smallest point."""
    return _format(_cycles_of(parse_cycle_images(text, size)))


def _cycles_of(img: Sequence[int]) -> list[tuple[int, ...]]:
    seen = [False] * len(img)
    out = []
    for s in range(len(img)):
        if seen[s] or img[s] == s:
            seen[s] = True
            continue
        c, x = [], s
        while not seen[x]:
            seen[x] = True
            c.append(x + 1)
            x = img[x]
        out.append(tuple(c))
    return out


def window_apply(images: np.ndarray, ranks: np.ndarray, n: int, k: int, j: int) -> np.ndarray:
    """Apply a level-k permutation to letters j+1..j+k of the words ``ranks``.

    ``images`` may be 1-D (one permutation) or 2-D with one row per batch
    member, in which case ``ranks`` must have the same leading dimension.
    """
    p = n ** j
    q = n ** k
    lo = ranks % p
    w = (ranks // p) % q
    hi = ranks // (p * q)
    if images.ndim == 1:
        mid = images[w]
    else:
        mid = np.take_along_axis(images, w, axis=1)
    return lo + p * (mid + q * hi)


def shift_embed(sigma: WordPerm, j: int, level: int) -> WordPerm:
    """Act by ``sigma`` on letters j+1..j+k of words of length ``level``."""
    if j < 0 or level < j + sigma.k:
        raise DomainError(f"cannot place level {sigma.k} at offset {j} in level {level}")
    Shape(sigma.n, level)
    r = np.arange(sigma.n ** level, dtype=np.int64)
    return WordPerm(sigma.n, level,
                    window_apply(sigma.images, r, sigma.n, sigma.k, j), check=False)


def embed(sigma: WordPerm, level: int) -> WordPerm:
    """Act by ``sigma`` on the first k letters of words of length ``level``."""
    if level < sigma.k:
        raise DomainError(f"cannot embed level {sigma.k} into level {level}")
    return shift_embed(sigma, 0, level)


def letter_perm(images_1based: Sequence[int]) -> WordPerm:
    """Permutation of the alphabet {1..n} given as a list of images."""
    return WordPerm.from_images(len(images_1based), 1, images_1based)
