"""Named families of permutation automorphisms.

Each constructor returns a plain WordPerm; ``REGISTRY`` maps CLI names to
zero-argument builders.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .endo import ad_compose
from .words import DomainError, WordPerm, embed, letter_perm, parse_cycles


class ConstructionError(DomainError):
    pass


@dataclass(frozen=True)
class PsiData:
    """A partition R_1..R_r of the letters and one letter permutation per block.

    Blocks hold 1-based letters; ``perms`` are level-1 WordPerms.
    """

    n: int
    blocks: tuple[frozenset, ...]
    perms: tuple[WordPerm, ...]

    def __post_init__(self):
        if len(self.blocks) < 2:
            raise ConstructionError("need at least two blocks")
        if len(self.perms) != len(self.blocks):
            raise ConstructionError("one permutation per block")
        letters = sorted(x for b in self.blocks for x in b)
        if letters != list(range(1, self.n + 1)) or any(not b for b in self.blocks):
            raise ConstructionError("blocks must partition 1..n into nonempty sets")
        for p in self.perms:
            if p.n != self.n or p.k != 1:
                raise ConstructionError("block permutations must be letter permutations")
        for i, si in enumerate(self.perms):
            for j, sj in enumerate(self.perms):
                q = si * sj.inverse()
                for m, block in enumerate(self.blocks):
                    if {q((x,))[0] for x in block} != set(block):
                        raise ConstructionError(
                            f"sigma_{i + 1} sigma_{j + 1}^-1 does not preserve R_{m + 1}",
                        )

    @classmethod
    def of(cls, n: int, blocks: Sequence[Sequence[int]], perms: Sequence[str]) -> "PsiData":
        """``perms`` in cycle notation on 1..n."""
        return cls(n, tuple(frozenset(b) for b in blocks),
                   tuple(parse_cycles(p, n, 1) for p in perms))

    @classmethod
    def from_json(cls, text: str) -> "PsiData":
        d = json.loads(text)
        return cls.of(d["n"], d["blocks"], d["perms"])

    def block_of(self, letter: int) -> int:
        for i, b in enumerate(self.blocks):
            if letter in b:
                return i
        raise ConstructionError(f"letter {letter} in no block")


def _apply(p: WordPerm, x: int) -> int:
    return p((x,))[0]


def psi(data: PsiData) -> WordPerm:
    """psi(a, b) = (a, sigma_i(b)) for a in R_i."""
    def f(w):
        a, b = w
        return a, _apply(data.perms[data.block_of(a)], b)
    return WordPerm.from_mapping(data.n, 2, f)


def psi_bar(data: PsiData) -> WordPerm:
    """Level-3 permutation of the inverse of the psi endomorphism."""
    inv = [p.inverse() for p in data.perms]

    def f(w):
        a, b, c = w
        i = data.block_of(a)
        b2 = _apply(inv[i], b)
        j = data.block_of(b2)
        kk = data.block_of(b)
        return a, b2, _apply(data.perms[j], _apply(inv[kk], c))
    return WordPerm.from_mapping(data.n, 3, f)


MT_DATA = dict(n=4, blocks=[[1, 2], [3, 4]], perms=["(2 3)", "(1 2 4 3)"])
Z2Z3_DATA = dict(n=3, blocks=[[1, 2], [3]], perms=["Id", "(1 2)"])
Z2Z3_PHI = "(1 2 3)"


def mt_data() -> PsiData:
    return PsiData.of(**MT_DATA)


def z2z3_data() -> PsiData:
    return PsiData.of(**Z2Z3_DATA)


def matsumoto_tomiyama() -> WordPerm:
    """The outer automorphism of O_4: Ad of the transposition (2 3) after psi."""
    return ad_compose(parse_cycles("(2 3)", 4, 1), psi(mt_data()))


def bogolubov(phi: WordPerm, k: int = 1) -> WordPerm:
    """Letter permutation phi acting on the first letter, as an element of level k."""
    if phi.k != 1:
        raise ConstructionError("bogolubov needs a letter permutation")
    return embed(phi, k)


def z2z3_generators() -> tuple[WordPerm, WordPerm]:
    """The order-3 Bogolubov and the order-2 psi automorphisms of O_3, both at level 2."""
    return bogolubov(parse_cycles(Z2Z3_PHI, 3, 1), 2), psi(z2z3_data())


REGISTRY = {
    "mt": matsumoto_tomiyama,
    "mt-psi": lambda: psi(mt_data()),
    "mt-psi-bar": lambda: psi_bar(mt_data()),
    "z2z3-phi": lambda: z2z3_generators()[0],
    "z2z3-psi": lambda: z2z3_generators()[1],
    "flip-flop": lambda: bogolubov(letter_perm([2, 1]), 1),
}
