# ============================================================================
# surface_atlas/words.py - Generator words and free-level conjugacy classes
# ============================================================================

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Iterator, List, Sequence, Tuple

from models import LabInputError
from surface_atlas.isometry import DiskIsometry
from surface_atlas.octagon import FundamentalOctagon, SIDES, inverse_index

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupWord:
    letters: Tuple[int, ...]
    cyclically_reduced: bool = False

    def __post_init__(self):
        for k in self.letters:
            if not isinstance(k, int) or not 0 <= k < SIDES:
                raise LabInputError(f"Invalid generator index {k!r}")
        if self.cyclically_reduced and not is_cyclically_reduced(self.letters):
            raise LabInputError(f"Word {self.letters} is flagged cyclically reduced but is not")

    @classmethod
    def of(cls, letters: Sequence[int]) -> "GroupWord":
        letters = tuple(int(k) for k in letters)
        return cls(letters, is_cyclically_reduced(letters))

    def __len__(self) -> int:
        return len(self.letters)

    def inverse(self) -> "GroupWord":
        return GroupWord.of(inverse_index(k) for k in reversed(self.letters))

    def power(self, n: int) -> "GroupWord":
        return GroupWord.of(self.letters * n)

    def label(self) -> str:
        return "-".join(str(k) for k in self.letters) if self.letters else "e"


# ---- reduction -------------------------------------------------------------

def is_reduced(letters: Sequence[int]) -> bool:
    return all(letters[i + 1] != inverse_index(letters[i]) for i in range(len(letters) - 1))


def is_cyclically_reduced(letters: Sequence[int]) -> bool:
    if not is_reduced(letters):
        return False
    return len(letters) < 2 or letters[-1] != inverse_index(letters[0])


def free_reduce(letters: Sequence[int]) -> Tuple[int, ...]:
    stack: List[int] = []
    for k in letters:
        if stack and stack[-1] == inverse_index(k):
            stack.pop()
        else:
            stack.append(k)
    return tuple(stack)


def cyclic_reduce(letters: Sequence[int]) -> Tuple[int, ...]:
    word = list(free_reduce(letters))
    while len(word) >= 2 and word[-1] == inverse_index(word[0]):
        word = word[1:-1]
    return tuple(word)


def canonical_form(letters: Sequence[int]) -> Tuple[int, ...]:
    """Lexicographically least rotation of the word or of its inverse"""
    word = cyclic_reduce(letters)
    if not word:
        return ()
    inverse = tuple(inverse_index(k) for k in reversed(word))
    rotations = [w[i:] + w[:i] for w in (word, inverse) for i in range(len(w))]
    return min(rotations)


# ---- isometries ------------------------------------------------------------

def word_to_isometry(w, atlas: FundamentalOctagon) -> DiskIsometry:
    """Product g_{w0} g_{w1} ... (rightmost letter acts first); empty word is the identity"""
    letters = w.letters if isinstance(w, GroupWord) else tuple(w)
    for k in letters:
        if isinstance(k, bool) or int(k) != k or not 0 <= k < SIDES:
            raise LabInputError(f"Invalid generator index {k!r} in word {letters}")
    letters = tuple(int(k) for k in letters)
    return reduce(lambda acc, k: acc @ atlas.generator(k), letters, DiskIsometry.identity())


# ---- enumeration -----------------------------------------------------------

def _cyclically_reduced_words(length: int) -> Iterator[Tuple[int, ...]]:
    def extend(prefix: List[int]):
        if len(prefix) == length:
            if length < 2 or prefix[-1] != inverse_index(prefix[0]):
                yield tuple(prefix)
            return
        for k in range(SIDES):
            if prefix and k == inverse_index(prefix[-1]):
                continue
            prefix.append(k)
            yield from extend(prefix)
            prefix.pop()

    yield from extend([])


def cyclically_reduced_count(length: int) -> int:
    """Number of cyclically reduced words of a given length in the free group of rank 4"""
    return 7 ** length + 1 + 3 * (1 + (-1) ** length)


def enumerate_classes(atlas: FundamentalOctagon, max_len: int) -> List[GroupWord]:
    """One cyclically reduced word per free conjugacy class up to inversion.

    Ordered by length, then lexicographically. Distinct words may still
    represent the same surface class; see distinct_geodesic_classes.
    """
    if max_len < 1:
        raise LabInputError("max_len must be at least 1")
    classes: List[GroupWord] = []
    for length in range(1, max_len + 1):
        found = [w for w in _cyclically_reduced_words(length) if canonical_form(w) == w]
        found.sort()
        classes.extend(GroupWord(w, True) for w in found)
        logger.debug(f"length {length}: {len(found)} classes")
    logger.info(f"Enumerated {len(classes)} free classes up to word length {max_len}")
    return classes
