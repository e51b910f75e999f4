"""The Dyck and Motzkin bracket monoids.

Words are tuples of branch indices.  For an alphabet with ``m`` bracket
pairs and ``units`` unit symbols the encoding is

* ``1..m``            left brackets  alpha_1 .. alpha_m
* ``m+1..2m``         right brackets beta_1 .. beta_m
* ``2m+1..2m+units``  unit symbols   u_1 .. u_units

The alpha/beta spelling ("a1,b2,u1") is only a formatting layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import networkx as nx

Word = tuple[int, ...]

# enumeration is refused beyond this many candidate words (4**14)
MAX_ENUMERATION = 4**14


@dataclass(frozen=True)
class Alphabet:
    m: int
    units: int = 0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"need m >= 2 bracket pairs, got {self.m}")
        if self.units < 0:
            raise ValueError(f"units must be >= 0, got {self.units}")

    @property
    def size(self) -> int:
        return 2 * self.m + self.units

    @property
    def symbols(self) -> range:
        return range(1, self.size + 1)

    def is_left(self, s: int) -> bool:
        return 1 <= s <= self.m

    def is_right(self, s: int) -> bool:
        return self.m < s <= 2 * self.m

    def is_unit(self, s: int) -> bool:
        return 2 * self.m < s <= self.size

    def bracket(self, s: int) -> int:
        """Bracket number 1..m of a left or right symbol."""
        if self.is_left(s):
            return s
        if self.is_right(s):
            return s - self.m
        raise ValueError(f"symbol {s} is not a bracket")

    def check(self, word: Iterable[int]) -> Word:
        word = tuple(int(s) for s in word)
        for s in word:
            if not 1 <= s <= self.size:
                raise ValueError(f"symbol {s} outside alphabet of size {self.size}")
        return word

    def format_symbol(self, s: int) -> str:
        if self.is_left(s):
            return f"a{s}"
        if self.is_right(s):
            return f"b{s - self.m}"
        if self.is_unit(s):
            return f"u{s - 2 * self.m}"
        raise ValueError(f"symbol {s} outside alphabet")

    def format_word(self, word: Iterable[int]) -> str:
        return ",".join(self.format_symbol(s) for s in word)

    def parse_symbol(self, token: str) -> int:
        token = token.strip()
        if token[:1] in ("a", "b", "u"):
            k = int(token[1:])
            s = {"a": k, "b": self.m + k, "u": 2 * self.m + k}[token[0]]
            limit = self.units if token[0] == "u" else self.m
            if not 1 <= k <= limit:
                raise ValueError(f"bad symbol {token!r} for m={self.m}, units={self.units}")
            return s
        return self.check([int(token)])[0]

    def parse_word(self, text: str) -> Word:
        """Parse ``"a1,b2"`` or branch indices ``"1,4"``; empty string is the empty word."""
        text = text.strip()
        if not text:
            return ()
        return tuple(self.parse_symbol(t) for t in text.split(","))


class _Zero:
    """The absorbing zero of the monoid."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ZERO"

    def __reduce__(self):
        return (_Zero, ())


ZERO = _Zero()


@dataclass(frozen=True)
class ReducedForm:
    """Nonzero normal form: right brackets ``rights`` followed by left brackets ``lefts``.

    Entries are bracket numbers 1..m.  ``ReducedForm((), ())`` is the unit.
    """

    rights: tuple[int, ...] = ()
    lefts: tuple[int, ...] = ()

    @property
    def is_unit(self) -> bool:
        return not self.rights and not self.lefts

    def __str__(self):
        if self.is_unit:
            return "1"
        return "".join(f"b{i}" for i in self.rights) + "".join(f"a{i}" for i in self.lefts)


UNIT = ReducedForm()


def multiply(u: ReducedForm | _Zero, v: ReducedForm | _Zero) -> ReducedForm | _Zero:
    """Monoid product of two reduced forms."""
    if u is ZERO or v is ZERO:
        return ZERO
    lefts, rights = u.lefts, v.rights
    k = min(len(lefts), len(rights))
    for t in range(k):
        if lefts[-1 - t] != rights[t]:
            return ZERO
    if len(lefts) > k:
        return ReducedForm(u.rights, lefts[: len(lefts) - k] + v.lefts)
    return ReducedForm(u.rights + rights[k:], v.lefts)


def reduce(word: Sequence[int], alphabet: Alphabet) -> ReducedForm | _Zero:
    """Reduce a word in the bracket monoid; units act as the identity."""
    m = alphabet.m
    rights: list[int] = []
    stack: list[int] = []
    for s in alphabet.check(word):
        if s <= m:
            stack.append(s)
        elif s <= 2 * m:
            k = s - m
            if stack:
                if stack[-1] != k:
                    return ZERO
                stack.pop()
            else:
                rights.append(k)
    return ReducedForm(tuple(rights), tuple(stack))


def is_admissible(word: Sequence[int], alphabet: Alphabet) -> bool:
    return reduce(word, alphabet) is not ZERO


def count_words(alphabet: Alphabet, n: int) -> int:
    """Number of admissible words of length ``n``.

    Dynamic programme over the height of the unmatched-left stack; which
    brackets sit on the stack never changes the number of continuations.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    m, u = alphabet.m, alphabet.units
    counts = [1]
    for _ in range(n):
        nxt = [0] * (len(counts) + 1)
        for h, c in enumerate(counts):
            if not c:
                continue
            nxt[h + 1] += m * c
            if h:
                nxt[h - 1] += c
            else:
                nxt[0] += m * c  # unmatched right brackets are free at height 0
            nxt[h] += u * c
        counts = nxt
    return sum(counts)


def enumerate_words(alphabet: Alphabet, n: int) -> list[Word]:
    """All admissible words of length ``n`` in lexicographic order of branch index."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if alphabet.size**n > MAX_ENUMERATION:
        raise ValueError(f"refusing to enumerate {alphabet.size}**{n} words")
    m = alphabet.m
    out: list[Word] = []
    word: list[int] = []
    stack: list[int] = []

    def extend(depth):
        if depth == n:
            out.append(tuple(word))
            return
        for s in alphabet.symbols:
            popped = None
            if m < s <= 2 * m and stack:
                if stack[-1] != s - m:
                    continue
                popped = stack.pop()
            elif s <= m:
                stack.append(s)
            word.append(s)
            extend(depth + 1)
            word.pop()
            if s <= m:
                stack.pop()
            elif popped is not None:
                stack.append(popped)

    extend(0)
    return out


def brute_force_words(alphabet: Alphabet, n: int) -> list[Word]:
    """Filter every word of length ``n`` through ``is_admissible``; slow oracle."""
    return [w for w in product(alphabet.symbols, repeat=n) if is_admissible(w, alphabet)]


def follower_state(word: Sequence[int], alphabet: Alphabet) -> tuple[int, ...] | None:
    """Unmatched-left stack of ``word`` (it fixes the follower set), or None if inadmissible."""
    r = reduce(word, alphabet)
    if r is ZERO:
        return None
    return r.lefts


def build_follower_graph(alphabet: Alphabet, depth: int) -> nx.MultiDiGraph:
    """Follower-set graph truncated to stacks of length <= ``depth``.

    Vertices are stacks (tuples over 1..m).  Edges carry a ``label`` (the
    branch index read).  Vertices at the truncation depth have
    ``truncated=True`` and no push edges.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    m = alphabet.m
    G = nx.MultiDiGraph()
    for h in range(depth + 1):
        for stack in product(range(1, m + 1), repeat=h):
            G.add_node(stack, truncated=(h == depth))
    for stack in list(G.nodes):
        if len(stack) < depth:
            for i in range(1, m + 1):
                G.add_edge(stack, stack + (i,), label=i)
        if stack:
            G.add_edge(stack, stack[:-1], label=stack[-1] + m)
        else:
            for i in range(m + 1, 2 * m + 1):
                G.add_edge(stack, stack, label=i)
        for s in range(2 * m + 1, alphabet.size + 1):
            G.add_edge(stack, stack, label=s)
    return G


def follow(G: nx.MultiDiGraph, vertex, label: int):
    """Target of the edge labelled ``label`` out of ``vertex``, or None."""
    for _, v, lab in G.out_edges(vertex, data="label"):
        if lab == label:
            return v
    return None


def vertex_name(stack: Sequence[int]) -> str:
    if not stack:
        return "e"
    sep = "" if max(stack) < 10 else "_"
    return sep.join(str(i) for i in stack)


def follower_graph_dot(G: nx.MultiDiGraph) -> str:
    """DOT text with stable vertex names and sorted lines."""
    lines = ["digraph follower {"]
    for v in sorted(G.nodes, key=lambda s: (len(s), s)):
        attr = ' [shape=box, label="%s*"]' % vertex_name(v) if G.nodes[v].get("truncated") else ""
        lines.append(f'  "{vertex_name(v)}"{attr};')
    edges = sorted(
        (vertex_name(u), vertex_name(v), lab) for u, v, lab in G.edges(data="label")
    )
    for u, v, lab in edges:
        lines.append(f'  "{u}" -> "{v}" [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Window:
    """Finite block of a symbol sequence; ``symbols[0]`` sits at index ``start``."""

    symbols: Word
    start: int = 0

    @property
    def end(self) -> int:
        return self.start + len(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __getitem__(self, i: int) -> int:
        """Symbol at sequence index ``i`` (not list position)."""
        if not self.start <= i < self.end:
            raise IndexError(i)
        return self.symbols[i - self.start]

    def to_json(self) -> dict:
        return {"start": self.start, "indices": list(range(self.start, self.end)),
                "symbols": list(self.symbols)}


def _as_window(w) -> Window:
    return w if isinstance(w, Window) else Window(tuple(w), 0)


def height_increment(s: int, alphabet: Alphabet) -> int:
    if alphabet.is_left(s):
        return 1
    if alphabet.is_right(s):
        return -1
    return 0


@dataclass(frozen=True)
class HeightProfile:
    """Heights ``H_i`` for ``i`` in ``[start, start + len(values))``."""

    values: tuple[int, ...]
    start: int

    def __getitem__(self, i: int) -> int:
        j = i - self.start
        if not 0 <= j < len(self.values):
            raise IndexError(i)
        return self.values[j]

    @property
    def indices(self) -> range:
        return range(self.start, self.start + len(self.values))


def height_profile(w, alphabet: Alphabet, anchor: int = 0) -> HeightProfile:
    """Running bracket balance of a window with ``H_anchor = 0``.

    ``H_{i+1} - H_i`` is +1 for a left bracket at ``i``, -1 for a right
    bracket and 0 for a unit, on both sides of the anchor.
    """
    w = _as_window(w)
    alphabet.check(w.symbols)
    if not w.start <= anchor <= w.end:
        raise ValueError(f"anchor {anchor} outside window [{w.start}, {w.end}]")
    partial = [0]
    for s in w.symbols:
        partial.append(partial[-1] + height_increment(s, alphabet))
    offset = partial[anchor - w.start]
    return HeightProfile(tuple(h - offset for h in partial), w.start)


def window_closure_check(w, side: str, alphabet: Alphabet) -> bool:
    """Whether every right (side "alpha") or left (side "beta") bracket closes inside the window.

    Side alpha: a right bracket at ``i`` needs ``H_{i-k+1} = H_{i+1}`` for some
    ``k >= 1`` inside the window.  Side beta: a left bracket at ``i`` needs
    ``H_{i+k} = H_i`` for some ``k >= 1``.
    """
    w = _as_window(w)
    H = height_profile(w, alphabet, anchor=w.start).values
    n = len(w.symbols)
    if side == "alpha":
        low = H[0]
        for t, s in enumerate(w.symbols):
            low = min(low, H[t])
            if alphabet.is_right(s) and not low <= H[t + 1]:
                return False
        return True
    if side == "beta":
        low = H[n]
        for t in range(n - 1, -1, -1):
            low = min(low, H[t + 1])
            if alphabet.is_left(w.symbols[t]) and not low <= H[t]:
                return False
        return True
    raise ValueError(f"side must be 'alpha' or 'beta', got {side!r}")


def flip(s: int, m: int) -> int:
    """Swap alpha_i and beta_i."""
    return s + m if s <= m else s - m


def rho_star(word: Sequence[int], alphabet: Alphabet) -> Word:
    """Reverse the word and swap every bracket with its partner."""
    if alphabet.units:
        raise ValueError("rho_star is defined on the pure Dyck alphabet only")
    word = alphabet.check(word)
    return tuple(flip(s, alphabet.m) for s in reversed(word))


def make_periodic_word(lam: Sequence[int], j: int, alphabet: Alphabet) -> Word:
    """``(lam + rho_star(lam)) * j``: an admissible word with zero net height."""
    if j < 1:
        raise ValueError("j must be >= 1")
    lam = alphabet.check(lam)
    if not is_admissible(lam, alphabet):
        raise ValueError("seed word is not admissible")
    return (lam + rho_star(lam, alphabet)) * j


def log_count_rate(alphabet: Alphabet, n: int) -> float:
    return math.log(count_words(alphabet, n)) / n
