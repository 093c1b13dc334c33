"""Aho-Corasick automaton over token sequences.

Patterns are tuples of tokens, so a match is always a contiguous run of whole
tokens; partial-token hits are impossible by construction.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence


class TokenAutomaton:
    def __init__(self, patterns: Iterable[Sequence[str]] = ()) -> None:
        self._goto: list[dict[str, int]] = [{}]
        self._fail: list[int] = [0]
        self._out: list[list[int]] = [[]]
        self.patterns: list[tuple[str, ...]] = []
        self._built = False
        for p in patterns:
            self.add(p)
        self.build()

    def add(self, pattern: Sequence[str]) -> None:
        pattern = tuple(pattern)
        if not pattern:
            raise ValueError("empty pattern")
        node = 0
        for tok in pattern:
            nxt = self._goto[node].get(tok)
            if nxt is None:
                nxt = len(self._goto)
                self._goto.append({})
                self._fail.append(0)
                self._out.append([])
                self._goto[node][tok] = nxt
            node = nxt
        self._out[node].append(len(self.patterns))
        self.patterns.append(pattern)
        self._built = False

    def build(self) -> None:
        queue = deque()
        for child in self._goto[0].values():
            self._fail[child] = 0
            queue.append(child)
        while queue:
            node = queue.popleft()
            for tok, child in self._goto[node].items():
                queue.append(child)
                f = self._fail[node]
                while f and tok not in self._goto[f]:
                    f = self._fail[f]
                target = self._goto[f].get(tok, 0)
                self._fail[child] = target if target != child else 0
                self._out[child] = self._out[child] + self._out[self._fail[child]]
        self._built = True

    def _step(self, node: int, tok: str) -> int:
        while node and tok not in self._goto[node]:
            node = self._fail[node]
        return self._goto[node].get(tok, 0)

    def finditer(self, tokens: Sequence[str]):
        """Yield ``(start, pattern_index)`` for every occurrence."""
        if not self._built:
            self.build()
        node = 0
        for i, tok in enumerate(tokens):
            node = self._step(node, tok)
            for idx in self._out[node]:
                yield i - len(self.patterns[idx]) + 1, idx

    def search(self, tokens: Sequence[str]) -> bool:
        if not self._built:
            self.build()
        node = 0
        for tok in tokens:
            node = self._step(node, tok)
            if self._out[node]:
                return True
        return False
