"""Incremental factor oracle automaton.

States 0..m where state i is reached after learning i symbols. Every learned
symbol adds the factor link (i-1, symbol) -> i; the suffix chain of i-1 then
receives extra factor links into i until a state already knowing the symbol
is found (its target becomes the suffix link of i) or the chain runs out
(suffix link 0). Construction is amortized linear in the sequence length.

The automaton accepts every factor of the learned sequence, plus some extra
words; callers that need exactness must check candidates another way.
"""

from __future__ import annotations

import json

from .errors import RangeError


class FactorOracle:
    def __init__(self, seq=()):
        self.m = 0
        self.seq: list = []
        self.delta: dict[tuple[int, object], int] = {}
        self.S: list[int] = [-1]
        self.chain_steps = 0  # suffix-chain visits, for linearity regression
        for sym in seq:
            self.add(sym)

    def add(self, sym) -> int:
        """Learn one symbol; returns the new state index."""
        i = self.m + 1
        self.delta[(i - 1, sym)] = i
        self.S.append(0)
        k = self.S[i - 1]
        while k > -1 and (k, sym) not in self.delta:
            self.delta[(k, sym)] = i
            k = self.S[k]
            self.chain_steps += 1
        self.S[i] = 0 if k == -1 else self.delta[(k, sym)]
        self.seq.append(sym)
        self.m = i
        return i

    def _check_state(self, state: int):
        if not 0 <= state <= self.m:
            raise RangeError(f"state {state} outside [0, {self.m}]")

    def transitions(self, state: int) -> dict:
        """Outgoing factor links from state, as {symbol: target}."""
        self._check_state(state)
        return {sym: to for (frm, sym), to in self.delta.items() if frm == state}

    def step(self, state: int, sym) -> int | None:
        self._check_state(state)
        return self.delta.get((state, sym))

    def suffix(self, state: int) -> int:
        self._check_state(state)
        return self.S[state]

    def is_factor(self, word) -> bool:
        state = 0
        for sym in word:
            nxt = self.delta.get((state, sym))
            if nxt is None:
                return False
            state = nxt
        return True

    def to_dot(self) -> str:
        lines = ["digraph factor_oracle {", "  rankdir=LR;"]
        for i in range(self.m + 1):
            lines.append(f"  {i} [shape=circle];")
        for (frm, sym), to in sorted(self.delta.items(), key=lambda kv: (kv[0][0], str(kv[0][1]))):
            lines.append(f'  {frm} -> {to} [label="{sym}"];')
        for i in range(1, self.m + 1):
            lines.append(f"  {i} -> {self.S[i]} [style=dashed];")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "m": self.m,
            "delta": sorted(
                ([frm, sym, to] for (frm, sym), to in self.delta.items()),
                key=lambda row: (row[0], str(row[1])),
            ),
            "suffix": list(self.S),
        }
        return json.dumps(payload)

    def __eq__(self, other):
        if not isinstance(other, FactorOracle):
            return NotImplemented
        return self.delta == other.delta and self.S == other.S

    def __repr__(self):
        return f"FactorOracle(m={self.m}, links={len(self.delta)})"


def build(seq) -> FactorOracle:
    return FactorOracle(seq)


def brute_factors(seq) -> set:
    """All factors of seq as tuples, by enumeration. Test oracle only."""
    s = tuple(seq)
    out = {()}
    for i in range(len(s)):
        for j in range(i + 1, len(s) + 1):
            out.add(s[i:j])
    return out
