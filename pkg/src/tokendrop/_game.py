"""Per-node logic of the proposal algorithm for token dropping.

The same core runs standalone (one engine run per game) and embedded as a
sub-protocol inside the phases of the orientation and assignment programs.
A node only knows, per neighbor, the set of links (edge keys) on which that
neighbor is its parent or child.  For graphs there is one link per
neighbor; for hypergraphs a link is a hyperedge and a pair of servers may
share several.

Messages are tuples of items; each item is a tuple whose first entry is a
tag:

    ("HAVE",)       sender now holds a token (parent -> children)
    ("GONE",)       sender no longer holds a token (parent -> children)
    ("REQ",)        request for the sender's parent's token
    ("TOKEN", key)  the token, passed over link ``key`` (consumes it)
    ("CONS", key)   link ``key`` was consumed by a pass to someone else
    ("BYE",)        sender left the game (embedded mode only)
"""
from __future__ import annotations

from dataclasses import dataclass, field

HAVE = ("HAVE",)
GONE = ("GONE",)
REQ = ("REQ",)
BYE = ("BYE",)


@dataclass
class GameState:
    has_token: bool
    origin: bool
    parents: dict[int, set] = field(default_factory=dict)
    children: dict[int, set] = field(default_factory=dict)
    parent_has: dict[int, bool] = field(default_factory=dict)
    outstanding: int | None = None
    events: list[tuple] = field(default_factory=list)
    done: bool = False
    done_round: int | None = None

    def copy(self) -> "GameState":
        return GameState(
            self.has_token,
            self.origin,
            {k: set(v) for k, v in self.parents.items()},
            {k: set(v) for k, v in self.children.items()},
            dict(self.parent_has),
            self.outstanding,
            list(self.events),
            self.done,
            self.done_round,
        )


def _add(out: dict, port: int, item: tuple) -> None:
    out.setdefault(port, []).append(item)


def _forget_parent_link(gs: GameState, p: int, key) -> None:
    keys = gs.parents.get(p)
    if keys is None:
        return
    keys.discard(key)
    if not keys:
        _forget_parent(gs, p)


def _forget_parent(gs: GameState, p: int) -> None:
    gs.parents.pop(p, None)
    gs.parent_has.pop(p, None)
    if gs.outstanding == p:
        gs.outstanding = None


def _drop_port(gs: GameState, w: int) -> None:
    _forget_parent(gs, w)
    gs.children.pop(w, None)


def _check_done(gs: GameState, r: int, out: dict, bye: bool) -> None:
    if gs.done:
        return
    if (gs.has_token and not gs.children) or (not gs.has_token and not gs.parents):
        gs.done = True
        gs.done_round = r
        if bye:
            for w in sorted(set(gs.parents) | set(gs.children)):
                _add(out, w, BYE)


def _maybe_request(gs: GameState, out: dict) -> None:
    if gs.done or gs.has_token or gs.outstanding is not None:
        return
    cands = [p for p in gs.parents if gs.parent_has.get(p)]
    if cands:
        p = min(cands)
        _add(out, p, REQ)
        gs.outstanding = p


def game_init(gs: GameState, bye: bool = False) -> dict:
    """Round-0 output: token holders announce themselves to their children."""
    out: dict = {}
    if gs.has_token:
        for c in sorted(gs.children):
            _add(out, c, HAVE)
    _check_done(gs, 0, out, bye)
    return out


def game_step(gs: GameState, r: int, inbox, lost=(), bye: bool = False):
    """Advance ``gs`` (mutated in place) by one round.

    Returns ``(out, passed)`` where ``out`` maps neighbor -> list of items and
    ``passed`` is ``(child, key)`` for a token passed this round, else None.
    """
    out: dict = {}
    if gs.done:
        return out, None
    had_token = gs.has_token
    for w in lost:
        _drop_port(gs, w)
    requests = []
    for sender, items in inbox:
        for item in items:
            tag = item[0]
            if tag == "TOKEN":
                key = item[1]
                gs.has_token = True
                gs.events.append(("in", sender, key, r))
                _forget_parent_link(gs, sender, key)
                if sender in gs.parent_has:
                    gs.parent_has[sender] = False
                if gs.outstanding == sender:
                    gs.outstanding = None
            elif tag == "CONS":
                _forget_parent_link(gs, sender, item[1])
            elif tag == "HAVE":
                if sender in gs.parents:
                    gs.parent_has[sender] = True
            elif tag == "GONE":
                if sender in gs.parents:
                    gs.parent_has[sender] = False
                if gs.outstanding == sender:
                    gs.outstanding = None
            elif tag == "REQ":
                if sender in gs.children:
                    requests.append(sender)
            elif tag == "BYE":
                _drop_port(gs, sender)

    passed = None
    # Requests only count if the token was already announced before this round.
    if had_token and gs.has_token and requests:
        c = min(requests)
        key = min(gs.children[c])
        _add(out, c, ("TOKEN", key))
        gs.has_token = False
        gs.events.append(("out", c, key, r))
        passed = (c, key)
        for w in sorted(gs.children):
            keys = gs.children[w]
            if key in keys:
                keys.discard(key)
                if w != c:
                    _add(out, w, ("CONS", key))
            if not keys:
                del gs.children[w]
        for w in sorted(gs.children):
            if w != c:
                _add(out, w, GONE)
    elif gs.has_token and not had_token:
        for w in sorted(gs.children):
            _add(out, w, HAVE)

    _check_done(gs, r, out, bye)
    _maybe_request(gs, out)
    return out, passed


def pack(out: dict) -> dict:
    return {w: tuple(items) for w, items in out.items()}


def node_output(gs: GameState) -> "tuple":
    """Pair up arrivals and departures into the node-centered form.

    Returns ``(origin_out, through, dest_in, stays)``; links are
    ``(neighbor, key)`` pairs.
    """
    origin_out = None
    through = []
    dest_in = None
    stays = False
    cur = "origin" if gs.origin else None
    for ev in gs.events:
        link = (ev[1], ev[2])
        if ev[0] == "in":
            cur = link
        else:
            if cur == "origin":
                origin_out = link
            else:
                through.append((cur, link))
            cur = None
    if gs.has_token:
        if cur == "origin":
            stays = True
        else:
            dest_in = cur
    return origin_out, tuple(through), dest_in, stays
