"""Continuous maps between stream spaces as finite-state transducers.

A transducer reads one input letter per step and emits a finite (possibly
empty) output word.  Machines are total (every state handles every
letter) and productive: no reachable cycle is silent, so every infinite
input yields an infinite output.  Every such machine denotes a
continuous map, and the class is closed under composition.

Machines are normalized on construction (states renumbered in
breadth-first order from the initial state, unreachable states dropped),
so structural equality is the meaningful comparison and codecs are
byte stable.

Three set-level operations are provided.  `apply` evaluates the map on
an ultimately periodic point exactly, by cycle detection.  `preimage`
computes the exact preimage of a clopen set, always.  `image` computes
the exact forward image of a clopen set when that image is clopen and
certifiable within a depth bound; it refuses (UndecidedImageError)
rather than guess, so a returned answer is always correct.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import DocumentError, EmptySetError, SpaceMismatchError, UndecidedImageError
from .space import ClopenSet, Space, UpPoint, Word, least_point, parse_clopen, parse_word, render_clopen, render_word

__all__ = [
    "Transducer",
    "identity_map",
    "compose",
    "apply",
    "preimage",
    "image",
    "in_map",
    "out_map",
    "drop_first",
    "letter_double",
    "parity_merge",
    "const_zero",
    "encode_transducer",
    "decode_transducer",
    "encode_map",
    "decode_map",
]

_COVER_BUDGET = 20000


@dataclass(frozen=True)
class Transducer:
    """A deterministic, total, productive finite-state transducer.

    steps[state][letter] == (next_state, output_word).
    """

    input_space: Space
    output_space: Space
    init: int
    steps: tuple[tuple[tuple[int, Word], ...], ...]

    def __post_init__(self):
        k_in = self.input_space.alphabet_size
        n = len(self.steps)
        if not (0 <= self.init < n):
            raise ValueError("initial state out of range")
        for row in self.steps:
            if len(row) != k_in:
                raise ValueError("every state must handle every input letter")
            for nxt, out in row:
                if not (0 <= nxt < n):
                    raise ValueError("transition target out of range")
                self.output_space.check_word(out)
        # Productivity: the silent-edge subgraph must be acyclic.
        color = [0] * n  # 0 unvisited, 1 on stack, 2 done

        def silent_succs(s):
            return [nxt for nxt, out in self.steps[s] if not out]

        for start in range(n):
            if color[start]:
                continue
            stack = [(start, iter(silent_succs(start)))]
            color[start] = 1
            while stack:
                s, it = stack[-1]
                advanced = False
                for nxt in it:
                    if color[nxt] == 1:
                        raise ValueError("transducer has a silent cycle (not productive)")
                    if color[nxt] == 0:
                        color[nxt] = 1
                        stack.append((nxt, iter(silent_succs(nxt))))
                        advanced = True
                        break
                if not advanced:
                    color[s] = 2
                    stack.pop()

    @classmethod
    def build(cls, input_space: Space, output_space: Space, init, delta: dict) -> "Transducer":
        """Normalize a {(state, letter): (next, word)} table: breadth-first
        renumbering from the initial state, unreachable states dropped."""
        k_in = input_space.alphabet_size
        number = {init: 0}
        order = [init]
        queue = deque([init])
        while queue:
            s = queue.popleft()
            for a in range(k_in):
                if (s, a) not in delta:
                    raise ValueError("missing transition (%r, %d)" % (s, a))
                nxt, _ = delta[(s, a)]
                if nxt not in number:
                    number[nxt] = len(order)
                    order.append(nxt)
                    queue.append(nxt)
        steps = tuple(
            tuple((number[delta[(s, a)][0]], tuple(delta[(s, a)][1])) for a in range(k_in))
            for s in order
        )
        return cls(input_space, output_space, 0, steps)

    def step(self, state: int, letter: int) -> tuple[int, Word]:
        return self.steps[state][letter]

    def run_word(self, state: int, word: Word) -> tuple[int, Word]:
        out: list[int] = []
        for a in word:
            state, w = self.steps[state][a]
            out.extend(w)
        return state, tuple(out)

    def __repr__(self):
        return "Transducer(%d states, %r -> %r)" % (
            len(self.steps),
            self.input_space,
            self.output_space,
        )


# ---------------------------------------------------------------------------
# Constructors.


def identity_map(space: Space) -> Transducer:
    delta = {(0, a): (0, (a,)) for a in range(space.alphabet_size)}
    return Transducer.build(space, space, 0, delta)


def drop_first(space: Space) -> Transducer:
    delta = {(0, a): (1, ()) for a in range(space.alphabet_size)}
    delta.update({(1, a): (1, (a,)) for a in range(space.alphabet_size)})
    return Transducer.build(space, space, 0, delta)


def letter_double(space: Space) -> Transducer:
    delta = {(0, a): (0, (a, a)) for a in range(space.alphabet_size)}
    return Transducer.build(space, space, 0, delta)


def parity_merge() -> Transducer:
    """Space(2) -> Space(2): reads letter pairs, emits their sum mod 2.

    Open and surjective, with closed point fibers; a two-to-one style
    quotient useful as a name map.
    """
    space = Space(2)
    delta = {}
    for a in range(2):
        delta[(0, a)] = (1 + a, ())
        for p in range(2):
            delta[(1 + p, a)] = (0, ((p + a) % 2,))
    return Transducer.build(space, space, 0, delta)


def const_zero(input_space: Space, output_space: Space) -> Transducer:
    delta = {(0, a): (0, (0,)) for a in range(input_space.alphabet_size)}
    return Transducer.build(input_space, output_space, 0, delta)


def compose(outer: Transducer, inner: Transducer) -> Transducer:
    """The map x -> outer(inner(x)), as a product machine."""
    if inner.output_space != outer.input_space:
        raise SpaceMismatchError(
            "cannot compose: inner emits %r, outer reads %r"
            % (inner.output_space, outer.input_space)
        )
    k_in = inner.input_space.alphabet_size
    delta = {}
    start = (inner.init, outer.init)
    queue = deque([start])
    seen = {start}
    while queue:
        si, so = queue.popleft()
        for a in range(k_in):
            si2, w = inner.step(si, a)
            so2, out = outer.run_word(so, w)
            delta[((si, so), a)] = ((si2, so2), out)
            if (si2, so2) not in seen:
                seen.add((si2, so2))
                queue.append((si2, so2))
    return Transducer.build(inner.input_space, outer.output_space, start, delta)


def in_map(v: ClopenSet) -> Transducer:
    """The cylinder-selection map from Space(m), m = antichain length.

    The first input letter n picks the antichain word e_V(n), which is
    emitted; later letters are copied (mod k, the target alphabet, so
    copying is verbatim whenever m <= k).  The map always lands in V and
    is injective for m <= k; it is bijective onto V exactly when m = k.
    """
    if v.is_empty:
        raise EmptySetError("in_map needs a nonempty set")
    words = v.antichain
    m = len(words)
    k = v.space.alphabet_size
    delta = {}
    for n in range(m):
        delta[(0, n)] = (1, words[n])
    for a in range(m):
        delta[(1, a)] = (1, (a % k,))
    return Transducer.build(Space(m), v.space, 0, delta)


def out_map(v: ClopenSet) -> Transducer:
    """The canonical retraction of the space onto the complement of V.

    Identity outside V.  A point of V is redirected to the
    lexicographically least point of complement(V) within the cylinder
    of the longest prefix that still meets the complement.
    """
    if v.is_full:
        raise EmptySetError("out_map needs a proper subset: the complement is empty")
    space = v.space
    if v.is_empty:
        return identity_map(space)
    comp = v.complement()
    k = space.alphabet_size
    words = set(v.antichain)
    prefixes = {w[:i] for w in words for i in range(len(w))}
    delta = {}
    for p in sorted(prefixes):
        for a in range(k):
            w = p + (a,)
            if w in words:
                # x is now known to lie in V; p is the longest prefix whose
                # cylinder still meets the complement (canonical antichains
                # guarantee it does).
                target = least_point(comp.intersect(ClopenSet(space, (p,))))
                delta[(("t",) + p, a)] = (("pump", target.period), target.prefix + target.period)
            elif w in prefixes:
                delta[(("t",) + p, a)] = (("t",) + w, ())
            else:
                # x has left the trie: it is outside V, replay the buffer.
                delta[(("t",) + p, a)] = ("copy", w)
    for a in range(k):
        delta[("copy", a)] = ("copy", (a,))
    pumps = {nxt for nxt, _ in delta.values() if isinstance(nxt, tuple) and nxt and nxt[0] == "pump"}
    for pump in pumps:
        for a in range(k):
            delta[(pump, a)] = (pump, pump[1])
    return Transducer.build(space, space, ("t",), delta)


# ---------------------------------------------------------------------------
# Evaluation on ultimately periodic points.


def apply(f: Transducer, x: UpPoint) -> UpPoint:
    """Exact image of an ultimately periodic point.

    After the input prefix, the pair (machine state, phase within the
    input period) must repeat within |states| * |period| steps; the
    output emitted between two visits is the output period.
    """
    if x.space != f.input_space:
        raise SpaceMismatchError("point in %r, map reads %r" % (x.space, f.input_space))
    state = f.init
    out: list[int] = []
    for a in x.prefix:
        state, w = f.step(state, a)
        out.extend(w)
    seen: dict[tuple[int, int], int] = {}
    phase = 0
    while (state, phase) not in seen:
        seen[(state, phase)] = len(out)
        state, w = f.step(state, x.period[phase])
        out.extend(w)
        phase = (phase + 1) % len(x.period)
    cut = seen[(state, phase)]
    period = tuple(out[cut:])
    if not period:
        raise AssertionError("silent cycle escaped the productivity check")
    return UpPoint(f.output_space, tuple(out[:cut]), period)


# ---------------------------------------------------------------------------
# Exact preimage.


def preimage(f: Transducer, a: ClopenSet) -> ClopenSet:
    """The exact preimage of a clopen set, as a clopen set.

    Explores the input tree while matching emitted output against the
    antichain trie of `a`.  Along any input branch the output grows
    (productivity), so every branch is decided at bounded depth: either
    the output has entered a cylinder of `a` (accept the input word) or
    it has become incomparable with every antichain word (reject).
    """
    if a.space != f.output_space:
        raise SpaceMismatchError("set in %r, map emits %r" % (a.space, f.output_space))
    if a.is_empty:
        return ClopenSet.empty(f.input_space, a.declared_level)
    words = set(a.antichain)
    prefixes = {w[:i] for w in a.antichain for i in range(len(w))}

    def advance(pos, emitted):
        # pos is a proper prefix of some antichain word, or None once the
        # output is known to sit inside `a`.
        for c in emitted:
            nxt = pos + (c,)
            if nxt in words:
                return "accept"
            if nxt not in prefixes:
                return "reject"
            pos = nxt
        return pos

    if () in words:
        return ClopenSet.full(f.input_space, a.declared_level)
    k_in = f.input_space.alphabet_size
    result: list[Word] = []
    stack: list[tuple[int, Word, Word]] = [(f.init, (), ())]
    while stack:
        state, w, pos = stack.pop()
        for letter in range(k_in):
            nxt_state, emitted = f.step(state, letter)
            verdict = advance(pos, emitted)
            if verdict == "accept":
                result.append(w + (letter,))
            elif verdict != "reject":
                stack.append((nxt_state, w + (letter,), verdict))
    return ClopenSet(f.input_space, tuple(result), a.declared_level)


# ---------------------------------------------------------------------------
# Exact forward image with refusal.
#
# For clopen A with antichain words a_i, the image is the finite union
# of the sets o_i . Range(s_i), where s_i is the state reached on a_i
# and o_i the output emitted on the way, and Range(s) is the set of all
# output streams of the machine started in s.  Two exact deciders answer
# questions about that union:
#
#   * does it meet a cylinder [v]?   (reachability of a full match)
#   * does it contain all of [v]?    (a safety game over configuration
#     sets: decompose by the next output letter; the union covers [v]
#     iff no reachable decomposition step comes up empty.  Configurations
#     are (state, pending-output-suffix) pairs, of which there are
#     finitely many, so the subset construction terminates.)
#
# The image routine walks the output tree breadth-first, prunes cylinders
# disjoint from the image, accepts cylinders the image provably covers,
# and otherwise refines, refusing once the depth bound is passed.  The
# words accepted this way are exactly the canonical antichain of the
# image whenever the walk resolves every branch.


def _match_reach(f: Transducer, state: int, u: Word) -> bool:
    # Can some run from `state` emit an output extending u?
    if not u:
        return True
    k_in = f.input_space.alphabet_size
    seen = {(state, 0)}
    queue = deque([(state, 0)])
    while queue:
        s, pos = queue.popleft()
        for a in range(k_in):
            s2, w = f.steps[s][a]
            t = min(len(w), len(u) - pos)
            if tuple(w[:t]) != u[pos : pos + t]:
                continue
            pos2 = pos + len(w)
            if pos2 >= len(u):
                return True
            if (s2, pos2) not in seen:
                seen.add((s2, pos2))
                queue.append((s2, pos2))
    return False


def _normalize_configs(f: Transducer, configs) -> frozenset:
    """Rewrite configurations until each is (state, nonempty pending word).

    ('E', s, u) denotes u . Range(s); ('M', s, r) denotes the set of
    tails z with r.z in Range(s).  Both unfold exactly along the
    machine's one-step decomposition of Range; silent cycles are banned,
    so the unfolding terminates.
    """
    k_in = f.input_space.alphabet_size
    out = set()
    seen = set()
    stack = list(configs)
    while stack:
        cfg = stack.pop()
        if cfg in seen:
            continue
        seen.add(cfg)
        tag, s, w = cfg
        if tag == "E" and w:
            out.add((s, w))
            continue
        if tag == "E":
            for a in range(k_in):
                s2, e = f.steps[s][a]
                stack.append(("E", s2, e))
        else:
            r = w
            for a in range(k_in):
                s2, e = f.steps[s][a]
                t = min(len(e), len(r))
                if e[:t] != r[:t]:
                    continue
                if len(e) >= len(r):
                    stack.append(("E", s2, e[len(r):]))
                else:
                    stack.append(("M", s2, r[len(e):]))
    return frozenset(out)


def _covers(f: Transducer, starts, v: Word) -> bool:
    # Does the union of o_i . Range(s_i) contain the whole cylinder [v]?
    initial = []
    for s, o in starts:
        t = min(len(o), len(v))
        if o[:t] != v[:t]:
            continue
        if len(o) >= len(v):
            initial.append(("E", s, o[len(v):]))
        else:
            initial.append(("M", s, v[len(o):]))
    k_out = f.output_space.alphabet_size
    start = _normalize_configs(f, initial)
    if not start:
        return False
    seen = {start}
    queue = deque([start])
    while queue:
        configs = queue.popleft()
        for c in range(k_out):
            nxt = _normalize_configs(
                f, [("E", s, u[1:]) for s, u in configs if u[0] == c]
            )
            if not nxt:
                return False
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
                if len(seen) > _COVER_BUDGET:
                    raise UndecidedImageError("image coverage exceeded the configuration budget")
    return True


def _intersects(f: Transducer, starts, v: Word) -> bool:
    for s, o in starts:
        t = min(len(o), len(v))
        if o[:t] != v[:t]:
            continue
        if len(o) >= len(v) or _match_reach(f, s, v[len(o):]):
            return True
    return False


def image(f: Transducer, a: ClopenSet, depth_bound: int) -> ClopenSet:
    """The exact forward image f[a], certified clopen, or a refusal.

    Raises UndecidedImageError when some output cylinder is still
    unresolved at the depth bound (in particular whenever the image is
    not clopen).  A returned set is exactly f[a]: accepted cylinders are
    proven covered, discarded ones proven disjoint.
    """
    if a.space != f.input_space:
        raise SpaceMismatchError("set in %r, map reads %r" % (a.space, f.input_space))
    if a.is_empty:
        return ClopenSet.empty(f.output_space, a.declared_level)
    starts = []
    for w in a.antichain:
        s, o = f.run_word(f.init, w)
        starts.append((s, o))
    result: list[Word] = []
    queue = deque([()])
    k_out = f.output_space.alphabet_size
    while queue:
        v = queue.popleft()
        if not _intersects(f, starts, v):
            continue
        if _covers(f, starts, v):
            result.append(v)
            continue
        if len(v) >= depth_bound:
            raise UndecidedImageError(
                "image undecided at depth %d (possibly not clopen)" % depth_bound
            )
        for c in range(k_out):
            queue.append(v + (c,))
    return ClopenSet(f.output_space, tuple(result), a.declared_level)


# ---------------------------------------------------------------------------
# Documents.  A transducer document is
#   {"states": n, "init": 0, "in_space": k, "out_space": k',
#    "trans": [{"from": s, "in": a, "to": s', "out": word-literal}, ...]}
# with one transition per (state, letter), sorted, and "e" for the empty
# output word.  encode always emits the normalized machine, so
# encode . decode . encode is byte stable.


def encode_transducer(f: Transducer) -> dict:
    trans = []
    for s, row in enumerate(f.steps):
        for a, (nxt, out) in enumerate(row):
            trans.append({"from": s, "in": a, "to": nxt, "out": render_word(out)})
    return {
        "states": len(f.steps),
        "init": f.init,
        "in_space": f.input_space.alphabet_size,
        "out_space": f.output_space.alphabet_size,
        "trans": trans,
    }


def decode_transducer(doc) -> Transducer:
    if not isinstance(doc, dict):
        raise DocumentError("a transducer document is a JSON object")
    try:
        n = doc["states"]
        init = doc["init"]
        k_in = doc["in_space"]
        k_out = doc["out_space"]
        trans = doc["trans"]
    except (KeyError, TypeError):
        raise DocumentError(
            "transducer document needs states, init, in_space, out_space, trans"
        ) from None
    for name, v in (("states", n), ("init", init), ("in_space", k_in), ("out_space", k_out)):
        if not isinstance(v, int):
            raise DocumentError("%s must be an integer" % name)
    if n < 1:
        raise DocumentError("a transducer needs at least one state")
    if not (0 <= init < n):
        raise DocumentError("init must name one of the %d states" % n)
    if not isinstance(trans, list):
        raise DocumentError("trans must be a list of transitions")
    delta = {}
    for entry in trans:
        if not isinstance(entry, dict) or set(entry) != {"from", "in", "to", "out"}:
            raise DocumentError("a transition is {from, in, to, out}, got %r" % (entry,))
        s, a, nxt, word_text = entry["from"], entry["in"], entry["to"], entry["out"]
        if not all(isinstance(v, int) for v in (s, a, nxt)):
            raise DocumentError("transition endpoints and letters are integers")
        if not (0 <= s < n and 0 <= nxt < n):
            raise DocumentError("transition %r targets an unknown state" % (entry,))
        if not (0 <= a < k_in):
            raise DocumentError("transition %r reads a letter outside the alphabet" % (entry,))
        if not isinstance(word_text, str):
            raise DocumentError("output words are written as word literals")
        if (s, a) in delta:
            raise DocumentError("duplicate transition for state %d letter %d" % (s, a))
        delta[(s, a)] = (nxt, parse_word(word_text))
    for s in range(n):
        for a in range(k_in):
            if (s, a) not in delta:
                raise DocumentError("missing transition for state %d letter %d" % (s, a))
    try:
        return Transducer.build(Space(k_in), Space(k_out), init, delta)
    except ValueError as e:
        raise DocumentError(str(e)) from None


# Named references for the small builtin library used inside command
# documents: resolved against the space of the node the map sits at.


def encode_map(f: Transducer, space: Space):
    if f == identity_map(space):
        return "identity"
    return encode_transducer(f)


def decode_map(ref, space: Space) -> Transducer:
    if isinstance(ref, str):
        if ref == "identity":
            return identity_map(space)
        if ref == "drop-first":
            return drop_first(space)
        if ref == "double":
            return letter_double(space)
        if ref == "parity-merge":
            if space.alphabet_size != 2:
                raise DocumentError("parity-merge needs a binary space")
            return parity_merge()
        raise DocumentError("unknown map reference %r" % ref)
    if isinstance(ref, dict) and set(ref) == {"in"}:
        return in_map(parse_clopen(space, ref["in"]))
    if isinstance(ref, dict) and set(ref) == {"out"}:
        return out_map(parse_clopen(space, ref["out"]))
    if isinstance(ref, dict):
        return decode_transducer(ref)
    raise DocumentError("a map is a name, an in/out reference, or an inline machine")
