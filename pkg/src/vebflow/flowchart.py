"""Flowcharts: set assignments on syntax trees, and their evaluation.

A flowchart attaches one test set to every sequencing (~>) node and a
finite family of sets to every join node of a closed term's syntax
tree; leaves and Veblen nodes implicitly carry the full space.
Evaluating at a point walks the tree: a sequencing node branches on
membership in its set (left on out, right on in), a join node branches
to every member whose set contains the point, a Veblen node passes
through.  The labels of the leaves reached this way are the value.

The domain assignment D gives each address the set of points that
reach it; totality and determinism are clopen inclusion and
disjointness conditions on D, decided exactly, with least-point
witnesses on failure.

Transformations: to_monotone shrinks every assigned set into its
domain (normal terms only), to_reduced makes join families pairwise
disjoint by successive differences, pullback substitutes a continuous
map into every set, and vaught_transform pushes a flowchart forward
along an open surjection of name spaces.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DocumentError,
    AmbiguousLabelsError,
    InvalidAddressError,
    NonNormalTermError,
    NoTruePathError,
    NotMonotoneError,
    OpenTermError,
    ParseError,
    SpaceMismatchError,
    UnsupportedError,
)
from .ordinal import ONE, cmp, parse_ordinal, render_ordinal
from .space import ClopenSet, Space, UpPoint, least_point, member, parse_clopen, render_clopen
from .term import (
    Address,
    ArrowL,
    ConstL,
    JoinL,
    SyntaxTree,
    Term,
    VeblenL,
    borel_rank,
    decode_tree,
    encode_tree,
    is_closed,
    is_normal,
    syntax_tree,
    term_from_tree,
)
from .transducer import Transducer, image, preimage

__all__ = [
    "Flowchart",
    "domain_assignment",
    "true_positions",
    "true_paths",
    "eval_flowchart",
    "eval_outcome",
    "is_total",
    "is_deterministic",
    "is_monotone",
    "to_monotone",
    "to_reduced",
    "pullback",
    "vaught_transform",
    "check_levels",
    "encode_flowchart",
    "decode_flowchart",
    "render_address",
    "parse_address",
]


NodeSets = ClopenSet | tuple[ClopenSet, ...]


@dataclass(frozen=True)
class Flowchart:
    """A closed term plus a set assignment over its syntax tree.

    `assign` maps addresses of ~> nodes to one set and addresses of
    join nodes to a tuple of sets, one per child.  Accepts a dict and
    freezes it into a sorted tuple of pairs.  Declared levels are NOT
    enforced here (check_levels is the separate judgement); shapes and
    spaces are.
    """

    term: Term
    space: Space
    assign: tuple[tuple[Address, NodeSets], ...]

    def __post_init__(self):
        if not is_closed(self.term):
            raise OpenTermError("flowcharts need closed terms")
        raw = self.assign
        if isinstance(raw, dict):
            raw = raw.items()
        cooked: dict[Address, NodeSets] = {}
        for addr, sets in raw:
            addr = tuple(addr)
            if addr in cooked:
                raise ValueError("duplicate assignment at %r" % (addr,))
            cooked[addr] = tuple(sets) if isinstance(sets, (tuple, list)) else sets
        tree = syntax_tree(self.term)
        for addr in tree.addresses():
            label = tree.label(addr)
            if isinstance(label, ArrowL):
                got = cooked.get(addr)
                if not isinstance(got, ClopenSet):
                    raise ValueError("~> node %r needs exactly one set" % (addr,))
                self._check_set(got, addr)
            elif isinstance(label, JoinL):
                got = cooked.get(addr)
                arity = len(tree.children(addr))
                if not isinstance(got, tuple) or len(got) != arity:
                    raise ValueError(
                        "join node %r needs a family of %d sets" % (addr, arity)
                    )
                for s in got:
                    self._check_set(s, addr)
            elif addr in cooked:
                raise ValueError("node %r takes no assignment" % (addr,))
        extra = set(cooked) - set(tree.addresses())
        if extra:
            raise ValueError("assignment at addresses outside the tree: %r" % sorted(extra))
        object.__setattr__(self, "assign", tuple(sorted(cooked.items())))
        object.__setattr__(self, "_tree", tree)
        object.__setattr__(self, "_at", cooked)

    def _check_set(self, s, addr):
        if not isinstance(s, ClopenSet):
            raise ValueError("assignment at %r is not a set" % (addr,))
        if s.space != self.space:
            raise SpaceMismatchError(
                "set at %r lives in %r, flowchart in %r" % (addr, s.space, self.space)
            )

    @property
    def tree(self) -> SyntaxTree:
        return self._tree

    def at(self, addr: Address) -> NodeSets:
        try:
            return self._at[addr]
        except KeyError:
            raise InvalidAddressError("no assignment at %r" % (addr,)) from None

    def replace_sets(self, rewrite) -> "Flowchart":
        """A copy with every assigned set passed through `rewrite(addr, s)`."""
        new = {}
        for addr, sets in self.assign:
            if isinstance(sets, tuple):
                new[addr] = tuple(rewrite(addr, s) for s in sets)
            else:
                new[addr] = rewrite(addr, sets)
        return Flowchart(self.term, self.space, new)

    def __repr__(self):
        return "Flowchart(%d assigned nodes, %r)" % (len(self.assign), self.space)


# ---------------------------------------------------------------------------
# Domains and evaluation.


def domain_assignment(f: Flowchart) -> dict[Address, ClopenSet]:
    """The set of points reaching each address.

    The root gets the full space.  A ~> node sends its set's complement
    left and its set right, a join node intersects with each family
    member, a Veblen node passes its domain through unchanged.
    """
    tree = f.tree
    domains: dict[Address, ClopenSet] = {(): ClopenSet.full(f.space)}
    for addr in tree.addresses():
        if not addr:
            continue
        parent, i = addr[:-1], addr[-1]
        label = tree.label(parent)
        if isinstance(label, ArrowL):
            s = f.at(parent)
            domains[addr] = (
                domains[parent].difference(s) if i == 0 else domains[parent].intersect(s)
            )
        elif isinstance(label, JoinL):
            domains[addr] = domains[parent].intersect(f.at(parent)[i])
        else:
            domains[addr] = domains[parent]
    return domains


def true_positions(f: Flowchart, x: UpPoint) -> list[Address]:
    """All addresses the point reaches, by the branching recursion."""
    if x.space != f.space:
        raise SpaceMismatchError("point in %r, flowchart in %r" % (x.space, f.space))
    tree = f.tree
    out: list[Address] = []

    def walk(addr: Address):
        out.append(addr)
        label = tree.label(addr)
        if isinstance(label, ArrowL):
            walk(addr + ((1,) if member(x, f.at(addr)) else (0,)))
        elif isinstance(label, JoinL):
            for n, s in enumerate(f.at(addr)):
                if member(x, s):
                    walk(addr + (n,))
        elif isinstance(label, VeblenL):
            walk(addr + (0,))

    walk(())
    return sorted(out)


def true_paths(f: Flowchart, x: UpPoint) -> list[tuple[Address, str]]:
    """The leaves reached, with their constant labels."""
    tree = f.tree
    out = []
    for addr in true_positions(f, x):
        label = tree.label(addr)
        if isinstance(label, ConstL):
            out.append((addr, label.label))
    return out


def eval_flowchart(f: Flowchart, x: UpPoint) -> str:
    """The unique true-path label; all true paths must agree on it."""
    paths = true_paths(f, x)
    if not paths:
        raise NoTruePathError("no true path at %s" % x)
    labels = {label for _, label in paths}
    if len(labels) > 1:
        raise AmbiguousLabelsError(labels)
    return labels.pop()


def eval_outcome(f: Flowchart, x: UpPoint) -> tuple:
    """Evaluation as a comparable token, errors included.

    ("value", label) | ("no-true-path",) | ("ambiguous", frozenset).
    Lets transforms assert exact agreement of outputs and error kinds.
    """
    try:
        return ("value", eval_flowchart(f, x))
    except NoTruePathError:
        return ("no-true-path",)
    except AmbiguousLabelsError as e:
        return ("ambiguous", e.labels)


# ---------------------------------------------------------------------------
# Decision procedures.


def is_total(f: Flowchart) -> tuple[bool, UpPoint | None]:
    """Does every point have a true path?

    Computed backwards as the success set of each subtree: leaves
    succeed everywhere, a ~> node succeeds where its taken branch does,
    a join succeeds under any member whose branch does.  A join family
    that misses part of its domain is not by itself a failure; the
    point may still ride an overlapping sibling branch to a leaf.  On
    failure the witness is the least point with no true path.
    """
    tree = f.tree

    def succeed(addr: Address) -> ClopenSet:
        label = tree.label(addr)
        if isinstance(label, ArrowL):
            s = f.at(addr)
            left = s.complement().intersect(succeed(addr + (0,)))
            return left.union(s.intersect(succeed(addr + (1,))))
        if isinstance(label, JoinL):
            out = ClopenSet.empty(f.space)
            for n, s in enumerate(f.at(addr)):
                out = out.union(s.intersect(succeed(addr + (n,))))
            return out
        if isinstance(label, VeblenL):
            return succeed(addr + (0,))
        return ClopenSet.full(f.space)

    missing = succeed(()).complement()
    if missing.is_empty:
        return True, None
    return False, least_point(missing)


def is_deterministic(f: Flowchart) -> tuple[bool, UpPoint | None]:
    """Can two true paths ever disagree on the label?

    Exactly when leaf domains with distinct labels all have empty
    pairwise intersections; same-label overlap is allowed.
    """
    domains = domain_assignment(f)
    tree = f.tree
    leaves = [
        (addr, tree.label(addr).label)
        for addr in tree.addresses()
        if isinstance(tree.label(addr), ConstL)
    ]
    for i, (a1, q1) in enumerate(leaves):
        for a2, q2 in leaves[i + 1 :]:
            if q1 == q2:
                continue
            both = domains[a1].intersect(domains[a2])
            if not both.is_empty:
                return False, least_point(both)
    return True, None


def is_monotone(f: Flowchart) -> bool:
    """Is every assigned set contained in its node's domain?"""
    domains = domain_assignment(f)
    for addr, sets in f.assign:
        family = sets if isinstance(sets, tuple) else (sets,)
        if not all(s.is_subset(domains[addr]) for s in family):
            return False
    return True


# ---------------------------------------------------------------------------
# Transformations.


def to_monotone(f: Flowchart) -> Flowchart:
    """Shrink every assigned set into its domain: S' = D ∩ S.

    Only for normal terms; there the shrunken sets keep their levels
    within rank (the out-branch of a ~> node leads into a leaf or a
    Veblen node, whose rank absorbs the bump).  Evaluation is unchanged
    pointwise, errors included, because domains are invariant.
    """
    if not is_normal(f.term):
        raise NonNormalTermError("the shrink-to-domain transform needs a normal term")
    domains = domain_assignment(f)
    return f.replace_sets(lambda addr, s: domains[addr].intersect(s))


def to_reduced(f: Flowchart) -> Flowchart:
    """Make every join family pairwise disjoint by successive differences.

    R*_n = R_n minus the union of the earlier members; unions per node
    are unchanged, and so is evaluation whenever the input was
    deterministic.  Levels are kept: differences of clopen sets are
    clopen.
    """
    new: dict[Address, NodeSets] = {}
    tree = f.tree
    for addr, sets in f.assign:
        if not isinstance(sets, tuple):
            new[addr] = sets
            continue
        seen = ClopenSet.empty(f.space)
        family = []
        for s in sets:
            family.append(s.difference(seen).with_level(s.declared_level))
            seen = seen.union(s)
        new[addr] = tuple(family)
    return Flowchart(f.term, f.space, new)


def pullback(f: Flowchart, theta: Transducer) -> Flowchart:
    """Substitute a continuous map into every test: sets become preimages.

    The result lives over theta's input space and computes x -> f(theta(x)).
    """
    if theta.output_space != f.space:
        raise SpaceMismatchError(
            "map lands in %r, flowchart lives in %r" % (theta.output_space, f.space)
        )
    return Flowchart(f.term, theta.input_space, dict(_preimage_assign(f, theta)))


def _preimage_assign(f: Flowchart, theta: Transducer):
    for addr, sets in f.assign:
        if isinstance(sets, tuple):
            yield addr, tuple(preimage(theta, s) for s in sets)
        else:
            yield addr, preimage(theta, sets)


def vaught_transform(f: Flowchart, delta: Transducer, depth_bound: int) -> Flowchart:
    """Push a monotone flowchart over names forward along an open surjection.

    Every assigned set A becomes the image delta[A]: for clopen A the
    fiber intersection is relatively open, and a nonempty open subset of
    a Polish fiber is non-meager, so the category transform and the
    direct image agree.  Monotonicity of the input is required;
    surjectivity is spot-checked as image(delta, full) = full.  Raises
    UndecidedImageError if any image is unresolved at the depth bound.
    """
    if delta.input_space != f.space:
        raise SpaceMismatchError(
            "map reads %r, flowchart lives in %r" % (delta.input_space, f.space)
        )
    if not is_monotone(f):
        raise NotMonotoneError("the Vaught transform needs a monotone flowchart")
    onto = image(delta, ClopenSet.full(f.space), depth_bound)
    if not onto.is_full:
        raise UnsupportedError("the name map is not surjective; its range is %s" % onto)
    new = dict(_image_assign(f, delta, depth_bound))
    return Flowchart(f.term, delta.output_space, new)


def _image_assign(f: Flowchart, delta: Transducer, depth_bound: int):
    for addr, sets in f.assign:
        if isinstance(sets, tuple):
            yield addr, tuple(image(delta, s, depth_bound) for s in sets)
        else:
            yield addr, image(delta, sets, depth_bound)


def check_levels(f: Flowchart) -> bool:
    """Is every declared level within its node's rank?"""
    for addr, sets in f.assign:
        rank = borel_rank(f.term, addr)
        family = sets if isinstance(sets, tuple) else (sets,)
        if any(cmp(s.declared_level, rank) > 0 for s in family):
            return False
    return True


# ---------------------------------------------------------------------------
# Documents.
#
#   {"kind": "flowchart", "space": k, "term": {"nodes": [...]},
#    "assign": {"": "{1}", "1": ["{10}", "{11}"]}}
#
# Addresses are dotted digit strings ("" is the root).  A set is its
# literal when at level 1, else {"set": literal, "level": ordinal}.


def render_address(addr: Address) -> str:
    return ".".join(str(i) for i in addr)


def parse_address(text: str) -> Address:
    if text == "":
        return ()
    parts = text.split(".")
    if not all(p.isdigit() for p in parts):
        raise DocumentError("bad address key %r" % text)
    return tuple(int(p) for p in parts)


def _encode_set(s: ClopenSet):
    if s.declared_level == ONE:
        return render_clopen(s)
    return {"set": render_clopen(s), "level": render_ordinal(s.declared_level)}


def _decode_set(space: Space, entry) -> ClopenSet:
    try:
        if isinstance(entry, str):
            return parse_clopen(space, entry)
        if isinstance(entry, dict) and set(entry) <= {"set", "level"} and "set" in entry:
            level = ONE
            if "level" in entry:
                if not isinstance(entry["level"], str):
                    raise DocumentError("a level is an ordinal string")
                level = parse_ordinal(entry["level"])
            if not isinstance(entry["set"], str):
                raise DocumentError("a set is written as a literal string")
            return parse_clopen(space, entry["set"], level)
    except (ParseError, ValueError) as e:
        raise DocumentError("bad set entry %r: %s" % (entry, e)) from None
    raise DocumentError("malformed set entry %r" % (entry,))


def encode_flowchart(f: Flowchart) -> dict:
    assign = {}
    for addr, sets in f.assign:
        if isinstance(sets, tuple):
            assign[render_address(addr)] = [_encode_set(s) for s in sets]
        else:
            assign[render_address(addr)] = _encode_set(sets)
    return {
        "kind": "flowchart",
        "space": f.space.alphabet_size,
        "term": encode_tree(syntax_tree(f.term)),
        "assign": assign,
    }


def decode_flowchart(doc) -> Flowchart:
    """Decode and validate: shapes, spaces, and the level discipline."""
    if not isinstance(doc, dict) or doc.get("kind") != "flowchart":
        raise DocumentError("a flowchart document has kind 'flowchart'")
    if not isinstance(doc.get("space"), int):
        raise DocumentError("flowchart document needs an integer space")
    try:
        space = Space(doc["space"])
    except ValueError as e:
        raise DocumentError(str(e)) from None
    term = term_from_tree(decode_tree(doc.get("term")))
    raw = doc.get("assign")
    if not isinstance(raw, dict):
        raise DocumentError("flowchart document needs an assign object")
    assign: dict[Address, NodeSets] = {}
    for key, entry in raw.items():
        addr = parse_address(key)
        if isinstance(entry, list):
            assign[addr] = tuple(_decode_set(space, e) for e in entry)
        else:
            assign[addr] = _decode_set(space, entry)
    try:
        f = Flowchart(term, space, assign)
    except (ValueError, OpenTermError, SpaceMismatchError) as e:
        raise DocumentError(str(e)) from None
    if not check_levels(f):
        raise DocumentError("declared level exceeds the node rank")
    return f
