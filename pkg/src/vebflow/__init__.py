"""Terms for Borel Wadge classes with flowchart and command semantics.

The pieces: exact ordinal arithmetic below epsilon_0 (ordinal), the
term language and its syntax trees (term), stream spaces with clopen
sets and ultimately periodic points (space), finite-state transducers
as continuous maps (transducer), flowchart semantics with the
monotone/reduced/pullback/Vaught transformations (flowchart), command
semantics and the translations between the two (command), seeded
generators (generate), and a batch CLI (cli).
"""

from .errors import (
    AmbiguousLabelsError,
    DocumentError,
    EmptySetError,
    InvalidAddressError,
    NonNormalTermError,
    NoTruePathError,
    NotMonotoneError,
    OpenTermError,
    ParseError,
    SpaceMismatchError,
    UndecidedImageError,
    UnsupportedError,
    VebflowError,
)
from .ordinal import CnfOrdinal, ZERO, ONE, OMEGA, add, cmp, omega_pow, parse_ordinal, rank_sum, render_ordinal
from .term import (
    Arrow,
    Const,
    Join,
    Term,
    Var,
    Veblen,
    apply_fixed_point,
    borel_rank,
    is_closed,
    is_normal,
    is_well_formed,
    parse_term,
    render_term,
    syntax_tree,
)
from .space import ClopenSet, Space, UpPoint, least_point, member, parse_clopen, parse_point, render_clopen, render_point, sample_grid
from .transducer import (
    Transducer,
    apply,
    compose,
    identity_map,
    image,
    in_map,
    out_map,
    preimage,
)
from .flowchart import (
    Flowchart,
    check_levels,
    decode_flowchart,
    domain_assignment,
    encode_flowchart,
    eval_flowchart,
    is_monotone,
    pullback,
    to_monotone,
    to_reduced,
    vaught_transform,
)
from .command import (
    Command,
    command_to_flowchart,
    decode_command,
    encode_command,
    eval_command,
    flowchart_to_simple_command,
    is_simple,
    is_strongly_total,
    make_strongly_total,
    val,
)

__version__ = "0.1.0"
