"""Task metadata rendering and model-output parsing.

Four prompt templates of decreasing verbosity (large, middle, small, base)
turn a TaskMetadata into the conditioning text placed in front of the
encoded decision vector. ``small`` is the default serving template.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .codec import CodecConfig, decode_text, encode_vector
from .errors import MismatchedDim, UnparseableOutput


class PromptTemplate(str, Enum):
    LARGE = "large"
    MIDDLE = "middle"
    SMALL = "small"
    BASE = "base"


DEFAULT_TEMPLATE = PromptTemplate.SMALL


@dataclass(frozen=True)
class TaskMetadata:
    """Identity and context of one optimization task.

    key_features are (label, value) pairs; labels are semantic handles
    ("dataset", "instance") used programmatically, while rendering numbers
    the values positionally as "key feature 1 is ...", "key feature 2 is ..."
    in caller-supplied order.
    """

    dataset: str
    function_id: str
    function_name: str
    instance: int
    dim: int
    key_features: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not self.function_id or not self.function_name:
            raise ValueError("function_id and function_name must be nonempty")


def standard_metadata(
    dataset: str,
    function_id: str,
    function_name: str,
    instance: int,
    dim: int,
    extra_features: tuple[tuple[str, str], ...] = (),
) -> TaskMetadata:
    """Metadata with the conventional two key features: dataset and instance."""
    features = (
        ("dataset", dataset),
        ("instance", f"instance={instance}"),
    ) + tuple(extra_features)
    return TaskMetadata(
        dataset=dataset,
        function_id=function_id,
        function_name=function_name,
        instance=instance,
        dim=dim,
        key_features=features,
    )


def _feature_clauses(meta: TaskMetadata, quoted: bool) -> list[str]:
    clauses = []
    for i, (_, value) in enumerate(meta.key_features, start=1):
        rendered = f'"{value}"' if quoted else "{" + value + "}"
        clauses.append(f"key feature {i} is {rendered}")
    return clauses


def _render_small(meta: TaskMetadata) -> str:
    head = (
        "You are a many-task surrogate model, predict fitness given m and pop; "
        f"function name is {{{meta.function_name}}}, "
        f"function ID is {{{meta.function_id}}}, "
    )
    clauses = _feature_clauses(meta, quoted=False)
    tail = f"the dimensionality is dim={{{meta.dim}}}."
    if clauses:
        return head + " | ".join(clauses + [tail])
    return head + tail


def _render_base(meta: TaskMetadata) -> str:
    return (
        f'{meta.dataset}, instance="{meta.instance}", '
        f'"{meta.function_name}", dimension="{meta.dim}".'
    )


def _render_middle(meta: TaskMetadata) -> str:
    head = (
        "You are a many-task surrogate model. Given (1) m: metadata describing "
        "the function and its dimension. (2) pop: a vector of floats (solution), "
        "encoded in base-10 scientific tokens. y: the fitness value. "
        "Predict y given m and pop; "
        f'm: The ID of this black-box function is "{meta.function_id}", '
        f'the human-assigned name is "{meta.function_name}", '
    )
    clauses = _feature_clauses(meta, quoted=True)
    tail = f'the dimensionality of decision variables is dim="{meta.dim}".'
    if clauses:
        return head + " | ".join(clauses + [tail])
    return head + tail


_LARGE_PREAMBLE = (
    "You are an expert many-task surrogate model based on a large language "
    "model (LLM). Your task is to predict the fitness value y of an "
    "individual x for a given black box function, described by metadata m. "
    "Each sample consists of: m: textual metadata describing the target "
    "function and its dimensionality. x: a sequence of float numbers "
    "representing an individual solution, tokenized in a digit wise manner "
    "using a base 10 scientific encoding. y: the scalar fitness value, also "
    "encoded in base 10 scientific notation. "
    "Data: m: The ID of this black-box function is <function_id>, the "
    "human-assigned name is <function_name>, key feature 1 is "
    "<key feature 1> | key feature 2 is <key feature 2> | ... | the "
    "dimensionality of decision variables is dim=<D>. "
    "x: [{x_1}, {x_2}, ..., {x_d}] encoded as: [<10^exp> d_1 d_2 ... d_k] "
    "y: target fitness value (to be predicted). "
    "Examples: m: The ID of this black-box function is 2, the human-assigned "
    "name is Sphere, key feature 1 is \"\", the dimensionality of decision "
    "variables is dimension=4. "
    "x: [-2.065349139, -2.570456278, 3.38108745, -3.38108745] encoded as: "
    "[- <10^0> 2 0 6 5 3 4 9 1 3 9, - <10^0> 2 5 7 0 4 5 6 2 7 8, "
    "+ <10^0> 3 3 8 1 0 8 7 4 5 0, + <10^0> 3 3 8 1 0 8 7 4 5 0] "
    "y: [+ <10^3> 1 7 4 0 0 5 0 8 4 3] "
    "Given m and x (encoded), predict y (fitness value) as accurately as "
    "possible. Now, predict the fitness for the following sample: Data m: "
)


def _render_large(meta: TaskMetadata) -> str:
    head = _LARGE_PREAMBLE + (
        f'"The ID of this black-box function is "{meta.function_id}", '
        f'the human-assigned name is "{meta.function_name}", '
    )
    clauses = _feature_clauses(meta, quoted=True)
    tail = f'the dimensionality of decision variables is dim="{meta.dim}"."'
    if clauses:
        return head + " | ".join(clauses + [tail])
    return head + tail


_RENDERERS = {
    PromptTemplate.SMALL: _render_small,
    PromptTemplate.BASE: _render_base,
    PromptTemplate.MIDDLE: _render_middle,
    PromptTemplate.LARGE: _render_large,
}


def render_metadata(meta: TaskMetadata, tpl: PromptTemplate = DEFAULT_TEMPLATE) -> str:
    """Render metadata under the chosen template. Deterministic."""
    return _RENDERERS[PromptTemplate(tpl)](meta)


def metadata_token_length(meta: TaskMetadata, tpl: PromptTemplate = DEFAULT_TEMPLATE) -> int:
    """Whitespace-delimited token count of the rendered metadata."""
    return len(render_metadata(meta, tpl).split())


def build_input(
    meta: TaskMetadata,
    x,
    cfg: CodecConfig,
    tpl: PromptTemplate = DEFAULT_TEMPLATE,
) -> str:
    """Full model input: rendered metadata, then the encoded decision vector."""
    x = list(x)
    if len(x) != meta.dim:
        raise MismatchedDim(f"metadata says dim={meta.dim} but len(x)={len(x)}")
    return render_metadata(meta, tpl) + "; x=" + encode_vector(x, cfg)


_BRACKET_GROUP_RE = re.compile(r"\[([^\[\]]*)\]")


def parse_fitness(text: str) -> float:
    """Recover the fitness float from generated text.

    Scans for a bracketed scalar encoding, strips the brackets and any
    start/end markers, and decodes. Raises UnparseableOutput when no group
    parses, which signals a degenerate model generation.
    """
    for match in _BRACKET_GROUP_RE.finditer(text):
        body = match.group(1).strip()
        body = re.sub(r"</?s>", "", body).strip()
        try:
            return decode_text(body)
        except Exception:
            continue
    raise UnparseableOutput(f"no valid encoded scalar in {text!r}")
