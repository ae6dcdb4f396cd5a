"""Prompt assembly for the mapping generator.

A prompt always renders seven sections in a fixed order: role definition,
initial instructions, retrieved context, a one-shot example, the field being
mapped, the output-format direction, and final instructions.  The context
and field sections are placeholders filled at build time; everything else is
static template text.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .dictionary import DictionaryEntry, entry_to_query

EMPTY_CONTEXT_LINE = "(no documentation was retrieved for this field)"
ANSWER_SENTINEL = "FHIR_MAPPING:"


@dataclass(frozen=True)
class PromptTemplate:
    role_definition: str
    initial_instructions: str
    context_placeholder: str
    one_shot_example: tuple[str, str]
    input_placeholder: str
    output_format_direction: str
    final_instructions: str

    def skeleton(self) -> str:
        """The seven sections joined in rendering order, placeholders unfilled."""
        example_input, example_output = self.one_shot_example
        example = (
            "Example input:\n"
            f"{example_input}\n"
            "Example answer:\n"
            f"{ANSWER_SENTINEL} {example_output}"
        )
        sections = (
            self.role_definition,
            self.initial_instructions,
            f"Retrieved FHIR documentation:\n{self.context_placeholder}",
            example,
            f"Field to map:\n{self.input_placeholder}",
            self.output_format_direction,
            self.final_instructions,
        )
        return "\n\n".join(sections)

    def validate(self) -> None:
        skeleton = self.skeleton()
        for marker in (self.context_placeholder, self.input_placeholder):
            if not marker:
                raise ValueError("placeholder markers must be non-empty")
            if skeleton.count(marker) != 1:
                raise ValueError(f"placeholder {marker!r} must appear exactly once")


def default_template() -> PromptTemplate:
    """The stock template; its one-shot example is the BRAINSTEM field."""
    example_entry = DictionaryEntry("ADNI", "BRAINSTEM", "brain-stem")
    return PromptTemplate(
        role_definition=(
            "You are a clinical data interoperability specialist who maps raw "
            "dataset fields to HL7 FHIR resource element paths."
        ),
        initial_instructions=(
            "You will be shown documentation snippets about FHIR resources and "
            "elements, then one field from a clinical data dictionary. Pick the "
            "single FHIR path that best represents where this field's value "
            "belongs."
        ),
        context_placeholder="{{RETRIEVED_CONTEXT}}",
        one_shot_example=(entry_to_query(example_entry), "Observation.valueQuantity.value"),
        input_placeholder="{{FIELD_INPUT}}",
        output_format_direction=(
            f'Answer with exactly one line of the form "{ANSWER_SENTINEL} '
            '<Resource>.<element>.<element>..." and nothing else.'
        ),
        final_instructions=(
            "Use only real FHIR resource names. Prefer the most specific element "
            "that holds the field's value; measurements belong in the element "
            "that stores the numeric value, and coded classifications in the "
            "element that stores the code."
        ),
    )


def build_prompt(
    template: PromptTemplate,
    context_chunks: Sequence[str],
    entry: DictionaryEntry,
    *,
    include_codes: bool = True,
) -> str:
    """Render the full prompt for one entry.

    Chunk texts appear verbatim, in the given (retrieval-rank) order; with no
    chunks an explicit empty-context line is rendered instead.  Pure: equal
    inputs give byte-equal prompts.
    """
    template.validate()
    context = "\n\n".join(context_chunks) if context_chunks else EMPTY_CONTEXT_LINE
    query = entry_to_query(entry, include_codes=include_codes)
    before_context, rest = template.skeleton().split(template.context_placeholder)
    between, after_input = rest.split(template.input_placeholder)
    return before_context + context + between + query + after_input
