from __future__ import annotations

import pytest

from fhirmap import DictionaryEntry, PromptTemplate, build_prompt, default_template
from fhirmap.prompting import EMPTY_CONTEXT_LINE

ENTRY = DictionaryEntry("ADNI", "MAGSTRENGTH", "MRI Machine Magnetic Field Strength")


def test_all_seven_sections_render_in_order():
    template = default_template()
    prompt = build_prompt(template, ["ctx"], ENTRY)
    positions = [
        prompt.index(template.role_definition),
        prompt.index(template.initial_instructions),
        prompt.index("ctx"),
        prompt.index(template.one_shot_example[0]),
        prompt.index("Field name: MAGSTRENGTH"),
        prompt.index(template.output_format_direction),
        prompt.index(template.final_instructions),
    ]
    assert positions == sorted(positions)


def test_chunks_appear_verbatim_in_rank_order():
    prompt = build_prompt(default_template(), ["chunk A text", "chunk B text"], ENTRY)
    assert "chunk A text" in prompt
    assert "chunk B text" in prompt
    assert prompt.index("chunk A text") < prompt.index("chunk B text")


def test_zero_chunks_render_empty_context_sentinel():
    prompt = build_prompt(default_template(), [], ENTRY)
    assert EMPTY_CONTEXT_LINE in prompt


def test_entry_values_appear_verbatim():
    prompt = build_prompt(default_template(), [], ENTRY)
    assert "MAGSTRENGTH" in prompt
    assert "MRI Machine Magnetic Field Strength" in prompt


def test_build_prompt_is_pure():
    chunks = ["a", "b"]
    one = build_prompt(default_template(), chunks, ENTRY)
    two = build_prompt(default_template(), list(chunks), ENTRY)
    assert one == two


def test_placeholders_must_appear_exactly_once():
    template = default_template()
    broken = PromptTemplate(
        role_definition=template.context_placeholder,  # duplicates the marker
        initial_instructions=template.initial_instructions,
        context_placeholder=template.context_placeholder,
        one_shot_example=template.one_shot_example,
        input_placeholder=template.input_placeholder,
        output_format_direction=template.output_format_direction,
        final_instructions=template.final_instructions,
    )
    with pytest.raises(ValueError, match="exactly once"):
        build_prompt(broken, [], ENTRY)


def test_one_shot_example_is_brainstem_pair():
    example_input, example_output = default_template().one_shot_example
    assert "BRAINSTEM" in example_input
    assert "brain-stem" in example_input
    assert example_output == "Observation.valueQuantity.value"


def test_template_is_customizable():
    template = default_template()
    custom = PromptTemplate(
        role_definition="You map fields.",
        initial_instructions="Read the context.",
        context_placeholder="<<CTX>>",
        one_shot_example=("Field name: X", "Patient.birthDate"),
        input_placeholder="<<IN>>",
        output_format_direction=template.output_format_direction,
        final_instructions="Answer carefully.",
    )
    prompt = build_prompt(custom, ["doc text"], ENTRY)
    assert "You map fields." in prompt
    assert "doc text" in prompt
    assert "<<CTX>>" not in prompt
    assert "<<IN>>" not in prompt
