"""Declarative form descriptions rendered by UI layers.

The core is headless: wherever a key scheme needs user input (a password,
an identity, a choice between variants) it hands back a ``FormSchema``
describing the fields instead of drawing widgets itself.
"""
from __future__ import annotations

from dataclasses import dataclass, field

INPUT_KINDS = ("text", "password", "identity", "choice")


@dataclass(frozen=True)
class FormField:
    field_name: str
    label: str
    input_kind: str = "text"
    required: bool = True
    choices: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.input_kind not in INPUT_KINDS:
            raise ValueError(f"unknown input kind: {self.input_kind!r}")
        if self.input_kind == "choice" and not self.choices:
            raise ValueError("choice field needs choices")


@dataclass(frozen=True)
class FormSchema:
    fields: tuple[FormField, ...] = field(default_factory=tuple)
    title: str = ""

    def __post_init__(self) -> None:
        names = [f.field_name for f in self.fields]
        if len(names) != len(set(names)):
            raise ValueError("duplicate field names in form schema")

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "fields": [
                {
                    "field_name": f.field_name,
                    "label": f.label,
                    "input_kind": f.input_kind,
                    "required": f.required,
                    **({"choices": list(f.choices)} if f.choices else {}),
                }
                for f in self.fields
            ],
        }


def password_reentry_form(label: str = "Enter password") -> FormSchema:
    return FormSchema(
        title=label,
        fields=(FormField("password", "Password", input_kind="password"),),
    )
