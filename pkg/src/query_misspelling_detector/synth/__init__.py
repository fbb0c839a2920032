"""Synthetic maps-search corpus: gazetteer, typo channel, keystroke sessions."""

from .gazetteer import Gazetteer, generate_gazetteer
from .general_text import generate_general_text
from .sessions import SessionBehavior, generate_log, simulate_session
from .typo_channel import TypoChannel, inject_typo

__all__ = [
    "Gazetteer",
    "SessionBehavior",
    "TypoChannel",
    "generate_gazetteer",
    "generate_general_text",
    "generate_log",
    "inject_typo",
    "simulate_session",
]
