"""Subcommand schemas and handlers."""

from .command_definitions import ALL_COMMAND_SCHEMAS, COMMON_PROPERTIES
from .command_handlers import CommandHandlers

__all__ = ["ALL_COMMAND_SCHEMAS", "COMMON_PROPERTIES", "CommandHandlers"]
