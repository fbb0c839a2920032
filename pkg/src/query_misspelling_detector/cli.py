"""Command-line entry point for the query misspelling detector."""

import argparse
import json
import sys
from typing import Any, Callable, Optional, Sequence

from . import __version__
from .commands import ALL_COMMAND_SCHEMAS, COMMON_PROPERTIES, CommandHandlers
from .utils.config import Config
from .utils.errors import ConfigurationError
from .utils.logging_config import get_logger, set_log_level, setup_logging


logger = get_logger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_MISSING_FILE = 3
EXIT_DATA = 4
EXIT_HASH_MISMATCH = 5
EXIT_RUNTIME = 6

# エラー型 -> 終了コード
EXIT_CODES = {
    "ConfigurationError": EXIT_CONFIG,
    "InputFileNotFoundError": EXIT_MISSING_FILE,
    "ParseError": EXIT_DATA,
    "ValidationError": EXIT_DATA,
    "InsufficientClassError": EXIT_DATA,
    "SizingError": EXIT_DATA,
    "InapplicableChannelError": EXIT_DATA,
    "NothingToMaskError": EXIT_DATA,
    "UndefinedLossError": EXIT_DATA,
    "HashMismatchError": EXIT_HASH_MISMATCH,
    "TrainingDivergedError": EXIT_RUNTIME,
    "CheckpointError": EXIT_RUNTIME,
    "ShapeError": EXIT_RUNTIME,
    "OutputWriteError": EXIT_RUNTIME,
}

_TYPES: dict[str, Callable[[str], Any]] = {"string": str, "integer": int, "number": float}


def _add_property(parser: argparse.ArgumentParser, name: str, spec: dict[str, Any], required: bool) -> None:
    if spec.get("positional"):
        parser.add_argument(name, nargs="+", help=spec.get("description"))
        return
    flags = [f"--{alias.replace('_', '-')}" for alias in [name] + spec.get("aliases", [])]
    kwargs: dict[str, Any] = {"dest": name, "help": spec.get("description")}
    if spec["type"] == "boolean":
        kwargs["action"] = "store_true"
    else:
        if spec["type"] == "array":
            kwargs["nargs"] = "+"
        else:
            kwargs["type"] = _TYPES[spec["type"]]
        if "enum" in spec:
            kwargs["choices"] = spec["enum"]
        kwargs["required"] = required
    parser.add_argument(*flags, **kwargs)


def _handler_name(command: str) -> str:
    return "handle_" + command.replace(" ", "_").replace("-", "_")


def build_parser() -> argparse.ArgumentParser:
    """コマンドスキーマからargparseのパーサを組み立てる。"""
    parser = argparse.ArgumentParser(
        prog="query-misspelling-detector",
        description="クエリログから誤字ペアをマイニングし、誤字検出モデルを学習・評価します",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    groups: dict[str, argparse._SubParsersAction] = {}

    for schema in ALL_COMMAND_SCHEMAS:
        words = schema["name"].split()
        if len(words) == 2:
            if words[0] not in groups:
                group = commands.add_parser(words[0], help=f"{words[0]} サブコマンド")
                groups[words[0]] = group.add_subparsers(dest="subcommand", metavar="SUBCOMMAND", required=True)
            sub = groups[words[0]].add_parser(words[1], help=schema["description"])
        else:
            sub = commands.add_parser(words[0], help=schema["description"])
        sub.set_defaults(handler=_handler_name(schema["name"]))

        input_schema = schema["inputSchema"]
        required = set(input_schema.get("required", []))
        for name, spec in {**COMMON_PROPERTIES, **input_schema["properties"]}.items():
            _add_property(sub, name, spec, name in required)
    return parser


def _print_result(result: dict[str, Any], arguments: dict[str, Any]) -> None:
    if "lines" in result:
        for line in result["lines"]:
            print(line)
    elif "predictions" in result:
        for p in result["predictions"]:
            print(f"{p['query']}\t{p['is_misspelt']}\t{p['probability']:.6f}")
    elif "metrics" in result:
        print(json.dumps(result["metrics"], ensure_ascii=False, indent=2))
    elif "table" in result and not arguments.get("json"):
        print(result["table"])
    else:
        payload = {k: v for k, v in result.items() if k not in ("success", "table")}
        print(json.dumps(payload, ensure_ascii=False, indent=2))


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Main entry point for the CLI."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        # argparseの使い方エラーは終了コード2
        args = build_parser().parse_args(argv)
        arguments = vars(args)
        handler_name = arguments.pop("handler")
        arguments["_argv"] = ["query-misspelling-detector"] + argv

        setup_logging()
        overrides = {key: arguments[key] for key in ("seed", "shards") if arguments.get(key) is not None}
        config = Config(arguments.get("config"), overrides)
        set_log_level(arguments.get("log_level") or config["log_level"])

        logger.debug(f"コマンドを実行: {handler_name}")
        result = getattr(CommandHandlers(config), handler_name)(arguments)

    except ConfigurationError as e:
        print(json.dumps({"success": False, "error": {
            "type": type(e).__name__, "message": e.message, "details": e.details
        }}, ensure_ascii=False), file=sys.stderr)
        sys.exit(EXIT_CONFIG)

    except KeyboardInterrupt:
        logger.info("ユーザーによって中断されました")
        sys.exit(130)

    if not result.get("success", False):
        error = result["error"]
        logger.error(f"コマンドが失敗: {error['type']}: {error['message']}")
        print(json.dumps(result, ensure_ascii=False), file=sys.stderr)
        sys.exit(EXIT_CODES.get(error["type"], EXIT_UNEXPECTED))

    _print_result(result, arguments)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
