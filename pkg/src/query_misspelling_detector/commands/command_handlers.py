"""Command handlers: one handle_* method per subcommand."""

import sys
import time
from pathlib import Path
from typing import Any, Iterable, Optional, TextIO

from ..dataset import read_tsv, write_tsv
from ..dataset.splitting import SplitSpec, split
from ..mining.miner import DistanceBand, MiningPipeline, score_pairs
from ..models.checkpoint import build_model, load_checkpoint, load_encoder_weights, write_checkpoint
from ..models.configs import EncoderConfig, HeadConfig, LstmConfig
from ..models.embeddings import load_external_embeddings
from ..models.heads import EncoderClassifier, MaskedLanguageModel
from ..models.lstm import LstmClassifier
from ..models.params import Module
from ..readers.jsonl_reader import JsonlReader
from ..readers.tsv_reader import TsvReader
from ..synth.gazetteer import generate_gazetteer
from ..synth.general_text import generate_general_text
from ..synth.sessions import SessionBehavior, generate_log
from ..synth.typo_channel import TypoChannel
from ..text.normalizer import QueryNormalizer
from ..text.tokenizer import Vocabulary, build_subword_vocab, build_word_vocab
from ..training.history import TrainHistory, compare_histories
from ..training.metrics import evaluate
from ..training.predictor import Predictor
from ..training.trainer import TrainConfig, train
from ..utils.config import Config
from ..utils.errors import ConfigurationError, DetectorError, ValidationError
from ..utils.errors import InputFileNotFoundError
from ..utils.logging_config import get_logger
from ..utils.manifest import RunManifest, hash_paths, verify_inputs, write_manifest
from ..writers.report_writer import ReportWriter, format_comparison
from ..writers.tsv_writer import TsvWriter


logger = get_logger(__name__)

SPLIT_FILES = ("train.tsv", "dev.tsv", "test.tsv")


class CommandHandlers:
    """Handlers for all subcommands."""

    def __init__(self, config: Config, stdin: Optional[TextIO] = None):
        """
        Initialize command handlers.

        Args:
            config: Configuration object (flags already applied)
            stdin: Input stream for normalize / predict (defaults to sys.stdin)
        """
        self.config = config
        self.stdin = stdin
        self.tsv_reader = TsvReader()
        self.tsv_writer = TsvWriter()
        self.jsonl_reader = JsonlReader()
        self.report_writer = ReportWriter()

    # 合成データ

    def handle_synth_gen_log(self, arguments: dict[str, Any]) -> dict[str, Any]:
        """ガゼッティア・セッションログ・正解ペアを生成する。"""
        try:
            out = self._validate_string_param(arguments, "out")
            self._begin(arguments, [])
            synth = self.config.synth
            seed = self.config.seed
            n_sessions = self._positive(arguments, "sessions", synth["n_sessions"])
            n_entities = self._positive(arguments, "entities", synth["n_entities"])

            gazetteer = generate_gazetteer(seed, n_entities, zipf_exponent=synth["zipf_exponent"])
            channel = TypoChannel(
                op_probabilities=dict(synth["op_probabilities"]),
                max_edits=synth["max_edits"],
                extra_edit_prob=synth["extra_edit_prob"],
            )
            behavior = SessionBehavior(
                typo_rate=self._value(arguments, "typo_rate", synth["typo_rate"]),
                self_correct_share=synth["self_correct_share"],
                transfer_share=synth["transfer_share"],
                reformulation_share=synth["reformulation_share"],
            )
            sessions_path, truth_path = generate_log(
                gazetteer, channel, behavior, n_sessions, seed, out,
                shard_size=synth["shard_size"], workers=self.config.shards,
            )
            return self._finish(arguments, [], [out], {
                "sessions_file": str(sessions_path),
                "ground_truth_file": str(truth_path),
                "n_sessions": n_sessions,
                "n_entities": n_entities,
            })
        except DetectorError as e:
            return self._error_response(e)
        except Exception as e:
            return self._unexpected(e)

    def handle_synth_gen_general(self, arguments: dict[str, Any]) -> dict[str, Any]:
        """一般テキストを生成する。"""
        try:
            out = self._validate_string_param(arguments, "out")
            self._begin(arguments, [])
            n_lines = self._positive(arguments, "lines", self.config.synth["general_lines"])
            lines = generate_general_text(n_lines, self.config.seed)
            self.tsv_writer.write_lines(lines, out)
            return self._finish(arguments, [], [out], {"output_path": out, "n_lines": len(lines)})
        except DetectorError as e:
            return self._error_response(e)
        except Exception as e:
            return self._unexpected(e)

    # 前処理・マイニング

    def handle_normalize(self, arguments: dict[str, Any]) -> dict[str, Any]:
        """1行1クエリを正規化する。"""
        try:
            strip = bool(arguments.get("strip_diacritics")) or self.config.strip_diacritics
            normalizer = QueryNormalizer(strip_diacritics=strip)
            input_path = arguments.get("input")
            inputs = [self._validate_file_path(arguments, "input")] if input_path else []
            self._begin(arguments, inputs)
            if inputs:
                with open(inputs[0], "r", encoding="utf-8") as f:
                    lines = list(normalizer.normalize_lines(f))
            else:
                lines = list(normalizer.normalize_lines(self._stdin_lines()))

            out = arguments.get("out")
            if not out:
                return self._success_response({"success": True, "lines": lines})
            self.tsv_writer.write_lines(lines, out)
            return self._finish(arguments, inputs, [out], {"output_path": out, "n_lines": len(lines)})
        except DetectorError as e:
            return self._error_response(e)
        except Exception as e:
            return self._unexpected(e)

    def handle_mine(self, arguments: dict[str, Any]) -> dict[str, Any]:
        """セッションログをマイニングしてラベル付きデータを書き出す。"""
        try:
            sessions_path = self._validate_file_path(arguments, "sessions")
            out = self._validate_string_param(arguments, "out")
            truth_path = self._optional_file(arguments, "ground_truth")
            inputs = [sessions_path] + ([truth_path] if truth_path else [])
            self._begin(arguments, inputs)

            miner = {**self.config.miner, **self._band_overrides(arguments.get("band") or [])}
            pipeline = MiningPipeline(
                band=DistanceBand.from_config(miner),
                theta=self._value(arguments, "theta", miner["theta"]),
                shards=self.config.shards,
            )
            result = pipeline.run(self.jsonl_reader.read_sessions(sessions_path))
            write_tsv(result.labeled, out)
            outputs = [out]
            pairs = result.pairs()
            if arguments.get("pairs_out"):
                self.tsv_writer.write_pairs(pairs, arguments["pairs_out"])
                outputs.append(arguments["pairs_out"])

            payload: dict[str, Any] = {
                "output_path": out,
                "n_raw_pairs": len(result.raw_pairs),
                "n_pairs": len(pairs),
                "n_labeled": len(result.labeled),
                "n_misspelt": sum(1 for e in result.labeled if e.is_misspelt),
            }
            if truth_path:
                payload["score"] = score_pairs(pairs, self.tsv_reader.read_ground_truth(truth_path)).to_dict()
            return self._finish(arguments, inputs, outputs, payload)
        except DetectorError as e:
            return self._error_response(e)
        except Exception as e:
            return self._unexpected(e)

    def handle_split(self, arguments: dict[str, Any]) -> dict[str, Any]:
        """ラベル付きデータをtrain/dev/testに分割する。"""
        try:
            data_path = self._validate_file_path(arguments, "data")
            out = self._validate_string_param(arguments, "out")
            self._begin(arguments, [data_path])

            preset_name = arguments.get("preset") or "finetune"
            presets = self.config["dataset"]
            if preset_name not in presets:
                raise ConfigurationError(f"不明なデータセットプリセットです: {preset_name}", {"preset": preset_name})
            preset = presets[preset_name]
            spec = SplitSpec(
                train_n=self._value(arguments, "train_n", preset["train_n"]),
                dev_n=self._value(arguments, "dev_n", preset["dev_n"]),
                test_n=self._value(arguments, "test_n", preset["test_n"]),
                misspell_ratio=self._value(arguments, "ratio", preset["misspell_ratio"]),
                seed=self.config.seed,
            )
            parts = split(read_tsv(data_path), spec)
            out_dir = Path(out)
            sizes = {}
            for name, part in zip(SPLIT_FILES, parts):
                write_tsv(part, str(out_dir / name))
                sizes[name] = len(part)
            return self._finish(arguments, [data_path], [out], {"output_dir": out, "sizes": sizes})
        except DetectorError as e:
            return self._error_response(e)
        except Exception as e:
            return self._unexpected(e)

    def handle_build_vocab(self, arguments: dict[str, Any]) -> dict[str, Any]:
        """語彙を構築する。"""
        try:
            out = self._validate_string_param(arguments, "out")
            kind = self._validate_string_param(arguments, "kind")
            if kind not in ("word", "subword"):
                raise ConfigurationError(f"不明な語彙の種類です: {kind}", {"kind": kind})
            data_paths, text_paths = self._corpus_paths(arguments)
            self._begin(arguments, data_paths + text_paths)

            corpus = self._read_corpus(data_paths, text_paths)
            settings = self.config.vocab
            if kind == "word":
                vocab = build_word_vocab(corpus, self._positive(arguments, "size", settings["word_max_size"]))
            else:
                vocab = build_subword_vocab(
                    corpus,
                    self._positive(arguments, "size", settings["subword_size"]),
                    n_merges_cap=settings["n_merges_cap"],
                )
            vocab.save(out)
            return self._finish(arguments, data_paths + text_paths, [out], {
                "output_path": out,
                "kind": vocab.kind,
                "size": len(vocab),
                "content_hash": vocab.content_hash,
            })
        except DetectorError as e:
            return self._error_response(e)
        except Exception as e:
            return self._unexpected(e)

    # 学習・評価

    def handle_pretrain(self, arguments: dict[str, Any]) -> dict[str, Any]:
        """エンコーダをMLMで事前学習する。"""
        try:
            out = self._validate_string_param(arguments, "out")
            vocab_path = self._validate_file_path(arguments, "vocab")
            dev_path = self._optional_file(arguments, "dev")
            data_paths, text_paths = self._corpus_paths(arguments)
            inputs = [vocab_path] + data_paths + text_paths + ([dev_path] if dev_path else [])
            self._begin(arguments, inputs)

            vocab = self._subword_vocab(vocab_path)
            corpus = self._read_corpus(data_paths, text_paths)
            dev = [e.query for e in read_tsv(dev_path)] if dev_path else []
            encoder_config = self._encoder_config(arguments, vocab)
            model = MaskedLanguageModel(encoder_config, seed=self.config.seed)
            train_config = self._train_config(arguments, "pretrain", "mlm_pretrain")
            label = arguments.get("label") or f"mlm-{arguments.get('encoder_preset') or 'slim'}"

            checkpoint, history = train(model, train_config, corpus, dev, vocab, encoder_config.max_len, label)
            history_path = self._save_outputs(arguments, checkpoint, history)
            best = history.best
            return self._finish(arguments, inputs, [out, history_path], {
                "output_path": out,
                "history_path": history_path,
                "best_epoch": history.best_epoch,
                "best_dev_loss": best.dev_loss if best else None,
            })
        except DetectorError as e:
            return self._error_response(e)
        except Exception as e:
            return self._unexpected(e)

    def handle_finetune(self, arguments: dict[str, Any]) -> dict[str, Any]:
        """誤字検出の分類器を学習する。"""
        try:
            out = self._validate_string_param(arguments, "out")
            model_type = self._validate_string_param(arguments, "model_type")
            train_path = self._validate_file_path(arguments, "train")
            dev_path = self._validate_file_path(arguments, "dev")
            vocab_path = self._validate_file_path(arguments, "vocab")
            init_path = self._optional_file(arguments, "init")
            embeddings_path = self._optional_file(arguments, "embeddings")
            inputs = [train_path, dev_path, vocab_path] + [p for p in (init_path, embeddings_path) if p]
            self._begin(arguments, inputs)

            vocab = Vocabulary.load(vocab_path)
            model: Module
            if model_type == "lstm":
                model, max_len, label = self._build_lstm(arguments, vocab, embeddings_path)
                train_config = self._train_config(arguments, "lstm", "lstm")
            elif model_type == "encoder":
                model, max_len, label = self._build_encoder_classifier(arguments, vocab, init_path)
                train_config = self._train_config(arguments, "finetune", "finetune")
            else:
                raise ConfigurationError(f"不明なモデルの種類です: {model_type}", {"model_type": model_type})

            checkpoint, history = train(
                model, train_config, read_tsv(train_path), read_tsv(dev_path), vocab, max_len,
                arguments.get("label") or label,
            )
            history_path = self._save_outputs(arguments, checkpoint, history)
            best = history.best
            return self._finish(arguments, inputs, [out, history_path], {
                "output_path": out,
                "history_path": history_path,
                "best_epoch": history.best_epoch,
                "best_dev": best.dev.to_dict() if best and best.dev else None,
            })
        except DetectorError as e:
            return self._error_response(e)
        except Exception as e:
            return self._unexpected(e)

    def handle_evaluate(self, arguments: dict[str, Any]) -> dict[str, Any]:
        """チェックポイントを評価する。"""
        try:
            model_path = self._validate_file_path(arguments, "model")
            data_path = self._validate_file_path(arguments, "data")
            self._begin(arguments, [model_path, data_path])

            checkpoint = load_checkpoint(model_path)
            if checkpoint.arch == "encoder":
                raise ValidationError("事前学習のみのチェックポイントは評価できません", {"arch": checkpoint.arch})
            report = evaluate(build_model(checkpoint), read_tsv(data_path), checkpoint.vocab, checkpoint.max_len)
            payload = {"metrics": report.to_dict(), "table": report.format_table()}
            if arguments.get("xlsx"):
                self.report_writer.write_metrics(report, arguments["xlsx"])
                return self._finish(arguments, [model_path, data_path], [arguments["xlsx"]], payload)
            return self._success_response({"success": True, **payload})
        except DetectorError as e:
            return self._error_response(e)
        except Exception as e:
            return self._unexpected(e)

    def handle_predict(self, arguments: dict[str, Any]) -> dict[str, Any]:
        """クエリごとに (誤字あり, 確率) を返す。"""
        try:
            model_path = self._validate_file_path(arguments, "model")
            self._begin(arguments, [model_path])
            predictor = Predictor.from_file(model_path, strip_diacritics=self.config.strip_diacritics)
            queries = arguments.get("query") or [line.rstrip("\n") for line in self._stdin_lines()]
            predictions = []
            for query in queries:
                is_misspelt, probability = predictor.predict(query)
                predictions.append({"query": query, "is_misspelt": is_misspelt, "probability": probability})
            return self._success_response({"success": True, "predictions": predictions})
        except DetectorError as e:
            return self._error_response(e)
        except Exception as e:
            return self._unexpected(e)

    def handle_report(self, arguments: dict[str, Any]) -> dict[str, Any]:
        """学習履歴の比較表を作る。"""
        try:
            paths = arguments.get("histories") or []
            if not paths:
                raise ValidationError("学習履歴が指定されていません", {"missing_parameter": "histories"})
            for path in paths:
                if not Path(path).exists():
                    raise InputFileNotFoundError(f"ファイルが見つかりません: {path}", {"file_path": path})
            self._begin(arguments, list(paths))

            rows = compare_histories([TrainHistory.load(p) for p in paths])
            payload = {"rows": [row.to_dict() for row in rows], "table": format_comparison(rows)}
            if arguments.get("xlsx"):
                self.report_writer.write_comparison(rows, arguments["xlsx"])
                return self._finish(arguments, list(paths), [arguments["xlsx"]], payload)
            return self._success_response({"success": True, **payload})
        except DetectorError as e:
            return self._error_response(e)
        except Exception as e:
            return self._unexpected(e)

    # モデル構築

    def _encoder_config(self, arguments: dict[str, Any], vocab: Vocabulary) -> EncoderConfig:
        return EncoderConfig.preset(
            arguments.get("encoder_preset") or "slim",
            len(vocab),
            self.config["encoder"],
            self.config.vocab["max_len"],
        )

    def _subword_vocab(self, vocab_path: str) -> Vocabulary:
        vocab = Vocabulary.load(vocab_path)
        if vocab.kind != "subword":
            raise ConfigurationError(
                f"エンコーダにはサブワード語彙が必要です: {vocab_path}",
                {"kind": vocab.kind}
            )
        return vocab

    def _build_lstm(
        self,
        arguments: dict[str, Any],
        vocab: Vocabulary,
        embeddings_path: Optional[str],
    ) -> tuple[LstmClassifier, int, str]:
        if vocab.kind != "word":
            raise ConfigurationError("LSTMには単語語彙が必要です", {"kind": vocab.kind})
        settings = self.config["lstm"]
        weights = None
        trainable = True
        embed_dim = settings["embed_dim"]
        label = "lstm"
        if embeddings_path:
            freeze = bool(arguments.get("freeze_embeddings"))
            weights, trainable = load_external_embeddings(
                embeddings_path, vocab, freeze=freeze,
                oov_policy=arguments.get("oov_policy") or "uniform", seed=self.config.seed,
            )
            embed_dim = weights.shape[1]
            label = f"lstm-external-{embed_dim}d" + ("-freeze" if freeze else "")
        config = LstmConfig(
            vocab_size=len(vocab),
            embed_dim=embed_dim,
            hidden_dim=settings["hidden_dim"],
            max_len=self.config.vocab["max_len"],
            embeddings_trainable=trainable,
            external_embeddings=embeddings_path,
        )
        return LstmClassifier(config, seed=self.config.seed, embedding_weights=weights), config.max_len, label

    def _build_encoder_classifier(
        self,
        arguments: dict[str, Any],
        vocab: Vocabulary,
        init_path: Optional[str],
    ) -> tuple[EncoderClassifier, int, str]:
        if vocab.kind != "subword":
            raise ConfigurationError("エンコーダにはサブワード語彙が必要です", {"kind": vocab.kind})
        encoder_config = self._encoder_config(arguments, vocab)
        head_settings = self.config["head"]
        head_config = HeadConfig(
            pooling=arguments.get("pooling") or head_settings["pooling"],
            dropout_p=head_settings["dropout_p"],
            encoder_frozen=bool(arguments.get("freeze")),
        )
        model = EncoderClassifier(encoder_config, head_config, seed=self.config.seed)
        label = f"encoder-{arguments.get('encoder_preset') or 'slim'}"
        if init_path:
            load_encoder_weights(model, load_checkpoint(init_path, vocab))
            label += "-pretrained"
        if head_config.encoder_frozen:
            label += "-freeze"
        return model, encoder_config.max_len, label

    def _train_config(self, arguments: dict[str, Any], default_preset: str, task: str) -> TrainConfig:
        preset = self.config.training_preset(arguments.get("training_preset") or default_preset)
        preset.setdefault("dev_fraction", self.config["training"]["pretrain_dev_fraction"])
        return TrainConfig.from_preset(
            preset, task, self.config.seed,
            max_epochs=arguments.get("epochs"),
            batch_size=arguments.get("batch_size"),
            lr=arguments.get("lr"),
        )

    def _save_outputs(self, arguments: dict[str, Any], checkpoint, history: TrainHistory) -> str:
        out = arguments["out"]
        history_path = arguments.get("history") or f"{out}.history.jsonl"
        write_checkpoint(checkpoint, out)
        history.save(history_path)
        return history_path

    # 入力

    def _stdin_lines(self) -> Iterable[str]:
        return self.stdin if self.stdin is not None else sys.stdin

    def _corpus_paths(self, arguments: dict[str, Any]) -> tuple[list[str], list[str]]:
        data_paths = [self._check_file(p) for p in arguments.get("data") or []]
        text_paths = [self._check_file(p) for p in arguments.get("text") or []]
        if not data_paths and not text_paths:
            raise ValidationError("コーパスが指定されていません（--data または --text）")
        return data_paths, text_paths

    def _read_corpus(self, data_paths: list[str], text_paths: list[str]) -> list[str]:
        normalizer = QueryNormalizer(strip_diacritics=self.config.strip_diacritics)
        corpus: list[str] = []
        for path in data_paths:
            corpus.extend(e.query for e in read_tsv(path))
        for path in text_paths:
            corpus.extend(line for line in map(normalizer, self.tsv_reader.read_lines(path)) if line)
        return corpus

    # ヘルパーメソッド

    def _band_overrides(self, items: list[str]) -> dict[str, float]:
        """`key=value` 形式の距離帯の上書きを解釈する。"""
        overrides: dict[str, float] = {}
        for item in items:
            key, sep, raw = item.partition("=")
            if not sep or key not in self.config.miner or key == "theta":
                raise ConfigurationError(f"不正な距離帯の指定です: {item}", {"band": item})
            try:
                overrides[key] = float(raw)
            except ValueError:
                raise ConfigurationError(f"距離帯の値が数値ではありません: {item}", {"band": item})
        return overrides

    def _value(self, arguments: dict[str, Any], key: str, default: Any) -> Any:
        value = arguments.get(key)
        return default if value is None else value

    def _positive(self, arguments: dict[str, Any], key: str, default: int) -> int:
        value = self._value(arguments, key, default)
        if value < 1:
            raise ConfigurationError(f"{key}は1以上である必要があります", {key: value})
        return value

    def _check_file(self, file_path: str) -> str:
        path = Path(file_path).expanduser()
        if not path.exists():
            raise InputFileNotFoundError(f"ファイルが見つかりません: {file_path}", {"file_path": str(path)})
        if not path.is_file():
            raise ValidationError(f"指定されたパスはファイルではありません: {file_path}", {"file_path": str(path)})
        return str(path)

    def _optional_file(self, arguments: dict[str, Any], key: str) -> Optional[str]:
        return self._validate_file_path(arguments, key) if arguments.get(key) else None

    def _validate_file_path(self, arguments: dict[str, Any], key: str) -> str:
        """
        ファイルパスパラメータを検証する。

        Raises:
            ValidationError: パラメータが無効な場合
            InputFileNotFoundError: ファイルが存在しない場合
        """
        return self._check_file(self._validate_string_param(arguments, key))

    def _validate_string_param(self, arguments: dict[str, Any], key: str) -> str:
        """
        文字列パラメータを検証する。

        Raises:
            ConfigurationError: 必須パラメータがない場合
            ValidationError: パラメータが文字列でない、または空の場合
        """
        if arguments.get(key) is None:
            raise ConfigurationError(
                f"必須パラメータが不足しています: --{key.replace('_', '-')}",
                {"missing_parameter": key}
            )
        value = arguments[key]
        if not isinstance(value, str):
            raise ValidationError(
                f"パラメータは文字列である必要があります: {key}",
                {"parameter": key, "type": type(value).__name__}
            )
        if not value.strip():
            raise ValidationError(f"パラメータが空です: {key}", {"parameter": key})
        return value

    def _begin(self, arguments: dict[str, Any], inputs: list[str]) -> None:
        """--verify-manifest が指定されている場合に入力ハッシュを照合する。"""
        arguments.setdefault("_start_time", time.time())
        if arguments.get("verify_manifest"):
            verify_inputs(arguments["verify_manifest"], inputs)

    def _finish(
        self,
        arguments: dict[str, Any],
        inputs: list[str],
        outputs: list[str],
        payload: dict[str, Any],
    ) -> dict[str, Any]:
        """マニフェストを書き出して成功レスポンスを返す。"""
        manifest = RunManifest(
            command_line=list(arguments.get("_argv") or []),
            config=self.config.as_dict(),
            seeds={"seed": self.config.seed},
            inputs=hash_paths(inputs),
            outputs=hash_paths(outputs),
            wall_time_seconds=round(time.time() - arguments.get("_start_time", time.time()), 3),
        )
        manifest_path = write_manifest(manifest, outputs[0])
        return self._success_response({"success": True, **payload, "manifest": str(manifest_path)})

    def _success_response(self, content: dict[str, Any]) -> dict[str, Any]:
        return content

    def _unexpected(self, error: Exception) -> dict[str, Any]:
        logger.error(f"予期しないエラー: {error}", exc_info=True)
        return self._error_response(DetectorError(f"予期しないエラー: {str(error)}"))

    def _error_response(self, error: DetectorError) -> dict[str, Any]:
        """
        エラーレスポンスを生成する。

        Args:
            error: エラーオブジェクト

        Returns:
            {"success": False, "error": {"type", "message", "details"}}
        """
        return {
            "success": False,
            "error": {
                "type": type(error).__name__,
                "message": error.message,
                "details": error.details
            }
        }
