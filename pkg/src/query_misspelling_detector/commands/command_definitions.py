"""Subcommand definitions for the query misspelling detector CLI."""

# コマンドスキーマ定義
# 各プロパティは "--" + 名前（_は-）のフラグになる。positional: True の場合は位置引数、aliases は別名のフラグ。

# すべてのコマンドに共通のオプション
COMMON_PROPERTIES = {
    "seed": {
        "type": "integer",
        "description": "乱数シード（設定ファイルの値を上書き）"
    },
    "out": {
        "type": "string",
        "description": "出力先のパス（ファイルまたはディレクトリ）"
    },
    "config": {
        "type": "string",
        "description": "JSON設定ファイルのパス"
    },
    "log_level": {
        "type": "string",
        "enum": ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        "description": "ログレベル"
    },
    "verify_manifest": {
        "type": "string",
        "description": "入力ファイルのハッシュを照合する既存のマニフェスト"
    },
    "shards": {
        "type": "integer",
        "description": "並列ワーカー数（結果には影響しない）"
    },
}

# 合成データ

SYNTH_GEN_LOG_SCHEMA = {
    "name": "synth gen-log",
    "description": "ガゼッティアを生成し、キーストロークセッションログと正解ペアを合成します",
    "inputSchema": {
        "type": "object",
        "properties": {
            "sessions": {
                "type": "integer",
                "description": "生成するセッション数"
            },
            "entities": {
                "type": "integer",
                "description": "ガゼッティアのエンティティ数"
            },
            "typo_rate": {
                "type": "number",
                "description": "タイプミスを含むセッションの割合"
            }
        },
        "required": ["out"]
    }
}

SYNTH_GEN_GENERAL_SCHEMA = {
    "name": "synth gen-general",
    "description": "クロスドメイン事前学習用の一般テキストを生成します",
    "inputSchema": {
        "type": "object",
        "properties": {
            "lines": {
                "type": "integer",
                "description": "生成する行数"
            }
        },
        "required": ["out"]
    }
}

# 前処理・マイニング

NORMALIZE_SCHEMA = {
    "name": "normalize",
    "description": "1行1クエリを正規化します（入力省略時は標準入力、出力省略時は標準出力）",
    "inputSchema": {
        "type": "object",
        "properties": {
            "input": {
                "type": "string",
                "description": "入力ファイルのパス"
            },
            "strip_diacritics": {
                "type": "boolean",
                "description": "ダイアクリティカルマークを除去する"
            }
        },
        "required": []
    }
}

MINE_SCHEMA = {
    "name": "mine",
    "description": "セッションログから誤字ペアをマイニングし、ラベル付きデータを書き出します",
    "inputSchema": {
        "type": "object",
        "properties": {
            "sessions": {
                "type": "string",
                "description": "セッションログ（JSON-lines）のパス"
            },
            "band": {
                "type": "array",
                "description": "距離帯の上書き（min_dist=1 max_rel_dist=0.4 など）"
            },
            "ground_truth": {
                "type": "string",
                "description": "正解ペアのTSV（指定時は適合率・再現率を出力）"
            },
            "pairs_out": {
                "type": "string",
                "description": "校正後のペア（q, c, count, source）の出力先"
            },
            "theta": {
                "type": "number",
                "description": "確率校正のしきい値"
            }
        },
        "required": ["sessions", "out"]
    }
}

SPLIT_SCHEMA = {
    "name": "split",
    "description": "ラベル付きデータを重複のないtrain/dev/testに分割します",
    "inputSchema": {
        "type": "object",
        "properties": {
            "data": {
                "type": "string",
                "aliases": ["in"],
                "description": "ラベル付きデータ（TSV）のパス"
            },
            "preset": {
                "type": "string",
                "enum": ["finetune", "pretrain"],
                "default": "finetune",
                "description": "サイズと誤字率のプリセット"
            },
            "train_n": {
                "type": "integer",
                "aliases": ["train"],
                "description": "trainのサイズ"
            },
            "dev_n": {
                "type": "integer",
                "aliases": ["dev"],
                "description": "devのサイズ"
            },
            "test_n": {
                "type": "integer",
                "aliases": ["test"],
                "description": "testのサイズ"
            },
            "ratio": {
                "type": "number",
                "description": "誤字クエリの割合"
            }
        },
        "required": ["data", "out"]
    }
}

BUILD_VOCAB_SCHEMA = {
    "name": "build-vocab",
    "description": "単語語彙（LSTM用）またはサブワード語彙（エンコーダ用）を構築します",
    "inputSchema": {
        "type": "object",
        "properties": {
            "kind": {
                "type": "string",
                "enum": ["word", "subword"],
                "description": "語彙の種類"
            },
            "data": {
                "type": "array",
                "aliases": ["in"],
                "description": "ラベル付きデータ（TSV）のパス"
            },
            "text": {
                "type": "array",
                "description": "1行1テキストのファイルのパス"
            },
            "size": {
                "type": "integer",
                "description": "語彙サイズの上限"
            }
        },
        "required": ["kind", "out"]
    }
}

# 学習・評価

TRAINING_PROPERTIES = {
    "vocab": {
        "type": "string",
        "description": "語彙ファイルのパス"
    },
    "training_preset": {
        "type": "string",
        "description": "学習プリセット名（pretrain, finetune, finetune_long, roberta_style, supervised, lstm）"
    },
    "epochs": {
        "type": "integer",
        "description": "最大エポック数"
    },
    "batch_size": {
        "type": "integer",
        "description": "バッチサイズ"
    },
    "lr": {
        "type": "number",
        "description": "学習率"
    },
    "history": {
        "type": "string",
        "description": "学習履歴（JSON-lines）の出力先（省略時は <out>.history.jsonl）"
    },
    "label": {
        "type": "string",
        "description": "履歴と比較表に使うモデル名"
    },
    "encoder_preset": {
        "type": "string",
        "enum": ["full", "slim"],
        "default": "slim",
        "description": "エンコーダのプリセット"
    },
}

PRETRAIN_SCHEMA = {
    "name": "pretrain",
    "description": "エンコーダをMLMで事前学習します",
    "inputSchema": {
        "type": "object",
        "properties": {
            **TRAINING_PROPERTIES,
            "data": {
                "type": "array",
                "description": "ラベル付きデータ（TSV）のパス（クエリのみ使用）"
            },
            "text": {
                "type": "array",
                "description": "1行1テキストのファイルのパス"
            },
            "dev": {
                "type": "string",
                "description": "dev用のTSV（省略時は学習データから取り分ける）"
            }
        },
        "required": ["vocab", "out"]
    }
}

FINETUNE_SCHEMA = {
    "name": "finetune",
    "description": "誤字検出の分類器（LSTMまたはエンコーダ + ヘッド）を学習します",
    "inputSchema": {
        "type": "object",
        "properties": {
            **TRAINING_PROPERTIES,
            "model_type": {
                "type": "string",
                "enum": ["lstm", "encoder"],
                "description": "モデルの種類"
            },
            "train": {
                "type": "string",
                "description": "train用のTSV"
            },
            "dev": {
                "type": "string",
                "description": "dev用のTSV"
            },
            "init": {
                "type": "string",
                "description": "事前学習済みエンコーダのチェックポイント"
            },
            "freeze": {
                "type": "boolean",
                "description": "エンコーダを凍結する"
            },
            "pooling": {
                "type": "string",
                "enum": ["last_layer_cls", "avg_last4_cls"],
                "description": "プーリング戦略"
            },
            "embeddings": {
                "type": "string",
                "description": "外部単語埋め込みファイル（word v1 ... vd）"
            },
            "freeze_embeddings": {
                "type": "boolean",
                "description": "外部埋め込みを凍結する"
            },
            "oov_policy": {
                "type": "string",
                "enum": ["uniform", "zeros"],
                "default": "uniform",
                "description": "埋め込みファイルにない単語の初期化"
            }
        },
        "required": ["model_type", "train", "dev", "vocab", "out"]
    }
}

EVALUATE_SCHEMA = {
    "name": "evaluate",
    "description": "チェックポイントをラベル付きデータで評価し、MetricsReportをJSONで出力します",
    "inputSchema": {
        "type": "object",
        "properties": {
            "model": {
                "type": "string",
                "description": "チェックポイントのパス"
            },
            "data": {
                "type": "string",
                "description": "評価用のTSV"
            },
            "xlsx": {
                "type": "string",
                "description": "メトリクスのExcel出力先"
            }
        },
        "required": ["model", "data"]
    }
}

PREDICT_SCHEMA = {
    "name": "predict",
    "description": "クエリが誤字を含むかどうかと確率を出力します（クエリ省略時は標準入力）",
    "inputSchema": {
        "type": "object",
        "properties": {
            "model": {
                "type": "string",
                "description": "チェックポイントのパス"
            },
            "query": {
                "type": "array",
                "description": "判定するクエリ"
            }
        },
        "required": ["model"]
    }
}

REPORT_SCHEMA = {
    "name": "report",
    "description": "複数の学習履歴から「Best Models in a Row」形式の比較表を作成します",
    "inputSchema": {
        "type": "object",
        "properties": {
            "histories": {
                "type": "array",
                "positional": True,
                "description": "学習履歴（JSON-lines）のパス"
            },
            "xlsx": {
                "type": "string",
                "description": "比較表のExcel出力先"
            },
            "json": {
                "type": "boolean",
                "description": "表の代わりにJSONで出力する"
            }
        },
        "required": ["histories"]
    }
}

# すべてのコマンドスキーマをリストとして公開
ALL_COMMAND_SCHEMAS = [
    SYNTH_GEN_LOG_SCHEMA,
    SYNTH_GEN_GENERAL_SCHEMA,
    NORMALIZE_SCHEMA,
    MINE_SCHEMA,
    SPLIT_SCHEMA,
    BUILD_VOCAB_SCHEMA,
    PRETRAIN_SCHEMA,
    FINETUNE_SCHEMA,
    EVALUATE_SCHEMA,
    PREDICT_SCHEMA,
    REPORT_SCHEMA,
]
