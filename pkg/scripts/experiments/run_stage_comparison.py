"""複数シードでモデルステージを比較するスクリプト

シードごとに 合成ログ → マイニング → 分割 → 語彙 → 事前学習 → 微調整 → 評価 を実行し、
テストセットのマクロF1で各ステージを比較する。

    python scripts/experiments/run_stage_comparison.py --seeds 41 42 43 --out runs/
"""

import argparse
import json
import sys
import time
from pathlib import Path

# srcディレクトリをパスに追加
sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))

from query_misspelling_detector.dataset import SplitSpec, split, write_tsv
from query_misspelling_detector.mining.miner import DistanceBand, MiningPipeline, score_pairs
from query_misspelling_detector.models import (
    EncoderClassifier,
    EncoderConfig,
    HeadConfig,
    LstmClassifier,
    LstmConfig,
    MaskedLanguageModel,
    load_encoder_weights,
    write_checkpoint,
)
from query_misspelling_detector.readers.jsonl_reader import JsonlReader
from query_misspelling_detector.readers.tsv_reader import TsvReader
from query_misspelling_detector.synth.gazetteer import generate_gazetteer
from query_misspelling_detector.synth.general_text import generate_general_text
from query_misspelling_detector.synth.sessions import SessionBehavior, generate_log
from query_misspelling_detector.synth.typo_channel import TypoChannel
from query_misspelling_detector.text.tokenizer import build_subword_vocab, build_word_vocab
from query_misspelling_detector.training import TrainConfig, TrainHistory, compare_histories, evaluate, train
from query_misspelling_detector.utils.config import Config
from query_misspelling_detector.utils.errors import InsufficientClassError, SizingError
from query_misspelling_detector.writers.report_writer import ReportWriter, format_comparison


# 比較するステージ（名前, 事前学習コーパス, エンコーダプリセット, 凍結）
ENCODER_STAGES = [
    ("bert-finetune", None, "slim", False),
    ("cross-domain-full", "mixed", "full", False),
    ("single-domain-slim", "domain", "slim", False),
    ("single-domain-slim-freeze", "domain", "slim", True),
]


def build_data(config: Config, seed: int, out_dir: Path) -> dict:
    """合成ログを作り、マイニングして微調整用・事前学習用のデータを用意する。"""
    synth = config.synth
    gazetteer = generate_gazetteer(seed, synth["n_entities"], zipf_exponent=synth["zipf_exponent"])
    channel = TypoChannel(
        op_probabilities=dict(synth["op_probabilities"]),
        max_edits=synth["max_edits"],
        extra_edit_prob=synth["extra_edit_prob"],
    )
    behavior = SessionBehavior(
        typo_rate=synth["typo_rate"],
        self_correct_share=synth["self_correct_share"],
        transfer_share=synth["transfer_share"],
        reformulation_share=synth["reformulation_share"],
    )
    sessions_path, truth_path = generate_log(
        gazetteer, channel, behavior, synth["n_sessions"], seed, str(out_dir / "synth"),
        shard_size=synth["shard_size"], workers=config.shards,
    )

    pipeline = MiningPipeline(DistanceBand.from_config(config.miner), config.miner["theta"], config.shards)
    result = pipeline.run(JsonlReader().read_sessions(str(sessions_path)))
    score = score_pairs(result.pairs(), TsvReader().read_ground_truth(str(truth_path)))
    print(f"  マイニング: precision={score.precision:.4f}, recall={score.recall:.4f}")

    finetune = config["dataset"]["finetune"]
    train_set, dev_set, test_set = split(result.labeled, SplitSpec(seed=seed, **finetune))
    for name, part in (("train", train_set), ("dev", dev_set), ("test", test_set)):
        write_tsv(part, str(out_dir / f"{name}.tsv"))

    pretrain = config["dataset"]["pretrain"]
    try:
        domain, _, _ = split(result.labeled, SplitSpec(seed=seed, **pretrain))
        domain_texts = [e.query for e in domain]
    except (SizingError, InsufficientClassError) as e:
        # プールが小さい場合はマイニング結果をすべて使う
        print(f"  事前学習コーパスを縮小: {e.message}")
        domain_texts = [e.query for e in result.labeled]
    general = generate_general_text(len(domain_texts), seed)
    return {
        "train": train_set,
        "dev": dev_set,
        "test": test_set,
        "domain": domain_texts,
        "mixed": domain_texts + general,
        "mining": score.to_dict(),
    }


def run_seed(config: Config, seed: int, out_dir: Path) -> list[dict]:
    """1シード分のステージをすべて学習・評価する。"""
    print(f"\n{'='*70}")
    print(f"シード {seed}")
    print(f"{'='*70}")
    out_dir.mkdir(parents=True, exist_ok=True)
    data = build_data(config, seed, out_dir)
    settings = config.vocab
    max_len = settings["max_len"]
    results = []

    def finish(label: str, model, checkpoint, history, vocab) -> None:
        write_checkpoint(checkpoint, str(out_dir / f"{label}.npz"))
        history.save(str(out_dir / f"{label}.history.jsonl"))
        report = evaluate(model, data["test"], vocab, max_len)
        results.append({"seed": seed, "stage": label, "test": report.to_dict(), "macro_f1": report.macro_f1})
        print(f"  {label}: test macro F1 = {report.macro_f1}")

    # LSTMベースライン
    word_vocab = build_word_vocab(data["train"], settings["word_max_size"])
    lstm = LstmClassifier(
        LstmConfig(len(word_vocab), config["lstm"]["embed_dim"], config["lstm"]["hidden_dim"], max_len),
        seed=seed,
    )
    lstm_config = TrainConfig.from_preset(config.training_preset("lstm"), "lstm", seed)
    checkpoint, history = train(lstm, lstm_config, data["train"], data["dev"], word_vocab, max_len, "lstm")
    finish("lstm", lstm, checkpoint, history, word_vocab)

    # エンコーダのステージ
    subword_vocab = build_subword_vocab(
        [e.query for e in data["train"]] + data["mixed"],
        settings["subword_size"],
        n_merges_cap=settings["n_merges_cap"],
    )
    pretrained = {}
    for label, corpus, preset, frozen in ENCODER_STAGES:
        encoder_config = EncoderConfig.preset(preset, len(subword_vocab), config["encoder"], max_len)
        head_config = HeadConfig(config["head"]["pooling"], config["head"]["dropout_p"], frozen)
        model = EncoderClassifier(encoder_config, head_config, seed=seed)
        if corpus is not None:
            key = (corpus, preset)
            if key not in pretrained:
                mlm = MaskedLanguageModel(encoder_config, seed=seed)
                mlm_config = TrainConfig.from_preset(
                    config.training_preset("pretrain"), "mlm_pretrain", seed,
                    dev_fraction=config["training"]["pretrain_dev_fraction"],
                )
                pretrained[key], _ = train(
                    mlm, mlm_config, data[corpus], [], subword_vocab, max_len, f"mlm-{corpus}-{preset}"
                )
            load_encoder_weights(model, pretrained[key])
        preset_name = "finetune" if corpus is not None else "supervised"
        finetune_config = TrainConfig.from_preset(config.training_preset(preset_name), "finetune", seed)
        checkpoint, history = train(model, finetune_config, data["train"], data["dev"], subword_vocab, max_len, label)
        finish(label, model, checkpoint, history, subword_vocab)
    return results


def check_trends(results: list[dict], seeds: list[int]) -> dict[str, int]:
    """シードごとに傾向の条件を満たすかを数える。"""
    passed = {"pretrained_beats_supervised": 0, "encoders_beat_lstm": 0, "freeze_hurts": 0}
    for seed in seeds:
        f1 = {r["stage"]: (r["macro_f1"] or 0.0) for r in results if r["seed"] == seed}
        slim, plain, lstm = f1["single-domain-slim"], f1["bert-finetune"], f1["lstm"]
        passed["pretrained_beats_supervised"] += slim - plain >= 0.01
        passed["encoders_beat_lstm"] += min(slim, plain) - lstm >= 0.02
        passed["freeze_hurts"] += slim - f1["single-domain-slim-freeze"] >= 0.03
    return passed


def main():
    parser = argparse.ArgumentParser(description="複数シードでのステージ比較")
    parser.add_argument("--seeds", type=int, nargs="+", default=[41, 42, 43])
    parser.add_argument("--config", help="JSON設定ファイル")
    parser.add_argument("--out", default="runs/stage_comparison")
    args = parser.parse_args()

    out_root = Path(args.out)
    start_time = time.time()
    results = []
    for seed in args.seeds:
        config = Config(args.config, {"seed": seed})
        results.extend(run_seed(config, seed, out_root / f"seed{seed}"))

    histories = [TrainHistory.load(str(p)) for p in sorted(out_root.glob("seed*/*.history.jsonl"))]
    rows = compare_histories(histories)
    print(f"\n{format_comparison(rows)}")
    ReportWriter().write_comparison(rows, str(out_root / "comparison.xlsx"))

    trends = check_trends(results, args.seeds)
    summary = {"results": results, "trends": trends, "n_seeds": len(args.seeds)}
    with open(out_root / "summary.json", "w", encoding="utf-8") as f:
        json.dump(summary, f, ensure_ascii=False, indent=2)

    print(f"\n{'='*70}")
    for name, count in trends.items():
        print(f"  {name}: {count}/{len(args.seeds)} シード")
    print(f"処理時間: {time.time() - start_time:.1f}秒")
    print(f"{'='*70}")


if __name__ == "__main__":
    main()
