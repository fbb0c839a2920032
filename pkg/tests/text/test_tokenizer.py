"""語彙とエンコード/デコードのユニットテスト"""

import pytest

from query_misspelling_detector.text.tokenizer import (
    CLS_ID,
    N_SPECIAL,
    PAD_ID,
    SEP_ID,
    SPECIAL_TOKENS,
    UNK_ID,
    WORD_BOUNDARY,
    Vocabulary,
    build_subword_vocab,
    build_word_vocab,
    decode,
    encode,
    encode_batch,
)
from query_misspelling_detector.utils.errors import ConfigurationError, InputFileNotFoundError
from query_misspelling_detector.utils.models import LabeledExample


CORPUS = ["liberty bowl", "sno isle", "ponderosa auto", "293 concord", "liberty park"]


class TestWordVocab:
    """単語語彙"""

    def test_frequency_then_lexicographic_order(self):
        vocab = build_word_vocab(["a b", "a c"], max_size=100)
        assert vocab.tokens[:N_SPECIAL] == SPECIAL_TOKENS
        assert vocab.tokens[N_SPECIAL:] == ("a", "b", "c")
        assert vocab.kind == "word"

    def test_specials_only_encodes_everything_as_unk(self):
        vocab = build_word_vocab(["a b"], max_size=5)
        assert len(vocab) == 5
        assert encode("a b", vocab) == [UNK_ID, UNK_ID]

    def test_rebuild_is_identical(self):
        assert build_word_vocab(CORPUS, 50) == build_word_vocab(CORPUS, 50)

    def test_accepts_labeled_examples(self):
        vocab = build_word_vocab([LabeledExample("sni osle", "sno isle", True)], 50)
        assert "sni" in vocab and "osle" in vocab

    def test_encode_pads_to_max_len(self):
        vocab = build_word_vocab(["a b"], max_size=10)
        assert encode("a b", vocab, 4) == [vocab.id_of("a"), vocab.id_of("b"), PAD_ID, PAD_ID]

    def test_encode_truncates_tail(self):
        vocab = build_word_vocab(["a b c"], max_size=10)
        assert encode("a b c", vocab, 2) == [vocab.id_of("a"), vocab.id_of("b")]

    def test_unseen_word_is_unk(self):
        vocab = build_word_vocab(CORPUS, 50)
        assert encode("liberty zzz", vocab)[1] == UNK_ID

    def test_max_size_below_specials_is_rejected(self):
        with pytest.raises(ConfigurationError):
            build_word_vocab(CORPUS, 4)

    def test_empty_corpus_is_rejected(self):
        with pytest.raises(ConfigurationError):
            build_word_vocab([], 10)


class TestSubwordVocab:
    """サブワード語彙"""

    def test_first_merge(self):
        # 基本記号 ▁a, a, b の3つ + 特殊トークン5つ、残り1つがマージ
        vocab = build_subword_vocab(["aaab"] * 5, target_size=9)
        assert vocab.tokens[-1] == "aa"
        assert len(vocab) == 9

    def test_kind_and_boundary_marker(self):
        vocab = build_subword_vocab(CORPUS, 200)
        assert vocab.kind == "subword"
        assert any(t.startswith(WORD_BOUNDARY) for t in vocab.tokens)

    def test_encode_empty(self):
        vocab = build_subword_vocab(CORPUS, 200)
        assert encode("", vocab) == [CLS_ID, SEP_ID]

    def test_round_trip_on_corpus(self):
        vocab = build_subword_vocab(CORPUS, 200)
        for text in CORPUS:
            assert decode(encode(text, vocab, 32), vocab) == text

    def test_unseen_character_becomes_unk(self):
        vocab = build_subword_vocab(CORPUS, 200)
        ids = encode("qxz", vocab)
        assert UNK_ID in ids
        assert ids[0] == CLS_ID and ids[-1] == SEP_ID

    def test_middle_truncation_keeps_cls_and_sep(self):
        vocab = build_subword_vocab(CORPUS, 30)
        ids = encode("ponderosa auto liberty bowl sno isle", vocab, 6)
        assert len(ids) == 6
        assert ids[0] == CLS_ID and ids[-1] == SEP_ID
        assert PAD_ID not in ids

    def test_max_len_below_two_is_rejected(self):
        vocab = build_subword_vocab(CORPUS, 200)
        with pytest.raises(ConfigurationError):
            encode("a", vocab, 1)

    def test_target_size_must_exceed_specials(self):
        with pytest.raises(ConfigurationError):
            build_subword_vocab(CORPUS, N_SPECIAL)

    def test_deterministic(self):
        assert build_subword_vocab(CORPUS, 60) == build_subword_vocab(CORPUS, 60)

    def test_padding_is_a_suffix(self):
        vocab = build_subword_vocab(CORPUS, 200)
        for ids in encode_batch(CORPUS, vocab, 32):
            first_pad = ids.index(PAD_ID)
            assert all(i == PAD_ID for i in ids[first_pad:])
            assert PAD_ID not in ids[:first_pad]


class TestVocabularyFile:
    """語彙ファイルの保存と読み込み"""

    @pytest.mark.parametrize("builder, size", [(build_word_vocab, 50), (build_subword_vocab, 100)])
    def test_save_and_load(self, tmp_path, builder, size):
        vocab = builder(CORPUS, size)
        path = tmp_path / "vocab.txt"
        vocab.save(str(path))
        loaded = Vocabulary.load(str(path))
        assert loaded.tokens == vocab.tokens
        assert loaded.kind == vocab.kind
        assert loaded.content_hash == vocab.content_hash

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(InputFileNotFoundError):
            Vocabulary.load(str(tmp_path / "missing.txt"))

    def test_duplicate_tokens_are_rejected(self):
        with pytest.raises(ConfigurationError):
            Vocabulary(kind="word", tokens=SPECIAL_TOKENS + ("a", "a"), max_size=10)
