"""モデル（LSTM・エンコーダ・ヘッド・チェックポイント）のテスト"""
