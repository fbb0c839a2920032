"""自動微分・オプティマイザのテスト"""
