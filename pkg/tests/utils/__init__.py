"""設定・マニフェストのテスト"""
