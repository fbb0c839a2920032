"""データセット（割合調整・分割）のテスト"""
