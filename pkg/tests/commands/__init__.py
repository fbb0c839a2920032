"""コマンドハンドラーのテスト"""
