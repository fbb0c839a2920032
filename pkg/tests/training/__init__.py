"""学習・評価・予測のテスト"""
