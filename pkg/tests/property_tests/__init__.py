"""プロパティベーステストパッケージ。"""
