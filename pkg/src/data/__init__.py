"""入力の読み込みとレポートの書き出し"""
