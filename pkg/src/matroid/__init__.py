"""線形マトロイドとフィルトレーション"""
