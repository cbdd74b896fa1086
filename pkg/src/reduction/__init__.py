"""行列簡約とパーシステンス"""
