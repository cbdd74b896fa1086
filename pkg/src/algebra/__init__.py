"""素体と疎行列"""
