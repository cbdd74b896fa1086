"""マトロイド・パーシステンスエンジン"""
