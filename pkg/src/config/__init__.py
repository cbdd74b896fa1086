"""設定（係数体の既定値・サイズ上限・ベンチマーク設定）"""
from src.config.settings import Settings, get_settings

__all__ = ["Settings", "get_settings"]
