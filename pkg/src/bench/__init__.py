"""Rips 複体のサイズ計測"""
