"""
Tests package - 测试模块
"""
