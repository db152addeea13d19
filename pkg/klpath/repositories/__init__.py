"""artifact persistence"""
