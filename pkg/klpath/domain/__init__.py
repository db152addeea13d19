"""domain package for klpath"""
