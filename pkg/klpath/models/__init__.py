"""report and experiment models"""
