"""command-line front end"""
