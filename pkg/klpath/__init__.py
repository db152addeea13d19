"""klpath: kloosterman paths modulo odd prime powers"""

__version__ = "1.0.0"
