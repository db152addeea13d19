"""module entry point: python -m klpath"""
from klpath.cli.main import main

if __name__ == "__main__":
    raise SystemExit(main())
